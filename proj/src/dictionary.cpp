#include "certmon/dictionary.hpp"

#include <algorithm>

#include "certmon/error.hpp"

namespace certmon {

AtomicDictionary::AtomicDictionary(std::vector<Formula> atoms,
                                   std::vector<std::string> predicate_names)
    : atoms_(std::move(atoms)), names_(std::move(predicate_names)) {
  if (atoms_.empty()) throw ValidationError("atomic dictionary must not be empty");
  for (std::size_t q = 0; q < atoms_.size(); ++q) {
    auto [it, inserted] = index_.emplace(to_string(atoms_[q]), q);
    if (!inserted) {
      throw ValidationError("duplicate dictionary atom '" + it->first + "'");
    }
    k_max_ = std::max(k_max_, horizon(atoms_[q]));
    for (const auto& c : predicate_lag_support(atoms_[q])) {
      if (c.predicate >= names_.size()) {
        throw ValidationError("atom '" + it->first + "' references an undeclared predicate");
      }
    }
  }
}

std::optional<std::size_t> AtomicDictionary::find(const Formula& f) const {
  auto it = index_.find(to_string(f));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

AtomicDictionary build_depth1_dictionary(const std::vector<std::string>& predicate_names,
                                         const std::vector<TimeInterval>& intervals) {
  if (intervals.empty()) throw ValidationError("interval list must not be empty");
  for (std::size_t i = 0; i < intervals.size(); ++i) {
    for (std::size_t j = i + 1; j < intervals.size(); ++j) {
      if (intervals[i] == intervals[j]) {
        throw ValidationError("duplicate interval [" + std::to_string(intervals[i].a) + "," +
                              std::to_string(intervals[i].b) + "]");
      }
    }
  }
  std::vector<Formula> atoms;
  atoms.reserve(2 * predicate_names.size() * intervals.size());
  for (std::size_t k = 0; k < predicate_names.size(); ++k) {
    const Formula p = Formula::predicate(k, predicate_names[k]);
    for (const auto& iv : intervals) {
      atoms.push_back(Formula::always(iv, p));
      atoms.push_back(Formula::eventually(iv, p));
    }
  }
  return AtomicDictionary(std::move(atoms), predicate_names);
}

AtomicDictionary build_depth1_dictionary(std::size_t m, const std::vector<TimeInterval>& intervals) {
  std::vector<std::string> names;
  for (std::size_t k = 0; k < m; ++k) names.push_back("p_" + std::to_string(k));
  return build_depth1_dictionary(names, intervals);
}

Decomposition check_membership(const Formula& f, const AtomicDictionary& dict) {
  if (auto q = dict.find(f)) return Decomposition{Decomposition::Kind::Atom, *q, {}};
  if (f.is_binary()) {
    Decomposition d;
    d.kind = f.op() == Op::And ? Decomposition::Kind::And : Decomposition::Kind::Or;
    d.children.push_back(check_membership(f.left(), dict));
    d.children.push_back(check_membership(f.right(), dict));
    return d;
  }
  throw NotInFragment(to_string(f));
}

namespace {

void collect_atoms(const Decomposition& d, std::set<std::size_t>& out) {
  if (d.kind == Decomposition::Kind::Atom) {
    out.insert(d.atom);
    return;
  }
  for (const auto& c : d.children) collect_atoms(c, out);
}

}  // namespace

std::set<std::size_t> atom_support(const Formula& f, const AtomicDictionary& dict) {
  std::set<std::size_t> out;
  collect_atoms(check_membership(f, dict), out);
  return out;
}

}  // namespace certmon
