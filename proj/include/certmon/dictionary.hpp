#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "certmon/formula.hpp"

namespace certmon {

/// Ordered set of atom formulas; its and/or closure is the certified fragment.
class AtomicDictionary {
 public:
  AtomicDictionary(std::vector<Formula> atoms, std::vector<std::string> predicate_names);

  std::size_t size() const { return atoms_.size(); }
  const std::vector<Formula>& atoms() const { return atoms_; }
  const Formula& atom(std::size_t q) const { return atoms_.at(q); }
  const std::vector<std::string>& predicate_names() const { return names_; }
  std::size_t predicate_count() const { return names_.size(); }
  /// Largest atom horizon: the first valid monitoring time.
  std::size_t k_max() const { return k_max_; }

  /// Index of the atom structurally equal to f, if any.
  std::optional<std::size_t> find(const Formula& f) const;

 private:
  std::vector<Formula> atoms_;
  std::vector<std::string> names_;
  std::size_t k_max_ = 0;
  std::map<std::string, std::size_t> index_;
};

/// Always and eventually over every (predicate, interval) pair, ordered
/// predicate-major, then interval, then Always before Eventually.
AtomicDictionary build_depth1_dictionary(const std::vector<std::string>& predicate_names,
                                         const std::vector<TimeInterval>& intervals);

/// Same, with generated predicate names p_0 .. p_{m-1}.
AtomicDictionary build_depth1_dictionary(std::size_t m, const std::vector<TimeInterval>& intervals);

/// And/or tree over dictionary atom indices mirroring a fragment formula.
struct Decomposition {
  enum class Kind { Atom, And, Or };
  Kind kind = Kind::Atom;
  std::size_t atom = 0;
  std::vector<Decomposition> children;
};

/// Decomposes f into dictionary atoms. Atom matching is syntactic.
/// Throws NotInFragment naming the first subformula that is neither an
/// atom nor a conjunction/disjunction.
Decomposition check_membership(const Formula& f, const AtomicDictionary& dict);

/// Atom indices the decoder of f reads.
std::set<std::size_t> atom_support(const Formula& f, const AtomicDictionary& dict);

}  // namespace certmon
