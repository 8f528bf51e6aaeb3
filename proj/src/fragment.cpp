#include "certmon/fragment.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "certmon/error.hpp"

namespace certmon {

using Node = Decoder::Node;

namespace {

void collect_leaves(const Node& n, std::set<std::size_t>& out) {
  if (n.kind == Node::Kind::Leaf) {
    out.insert(n.index);
    return;
  }
  for (const auto& c : n.children) collect_leaves(c, out);
}

Node leaf(std::size_t index) { return Node{Node::Kind::Leaf, index, {}}; }

// n-ary node with same-kind children flattened and repeated leaves dropped.
Node combine(Node::Kind kind, std::vector<Node> parts) {
  Node out{kind, 0, {}};
  std::set<std::size_t> seen_leaves;
  auto add = [&](Node&& n, auto&& self) -> void {
    if (n.kind == kind) {
      for (auto& c : n.children) self(std::move(c), self);
    } else if (n.kind == Node::Kind::Leaf) {
      if (seen_leaves.insert(n.index).second) out.children.push_back(std::move(n));
    } else {
      out.children.push_back(std::move(n));
    }
  };
  for (auto& p : parts) add(std::move(p), add);
  if (out.children.size() == 1) return std::move(out.children.front());
  return out;
}

Node from_decomposition(const Decomposition& d) {
  if (d.kind == Decomposition::Kind::Atom) return leaf(d.atom);
  std::vector<Node> parts;
  for (const auto& c : d.children) parts.push_back(from_decomposition(c));
  return combine(d.kind == Decomposition::Kind::And ? Node::Kind::Min : Node::Kind::Max,
                 std::move(parts));
}

Node from_history(const Formula& f, const HistoryLayout& layout, std::size_t lag) {
  switch (f.op()) {
    case Op::Predicate:
      if (f.predicate_index() >= layout.m) {
        throw ValidationError("predicate index " + std::to_string(f.predicate_index()) +
                              " outside layout with m=" + std::to_string(layout.m));
      }
      return leaf(layout.index(f.predicate_index(), lag));
    case Op::And:
    case Op::Or: {
      std::vector<Node> parts;
      parts.push_back(from_history(f.left(), layout, lag));
      parts.push_back(from_history(f.right(), layout, lag));
      return combine(f.op() == Op::And ? Node::Kind::Min : Node::Kind::Max, std::move(parts));
    }
    case Op::Always:
    case Op::Eventually: {
      std::vector<Node> parts;
      for (std::size_t j = f.interval().a; j <= f.interval().b; ++j) {
        parts.push_back(from_history(f.child(), layout, lag + j));
      }
      return combine(f.op() == Op::Always ? Node::Kind::Min : Node::Kind::Max, std::move(parts));
    }
  }
  return leaf(0);
}

double evaluate(const Node& n, std::span<const double> b) {
  switch (n.kind) {
    case Node::Kind::Leaf:
      return b[n.index];
    case Node::Kind::Min: {
      double best = evaluate(n.children.front(), b);
      for (std::size_t i = 1; i < n.children.size(); ++i) {
        best = std::min(best, evaluate(n.children[i], b));
      }
      return best;
    }
    case Node::Kind::Max: {
      double best = evaluate(n.children.front(), b);
      for (std::size_t i = 1; i < n.children.size(); ++i) {
        best = std::max(best, evaluate(n.children[i], b));
      }
      return best;
    }
  }
  return 0.0;
}

nlohmann::json to_json(const Node& n) {
  if (n.kind == Node::Kind::Leaf) return {{"op", "leaf"}, {"idx", n.index}};
  nlohmann::json children = nlohmann::json::array();
  for (const auto& c : n.children) children.push_back(to_json(c));
  return {{"op", n.kind == Node::Kind::Min ? "min" : "max"}, {"children", children}};
}

}  // namespace

Decoder::Decoder(Node root, BasisKind kind, std::size_t dim)
    : root_(std::move(root)), kind_(kind), dim_(dim) {
  collect_leaves(root_, support_);
  if (!support_.empty() && *support_.rbegin() >= dim_) {
    throw DimensionMismatch("decoder leaf index outside basis dimension " + std::to_string(dim_));
  }
}

double Decoder::operator()(std::span<const double> b) const {
  if (b.size() != dim_) {
    throw DimensionMismatch("decoder expects " + std::to_string(dim_) +
                            " coordinates, got " + std::to_string(b.size()));
  }
  return evaluate(root_, b);
}

Decoder compile_semantic_decoder(const Formula& f, const AtomicDictionary& dict) {
  return Decoder(from_decomposition(check_membership(f, dict)), BasisKind::Semantic, dict.size());
}

Decoder compile_history_decoder(const Formula& f, const HistoryLayout& layout) {
  if (horizon(f) > layout.k_max) {
    throw HorizonExceeded("formula horizon " + std::to_string(horizon(f)) +
                          " exceeds history length " + std::to_string(layout.k_max));
  }
  return Decoder(from_history(f, layout, 0), BasisKind::PredicateHistory, layout.dim());
}

double decode(const Decoder& d, const BasisVector& b) {
  if (b.kind != d.basis_kind()) {
    throw DimensionMismatch(std::string("decoder expects a ") + to_string(d.basis_kind()) +
                            " basis, got " + to_string(b.kind));
  }
  return d(b.values);
}

std::string decoder_to_json(const Decoder& d) { return to_json(d.root()).dump(); }

InformationOrderReport information_order_check(const AtomicDictionary& dict,
                                               std::span<const Episode> episodes) {
  const HistoryLayout layout{dict.predicate_count(), dict.k_max()};
  InformationOrderReport report;
  report.semantic_dim = dict.size();
  report.history_dim = layout.dim();

  std::vector<Decoder> stacked;
  std::set<std::size_t> single_leaves;
  bool all_single = true;
  for (const auto& atom : dict.atoms()) {
    stacked.push_back(compile_history_decoder(atom, layout));
    const auto& root = stacked.back().root();
    if (root.kind == Node::Kind::Leaf) {
      single_leaves.insert(root.index);
    } else {
      all_single = false;
    }
  }
  report.is_permutation = all_single && single_leaves.size() == dict.size() &&
                          dict.size() == layout.dim();

  for (const auto& ep : episodes) {
    if (ep.length() <= dict.k_max()) continue;
    const BasisTrack history = predicate_history_track(ep, dict.k_max());
    const BasisTrack semantic = semantic_basis_track(ep, dict);
    for (std::size_t t = dict.k_max(); t <= ep.last_time(); ++t) {
      const auto bp = history.at(t);
      const auto ba = semantic.at(t);
      for (std::size_t q = 0; q < stacked.size(); ++q) {
        report.max_discrepancy = std::max(report.max_discrepancy, std::abs(stacked[q](bp) - ba[q]));
      }
      ++report.samples;
    }
  }
  return report;
}

}  // namespace certmon
