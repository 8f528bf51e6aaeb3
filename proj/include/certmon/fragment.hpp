#pragma once

#include <cstddef>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "certmon/dictionary.hpp"
#include "certmon/formula.hpp"
#include "certmon/robustness.hpp"

namespace certmon {

/// Min/max tree over basis coordinates. Every decoder is monotone
/// nondecreasing in each coordinate and 1-Lipschitz in the max-norm.
class Decoder {
 public:
  struct Node {
    enum class Kind { Leaf, Min, Max };
    Kind kind = Kind::Leaf;
    std::size_t index = 0;  // leaf only
    std::vector<Node> children;
  };

  Decoder(Node root, BasisKind kind, std::size_t dim);

  const Node& root() const { return root_; }
  BasisKind basis_kind() const { return kind_; }
  /// Basis dimension the decoder was compiled against.
  std::size_t dim() const { return dim_; }
  /// Coordinates read by the decoder.
  const std::set<std::size_t>& support() const { return support_; }

  /// Throws DimensionMismatch if b has the wrong length.
  double operator()(std::span<const double> b) const;

 private:
  Node root_;
  BasisKind kind_;
  std::size_t dim_;
  std::set<std::size_t> support_;
};

/// Leaf per atom, min for conjunction, max for disjunction. Throws NotInFragment.
Decoder compile_semantic_decoder(const Formula& f, const AtomicDictionary& dict);

/// Unrolls temporal operators into min/max over lagged predicate coordinates.
/// Throws HorizonExceeded when horizon(f) > layout.k_max.
Decoder compile_history_decoder(const Formula& f, const HistoryLayout& layout);

/// Throws DimensionMismatch when the kinds or dimensions disagree.
double decode(const Decoder& d, const BasisVector& b);

/// Nested JSON text {op: "min"|"max"|"leaf", idx?, children?}.
std::string decoder_to_json(const Decoder& d);

struct InformationOrderReport {
  std::size_t semantic_dim = 0;
  std::size_t history_dim = 0;
  std::size_t samples = 0;
  /// Largest |stacked history decoders(B^P_t) - B^A_t| seen; zero when the
  /// semantic basis factors through the predicate history.
  double max_discrepancy = 0.0;
  /// True when each atom decoder is a single distinct leaf covering all of B^P.
  bool is_permutation = false;
};

/// Checks on real episodes that stacking the history decoders of all atoms
/// reproduces the semantic basis at every valid time.
InformationOrderReport information_order_check(const AtomicDictionary& dict,
                                               std::span<const Episode> episodes);

}  // namespace certmon
