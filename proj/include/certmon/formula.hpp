#pragma once

#include <cstddef>
#include <memory>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace certmon {

/// Backward-looking discrete window [a, b] in timesteps.
struct TimeInterval {
  std::size_t a = 0;
  std::size_t b = 0;

  TimeInterval() = default;
  TimeInterval(std::size_t lo, std::size_t hi);

  std::size_t width() const { return b - a + 1; }
  bool contains(const TimeInterval& other) const { return a <= other.a && other.b <= b; }

  friend bool operator==(const TimeInterval&, const TimeInterval&) = default;
  friend auto operator<=>(const TimeInterval&, const TimeInterval&) = default;
};

enum class Op { Predicate, And, Or, Always, Eventually };

/// Immutable past-time STL formula in positive normal form.
///
/// Nodes are shared between copies, so formulas are cheap to pass by value.
class Formula {
 public:
  static Formula predicate(std::size_t index, std::string name);
  static Formula conj(Formula left, Formula right);
  static Formula disj(Formula left, Formula right);
  static Formula always(TimeInterval interval, Formula child);
  static Formula eventually(TimeInterval interval, Formula child);

  Op op() const;
  bool is_temporal() const { return op() == Op::Always || op() == Op::Eventually; }
  bool is_binary() const { return op() == Op::And || op() == Op::Or; }

  // Accessors; calling one that does not match op() is a logic error.
  std::size_t predicate_index() const;
  const std::string& predicate_name() const;
  const TimeInterval& interval() const;
  const Formula& left() const;
  const Formula& right() const;
  const Formula& child() const;

  /// Structural equality: same operators, intervals and predicates.
  friend bool operator==(const Formula& lhs, const Formula& rhs);

 private:
  struct Node;
  explicit Formula(std::shared_ptr<const Node> node) : node_(std::move(node)) {}

  std::shared_ptr<const Node> node_;
};

struct Formula::Node {
  Op op;
  std::size_t predicate = 0;
  std::string name;
  TimeInterval interval;
  std::vector<Formula> children;
};

inline Op Formula::op() const { return node_->op; }

/// Coordinate (k, j) of the predicate-history basis: predicate k at lag j.
struct PredicateLag {
  std::size_t predicate = 0;
  std::size_t lag = 0;

  friend bool operator==(const PredicateLag&, const PredicateLag&) = default;
  friend auto operator<=>(const PredicateLag&, const PredicateLag&) = default;
};

/// Parses the concrete syntax
///
///   formula := or ; or := and ("|" and)* ; and := unary ("&" unary)*
///   unary   := "G[" int "," int "]" unary | "F[" int "," int "]" unary
///            | "(" formula ")" | IDENT
///
/// Identifiers are resolved against `predicate_names`; their position is the
/// predicate index. Negation is rejected: encode a negated predicate as a new
/// predicate with the sign-flipped robustness function.
Formula parse_formula(std::string_view text, const std::vector<std::string>& predicate_names);

/// Canonical text form; parse_formula(to_string(f), names) == f.
std::string to_string(const Formula& f);

std::size_t horizon(const Formula& f);

/// Every (k, j) such that the robustness of f at t can depend on predicate k at t - j.
std::set<PredicateLag> predicate_lag_support(const Formula& f);

/// Number of nodes in the tree.
std::size_t formula_size(const Formula& f);

}  // namespace certmon
