#include "certmon/formula.hpp"

#include <cassert>

#include "certmon/error.hpp"

namespace certmon {

TimeInterval::TimeInterval(std::size_t lo, std::size_t hi) : a(lo), b(hi) {
  if (lo > hi) {
    throw ValidationError("interval bounds reversed: [" + std::to_string(lo) + "," +
                          std::to_string(hi) + "]");
  }
}

Formula Formula::predicate(std::size_t index, std::string name) {
  return Formula(std::make_shared<const Node>(Node{Op::Predicate, index, std::move(name), {}, {}}));
}

Formula Formula::conj(Formula left, Formula right) {
  return Formula(std::make_shared<const Node>(
      Node{Op::And, 0, {}, {}, {std::move(left), std::move(right)}}));
}

Formula Formula::disj(Formula left, Formula right) {
  return Formula(std::make_shared<const Node>(
      Node{Op::Or, 0, {}, {}, {std::move(left), std::move(right)}}));
}

Formula Formula::always(TimeInterval interval, Formula child) {
  return Formula(
      std::make_shared<const Node>(Node{Op::Always, 0, {}, interval, {std::move(child)}}));
}

Formula Formula::eventually(TimeInterval interval, Formula child) {
  return Formula(
      std::make_shared<const Node>(Node{Op::Eventually, 0, {}, interval, {std::move(child)}}));
}

std::size_t Formula::predicate_index() const {
  assert(op() == Op::Predicate);
  return node_->predicate;
}

const std::string& Formula::predicate_name() const {
  assert(op() == Op::Predicate);
  return node_->name;
}

const TimeInterval& Formula::interval() const {
  assert(is_temporal());
  return node_->interval;
}

const Formula& Formula::left() const {
  assert(is_binary());
  return node_->children[0];
}

const Formula& Formula::right() const {
  assert(is_binary());
  return node_->children[1];
}

const Formula& Formula::child() const {
  assert(is_temporal());
  return node_->children[0];
}

bool operator==(const Formula& lhs, const Formula& rhs) {
  if (lhs.node_ == rhs.node_) return true;
  if (lhs.op() != rhs.op()) return false;
  switch (lhs.op()) {
    case Op::Predicate:
      return lhs.predicate_index() == rhs.predicate_index();
    case Op::And:
    case Op::Or:
      return lhs.left() == rhs.left() && lhs.right() == rhs.right();
    case Op::Always:
    case Op::Eventually:
      return lhs.interval() == rhs.interval() && lhs.child() == rhs.child();
  }
  return false;
}

namespace {

int precedence(const Formula& f) {
  switch (f.op()) {
    case Op::Or: return 1;
    case Op::And: return 2;
    default: return 3;
  }
}

void print(const Formula& f, std::string& out) {
  switch (f.op()) {
    case Op::Predicate:
      out += f.predicate_name();
      return;
    case Op::Always:
    case Op::Eventually: {
      out += f.op() == Op::Always ? "G[" : "F[";
      out += std::to_string(f.interval().a) + "," + std::to_string(f.interval().b) + "] ";
      const bool wrap = f.child().is_binary();
      if (wrap) out += '(';
      print(f.child(), out);
      if (wrap) out += ')';
      return;
    }
    case Op::And:
    case Op::Or: {
      const int mine = precedence(f);
      // Left-associative grammar: the right operand needs parentheses at equal precedence.
      const bool wrap_left = precedence(f.left()) < mine;
      const bool wrap_right = precedence(f.right()) <= mine;
      if (wrap_left) out += '(';
      print(f.left(), out);
      if (wrap_left) out += ')';
      out += f.op() == Op::And ? " & " : " | ";
      if (wrap_right) out += '(';
      print(f.right(), out);
      if (wrap_right) out += ')';
      return;
    }
  }
}

void collect_support(const Formula& f, std::size_t shift, std::set<PredicateLag>& out) {
  switch (f.op()) {
    case Op::Predicate:
      out.insert({f.predicate_index(), shift});
      return;
    case Op::And:
    case Op::Or:
      collect_support(f.left(), shift, out);
      collect_support(f.right(), shift, out);
      return;
    case Op::Always:
    case Op::Eventually: {
      // Supports of shifted children overlap heavily; expand the child once and shift it.
      std::set<PredicateLag> inner;
      collect_support(f.child(), 0, inner);
      for (std::size_t j = f.interval().a; j <= f.interval().b; ++j) {
        for (const auto& c : inner) out.insert({c.predicate, c.lag + j + shift});
      }
      return;
    }
  }
}

}  // namespace

std::string to_string(const Formula& f) {
  std::string out;
  print(f, out);
  return out;
}

std::size_t horizon(const Formula& f) {
  switch (f.op()) {
    case Op::Predicate:
      return 0;
    case Op::And:
    case Op::Or:
      return std::max(horizon(f.left()), horizon(f.right()));
    case Op::Always:
    case Op::Eventually:
      return f.interval().b + horizon(f.child());
  }
  return 0;
}

std::set<PredicateLag> predicate_lag_support(const Formula& f) {
  std::set<PredicateLag> out;
  collect_support(f, 0, out);
  return out;
}

std::size_t formula_size(const Formula& f) {
  switch (f.op()) {
    case Op::Predicate:
      return 1;
    case Op::And:
    case Op::Or:
      return 1 + formula_size(f.left()) + formula_size(f.right());
    case Op::Always:
    case Op::Eventually:
      return 1 + formula_size(f.child());
  }
  return 0;
}

}  // namespace certmon
