#include <cctype>
#include <limits>

#include "certmon/error.hpp"
#include "certmon/formula.hpp"

namespace certmon {
namespace {

class Parser {
 public:
  Parser(std::string_view text, const std::vector<std::string>& names)
      : text_(text), names_(names) {}

  Formula parse() {
    Formula f = parse_or();
    skip_ws();
    if (!at_end()) fail(std::string("unexpected '") + peek() + "'");
    return f;
  }

 private:
  Formula parse_or() {
    Formula f = parse_and();
    while (accept('|')) f = Formula::disj(f, parse_and());
    return f;
  }

  Formula parse_and() {
    Formula f = parse_unary();
    while (accept('&')) f = Formula::conj(f, parse_unary());
    return f;
  }

  Formula parse_unary() {
    skip_ws();
    if (at_end()) fail("unexpected end of input, expected a formula");
    const char c = peek();
    if (c == '!' || c == '~' || c == '-') {
      fail("negation is not supported: formulas must be in positive normal form; "
           "declare a predicate with the negated robustness function instead");
    }
    if (c == '(') {
      advance();
      Formula f = parse_or();
      expect(')');
      return f;
    }
    if (is_ident_start(c)) {
      const std::size_t start_line = line_, start_col = col_;
      std::string ident = read_ident();
      if ((ident == "G" || ident == "F") && accept('[')) {
        const TimeInterval iv = parse_interval_tail(start_line, start_col);
        Formula child = parse_unary();
        return ident == "G" ? Formula::always(iv, child) : Formula::eventually(iv, child);
      }
      for (std::size_t k = 0; k < names_.size(); ++k) {
        if (names_[k] == ident) return Formula::predicate(k, ident);
      }
      if (ident == "not" || ident == "NOT") {
        throw ParseError("negation is not supported: formulas must be in positive normal form",
                         start_line, start_col);
      }
      throw ParseError("unknown predicate '" + ident + "'", start_line, start_col);
    }
    fail(std::string("unexpected '") + c + "'");
  }

  // Parses "int , int ]" after the opening bracket.
  TimeInterval parse_interval_tail(std::size_t line, std::size_t col) {
    const std::size_t lo = parse_int();
    expect(',');
    const std::size_t hi = parse_int();
    expect(']');
    if (lo > hi) {
      throw ParseError("interval bounds reversed: [" + std::to_string(lo) + "," +
                           std::to_string(hi) + "]",
                       line, col);
    }
    return TimeInterval(lo, hi);
  }

  std::size_t parse_int() {
    skip_ws();
    if (at_end() || !std::isdigit(static_cast<unsigned char>(peek()))) {
      fail("expected a nonnegative integer");
    }
    std::size_t value = 0;
    while (!at_end() && std::isdigit(static_cast<unsigned char>(peek()))) {
      const std::size_t digit = static_cast<std::size_t>(peek() - '0');
      if (value > (std::numeric_limits<std::size_t>::max() - digit) / 10) {
        fail("integer too large");
      }
      value = value * 10 + digit;
      advance();
    }
    return value;
  }

  std::string read_ident() {
    std::string out;
    while (!at_end() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_')) {
      out += peek();
      advance();
    }
    return out;
  }

  static bool is_ident_start(char c) {
    return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
  }

  bool accept(char c) {
    skip_ws();
    if (!at_end() && peek() == c) {
      advance();
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) {
      if (at_end()) fail(std::string("expected '") + c + "' but reached end of input");
      fail(std::string("expected '") + c + "' but found '" + peek() + "'");
    }
  }

  void skip_ws() {
    while (!at_end() && std::isspace(static_cast<unsigned char>(peek()))) advance();
  }

  bool at_end() const { return pos_ >= text_.size(); }
  char peek() const { return text_[pos_]; }

  void advance() {
    if (text_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  [[noreturn]] void fail(const std::string& message) const {
    throw ParseError(message, line_, col_);
  }

  std::string_view text_;
  const std::vector<std::string>& names_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::size_t col_ = 1;
};

}  // namespace

Formula parse_formula(std::string_view text, const std::vector<std::string>& predicate_names) {
  return Parser(text, predicate_names).parse();
}

}  // namespace certmon
