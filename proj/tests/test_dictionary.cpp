#include <doctest.h>

#include <random>

#include "certmon/dictionary.hpp"
#include "certmon/error.hpp"
#include "support/oracles.hpp"

using namespace certmon;

namespace {
const std::vector<TimeInterval> kTable{{0, 1}, {0, 2}, {0, 4}, {0, 8}, {0, 16}};
}

TEST_CASE("depth-1 dictionary sizes") {
  const auto dict = build_depth1_dictionary(7, kTable);
  CHECK(dict.size() == 70);
  CHECK(dict.k_max() == 16);

  const auto one = build_depth1_dictionary(1, {{0, 0}});
  REQUIRE(one.size() == 2);
  CHECK(to_string(one.atom(0)) == "G[0,0] p_0");
  CHECK(to_string(one.atom(1)) == "F[0,0] p_0");
}

TEST_CASE("depth-1 ordering: predicate, interval, always before eventually") {
  const auto dict = build_depth1_dictionary(2, {{0, 1}, {0, 2}});
  REQUIRE(dict.size() == 8);
  const Formula want = Formula::eventually({0, 2}, Formula::predicate(1, "p_1"));
  CHECK(dict.find(want) == std::optional<std::size_t>(7));
  // independent index rule: k * 2|I| + 2 * i + (eventually ? 1 : 0)
  for (std::size_t k = 0; k < 2; ++k) {
    for (std::size_t i = 0; i < 2; ++i) {
      CHECK(dict.atom(k * 4 + 2 * i).op() == Op::Always);
      CHECK(dict.atom(k * 4 + 2 * i + 1).op() == Op::Eventually);
      CHECK(dict.atom(k * 4 + 2 * i).child().predicate_index() == k);
    }
  }
}

TEST_CASE("dictionary validation") {
  CHECK_THROWS_AS(build_depth1_dictionary(2, {}), ValidationError);
  CHECK_THROWS_AS(build_depth1_dictionary(2, {{0, 1}, {0, 1}}), ValidationError);
  const Formula p = Formula::predicate(0, "p_0");
  CHECK_THROWS_AS(AtomicDictionary({}, {"p_0"}), ValidationError);
  CHECK_THROWS_AS(AtomicDictionary({p, p}, {"p_0"}), ValidationError);
  CHECK_THROWS_AS(AtomicDictionary({Formula::predicate(3, "p_3")}, {"p_0"}), ValidationError);
}

TEST_CASE("atom_support examples") {
  const auto dict = build_depth1_dictionary(7, kTable);
  CHECK(atom_support(dict.atom(3), dict) == std::set<std::size_t>{3});
  const Formula f = Formula::conj(dict.atom(1), Formula::disj(dict.atom(1), dict.atom(4)));
  CHECK(atom_support(f, dict) == std::set<std::size_t>{1, 4});
}

TEST_CASE("window outside the dictionary is not in the fragment") {
  const auto dict = build_depth1_dictionary(
      std::vector<std::string>{"p_clear", "p_f", "p_l", "p_r", "p_front_margin", "p_goal",
                               "p_speed"},
      kTable);
  const Formula f = parse_formula("G[0,3] p_f", dict.predicate_names());
  CHECK_THROWS_AS(check_membership(f, dict), NotInFragment);
  try {
    check_membership(f, dict);
  } catch (const NotInFragment& e) {
    CHECK(e.offending() == "G[0,3] p_f");
  }
}

TEST_CASE("temporal operator over a conjunction is not a depth-1 atom") {
  const auto dict = build_depth1_dictionary(
      std::vector<std::string>{"p_clear", "p_f", "p_l", "p_r", "p_front_margin", "p_goal",
                               "p_speed"},
      kTable);
  const Formula f = parse_formula("G[0,4] (p_f & p_l)", dict.predicate_names());
  CHECK_THROWS_AS(check_membership(f, dict), NotInFragment);
}

TEST_CASE("membership decomposition mirrors the and/or tree") {
  const auto dict = build_depth1_dictionary(2, {{0, 1}});
  const Formula f = Formula::disj(dict.atom(0), Formula::conj(dict.atom(2), dict.atom(3)));
  const Decomposition d = check_membership(f, dict);
  CHECK(d.kind == Decomposition::Kind::Or);
  REQUIRE(d.children.size() == 2);
  CHECK(d.children[0].kind == Decomposition::Kind::Atom);
  CHECK(d.children[0].atom == 0);
  CHECK(d.children[1].kind == Decomposition::Kind::And);
}

namespace {
void leaves(const Decomposition& d, std::set<std::size_t>& out) {
  if (d.kind == Decomposition::Kind::Atom) out.insert(d.atom);
  for (const auto& c : d.children) leaves(c, out);
}
}  // namespace

TEST_CASE("property: random and/or trees over atoms are members; leaves equal atom_support") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const auto dict = oracle::dictionary(rng, 3, 6, 8);
    for (int i = 0; i < 40; ++i) {
      const Formula f = oracle::fragment(rng, dict, 5);
      std::set<std::size_t> got;
      leaves(check_membership(f, dict), got);
      CHECK(got == atom_support(f, dict));
    }
  }
}
