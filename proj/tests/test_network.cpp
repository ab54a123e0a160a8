#include <catch2/catch_amalgamated.hpp>

#include "minreg/network.hpp"
#include "minreg/rng.hpp"

using namespace minreg;

TEST_CASE("network parsing accepts the worked example") {
  std::string text = R"({
    "reactions": [
      {"reactant": [0, 1], "product": [2, 0]},
      {"reactant": [1, 0], "product": [0, 2]}
    ],
    "epsilon": 0.5
  })";
  network_input in = parse_network(text);
  CHECK(in.rp.v1 == vec2{2, -1});
  CHECK(in.rp.v2 == vec2{-1, 2});
  CHECK(in.eps.value() == 0.5);
  CHECK(in.eps.band_lo() == 0.25);
  CHECK(in.eps.band_hi() == 4.0);
}

TEST_CASE("parsing rejects bad inputs with the right codes") {
  auto code_of = [](const std::string& text) {
    try {
      parse_network(text);
    } catch (const error& e) {
      return e.code();
    }
    return errc::internal;
  };

  SECTION("parallel reaction vectors") {
    CHECK(code_of(R"({"reactions": [
        {"reactant": [0,1], "product": [2,0]},
        {"reactant": [0,2], "product": [4,0]}], "epsilon": 0.5})") ==
          errc::parallel_reactions);
  }
  SECTION("axis-parallel reaction vector") {
    CHECK(code_of(R"({"reactions": [
        {"reactant": [1,1], "product": [1,3]},
        {"reactant": [1,0], "product": [0,2]}], "epsilon": 0.5})") ==
          errc::degenerate_slope);
  }
  SECTION("slope exactly -1") {
    CHECK(code_of(R"({"reactions": [
        {"reactant": [1,0], "product": [0,1]},
        {"reactant": [1,0], "product": [0,2]}], "epsilon": 0.5})") ==
          errc::degenerate_slope);
  }
  SECTION("not JSON") { CHECK(code_of("nope") == errc::malformed_input); }
  SECTION("one reaction only") {
    CHECK(code_of(R"({"reactions": [
        {"reactant": [0,1], "product": [2,0]}], "epsilon": 0.5})") ==
          errc::malformed_input);
  }
  SECTION("epsilon out of range") {
    CHECK(code_of(R"({"reactions": [
        {"reactant": [0,1], "product": [2,0]},
        {"reactant": [1,0], "product": [0,2]}], "epsilon": 1.0})") ==
          errc::malformed_input);
    CHECK(code_of(R"({"reactions": [
        {"reactant": [0,1], "product": [2,0]},
        {"reactant": [1,0], "product": [0,2]}], "epsilon": 0.0})") ==
          errc::malformed_input);
  }
  SECTION("negative exponent") {
    CHECK(code_of(R"({"reactions": [
        {"reactant": [0,-1], "product": [2,0]},
        {"reactant": [1,0], "product": [0,2]}], "epsilon": 0.5})") ==
          errc::malformed_input);
  }
}

namespace {
reaction_pair from_vectors(vec2 v1, vec2 v2) {
  // Realize the requested reaction vectors with nonnegative exponents.
  auto base = [](vec2 v) -> reaction {
    vec2 lo{std::max(0.0, -v.x), std::max(0.0, -v.y)};
    return {lo, lo + v};
  };
  return reaction_pair::create(base(v1), base(v2));
}
}  // namespace

TEST_CASE("case classification matches the slope chart") {
  CHECK(classify_case(from_vectors({2, -1}, {-1, 2})).id == case_id::i);
  CHECK(classify_case(from_vectors({2, -1}, {3, -1})).id == case_id::ii);
  CHECK(classify_case(from_vectors({1, -2}, {1, -3})).id == case_id::iii);
  CHECK(classify_case(from_vectors({1, 2}, {2, 1})).id == case_id::iv);
  CHECK(classify_case(from_vectors({-2, 1}, {1, 1})).id == case_id::v);
  CHECK(classify_case(from_vectors({-1, 2}, {1, 1})).id == case_id::vi);
}

TEST_CASE("mixed-slope subcase follows the exponent sum") {
  // p1=2,q1=1,p2=-1,q2=1: sum = -1 < 0.
  case_label a = classify_case(case_v_network());
  CHECK(a.id == case_id::v);
  CHECK(a.sub == subcase_id::a);
  CHECK(a.sigma == -1.0);

  // p1=4,q1=1,p2=-1,q2=1: sum = +1 > 0.
  case_label b = classify_case(from_vectors({-4, 1}, {1, 1}));
  CHECK(b.sub == subcase_id::b);

  // p1=3,q1=1,p2=-1,q2=1: sum = 0.
  case_label c = classify_case(from_vectors({-3, 1}, {1, 1}));
  CHECK(c.sub == subcase_id::c);
}

TEST_CASE("pq normalization lands in the sign convention") {
  for (auto rp : {case_v_network(), from_vectors({1, 1}, {-2, 1}),
                  from_vectors({2, -1}, {-1, -1})}) {
    if (!classify_case(rp).mixed_slopes()) continue;
    pq_normalization n = normalize_pq(rp);
    CHECK(n.p1 > 0);
    CHECK(n.q1 > 0);
    CHECK(n.p2 < 0);
    CHECK(n.q2 > 0);
  }
  CHECK_THROWS_AS(normalize_pq(example_network()), error);
}

TEST_CASE("classification is invariant under swapping and reorientation") {
  std::vector<reaction_pair> fixtures = {
      example_network(), case_v_network(), from_vectors({2, -1}, {3, -1}),
      from_vectors({1, 2}, {2, 1}), from_vectors({-1, 2}, {1, 1})};
  for (const auto& rp : fixtures) {
    case_id base = classify_case(rp).id;
    for (int mask = 0; mask < 8; ++mask) {
      reaction_pair t = rp;
      if (mask & 1) t = t.with_reversed(1);
      if (mask & 2) t = t.with_reversed(2);
      if (mask & 4) t = t.with_swapped();
      CHECK(classify_case(t).id == base);
    }
  }
}
