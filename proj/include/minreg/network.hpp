#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <string>

#include "minreg/common.hpp"

#include "json.hpp"

namespace minreg {

/// Rate-box half width: admissible rate constants live in [eps, 1/eps].
class epsilon_t {
 public:
  explicit epsilon_t(double value) : value_(value) {
    require(std::isfinite(value) && value > 0.0 && value < 1.0,
            errc::malformed_input, "epsilon must lie in (0, 1), got " +
                format17(value));
  }

  double value() const { return value_; }
  double rate_lo() const { return value_; }
  double rate_hi() const { return 1.0 / value_; }
  /// Curve levels of one reversible reaction under extremal rate ratios.
  double band_lo() const { return value_ * value_; }
  double band_hi() const { return 1.0 / (value_ * value_); }
  /// log(1/eps^2) > 0; a level is in-band iff |log level| <= log_band().
  double log_band() const { return -2.0 * std::log(value_); }

 private:
  double value_;
};

/// One reversible reaction a X + b Y <-> a' X + b' Y, stored as the two
/// exponent pairs. Orientation matters only for labeling; the generated
/// dynamics is symmetric under swapping (reactant, product) together with
/// the corresponding rate pair.
struct reaction {
  vec2 reactant;  // (a, b)
  vec2 product;   // (a', b')

  vec2 vector() const { return product - reactant; }
  reaction reversed() const { return {product, reactant}; }
};

enum class case_id { i = 1, ii, iii, iv, v, vi };
enum class subcase_id { none, a, b, c };

struct case_label {
  case_id id = case_id::i;
  subcase_id sub = subcase_id::none;
  /// p1 + p2 - q1 - q2 in the normalized convention; meaningful for v/vi.
  double sigma = 0.0;

  bool mixed_slopes() const { return id == case_id::v || id == case_id::vi; }
};

inline std::string to_string(case_id c) {
  switch (c) {
    case case_id::i: return "I";
    case case_id::ii: return "II";
    case case_id::iii: return "III";
    case case_id::iv: return "IV";
    case case_id::v: return "V";
    case case_id::vi: return "VI";
  }
  return "?";
}

inline std::string to_string(subcase_id s) {
  switch (s) {
    case subcase_id::a: return "a";
    case subcase_id::b: return "b";
    case subcase_id::c: return "c";
    default: return "";
  }
}

/// Exponent convention for the mixed-slope cases: reactions are reordered /
/// reoriented so that reaction 1 has negative slope with p1 = a1 - a1' > 0,
/// q1 = b1' - b1 > 0 and reaction 2 has positive slope with p2 = a2 - a2' < 0,
/// q2 = b2' - b2 > 0. The applied transform is recorded so results can be
/// mapped back to the input orientation.
struct pq_normalization {
  double p1 = 0, q1 = 0, p2 = 0, q2 = 0;
  bool swapped = false;  // reaction order exchanged
  bool flip1 = false;    // normalized reaction 1 runs opposite to its input
  bool flip2 = false;

  double sigma() const { return p1 + p2 - q1 - q2; }
};

/// Two reversible reactions with independent, non-axis-parallel reaction
/// vectors. Construction validates; an instance is immutable afterwards.
struct reaction_pair {
  reaction r1, r2;
  vec2 v1, v2;  // cached reaction vectors

  static reaction_pair create(const reaction& a, const reaction& b) {
    reaction_pair rp{a, b, a.vector(), b.vector()};
    for (int i = 1; i <= 2; ++i) {
      vec2 v = rp.vector(i);
      require(v.x != 0.0 && v.y != 0.0, errc::degenerate_slope,
              "reaction " + std::to_string(i) +
                  " has an axis-parallel reaction vector");
      require(v.x + v.y != 0.0, errc::degenerate_slope,
              "reaction " + std::to_string(i) + " has slope exactly -1");
      require(rp.reactant(i).x >= 0 && rp.reactant(i).y >= 0 &&
                  rp.product(i).x >= 0 && rp.product(i).y >= 0,
              errc::malformed_input, "exponents must be nonnegative");
    }
    double c = cross(rp.v1, rp.v2);
    require(std::abs(c) > 1e-12 * norm(rp.v1) * norm(rp.v2),
            errc::parallel_reactions,
            "reaction vectors are linearly dependent");
    return rp;
  }

  vec2 reactant(int i) const { return i == 1 ? r1.reactant : r2.reactant; }
  vec2 product(int i) const { return i == 1 ? r1.product : r2.product; }
  /// Reaction vector, also the exponent gradient of the level monomial.
  vec2 vector(int i) const { return i == 1 ? v1 : v2; }
  double slope(int i) const {
    vec2 v = vector(i);
    return v.y / v.x;
  }

  reaction_pair with_swapped() const { return create(r2, r1); }
  reaction_pair with_reversed(int i) const {
    return i == 1 ? create(r1.reversed(), r2) : create(r1, r2.reversed());
  }
};

namespace detail {
enum class slope_class { neg_shallow, neg_steep, positive };

inline slope_class classify_slope(double s, int i) {
  require(s != 0.0 && std::isfinite(s), errc::degenerate_slope,
          "reaction " + std::to_string(i) + " slope degenerate");
  require(s != -1.0, errc::degenerate_slope,
          "reaction " + std::to_string(i) + " slope exactly -1");
  if (s > 0.0) return slope_class::positive;
  return s > -1.0 ? slope_class::neg_shallow : slope_class::neg_steep;
}
}  // namespace detail

inline pq_normalization normalize_pq(const reaction_pair& rp) {
  using detail::slope_class;
  slope_class c1 = detail::classify_slope(rp.slope(1), 1);
  slope_class c2 = detail::classify_slope(rp.slope(2), 2);
  require((c1 == slope_class::positive) != (c2 == slope_class::positive),
          errc::wrong_case, "pq normalization applies to mixed-slope cases");

  pq_normalization n;
  n.swapped = (c1 == slope_class::positive);
  vec2 w1 = n.swapped ? rp.v2 : rp.v1;  // negative slope
  vec2 w2 = n.swapped ? rp.v1 : rp.v2;  // positive slope
  // Orient the negative-slope vector into the second quadrant and the
  // positive-slope vector into the first.
  n.flip1 = (w1.x > 0.0);
  n.flip2 = (w2.x < 0.0);
  if (n.flip1) w1 = -w1;
  if (n.flip2) w2 = -w2;
  n.p1 = -w1.x;
  n.q1 = w1.y;
  n.p2 = -w2.x;
  n.q2 = w2.y;
  return n;
}

inline case_label classify_case(const reaction_pair& rp) {
  using detail::slope_class;
  slope_class c1 = detail::classify_slope(rp.slope(1), 1);
  slope_class c2 = detail::classify_slope(rp.slope(2), 2);

  auto both = [&](slope_class a, slope_class b) {
    return (c1 == a && c2 == b) || (c1 == b && c2 == a);
  };

  case_label label;
  if (both(slope_class::neg_shallow, slope_class::neg_steep))
    label.id = case_id::i;
  else if (both(slope_class::neg_shallow, slope_class::neg_shallow))
    label.id = case_id::ii;
  else if (both(slope_class::neg_steep, slope_class::neg_steep))
    label.id = case_id::iii;
  else if (both(slope_class::positive, slope_class::positive))
    label.id = case_id::iv;
  else if (both(slope_class::positive, slope_class::neg_shallow))
    label.id = case_id::v;
  else
    label.id = case_id::vi;

  if (label.mixed_slopes()) {
    pq_normalization n = normalize_pq(rp);
    label.sigma = n.sigma();
    double scale = std::abs(n.p1) + std::abs(n.p2) + n.q1 + n.q2;
    if (std::abs(label.sigma) <= 1e-12 * scale)
      label.sub = subcase_id::c;
    else
      label.sub = label.sigma < 0 ? subcase_id::a : subcase_id::b;
  }
  return label;
}

struct network_input {
  reaction_pair rp;
  epsilon_t eps;
};

/// Network file format:
///   {"reactions": [{"reactant": [a, b], "product": [a2, b2]}, {...}],
///    "epsilon": 0.5}
inline network_input parse_network(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    fail(errc::malformed_input, std::string("invalid JSON: ") + e.what());
  }
  try {
    const auto& reactions = j.at("reactions");
    require(reactions.is_array() && reactions.size() == 2,
            errc::malformed_input, "expected exactly two reactions");
    auto read_pair = [](const nlohmann::json& arr) -> vec2 {
      if (!arr.is_array() || arr.size() != 2 || !arr[0].is_number() ||
          !arr[1].is_number())
        fail(errc::malformed_input, "exponent pair must be [number, number]");
      return {arr[0].get<double>(), arr[1].get<double>()};
    };
    reaction r[2];
    for (int i = 0; i < 2; ++i) {
      r[i].reactant = read_pair(reactions[i].at("reactant"));
      r[i].product = read_pair(reactions[i].at("product"));
    }
    require(j.contains("epsilon") && j["epsilon"].is_number(),
            errc::malformed_input, "missing numeric \"epsilon\"");
    return {reaction_pair::create(r[0], r[1]), epsilon_t(j["epsilon"].get<double>())};
  } catch (const nlohmann::json::exception& e) {
    fail(errc::malformed_input, std::string("bad network structure: ") + e.what());
  }
}

/// The worked example used throughout the tests: Y <-> 2X, X <-> 2Y.
inline reaction_pair example_network() {
  return reaction_pair::create({{0, 1}, {2, 0}}, {{1, 0}, {0, 2}});
}

/// Mixed-slope fixture with p1=2, q1=1, p2=-1, q2=1 (case V, subcase a).
inline reaction_pair case_v_network() {
  return reaction_pair::create({{2, 0}, {0, 1}}, {{0, 0}, {1, 1}});
}

}  // namespace minreg
