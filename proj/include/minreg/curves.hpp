#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <string>

#include "minreg/network.hpp"

namespace minreg {

/// Constant rate quadruple (k1, k2) drive reaction 1, (k3, k4) reaction 2.
struct rate_vector {
  double k1 = 1, k2 = 1, k3 = 1, k4 = 1;

  double operator[](int i) const {
    switch (i) {
      case 0: return k1;
      case 1: return k2;
      case 2: return k3;
      default: return k4;
    }
  }
  bool admissible(const epsilon_t& eps, double slack = 1e-12) const {
    double lo = eps.rate_lo() * (1.0 - slack), hi = eps.rate_hi() * (1.0 + slack);
    auto ok = [&](double k) { return k >= lo && k <= hi; };
    return ok(k1) && ok(k2) && ok(k3) && ok(k4);
  }
};

/// Level of reaction i's invariant-curve monomial x^(a'-a) y^(b'-b),
/// stored as a log to stay finite for extreme epsilon and real exponents.
struct curve_level {
  int reaction = 1;   // 1 or 2
  double log_c = 0.0;

  double level() const { return std::exp(log_c); }
};

inline double log_curve_level(const reaction_pair& rp, int i, vec2 pt) {
  require(positive(pt), errc::non_positive_point,
          "curve level requires a strictly positive point");
  vec2 e = rp.vector(i);
  return e.x * std::log(pt.x) + e.y * std::log(pt.y);
}

inline curve_level curve_level_at(const reaction_pair& rp, int i, vec2 pt) {
  return {i, log_curve_level(rp, i, pt)};
}

/// Unique positive intersection of one level curve per reaction: a 2x2
/// linear solve in (log x, log y).
inline vec2 intersect_curves_log(const reaction_pair& rp, double log_c1,
                                 double log_c2) {
  double det = cross(rp.v1, rp.v2);
  require(std::abs(det) > 1e-12 * norm(rp.v1) * norm(rp.v2),
          errc::parallel_reactions, "singular curve intersection");
  double lx = (log_c1 * rp.v2.y - rp.v1.y * log_c2) / det;
  double ly = (rp.v1.x * log_c2 - log_c1 * rp.v2.x) / det;
  return {std::exp(lx), std::exp(ly)};
}

inline vec2 intersect_curves(const reaction_pair& rp, curve_level c1,
                             curve_level c2) {
  require(c1.reaction == 1 && c2.reaction == 2, errc::malformed_input,
          "intersect_curves expects one level per reaction");
  return intersect_curves_log(rp, c1.log_c, c2.log_c);
}

/// dy/dx of the implicit curve x^alpha y^beta = const through pt.
inline double tangent_slope(const reaction_pair& rp, int i, vec2 pt) {
  require(positive(pt), errc::non_positive_point,
          "tangent requires a strictly positive point");
  vec2 e = rp.vector(i);
  return -(e.x * pt.y) / (e.y * pt.x);
}

/// State where both reactions are simultaneously balanced: levels equal the
/// rate ratios k1/k2 and k3/k4. Only the two ratios enter.
inline vec2 detailed_balance_point(const reaction_pair& rp,
                                   const rate_vector& k) {
  require(k.k1 > 0 && k.k2 > 0 && k.k3 > 0 && k.k4 > 0,
          errc::malformed_input, "rates must be positive");
  return intersect_curves_log(rp, std::log(k.k1) - std::log(k.k2),
                              std::log(k.k3) - std::log(k.k4));
}

/// Extremal constant rates whose detailed-balance state has the given level
/// signs: sigma = +1 selects level eps^2 (pair (eps, 1/eps)), -1 selects
/// 1/eps^2.
inline rate_vector extremal_rates(int sigma1, int sigma2,
                                  const epsilon_t& eps) {
  double lo = eps.rate_lo(), hi = eps.rate_hi();
  rate_vector k;
  k.k1 = sigma1 > 0 ? lo : hi;
  k.k2 = sigma1 > 0 ? hi : lo;
  k.k3 = sigma2 > 0 ? lo : hi;
  k.k4 = sigma2 > 0 ? hi : lo;
  return k;
}

/// Constant rates that make pt detailed balanced, one balanced pair per
/// reaction. Ratios outside the admissible band are clamped to its edge, so
/// the result is always in the rate box (exactly extremal at band edges).
inline rate_vector db_rates(const reaction_pair& rp, vec2 pt,
                            const epsilon_t& eps) {
  double lb = eps.log_band();
  auto pair_for = [&](double log_level) {
    double l = std::clamp(log_level, -lb, lb);
    return std::pair<double, double>{std::exp(0.5 * l), std::exp(-0.5 * l)};
  };
  auto [k1, k2] = pair_for(log_curve_level(rp, 1, pt));
  auto [k3, k4] = pair_for(log_curve_level(rp, 2, pt));
  return {k1, k2, k3, k4};
}

/// Coupling term grad(log level_2) . v1 = grad(log level_1) . v2 at pt.
/// Its sign against the corner's level signs decides source vs sink.
inline double corner_interaction(const reaction_pair& rp, vec2 pt) {
  return rp.v1.x * rp.v2.x / pt.x + rp.v1.y * rp.v2.y / pt.y;
}

enum class corner_id { A, B, C, D };

inline const char* to_string(corner_id c) {
  switch (c) {
    case corner_id::A: return "A";
    case corner_id::B: return "B";
    case corner_id::C: return "C";
    default: return "D";
  }
}

/// Band-boundary intersection point. sigma_i = +1 when the corner sits on
/// reaction i's lower level curve (eps^2), -1 on the upper one (1/eps^2).
struct corner {
  corner_id id = corner_id::A;
  vec2 pos;
  int sigma1 = 1, sigma2 = 1;
  /// True when the admissible-velocity cone at the corner contains the
  /// central-region wedge; boundary trajectories start at such corners.
  bool source = false;

  double log_c(int i, const epsilon_t& eps) const {
    return (i == 1 ? sigma1 : sigma2) > 0 ? -eps.log_band() : eps.log_band();
  }
  rate_vector pattern(const epsilon_t& eps) const {
    return extremal_rates(sigma1, sigma2, eps);
  }
};

struct corner_set {
  std::array<corner, 4> corners;

  const corner& at(corner_id id) const {
    return corners[static_cast<int>(id)];
  }
  corner& at(corner_id id) { return corners[static_cast<int>(id)]; }
};

/// The four pairwise intersections of the band boundary curves, labeled by
/// their level pair: A = (eps^2, 1/eps^2), B = (1/eps^2, 1/eps^2),
/// C = (1/eps^2, eps^2), D = (eps^2, eps^2). Source/sink is computed from
/// the cone test, never assumed from the label.
inline corner_set corner_points(const reaction_pair& rp,
                                const epsilon_t& eps) {
  const double lb = eps.log_band();
  const std::array<std::pair<int, int>, 4> signs{{{+1, -1}, {-1, -1}, {-1, +1}, {+1, +1}}};
  corner_set cs;
  for (int idx = 0; idx < 4; ++idx) {
    corner& c = cs.corners[idx];
    c.id = static_cast<corner_id>(idx);
    c.sigma1 = signs[idx].first;
    c.sigma2 = signs[idx].second;
    c.pos = intersect_curves_log(rp, -c.sigma1 * lb, -c.sigma2 * lb);
    for (int i = 1; i <= 2; ++i) {
      double got = log_curve_level(rp, i, c.pos);
      require(nearly_equal(got, c.log_c(i, eps), 1e-12), errc::internal,
              "corner residual exceeds tolerance");
    }
    c.source = c.sigma1 * c.sigma2 * corner_interaction(rp, c.pos) < 0.0;
  }
  return cs;
}

/// Point on the curve x^alpha y^beta = exp(log_c) where dy/dx equals the
/// given slope; nullopt when no positive-quadrant solution exists.
inline std::optional<vec2> solve_tangent_point(vec2 exponents, double log_c,
                                               double slope) {
  double alpha = exponents.x, beta = exponents.y;
  double ratio = -slope * beta / alpha;  // y/x on the solution
  if (!(ratio > 0.0) || !std::isfinite(ratio)) return std::nullopt;
  double denom = alpha + beta;
  if (denom == 0.0) return std::nullopt;
  double lx = (log_c - beta * std::log(ratio)) / denom;
  double ly = lx + std::log(ratio);
  return vec2{std::exp(lx), std::exp(ly)};
}

/// Attracting-direction slope of reaction i (parallel to its reaction
/// vector).
inline double attracting_slope(const reaction_pair& rp, int i) {
  return rp.slope(i);
}

struct ef_points {
  vec2 E;  // tangency point on the double-sink band arc (a boundary vertex)
  vec2 F;  // companion tangency on the adjacent lobe curve (not on the boundary)
};

namespace detail {

/// Normalized-convention curve exponents: reaction 1 carries (-p1, q1),
/// reaction 2 carries (-p2, q2).
inline vec2 norm_exponents(const pq_normalization& n, int i) {
  return i == 1 ? vec2{-n.p1, n.q1} : vec2{-n.p2, n.q2};
}

struct tangent_spec {
  int curve;      // reaction carrying the arc, normalized indexing
  double level;   // +1 -> eps^2, -1 -> 1/eps^2 (normalized orientation)
  int slope_of;   // reaction whose attracting slope must be met
};

inline std::optional<vec2> tangent_point(const pq_normalization& n,
                                         const epsilon_t& eps,
                                         const tangent_spec& spec) {
  vec2 e = norm_exponents(n, spec.curve);
  vec2 d = norm_exponents(n, spec.slope_of);  // reaction vector, normalized
  double slope = d.y / d.x;
  double log_c = -spec.level * eps.log_band();
  return solve_tangent_point(e, log_c, slope);
}

/// Log level of the normalized reaction i at pt.
inline double norm_log_level(const pq_normalization& n, int i, vec2 pt) {
  vec2 e = norm_exponents(n, i);
  return e.x * std::log(pt.x) + e.y * std::log(pt.y);
}

}  // namespace detail

/// Special points of the mixed-slope cases. E lies on the band arc joining
/// the two sink corners, where the arc tangent aligns with the other
/// reaction's attracting direction; trajectories leaving E toward both sinks
/// bound the region there. F is the analogous tangency on the neighbouring
/// lobe curve beyond the nearer corner. Both exist only for epsilon small
/// enough; the arc test is numerical.
inline ef_points special_points(const reaction_pair& rp,
                                const epsilon_t& eps) {
  case_label label = classify_case(rp);
  require(label.mixed_slopes(), errc::wrong_case,
          "special points exist only in the mixed-slope cases");
  pq_normalization n = normalize_pq(rp);
  const double lb = eps.log_band();

  // A tangency is on its band arc iff the other reaction's level is
  // strictly inside the band there.
  auto on_arc = [&](const detail::tangent_spec& spec) -> std::optional<vec2> {
    auto pt = detail::tangent_point(n, eps, spec);
    if (!pt) return std::nullopt;
    int other = 3 - spec.curve;
    if (std::abs(detail::norm_log_level(n, other, *pt)) >= lb * (1.0 - 1e-12))
      return std::nullopt;
    return pt;
  };
  // Guard tangencies sit past one of the arc's end corners, where the other
  // reaction's level has left the band. The tangency on a given curve and
  // slope is unique, so no side needs to be singled out.
  auto past_corner =
      [&](const detail::tangent_spec& spec) -> std::optional<vec2> {
    auto pt = detail::tangent_point(n, eps, spec);
    if (!pt) return std::nullopt;
    int other = 3 - spec.curve;
    if (std::abs(detail::norm_log_level(n, other, *pt)) <= lb * (1.0 + 1e-12))
      return std::nullopt;
    return pt;
  };

  std::optional<vec2> e, f;
  switch (label.sub) {
    case subcase_id::a:
      // E on reaction 2's lower arc; F on reaction 1's upper curve beyond
      // the arc.
      e = on_arc({2, +1, 1});
      f = past_corner({1, -1, 2});
      break;
    case subcase_id::b:
      e = on_arc({1, +1, 2});
      f = past_corner({2, -1, 1});
      break;
    case subcase_id::c:
      // Mixed: each reaction contributes at most one on-arc tangency.
      e = on_arc({2, +1, 1});
      if (!e) e = on_arc({2, -1, 1});
      f = on_arc({1, +1, 2});
      if (!f) f = on_arc({1, -1, 2});
      break;
    default:
      break;
  }
  require(e.has_value() && f.has_value(), errc::epsilon_too_large,
          "no tangency point on the required arc at epsilon = " +
              format17(eps.value()));
  return ef_points{*e, *f};
}

}  // namespace minreg
