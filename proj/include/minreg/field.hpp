#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "minreg/curves.hpp"

namespace minreg {

struct field_value {
  vec2 velocity;
  double flux1 = 0, flux2 = 0;  // net forward flux per reversible reaction
};

namespace detail {
/// The four monomials x^a y^b of the reactant/product complexes, evaluated
/// through logs so fractional exponents and extreme coordinates stay exact.
struct monomials {
  double m1, m1p, m2, m2p;
};

inline monomials eval_monomials(const reaction_pair& rp, vec2 pt) {
  require(positive(pt), errc::non_positive_point,
          "field evaluation requires a strictly positive point");
  double lx = std::log(pt.x), ly = std::log(pt.y);
  auto mono = [&](vec2 e) { return std::exp(e.x * lx + e.y * ly); };
  return {mono(rp.r1.reactant), mono(rp.r1.product), mono(rp.r2.reactant),
          mono(rp.r2.product)};
}
}  // namespace detail

/// velocity = flux1 * v1 + flux2 * v2, exactly by construction.
inline field_value eval_field(const reaction_pair& rp, const rate_vector& k,
                              vec2 pt) {
  auto m = detail::eval_monomials(rp, pt);
  field_value f;
  f.flux1 = k.k1 * m.m1 - k.k2 * m.m1p;
  f.flux2 = k.k3 * m.m2 - k.k4 * m.m2p;
  f.velocity = f.flux1 * rp.v1 + f.flux2 * rp.v2;
  return f;
}

/// Extremes of velocity . n over the rate box [eps, 1/eps]^4. The dot
/// product is affine in each rate with one signed monomial coefficient, so
/// each extreme is attained at a box vertex selected by sign; the value is
/// then evaluated through eval_field so it agrees bit for bit with vertex
/// enumeration.
inline std::pair<double, double> field_normal_extremes(const reaction_pair& rp,
                                                       double eps, vec2 pt,
                                                       vec2 n) {
  auto m = detail::eval_monomials(rp, pt);
  double d1 = dot(rp.v1, n), d2 = dot(rp.v2, n);
  double c[4] = {m.m1 * d1, -m.m1p * d1, m.m2 * d2, -m.m2p * d2};
  double lo = eps, hi = 1.0 / eps;
  rate_vector kmin{c[0] > 0 ? lo : hi, c[1] > 0 ? lo : hi, c[2] > 0 ? lo : hi,
                   c[3] > 0 ? lo : hi};
  rate_vector kmax{c[0] > 0 ? hi : lo, c[1] > 0 ? hi : lo, c[2] > 0 ? hi : lo,
                   c[3] > 0 ? hi : lo};
  return {dot(eval_field(rp, kmin, pt).velocity, n),
          dot(eval_field(rp, kmax, pt).velocity, n)};
}

/// Largest admissible speed at pt; used to normalize invariance margins.
inline double field_scale(const reaction_pair& rp, double eps, vec2 pt) {
  double lo = eps, hi = 1.0 / eps;
  double best = 0.0;
  for (int mask = 0; mask < 16; ++mask) {
    rate_vector k{(mask & 1) ? hi : lo, (mask & 2) ? hi : lo,
                  (mask & 4) ? hi : lo, (mask & 8) ? hi : lo};
    best = std::max(best, norm(eval_field(rp, k, pt).velocity));
  }
  return best;
}

enum class attract_dir { plus, minus, either };

/// Sign of reaction i's flux when it is forced by the band position:
/// outside the band every admissible rate pushes along the same signed
/// reaction vector; inside, the sign depends on the rates.
inline attract_dir attracting_direction(const reaction_pair& rp,
                                        const epsilon_t& eps, int i,
                                        vec2 pt) {
  double l = log_curve_level(rp, i, pt);
  double lb = eps.log_band();
  if (l > lb) return attract_dir::minus;
  if (l < -lb) return attract_dir::plus;
  return attract_dir::either;
}

struct cone_info {
  vec2 g1, g2;  // generating directions of the admissible-velocity cone
  bool sink = false;
};

/// Cone of admissible velocities at a band corner. Generators carry the
/// forced flux signs; the corner is a sink when the cone sits inside the
/// central-region wedge and a source when it contains that wedge.
inline cone_info corner_cone(const reaction_pair& rp, const epsilon_t&,
                             const corner& c) {
  cone_info info;
  info.g1 = static_cast<double>(c.sigma1) * rp.v1;
  info.g2 = static_cast<double>(c.sigma2) * rp.v2;
  info.sink = c.sigma1 * c.sigma2 * corner_interaction(rp, c.pos) > 0.0;
  return info;
}

struct jacobian_matrix {
  double j11 = 0, j12 = 0, j21 = 0, j22 = 0;
  double trace = 0, det = 0, disc = 0;
  bool real_eigen = false;
  double lam_slow = 0, lam_fast = 0;  // |lam_slow| <= |lam_fast|
  vec2 e_slow, e_fast;                // unit eigenvectors when real
};

namespace detail {
inline vec2 eigvec(const jacobian_matrix& J, double lam) {
  vec2 a{J.j12, lam - J.j11};
  vec2 b{lam - J.j22, J.j21};
  vec2 v = norm(a) >= norm(b) ? a : b;
  double nv = norm(v);
  if (nv == 0.0) return {1, 0};  // scalar matrix; any direction
  return v / nv;
}
}  // namespace detail

inline jacobian_matrix jacobian(const reaction_pair& rp, const rate_vector& k,
                                vec2 pt) {
  auto m = detail::eval_monomials(rp, pt);
  // d(flux_i)/dx = (k_f a m - k_b a' m') / x and likewise in y.
  double df1dx = (k.k1 * rp.r1.reactant.x * m.m1 - k.k2 * rp.r1.product.x * m.m1p) / pt.x;
  double df1dy = (k.k1 * rp.r1.reactant.y * m.m1 - k.k2 * rp.r1.product.y * m.m1p) / pt.y;
  double df2dx = (k.k3 * rp.r2.reactant.x * m.m2 - k.k4 * rp.r2.product.x * m.m2p) / pt.x;
  double df2dy = (k.k3 * rp.r2.reactant.y * m.m2 - k.k4 * rp.r2.product.y * m.m2p) / pt.y;

  jacobian_matrix J;
  J.j11 = rp.v1.x * df1dx + rp.v2.x * df2dx;
  J.j12 = rp.v1.x * df1dy + rp.v2.x * df2dy;
  J.j21 = rp.v1.y * df1dx + rp.v2.y * df2dx;
  J.j22 = rp.v1.y * df1dy + rp.v2.y * df2dy;
  J.trace = J.j11 + J.j22;
  J.det = J.j11 * J.j22 - J.j12 * J.j21;
  J.disc = J.trace * J.trace - 4.0 * J.det;
  J.real_eigen = J.disc >= 0.0;
  if (J.real_eigen) {
    double sq = std::sqrt(J.disc);
    double l1 = 0.5 * (J.trace + sq);
    double l2 = 0.5 * (J.trace - sq);
    if (std::abs(l1) <= std::abs(l2)) {
      J.lam_slow = l1;
      J.lam_fast = l2;
    } else {
      J.lam_slow = l2;
      J.lam_fast = l1;
    }
    J.e_slow = detail::eigvec(J, J.lam_slow);
    J.e_fast = detail::eigvec(J, J.lam_fast);
  }
  return J;
}

/// Off-diagonal entries after the detailed-balance symmetrization
/// P = diag(sqrt(x*), sqrt(y*)); equal at a detailed-balance state and
/// sign-identical to the raw entries.
inline std::pair<double, double> symmetrized_offdiag(const jacobian_matrix& J,
                                                     vec2 balanced_at) {
  double r = std::sqrt(balanced_at.y / balanced_at.x);
  return {J.j12 * r, J.j21 / r};
}

/// Eigenvalue-coincidence scan: the discriminant of the Jacobian at the
/// given corner (under that corner's extremal rates) as a function of
/// epsilon, root-isolated by sign-change bisection on a dense grid.
inline std::vector<double> equal_eigenvalue_scan(const reaction_pair& rp,
                                                 corner_id cid, double eps_lo,
                                                 double eps_hi,
                                                 int grid = 10000) {
  require(eps_lo > 0 && eps_hi < 1 && eps_lo < eps_hi, errc::malformed_input,
          "scan range must satisfy 0 < lo < hi < 1");
  auto disc_at = [&](double e) {
    epsilon_t eps(e);
    const corner& c = corner_points(rp, eps).at(cid);
    return jacobian(rp, c.pattern(eps), c.pos).disc;
  };
  std::vector<double> roots;
  double prev_e = eps_lo, prev_d = disc_at(eps_lo);
  for (int i = 1; i <= grid; ++i) {
    double e = eps_lo + (eps_hi - eps_lo) * static_cast<double>(i) / grid;
    double d = disc_at(e);
    if (prev_d == 0.0) {
      roots.push_back(prev_e);
    } else if (d != 0.0 && std::signbit(d) != std::signbit(prev_d)) {
      double a = prev_e, b = e, fa = prev_d;
      while (b - a > 1e-12) {
        double mid = 0.5 * (a + b);
        double fm = disc_at(mid);
        if (fm == 0.0) {
          a = b = mid;
          break;
        }
        if (std::signbit(fm) == std::signbit(fa)) {
          a = mid;
          fa = fm;
        } else {
          b = mid;
        }
      }
      roots.push_back(0.5 * (a + b));
    }
    prev_e = e;
    prev_d = d;
  }
  return roots;
}

}  // namespace minreg
