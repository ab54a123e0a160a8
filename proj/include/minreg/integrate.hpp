#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "minreg/field.hpp"
#include "minreg/rng.hpp"

namespace minreg {

struct integrator_config {
  double rtol = 1e-9;
  double atol = 1e-12;
  double t_max = 1e3;
  /// Convergence radius, relative to 1 + |target|.
  double tol_conv = 1e-8;
  /// Arc-length spacing caps for emitted samples. 0 disables a cap; with
  /// both disabled only accepted step endpoints are emitted.
  double h_out = 0.0;
  double h_out_rel = 0.0;
  double h_min_rel = 1e-14;
  long max_steps = 20000000;
  /// |log x| or |log y| beyond this terminates with domain_exit.
  double log_domain_limit = 69.0;
};

enum class stop_reason {
  none,  // segment end reached; only used internally
  converged,
  timeout,
  domain_exit,
  event_hit,
  step_underflow,
  non_positive,
};

inline const char* to_string(stop_reason r) {
  switch (r) {
    case stop_reason::none: return "None";
    case stop_reason::converged: return "Converged";
    case stop_reason::timeout: return "TimeOut";
    case stop_reason::domain_exit: return "DomainExit";
    case stop_reason::event_hit: return "EventHit";
    case stop_reason::step_underflow: return "StepUnderflow";
    case stop_reason::non_positive: return "NonPositiveExcursion";
  }
  return "?";
}

/// Terminal event: integration stops at the first sign change of fn that the
/// optional accept predicate admits. The crossing is refined by bisection on
/// the dense interpolant.
struct event_spec {
  std::function<double(double, vec2)> fn;
  std::function<bool(double, vec2)> accept;  // may be empty
  std::string name;
};

/// Stop once the state is within radius of target and the speed has dropped
/// below vel_cap; the speed test rejects fly-bys.
struct converge_spec {
  vec2 target;
  double radius = 1e-8;
  double vel_cap = 1e-6;
};

struct trajectory {
  std::vector<double> t;
  std::vector<vec2> pts;
  stop_reason reason = stop_reason::timeout;
  int event_index = -1;
  long steps = 0;
  long rejects = 0;

  vec2 back() const { return pts.back(); }
  double t_end() const { return t.back(); }
};

namespace detail {

struct dp5_work {
  vec2 k[7];
  vec2 y0, y1;
  vec2 rc2, rc3, rc4, rc5;
  double h = 0;

  /// Shampine's 4th-order continuous extension for the pair.
  vec2 dense(double theta) const {
    double th1 = 1.0 - theta;
    return y0 + theta * (rc2 + th1 * (rc3 + theta * (rc4 + th1 * rc5)));
  }
};

inline bool field_rhs(const reaction_pair& rp, const rate_vector& k, vec2 p,
                      vec2& out) {
  if (!(p.x > 0.0) || !(p.y > 0.0)) return false;
  double lx = std::log(p.x), ly = std::log(p.y);
  auto mono = [&](vec2 e) { return std::exp(e.x * lx + e.y * ly); };
  double f1 = k.k1 * mono(rp.r1.reactant) - k.k2 * mono(rp.r1.product);
  double f2 = k.k3 * mono(rp.r2.reactant) - k.k4 * mono(rp.r2.product);
  out = f1 * rp.v1 + f2 * rp.v2;
  return std::isfinite(out.x) && std::isfinite(out.y);
}

/// One trial step. Returns false when a stage or the result leaves the
/// positive quadrant (caller shrinks h); err is the scaled embedded-error
/// estimate otherwise.
inline bool dp5_try(const reaction_pair& rp, const rate_vector& kr,
                    dp5_work& w, double rtol, double atol, double& err) {
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                          a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33,
                          a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                          a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                          b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695,
                          e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                          e6 = 22.0 / 525, e7 = -1.0 / 40;
  // Dense-output weights (Hairer, Norsett & Wanner, dopri5).
  static constexpr double d1 = -12715105075.0 / 11282082432.0,
                          d3 = 87487479700.0 / 32700410799.0,
                          d4 = -10690763975.0 / 1880347072.0,
                          d5 = 701980252875.0 / 199316789632.0,
                          d6 = -1453857185.0 / 822651844.0,
                          d7 = 69997945.0 / 29380423.0;

  const double h = w.h;
  const vec2 y = w.y0;
  vec2* k = w.k;
  vec2 p;

  p = y + h * a21 * k[0];
  if (!field_rhs(rp, kr, p, k[1])) return false;
  p = y + h * (a31 * k[0] + a32 * k[1]);
  if (!field_rhs(rp, kr, p, k[2])) return false;
  p = y + h * (a41 * k[0] + a42 * k[1] + a43 * k[2]);
  if (!field_rhs(rp, kr, p, k[3])) return false;
  p = y + h * (a51 * k[0] + a52 * k[1] + a53 * k[2] + a54 * k[3]);
  if (!field_rhs(rp, kr, p, k[4])) return false;
  p = y + h * (a61 * k[0] + a62 * k[1] + a63 * k[2] + a64 * k[3] + a65 * k[4]);
  if (!field_rhs(rp, kr, p, k[5])) return false;
  vec2 ynew =
      y + h * (b1 * k[0] + b3 * k[2] + b4 * k[3] + b5 * k[4] + b6 * k[5]);
  if (!(ynew.x > 0.0) || !(ynew.y > 0.0)) return false;
  if (!field_rhs(rp, kr, ynew, k[6])) return false;

  vec2 ee = h * (e1 * k[0] + e3 * k[2] + e4 * k[3] + e5 * k[4] + e6 * k[5] +
                 e7 * k[6]);
  double sx = atol + rtol * std::max(std::abs(y.x), std::abs(ynew.x));
  double sy = atol + rtol * std::max(std::abs(y.y), std::abs(ynew.y));
  double ex = ee.x / sx, ey = ee.y / sy;
  err = std::sqrt(0.5 * (ex * ex + ey * ey));

  w.y1 = ynew;
  w.rc2 = ynew - y;
  w.rc3 = h * k[0] - w.rc2;
  w.rc4 = w.rc2 - h * k[6] - w.rc3;
  w.rc5 = h * (d1 * k[0] + d3 * k[2] + d4 * k[3] + d5 * k[4] + d6 * k[5] +
               d7 * k[6]);
  return true;
}

}  // namespace detail

struct integration_status {
  double t = 0;
  vec2 x;
  stop_reason reason = stop_reason::none;
  int event_index = -1;
  long steps = 0;
  long rejects = 0;
};

/// Integrate dx/dt = f(x; k) from (t0, x0) until t_end, an event, target
/// convergence, or trouble. emit(t, x) receives the start point, dense
/// in-step samples obeying the spacing caps, and every accepted endpoint.
template <class Emit>
integration_status integrate_core(const reaction_pair& rp,
                                  const rate_vector& kr, vec2 x0, double t0,
                                  double t_end, const integrator_config& cfg,
                                  std::span<const event_spec> events,
                                  const std::optional<converge_spec>& conv,
                                  Emit&& emit, bool emit_start = true) {
  integration_status st;
  st.t = t0;
  st.x = x0;

  vec2 f0;
  require(positive(x0), errc::non_positive_point,
          "initial state must be strictly positive");
  require(detail::field_rhs(rp, kr, x0, f0), errc::non_positive_point,
          "field undefined at the initial state");
  if (emit_start) emit(st.t, st.x);

  std::vector<double> gprev(events.size());
  for (size_t i = 0; i < events.size(); ++i) gprev[i] = events[i].fn(st.t, st.x);

  auto speed_cap = [&](vec2 f) {
    return norm(f) <= (conv ? conv->vel_cap : 0.0);
  };
  auto converged_at = [&](vec2 x, vec2 f) {
    return conv && norm(x - conv->target) <= conv->radius && speed_cap(f);
  };
  if (converged_at(st.x, f0)) {
    st.reason = stop_reason::converged;
    return st;
  }

  auto spacing_cap = [&](vec2 p) {
    double cap = std::numeric_limits<double>::infinity();
    if (cfg.h_out > 0) cap = cfg.h_out;
    if (cfg.h_out_rel > 0) cap = std::min(cap, cfg.h_out_rel * (norm(p) + 1e-300));
    return cap;
  };

  // Initial step: conservative fraction of the state/velocity scale.
  double h = 0.01 * (norm(st.x) + cfg.atol) / (norm(f0) + 1e-30);
  h = std::min({h, t_end - t0, 1.0});
  h = std::max(h, 1e-12 * (std::abs(t0) + 1.0));

  detail::dp5_work w;
  w.k[0] = f0;
  double facold = 1e-4;
  static constexpr double safe = 0.9, beta = 0.04, expo1 = 0.2 - beta * 0.75;
  static constexpr double facc1 = 5.0, facc2 = 0.1;  // 1/FAC1, 1/FAC2
  bool positivity_trouble = false;

  while (st.t < t_end) {
    if (st.steps >= cfg.max_steps) {
      st.reason = stop_reason::timeout;
      return st;
    }
    double h_min = cfg.h_min_rel * std::max(1.0, std::abs(st.t));
    if (h < h_min) {
      st.reason = positivity_trouble ? stop_reason::non_positive
                                     : stop_reason::step_underflow;
      return st;
    }
    bool last = false;
    if (st.t + h >= t_end) {
      h = t_end - st.t;
      last = true;
    }
    w.y0 = st.x;
    w.h = h;
    double err = 0;
    if (!detail::dp5_try(rp, kr, w, cfg.rtol, cfg.atol, err)) {
      positivity_trouble = true;
      ++st.rejects;
      h *= 0.5;
      continue;
    }
    positivity_trouble = false;
    double fac11 = std::pow(err, expo1);
    if (err > 1.0) {
      ++st.rejects;
      h = h / std::min(facc1, fac11 / safe);
      continue;
    }
    ++st.steps;
    double t1 = last ? t_end : st.t + h;

    // Event localization on the dense interpolant.
    double theta_stop = 2.0;
    int which = -1;
    for (size_t i = 0; i < events.size(); ++i) {
      double gnew = events[i].fn(t1, w.y1);
      bool crossed = (gprev[i] < 0.0 && gnew >= 0.0) ||
                     (gprev[i] > 0.0 && gnew <= 0.0);
      if (crossed) {
        double lo = 0.0, hi = 1.0;
        double sign0 = gprev[i];
        for (int it = 0; it < 80 && hi - lo > 1e-16; ++it) {
          double mid = 0.5 * (lo + hi);
          double gm = events[i].fn(st.t + mid * h, w.dense(mid));
          if (gm == 0.0) {
            hi = lo = mid;
            break;
          }
          if (std::signbit(gm) == std::signbit(sign0))
            lo = mid;
          else
            hi = mid;
        }
        double th = hi;
        vec2 xe = w.dense(th);
        double te = st.t + th * h;
        if (!events[i].accept || events[i].accept(te, xe)) {
          if (th < theta_stop) {
            theta_stop = th;
            which = static_cast<int>(i);
          }
        }
      }
      gprev[i] = gnew;
    }

    if (which >= 0) {
      double te = st.t + theta_stop * h;
      vec2 xe = w.dense(theta_stop);
      emit(te, xe);
      st.t = te;
      st.x = xe;
      st.reason = stop_reason::event_hit;
      st.event_index = which;
      return st;
    }

    // Emit dense samples so consecutive points respect the spacing caps.
    double chord = norm(w.y1 - w.y0);
    double cap = std::min(spacing_cap(w.y0), spacing_cap(w.y1));
    long nsub = 1;
    if (std::isfinite(cap) && cap > 0 && chord > cap)
      nsub = std::min<long>(1024, static_cast<long>(std::ceil(chord / cap)));
    for (long j = 1; j < nsub; ++j) {
      double th = static_cast<double>(j) / static_cast<double>(nsub);
      emit(st.t + th * h, w.dense(th));
    }
    emit(t1, w.y1);

    st.t = t1;
    st.x = w.y1;
    w.k[0] = w.k[6];  // FSAL

    if (converged_at(st.x, w.k[0])) {
      st.reason = stop_reason::converged;
      return st;
    }
    if (std::abs(std::log(st.x.x)) > cfg.log_domain_limit ||
        std::abs(std::log(st.x.y)) > cfg.log_domain_limit) {
      st.reason = stop_reason::domain_exit;
      return st;
    }

    facold = std::max(err, 1e-4);
    double fac = fac11 / std::pow(facold, beta);
    fac = std::max(facc2, std::min(facc1, fac / safe));
    h = h / fac;
  }
  st.reason = stop_reason::none;
  return st;
}

/// Convergence helper: velocity cap scaled by the local linearization rate
/// at the target so the test is dimensionally meaningful.
inline converge_spec make_converge_spec(const reaction_pair& rp,
                                        const rate_vector& k, vec2 target,
                                        double tol_conv) {
  converge_spec c;
  c.target = target;
  c.radius = tol_conv * (1.0 + norm(target));
  jacobian_matrix J = jacobian(rp, k, target);
  double rate = std::sqrt(J.j11 * J.j11 + J.j12 * J.j12 + J.j21 * J.j21 +
                          J.j22 * J.j22);
  c.vel_cap = 10.0 * c.radius * std::max(rate, 1e-6);
  return c;
}

inline trajectory integrate(const reaction_pair& rp, const rate_vector& k,
                            vec2 x0, const integrator_config& cfg,
                            std::span<const event_spec> events = {},
                            const std::optional<converge_spec>& conv = {}) {
  trajectory tr;
  auto emit = [&](double t, vec2 x) {
    if (!tr.t.empty() && t <= tr.t.back()) return;
    tr.t.push_back(t);
    tr.pts.push_back(x);
  };
  tr.t.push_back(0.0);
  tr.pts.push_back(x0);
  auto st = integrate_core(rp, k, x0, 0.0, cfg.t_max, cfg, events, conv, emit,
                           false);
  tr.reason = st.reason == stop_reason::none ? stop_reason::timeout : st.reason;
  tr.event_index = st.event_index;
  tr.steps = st.steps;
  tr.rejects = st.rejects;
  return tr;
}

/// Piecewise-constant admissible rate function: interval i runs over
/// [t_switch[i], t_switch[i+1]) with constant rates[i].
struct rate_schedule {
  std::vector<double> t_switch;
  std::vector<rate_vector> rates;
  double eps_value = 0.0;

  void validate_shape() const {
    require(!rates.empty() && t_switch.size() == rates.size(),
            errc::malformed_input, "schedule shape mismatch");
    for (size_t i = 1; i < t_switch.size(); ++i)
      require(t_switch[i] > t_switch[i - 1], errc::malformed_input,
              "switch times must increase");
  }

  void validate(const epsilon_t& eps) const {
    validate_shape();
    for (const auto& k : rates)
      require(k.admissible(eps), errc::schedule_out_of_box,
              "schedule rate outside [eps, 1/eps]");
  }

  static rate_schedule constant(const rate_vector& k, double eps_value) {
    return {{0.0}, {k}, eps_value};
  }

  static rate_schedule random_uniform(const epsilon_t& eps, double dt,
                                      double t_total, splitmix64& rng) {
    rate_schedule s;
    s.eps_value = eps.value();
    double lo = eps.rate_lo(), hi = eps.rate_hi();
    for (double t = 0.0; t < t_total; t += dt) {
      s.t_switch.push_back(t);
      s.rates.push_back({rng.uniform(lo, hi), rng.uniform(lo, hi),
                         rng.uniform(lo, hi), rng.uniform(lo, hi)});
    }
    return s;
  }
};

/// Integration is restarted at every switch time so no step straddles the
/// field discontinuity.
template <class Emit>
integration_status integrate_schedule_core(const reaction_pair& rp,
                                           const rate_schedule& sched, vec2 x0,
                                           const integrator_config& cfg,
                                           std::span<const event_spec> events,
                                           const std::optional<converge_spec>& conv,
                                           Emit&& emit) {
  sched.validate_shape();
  if (sched.eps_value > 0.0 && sched.eps_value < 1.0)
    sched.validate(epsilon_t(sched.eps_value));
  integration_status st;
  st.t = sched.t_switch.front();
  st.x = x0;
  emit(st.t, st.x);
  for (size_t i = 0; i < sched.rates.size(); ++i) {
    double seg_end = (i + 1 < sched.t_switch.size()) ? sched.t_switch[i + 1]
                                                     : cfg.t_max;
    seg_end = std::min(seg_end, cfg.t_max);
    if (seg_end <= st.t) continue;
    auto seg = integrate_core(rp, sched.rates[i], st.x, st.t, seg_end, cfg,
                              events, conv, emit, false);
    st.steps += seg.steps;
    st.rejects += seg.rejects;
    st.t = seg.t;
    st.x = seg.x;
    if (seg.reason != stop_reason::none) {
      st.reason = seg.reason;
      st.event_index = seg.event_index;
      return st;
    }
    if (st.t >= cfg.t_max) break;
  }
  st.reason = stop_reason::timeout;
  return st;
}

inline trajectory integrate_schedule(const reaction_pair& rp,
                                     const rate_schedule& sched, vec2 x0,
                                     const integrator_config& cfg,
                                     std::span<const event_spec> events = {},
                                     const std::optional<converge_spec>& conv = {}) {
  trajectory tr;
  auto emit = [&](double t, vec2 x) {
    if (!tr.t.empty() && t <= tr.t.back()) return;
    tr.t.push_back(t);
    tr.pts.push_back(x);
  };
  tr.t.push_back(sched.t_switch.front());
  tr.pts.push_back(x0);
  auto st =
      integrate_schedule_core(rp, sched, x0, cfg, events, conv, emit);
  tr.reason = st.reason == stop_reason::none ? stop_reason::timeout : st.reason;
  tr.event_index = st.event_index;
  tr.steps = st.steps;
  tr.rejects = st.rejects;
  return tr;
}

}  // namespace minreg
