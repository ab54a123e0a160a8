#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "minreg/region.hpp"
#include "minreg/rng.hpp"

#include "json.hpp"

namespace minreg {

using report_json = nlohmann::ordered_json;

struct verification_report {
  std::string check;
  bool pass = false;
  /// Check-specific worst margin; nonnegative margins pass.
  double margin = 0.0;
  report_json worst_sample;
  std::uint64_t seed = 0;
  report_json config;

  report_json to_json() const {
    report_json j;
    j["check"] = check;
    j["pass"] = pass;
    j["margin"] = margin;
    j["worst_sample"] = worst_sample;
    j["seed"] = seed;
    j["config"] = config;
    j["version"] = kVersion;
    return j;
  }
};

/// Deterministic parallel map: tasks write into index-addressed slots, so
/// results are independent of the thread schedule.
template <class Fn>
void parallel_for(std::size_t n, Fn&& fn, unsigned threads = 0) {
  if (n == 0) return;
  unsigned hw = threads ? threads : std::thread::hardware_concurrency();
  hw = std::max(1u, std::min<unsigned>(hw, static_cast<unsigned>(n)));
  if (hw == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(hw);
  for (unsigned t = 0; t < hw; ++t)
    pool.emplace_back([&] {
      for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
        if (failed.load(std::memory_order_relaxed)) return;
        try {
          fn(i);
        } catch (...) {
          std::scoped_lock lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
          failed.store(true, std::memory_order_relaxed);
          return;
        }
      }
    });
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

namespace detail {

/// Boundary sample points for the invariance check: vertex indices that are
/// at least `excl` of arc length away from their side's endpoints, thinned
/// to roughly n_samples.
inline std::vector<std::size_t> invariance_samples(const region& r,
                                                   int n_samples,
                                                   double excl) {
  std::vector<std::size_t> eligible;
  for (const auto& s : r.sides) {
    if (s.v_end - s.v_begin < 3) continue;
    std::vector<double> arc(s.v_end - s.v_begin, 0.0);
    for (std::size_t i = s.v_begin + 1; i < s.v_end; ++i)
      arc[i - s.v_begin] =
          arc[i - s.v_begin - 1] + norm(r.boundary[i] - r.boundary[i - 1]);
    double total = arc.back();
    for (std::size_t i = s.v_begin + 1; i + 1 < s.v_end; ++i) {
      double a = arc[i - s.v_begin];
      if (a > excl && total - a > excl) eligible.push_back(i);
    }
  }
  if (eligible.empty()) return eligible;
  std::size_t stride =
      std::max<std::size_t>(1, eligible.size() / std::max(1, n_samples));
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < eligible.size(); i += stride)
    out.push_back(eligible[i]);
  return out;
}

inline const side_provenance* side_of_vertex(const region& r, std::size_t v) {
  for (const auto& s : r.sides)
    if (v >= s.v_begin && v < s.v_end) return &s;
  return nullptr;
}

/// Inward unit normal at boundary vertex v. For as-built regions the side's
/// rate pattern gives the exact tangent; otherwise the bisector of the
/// adjacent polyline segments is used.
inline vec2 inward_normal(const region& r, const reaction_pair& rp,
                          std::size_t v) {
  const auto& b = r.boundary;
  vec2 tangent;
  const side_provenance* s = r.analytic_sides ? side_of_vertex(r, v) : nullptr;
  if (s) {
    vec2 vel = eval_field(rp, s->rates, b[v]).velocity;
    if (norm(vel) > 0) tangent = s->reversed ? -vel : vel;
  }
  if (norm(tangent) == 0.0) {
    vec2 prev = b[v] - b[v == 0 ? b.size() - 2 : v - 1];
    vec2 next = b[v + 1 < b.size() ? v + 1 : 1] - b[v];
    tangent = unit(prev) + unit(next);
    if (norm(tangent) == 0.0) tangent = next;
  }
  return unit(rot90(tangent));
}

}  // namespace detail

/// Nagumo condition along the boundary: the admissible field never points
/// outward beyond tol * (local field scale). eps_box may differ from the
/// region's construction epsilon (used by the nesting-margin property).
inline verification_report check_invariance(const region& r,
                                            const reaction_pair& rp,
                                            double eps_box,
                                            int n_samples = 2000,
                                            double tol = 1e-8) {
  require(!r.boundary.empty(), errc::region_invalid, "empty region");
  verification_report rep;
  rep.check = "invariance";
  rep.config = {{"eps_box", eps_box},
                {"n_samples", n_samples},
                {"tol", tol},
                {"region_eps", r.eps_value}};

  auto samples = detail::invariance_samples(r, n_samples, 1e-6 * r.diameter());
  require(!samples.empty(), errc::region_invalid, "no eligible samples");

  std::vector<double> margins(samples.size());
  parallel_for(samples.size(), [&](std::size_t i) {
    std::size_t v = samples[i];
    vec2 p = r.boundary[v];
    vec2 n = detail::inward_normal(r, rp, v);
    auto [mn, mx] = field_normal_extremes(rp, eps_box, p, n);
    (void)mx;
    double scale = field_scale(rp, eps_box, p);
    margins[i] = scale > 0 ? mn / scale : 0.0;
  });

  double worst = 1e300;
  std::size_t worst_at = 0;
  for (std::size_t i = 0; i < margins.size(); ++i)
    if (margins[i] < worst) {
      worst = margins[i];
      worst_at = samples[i];
    }
  rep.margin = worst;
  rep.pass = worst >= -tol;
  const side_provenance* s = detail::side_of_vertex(r, worst_at);
  rep.worst_sample = {{"x", r.boundary[worst_at].x},
                      {"y", r.boundary[worst_at].y},
                      {"side", s ? s->name : "?"},
                      {"vertex", worst_at}};
  return rep;
}

/// Corner attraction: each extremal pattern drives every start to its
/// designated corner.
inline verification_report check_corner_convergence(
    const reaction_pair& rp, const epsilon_t& eps,
    const std::vector<vec2>& starts, double t_max = 200.0,
    double dist_tol = 1e-6) {
  verification_report rep;
  rep.check = "corner_convergence";
  rep.config = {{"t_max", t_max}, {"dist_tol", dist_tol},
                {"n_starts", starts.size()}};
  corner_set cs = corner_points(rp, eps);

  struct task_result {
    double dist = 0;
    const char* corner = "";
    vec2 start;
  };
  std::vector<task_result> results(starts.size() * 4);
  parallel_for(results.size(), [&](std::size_t t) {
    const corner& c = cs.corners[t % 4];
    vec2 x0 = starts[t / 4];
    integrator_config cfg;
    cfg.t_max = t_max;
    auto conv = make_converge_spec(rp, c.pattern(eps), c.pos, cfg.tol_conv);
    trajectory tr = integrate(rp, c.pattern(eps), x0, cfg, {}, conv);
    results[t] = {norm(tr.back() - c.pos), to_string(c.id), x0};
  });

  double worst = 0;
  std::size_t worst_at = 0;
  for (std::size_t i = 0; i < results.size(); ++i)
    if (results[i].dist > worst) {
      worst = results[i].dist;
      worst_at = i;
    }
  rep.margin = dist_tol - worst;
  rep.pass = worst < dist_tol;
  rep.worst_sample = {{"corner", results[worst_at].corner},
                      {"dist", results[worst_at].dist},
                      {"start", {results[worst_at].start.x, results[worst_at].start.y}}};
  return rep;
}

/// Uniformly random interior points of the region.
inline std::vector<vec2> random_interior_points(const region& r,
                                                const region_query& q, int n,
                                                std::uint64_t seed) {
  splitmix64 rng(seed);
  vec2 lo{1e300, 1e300}, hi{-1e300, -1e300};
  for (const vec2& p : r.boundary) {
    lo.x = std::min(lo.x, p.x);
    lo.y = std::min(lo.y, p.y);
    hi.x = std::max(hi.x, p.x);
    hi.y = std::max(hi.y, p.y);
  }
  std::vector<vec2> pts;
  int guard = 0;
  while (static_cast<int>(pts.size()) < n && ++guard < 1000000) {
    vec2 p{rng.uniform(lo.x, hi.x), rng.uniform(lo.y, hi.y)};
    if (positive(p) && q.inside(p)) pts.push_back(p);
  }
  require(static_cast<int>(pts.size()) == n, errc::internal,
          "interior sampling failed");
  return pts;
}

/// Monte-Carlo invariance: random piecewise-constant schedules from random
/// interior starts must stay inside the slightly dilated region.
inline verification_report check_containment(
    const region& r, const reaction_pair& rp, const epsilon_t& eps_draw,
    int n_schedules, int n_starts, double t_final, std::uint64_t seed,
    double dt_switch = 0.1, double dilation_rel = 1e-6) {
  verification_report rep;
  rep.check = "containment";
  rep.config = {{"n_schedules", n_schedules}, {"n_starts", n_starts},
                {"T", t_final},             {"dt_switch", dt_switch},
                {"eps_draw", eps_draw.value()}, {"dilation_rel", dilation_rel}};
  rep.seed = seed;

  region_query query(r);
  double margin_abs = dilation_rel * query.diameter();
  auto starts =
      random_interior_points(r, query, n_starts, task_seed(seed, 0xface));

  struct task_result {
    double excess = 0.0;  // worst distance beyond the dilated region
    double t_at = 0.0;
    vec2 at;
  };
  std::size_t n_tasks =
      static_cast<std::size_t>(n_schedules) * static_cast<std::size_t>(n_starts);
  std::vector<task_result> results(n_tasks);

  parallel_for(n_tasks, [&](std::size_t task) {
    std::size_t sched_i = task / n_starts;
    vec2 x0 = starts[task % n_starts];
    splitmix64 rng(task_seed(seed, 1000 + sched_i));
    rate_schedule sched =
        rate_schedule::random_uniform(eps_draw, dt_switch, t_final, rng);
    integrator_config cfg;
    cfg.t_max = t_final;
    task_result res;
    auto emit = [&](double t, vec2 p) {
      if (query.inside(p)) return;
      double d = query.boundary_distance(p);
      if (d > margin_abs && d - margin_abs > res.excess) {
        res.excess = d - margin_abs;
        res.t_at = t;
        res.at = p;
      }
    };
    integrate_schedule_core(rp, sched, x0, cfg, {}, {}, emit);
    results[task] = res;
  });

  double worst = 0;
  std::size_t worst_at = 0;
  for (std::size_t i = 0; i < results.size(); ++i)
    if (results[i].excess > worst) {
      worst = results[i].excess;
      worst_at = i;
    }
  rep.margin = -worst / query.diameter();
  rep.pass = worst == 0.0;
  rep.worst_sample = {{"excess", worst},
                      {"t", results[worst_at].t_at},
                      {"x", results[worst_at].at.x},
                      {"y", results[worst_at].at.y},
                      {"schedule", worst_at / n_starts},
                      {"start", worst_at % n_starts}};
  return rep;
}

/// Exterior starts around the log-space perimeter of [lo, hi]^2.
inline std::vector<vec2> perimeter_grid(double lo, double hi, int n) {
  std::vector<vec2> pts;
  double llo = std::log(lo), lhi = std::log(hi);
  int per_side = std::max(1, n / 4);
  auto lerp = [&](double t) { return std::exp(llo + (lhi - llo) * t); };
  for (int i = 0; i < per_side; ++i) {
    double t = static_cast<double>(i) / per_side;
    pts.push_back({lerp(t), lo});
    pts.push_back({hi, lerp(t)});
    pts.push_back({lerp(1.0 - t), hi});
    pts.push_back({lo, lerp(1.0 - t)});
  }
  pts.resize(std::min<std::size_t>(pts.size(), n));
  return pts;
}

/// Global attraction: exterior starts under random schedules must come
/// within dist_tol of the region by t_final and not drift away afterwards.
inline verification_report check_attraction(
    const region& r, const reaction_pair& rp, const epsilon_t& eps,
    const std::vector<vec2>& starts, int n_schedules, double t_final,
    double dist_tol, std::uint64_t seed, double dt_switch = 0.1) {
  verification_report rep;
  rep.check = "attraction";
  rep.config = {{"n_starts", starts.size()}, {"n_schedules", n_schedules},
                {"T", t_final},              {"dist_tol", dist_tol},
                {"dt_switch", dt_switch}};
  rep.seed = seed;

  region_query query(r);
  double slack = 0.1 * dist_tol;

  struct task_result {
    double final_dist = 1e300;
    double worst_after_entry = 0.0;  // distance beyond tol after first entry
    bool entered = false;
  };
  std::size_t n_tasks = starts.size() * static_cast<std::size_t>(n_schedules);
  std::vector<task_result> results(n_tasks);

  parallel_for(n_tasks, [&](std::size_t task) {
    std::size_t sched_i = task / starts.size();
    vec2 x0 = starts[task % starts.size()];
    splitmix64 rng(task_seed(seed, 5000 + sched_i));
    rate_schedule sched =
        rate_schedule::random_uniform(eps, dt_switch, t_final, rng);
    integrator_config cfg;
    cfg.t_max = t_final;
    task_result res;
    auto emit = [&](double, vec2 p) {
      double d = query.inside(p) ? 0.0 : query.boundary_distance(p);
      res.final_dist = d;
      if (!res.entered && d < dist_tol) res.entered = true;
      if (res.entered && d > dist_tol + slack)
        res.worst_after_entry = std::max(res.worst_after_entry, d - dist_tol);
    };
    integrate_schedule_core(rp, sched, x0, cfg, {}, {}, emit);
    results[task] = res;
  });

  double worst_final = 0, worst_drift = 0;
  std::size_t worst_at = 0;
  bool all_entered = true;
  for (std::size_t i = 0; i < results.size(); ++i) {
    all_entered = all_entered && results[i].entered;
    if (results[i].final_dist > worst_final) {
      worst_final = results[i].final_dist;
      worst_at = i;
    }
    worst_drift = std::max(worst_drift, results[i].worst_after_entry);
  }
  rep.margin = dist_tol - worst_final - worst_drift;
  rep.pass = all_entered && worst_final < dist_tol && worst_drift == 0.0;
  rep.worst_sample = {{"final_dist", worst_final},
                      {"drift_after_entry", worst_drift},
                      {"start", worst_at % starts.size()},
                      {"schedule", worst_at / starts.size()}};
  return rep;
}

struct steer_config {
  double xi = 1e-3;
  double t_phase = 500.0;       // budget per constant-rate phase
  double dt_switch = 0.05;      // phase-3 re-aim interval
  int max_switches = 20000;
  double approach_radius = 1e-5;  // phase-1 convergence radius scale
  integrator_config integ;
};

struct steer_result {
  rate_schedule schedule;
  trajectory traj;
  double achieved = 1e300;
};

/// Drive the state from p1 into the xi-ball around p2 (which must lie in the
/// region) with an explicitly constructed admissible schedule. Central
/// targets are detailed-balance attractors of constant rates; lobe targets
/// are reached by following the region side past the target's forced-motion
/// line and then letting the forced reaction carry the state in, with the
/// other reaction's flux neutralized at every switch.
inline steer_result steer(const region& r, const reaction_pair& rp,
                          const epsilon_t& eps, vec2 p1, vec2 p2,
                          const steer_config& scfg = {}) {
  region_query query(r);
  require(query.locate(p2, 1e-9) != location::outside,
          errc::target_outside_region, "steer target lies outside the region");

  const double lb = eps.log_band();
  double l1 = log_curve_level(rp, 1, p2);
  double l2 = log_curve_level(rp, 2, p2);
  bool central = std::abs(l1) <= lb * (1.0 + 1e-9) &&
                 std::abs(l2) <= lb * (1.0 + 1e-9);

  steer_result out;
  out.schedule.eps_value = eps.value();
  out.traj.t.push_back(0.0);
  out.traj.pts.push_back(p1);

  double t_now = 0.0;
  vec2 x = p1;
  auto emit = [&](double t, vec2 p) {
    if (t <= out.traj.t.back()) return;
    out.traj.t.push_back(t);
    out.traj.pts.push_back(p);
  };
  auto run_phase = [&](const rate_vector& k, double budget,
                       std::span<const event_spec> events,
                       const std::optional<converge_spec>& conv) {
    require(static_cast<int>(out.schedule.rates.size()) < scfg.max_switches,
            errc::budget_exceeded, "steer switch budget exhausted");
    out.schedule.t_switch.push_back(t_now);
    out.schedule.rates.push_back(k);
    auto st = integrate_core(rp, k, x, t_now, t_now + budget, scfg.integ,
                             events, conv, emit, false);
    t_now = st.t;
    x = st.x;
    return st;
  };

  // Stop a hair inside the ball so the achieved distance clears xi even
  // after the root is bracketed in floating point.
  event_spec prox;
  prox.name = "proximity";
  prox.fn = [&](double, vec2 p) { return norm(p - p2) - 0.95 * scfg.xi; };
  std::vector<event_spec> prox_only{prox};

  auto finish = [&]() {
    out.achieved = norm(x - p2);
    out.traj.reason = out.achieved <= scfg.xi ? stop_reason::converged
                                              : stop_reason::timeout;
    return out;
  };

  if (norm(p1 - p2) <= scfg.xi) return finish();

  if (central) {
    rate_vector k = db_rates(rp, p2, eps);
    auto conv = make_converge_spec(rp, k, p2, scfg.integ.tol_conv);
    run_phase(k, scfg.t_phase, prox_only, conv);
    return finish();
  }

  // Lobe target: exactly one reaction is out of band there.
  int j = std::abs(l1) > lb ? 1 : 2;
  double lj = j == 1 ? l1 : l2;
  vec2 vj = rp.vector(j);
  // Forced flux sign of reaction j outside its band.
  vec2 vdir = lj < 0 ? vj : -vj;
  vec2 vhat = unit(vdir);

  // Upstream crossing of the boundary with the forced-motion line through p2.
  const auto& b = r.boundary;
  double best_t = -1e300;
  std::size_t best_seg = 0;
  bool found = false;
  for (std::size_t s = 0; s + 1 < b.size(); ++s) {
    double ga = cross(vj, b[s] - p2), gb = cross(vj, b[s + 1] - p2);
    if (ga == 0.0 && gb == 0.0) continue;
    if ((ga < 0 && gb < 0) || (ga > 0 && gb > 0)) continue;
    vec2 hit = b[s] + (ga / (ga - gb)) * (b[s + 1] - b[s]);
    double th = dot(hit - p2, vhat);
    // Upstream crossings only; a boundary target is its own crossing.
    if (th <= 1e-9 * query.diameter() && th > best_t) {
      best_t = th;
      best_seg = s;
      found = true;
    }
  }
  require(found, errc::target_outside_region,
          "no boundary crossing upstream of the target");
  const side_provenance* sp = detail::side_of_vertex(r, best_seg);
  require(sp != nullptr, errc::internal, "boundary segment without provenance");

  // The three lobe phases, retried with a tighter corner landing whenever
  // the pass misses: the phase-2 ride shadows the boundary side with an
  // offset proportional to the landing radius, so shrinking it refines the
  // achievable pass distance geometrically.
  for (int attempt = 0; attempt < 4 && norm(x - p2) > scfg.xi; ++attempt) {
    double radius = scfg.approach_radius * std::pow(0.01, attempt);

    // Phase 1: reach the side's start point, a detailed-balance attractor.
    {
      rate_vector kS = db_rates(rp, sp->start, eps);
      converge_spec conv;
      conv.target = sp->start;
      conv.radius = radius * (1.0 + norm(sp->start));
      jacobian_matrix J = jacobian(rp, kS, sp->start);
      conv.vel_cap = 10.0 * conv.radius *
                     std::max(std::sqrt(J.j11 * J.j11 + J.j12 * J.j12 +
                                        J.j21 * J.j21 + J.j22 * J.j22),
                              1e-6);
      auto st = run_phase(kS, scfg.t_phase, prox_only, conv);
      if (st.reason == stop_reason::event_hit) return finish();
    }

    // Phase 2: ride the side's extremal pattern to the forced-motion line.
    {
      event_spec line;
      line.name = "line";
      line.fn = [&](double, vec2 p) { return cross(vj, p - p2); };
      line.accept = [&](double, vec2 p) {
        return dot(p - p2, vhat) < 0.5 * scfg.xi;
      };
      std::vector<event_spec> evts{line, prox};
      auto st = run_phase(sp->rates, scfg.t_phase, evts, {});
      if (st.reason == stop_reason::event_hit && st.event_index == 1)
        return finish();
      if (st.reason != stop_reason::event_hit) continue;  // missed the line
    }

    // Phase 3: neutralize the in-band reaction so the forced one carries
    // the state along the line through p2. The neutral ratio gets a small
    // transverse-error bias each switch (bang-bang with deadband) and the
    // switch interval adapts to the local speed.
    int i_free = 3 - j;
    double s2t = cross(vhat, rp.vector(i_free));
    double prev_dist = norm(x - p2);
    int growing = 0;
    while (static_cast<int>(out.schedule.rates.size()) < scfg.max_switches) {
      double dist = norm(x - p2);
      double e_t = cross(vhat, x - p2);
      double bias = 0.0;
      if (std::abs(e_t) > 0.02 * scfg.xi && s2t != 0.0)
        bias = ((e_t * s2t > 0) ? -1.0 : 1.0) *
               std::min(0.3, 2.0 * std::abs(e_t) / (dist + scfg.xi));
      double li = std::clamp(log_curve_level(rp, i_free, x) + bias, -lb, lb);
      double kf = std::exp(0.5 * li), kb = std::exp(-0.5 * li);
      double lo = eps.rate_lo(), hi = eps.rate_hi();
      double jf = lj < 0 ? hi : lo, jb = lj < 0 ? lo : hi;
      rate_vector k = i_free == 1 ? rate_vector{kf, kb, jf, jb}
                                  : rate_vector{jf, jb, kf, kb};
      double speed = norm(eval_field(rp, k, x).velocity);
      if (!(speed > 0)) break;
      double h_arc = std::max(0.25 * scfg.xi, 0.125 * dist);
      double dt = std::clamp(h_arc / speed, 1e-12, scfg.dt_switch);
      auto st = run_phase(k, dt, prox_only, {});
      if (st.reason == stop_reason::event_hit) return finish();
      double d = norm(x - p2);
      growing = d > prev_dist ? growing + 1 : 0;
      prev_dist = d;
      if (growing > 30) break;  // passed the closest approach
    }
  }
  return finish();
}

/// Eigenstructure conditions at an attracting corner: real negative
/// eigenvalues, mixed-sign fast eigenvector, and boundary trajectories that
/// enter along the slow eigendirection.
inline verification_report check_eigen_approach(const region& r,
                                                const reaction_pair& rp,
                                                const epsilon_t& eps,
                                                corner_id cid,
                                                double max_angle_deg = 2.0) {
  verification_report rep;
  rep.check = "eigen_approach";
  rep.config = {{"corner", to_string(cid)}, {"max_angle_deg", max_angle_deg}};

  const corner& c = r.corners.at(cid);
  rate_vector pattern = c.pattern(eps);
  jacobian_matrix J = jacobian(rp, pattern, c.pos);

  double jscale = std::abs(J.j11) + std::abs(J.j12) + std::abs(J.j21) +
                  std::abs(J.j22);
  require(std::abs(J.disc) >= 1e-12 * jscale * jscale,
          errc::equal_eigenvalues,
          "discriminant vanishes; slow/fast split undefined");

  bool real_negative = J.real_eigen && J.lam_slow < 0 && J.lam_fast < 0;
  bool fast_mixed = J.e_fast.x * J.e_fast.y < 0;
  auto [s12, s21] = symmetrized_offdiag(J, c.pos);
  bool symmetric_ok = nearly_equal(s12, s21, 1e-6);

  double worst_angle = 0.0;
  int checked = 0;
  double probe_dist = 1e-4 * (1.0 + norm(c.pos));
  for (const auto& s : r.sides) {
    if (norm(s.target - c.pos) > 1e-9 * (1.0 + norm(c.pos))) continue;
    // Walk the side from its corner end outward to the probe distance.
    long lo = static_cast<long>(s.v_begin), hi = static_cast<long>(s.v_end) - 1;
    long step = s.reversed ? 1 : -1;
    long idx = s.reversed ? lo : hi;
    while (idx + step >= lo && idx + step <= hi &&
           norm(r.boundary[static_cast<std::size_t>(idx)] - c.pos) < probe_dist)
      idx += step;
    vec2 dir = c.pos - r.boundary[static_cast<std::size_t>(idx)];
    if (norm(dir) == 0.0) continue;
    double sin_angle = std::abs(cross(unit(dir), J.e_slow));
    worst_angle = std::max(worst_angle, std::asin(std::min(1.0, sin_angle)));
    ++checked;
  }
  double worst_deg = worst_angle * 180.0 / 3.14159265358979323846;

  rep.pass = real_negative && fast_mixed && symmetric_ok && checked > 0 &&
             worst_deg <= max_angle_deg;
  rep.margin = max_angle_deg - worst_deg;
  rep.worst_sample = {{"lam_slow", J.lam_slow},
                      {"lam_fast", J.lam_fast},
                      {"e_fast", {J.e_fast.x, J.e_fast.y}},
                      {"e_slow", {J.e_slow.x, J.e_slow.y}},
                      {"approach_angle_deg", worst_deg},
                      {"sides_checked", checked},
                      {"symmetrized_offdiag", {s12, s21}}};
  return rep;
}

/// Omega-limit style revisits: steer back and forth between the probe and an
/// anchor with geometrically shrinking tolerances; each revisit must land
/// within its shrunken ball at a strictly later time.
inline verification_report check_minimal_attraction(
    const region& r, const reaction_pair& rp, const epsilon_t& eps,
    const std::vector<vec2>& probes, std::uint64_t seed, double xi0 = 1e-2,
    int rounds = 5) {
  verification_report rep;
  rep.check = "minimal_attraction";
  rep.config = {{"xi0", xi0}, {"rounds", rounds}, {"n_probes", probes.size()}};
  rep.seed = seed;

  region_query query(r);
  vec2 base = detailed_balance_point(rp, {1, 1, 1, 1});
  if (query.locate(base, 1e-9) == location::outside) base = r.centroid();
  // The alternation partner must be distinct from the probe.
  auto anchor_for = [&](vec2 q) {
    if (norm(base - q) > 0.05 * query.diameter()) return base;
    auto alts = random_interior_points(r, query, 8, task_seed(seed, 0xa11c));
    for (vec2 a : alts)
      if (norm(a - q) > 0.05 * query.diameter()) return a;
    return base;
  };

  double worst_slack = 1e300;
  report_json fails = report_json::array();
  for (std::size_t pi = 0; pi < probes.size(); ++pi) {
    vec2 q = probes[pi];
    vec2 anchor = anchor_for(q);
    vec2 x = anchor;
    double t_prev = -1.0;
    double t_base = 0.0;
    for (int k = 0; k < rounds; ++k) {
      steer_config scfg;
      scfg.xi = xi0 / std::pow(2.0, k);
      steer_result to_q = steer(r, rp, eps, x, q, scfg);
      double slack = scfg.xi - to_q.achieved;
      worst_slack = std::min(worst_slack, slack);
      double t_visit = t_base + to_q.traj.t_end();
      if (slack < 0 || t_visit <= t_prev)
        fails.push_back({{"probe", pi}, {"round", k}, {"achieved", to_q.achieved},
                         {"xi", scfg.xi}});
      t_prev = t_visit;
      t_base = t_visit;
      x = to_q.traj.back();

      steer_config back_cfg;
      back_cfg.xi = xi0;
      steer_result back = steer(r, rp, eps, x, anchor, back_cfg);
      t_base += back.traj.t_end();
      x = back.traj.back();
    }
  }
  rep.pass = fails.empty();
  rep.margin = worst_slack;
  rep.worst_sample = {{"failures", fails}};
  return rep;
}

}  // namespace minreg
