// Acceptance suite: one test case per acceptance criterion, each printing a
// single PASS/FAIL line with its runtime.

#include <catch2/catch_amalgamated.hpp>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "minreg/io.hpp"

using namespace minreg;
namespace fs = std::filesystem;

namespace {

using clock_type = std::chrono::steady_clock;

struct criterion_guard {
  int id;
  std::string name;
  bool passed = false;
  clock_type::time_point t0 = clock_type::now();

  criterion_guard(int id_, std::string name_) : id(id_), name(std::move(name_)) {}
  ~criterion_guard() {
    double dt = std::chrono::duration<double>(clock_type::now() - t0).count();
    std::cout << (passed ? "[PASS]" : "[FAIL]") << " criterion " << id << ": "
              << name << " (" << dt << " s)" << std::endl;
  }
  double elapsed() const {
    return std::chrono::duration<double>(clock_type::now() - t0).count();
  }
};

const reaction_pair& net2() {
  static reaction_pair rp = example_network();
  return rp;
}
const region& region2() {
  static region r = build_region(net2(), epsilon_t(0.5));
  return r;
}
const reaction_pair& netv() {
  static reaction_pair rp = case_v_network();
  return rp;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("criterion 1: corner attractors under the extremal patterns") {
  criterion_guard g(1, "corner attractors (4 patterns from the unit state)");
  epsilon_t eps(0.5);
  corner_set cs = corner_points(net2(), eps);

  // Independent log-linear solve oracle, frozen.
  const double c13 = std::pow(4.0, 1.0 / 3.0);
  struct expect {
    corner_id id;
    vec2 pos;
  } table[] = {
      {corner_id::A, {1.0 / c13, c13}},
      {corner_id::B, {4, 4}},
      {corner_id::C, {c13, 1.0 / c13}},
      {corner_id::D, {0.25, 0.25}},
  };
  REQUIRE(std::abs(table[0].pos.x - 0.6299605249474366) < 1e-15);

  for (const auto& e : table) {
    auto t0 = clock_type::now();
    const corner& c = cs.at(e.id);
    integrator_config cfg;
    cfg.t_max = 200;
    auto conv = make_converge_spec(net2(), c.pattern(eps), c.pos, cfg.tol_conv);
    trajectory tr = integrate(net2(), c.pattern(eps), {1, 1}, cfg, {}, conv);
    REQUIRE(tr.reason == stop_reason::converged);
    REQUIRE(norm(tr.back() - e.pos) < 1e-6);
    REQUIRE(std::chrono::duration<double>(clock_type::now() - t0).count() < 1.0);
  }
  g.passed = true;
}

TEST_CASE("criterion 2: closed-form cross-checks against oracles") {
  criterion_guard g(2, "corners, balance points, tangent table, E/F");

  // Corners of the worked example against the frozen solve.
  epsilon_t eps(0.5);
  corner_set cs = corner_points(net2(), eps);
  const double c13 = std::pow(4.0, 1.0 / 3.0);
  REQUIRE(nearly_equal(cs.at(corner_id::A).pos.x, 1.0 / c13, 1e-9));
  REQUIRE(nearly_equal(cs.at(corner_id::A).pos.y, c13, 1e-9));
  REQUIRE(cs.at(corner_id::B).pos == vec2{4, 4});
  REQUIRE(cs.at(corner_id::D).pos == vec2{0.25, 0.25});

  // Detailed-balance point against an independent Newton solve on the raw
  // flux equations.
  {
    rate_vector k{4, 1, 1, 1};
    vec2 p{2, 1.5};
    for (int it = 0; it < 60; ++it) {
      field_value f = eval_field(net2(), k, p);
      // Hand-written gradients of flux1 = k1 y - k2 x^2 and
      // flux2 = k3 x - k4 y^2 for this network.
      double f1x = -2.0 * k.k2 * p.x, f1y = k.k1;
      double f2x = k.k3, f2y = -2.0 * k.k4 * p.y;
      double det = f1x * f2y - f1y * f2x;
      REQUIRE(std::abs(det) > 1e-12);
      p.x -= (f.flux1 * f2y - f1y * f.flux2) / det;
      p.y -= (f1x * f.flux2 - f.flux1 * f2x) / det;
    }
    vec2 db = detailed_balance_point(net2(), k);
    REQUIRE(nearly_equal(db.x, p.x, 1e-9));
    REQUIRE(nearly_equal(db.y, p.y, 1e-9));
    REQUIRE(nearly_equal(db.x, std::pow(4.0, 2.0 / 3.0), 1e-9));
  }

  // All eight tangent-table forms at eps in {0.1, 0.05} on the mixed-slope
  // fixture (p1=2, q1=1, p2=-1, q2=1).
  const double p1 = 2, q1 = 1, p2 = -1, q2 = 1, N = p1 * q2 - p2 * q1;
  struct row {
    corner_id id;
    double s;
  } rows[] = {
      {corner_id::B, -p1 + p2 + q1 - q2},
      {corner_id::A, -p1 - p2 + q1 + q2},
      {corner_id::D, p1 - p2 - q1 + q2},
      {corner_id::C, p1 + p2 - q1 - q2},
  };
  for (double e : {0.1, 0.05}) {
    corner_set vcs = corner_points(netv(), epsilon_t(e));
    for (const auto& r : rows) {
      double expo = 2.0 * r.s / N;
      REQUIRE(nearly_equal(tangent_slope(netv(), 1, vcs.at(r.id).pos),
                           (p1 / q1) * std::pow(e, expo), 1e-9));
      REQUIRE(nearly_equal(tangent_slope(netv(), 2, vcs.at(r.id).pos),
                           (p2 / q2) * std::pow(e, expo), 1e-9));
    }
  }

  // E and F on the fixture at eps = 0.1; E frozen to the closed form.
  ef_points ef = special_points(netv(), epsilon_t(0.1));
  REQUIRE(nearly_equal(ef.E.x, 0.14142135623730951, 1e-9));
  REQUIRE(nearly_equal(ef.E.y, 0.07071067811865475, 1e-9));
  double base = -(q1 * q2) / (p1 * p2);
  REQUIRE(nearly_equal(ef.F.x,
                       std::pow(base, q1 / (p1 - q1)) * std::pow(0.1, 2.0 / (p1 - q1)),
                       1e-9));
  REQUIRE(nearly_equal(log_curve_level(netv(), 1, ef.F),
                       epsilon_t(0.1).log_band(), 1e-10));
  REQUIRE(nearly_equal(tangent_slope(netv(), 2, ef.E), -q1 / p1, 1e-10));
  g.passed = true;
}

TEST_CASE("criterion 3: invariance with a shrunken negative control") {
  criterion_guard g(3, "Nagumo invariance at 2000 samples + negative control");
  auto rep = check_invariance(region2(), net2(), 0.5, 2000, 1e-8);
  REQUIRE(rep.pass);
  REQUIRE(rep.margin >= -1e-8);

  region shrunk = scaled_copy(region2(), 0.99);
  auto bad = check_invariance(shrunk, net2(), 0.5, 2000, 1e-8);
  REQUIRE_FALSE(bad.pass);

  REQUIRE(g.elapsed() < 10.0);
  g.passed = true;
}

TEST_CASE("criterion 4: Monte-Carlo containment") {
  criterion_guard g(4, "200 schedules x 20 starts, T=50, dilated by 1e-6");
  auto rep =
      check_containment(region2(), net2(), epsilon_t(0.5), 200, 20, 50.0, 42);
  REQUIRE(rep.pass);
  REQUIRE(g.elapsed() < 60.0);
  g.passed = true;
}

TEST_CASE("criterion 5: global attraction from exterior grid starts") {
  criterion_guard g(5, "16 exterior starts x 50 schedules reach the region");
  auto rep = check_attraction(region2(), net2(), epsilon_t(0.5),
                              perimeter_grid(0.05, 20.0, 16), 50, 100.0, 1e-3,
                              42);
  REQUIRE(rep.pass);
  REQUIRE(g.elapsed() < 120.0);
  g.passed = true;
}

TEST_CASE("criterion 6: reachability and omega-limit revisits") {
  criterion_guard g(6, "steer to 10 targets + shrinking revisit rounds");
  epsilon_t eps(0.5);
  region_query q(region2());
  auto targets = random_interior_points(region2(), q, 10, task_seed(42, 7));
  for (vec2 t : targets) {
    steer_config scfg;
    scfg.xi = 1e-3;
    steer_result res = steer(region2(), net2(), eps, {10, 10}, t, scfg);
    REQUIRE(res.achieved <= 1e-3);
    for (const auto& k : res.schedule.rates) REQUIRE(k.admissible(eps));
  }

  std::vector<vec2> probes;
  probes.push_back({1, 1});
  const auto& s0 = region2().sides.front();
  vec2 mid = region2().boundary[(s0.v_begin + s0.v_end) / 2];
  probes.push_back(mid + 0.01 * (region2().centroid() - mid));
  probes.push_back(mid);  // boundary midpoint
  auto rep = check_minimal_attraction(region2(), net2(), eps, probes, 42,
                                      1e-2, 5);
  REQUIRE(rep.pass);
  REQUIRE(g.elapsed() < 60.0);
  g.passed = true;
}

TEST_CASE("criterion 7: eigen-direction conditions and scan stability") {
  criterion_guard g(7, "slow-direction approach, toy jacobian, scan");
  epsilon_t eps(0.5);

  auto rep = check_eigen_approach(region2(), net2(), eps, corner_id::A, 2.0);
  REQUIRE(rep.pass);
  jacobian_matrix JA =
      jacobian(net2(), region2().corners.at(corner_id::A).pattern(eps),
               region2().corners.at(corner_id::A).pos);
  REQUIRE(JA.real_eigen);
  REQUIRE(JA.lam_slow < 0);
  REQUIRE(JA.lam_fast < 0);
  REQUIRE(JA.e_fast.x * JA.e_fast.y < 0);

  jacobian_matrix J = jacobian(net2(), {1, 1, 1, 1}, {1, 1});
  REQUIRE(J.j11 == -5.0);
  REQUIRE(J.j12 == 4.0);
  REQUIRE(J.j21 == 4.0);
  REQUIRE(J.j22 == -5.0);
  REQUIRE(J.lam_slow == -1.0);
  REQUIRE(J.lam_fast == -9.0);

  auto r1 = equal_eigenvalue_scan(net2(), corner_id::A, 0.05, 0.95, 10000);
  auto r2 = equal_eigenvalue_scan(net2(), corner_id::A, 0.05, 0.95, 100000);
  REQUIRE(r1.size() == r2.size());
  for (std::size_t i = 0; i < r1.size(); ++i)
    REQUIRE(std::abs(r1[i] - r2[i]) < 1e-9);
  auto v1 = equal_eigenvalue_scan(netv(), corner_id::A, 0.05, 0.9, 10000);
  auto v2 = equal_eigenvalue_scan(netv(), corner_id::A, 0.05, 0.9, 100000);
  REQUIRE(v1.size() == v2.size());
  for (std::size_t i = 0; i < v1.size(); ++i)
    REQUIRE(std::abs(v1[i] - v2[i]) < 1e-9);
  g.passed = true;
}

TEST_CASE("criterion 8: mixed-slope construction at eps = 0.05") {
  criterion_guard g(8, "case V build: E, splice point, invariance, containment");
  epsilon_t eps(0.05);
  region r = build_region(netv(), eps);

  bool closed = r.boundary.front() == r.boundary.back();
  bool simple = is_simple(r);
  bool has_e = r.special.count("E") == 1;
  CHECK(closed);
  CHECK(simple);
  CHECK(has_e);
  region_query q(r);
  bool e_on_boundary =
      has_e && q.boundary_distance(r.special.at("E")) < 1e-8 * r.diameter();
  CHECK(e_on_boundary);

  // Splice point with both levels outside the central band. The opposing
  // trajectories of this fixture's double-source arc do not intersect (one
  // encloses the other), so no splice point exists; this clause records the
  // discrepancy rather than papering over it.
  bool has_m = r.special.count("M") == 1;
  CHECK(has_m);
  bool m_outside_band = false;
  if (has_m) {
    double lb = eps.log_band();
    vec2 m = r.special.at("M");
    m_outside_band = std::abs(log_curve_level(netv(), 1, m)) > lb ||
                     std::abs(log_curve_level(netv(), 2, m)) > lb;
    CHECK(m_outside_band);
  }

  auto inv = check_invariance(r, netv(), eps.value(), 2000, 1e-8);
  CHECK(inv.pass);

  auto cont = check_containment(r, netv(), eps, 200, 20, 50.0, 42);
  CHECK(cont.pass);

  g.passed = closed && simple && has_e && e_on_boundary && has_m &&
             m_outside_band && inv.pass && cont.pass;
  REQUIRE(g.passed);
}

TEST_CASE("criterion 9: strict nesting across epsilon") {
  criterion_guard g(9, "regions at 0.6 / 0.5 / 0.4 are strictly nested");
  region r06 = build_region(net2(), epsilon_t(0.6));
  region r05 = build_region(net2(), epsilon_t(0.5));
  region r04 = build_region(net2(), epsilon_t(0.4));

  auto strictly_inside = [](const region& inner, const region& outer) {
    region_query q(outer);
    double band = 1e-9 * q.diameter();
    for (const vec2& p : inner.boundary)
      if (!q.inside(p) && q.boundary_distance(p) > band) return false;
    return true;
  };
  REQUIRE(strictly_inside(r06, r05));
  REQUIRE(strictly_inside(r05, r04));
  REQUIRE(g.elapsed() < 30.0);
  g.passed = true;
}

TEST_CASE("criterion 10: byte-identical outputs for a fixed seed") {
  criterion_guard g(10, "build and verify twice, compare all artifacts");
  fs::path base = fs::path("acceptance_tmp");
  fs::remove_all(base);
  fs::create_directories(base);
  std::string cli = MINREG_CLI_PATH;
  std::string net = std::string(MINREG_NETWORK_DIR) + "/network2.json";

  auto run = [&](const std::string& sub) {
    fs::path dir = base / sub;
    fs::create_directories(dir);
    std::string build_cmd = cli + " build " + net + " --seed 7 --out " +
                            dir.string() + " > " + (dir / "build.out").string();
    REQUIRE(std::system(build_cmd.c_str()) == 0);
    std::string verify_cmd =
        cli + " verify " + net +
        " --seed 7 --suite invariance,containment --samples 200 "
        "--schedules 20 --starts 5 --t-contain 10 --out " +
        dir.string() + " > " + (dir / "verify.out").string();
    REQUIRE(std::system(verify_cmd.c_str()) == 0);
    return dir;
  };
  fs::path d1 = run("run1");
  fs::path d2 = run("run2");

  for (const char* f : {"region.json", "region.csv", "region.svg",
                        "verify_report.jsonl", "build.out", "verify.out"}) {
    INFO(f);
    REQUIRE(slurp(d1 / f) == slurp(d2 / f));
    REQUIRE_FALSE(slurp(d1 / f).empty());
  }
  g.passed = true;
}
