// minreg: construct and verify minimal invariant / globally attracting
// regions of planar two-reaction mass-action systems with bounded
// time-varying rate constants.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "minreg/io.hpp"

#include "CLI11.hpp"

namespace fs = std::filesystem;
using namespace minreg;

namespace {

int exit_code_for(errc c) {
  switch (c) {
    case errc::malformed_input:
      return 2;
    case errc::degenerate_slope:
    case errc::parallel_reactions:
    case errc::schedule_out_of_box:
    case errc::non_positive_point:
    case errc::wrong_case:
    case errc::target_outside_region:
      return 3;
    case errc::epsilon_too_large:
      return 4;
    case errc::trajectory_escaped:
    case errc::non_intersecting_trajectories:
    case errc::region_invalid:
    case errc::budget_exceeded:
      return 5;
    default:
      return 70;
  }
}

std::uint64_t resolve_seed(std::optional<std::uint64_t> flag) {
  if (flag) return *flag;
  if (const char* env = std::getenv("MINREG_SEED")) {
    char* end = nullptr;
    std::uint64_t v = std::strtoull(env, &end, 10);
    if (end && *end == '\0') return v;
  }
  return 42;
}

struct common_opts {
  std::string input;
  std::optional<double> epsilon;
  std::optional<std::uint64_t> seed;
  double rtol = 1e-9;
  double atol = 1e-12;
  double tmax = 1e3;
  std::string out_dir = ".";

  integrator_config integ() const {
    integrator_config c;
    c.rtol = rtol;
    c.atol = atol;
    c.t_max = tmax;
    return c;
  }
};

network_input load_network(const common_opts& o) {
  auto text = read_text_file(o.input);
  auto j = nlohmann::json::parse(text, nullptr, false);
  network_input in = [&] {
    if (!j.is_discarded() && j.contains("network"))
      return parse_network(j["network"].dump());
    return parse_network(text);
  }();
  if (o.epsilon) return {in.rp, epsilon_t(*o.epsilon)};
  return in;
}

ordered_json config_echo(const common_opts& o, std::uint64_t seed) {
  ordered_json j;
  j["input"] = o.input;
  j["epsilon_override"] = o.epsilon ? ordered_json(*o.epsilon) : ordered_json();
  j["rtol"] = o.rtol;
  j["atol"] = o.atol;
  j["tmax"] = o.tmax;
  j["seed"] = seed;
  j["version"] = kVersion;
  return j;
}

vec2 parse_point(const std::string& s) {
  auto comma = s.find(',');
  require(comma != std::string::npos, errc::malformed_input,
          "expected x,y but got " + s);
  return {std::stod(s.substr(0, comma)), std::stod(s.substr(comma + 1))};
}

// ---------------------------------------------------------------------------

int cmd_classify(const common_opts& o) {
  auto [rp, eps] = load_network(o);
  case_label label = classify_case(rp);
  std::cout << "case " << to_string(label.id);
  if (label.sub != subcase_id::none)
    std::cout << ", subcase " << to_string(label.sub);
  std::cout << "\n";
  std::cout << "slopes: s1 = " << format17(rp.slope(1))
            << ", s2 = " << format17(rp.slope(2)) << "\n";
  if (label.mixed_slopes()) {
    pq_normalization n = normalize_pq(rp);
    std::cout << "normalized exponents: p1 = " << format17(n.p1)
              << ", q1 = " << format17(n.q1) << ", p2 = " << format17(n.p2)
              << ", q2 = " << format17(n.q2)
              << "  (p1+p2-q1-q2 = " << format17(n.sigma()) << ")\n";
  }
  corner_set cs = corner_points(rp, eps);
  std::cout << "corners (epsilon = " << format17(eps.value()) << "):\n";
  for (const auto& c : cs.corners)
    std::cout << "  " << to_string(c.id) << " = (" << format17(c.pos.x) << ", "
              << format17(c.pos.y) << ")  ["
              << (c.source ? "source" : "sink") << "]\n";
  if (label.mixed_slopes()) {
    ef_points ef = special_points(rp, eps);
    std::cout << "E = (" << format17(ef.E.x) << ", " << format17(ef.E.y)
              << ")\nF = (" << format17(ef.F.x) << ", " << format17(ef.F.y)
              << ")\n";
  }
  return 0;
}

int cmd_build(const common_opts& o, const std::vector<double>& eps_list,
              const std::string& formats, bool log_log) {
  auto [rp, eps0] = load_network(o);
  std::uint64_t seed = resolve_seed(o.seed);
  std::vector<double> eps_values =
      eps_list.empty() ? std::vector<double>{eps0.value()} : eps_list;
  fs::create_directories(o.out_dir);

  for (double ev : eps_values) {
    epsilon_t eps(ev);
    region_build_config cfg;
    cfg.integ = o.integ();
    region r = build_region(rp, eps, cfg);
    char short_eps[32];
    std::snprintf(short_eps, sizeof short_eps, "%.6g", ev);
    std::string stem = eps_values.size() == 1
                           ? std::string("region")
                           : std::string("region_eps") + short_eps;
    auto echo = config_echo(o, seed);
    echo["epsilon"] = ev;
    if (formats.find("json") != std::string::npos)
      write_text_file(o.out_dir + "/" + stem + ".json",
                      region_to_json(r, rp, echo, seed).dump(2) + "\n");
    if (formats.find("csv") != std::string::npos)
      write_text_file(o.out_dir + "/" + stem + ".csv", region_to_csv(r));
    if (formats.find("svg") != std::string::npos) {
      svg_options sopt;
      sopt.log_log = log_log;
      write_text_file(o.out_dir + "/" + stem + ".svg",
                      region_to_svg(r, rp, sopt));
    }
    std::cout << "built " << stem << " (case " << to_string(r.label.id)
              << to_string(r.label.sub) << ", " << r.boundary.size()
              << " boundary vertices)\n";
  }
  return 0;
}

struct verify_opts {
  std::string suite = "all";
  int inv_samples = 2000;
  int schedules = 200;
  int starts = 20;
  double t_contain = 50;
  int attract_grid = 16;
  int attract_schedules = 50;
  double t_attract = 100;
  double attract_tol = 1e-3;
  int steer_targets = 10;
  double steer_xi = 1e-3;
  double shrink = 0.0;  // diagnostic negative control
};

bool suite_has(const std::string& suite, const std::string& name) {
  return suite == "all" || suite.find(name) != std::string::npos;
}

int cmd_verify(const common_opts& o, const verify_opts& v) {
  auto text = read_text_file(o.input);
  auto j = nlohmann::json::parse(text, nullptr, false);
  std::uint64_t seed = resolve_seed(o.seed);

  network_input in = load_network(o);
  const reaction_pair& rp = in.rp;
  epsilon_t eps = in.eps;

  region r;
  if (!j.is_discarded() && j.contains("boundary")) {
    r = region_from_json(ordered_json::parse(text));
  } else {
    region_build_config cfg;
    cfg.integ = o.integ();
    r = build_region(rp, eps, cfg);
  }
  if (v.shrink > 0.0) r = scaled_copy(r, v.shrink);

  std::vector<verification_report> reports;
  auto echo = config_echo(o, seed);

  if (suite_has(v.suite, "invariance"))
    reports.push_back(
        check_invariance(r, rp, eps.value(), v.inv_samples, 1e-8));
  if (suite_has(v.suite, "corners"))
    reports.push_back(check_corner_convergence(rp, eps, {{1, 1}}));
  if (suite_has(v.suite, "containment"))
    reports.push_back(check_containment(r, rp, eps, v.schedules, v.starts,
                                        v.t_contain, seed));
  if (suite_has(v.suite, "attraction"))
    reports.push_back(check_attraction(
        r, rp, eps, perimeter_grid(0.05, 20.0, v.attract_grid),
        v.attract_schedules, v.t_attract, v.attract_tol, seed));
  if (suite_has(v.suite, "eigen")) {
    for (auto cid : {corner_id::A, corner_id::B, corner_id::C, corner_id::D}) {
      if (r.corners.at(cid).source) continue;
      try {
        reports.push_back(check_eigen_approach(r, rp, eps, cid));
      } catch (const error& e) {
        if (e.code() != errc::equal_eigenvalues) throw;
        verification_report rep;
        rep.check = "eigen_approach";
        rep.pass = true;  // coincident eigenvalues: slow/fast test skipped
        rep.worst_sample = {{"corner", to_string(cid)},
                            {"note", "EqualEigenvalues"}};
        reports.push_back(rep);
      }
    }
  }
  if (suite_has(v.suite, "steer") || suite_has(v.suite, "minimal")) {
    region_query q(r);
    if (suite_has(v.suite, "steer")) {
      auto targets =
          random_interior_points(r, q, v.steer_targets, task_seed(seed, 7));
      verification_report rep;
      rep.check = "steer";
      rep.seed = seed;
      rep.config = {{"targets", v.steer_targets}, {"xi", v.steer_xi}};
      double worst = 1e300;
      report_json fails = report_json::array();
      for (std::size_t i = 0; i < targets.size(); ++i) {
        steer_config scfg;
        scfg.xi = v.steer_xi;
        steer_result res = steer(r, rp, eps, {10, 10}, targets[i], scfg);
        worst = std::min(worst, v.steer_xi - res.achieved);
        if (res.achieved > v.steer_xi)
          fails.push_back({{"target", {targets[i].x, targets[i].y}},
                           {"achieved", res.achieved}});
      }
      rep.margin = worst;
      rep.pass = fails.empty();
      rep.worst_sample = {{"failures", fails}};
      reports.push_back(rep);
    }
    if (suite_has(v.suite, "minimal")) {
      std::vector<vec2> probes;
      probes.push_back(detailed_balance_point(rp, {1, 1, 1, 1}));
      const auto& s0 = r.sides.front();
      vec2 mid = r.boundary[(s0.v_begin + s0.v_end) / 2];
      vec2 c = r.centroid();
      probes.push_back(mid + 0.01 * (c - mid));  // just inside a lobe
      probes.push_back(mid);                     // on the boundary itself
      reports.push_back(check_minimal_attraction(r, rp, eps, probes, seed));
    }
  }

  for (auto& rep : reports) {
    rep.seed = rep.seed ? rep.seed : seed;
    if (rep.config.is_null()) rep.config = echo;
    std::cout << rep.to_json().dump() << "\n";
  }
  if (!o.out_dir.empty()) {
    fs::create_directories(o.out_dir);
    write_text_file(o.out_dir + "/verify_report.jsonl",
                    reports_to_jsonl(reports));
  }
  for (const auto& rep : reports)
    if (!rep.pass) return 1;
  return 0;
}

int cmd_simulate(const common_opts& o, const std::string& rates_s,
                 const std::string& pattern_s, int random_n,
                 const std::string& schedule_file, const std::string& start_s,
                 double t_final, const std::string& out_file) {
  auto [rp, eps] = load_network(o);
  std::uint64_t seed = resolve_seed(o.seed);
  vec2 x0 = parse_point(start_s);

  rate_schedule sched;
  sched.eps_value = eps.value();
  if (!schedule_file.empty()) {
    sched = schedule_from_json(ordered_json::parse(read_text_file(schedule_file)),
                               eps.value());
  } else if (!pattern_s.empty()) {
    corner_set cs = corner_points(rp, eps);
    corner_id cid = pattern_s == "A"   ? corner_id::A
                    : pattern_s == "B" ? corner_id::B
                    : pattern_s == "C" ? corner_id::C
                                       : corner_id::D;
    sched = rate_schedule::constant(cs.at(cid).pattern(eps), eps.value());
  } else if (random_n > 0) {
    splitmix64 rng(seed);
    sched = rate_schedule::random_uniform(eps, t_final / random_n, t_final, rng);
  } else if (!rates_s.empty()) {
    std::vector<double> k;
    std::string cur;
    for (char ch : rates_s + ",") {
      if (ch == ',') {
        k.push_back(std::stod(cur));
        cur.clear();
      } else
        cur += ch;
    }
    require(k.size() == 4, errc::malformed_input, "--rates needs k1,k2,k3,k4");
    sched = rate_schedule::constant({k[0], k[1], k[2], k[3]}, eps.value());
  } else {
    sched = rate_schedule::constant({1, 1, 1, 1}, eps.value());
  }
  sched.validate(eps);

  integrator_config cfg = o.integ();
  cfg.t_max = t_final;
  trajectory tr = integrate_schedule(rp, sched, x0, cfg);
  std::string csv = trajectory_to_csv(tr, sched);
  if (out_file.empty() || out_file == "-")
    std::cout << csv;
  else {
    fs::create_directories(fs::path(out_file).parent_path().empty()
                               ? "."
                               : fs::path(out_file).parent_path().string());
    write_text_file(out_file, csv);
    std::cout << "wrote " << out_file << " (" << tr.t.size() << " rows, "
              << to_string(tr.reason) << ")\n";
  }
  return 0;
}

int cmd_steer(const common_opts& o, const std::string& from_s,
              const std::string& to_s, double xi) {
  auto [rp, eps] = load_network(o);
  std::uint64_t seed = resolve_seed(o.seed);
  region_build_config cfg;
  cfg.integ = o.integ();
  region r = build_region(rp, eps, cfg);
  steer_config scfg;
  scfg.xi = xi;
  steer_result res = steer(r, rp, eps, parse_point(from_s), parse_point(to_s), scfg);
  fs::create_directories(o.out_dir);
  write_text_file(o.out_dir + "/steer_schedule.json",
                  schedule_to_json(res.schedule).dump(2) + "\n");
  write_text_file(o.out_dir + "/steer_trajectory.csv",
                  trajectory_to_csv(res.traj, res.schedule));
  std::cout << "achieved distance " << format17(res.achieved) << " (xi = "
            << format17(xi) << ", " << res.schedule.rates.size()
            << " schedule intervals, seed " << seed << ")\n";
  return res.achieved <= xi ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"minimal invariant and globally attracting regions for planar "
               "two-reaction variable-rate mass-action systems"};
  app.require_subcommand(1);

  common_opts o;
  std::vector<double> eps_list;
  std::string formats = "json,csv,svg";
  bool log_log = false;
  verify_opts v;
  std::string rates_s, pattern_s, schedule_file, start_s = "1,1";
  std::string from_s = "10,10", to_s = "1,1", sim_out;
  int random_n = 0;
  double t_final = 50.0, xi = 1e-3;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("input", o.input, "network or region JSON file")
        ->required();
    cmd->add_option("--epsilon", o.epsilon, "override the file's epsilon");
    cmd->add_option("--seed", o.seed, "master seed (env MINREG_SEED fallback)");
    cmd->add_option("--rtol", o.rtol, "integrator relative tolerance");
    cmd->add_option("--atol", o.atol, "integrator absolute tolerance");
    cmd->add_option("--tmax", o.tmax, "integrator time budget");
    cmd->add_option("--out", o.out_dir, "output directory");
  };

  CLI::App* classify = app.add_subcommand("classify", "case classification and corner report");
  add_common(classify);

  CLI::App* build = app.add_subcommand("build", "construct the region and export it");
  add_common(build);
  build->add_option("--epsilon-list", eps_list, "build several epsilon values")
      ->delimiter(',');
  build->add_option("--format", formats, "any of json,csv,svg (default all)");
  build->add_flag("--log-log", log_log, "log-log axes in the SVG export");

  CLI::App* verify = app.add_subcommand("verify", "run verification suites");
  add_common(verify);
  verify->add_option("--suite", v.suite,
                     "all or comma list: invariance,corners,containment,"
                     "attraction,eigen,steer,minimal");
  verify->add_option("--samples", v.inv_samples, "invariance boundary samples");
  verify->add_option("--schedules", v.schedules, "containment schedules");
  verify->add_option("--starts", v.starts, "containment interior starts");
  verify->add_option("--t-contain", v.t_contain, "containment horizon");
  verify->add_option("--grid", v.attract_grid, "attraction exterior grid size");
  verify->add_option("--attract-schedules", v.attract_schedules,
                     "attraction schedules per start");
  verify->add_option("--t-attract", v.t_attract, "attraction horizon");
  verify->add_option("--attract-tol", v.attract_tol, "attraction distance tolerance");
  verify->add_option("--steer-targets", v.steer_targets, "steer smoke targets");
  verify->add_option("--xi", v.steer_xi, "steer tolerance");
  verify->add_option("--shrink", v.shrink,
                     "scale the region before checking (negative control)");

  CLI::App* simulate = app.add_subcommand("simulate", "integrate a rate schedule");
  add_common(simulate);
  simulate->add_option("--rates", rates_s, "constant rates k1,k2,k3,k4");
  simulate->add_option("--pattern", pattern_s, "corner pattern A|B|C|D");
  simulate->add_option("--random", random_n, "random schedule with N switches");
  simulate->add_option("--schedule", schedule_file, "schedule JSON file");
  simulate->add_option("--start", start_s, "initial point x,y");
  simulate->add_option("-T,--t-final", t_final, "final time");
  simulate->add_option("--csv", sim_out, "output CSV path (default stdout)");

  CLI::App* steer_cmd = app.add_subcommand("steer", "construct a schedule reaching a target");
  add_common(steer_cmd);
  steer_cmd->add_option("--from", from_s, "start point x,y");
  steer_cmd->add_option("--to", to_s, "target point x,y");
  steer_cmd->add_option("--xi", xi, "target tolerance");

  CLI11_PARSE(app, argc, argv);

  try {
    if (classify->parsed()) return cmd_classify(o);
    if (build->parsed()) return cmd_build(o, eps_list, formats, log_log);
    if (verify->parsed()) return cmd_verify(o, v);
    if (simulate->parsed())
      return cmd_simulate(o, rates_s, pattern_s, random_n, schedule_file,
                          start_s, t_final, sim_out);
    if (steer_cmd->parsed()) return cmd_steer(o, from_s, to_s, xi);
  } catch (const error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 70;
  }
  return 0;
}
