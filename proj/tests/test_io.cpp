#include <catch2/catch_amalgamated.hpp>

#include "minreg/io.hpp"

using namespace minreg;

TEST_CASE("region JSON round-trips exactly") {
  auto rp = example_network();
  region r = build_region(rp, epsilon_t(0.5));
  ordered_json j1 = region_to_json(r, rp, {{"note", "test"}}, 42);
  region r2 = region_from_json(j1);
  ordered_json j2 = region_to_json(r2, rp, {{"note", "test"}}, 42);
  CHECK(j1.dump() == j2.dump());
  CHECK(r2.boundary.size() == r.boundary.size());
  CHECK(r2.sides.size() == r.sides.size());
  CHECK(r2.label.id == r.label.id);
  CHECK(r2.corners.at(corner_id::B).source == r.corners.at(corner_id::B).source);
}

TEST_CASE("network JSON embeds in the region file and parses back") {
  auto rp = case_v_network();
  region r = build_region(rp, epsilon_t(0.05));
  ordered_json j = region_to_json(r, rp, {}, 1);
  network_input in = parse_network(j["network"].dump());
  CHECK(in.rp.v1 == rp.v1);
  CHECK(in.rp.v2 == rp.v2);
  CHECK(in.eps.value() == 0.05);
  CHECK(j["special"].contains("E"));
}

TEST_CASE("boundary CSV has one vertex per line") {
  auto rp = example_network();
  region r = build_region(rp, epsilon_t(0.5));
  std::string csv = region_to_csv(r);
  std::size_t lines = std::count(csv.begin(), csv.end(), '\n');
  CHECK(lines == r.boundary.size() + 1);  // header plus vertices
  CHECK(csv.rfind("x,y\n", 0) == 0);
}

TEST_CASE("SVG export contains bands, boundary and markers") {
  auto rp = example_network();
  region r = build_region(rp, epsilon_t(0.5));
  std::string svg = region_to_svg(r, rp);
  CHECK(svg.find("<svg") != std::string::npos);
  CHECK(svg.find("</svg>") != std::string::npos);
  CHECK(std::count(svg.begin(), svg.end(), 'c') > 0);
  CHECK(svg.find("fill-opacity") != std::string::npos);  // translucent bands
  CHECK(svg.find(">A</text>") != std::string::npos);     // corner label

  svg_options log_opts;
  log_opts.log_log = true;
  std::string svg_log = region_to_svg(r, rp, log_opts);
  CHECK(svg_log.find("log-log") != std::string::npos);
}

TEST_CASE("schedules round-trip through JSON") {
  rate_schedule s;
  s.eps_value = 0.5;
  s.t_switch = {0.0, 1.5, 3.25};
  s.rates = {{0.5, 2, 1, 1}, {2, 0.5, 0.5, 2}, {1, 1, 1, 1}};
  ordered_json j = schedule_to_json(s);
  rate_schedule s2 = schedule_from_json(j, 0.5);
  CHECK(schedule_to_json(s2).dump() == j.dump());
  CHECK(s2.t_switch == s.t_switch);
}

TEST_CASE("trajectory CSV carries the active rates per row") {
  auto rp = example_network();
  rate_schedule s;
  s.eps_value = 0.5;
  s.t_switch = {0.0, 1.0};
  s.rates = {{1, 1, 1, 1}, {0.5, 2, 2, 0.5}};
  integrator_config cfg;
  cfg.t_max = 2.0;
  trajectory tr = integrate_schedule(rp, s, {2, 2}, cfg);
  std::string csv = trajectory_to_csv(tr, s);
  CHECK(csv.rfind("t,x,y,k1,k2,k3,k4\n", 0) == 0);
  CHECK(csv.find(",0.5,2,2,0.5\n") != std::string::npos);
  std::size_t rows = std::count(csv.begin(), csv.end(), '\n') - 1;
  CHECK(rows == tr.t.size());
}

TEST_CASE("report JSONL is one object per line") {
  verification_report rep;
  rep.check = "demo";
  rep.pass = true;
  rep.margin = 0.5;
  rep.seed = 9;
  rep.config = {{"n", 3}};
  std::string line = reports_to_jsonl({rep, rep});
  CHECK(std::count(line.begin(), line.end(), '\n') == 2);
  auto parsed = nlohmann::json::parse(line.substr(0, line.find('\n')));
  CHECK(parsed["check"] == "demo");
  CHECK(parsed["pass"] == true);
}
