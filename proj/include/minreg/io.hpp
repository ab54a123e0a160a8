#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "minreg/verify.hpp"

#include "json.hpp"

namespace minreg {

using ordered_json = nlohmann::ordered_json;

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), errc::malformed_input, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  require(out.good(), errc::malformed_input, "cannot write " + path);
  out << text;
}

inline network_input read_network_file(const std::string& path) {
  return parse_network(read_text_file(path));
}

inline ordered_json network_to_json(const reaction_pair& rp, double eps) {
  ordered_json j;
  j["reactions"] = ordered_json::array();
  for (int i = 1; i <= 2; ++i) {
    ordered_json r;
    r["reactant"] = {rp.reactant(i).x, rp.reactant(i).y};
    r["product"] = {rp.product(i).x, rp.product(i).y};
    j["reactions"].push_back(r);
  }
  j["epsilon"] = eps;
  return j;
}

// ---------------------------------------------------------------------------
// Region

inline ordered_json region_to_json(const region& r, const reaction_pair& rp,
                                   const ordered_json& config_echo = {},
                                   std::uint64_t seed = 0) {
  ordered_json j;
  j["version"] = kVersion;
  j["case"] = to_string(r.label.id);
  if (r.label.sub != subcase_id::none) j["subcase"] = to_string(r.label.sub);
  j["epsilon"] = r.eps_value;
  j["seed"] = seed;
  j["network"] = network_to_json(rp, r.eps_value);
  if (!config_echo.is_null()) j["config"] = config_echo;

  ordered_json corners;
  for (const auto& c : r.corners.corners) {
    corners[to_string(c.id)] = {c.pos.x, c.pos.y};
    corners[std::string(to_string(c.id)) + "_role"] =
        c.source ? "source" : "sink";
  }
  j["corners"] = corners;

  ordered_json special;
  for (const auto& [name, p] : r.special) special[name] = {p.x, p.y};
  j["special"] = special;

  ordered_json boundary = ordered_json::array();
  for (const vec2& p : r.boundary) boundary.push_back({p.x, p.y});
  j["boundary"] = boundary;

  ordered_json prov = ordered_json::array();
  for (const auto& s : r.sides) {
    ordered_json e;
    e["side"] = s.name;
    e["start"] = {s.start.x, s.start.y};
    e["target"] = {s.target.x, s.target.y};
    e["rates"] = {s.rates.k1, s.rates.k2, s.rates.k3, s.rates.k4};
    e["reversed"] = s.reversed;
    e["vertex_range"] = {s.v_begin, s.v_end};
    e["arc_reaction"] = s.shared_reaction;
    e["arc_sigma"] = s.shared_sigma;
    prov.push_back(e);
  }
  j["provenance"] = prov;
  j["analytic_sides"] = r.analytic_sides;
  return j;
}

inline region region_from_json(const ordered_json& j) {
  region r;
  std::string case_s = j.at("case").get<std::string>();
  const char* names[] = {"I", "II", "III", "IV", "V", "VI"};
  for (int i = 0; i < 6; ++i)
    if (case_s == names[i]) r.label.id = static_cast<case_id>(i + 1);
  if (j.contains("subcase")) {
    std::string s = j["subcase"].get<std::string>();
    r.label.sub = s == "a" ? subcase_id::a
                           : s == "b" ? subcase_id::b : subcase_id::c;
  }
  r.eps_value = j.at("epsilon").get<double>();

  const auto& corners = j.at("corners");
  for (int i = 0; i < 4; ++i) {
    corner& c = r.corners.corners[i];
    c.id = static_cast<corner_id>(i);
    auto arr = corners.at(to_string(c.id));
    c.pos = {arr[0].get<double>(), arr[1].get<double>()};
    static constexpr int sig[4][2] = {{+1, -1}, {-1, -1}, {-1, +1}, {+1, +1}};
    c.sigma1 = sig[i][0];
    c.sigma2 = sig[i][1];
    c.source =
        corners.at(std::string(to_string(c.id)) + "_role").get<std::string>() ==
        "source";
  }
  for (auto it = j.at("special").begin(); it != j.at("special").end(); ++it)
    r.special[it.key()] = {it.value()[0].get<double>(),
                           it.value()[1].get<double>()};
  for (const auto& p : j.at("boundary"))
    r.boundary.push_back({p[0].get<double>(), p[1].get<double>()});
  for (const auto& e : j.at("provenance")) {
    side_provenance s;
    s.name = e.at("side").get<std::string>();
    s.start = {e.at("start")[0].get<double>(), e.at("start")[1].get<double>()};
    s.target = {e.at("target")[0].get<double>(), e.at("target")[1].get<double>()};
    s.rates = {e.at("rates")[0].get<double>(), e.at("rates")[1].get<double>(),
               e.at("rates")[2].get<double>(), e.at("rates")[3].get<double>()};
    s.reversed = e.at("reversed").get<bool>();
    s.v_begin = e.at("vertex_range")[0].get<std::size_t>();
    s.v_end = e.at("vertex_range")[1].get<std::size_t>();
    s.shared_reaction = e.at("arc_reaction").get<int>();
    s.shared_sigma = e.at("arc_sigma").get<int>();
    r.sides.push_back(s);
  }
  if (j.contains("analytic_sides"))
    r.analytic_sides = j["analytic_sides"].get<bool>();
  return r;
}

inline std::string region_to_csv(const region& r) {
  std::string out = "x,y\n";
  for (const vec2& p : r.boundary)
    out += format17(p.x) + "," + format17(p.y) + "\n";
  return out;
}

// ---------------------------------------------------------------------------
// SVG export

struct svg_options {
  bool log_log = false;
  int width = 900;
  int height = 900;
};

namespace detail {

struct svg_mapper {
  bool log_log;
  double xlo, xhi, ylo, yhi;
  int w, h;

  double tx(double x) const {
    double v = log_log ? std::log(x) : x;
    return (v - xlo) / (xhi - xlo) * (w - 80) + 40;
  }
  double ty(double y) const {
    double v = log_log ? std::log(y) : y;
    return h - 40 - (v - ylo) / (yhi - ylo) * (h - 80);
  }
};

inline std::string svg_path(const std::vector<vec2>& pts,
                            const svg_mapper& m) {
  std::string d;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    d += i == 0 ? "M" : "L";
    d += format17(m.tx(pts[i].x)) + " " + format17(m.ty(pts[i].y)) + " ";
  }
  return d;
}

}  // namespace detail

/// Boundary plus the two uncertainty bands (translucent), corner and special
/// point markers, and a provenance legend.
inline std::string region_to_svg(const region& r, const reaction_pair& rp,
                                 const svg_options& opts = {}) {
  vec2 lo{1e300, 1e300}, hi{-1e300, -1e300};
  for (const vec2& p : r.boundary) {
    lo.x = std::min(lo.x, p.x);
    lo.y = std::min(lo.y, p.y);
    hi.x = std::max(hi.x, p.x);
    hi.y = std::max(hi.y, p.y);
  }
  detail::svg_mapper m;
  m.log_log = opts.log_log;
  m.w = opts.width;
  m.h = opts.height;
  auto span = [&](double a, double b, double& out_lo, double& out_hi) {
    if (opts.log_log) {
      double pad = 0.15 * (std::log(b) - std::log(a)) + 0.1;
      out_lo = std::log(a) - pad;
      out_hi = std::log(b) + pad;
    } else {
      double pad = 0.08 * (b - a) + 1e-12;
      out_lo = a - pad;
      out_hi = b + pad;
    }
  };
  span(lo.x, hi.x, m.xlo, m.xhi);
  span(lo.y, hi.y, m.ylo, m.yhi);

  double vxlo = opts.log_log ? std::exp(m.xlo) : std::max(m.xlo, 1e-12);
  double vxhi = opts.log_log ? std::exp(m.xhi) : m.xhi;

  epsilon_t eps(r.eps_value);
  auto band_polygon = [&](int reaction) {
    vec2 e = rp.vector(reaction);
    auto curve = [&](double log_c) {
      std::vector<vec2> pts;
      for (int i = 0; i <= 256; ++i) {
        double t = static_cast<double>(i) / 256;
        double x = std::exp(std::log(vxlo) + t * (std::log(vxhi / vxlo)));
        double y = std::exp((log_c - e.x * std::log(x)) / e.y);
        pts.push_back({x, y});
      }
      return pts;
    };
    std::vector<vec2> poly = curve(-eps.log_band());
    std::vector<vec2> upper = curve(eps.log_band());
    poly.insert(poly.end(), upper.rbegin(), upper.rend());
    return poly;
  };

  std::string s;
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
       std::to_string(opts.width) + "\" height=\"" + std::to_string(opts.height) +
       "\" viewBox=\"0 0 " + std::to_string(opts.width) + " " +
       std::to_string(opts.height) + "\">\n";
  s += "<defs><clipPath id=\"frame\"><rect x=\"40\" y=\"40\" width=\"" +
       std::to_string(opts.width - 80) + "\" height=\"" +
       std::to_string(opts.height - 80) + "\"/></clipPath></defs>\n";
  s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  const char* band_fill[2] = {"#1f77b4", "#d62728"};
  for (int reaction = 1; reaction <= 2; ++reaction) {
    s += "<path clip-path=\"url(#frame)\" d=\"" +
         detail::svg_path(band_polygon(reaction), m) + "Z\" fill=\"" +
         band_fill[reaction - 1] + "\" fill-opacity=\"0.15\" stroke=\"none\"/>\n";
  }

  s += "<path clip-path=\"url(#frame)\" d=\"" + detail::svg_path(r.boundary, m) +
       "\" fill=\"#2ca02c\" fill-opacity=\"0.10\" stroke=\"black\" "
       "stroke-width=\"1.5\"/>\n";

  for (const auto& c : r.corners.corners) {
    s += "<circle cx=\"" + format17(m.tx(c.pos.x)) + "\" cy=\"" +
         format17(m.ty(c.pos.y)) + "\" r=\"4\" fill=\"" +
         (c.source ? std::string("#ff7f0e") : std::string("#9467bd")) + "\"/>\n";
    s += "<text x=\"" + format17(m.tx(c.pos.x) + 6) + "\" y=\"" +
         format17(m.ty(c.pos.y) - 6) + "\" font-size=\"14\">" +
         to_string(c.id) + "</text>\n";
  }
  for (const auto& [name, p] : r.special) {
    s += "<rect x=\"" + format17(m.tx(p.x) - 3.5) + "\" y=\"" +
         format17(m.ty(p.y) - 3.5) +
         "\" width=\"7\" height=\"7\" fill=\"#17becf\"/>\n";
    s += "<text x=\"" + format17(m.tx(p.x) + 6) + "\" y=\"" +
         format17(m.ty(p.y) + 12) + "\" font-size=\"14\">" + name + "</text>\n";
  }

  double ly = 56;
  s += "<text x=\"48\" y=\"" + format17(ly) + "\" font-size=\"13\">case " +
       to_string(r.label.id) + to_string(r.label.sub) +
       ", epsilon = " + format17(r.eps_value) +
       (opts.log_log ? " (log-log)" : "") + "</text>\n";
  for (const auto& side : r.sides) {
    ly += 16;
    s += "<text x=\"48\" y=\"" + format17(ly) + "\" font-size=\"12\">" +
         side.name + "  k = [" + format17(side.rates.k1) + ", " +
         format17(side.rates.k2) + ", " + format17(side.rates.k3) + ", " +
         format17(side.rates.k4) + "]</text>\n";
  }
  s += "</svg>\n";
  return s;
}

// ---------------------------------------------------------------------------
// Schedules and trajectories

inline ordered_json schedule_to_json(const rate_schedule& s) {
  ordered_json j = ordered_json::array();
  for (std::size_t i = 0; i < s.rates.size(); ++i)
    j.push_back({{"t", s.t_switch[i]},
                 {"k", {s.rates[i].k1, s.rates[i].k2, s.rates[i].k3,
                        s.rates[i].k4}}});
  return j;
}

inline rate_schedule schedule_from_json(const ordered_json& j,
                                        double eps_value) {
  rate_schedule s;
  s.eps_value = eps_value;
  for (const auto& e : j) {
    s.t_switch.push_back(e.at("t").get<double>());
    s.rates.push_back({e.at("k")[0].get<double>(), e.at("k")[1].get<double>(),
                       e.at("k")[2].get<double>(), e.at("k")[3].get<double>()});
  }
  return s;
}

/// One row per emitted sample with the rates active at that time.
inline std::string trajectory_to_csv(const trajectory& tr,
                                     const rate_schedule& sched) {
  std::string out = "t,x,y,k1,k2,k3,k4\n";
  std::size_t seg = 0;
  for (std::size_t i = 0; i < tr.t.size(); ++i) {
    while (seg + 1 < sched.t_switch.size() &&
           tr.t[i] >= sched.t_switch[seg + 1])
      ++seg;
    const rate_vector& k = sched.rates[seg];
    out += format17(tr.t[i]) + "," + format17(tr.pts[i].x) + "," +
           format17(tr.pts[i].y) + "," + format17(k.k1) + "," +
           format17(k.k2) + "," + format17(k.k3) + "," + format17(k.k4) + "\n";
  }
  return out;
}

inline std::string reports_to_jsonl(
    const std::vector<verification_report>& reports) {
  std::string out;
  for (const auto& r : reports) out += r.to_json().dump() + "\n";
  return out;
}

}  // namespace minreg
