#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "minreg/integrate.hpp"

namespace minreg {

/// Bookkeeping for one boundary piece: the extremal-rate trajectory that
/// produced it and where it landed in the assembled polygon.
struct side_provenance {
  std::string name;         // trajectory direction, e.g. "D->A"
  vec2 start, target;       // in time order
  rate_vector rates;
  bool reversed = false;    // boundary path runs against trajectory time
  std::size_t v_begin = 0;  // [v_begin, v_end) vertex range in the boundary
  std::size_t v_end = 0;
  int shared_reaction = 0;  // reaction whose band arc spans this side's lobe
  int shared_sigma = 0;     // +1 when that arc is the lower curve
};

struct region {
  std::vector<vec2> boundary;  // simple, counterclockwise, front() == back()
  case_label label;
  double eps_value = 0.0;
  corner_set corners;
  std::map<std::string, vec2> special;  // boundary special points: E, F, M...
  std::vector<side_provenance> sides;
  /// True while the boundary is the as-built trajectory polyline, so side
  /// tangents may be taken from the provenance rate patterns. Transformed
  /// copies (negative controls) clear it.
  bool analytic_sides = true;

  std::size_t edge_count() const {
    return boundary.empty() ? 0 : boundary.size() - 1;
  }

  double diameter() const {
    vec2 lo{1e300, 1e300}, hi{-1e300, -1e300};
    for (const vec2& p : boundary) {
      lo.x = std::min(lo.x, p.x);
      lo.y = std::min(lo.y, p.y);
      hi.x = std::max(hi.x, p.x);
      hi.y = std::max(hi.y, p.y);
    }
    return norm(hi - lo);
  }

  /// Area centroid (vertex means would be skewed by sampling density).
  vec2 centroid() const {
    double a2 = 0;
    vec2 s{0, 0};
    for (std::size_t i = 0; i + 1 < boundary.size(); ++i) {
      double c = cross(boundary[i], boundary[i + 1]);
      a2 += c;
      s = s + c * (boundary[i] + boundary[i + 1]);
    }
    if (a2 == 0.0) return boundary.front();
    return s / (3.0 * a2);
  }
};

inline double signed_area(const std::vector<vec2>& closed) {
  double a = 0;
  for (std::size_t i = 0; i + 1 < closed.size(); ++i)
    a += cross(closed[i], closed[i + 1]);
  return 0.5 * a;
}

/// Proper (interior-parameter) segment intersection.
inline std::optional<std::pair<double, double>> segment_intersection(
    vec2 a0, vec2 a1, vec2 b0, vec2 b1, double transversality = 1e-12) {
  vec2 da = a1 - a0, db = b1 - b0;
  double den = cross(da, db);
  if (std::abs(den) <= transversality * norm(da) * norm(db))
    return std::nullopt;
  vec2 w = b0 - a0;
  double s = cross(w, db) / den;
  double t = cross(w, da) / den;
  if (s < 0.0 || s > 1.0 || t < 0.0 || t > 1.0) return std::nullopt;
  return std::make_pair(s, t);
}

enum class location { inside, outside, boundary };

/// Row-bucketed edge index: winding numbers in O(edges crossing the query
/// row) and distances via a strided scan refined around the best windows.
class region_query {
 public:
  explicit region_query(const region& r) : r_(&r) {
    const auto& b = r.boundary;
    require(b.size() >= 4, errc::region_invalid, "boundary too short");
    ylo_ = yhi_ = b[0].y;
    for (const vec2& p : b) {
      ylo_ = std::min(ylo_, p.y);
      yhi_ = std::max(yhi_, p.y);
    }
    nrows_ = static_cast<int>(std::clamp<std::size_t>(r.edge_count(), 16, 4096));
    rows_.assign(nrows_, {});
    double span = std::max(yhi_ - ylo_, 1e-300);
    inv_dy_ = nrows_ / span;
    for (std::size_t e = 0; e + 1 < b.size(); ++e) {
      double y0 = std::min(b[e].y, b[e + 1].y);
      double y1 = std::max(b[e].y, b[e + 1].y);
      int r0 = row_of(y0), r1 = row_of(y1);
      for (int row = r0; row <= r1; ++row) rows_[row].push_back(static_cast<int>(e));
    }
    diam_ = r.diameter();
  }

  double diameter() const { return diam_; }

  bool inside(vec2 p) const {
    if (p.y < ylo_ || p.y > yhi_) return false;
    const auto& b = r_->boundary;
    int wn = 0;
    for (int e : rows_[row_of(p.y)]) {
      vec2 a = b[e], c = b[e + 1];
      if (a.y <= p.y) {
        if (c.y > p.y && cross(c - a, p - a) > 0) ++wn;
      } else {
        if (c.y <= p.y && cross(c - a, p - a) < 0) --wn;
      }
    }
    return wn != 0;
  }

  double boundary_distance(vec2 p) const {
    const auto& b = r_->boundary;
    std::size_t n = b.size() - 1;
    std::size_t stride = std::max<std::size_t>(1, n / 256);
    // Best two strided anchors, then exact segment distances around each.
    std::size_t i1 = 0, i2 = 0;
    double d1 = 1e300, d2 = 1e300;
    for (std::size_t i = 0; i < n; i += stride) {
      double d = norm(b[i] - p);
      if (d < d1) {
        d2 = d1;
        i2 = i1;
        d1 = d;
        i1 = i;
      } else if (d < d2) {
        d2 = d;
        i2 = i;
      }
    }
    double best = 1e300;
    auto scan = [&](std::size_t center) {
      std::size_t w = stride + 2;
      std::size_t from = center >= w ? center - w : 0;
      std::size_t to = std::min(n, center + w);
      for (std::size_t e = from; e < to; ++e)
        best = std::min(best, seg_dist(b[e], b[e + 1], p));
    };
    scan(i1);
    if (i2 != i1) scan(i2);
    return best;
  }

  location locate(vec2 p, double band_rel = 1e-9) const {
    if (boundary_distance(p) <= band_rel * diam_) return location::boundary;
    return inside(p) ? location::inside : location::outside;
  }

  /// Membership in the region dilated by an absolute margin.
  bool inside_dilated(vec2 p, double margin) const {
    if (inside(p)) return true;
    return boundary_distance(p) <= margin;
  }

 private:
  int row_of(double y) const {
    int r = static_cast<int>((y - ylo_) * inv_dy_);
    return std::clamp(r, 0, nrows_ - 1);
  }
  static double seg_dist(vec2 a, vec2 c, vec2 p) {
    vec2 d = c - a;
    double len2 = dot(d, d);
    double t = len2 > 0 ? std::clamp(dot(p - a, d) / len2, 0.0, 1.0) : 0.0;
    return norm(a + t * d - p);
  }

  const region* r_;
  double ylo_ = 0, yhi_ = 0, inv_dy_ = 0, diam_ = 0;
  int nrows_ = 0;
  std::vector<std::vector<int>> rows_;
};

inline location contains(const region& r, vec2 pt, double band_rel = 1e-9) {
  return region_query(r).locate(pt, band_rel);
}

/// No two non-adjacent edges may cross.
inline bool is_simple(const region& r) {
  const auto& b = r.boundary;
  std::size_t n = r.edge_count();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 2; j < n; ++j) {
      if (i == 0 && j == n - 1) continue;  // closing adjacency
      double xi0 = std::min(b[i].x, b[i + 1].x), xi1 = std::max(b[i].x, b[i + 1].x);
      double xj0 = std::min(b[j].x, b[j + 1].x), xj1 = std::max(b[j].x, b[j + 1].x);
      if (xi1 < xj0 || xj1 < xi0) continue;
      double yi0 = std::min(b[i].y, b[i + 1].y), yi1 = std::max(b[i].y, b[i + 1].y);
      double yj0 = std::min(b[j].y, b[j + 1].y), yj1 = std::max(b[j].y, b[j + 1].y);
      if (yi1 < yj0 || yj1 < yi0) continue;
      if (segment_intersection(b[i], b[i + 1], b[j], b[j + 1]))
        return false;
    }
  }
  return true;
}

/// Uniform scaling in log coordinates about the boundary's log mean; stays
/// inside the positive quadrant for any factor. Used for dilation controls.
inline region log_scaled_copy(const region& r, double factor) {
  region out = r;
  vec2 c{0, 0};
  for (std::size_t i = 0; i + 1 < r.boundary.size(); ++i)
    c = c + vec2{std::log(r.boundary[i].x), std::log(r.boundary[i].y)};
  c = c / static_cast<double>(r.boundary.size() - 1);
  auto map = [&](vec2 p) {
    return vec2{std::exp(c.x + factor * (std::log(p.x) - c.x)),
                std::exp(c.y + factor * (std::log(p.y) - c.y))};
  };
  for (vec2& p : out.boundary) p = map(p);
  for (auto& [name, p] : out.special) p = map(p);
  for (auto& cr : out.corners.corners) cr.pos = map(cr.pos);
  for (auto& s : out.sides) {
    s.start = map(s.start);
    s.target = map(s.target);
  }
  out.analytic_sides = false;
  return out;
}

/// Uniform scaling about the centroid; used as a negative control. The
/// result no longer consists of trajectories, so analytic tangents are off.
inline region scaled_copy(const region& r, double factor) {
  region out = r;
  vec2 c = r.centroid();
  for (vec2& p : out.boundary) p = c + factor * (p - c);
  for (auto& [name, p] : out.special) p = c + factor * (p - c);
  for (auto& cr : out.corners.corners) cr.pos = c + factor * (cr.pos - c);
  for (auto& s : out.sides) {
    s.start = c + factor * (s.start - c);
    s.target = c + factor * (s.target - c);
  }
  out.analytic_sides = false;
  return out;
}

struct region_build_config {
  integrator_config integ;
  /// Emitted-sample spacing: boundary diameter / resolution, tightened by
  /// the relative cap so small-scale arcs stay resolved.
  double resolution = 2000;
  double h_out_rel = 0.005;
  /// Per-sample band containment slack, in log-level units.
  double containment_log_tol = 1e-8;
};

/// First transversal crossing of two trajectory polylines sharing their end
/// regions, swept in arc order; returns the spliced outer path start ->
/// M -> start-of-second and the splice point. Crossings at the shared
/// endpoints are ignored; fully coincident inputs degenerate to the first
/// polyline.
inline std::pair<std::vector<vec2>, vec2> outer_union(
    const std::vector<vec2>& t1, const std::vector<vec2>& t2) {
  require(t1.size() >= 2 && t2.size() >= 2, errc::malformed_input,
          "outer_union needs polylines");
  double scale = std::max({norm(t1.front() - t1.back()),
                           norm(t2.front() - t2.back()), 1e-300});
  double endpoint_guard = 1e-6 * scale;

  for (std::size_t i = 0; i + 1 < t1.size(); ++i) {
    double xi0 = std::min(t1[i].x, t1[i + 1].x), xi1 = std::max(t1[i].x, t1[i + 1].x);
    double yi0 = std::min(t1[i].y, t1[i + 1].y), yi1 = std::max(t1[i].y, t1[i + 1].y);
    for (std::size_t j = 0; j + 1 < t2.size(); ++j) {
      if (std::min(t2[j].x, t2[j + 1].x) > xi1 || std::max(t2[j].x, t2[j + 1].x) < xi0 ||
          std::min(t2[j].y, t2[j + 1].y) > yi1 || std::max(t2[j].y, t2[j + 1].y) < yi0)
        continue;
      auto hit = segment_intersection(t1[i], t1[i + 1], t2[j], t2[j + 1], 1e-9);
      if (!hit) continue;
      vec2 m = t1[i] + hit->first * (t1[i + 1] - t1[i]);
      if (norm(m - t1.front()) < endpoint_guard ||
          norm(m - t1.back()) < endpoint_guard)
        continue;
      std::vector<vec2> path;
      auto push = [&path](vec2 p) {
        if (path.empty() || !(path.back() == p)) path.push_back(p);
      };
      for (std::size_t q = 0; q <= i; ++q) push(t1[q]);
      push(m);
      for (std::size_t q = j + 1; q-- > 0;) push(t2[q]);
      return {path, m};
    }
  }

  // Coincident-curve degeneracy: the reversed copy retraces the first.
  vec2 mid = t2[t2.size() / 2];
  double dmid = 1e300;
  for (std::size_t i = 0; i + 1 < t1.size(); ++i) {
    vec2 d = t1[i + 1] - t1[i];
    double len2 = dot(d, d);
    double t = len2 > 0 ? std::clamp(dot(mid - t1[i], d) / len2, 0.0, 1.0) : 0.0;
    dmid = std::min(dmid, norm(t1[i] + t * d - mid));
  }
  if (norm(t1.front() - t2.back()) < endpoint_guard &&
      norm(t1.back() - t2.front()) < endpoint_guard && dmid < endpoint_guard)
    return {t1, t1.back()};

  fail(errc::non_intersecting_trajectories,
       "no transversal crossing between the paired trajectories");
}

namespace detail {

struct ring_edge {
  const corner* p;
  const corner* q;
  int shared_reaction;
  int shared_sigma;
};

inline std::array<ring_edge, 4> corner_ring(const corner_set& cs) {
  // Level-pair adjacency: A-B and C-D share reaction 2's curve, B-C and
  // D-A share reaction 1's.
  std::array<ring_edge, 4> ring{{
      {&cs.at(corner_id::A), &cs.at(corner_id::B), 2, -1},
      {&cs.at(corner_id::B), &cs.at(corner_id::C), 1, -1},
      {&cs.at(corner_id::C), &cs.at(corner_id::D), 2, +1},
      {&cs.at(corner_id::D), &cs.at(corner_id::A), 1, +1},
  }};
  double area2 = 0;
  for (const auto& e : ring) area2 += cross(e.p->pos, e.q->pos);
  if (area2 < 0) {
    std::array<ring_edge, 4> rev{{
        {ring[3].q, ring[3].p, ring[3].shared_reaction, ring[3].shared_sigma},
        {ring[2].q, ring[2].p, ring[2].shared_reaction, ring[2].shared_sigma},
        {ring[1].q, ring[1].p, ring[1].shared_reaction, ring[1].shared_sigma},
        {ring[0].q, ring[0].p, ring[0].shared_reaction, ring[0].shared_sigma},
    }};
    return rev;
  }
  return ring;
}

/// Tangency point on the band arc of the given edge (the arc joining two
/// sink corners), where the arc tangent matches the other reaction's
/// attracting direction.
inline vec2 arc_special_point(const reaction_pair& rp, const epsilon_t& eps,
                              const ring_edge& e) {
  int j = e.shared_reaction, other = 3 - j;
  double log_c = -e.shared_sigma * eps.log_band();
  auto pt = solve_tangent_point(rp.vector(j), log_c, attracting_slope(rp, other));
  require(pt.has_value(), errc::epsilon_too_large,
          "no tangency direction on the sink-sink arc");
  double l = log_curve_level(rp, other, *pt);
  require(std::abs(l) < eps.log_band() * (1.0 - 1e-12), errc::epsilon_too_large,
          "sink-sink arc tangency lies outside the arc at this epsilon");
  return *pt;
}

}  // namespace detail

/// Assemble the boundary of the minimal invariant / globally attracting
/// region from extremal-rate trajectories. Each side of the corner ring is
/// built from its corner classification: a source-to-sink side is the
/// trajectory from the source under the sink's detailed-balance extremal
/// rates; a source-source side is the outer union of the two opposing
/// trajectories spliced at their crossing; a sink-sink side starts both its
/// trajectories at the arc tangency point.
inline region build_region(const reaction_pair& rp, const epsilon_t& eps,
                           const region_build_config& cfg = {}) {
  region reg;
  reg.label = classify_case(rp);
  reg.eps_value = eps.value();
  reg.corners = corner_points(rp, eps);

  std::optional<ef_points> ef;
  if (reg.label.mixed_slopes()) {
    ef = special_points(rp, eps);  // EpsilonTooLarge when unbuildable
  } else {
    int sources = 0;
    for (const auto& c : reg.corners.corners) sources += c.source ? 1 : 0;
    require(sources == 2, errc::internal,
            "expected two source corners in the single-signature cases");
  }

  auto ring = detail::corner_ring(reg.corners);
  int sink_sink_arcs = 0;
  for (const auto& e : ring)
    if (!e.p->source && !e.q->source) ++sink_sink_arcs;

  double diam = 0;
  for (const auto& a : reg.corners.corners)
    for (const auto& b : reg.corners.corners)
      diam = std::max(diam, norm(a.pos - b.pos));
  if (ef) diam = std::max(diam, norm(ef->E - reg.corners.at(corner_id::A).pos));

  integrator_config icfg = cfg.integ;
  icfg.h_out = diam / cfg.resolution;
  icfg.h_out_rel = cfg.h_out_rel;

  auto run_side = [&](vec2 from, vec2 to, const rate_vector& pattern,
                      const std::string& name) {
    auto conv = make_converge_spec(rp, pattern, to, icfg.tol_conv);
    trajectory tr = integrate(rp, pattern, from, icfg, {}, conv);
    require(tr.reason == stop_reason::converged, errc::trajectory_escaped,
            "side trajectory " + name + " ended with " +
                std::string(to_string(tr.reason)) + " instead of converging");
    tr.pts.back() = to;  // snap the converged endpoint onto the attractor
    return tr;
  };

  struct piece {
    std::vector<vec2> pts;  // oriented along the boundary walk
    side_provenance prov;   // v_begin/v_end filled at assembly
  };
  std::vector<piece> pieces;
  auto corner_name = [](const corner& c) { return std::string(to_string(c.id)); };

  int splices = 0;
  for (const auto& e : ring) {
    const corner &P = *e.p, &Q = *e.q;
    side_provenance prov;
    prov.shared_reaction = e.shared_reaction;
    prov.shared_sigma = e.shared_sigma;

    if (P.source && !Q.source) {
      prov.name = corner_name(P) + "->" + corner_name(Q);
      prov.start = P.pos;
      prov.target = Q.pos;
      prov.rates = Q.pattern(eps);
      prov.reversed = false;
      pieces.push_back({run_side(P.pos, Q.pos, prov.rates, prov.name).pts,
                        prov});
    } else if (!P.source && Q.source) {
      prov.name = corner_name(Q) + "->" + corner_name(P);
      prov.start = Q.pos;
      prov.target = P.pos;
      prov.rates = P.pattern(eps);
      prov.reversed = true;
      auto tr = run_side(Q.pos, P.pos, prov.rates, prov.name);
      std::vector<vec2> path(tr.pts.rbegin(), tr.pts.rend());
      pieces.push_back({std::move(path), prov});
    } else if (P.source && Q.source) {
      // Two source corners share this arc: splice the opposing trajectories
      // at their crossing. When they do not cross, one encloses the other
      // and the outer union degenerates to the outer trajectory alone.
      auto t_pq = run_side(P.pos, Q.pos, Q.pattern(eps),
                           corner_name(P) + "->" + corner_name(Q));
      auto t_qp = run_side(Q.pos, P.pos, P.pattern(eps),
                           corner_name(Q) + "->" + corner_name(P));
      side_provenance first = prov, second = prov;
      first.name = corner_name(P) + "->" + corner_name(Q);
      first.start = P.pos;
      first.target = Q.pos;
      first.rates = Q.pattern(eps);
      first.reversed = false;
      second.name = corner_name(Q) + "->" + corner_name(P);
      second.start = Q.pos;
      second.target = P.pos;
      second.rates = P.pattern(eps);
      second.reversed = true;
      try {
        auto [path, m] = outer_union(t_pq.pts, t_qp.pts);
        std::string key = splices == 0 ? "M" : "M" + std::to_string(splices + 1);
        ++splices;
        reg.special[key] = m;
        std::size_t m_at = path.size();
        for (std::size_t i = 0; i < path.size(); ++i)
          if (path[i] == m) {
            m_at = i;
            break;
          }
        require(m_at < path.size(), errc::internal, "splice vertex missing");
        piece p1{{path.begin(), path.begin() + static_cast<long>(m_at) + 1}, first};
        piece p2{{path.begin() + static_cast<long>(m_at), path.end()}, second};
        pieces.push_back(std::move(p1));
        pieces.push_back(std::move(p2));
      } catch (const error& e) {
        if (e.code() != errc::non_intersecting_trajectories) throw;
        vec2 chord = unit(Q.pos - P.pos);
        vec2 center = 0.25 * (reg.corners.corners[0].pos +
                              reg.corners.corners[1].pos +
                              reg.corners.corners[2].pos +
                              reg.corners.corners[3].pos);
        double lobe_sign = cross(chord, center - P.pos) < 0 ? 1.0 : -1.0;
        auto excursion = [&](const std::vector<vec2>& pts) {
          double best = -1e300;
          for (const vec2& p : pts)
            best = std::max(best, lobe_sign * cross(chord, p - P.pos));
          return best;
        };
        if (excursion(t_pq.pts) >= excursion(t_qp.pts)) {
          pieces.push_back({std::move(t_pq.pts), first});
        } else {
          std::vector<vec2> path(t_qp.pts.rbegin(), t_qp.pts.rend());
          pieces.push_back({std::move(path), second});
        }
      }
    } else {
      // Two sink corners: both boundary trajectories leave the arc tangency.
      vec2 s = detail::arc_special_point(rp, eps, e);
      // Name the vertex after whichever computed special point it realizes;
      // away from the canonical small-epsilon corner pattern the tangency
      // can sit on a different arc than the role formulas assume.
      std::string key = "E";
      if (sink_sink_arcs > 1) {
        pq_normalization n = normalize_pq(rp);
        int norm_idx = n.swapped ? 3 - e.shared_reaction : e.shared_reaction;
        key = norm_idx == 2 ? "E" : "F";
      }
      if (ef) {
        auto matches = [&](vec2 ref) {
          return nearly_equal(norm(s - ref), 0.0, 1e-9 * (1 + norm(ref)));
        };
        if (matches(ef->E))
          key = "E";
        else if (matches(ef->F))
          key = "F";
      }
      if (reg.special.count(key)) key = key == "E" ? "F" : "E";
      reg.special[key] = s;
      auto t_p = run_side(s, P.pos, P.pattern(eps),
                          key + "->" + corner_name(P));
      auto t_q = run_side(s, Q.pos, Q.pattern(eps),
                          key + "->" + corner_name(Q));
      side_provenance into_p = prov, out_q = prov;
      into_p.name = key + "->" + corner_name(P);
      into_p.start = s;
      into_p.target = P.pos;
      into_p.rates = P.pattern(eps);
      into_p.reversed = true;
      out_q.name = key + "->" + corner_name(Q);
      out_q.start = s;
      out_q.target = Q.pos;
      out_q.rates = Q.pattern(eps);
      out_q.reversed = false;
      piece p1{{t_p.pts.rbegin(), t_p.pts.rend()}, into_p};
      piece p2{std::move(t_q.pts), out_q};
      pieces.push_back(std::move(p1));
      pieces.push_back(std::move(p2));
    }
  }

  // Stitch the walk into one closed polygon.
  for (auto& pc : pieces) {
    std::size_t skip = reg.boundary.empty() ? 0 : 1;  // joint vertex dedupe
    pc.prov.v_begin = reg.boundary.size() - (reg.boundary.empty() ? 0 : 1);
    reg.boundary.insert(reg.boundary.end(), pc.pts.begin() + skip, pc.pts.end());
    pc.prov.v_end = reg.boundary.size();
    reg.sides.push_back(pc.prov);
  }
  require(!reg.boundary.empty(), errc::internal, "empty boundary");
  if (!(reg.boundary.back() == reg.boundary.front()))
    reg.boundary.push_back(reg.boundary.front());
  require(signed_area(reg.boundary) > 0, errc::internal,
          "assembled boundary is not counterclockwise");

  // Every sample must keep at least one reaction level inside its band.
  // The confinement is provable only in the single-signature cases; the
  // mixed-slope outer-union trajectories can legitimately leave both bands,
  // so there a violation is not an error.
  double lb = eps.log_band();
  double tol = cfg.containment_log_tol * std::max(1.0, lb);
  for (const vec2& p : reg.boundary) {
    double l1 = std::abs(log_curve_level(rp, 1, p));
    double l2 = std::abs(log_curve_level(rp, 2, p));
    if (!reg.label.mixed_slopes())
      require(l1 <= lb + tol || l2 <= lb + tol, errc::trajectory_escaped,
              "boundary sample left the union of uncertainty regions");
  }
  return reg;
}

}  // namespace minreg
