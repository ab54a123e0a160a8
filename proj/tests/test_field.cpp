#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "minreg/field.hpp"
#include "minreg/rng.hpp"

using namespace minreg;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {
reaction_pair from_vectors(vec2 v1, vec2 v2) {
  auto base = [](vec2 v) -> reaction {
    vec2 lo{std::max(0.0, -v.x), std::max(0.0, -v.y)};
    return {lo, lo + v};
  };
  return reaction_pair::create(base(v1), base(v2));
}
}  // namespace

TEST_CASE("field evaluation on the worked example") {
  auto rp = example_network();

  field_value f0 = eval_field(rp, {1, 1, 1, 1}, {1, 1});
  CHECK(f0.velocity == vec2{0, 0});

  field_value f1 = eval_field(rp, {2, 1, 1, 1}, {1, 1});
  CHECK(f1.flux1 == 1.0);
  CHECK(f1.flux2 == 0.0);
  CHECK(f1.velocity == vec2{2, -1});

  // Monomials evaluate through logs, so expect relative rounding here.
  field_value f2 = eval_field(rp, {1, 1, 1, 1}, {4, 1});
  CHECK_THAT(f2.flux1, WithinRel(-15.0, 1e-14));
  CHECK_THAT(f2.flux2, WithinRel(3.0, 1e-14));
  CHECK_THAT(f2.velocity.x, WithinRel(-33.0, 1e-14));
  CHECK_THAT(f2.velocity.y, WithinRel(21.0, 1e-14));

  CHECK_THROWS_AS(eval_field(rp, {1, 1, 1, 1}, {-1, 1}), error);
}

TEST_CASE("velocity reconstructs exactly from the fluxes") {
  splitmix64 rng(11);
  auto rp = example_network();
  for (int it = 0; it < 200; ++it) {
    vec2 p{rng.uniform(0.01, 20), rng.uniform(0.01, 20)};
    rate_vector k{rng.uniform(0.1, 10), rng.uniform(0.1, 10),
                  rng.uniform(0.1, 10), rng.uniform(0.1, 10)};
    field_value f = eval_field(rp, k, p);
    vec2 rebuilt = f.flux1 * rp.v1 + f.flux2 * rp.v2;
    CHECK(f.velocity == rebuilt);
  }
}

TEST_CASE("rate-box extremes equal vertex enumeration exactly") {
  splitmix64 rng(13);
  auto rp = example_network();
  auto rpv = case_v_network();
  for (int it = 0; it < 1000; ++it) {
    const reaction_pair& net = (it % 2) ? rpv : rp;
    double e = rng.uniform(0.05, 0.95);
    vec2 p{rng.uniform(0.05, 10), rng.uniform(0.05, 10)};
    vec2 n = unit({rng.uniform(-1, 1), rng.uniform(-1, 1) + 1e-6});
    auto [mn, mx] = field_normal_extremes(net, e, p, n);

    double bmn = 1e300, bmx = -1e300;
    for (int mask = 0; mask < 16; ++mask) {
      rate_vector k{(mask & 1) ? 1 / e : e, (mask & 2) ? 1 / e : e,
                    (mask & 4) ? 1 / e : e, (mask & 8) ? 1 / e : e};
      double d = dot(eval_field(net, k, p).velocity, n);
      bmn = std::min(bmn, d);
      bmx = std::max(bmx, d);
    }
    CHECK(mn == bmn);
    CHECK(mx == bmx);
  }
}

TEST_CASE("extremes flip under normal negation and collapse at eps = 1") {
  auto rp = example_network();
  vec2 p{2, 3}, n = unit({1, 2});
  auto [mn, mx] = field_normal_extremes(rp, 0.5, p, n);
  auto [mn2, mx2] = field_normal_extremes(rp, 0.5, p, -n);
  CHECK(mn == -mx2);
  CHECK(mx == -mn2);

  auto [dmn, dmx] = field_normal_extremes(rp, 1.0, p, n);
  CHECK(dmn == dmx);
  CHECK(dmn == dot(eval_field(rp, {1, 1, 1, 1}, p).velocity, n));
}

TEST_CASE("attracting directions are forced outside the band") {
  auto rp = example_network();
  epsilon_t eps(0.5);
  CHECK(attracting_direction(rp, eps, 1, {3, 1}) == attract_dir::minus);
  CHECK(attracting_direction(rp, eps, 1, {0.1, 1}) == attract_dir::plus);
  CHECK(attracting_direction(rp, eps, 1, {1, 1}) == attract_dir::either);

  // Outside reaction i's band, the flux sign is the same at all 16 box
  // vertices.
  splitmix64 rng(17);
  int tested = 0;
  while (tested < 1000) {
    vec2 p{rng.uniform(0.02, 30), rng.uniform(0.02, 30)};
    for (int i = 1; i <= 2; ++i) {
      attract_dir dir = attracting_direction(rp, eps, i, p);
      if (dir == attract_dir::either) continue;
      ++tested;
      for (int mask = 0; mask < 16; ++mask) {
        rate_vector k{(mask & 1) ? 2.0 : 0.5, (mask & 2) ? 2.0 : 0.5,
                      (mask & 4) ? 2.0 : 0.5, (mask & 8) ? 2.0 : 0.5};
        field_value f = eval_field(rp, k, p);
        double flux = i == 1 ? f.flux1 : f.flux2;
        CHECK((dir == attract_dir::plus ? flux > 0 : flux < 0));
      }
    }
  }
}

TEST_CASE("corner cones carry the forced signs and split two/two") {
  epsilon_t eps(0.5);
  std::vector<reaction_pair> fixtures = {
      example_network(),                     // case i
      from_vectors({2, -1}, {3, -1}),        // case ii
      from_vectors({1, -2}, {1, -3}),        // case iii
      from_vectors({1, 2}, {2, 1}),          // case iv
  };
  for (const auto& rp : fixtures) {
    corner_set cs = corner_points(rp, eps);
    int sources = 0;
    for (const auto& c : cs.corners) {
      cone_info cone = corner_cone(rp, eps, c);
      CHECK(cone.g1 == static_cast<double>(c.sigma1) * rp.v1);
      CHECK(cone.g2 == static_cast<double>(c.sigma2) * rp.v2);
      CHECK(cone.sink == !c.source);
      sources += c.source ? 1 : 0;
    }
    CHECK(sources == 2);
  }

  corner_set cs = corner_points(example_network(), eps);
  cone_info d = corner_cone(example_network(), eps, cs.at(corner_id::D));
  CHECK(d.g1 == vec2{2, -1});
  CHECK(d.g2 == vec2{-1, 2});
  cone_info b = corner_cone(example_network(), eps, cs.at(corner_id::B));
  CHECK(b.g1 == vec2{-2, 1});
  CHECK(b.g2 == vec2{1, -2});
}

TEST_CASE("jacobian of the worked example at the unit state") {
  auto rp = example_network();
  jacobian_matrix J = jacobian(rp, {1, 1, 1, 1}, {1, 1});
  CHECK(J.j11 == -5.0);
  CHECK(J.j12 == 4.0);
  CHECK(J.j21 == 4.0);
  CHECK(J.j22 == -5.0);
  REQUIRE(J.real_eigen);
  CHECK(J.lam_slow == -1.0);
  CHECK(J.lam_fast == -9.0);
  CHECK_THAT(std::abs(cross(J.e_slow, unit({1, 1}))), WithinAbs(0.0, 1e-14));
  CHECK_THAT(std::abs(cross(J.e_fast, unit({1, -1}))), WithinAbs(0.0, 1e-14));
  CHECK(J.e_fast.x * J.e_fast.y < 0);  // second or fourth quadrant
}

TEST_CASE("jacobian matches central finite differences") {
  splitmix64 rng(19);
  auto rp = example_network();
  auto rpv = case_v_network();
  for (int it = 0; it < 100; ++it) {
    const reaction_pair& net = (it % 2) ? rpv : rp;
    vec2 p{rng.uniform(0.1, 5), rng.uniform(0.1, 5)};
    rate_vector k{rng.uniform(0.2, 5), rng.uniform(0.2, 5),
                  rng.uniform(0.2, 5), rng.uniform(0.2, 5)};
    jacobian_matrix J = jacobian(net, k, p);
    const double h = 1e-6;
    vec2 fx = (eval_field(net, k, {p.x + h, p.y}).velocity -
               eval_field(net, k, {p.x - h, p.y}).velocity) /
              (2 * h);
    vec2 fy = (eval_field(net, k, {p.x, p.y + h}).velocity -
               eval_field(net, k, {p.x, p.y - h}).velocity) /
              (2 * h);
    double scale = std::abs(J.j11) + std::abs(J.j12) + std::abs(J.j21) +
                   std::abs(J.j22) + 1.0;
    CHECK(std::abs(J.j11 - fx.x) <= 1e-5 * scale);
    CHECK(std::abs(J.j21 - fx.y) <= 1e-5 * scale);
    CHECK(std::abs(J.j12 - fy.x) <= 1e-5 * scale);
    CHECK(std::abs(J.j22 - fy.y) <= 1e-5 * scale);
  }
}

TEST_CASE("corner jacobians under their own patterns are stable nodes") {
  for (double e : {0.3, 0.5, 0.7}) {
    epsilon_t eps(e);
    auto rp = example_network();
    corner_set cs = corner_points(rp, eps);
    for (const auto& c : cs.corners) {
      jacobian_matrix J = jacobian(rp, c.pattern(eps), c.pos);
      REQUIRE(J.real_eigen);
      CHECK(J.lam_slow < 0);
      CHECK(J.lam_fast < 0);
      auto [s12, s21] = symmetrized_offdiag(J, c.pos);
      CHECK(nearly_equal(s12, s21, 1e-10));
    }
  }
}

TEST_CASE("equal-eigenvalue scan honors its contract") {
  auto rp = example_network();

  // Case i: both off-diagonal entries share a sign at the corners, so the
  // discriminant stays positive and the scan is empty.
  auto roots = equal_eigenvalue_scan(rp, corner_id::A, 0.05, 0.95, 2000);
  CHECK(roots.empty());

  // Contract checks on whatever the mixed-slope fixture produces.
  auto rpv = case_v_network();
  for (auto cid : {corner_id::A, corner_id::B, corner_id::C, corner_id::D}) {
    auto r1 = equal_eigenvalue_scan(rpv, cid, 0.05, 0.9, 2000);
    auto r2 = equal_eigenvalue_scan(rpv, cid, 0.05, 0.9, 20000);
    REQUIRE(r1.size() == r2.size());
    for (std::size_t i = 0; i < r1.size(); ++i) {
      CHECK(std::abs(r1[i] - r2[i]) < 1e-9);
      epsilon_t eps(r1[i]);
      const corner& c = corner_points(rpv, eps).at(cid);
      jacobian_matrix J = jacobian(rpv, c.pattern(eps), c.pos);
      double scale = J.trace * J.trace + std::abs(J.det) + 1.0;
      CHECK(std::abs(J.disc) < 1e-8 * scale);
    }
  }
}
