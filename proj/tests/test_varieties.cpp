#include <catch2/catch_amalgamated.hpp>

#include <array>
#include <cmath>

#include "singdist/core.hpp"
#include "singdist/model.hpp"
#include "singdist/varieties.hpp"

using namespace singdist;

namespace {

std::array<Vec2, 6> random_config(KeyedRng& rng, double scale = 3.0) {
  std::array<Vec2, 6> k;
  for (auto& p : k) p = {rng.uniform(-scale, scale), rng.uniform(-scale, scale)};
  return k;
}

DesignParams demo_design() { return DesignParams{11, 5, 7, 3, 1, 2}; }

MotionSpec demo_motion() {
  MotionSpec m;
  m.a0 = {5.5, 1.5};
  m.a1 = {0, -1.5};
  m.b1 = {-3, 0};
  m.v = 0;
  m.w = 2 * kPi;
  m.n = 90;
  return m;
}

}  // namespace

TEST_CASE("variety vanishes exactly on concurrent and parallel carrier lines", "[varieties]") {
  KeyedRng rng(31, {rngkey::kTest, 20});
  for (int trial = 0; trial < 40; ++trial) {
    // Concurrent: all three carrier lines through a common point.
    Vec2 P{rng.uniform(-2, 2), rng.uniform(-2, 2)};
    std::array<Vec2, 6> k;
    for (int i = 0; i < 3; ++i) {
      double th = rng.uniform(0, 2 * kPi);
      Vec2 u{std::cos(th), std::sin(th)};
      k[i] = P + rng.uniform(0.3, 2.0) * u;
      k[i + 3] = P + rng.uniform(-2.0, -0.3) * u;
    }
    CHECK(std::abs(eval_variety(k)) < 1e-9);

    // All parallel.
    double th = rng.uniform(0, 2 * kPi);
    Vec2 u{std::cos(th), std::sin(th)};
    for (int i = 0; i < 3; ++i) {
      Vec2 o{rng.uniform(-2, 2), rng.uniform(-2, 2)};
      k[i] = o;
      k[i + 3] = o + rng.uniform(0.3, 2.0) * u;
    }
    CHECK(std::abs(eval_variety(k)) < 1e-9);

    // Generic configurations are regular.
    auto g = random_config(rng);
    CHECK(std::abs(eval_variety(g)) > 1e-6);
  }
}

TEST_CASE("variety scales by squared determinant under affine maps", "[varieties]") {
  KeyedRng rng(32, {rngkey::kTest, 21});
  for (int trial = 0; trial < 25; ++trial) {
    auto k = random_config(rng);
    double a = rng.uniform(-2, 2), b = rng.uniform(-2, 2), c = rng.uniform(-2, 2), d = rng.uniform(-2, 2);
    Vec2 t{rng.uniform(-2, 2), rng.uniform(-2, 2)};
    double detA = a * d - b * c;
    std::array<Vec2, 6> kk;
    for (int i = 0; i < 6; ++i) kk[i] = {a * k[i].x + b * k[i].y + t.x, c * k[i].x + d * k[i].y + t.y};
    double lhs = eval_variety(kk);
    double rhs = detA * detA * eval_variety(k);
    CHECK(std::abs(lhs - rhs) < 1e-8 * (1 + std::abs(rhs)));
  }
}

TEST_CASE("symbolic variety matches numeric evaluation", "[varieties]") {
  std::array<MultiPoly, 12> cd;
  for (int i = 0; i < 12; ++i) cd[i] = MultiPoly::variable(12, i);
  MultiPoly V = variety_poly(cd);
  CHECK(V.total_degree() == 4);
  CHECK(V.degree_in(6) == 1);  // linear in any single coordinate of one anchor

  KeyedRng rng(33, {rngkey::kTest, 22});
  for (int trial = 0; trial < 20; ++trial) {
    auto k = random_config(rng);
    std::array<Complex, 12> vals;
    for (int i = 0; i < 6; ++i) {
      vals[2 * i] = k[i].x;
      vals[2 * i + 1] = k[i].y;
    }
    CHECK(std::abs(V.evaluate(std::span<const Complex>(vals)).real() - eval_variety(k)) < 1e-9);
  }
}

TEST_CASE("documented motion crosses the variety between known samples", "[varieties]") {
  auto d = demo_design();
  auto m = demo_motion();
  // phi = 0 is exactly singular (legs 1 and 2 on the x-axis).
  CHECK(std::abs(eval_variety(pose_config(d, m, 0.0))) < 1e-9);
  // Sign change between grid samples 43 and 44.
  double v43 = eval_variety(pose_config(d, m, m.phi_at(43)));
  double v44 = eval_variety(pose_config(d, m, m.phi_at(44)));
  CHECK(v43 * v44 < 0);
}

TEST_CASE("collinearity determinant and side conditions", "[varieties]") {
  KeyedRng rng(34, {rngkey::kTest, 23});
  auto k = random_config(rng);
  // Force platform collinear.
  k[5] = k[3] + 0.37 * (k[4] - k[3]);
  CHECK(std::abs(eval_collinearity(k, Side::Platform)) < 1e-12);
  CHECK(std::abs(eval_collinearity(k, Side::Base)) > 1e-8);

  // Side condition vanishes iff the first two side anchors keep the
  // reference separation.
  double ref = norm2(k[1] - k[0]);
  CHECK(std::abs(eval_side_condition(k, Side::Base, ref)) < 1e-12);
  CHECK(std::abs(eval_side_condition(k, Side::Base, ref + 1.0) + 1.0) < 1e-12);
}

TEST_CASE("rigid third-anchor expression reproduces rigid displacements", "[varieties]") {
  DesignParams d = demo_design();
  double r = d.x3 / d.x2, s = d.y3 / d.x2;
  KeyedRng rng(35, {rngkey::kTest, 24});
  for (int trial = 0; trial < 20; ++trial) {
    double th = rng.uniform(0, 2 * kPi);
    Vec2 t{rng.uniform(-3, 3), rng.uniform(-3, 3)};
    auto g = [&](const Vec2& p) {
      return Vec2{std::cos(th) * p.x - std::sin(th) * p.y + t.x, std::sin(th) * p.x + std::cos(th) * p.y + t.y};
    };
    Vec2 q1 = g({0, 0}), q2 = g({d.x2, 0}), q3 = g({d.x3, d.y3});
    CHECK(norm(similar_third_point(q1, q2, r, s) - q3) < 1e-12);
  }
}

TEST_CASE("symbolic rigid-side substitution matches numeric composition", "[varieties]") {
  // Space: c1,d1,c2,d2,c3,d3,r,s (8 variables); substitute (c3,d3).
  const int nv = 8;
  auto v = [&](int i) { return MultiPoly::variable(nv, i); };
  MultiPoly f = v(4) * v(4) + v(5) * v(0) + v(2) * v(4);  // uses c3,d3
  MultiPoly g = pbr_substitute(f, {4, 5}, {0, 1, 2, 3}, {6, 7});
  CHECK(g.degree_in(4) == 0);
  CHECK(g.degree_in(5) == 0);

  KeyedRng rng(36, {rngkey::kTest, 25});
  for (int trial = 0; trial < 10; ++trial) {
    Vec2 q1{rng.uniform(-2, 2), rng.uniform(-2, 2)}, q2{rng.uniform(-2, 2), rng.uniform(-2, 2)};
    double r = rng.uniform(-1, 1), s = rng.uniform(-1, 1);
    Vec2 q3 = similar_third_point(q1, q2, r, s);
    std::array<Complex, 8> full{q1.x, q1.y, q2.x, q2.y, q3.x, q3.y, r, s};
    CHECK(std::abs(g.evaluate(std::span<const Complex>(full)) - f.evaluate(std::span<const Complex>(full))) <
          1e-10);
  }
}

TEST_CASE("constructed configurations annihilate the variety gradient", "[varieties]") {
  KeyedRng rng(37, {rngkey::kTest, 26});
  for (int case_id = 1; case_id <= 4; ++case_id) {
    for (int trial = 0; trial < 10; ++trial) {
      auto k = gradient_zero_config(case_id, rng);
      CHECK(std::abs(eval_variety(k)) < 1e-10);
      CHECK(variety_gradient_scaled(k) < 1e-10);
    }
  }
}

TEST_CASE("random variety points are regular", "[varieties]") {
  KeyedRng rng(38, {rngkey::kTest, 27});
  for (int trial = 0; trial < 20; ++trial) {
    auto k = random_variety_point(rng);
    CHECK(std::abs(eval_variety(k)) < 1e-8);
    CHECK(variety_gradient_scaled(k) > 1e-3);
  }
}

TEST_CASE("gradient agrees with finite differences", "[varieties]") {
  KeyedRng rng(39, {rngkey::kTest, 28});
  auto k = random_config(rng);
  auto g = variety_gradient(k);
  const double h = 1e-6;
  for (int i = 0; i < 6; ++i) {
    for (int axis = 0; axis < 2; ++axis) {
      auto kp = k, km = k;
      (axis == 0 ? kp[i].x : kp[i].y) += h;
      (axis == 0 ? km[i].x : km[i].y) -= h;
      double fd = (eval_variety(kp) - eval_variety(km)) / (2 * h);
      CHECK(std::abs(g[2 * i + axis] - fd) < 1e-5 * (1 + std::abs(fd)));
    }
  }
}
