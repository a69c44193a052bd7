// Comparison indices: carrier-line determinants, incircle conventions,
// pressure-angle and passive-rate indices, and the two workspace distances,
// each checked against independent elementary oracles.
#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include "singdist/kpi.hpp"

using namespace singdist;

namespace {

DesignParams demo_design() { return DesignParams{11, 5, 7, 3, 1, 2}; }

MotionSpec demo_motion() {
  MotionSpec m;
  m.a0 = {5.5, 1.5};
  m.a1 = {0, -1.5};
  m.b1 = {-3, 0};
  m.v = 0;
  m.w = 2 * kPi;
  m.n = 90;
  m.rotate = true;
  return m;
}

Configuration demo_config(double phi) {
  return Configuration{pose_points<double>(demo_design(), demo_motion(), phi)};
}

double real_carrier_det(const DesignParams& d, const PlanarPose& p) {
  using C = std::complex<double>;
  return detail::carrier_det(d, C(p.t.x), C(p.t.y), C(std::cos(p.zeta)), C(std::sin(p.zeta))).real();
}

}  // namespace

TEST_CASE("manipulability matches a cofactor oracle and vanishes at the singular sample", "[kpi]") {
  const Configuration K0 = demo_config(0.0);
  Manipulability m0 = manipulability(K0);
  CHECK(m0.M < 1e-9);
  CHECK(std::abs(m0.V_raw) < 1e-6);

  // The start sample stays singular under uniform scaling.
  Configuration Ks = K0;
  for (Vec2& p : Ks.k) p = Vec2{3 * p.x, 3 * p.y};
  CHECK(manipulability(Ks).M < 1e-7);

  const Configuration K = demo_config(0.8471710528);
  Manipulability m = manipulability(K);
  CHECK(m.M > 1e-3);
  CHECK(m.V_raw == eval_variety(K));

  // Cofactor-expansion oracle on the unit-Plucker rows.
  double r[3][3];
  for (int i = 0; i < 3; ++i) {
    Vec2 dgt = K.leg_dir(i);
    double len = norm(dgt);
    r[i][0] = dgt.x / len;
    r[i][1] = dgt.y / len;
    r[i][2] = cross(K.k[i], K.k[i + 3]) / len;
  }
  double det = r[0][0] * (r[1][1] * r[2][2] - r[1][2] * r[2][1]) -
               r[0][1] * (r[1][0] * r[2][2] - r[1][2] * r[2][0]) +
               r[0][2] * (r[1][0] * r[2][1] - r[1][1] * r[2][0]);
  CHECK(m.M == Catch::Approx(std::abs(det)).epsilon(1e-10));

  Configuration bad = K;
  bad.k[3] = bad.k[0];
  CHECK_THROWS_AS(manipulability(bad), ZeroLegLength);
  CHECK_THROWS_AS(control_numbers(bad), ZeroLegLength);
}

TEST_CASE("incircle radius honors the classical and parallel-line conventions", "[kpi]") {
  const double s3 = std::sqrt(3.0);

  Configuration eq;  // legs along the sides of a unit equilateral triangle
  eq.k = {Vec2{0, 0}, Vec2{1, 0}, Vec2{0.5, s3 / 2}, Vec2{1, 0}, Vec2{0.5, s3 / 2}, Vec2{0, 0}};
  CHECK(std::abs(incircle_radius(eq)) == Catch::Approx(1 / (2 * s3)).epsilon(1e-12));

  Configuration conc;  // three lines through (2, 1)
  conc.k = {Vec2{1, 1}, Vec2{2, 0}, Vec2{1, 0}, Vec2{3, 1}, Vec2{2, 2}, Vec2{3, 2}};
  CHECK(std::abs(incircle_radius(conc)) < 1e-12);

  Configuration par;  // legs 1, 2 on y = 0 and y = 1, leg 3 on x = 0
  par.k = {Vec2{0, 0}, Vec2{0, 1}, Vec2{0, 2}, Vec2{1, 0}, Vec2{2, 1}, Vec2{0, 5}};
  CHECK(incircle_radius(par) == Catch::Approx(0.5).epsilon(1e-12));

  Configuration coin = par;  // the parallel pair collapses onto one line
  coin.k[1] = Vec2{5, 0};
  coin.k[4] = Vec2{6, 0};
  CHECK(std::abs(incircle_radius(coin)) < 1e-12);

  Configuration allpar;
  allpar.k = {Vec2{0, 0}, Vec2{0, 1}, Vec2{0, 2}, Vec2{1, 0}, Vec2{1, 1}, Vec2{1, 2}};
  CHECK_THROWS_AS(incircle_radius(allpar), AllParallel);

  // Demo sweep: zero at the singular start sample, and the parallel-leg pose
  // between samples 62 and 63 flips the triangle orientation, producing the
  // one outsized step of the whole curve.
  const MotionSpec m = demo_motion();
  std::vector<double> r(90);
  for (int j = 0; j < 90; ++j) r[j] = incircle_radius(demo_config(m.phi_at(j)));
  CHECK(std::abs(r[0]) < 1e-6);
  std::vector<double> steps;
  for (int j = 0; j + 1 < 90; ++j) steps.push_back(std::abs(r[j + 1] - r[j]));
  double jump = steps[62];
  std::nth_element(steps.begin(), steps.begin() + 44, steps.end());
  CHECK(r[62] * r[63] < 0);
  CHECK(jump > 10 * steps[44]);
}

TEST_CASE("pressure-angle indices degenerate exactly at singular poses", "[kpi]") {
  TransmissionIndices t0 = transmission_indices(demo_config(0.0));
  CHECK(t0.TI < 1e-6);
  CHECK(t0.DS >= 0);
  CHECK(t0.DS < 1e-6);

  TransmissionIndices t = transmission_indices(demo_config(0.8471710528));
  CHECK(t.TI > 1e-3);
  CHECK(t.DS > 1e-3);
  for (int i = 0; i < 3; ++i) {
    CHECK(t.alpha[i] >= 0);
    CHECK(t.alpha[i] <= kPi / 2);
  }
  CHECK(t.TI <= 1);
  CHECK(t.MTI <= 1);
  CHECK(t.DS <= 1);
  CHECK(t.MDS <= 1);
}

TEST_CASE("role exchange preserves the modified indices but not TI", "[kpi]") {
  KeyedRng rng(20260801, {rngkey::kTest, 41});
  const DesignParams d = demo_design();
  const MotionSpec m = demo_motion();
  bool ti_differs = false;
  for (int trial = 0; trial < 100; ++trial) {
    double phi = 2 * kPi * rng.uniform();
    Configuration K{pose_points<double>(d, m, phi)};
    Configuration swapped;
    for (int i = 0; i < 3; ++i) {
      swapped.k[i] = K.k[i + 3];
      swapped.k[i + 3] = K.k[i];
    }
    TransmissionIndices a = transmission_indices(K);
    TransmissionIndices b = transmission_indices(swapped);
    CHECK(std::abs(a.MTI - b.MTI) <= 1e-12);
    CHECK(std::abs(a.MDS - b.MDS) <= 1e-12);
    ti_differs = ti_differs || std::abs(a.TI - b.TI) > 1e-6;
  }
  CHECK(ti_differs);
}

TEST_CASE("control numbers: bounds, scaling law, and decay toward the singular pose", "[kpi]") {
  const MotionSpec m = demo_motion();
  KeyedRng rng(20260801, {rngkey::kTest, 42});
  for (int trial = 0; trial < 20; ++trial) {
    Configuration K = demo_config(0.2 + 5.8 * rng.uniform());
    ControlNumbers c = control_numbers(K);
    CHECK(c.CN >= 0);
    CHECK(c.CN <= 1);
    CHECK(c.MCN > 0);

    Configuration Ks = K;
    for (Vec2& p : Ks.k) p = Vec2{3 * p.x, 3 * p.y};
    ControlNumbers cs = control_numbers(Ks);
    CHECK(cs.CN == Catch::Approx(c.CN).epsilon(1e-10));
    CHECK(cs.MCN == Catch::Approx(3 * c.MCN).epsilon(1e-10));
  }

  double c1 = control_numbers(demo_config(m.phi_at(1))).CN;
  double c2 = control_numbers(demo_config(m.phi_at(2))).CN;
  double c3 = control_numbers(demo_config(m.phi_at(3))).CN;
  CHECK(c1 < c2);
  CHECK(c2 < c3);
}

TEST_CASE("orientation distance matches a bisected scan of the rotation circle", "[kpi]") {
  const DesignParams d = demo_design();
  const MotionSpec m = demo_motion();
  CHECK(orientation_distance(d, pose_at(m, 0.0)) < 1e-6);

  KeyedRng rng(20260801, {rngkey::kTest, 43});
  for (int trial = 0; trial < 10; ++trial) {
    PlanarPose pose;
    pose.t = Vec2{12 * rng.uniform() - 2, 12 * rng.uniform() - 2};
    pose.zeta = 2 * kPi * rng.uniform() - kPi;

    // The rational-rotation numerator really is a quartic.
    std::array<double, 7> coef = detail::orientation_numerator(d, pose.t);
    double cmax = 0;
    for (double c : coef) cmax = std::max(cmax, std::abs(c));
    REQUIRE(cmax > 0);
    CHECK(std::abs(coef[5]) <= 1e-8 * cmax);
    CHECK(std::abs(coef[6]) <= 1e-8 * cmax);

    if (trial >= 5) continue;  // scan oracle on the first five draws only
    const int N = 6284;
    auto g = [&](double z) { return real_carrier_det(d, PlanarPose{pose.t, z}); };
    double oracle = kPi;
    double prev = g(-kPi);
    for (int i = 1; i <= N; ++i) {
      double z = -kPi + 2 * kPi * i / N;
      double cur = g(z);
      if (prev == 0 || prev * cur < 0) {
        double lo = z - 2 * kPi / N, hi = z;
        for (int it = 0; it < 60; ++it) {
          double mid = (lo + hi) / 2;
          (g(lo) * g(mid) <= 0 ? hi : lo) = mid;
        }
        oracle = std::min(oracle, std::abs(std::remainder(pose.zeta - (lo + hi) / 2, 2 * kPi)));
      }
      prev = cur;
    }
    double got = orientation_distance(d, pose);
    CHECK(got == Catch::Approx(oracle).margin(1e-3));
  }
}

TEST_CASE("position distance matches a sliced-conic scan", "[kpi]") {
  const DesignParams d = demo_design();
  const MotionSpec m = demo_motion();
  CHECK(position_distance(d, pose_at(m, 0.0)) < 1e-6);

  KeyedRng rng(20260801, {rngkey::kTest, 44});
  for (int trial = 0; trial < 4; ++trial) {
    PlanarPose pose = trial == 0 ? pose_at(m, 0.8471710528)
                                 : PlanarPose{Vec2{12 * rng.uniform() - 2, 12 * rng.uniform() - 2},
                                              2 * kPi * rng.uniform() - kPi};
    double got = position_distance(d, pose);
    CHECK(got == position_distance(d, pose));  // deterministic

    // Slice scan: for each y the locus is a quadratic in x with exactly
    // recoverable coefficients, so scanning y brackets the true minimum.
    auto V = [&](double x, double y) { return real_carrier_det(d, PlanarPose{Vec2{x, y}, pose.zeta}); };
    const double R = got + 1;
    double oracle = std::numeric_limits<double>::infinity();
    const int N = static_cast<int>(2 * R / 5e-4);
    for (int i = 0; i <= N; ++i) {
      double y = pose.t.y - R + 2 * R * i / N;
      double v0 = V(pose.t.x, y), v1 = V(pose.t.x + 1, y), v2 = V(pose.t.x - 1, y);
      double a = (v1 + v2) / 2 - v0, b = (v1 - v2) / 2, c = v0;  // V(t.x + u, y) = a u^2 + b u + c
      if (std::abs(a) < 1e-14) {
        if (std::abs(b) < 1e-14) continue;
        double u = -c / b;
        oracle = std::min(oracle, std::hypot(u, y - pose.t.y));
        continue;
      }
      double disc = b * b - 4 * a * c;
      if (disc < 0) continue;
      for (double sgn : {-1.0, 1.0}) {
        double u = (-b + sgn * std::sqrt(disc)) / (2 * a);
        oracle = std::min(oracle, std::hypot(u, y - pose.t.y));
      }
    }
    REQUIRE(std::isfinite(oracle));
    CHECK(got == Catch::Approx(oracle).margin(1e-3));
  }
}

TEST_CASE("kpi rows report raw zeros at the singular sample and serialize", "[kpi]") {
  const DesignParams d = demo_design();
  const MotionSpec m = demo_motion();

  KpiVector z = kpi_at(d, m, 0.0);
  CHECK(z.M < 1e-3);
  CHECK(std::abs(z.IR) < 1e-3);
  CHECK(z.TI < 1e-3);
  CHECK(z.DS < 1e-3);
  CHECK(z.CN < 1e-3);
  CHECK(z.orientation_dist < 1e-6);
  CHECK(z.position_dist < 1e-3);

  KpiVector r = kpi_at(d, m, 0.8471710528);
  for (double v : {r.M, r.TI, r.MTI, r.DS, r.MDS, r.CN, r.MCN, r.orientation_dist, r.position_dist})
    CHECK(v > 1e-4);

  MotionSpec small = m;
  small.v = 0.3;
  small.w = 0.5;
  small.n = 3;
  std::vector<KpiRow> rows = kpi_sweep(d, small);
  REQUIRE(rows.size() == 3);
  std::string csv = kpi_csv(rows);
  CHECK(csv.rfind("phi,M,IR,V_raw,TI,MTI,DS,MDS,CN,MCN,orientation_dist,position_dist\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);
  CHECK(std::count(csv.begin(), csv.end(), ',') == 4 * 11);
}
