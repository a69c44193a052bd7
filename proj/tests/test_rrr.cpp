// Nine-anchor chain manipulator: metric expansion, inverse kinematics,
// degeneracy families, and the continuation pipeline over them.
#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <string>
#include <vector>

#include "singdist/rrr.hpp"

using namespace singdist;

namespace {

RrrDesign demo_rrr_design() {
  RrrDesign d;
  d.base = {Vec2{0, 0}, Vec2{10, 0}, Vec2{5, 9}};
  d.platform = {Vec2{0, 0}, Vec2{3, 0}, Vec2{1.5, 2.5}};
  d.elbows = {Vec2{1.2, 3.2}, Vec2{8.7, 4.5}, Vec2{3.2, 7.2}};
  return d;
}

MotionSpec demo_rrr_motion(int n = 90) {
  MotionSpec m;
  m.a0 = {3.5, 3};
  m.a1 = {1.2, 0};
  m.b1 = {0, 1.2};
  m.v = 0;
  m.w = 2 * kPi;
  m.n = n;
  m.rotate = false;
  return m;
}

// Design whose first sample stretches chain 1 taut: the moving anchor of
// chain 1 reaches its farthest point from the fixed anchor exactly at phi=0,
// where the joint sits on the connecting segment.
RrrDesign taut_start_design() {
  RrrDesign d;
  d.base = {Vec2{0, 0}, Vec2{10, 0}, Vec2{5, 9}};
  d.platform = {Vec2{0, 0}, Vec2{3, 0}, Vec2{1.5, 2.5}};
  d.elbows = {Vec2{2.35, 0}, Vec2{8.85, 2.2}, Vec2{2.5, 5.5}};
  return d;
}

MotionSpec taut_start_motion(int n) {
  MotionSpec m;
  m.a0 = {3.5, 0};
  m.a1 = {1.2, 0};
  m.b1 = {0, 1.2};
  m.v = 0;
  m.w = 2 * kPi;
  m.n = n;
  m.rotate = false;
  return m;
}

double simpson_segment(const Vec2& da, const Vec2& db) {
  const Vec2 mid = 0.5 * (da + db);
  return (norm2(da) + 4 * norm2(mid) + norm2(db)) / 6.0;
}

double midpoint_triangle(const Vec2& d0, const Vec2& d1, const Vec2& d2) {
  const Vec2 m01 = 0.5 * (d0 + d1), m12 = 0.5 * (d1 + d2), m20 = 0.5 * (d2 + d0);
  return (norm2(m01) + norm2(m12) + norm2(m20)) / 3.0;
}

}  // namespace

TEST_CASE("nine-anchor squared distance matches an exact quadrature oracle", "[rrr]") {
  KeyedRng rng(7, {rngkey::kTest, 90});
  for (int trial = 0; trial < 25; ++trial) {
    std::array<Vec2, 9> a, b;
    for (int i = 0; i < 9; ++i) {
      a[i] = {rng.uniform(-5, 5), rng.uniform(-5, 5)};
      b[i] = {rng.uniform(-5, 5), rng.uniform(-5, 5)};
    }
    std::array<Vec2, 9> d;
    for (int i = 0; i < 9; ++i) d[i] = b[i] - a[i];

    // Simpson on each bar (exact for the quadratic integrand) and the
    // edge-midpoint rule on each plate, averaged over the eight unit terms.
    double oracle = 0;
    const int bars[6][2] = {{0, 3}, {0, 6}, {1, 4}, {1, 7}, {2, 5}, {2, 8}};
    for (const auto& s : bars) oracle += simpson_segment(d[s[0]], d[s[1]]);
    oracle += midpoint_triangle(d[6], d[7], d[8]);
    oracle += midpoint_triangle(d[3], d[4], d[5]);
    oracle /= 8.0;

    const double got = rrr_dist2(a, b);
    CHECK(got == Catch::Approx(oracle).epsilon(1e-12));
  }
}

TEST_CASE("inverse kinematics reproduces the declared joints and conserves link lengths", "[rrr]") {
  const RrrDesign d = demo_rrr_design();
  const MotionSpec m = demo_rrr_motion();
  const RrrLinkLengths L = rrr_link_lengths(d, m);
  const std::vector<RrrConfiguration> path = rrr_config_path(d, m);
  REQUIRE(path.size() == 90);

  for (int i = 0; i < 3; ++i) {
    CHECK(norm(path[0].k[i] - d.elbows[i]) < 1e-9);
    CHECK(norm(path[0].k[6 + i] - d.base[i]) == 0.0);
  }
  double max_step = 0;
  for (std::size_t j = 0; j < path.size(); ++j) {
    for (int i = 0; i < 3; ++i) {
      CHECK(std::abs(norm(path[j].k[i] - path[j].k[6 + i]) - L.proximal[i]) < 1e-9);
      CHECK(std::abs(norm(path[j].k[3 + i] - path[j].k[i]) - L.distal[i]) < 1e-9);
      if (j > 0) max_step = std::max(max_step, norm(path[j].k[i] - path[j - 1].k[i]));
    }
  }
  CHECK(max_step < 1.5);  // joints move continuously, no branch flips

  SECTION("a motion that leaves the reachable annulus is rejected") {
    RrrDesign far = taut_start_design();
    MotionSpec fm = taut_start_motion(9);
    fm.a1 = {-1.2, 0};  // chain 1 is taut at its *nearest* pose, so the far side is out of reach
    far.elbows[0] = {1.15, 0};
    far.elbows[2] = {2.0, 5.2};
    CHECK_THROWS_AS(rrr_config_path(far, fm), InvalidInput);
  }
  SECTION("a zero-length link is a design error") {
    RrrDesign zd = demo_rrr_design();
    zd.elbows[1] = zd.base[1];
    CHECK_THROWS_AS(rrr_link_lengths(zd, m), DegenerateDesign);
  }
}

TEST_CASE("constraint values vanish exactly on constructed degeneracies", "[rrr]") {
  SECTION("distal carrier lines through a common point") {
    RrrConfiguration K;
    K.k[0] = {0, 0};
    K.k[3] = {2, 2};  // line y = x through (1,1)
    K.k[1] = {2, 0};
    K.k[4] = {0, 2};  // line x + y = 2 through (1,1)
    K.k[2] = {1, -3};
    K.k[5] = {1, 5};  // line x = 1 through (1,1)
    K.k[6] = {-1, -1};
    K.k[7] = {11, 0};
    K.k[8] = {5, 9};
    CHECK(eval_rrr_parallel(K) == 0.0);
    K.k[0] = {0.1, 0};
    CHECK(std::abs(eval_rrr_parallel(K)) > 1e-3);
  }
  SECTION("all distal carriers parallel") {
    RrrConfiguration K;
    for (int i = 0; i < 3; ++i) {
      K.k[i] = {double(i), double(2 * i)};
      K.k[3 + i] = {double(i) + 1, double(2 * i) + 1};  // all directions (1,1)
      K.k[6 + i] = {double(3 * i), -1};
    }
    CHECK(eval_rrr_parallel(K) == 0.0);
  }
  SECTION("a stretched chain") {
    RrrConfiguration K;
    K.k[6] = {0, 0};
    K.k[0] = {1.5, 3};
    K.k[3] = {2.5, 5};  // collinear: cross vanishes exactly
    CHECK(eval_rrr_leg(K, 0) == 0.0);
    K.k[0] = {1.5, 3.5};  // joint above the carrier
    const double above = eval_rrr_leg(K, 0);
    K.k[0] = {1.5, 2.5};  // joint below
    const double below = eval_rrr_leg(K, 0);
    CHECK(above * below < 0);
  }
}

TEST_CASE("stationarity systems expose the expected shape", "[rrr]") {
  KeyedRng rng(11, {rngkey::kTest, 91});
  for (const RrrBranch& b : rrr_branches()) {
    const RrrSystem cs = build_rrr_system(b);
    REQUIRE(cs.sys.n_unknowns == 19);
    REQUIRE(static_cast<int>(cs.sys.equations.size()) == 19);
    REQUIRE(cs.sys.n_params() == 18);
    CHECK(cs.sys.names[18] == "lam");
    CHECK(cs.sys.names[19] == "a1");
    CHECK(cs.sys.names.back() == "b9");
    CHECK(cs.expected_count == rrr_expected_count(b));

    // The last equation is the constraint itself: evaluate it at a random
    // configuration and compare with the direct determinant.
    RrrConfiguration K;
    std::vector<Complex> at(37);
    for (int i = 0; i < 9; ++i) {
      K.k[i] = {rng.uniform(-4, 4), rng.uniform(-4, 4)};
      at[2 * i] = K.k[i].x;
      at[2 * i + 1] = K.k[i].y;
      at[19 + 2 * i] = rng.uniform(-1, 1);
      at[19 + 2 * i + 1] = rng.uniform(-1, 1);
    }
    at[18] = rng.uniform(-1, 1);  // multiplier value is irrelevant to the constraint row
    const double direct = b.parallel ? eval_rrr_parallel(K) : eval_rrr_leg(K, b.leg);
    CHECK(cs.sys.equations[18].evaluate(at).real() == Catch::Approx(direct).epsilon(1e-10));
    CHECK(std::abs(cs.sys.equations[18].evaluate(at).imag()) < 1e-12);
  }

  SECTION("gradient rows vanish at the reflection of a generic query") {
    // With the constraint row dropped, u = K and lam = 0 solves the first 18
    // equations for any K: the metric gradient vanishes at zero displacement.
    const RrrSystem cs = build_rrr_system(RrrBranch{true, 0});
    std::vector<Complex> at(37);
    for (int i = 0; i < 18; ++i) {
      at[i] = Complex(rng.uniform(-4, 4));
      at[19 + i] = at[i];
    }
    at[18] = 0.0;
    for (int e = 0; e < 18; ++e) CHECK(std::abs(cs.sys.equations[e].evaluate(at)) < 1e-12);
  }
}

TEST_CASE("the concurrent-carrier family carries fifty generic critical points", "[rrr][abinitio]") {
  RrrEngine be(RrrBranch{true, 0});
  const SourceFiber src = rrr_ab_initio(be, 2026, 2);
  CHECK(src.expected == 50);
  CHECK(src.solutions.size() == 50);
  CHECK(src.loops >= 1);
}

TEST_CASE("each stretched-chain family carries its frozen count", "[rrr][abinitio]") {
  for (int leg = 0; leg < 3; ++leg) {
    RrrEngine be(RrrBranch{false, leg});
    const SourceFiber src = rrr_ab_initio(be, 2026 + leg, leg == 0 ? 2 : 1);
    CHECK(src.expected == kRrrLegSolutions);
    CHECK(static_cast<int>(src.solutions.size()) == kRrrLegSolutions);
  }
}

TEST_CASE("a taut starting chain pins the sweep to the boundary", "[rrr][sweep]") {
  const RrrDesign d = taut_start_design();
  const MotionSpec m = taut_start_motion(3);
  PipelineSettings ps;
  ps.seed = 5;

  const std::vector<RrrConfiguration> path = rrr_config_path(d, m);
  REQUIRE(std::abs(eval_rrr_leg(path[0], 0)) < 1e-6);

  const RrrSweepOutcome out = rrr_sweep(d, m, ps);
  REQUIRE(out.poses.size() == 3);
  REQUIRE(out.stages.size() == 4);
  for (const StageReport& s : out.stages) CHECK(s.achieved == s.expected);

  const RrrDistanceResult& first = out.poses[0];
  REQUIRE(first.branches.size() == 4);
  CHECK(first.branches[0].branch == "rrr_parallel");
  CHECK(first.branches[1].branch == "rrr_leg1");
  REQUIRE(first.branches[1].real);
  CHECK(first.branches[1].distance < 1e-5);
  CHECK(first.overall < 1e-5);

  // Half a turn later the taut chain has slackened; the closest degenerate
  // configuration is now a finite distance away.
  const RrrDistanceResult& mid = out.poses[1];
  REQUIRE(mid.overall_index >= 0);
  CHECK(mid.overall > 1e-3);
  CHECK((mid.sign == 1 || mid.sign == -1));

  SECTION("per-pose solves are deterministic") {
    const RrrPrepared prep = rrr_prepare(d, m, ps);
    const RrrDistanceResult again = rrr_solve_pose(prep, path[1], m.phi_at(1), ps);
    for (int i = 0; i < 4; ++i) {
      if (!mid.branches[i].real) continue;
      CHECK(again.branches[i].distance == mid.branches[i].distance);
    }
  }

  SECTION("csv rows carry every branch plus the combination") {
    const std::string csv = rrr_distance_csv(out.poses, true);
    REQUIRE(csv.rfind(std::string(kRrrCsvHeader) + "\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 3 * 5);
    const std::string header(kRrrCsvHeader);
    const auto commas = std::count(header.begin(), header.end(), ',');
    std::size_t line_start = header.size() + 1;
    while (line_start < csv.size()) {
      const std::size_t line_end = csv.find('\n', line_start);
      CHECK(std::count(csv.begin() + line_start, csv.begin() + line_end, ',') == commas);
      line_start = line_end + 1;
    }
    const std::string unsigned_csv = rrr_distance_csv(out.poses, false);
    CHECK(unsigned_csv.find(",rrr_parallel,") != std::string::npos);
    CHECK(unsigned_csv.size() < csv.size());
  }
}
