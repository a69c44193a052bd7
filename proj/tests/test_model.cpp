#include <catch2/catch_amalgamated.hpp>

#include "singdist/core.hpp"
#include "singdist/model.hpp"

using namespace singdist;

namespace {

DesignParams demo_design() { return DesignParams{11, 5, 7, 3, 1, 2}; }

MotionSpec demo_motion() {
  MotionSpec m;
  m.a0 = {5.5, 1.5};
  m.a1 = {0.0, -1.5};
  m.b1 = {-3.0, 0.0};
  m.v = 0.0;
  m.w = 2 * kPi;
  m.n = 90;
  return m;
}

}  // namespace

TEST_CASE("posed configurations at reference angles", "[model]") {
  auto d = demo_design();
  auto m = demo_motion();

  Configuration k0 = pose_config(d, m, 0.0);
  CHECK(norm(k0.k[0] - Vec2{0, 0}) < 1e-14);
  CHECK(norm(k0.k[1] - Vec2{11, 0}) < 1e-14);
  CHECK(norm(k0.k[2] - Vec2{5, 7}) < 1e-14);
  CHECK(norm(k0.k[3] - Vec2{5.5, 0}) < 1e-14);
  CHECK(norm(k0.k[4] - Vec2{8.5, 0}) < 1e-14);
  CHECK(norm(k0.k[5] - Vec2{6.5, 2}) < 1e-14);

  Configuration kq = pose_config(d, m, kPi / 2);
  CHECK(norm(kq.k[3] - Vec2{2.5, 1.5}) < 1e-12);
  CHECK(norm(kq.k[4] - Vec2{2.5, 4.5}) < 1e-12);
  CHECK(norm(kq.k[5] - Vec2{0.5, 2.5}) < 1e-12);
}

TEST_CASE("motion grid is inclusive and uniform", "[model]") {
  auto m = demo_motion();
  CHECK(m.phi_at(0) == 0.0);
  CHECK(std::abs(m.phi_at(89) - 2 * kPi) < 1e-15);
  CHECK(std::abs(m.phi_at(12) - 2 * kPi * 12.0 / 89.0) < 1e-15);
}

TEST_CASE("complex continuation of the pose matches the real pose", "[model]") {
  auto d = demo_design();
  auto m = demo_motion();
  double phi = 1.234;
  auto kc = pose_points<Complex>(d, m, Complex{phi, 0.0});
  auto kr = pose_points<double>(d, m, phi);
  for (int i = 0; i < 6; ++i) {
    CHECK(std::abs(kc[i].x - Complex{kr[i].x}) < 1e-14);
    CHECK(std::abs(kc[i].y - Complex{kr[i].y}) < 1e-14);
    CHECK(std::abs(kc[i].x.imag()) < 1e-14);
  }
  // A genuinely complex angle produces complex anchor coordinates.
  auto kz = pose_points<Complex>(d, m, Complex{0.3, 0.7});
  CHECK(std::abs(kz[3].x.imag()) > 1e-6);
}

TEST_CASE("non-rotating motion keeps the platform orientation", "[model]") {
  auto d = demo_design();
  auto m = demo_motion();
  m.rotate = false;
  Configuration a = pose_config(d, m, 0.4);
  Configuration b = pose_config(d, m, 2.9);
  Vec2 da = a.k[4] - a.k[3], db = b.k[4] - b.k[3];
  CHECK(norm(da - db) < 1e-14);  // platform edge direction never changes
}

TEST_CASE("canonical relabeling is idempotent and fixes degenerate labels", "[model]") {
  auto d = demo_design();
  auto r = relabel_canonical(d);
  CHECK(r.x2 == d.x2);
  CHECK(r.x3 == d.x3);
  CHECK(r.y3 == d.y3);
  CHECK(r.x5 == d.x5);

  // First two base anchors coincide: x2 = 0. The first valid permutation
  // swaps anchors 2 and 3 on both sides.
  DesignParams bad{0, 1, 2, 3, 1, 2};
  auto fixed = relabel_canonical(bad);
  CHECK(fixed.x2 > 0);
  // base anchors were (0,0),(0,0),(1,2): permutation (0,2,1) puts (1,2)
  // second, giving x2 = sqrt(5).
  CHECK(std::abs(fixed.x2 - std::sqrt(5.0)) < 1e-12);
  auto again = relabel_canonical(fixed);
  CHECK(std::abs(again.x2 - fixed.x2) < 1e-15);
  CHECK(std::abs(again.x3 - fixed.x3) < 1e-15);

  // A side collapsed to a point can never be relabeled into validity.
  DesignParams collapsed{0, 0, 0, 3, 1, 2};
  CHECK_THROWS_AS(relabel_canonical(collapsed), ArchitectureSingular);
}

TEST_CASE("interpretation tokens round-trip", "[model]") {
  for (const auto& interp : all_interpretations()) {
    auto parsed = parse_interpretation(interp.token());
    REQUIRE(parsed.has_value());
    CHECK(*parsed == interp);
  }
  auto prelim = parse_interpretation("prelim");
  REQUIRE(prelim.has_value());
  CHECK(prelim->preliminary);
  CHECK_FALSE(parse_interpretation("xy").has_value());
  CHECK_FALSE(parse_interpretation("r").has_value());
  CHECK(Interpretation{false, SideMode::Rigid, SideMode::Bars}.token() == "rb");
}
