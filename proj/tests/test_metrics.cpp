#include <catch2/catch_amalgamated.hpp>

#include <array>
#include <cmath>

#include "singdist/core.hpp"
#include "singdist/metrics.hpp"
#include "singdist/model.hpp"

using namespace singdist;

namespace {

// Independent quadrature oracles for the unit terms: the integrand (squared
// norm of an affinely interpolated displacement) is quadratic, so Simpson's
// rule on a segment and the edge-midpoint rule on a triangle are exact.
double seg_quad(const Vec2& di, const Vec2& dj) {
  auto f = [&](double s) { return norm2((1 - s) * di + s * dj); };
  return (f(0) + 4 * f(0.5) + f(1)) / 6.0;
}

double tri_quad(const Vec2& di, const Vec2& dj, const Vec2& dk) {
  return (norm2(0.5 * (di + dj)) + norm2(0.5 * (di + dk)) + norm2(0.5 * (dj + dk))) / 3.0;
}

double oracle_dist2(const MetricPlan& plan, const std::array<Vec2, 6>& d) {
  double sum = 0;
  for (int p : plan.points) sum += norm2(d[p]);
  for (auto& s : plan.segments) sum += seg_quad(d[s[0]], d[s[1]]);
  for (auto& t : plan.triangles) sum += tri_quad(d[t[0]], d[t[1]], d[t[2]]);
  return sum / plan.normalizer;
}

std::array<Vec2, 6> random_config(KeyedRng& rng, double scale = 3.0) {
  std::array<Vec2, 6> k;
  for (auto& p : k) p = {rng.uniform(-scale, scale), rng.uniform(-scale, scale)};
  return k;
}

std::array<Interpretation, 10> all_variants() {
  std::array<Interpretation, 10> out;
  auto nine = all_interpretations();
  for (int i = 0; i < 9; ++i) out[i] = nine[i];
  out[9] = Interpretation{true, SideMode::Bars, SideMode::Bars};
  return out;
}

}  // namespace

TEST_CASE("unit-term counts per interpretation", "[metrics]") {
  auto count = [](const Interpretation& i) { return metric_plan(i).normalizer; };
  CHECK(count({false, SideMode::Rigid, SideMode::Rigid}) == 3);
  CHECK(count({false, SideMode::Rigid, SideMode::Plate}) == 4);
  CHECK(count({false, SideMode::Rigid, SideMode::Bars}) == 6);
  CHECK(count({false, SideMode::Plate, SideMode::Rigid}) == 4);
  CHECK(count({false, SideMode::Bars, SideMode::Rigid}) == 6);
  CHECK(count({false, SideMode::Plate, SideMode::Plate}) == 5);
  CHECK(count({false, SideMode::Plate, SideMode::Bars}) == 7);
  CHECK(count({false, SideMode::Bars, SideMode::Plate}) == 7);
  CHECK(count({false, SideMode::Bars, SideMode::Bars}) == 9);
  CHECK(count({true, SideMode::Bars, SideMode::Bars}) == 6);
  CHECK(nine_point_metric_plan().normalizer == 8);
}

TEST_CASE("metric agrees with quadrature oracle", "[metrics]") {
  KeyedRng rng(21, {rngkey::kTest, 10});
  for (const auto& interp : all_variants()) {
    auto plan = metric_plan(interp);
    for (int trial = 0; trial < 50; ++trial) {
      std::array<Vec2, 6> d;
      for (auto& v : d) v = {rng.uniform(-2, 2), rng.uniform(-2, 2)};
      double lib = metric_dist2(plan, std::span<const Vec2>(d));
      double ora = oracle_dist2(plan, d);
      CHECK(std::abs(lib - ora) < 1e-8 * (1 + std::abs(ora)));
    }
  }
}

TEST_CASE("metric properties: symmetry, identity, invariance, bound", "[metrics]") {
  KeyedRng rng(22, {rngkey::kTest, 11});
  for (const auto& interp : all_variants()) {
    for (int trial = 0; trial < 30; ++trial) {
      auto a = random_config(rng);
      auto b = random_config(rng);
      double dab = extrinsic_dist2(interp, a, b);
      double dba = extrinsic_dist2(interp, b, a);
      CHECK(std::abs(dab - dba) < 1e-12 * (1 + dab));

      CHECK(extrinsic_dist2(interp, a, a) == 0.0);
      CHECK(dab > 0.0);  // distinct random configurations

      // Rigid-motion invariance: apply one rotation + translation to both.
      double th = rng.uniform(0, 2 * kPi);
      Vec2 t{rng.uniform(-2, 2), rng.uniform(-2, 2)};
      auto g = [&](const Vec2& p) {
        return Vec2{std::cos(th) * p.x - std::sin(th) * p.y + t.x, std::sin(th) * p.x + std::cos(th) * p.y + t.y};
      };
      std::array<Vec2, 6> ga, gb;
      for (int i = 0; i < 6; ++i) {
        ga[i] = g(a[i]);
        gb[i] = g(b[i]);
      }
      CHECK(std::abs(extrinsic_dist2(interp, ga, gb) - dab) < 1e-9 * (1 + dab));

      // Uniform translation by v has distance exactly |v|.
      Vec2 v{rng.uniform(-2, 2), rng.uniform(-2, 2)};
      std::array<Vec2, 6> av;
      for (int i = 0; i < 6; ++i) av[i] = a[i] + v;
      CHECK(std::abs(extrinsic_dist2(interp, a, av) - norm2(v)) < 1e-10 * (1 + norm2(v)));

      // Bounded by the largest anchor displacement.
      double mx = 0;
      for (int i = 0; i < 6; ++i) mx = std::max(mx, norm2(b[i] - a[i]));
      CHECK(dab <= mx * (1 + 1e-12));
    }
  }
}

TEST_CASE("reference distances from published-style minimizers", "[metrics]") {
  DesignParams d{11, 5, 7, 3, 1, 2};
  MotionSpec m;
  m.a0 = {5.5, 1.5};
  m.a1 = {0, -1.5};
  m.b1 = {-3, 0};
  m.v = 0;
  m.w = 2 * kPi;
  m.n = 90;
  Configuration K = pose_config(d, m, kPi / 2);

  std::array<Vec2, 6> col1{Vec2{0.1302373, -0.2775441}, Vec2{11.114982, 0.3015644}, Vec2{4.7547798, 6.9759796},
                           Vec2{1.5271323, 1.8504855},  Vec2{2.3464552, 4.4803586}, Vec2{1.6264123, 2.1691557}};
  std::array<Vec2, 6> col2{Vec2{0.3921934, -0.1187466}, Vec2{11.059373, -0.0179767}, Vec2{4.5484332, 7.1367234},
                           Vec2{1.5195164, 1.7968665},  Vec2{2.3515667, 4.5449419},  Vec2{1.6289168, 2.1581914}};
  std::array<Vec2, 6> col3{Vec2{0.1960967, -0.0593733}, Vec2{11.029686, -0.0089883}, Vec2{4.7742166, 7.0683617},
                           Vec2{1.5195164, 1.7968665},  Vec2{2.3515667, 4.5449419},  Vec2{1.6289168, 2.1581914}};

  Interpretation rb{false, SideMode::Rigid, SideMode::Bars};
  Interpretation tb{false, SideMode::Plate, SideMode::Bars};
  Interpretation bb{false, SideMode::Bars, SideMode::Bars};
  CHECK(std::abs(std::sqrt(extrinsic_dist2(rb, K.k, col1)) - 0.5735791) < 1e-6);
  CHECK(std::abs(std::sqrt(extrinsic_dist2(tb, K.k, col2)) - 0.5195729) < 1e-6);
  CHECK(std::abs(std::sqrt(extrinsic_dist2(bb, K.k, col3)) - 0.46807561) < 1e-7);
}

TEST_CASE("nine-anchor metric basics", "[metrics]") {
  KeyedRng rng(23, {rngkey::kTest, 12});
  std::array<Vec2, 9> a, b;
  for (auto& p : a) p = {rng.uniform(-2, 2), rng.uniform(-2, 2)};
  Vec2 v{0.7, -0.4};
  for (int i = 0; i < 9; ++i) b[i] = a[i] + v;
  CHECK(std::abs(rrr_dist2(a, b) - norm2(v)) < 1e-12);
  CHECK(std::abs(rrr_dist2(a, b) - rrr_dist2(b, a)) < 1e-14);
  CHECK(rrr_dist2(a, a) == 0.0);
}
