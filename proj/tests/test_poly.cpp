#include <catch2/catch_amalgamated.hpp>

#include <map>
#include <vector>

#include "singdist/core.hpp"
#include "singdist/poly.hpp"

using namespace singdist;

namespace {

MultiPoly var(int nv, int i) { return MultiPoly::variable(nv, i); }

std::vector<Complex> random_point(int nv, KeyedRng& rng) {
  std::vector<Complex> v(nv);
  for (auto& z : v) z = rng.complex_box(2.0);
  return v;
}

}  // namespace

TEST_CASE("arithmetic matches direct computation", "[poly]") {
  // f = 3 x^2 y - 2 y z^3 + 5, g = x y - z + 1
  const int nv = 3;
  MultiPoly x = var(nv, 0), y = var(nv, 1), z = var(nv, 2);
  MultiPoly f = 3.0 * (x * x * y) - 2.0 * (y * z * z * z) + MultiPoly::constant(nv, 5.0);
  MultiPoly g = x * y - z + MultiPoly::constant(nv, 1.0);

  KeyedRng rng(7, {rngkey::kTest, 1});
  for (int trial = 0; trial < 20; ++trial) {
    auto p = random_point(nv, rng);
    Complex X = p[0], Y = p[1], Z = p[2];
    Complex fv = 3.0 * X * X * Y - 2.0 * Y * Z * Z * Z + 5.0;
    Complex gv = X * Y - Z + 1.0;
    CHECK(std::abs(f.evaluate(p) - fv) < 1e-12 * (1 + std::abs(fv)));
    CHECK(std::abs((f + g).evaluate(p) - (fv + gv)) < 1e-12 * (1 + std::abs(fv + gv)));
    CHECK(std::abs((f - g).evaluate(p) - (fv - gv)) < 1e-12 * (1 + std::abs(fv - gv)));
    CHECK(std::abs((f * g).evaluate(p) - fv * gv) < 1e-10 * (1 + std::abs(fv * gv)));
  }
  CHECK(f.total_degree() == 4);
  CHECK(f.degree_in(0) == 2);
  CHECK(f.degree_in(2) == 3);
}

TEST_CASE("cancellation removes terms", "[poly]") {
  const int nv = 2;
  MultiPoly x = var(nv, 0), y = var(nv, 1);
  MultiPoly f = x * y - x * y;
  CHECK(f.is_zero());
  MultiPoly g = (x + y) * (x - y) - x * x + y * y;
  CHECK(g.is_zero());
}

TEST_CASE("differentiate agrees with finite differences", "[poly]") {
  const int nv = 3;
  MultiPoly x = var(nv, 0), y = var(nv, 1), z = var(nv, 2);
  MultiPoly f = (x * x * y) * 2.0 + x * z * z - y * y * y + MultiPoly::constant(nv, 4.0) + x * y * z;

  KeyedRng rng(9, {rngkey::kTest, 2});
  for (int v = 0; v < nv; ++v) {
    MultiPoly df = f.differentiate(v);
    for (int trial = 0; trial < 5; ++trial) {
      auto p = random_point(nv, rng);
      const double h = 1e-6;
      auto ph = p;
      auto pl = p;
      ph[v] += h;
      pl[v] -= h;
      Complex fd = (f.evaluate(ph) - f.evaluate(pl)) / (2 * h);
      CHECK(std::abs(df.evaluate(p) - fd) < 1e-6 * (1 + std::abs(fd)));
    }
  }
  // Exact check: d/dx (x^3 y) = 3 x^2 y.
  MultiPoly q = (x * x * x) * y;
  MultiPoly dq = q.differentiate(0);
  MultiPoly expect = 3.0 * (x * x * y);
  CHECK((dq - expect).is_zero());
}

TEST_CASE("substitute composes polynomials", "[poly]") {
  const int nv = 2;
  MultiPoly x = var(nv, 0), y = var(nv, 1);
  MultiPoly f = x * x + x * y + MultiPoly::constant(nv, 1.0);
  MultiPoly repl = y + MultiPoly::constant(nv, 1.0);  // x := y + 1
  MultiPoly g = f.substitute(0, repl);
  CHECK(g.degree_in(0) == 0);

  KeyedRng rng(11, {rngkey::kTest, 3});
  for (int trial = 0; trial < 10; ++trial) {
    auto p = random_point(nv, rng);
    Complex X = p[1] + 1.0, Y = p[1];
    Complex expect = X * X + X * Y + 1.0;
    CHECK(std::abs(g.evaluate(p) - expect) < 1e-12 * (1 + std::abs(expect)));
  }
}

TEST_CASE("error taxonomy of the polynomial layer", "[poly]") {
  const int nv = 2;
  MultiPoly f = var(nv, 0) * var(nv, 1);
  CHECK_THROWS_AS(MultiPoly::variable(nv, 5), UnknownVariable);
  CHECK_THROWS_AS(f.differentiate(7), UnknownVariable);
  std::vector<Complex> short_point{Complex{1.0}};
  CHECK_THROWS_AS(f.evaluate(std::span<const Complex>(short_point)), ArityMismatch);
  MultiPoly other(3);
  CHECK_THROWS_AS(f + other, ArityMismatch);
  std::map<int, Complex> partial{{0, Complex{1.0}}};
  CHECK_THROWS_AS(f.evaluate(partial), MissingAssignment);
  std::map<int, Complex> full{{0, Complex{2.0}}, {1, Complex{3.0}}};
  CHECK(std::abs(f.evaluate(full) - Complex{6.0}) < 1e-14);
}

TEST_CASE("jacobian entries are the partial derivatives", "[poly]") {
  const int nv = 3;  // unknowns x,y; parameter p
  MultiPoly x = var(nv, 0), y = var(nv, 1), p = var(nv, 2);
  std::vector<MultiPoly> eqs{x * x * y + p, x * y - p * y};
  auto J = jacobian(eqs, 2);
  REQUIRE(J.size() == 2);
  REQUIRE(J[0].size() == 2);
  CHECK((J[0][0] - 2.0 * (x * y)).is_zero());
  CHECK((J[0][1] - x * x).is_zero());
  CHECK((J[1][0] - y).is_zero());
  CHECK((J[1][1] - (x - p)).is_zero());
}

TEST_CASE("rendering is deterministic and readable", "[poly]") {
  const int nv = 2;
  MultiPoly x = var(nv, 0), y = var(nv, 1);
  MultiPoly f = x * x - 2.0 * y + MultiPoly::constant(nv, 1.0);
  CHECK(f.to_string({"x", "y"}) == "(1)*x^2 + (-2)*y + (1)");
}
