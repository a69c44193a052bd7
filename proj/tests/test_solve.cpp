#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <span>
#include <vector>

#include "singdist/core.hpp"
#include "singdist/family.hpp"
#include "singdist/lagrangian.hpp"
#include "singdist/seeding.hpp"
#include "singdist/solve.hpp"
#include "singdist/tracker.hpp"

using namespace singdist;

namespace {

/// x^2 - p, y^2 - q: two unknowns, two parameters, fibers {±sqrt(p)} x {±sqrt(q)}.
ParameterizedSystem toy_system() {
  ParameterizedSystem ps;
  ps.n_unknowns = 2;
  ps.names = {"x", "y", "p", "q"};
  MultiPoly x = MultiPoly::variable(4, 0), y = MultiPoly::variable(4, 1);
  MultiPoly p = MultiPoly::variable(4, 2), q = MultiPoly::variable(4, 3);
  ps.equations = {x * x - p, y * y - q};
  return ps;
}

}  // namespace

TEST_CASE("compiled family reproduces symbolic evaluation", "[solve]") {
  auto interp = *parse_interpretation("bb");
  auto cs = build_system(interp, {BranchKind::SingVariety, 0});
  CompiledFamily fam(cs.sys);
  REQUIRE(fam.n_unknowns() == cs.sys.n_unknowns);
  REQUIRE(fam.n_equations() == static_cast<int>(cs.sys.equations.size()));
  REQUIRE(fam.n_parameters() == cs.sys.n_params());

  KeyedRng rng(7, {rngkey::kTest, 40});
  auto jac = jacobian(cs.sys.equations, cs.sys.n_unknowns);
  EvalWorkspace ws;
  for (int trial = 0; trial < 3; ++trial) {
    std::vector<Complex> full(cs.sys.n_vars());
    for (auto& v : full) v = rng.generic_complex();
    Eigen::VectorXcd x(fam.n_unknowns());
    for (int i = 0; i < fam.n_unknowns(); ++i) x(i) = full[i];
    std::span<const Complex> params(full.data() + fam.n_unknowns(), fam.n_parameters());

    Eigen::VectorXcd coefs = fam.coefficients(params);
    Eigen::VectorXcd r;
    Eigen::MatrixXcd J;
    fam.residual_jacobian(coefs, x, r, J, ws);

    for (int e = 0; e < fam.n_equations(); ++e) {
      Complex want = cs.sys.equations[e].evaluate(std::span<const Complex>(full));
      CHECK(std::abs(r(e) - want) < 1e-10 * (1 + std::abs(want)));
      for (int v = 0; v < fam.n_unknowns(); ++v) {
        Complex dj = jac[e][v].evaluate(std::span<const Complex>(full));
        CHECK(std::abs(J(e, v) - dj) < 1e-10 * (1 + std::abs(dj)));
      }
    }
  }
}

TEST_CASE("total-degree solve finds all toy roots", "[solve]") {
  auto ps = toy_system();
  CompiledFamily fam(ps);
  KeyedRng rng(11, {rngkey::kTest, 41});
  std::vector<Complex> pv{Complex{2.0, 1.0}, Complex{-1.0, 3.0}};
  auto res = total_degree_solve(fam, fam.coefficients(pv), {2, 2}, rng);
  REQUIRE(res.n_paths == 4);
  CHECK(res.n_failed == 0);
  REQUIRE(res.solutions.size() == 4);
  Complex sp = std::sqrt(pv[0]), sq = std::sqrt(pv[1]);
  for (const auto& s : res.solutions) {
    CHECK(std::min(std::abs(s(0) - sp), std::abs(s(0) + sp)) < 1e-8);
    CHECK(std::min(std::abs(s(1) - sq), std::abs(s(1) + sq)) < 1e-8);
  }

  CHECK_THROWS_AS(total_degree_solve(fam, fam.coefficients(pv), {2, 2}, rng, {}, 3), BudgetExceeded);
}

TEST_CASE("segment transport carries a fiber between parameter points", "[solve]") {
  auto ps = toy_system();
  CompiledFamily fam(ps);
  KeyedRng rng(13, {rngkey::kTest, 42});
  std::vector<Complex> from{Complex{1.0}, Complex{4.0}};
  std::vector<Complex> to{Complex{9.0}, Complex{16.0}};
  std::vector<Eigen::VectorXcd> fiber;
  for (double sx : {1.0, -1.0})
    for (double sy : {2.0, -2.0}) {
      Eigen::VectorXcd v(2);
      v << Complex{sx}, Complex{sy};
      fiber.push_back(v);
    }
  auto moved = transport_fiber(fam, from, to, fiber, rng);
  REQUIRE(moved.n_failed == 0);
  for (std::size_t i = 0; i < fiber.size(); ++i) {
    REQUIRE(moved.tracked[i].has_value());
    // Straight-line continuation scales each square root continuously, so
    // signs are preserved leg by leg.
    CHECK(std::abs((*moved.tracked[i])(0) - 3.0 * fiber[i](0)) < 1e-7);
    CHECK(std::abs((*moved.tracked[i])(1) - 2.0 * fiber[i](1)) < 1e-7);
  }
}

TEST_CASE("reversal seeds are exact members for every branch", "[solve]") {
  KeyedRng rng(17, {rngkey::kTest, 43});
  EvalWorkspace ws;
  auto check = [&](const Interpretation& interp, const BranchSpec& b) {
    auto cs = build_system(interp, b);
    CompiledFamily fam(cs.sys);
    auto [x, params] = reversal_seed(cs, rng);
    Eigen::VectorXcd r;
    fam.residual(fam.coefficients(params), x, r, ws);
    INFO(interp.token() << " " << branch_tag(b));
    CHECK(r.lpNorm<Eigen::Infinity>() < 1e-8);
  };
  for (const auto& interp : all_interpretations())
    for (const auto& b : applicable_branches(interp)) check(interp, b);
  Interpretation prelim{true, SideMode::Bars, SideMode::Bars};
  check(prelim, {BranchKind::SingVariety, 0});
}

TEST_CASE("monodromy populates small fibers to their expected counts", "[solve]") {
  KeyedRng rng(19, {rngkey::kTest, 44});
  auto run = [&](const char* tok, BranchKind kind, int sub, int expected) {
    auto interp = *parse_interpretation(tok);
    auto cs = build_system(interp, {kind, sub});
    CompiledFamily fam(cs.sys);
    MonodromySettings ms;
    ms.expected = expected;
    auto res = monodromy_solve(fam, make_reversal_seeder(cs), make_param_sampler(cs), rng, ms);
    INFO(tok << " " << branch_tag({kind, sub}) << " loops " << res.loops);
    CHECK(static_cast<int>(res.solutions.size()) == expected);

    // Every fiber point solves the system at the base parameters.
    EvalWorkspace ws;
    Eigen::VectorXcd r;
    auto cv = fam.coefficients(res.base_params);
    for (const auto& s : res.solutions) {
      fam.residual(cv, s, r, ws);
      CHECK(r.lpNorm<Eigen::Infinity>() < 1e-7);
    }
  };
  run("bb", BranchKind::CollinearityP, 0, 2);
  run("rb", BranchKind::CollapsedP, 0, 2);
  run("rb", BranchKind::CollinearityP, 0, 8);
  run("tt", BranchKind::Case1, 0, 8);
}
