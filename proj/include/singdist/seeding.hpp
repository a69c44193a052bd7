#pragma once
// Ab-initio seeding of branch systems by parameter reversal.
//
// Every branch system is affine in the reference-anchor parameters, the two
// promoted squared side lengths, and the multipliers, once the geometry
// unknowns and the shape-ratio parameters are fixed. A seed is produced by
//   1. drawing random complex geometry and shape values,
//   2. re-solving one designated geometry coordinate so the parameter-free
//      constraint row (variety / collinearity / direction normalization)
//      vanishes — a univariate root picked off a companion matrix,
//   3. solving the remaining rows, which are jointly affine in
//      [multipliers; reference anchors; promoted lengths], in least squares
//      (minimum norm when underdetermined).
// The pair (x, params) is then an exact member of the family and feeds the
// monodromy loop as its base fiber point.

#include <Eigen/Dense>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "singdist/core.hpp"
#include "singdist/lagrangian.hpp"
#include "singdist/solve.hpp"

namespace singdist {

namespace detail {

inline bool is_multiplier(const std::string& n) { return n == "lam" || n == "mu" || n == "kap"; }

inline bool is_linear_param(const std::string& n) {
  if (n == "lB" || n == "lP") return true;
  return n.size() == 2 && (n[0] == 'a' || n[0] == 'b') && n[1] >= '1' && n[1] <= '9';
}

/// Roots of the univariate restriction of `eq` in variable `var`, all other
/// entries of `vals` held fixed. Coefficients are recovered by interpolation
/// on a complex circle; near-zero leading coefficients are trimmed.
inline std::vector<Complex> univariate_roots(const MultiPoly& eq, int var, std::vector<Complex> vals) {
  int d = eq.degree_in(var);
  if (d <= 0) return {};
  int m = d + 1;
  Eigen::MatrixXcd V(m, m);
  Eigen::VectorXcd y(m);
  const double rho = 1.37;
  for (int k = 0; k < m; ++k) {
    Complex t = std::polar(rho, 2.0 * kPi * k / m + 0.31);
    vals[var] = t;
    Complex p{1.0};
    for (int j = 0; j < m; ++j) {
      V(k, j) = p;
      p *= t;
    }
    y(k) = eq.evaluate(std::span<const Complex>(vals));
  }
  Eigen::VectorXcd c = V.partialPivLu().solve(y);
  double cmax = c.lpNorm<Eigen::Infinity>();
  if (!(cmax > 0)) return {};
  int deg = d;
  while (deg > 0 && std::abs(c(deg)) < 1e-12 * cmax) --deg;
  if (deg == 0) return {};
  Eigen::MatrixXcd comp = Eigen::MatrixXcd::Zero(deg, deg);
  for (int i = 1; i < deg; ++i) comp(i, i - 1) = 1.0;
  for (int i = 0; i < deg; ++i) comp(i, deg - 1) = -c(i) / c(deg);
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(comp, false);
  std::vector<Complex> roots(es.eigenvalues().data(), es.eigenvalues().data() + deg);
  return roots;
}

}  // namespace detail

/// One exact random member (x, params) of a branch family; throws SeedTrackingFailure
/// after repeated degenerate draws. `label` names the family in errors.
inline std::pair<Eigen::VectorXcd, std::vector<Complex>> reversal_seed(const ParameterizedSystem& sys,
                                                                       KeyedRng& rng,
                                                                       const std::string& label) {
  const int nu = sys.n_unknowns;
  const int nv = sys.n_vars();

  // Index bookkeeping: geometry unknowns vs multipliers, affine params vs
  // shape draws.
  std::vector<int> mult_idx, lin_idx;
  for (int i = 0; i < nu; ++i)
    if (detail::is_multiplier(sys.names[i])) mult_idx.push_back(i);
  for (int i = nu; i < nv; ++i)
    if (detail::is_linear_param(sys.names[i])) lin_idx.push_back(i);

  // The parameter-free constraint row is the lam row when present: first
  // constraint row after the geometry gradients. Collapsed branches have no
  // such row (their single constraint carries a promoted length).
  int free_row = -1;
  if (!mult_idx.empty() && sys.names[mult_idx.front()] == "lam")
    free_row = static_cast<int>(sys.equations.size()) - static_cast<int>(mult_idx.size());

  for (int attempt = 0; attempt < 24; ++attempt) {
    std::vector<Complex> vals(nv, Complex{0.0});
    for (int i = 0; i < nu; ++i)
      if (!detail::is_multiplier(sys.names[i])) vals[i] = rng.generic_complex();
    for (int i = nu; i < nv; ++i)
      if (!detail::is_linear_param(sys.names[i])) vals[i] = rng.generic_complex();

    if (free_row >= 0) {
      // Re-solve one geometry coordinate present in the row.
      int var = -1;
      for (int i = 0; i < nu && var < 0; ++i)
        if (!detail::is_multiplier(sys.names[i]) && sys.equations[free_row].degree_in(i) > 0) var = i;
      if (var < 0) continue;
      auto roots = detail::univariate_roots(sys.equations[free_row], var, vals);
      if (roots.empty()) continue;
      vals[var] = roots[rng.next_u64() % roots.size()];
      if (std::abs(vals[var]) > 40.0) continue;
      if (std::abs(sys.equations[free_row].evaluate(std::span<const Complex>(vals))) > 1e-7) continue;
    }

    // Remaining rows are affine in [multipliers; affine params]; solve in
    // least squares with minimum norm.
    std::vector<int> z_idx = mult_idx;
    z_idx.insert(z_idx.end(), lin_idx.begin(), lin_idx.end());
    const int nz = static_cast<int>(z_idx.size());
    const int ne = static_cast<int>(sys.equations.size());
    Eigen::VectorXcd b(ne);
    for (int e = 0; e < ne; ++e) b(e) = sys.equations[e].evaluate(std::span<const Complex>(vals));
    Eigen::MatrixXcd A(ne, nz);
    for (int j = 0; j < nz; ++j) {
      vals[z_idx[j]] = Complex{1.0};
      for (int e = 0; e < ne; ++e)
        A(e, j) = sys.equations[e].evaluate(std::span<const Complex>(vals)) - b(e);
      vals[z_idx[j]] = Complex{0.0};
    }
    Eigen::VectorXcd z = A.completeOrthogonalDecomposition().solve(-b);
    if (!z.allFinite()) continue;
    for (int j = 0; j < nz; ++j) vals[z_idx[j]] = z(j);

    double resid = 0;
    for (int e = 0; e < ne; ++e)
      resid = std::max(resid, std::abs(sys.equations[e].evaluate(std::span<const Complex>(vals))));
    if (resid > 1e-8) continue;

    Eigen::VectorXcd x(nu);
    for (int i = 0; i < nu; ++i) x(i) = vals[i];
    std::vector<Complex> params(vals.begin() + nu, vals.end());
    return {std::move(x), std::move(params)};
  }
  throw SeedTrackingFailure("no nondegenerate reversal seed for " + label);
}

inline std::pair<Eigen::VectorXcd, std::vector<Complex>> reversal_seed(const CriticalSystem& cs,
                                                                       KeyedRng& rng) {
  return reversal_seed(cs.sys, rng, cs.interp.token() + "/" + branch_tag(cs.branch));
}

/// SeedFn adapter for monodromy_solve.
inline SeedFn make_reversal_seeder(const CriticalSystem& cs) {
  return [&cs](KeyedRng& rng) { return reversal_seed(cs, rng); };
}

/// ParamSampler adapter drawing generic complex source parameters.
inline ParamSampler make_param_sampler(const CriticalSystem& cs) {
  return [&cs](KeyedRng& rng) { return source_param_values(cs, rng); };
}

}  // namespace singdist
