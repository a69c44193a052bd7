#pragma once
// Predictor/corrector path tracking for polynomial homotopies.
//
// A homotopy type supplies residual, Jacobian, and the partial derivative of
// the residual with respect to the path parameter sigma in [0, 1] (0 = start
// system, 1 = target system). The tracker integrates the Davidenko equation
//   J(x, sigma) dx/dsigma = -dH/dsigma
// with classical RK4 prediction, corrects with a short Newton loop, and
// adapts the step: halve on failed correction, double after four clean steps.
// Near the target the step is capped by half the remaining arc so endpoints
// are approached geometrically rather than overshot.

#include <Eigen/Dense>
#include <limits>
#include <cmath>

#include "singdist/core.hpp"
#include "singdist/family.hpp"

namespace singdist {

struct TrackSettings {
  double tol = 1e-8;         ///< Newton residual target along the path
  double final_tol = 1e-10;  ///< residual target for the endpoint polish
  double h0 = 0.05;          ///< initial step in sigma
  double hmax = 0.2;         ///< step growth cap
  double hmin = 1e-14;       ///< below this the path is abandoned
  double divergence = 1e10;  ///< infinity-norm bail-out
  double endgame = 0.9;      ///< sigma beyond which steps are capped geometrically
  int newton_iters = 3;
  int max_steps = 20000;
};

enum class TrackOutcome { Success, Diverged, MinStep, MaxSteps };

struct TrackResult {
  TrackOutcome outcome = TrackOutcome::MinStep;
  Eigen::VectorXcd x;
  double sigma = 0;
  int steps = 0;

  bool ok() const { return outcome == TrackOutcome::Success; }
};

/// Straight segment between two coefficient vectors of one family, bent into
/// the complex plane by gamma so the real discriminant is avoided for all but
/// finitely many gamma.
class SegmentHomotopy {
 public:
  SegmentHomotopy(const CompiledFamily& fam, Eigen::VectorXcd start, Eigen::VectorXcd target, Complex gamma)
      : fam_(&fam), start_(std::move(start)), target_(std::move(target)), gamma_(gamma) {}

  int n_unknowns() const { return fam_->n_unknowns(); }

  void residual(double sigma, const Eigen::VectorXcd& x, Eigen::VectorXcd& r, EvalWorkspace& ws) const {
    fam_->residual(blend(sigma), x, r, ws);
  }

  void residual_jacobian(double sigma, const Eigen::VectorXcd& x, Eigen::VectorXcd& r, Eigen::MatrixXcd& J,
                         EvalWorkspace& ws) const {
    fam_->residual_jacobian(blend(sigma), x, r, J, ws);
  }

  /// dH/dsigma shares the residual structure: evaluate with d(coefs)/dsigma.
  void sigma_derivative(double sigma, const Eigen::VectorXcd& x, Eigen::VectorXcd& r, EvalWorkspace& ws) const {
    Complex den = sigma + (1.0 - sigma) * gamma_;
    Complex du = gamma_ / (den * den);
    Eigen::VectorXcd dc = du * (target_ - start_);
    fam_->residual(dc, x, r, ws);
  }

 private:
  Eigen::VectorXcd blend(double sigma) const {
    Complex den = sigma + (1.0 - sigma) * gamma_;
    Complex u = sigma / den;
    return (1.0 - u) * start_ + u * target_;
  }

  const CompiledFamily* fam_;
  Eigen::VectorXcd start_, target_;
  Complex gamma_;
};

/// Classical start system x_i^{d_i} - r_i blended into a fixed member system:
///   H(x, sigma) = (1 - sigma) * gamma * S(x) + sigma * F(x)
class TotalDegreeHomotopy {
 public:
  TotalDegreeHomotopy(const CompiledFamily& fam, Eigen::VectorXcd target_coefs, std::vector<int> degrees,
                      std::vector<Complex> roots, Complex gamma)
      : fam_(&fam),
        coefs_(std::move(target_coefs)),
        deg_(std::move(degrees)),
        rhs_(std::move(roots)),
        gamma_(gamma) {}

  int n_unknowns() const { return fam_->n_unknowns(); }

  void residual(double sigma, const Eigen::VectorXcd& x, Eigen::VectorXcd& r, EvalWorkspace& ws) const {
    fam_->residual(coefs_, x, r, ws);
    r *= sigma;
    Complex g = (1.0 - sigma) * gamma_;
    for (int i = 0; i < n_unknowns(); ++i) r(i) += g * (ipow(x(i), deg_[i]) - rhs_[i]);
  }

  void residual_jacobian(double sigma, const Eigen::VectorXcd& x, Eigen::VectorXcd& r, Eigen::MatrixXcd& J,
                         EvalWorkspace& ws) const {
    fam_->residual_jacobian(coefs_, x, r, J, ws);
    r *= sigma;
    J *= sigma;
    Complex g = (1.0 - sigma) * gamma_;
    for (int i = 0; i < n_unknowns(); ++i) {
      r(i) += g * (ipow(x(i), deg_[i]) - rhs_[i]);
      J(i, i) += g * static_cast<double>(deg_[i]) * ipow(x(i), deg_[i] - 1);
    }
  }

  void sigma_derivative(double sigma, const Eigen::VectorXcd& x, Eigen::VectorXcd& r, EvalWorkspace& ws) const {
    (void)sigma;
    fam_->residual(coefs_, x, r, ws);
    for (int i = 0; i < n_unknowns(); ++i) r(i) -= gamma_ * (ipow(x(i), deg_[i]) - rhs_[i]);
  }

 private:
  static Complex ipow(Complex b, int e) {
    Complex v{1.0};
    while (e-- > 0) v *= b;
    return v;
  }

  const CompiledFamily* fam_;
  Eigen::VectorXcd coefs_;
  std::vector<int> deg_;
  std::vector<Complex> rhs_;
  Complex gamma_;
};

namespace detail {

/// Newton correction at fixed sigma; returns the final residual norm.
/// Newton refinement outcome: final residual plus the size of the last update
/// relative to the iterate. Solutions of large magnitude can sit above any
/// absolute residual floor (roundoff grows with the monomial values), so
/// convergence is also recognized by the update shrinking to relative noise.
struct NewtonReport {
  double resid = std::numeric_limits<double>::infinity();
  double step_rel = std::numeric_limits<double>::infinity();

  bool converged(double tol) const { return std::isfinite(resid) && (resid < tol || step_rel < tol); }
};

template <class H>
NewtonReport newton_correct(const H& hom, double sigma, Eigen::VectorXcd& x, int iters, double tol,
                            EvalWorkspace& ws) {
  Eigen::VectorXcd r;
  Eigen::MatrixXcd J;
  NewtonReport rep;
  for (int it = 0; it < iters; ++it) {
    hom.residual_jacobian(sigma, x, r, J, ws);
    rep.resid = r.lpNorm<Eigen::Infinity>();
    if (!std::isfinite(rep.resid)) return rep;
    if (rep.resid < tol) {
      rep.step_rel = 0;
      return rep;
    }
    Eigen::VectorXcd dx = J.partialPivLu().solve(-r);
    if (!dx.allFinite()) {
      rep.resid = std::numeric_limits<double>::infinity();
      return rep;
    }
    x += dx;
    rep.step_rel = dx.lpNorm<Eigen::Infinity>() / std::max(1.0, x.lpNorm<Eigen::Infinity>());
  }
  hom.residual(sigma, x, r, ws);
  rep.resid = r.lpNorm<Eigen::Infinity>();
  return rep;
}

}  // namespace detail

/// Tracks one solution of the start system (sigma = 0) to the target
/// (sigma = 1). Never throws for per-path failures; inspect the outcome.
template <class H>
TrackResult track_path(const H& hom, Eigen::VectorXcd x, const TrackSettings& st, EvalWorkspace& ws) {
  TrackResult res;
  res.x = std::move(x);

  Eigen::VectorXcd r, rt;
  Eigen::MatrixXcd J;
  auto slope = [&](double sigma, const Eigen::VectorXcd& at, Eigen::VectorXcd& out) -> bool {
    hom.residual_jacobian(sigma, at, r, J, ws);
    hom.sigma_derivative(sigma, at, rt, ws);
    out = J.partialPivLu().solve(-rt);
    return out.allFinite();
  };

  double sigma = 0;
  double h = st.h0;
  int clean = 0;
  Eigen::VectorXcd k1, k2, k3, k4, xp;

  while (sigma < 1.0) {
    if (res.steps++ >= st.max_steps) {
      res.outcome = TrackOutcome::MaxSteps;
      res.sigma = sigma;
      return res;
    }
    double remaining = 1.0 - sigma;
    double step = std::min(h, remaining);
    if (sigma > st.endgame && remaining > 1e-3) step = std::min(step, remaining / 2);

    bool ok = slope(sigma, res.x, k1);
    if (ok) ok = slope(sigma + step / 2, res.x + (step / 2) * k1, k2);
    if (ok) ok = slope(sigma + step / 2, res.x + (step / 2) * k2, k3);
    if (ok) ok = slope(sigma + step, res.x + step * k3, k4);
    if (ok) {
      xp = res.x + (step / 6) * (k1 + 2 * k2 + 2 * k3 + k4);
      ok = detail::newton_correct(hom, sigma + step, xp, st.newton_iters, st.tol, ws).converged(st.tol);
    }

    if (!ok) {
      h = step / 2;
      clean = 0;
      if (h < st.hmin) {
        res.outcome = TrackOutcome::MinStep;
        res.sigma = sigma;
        return res;
      }
      continue;
    }

    res.x = xp;
    sigma += step;
    if (res.x.lpNorm<Eigen::Infinity>() > st.divergence) {
      res.outcome = TrackOutcome::Diverged;
      res.sigma = sigma;
      return res;
    }
    if (++clean >= 4) {
      h = std::min(2 * h, st.hmax);
      clean = 0;
    }
  }

  detail::NewtonReport rep = detail::newton_correct(hom, 1.0, res.x, 10, st.final_tol, ws);
  res.sigma = 1.0;
  res.outcome = (std::isfinite(rep.resid) && (rep.resid < st.tol || rep.step_rel < 0.01 * st.tol))
                    ? TrackOutcome::Success
                    : TrackOutcome::MinStep;
  return res;
}

/// Draws a segment arc factor: unit modulus, argument kept away from the real
/// axis so the bent segment stays clear of real discriminant crossings.
inline Complex draw_gamma(KeyedRng& rng) {
  for (;;) {
    Complex g = rng.unit_complex();
    if (std::abs(g.imag()) > 0.2) return g;
  }
}

}  // namespace singdist
