#pragma once
// Solution-set plumbing on top of the path tracker: ab-initio solving of one
// member system (total degree or monodromy), transporting a solved fiber to
// other parameter points, and extracting polished real solutions.

#include <Eigen/Dense>
#include <limits>
#include <cmath>
#include <functional>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "singdist/core.hpp"
#include "singdist/family.hpp"
#include "singdist/tracker.hpp"

namespace singdist {

/// Componentwise relative closeness with an absolute floor at 1.
inline bool points_close(const Eigen::VectorXcd& a, const Eigen::VectorXcd& b, double tol) {
  if (a.size() != b.size()) return false;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    double scale = std::max({1.0, std::abs(a(i)), std::abs(b(i))});
    if (std::abs(a(i) - b(i)) > tol * scale) return false;
  }
  return true;
}

/// Deduplicated collection of complex solution vectors.
class SolutionSet {
 public:
  explicit SolutionSet(double tol = 1e-8) : tol_(tol) {}

  /// Returns true when the point was new.
  bool add(const Eigen::VectorXcd& x) {
    for (const auto& p : pts_)
      if (points_close(p, x, tol_)) return false;
    pts_.push_back(x);
    return true;
  }

  bool contains(const Eigen::VectorXcd& x) const {
    for (const auto& p : pts_)
      if (points_close(p, x, tol_)) return true;
    return false;
  }

  int size() const { return static_cast<int>(pts_.size()); }
  const std::vector<Eigen::VectorXcd>& points() const { return pts_; }

 private:
  double tol_;
  std::vector<Eigen::VectorXcd> pts_;
};

// ---------------------------------------------------------------------------
// Total-degree start systems.
// ---------------------------------------------------------------------------

struct TotalDegreeResult {
  std::vector<Eigen::VectorXcd> solutions;
  int n_paths = 0;
  int n_failed = 0;  ///< paths that neither converged nor diverged cleanly
};

/// Solves the member system with coefficient vector `coefs` by tracking every
/// root of x_i^{d_i} = r_i. `degrees` are per-equation total degrees; their
/// product must stay within `budget` paths.
inline TotalDegreeResult total_degree_solve(const CompiledFamily& fam, const Eigen::VectorXcd& coefs,
                                            const std::vector<int>& degrees, KeyedRng& rng,
                                            const TrackSettings& ts = {}, long budget = 100000) {
  if (fam.n_equations() != fam.n_unknowns() || static_cast<int>(degrees.size()) != fam.n_equations())
    throw ArityMismatch("total-degree solve needs a square system with per-equation degrees");
  long n_paths = 1;
  for (int d : degrees) {
    if (d < 1) throw ArityMismatch("equation of degree zero");
    n_paths *= d;
    if (n_paths > budget) throw BudgetExceeded("total-degree start system needs " + std::to_string(n_paths) +
                                               "+ paths (budget " + std::to_string(budget) + ")");
  }

  std::vector<Complex> rhs(fam.n_unknowns());
  for (auto& r : rhs) r = rng.generic_complex();
  TotalDegreeHomotopy hom(fam, coefs, degrees, rhs, draw_gamma(rng));

  EvalWorkspace ws;
  SolutionSet found;
  TotalDegreeResult out;
  out.n_paths = static_cast<int>(n_paths);
  std::vector<int> idx(fam.n_unknowns(), 0);
  Eigen::VectorXcd x0(fam.n_unknowns());
  for (long path = 0; path < n_paths; ++path) {
    for (int i = 0; i < fam.n_unknowns(); ++i)
      x0(i) = std::pow(std::abs(rhs[i]), 1.0 / degrees[i]) *
              std::polar(1.0, (std::arg(rhs[i]) + 2.0 * kPi * idx[i]) / degrees[i]);
    auto res = track_path(hom, x0, ts, ws);
    if (res.ok()) {
      if (found.add(res.x)) out.solutions.push_back(res.x);
    } else if (res.outcome != TrackOutcome::Diverged) {
      ++out.n_failed;
    }
    for (int i = fam.n_unknowns() - 1; i >= 0; --i) {
      if (++idx[i] < degrees[i]) break;
      idx[i] = 0;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Monodromy.
// ---------------------------------------------------------------------------

/// Produces one exact member (x, params) of the family with F(x; params) = 0;
/// successive calls draw fresh randomness from the supplied generator.
using SeedFn = std::function<std::pair<Eigen::VectorXcd, std::vector<Complex>>(KeyedRng&)>;

/// Draws a generic complex parameter point of the family.
using ParamSampler = std::function<std::vector<Complex>(KeyedRng&)>;

struct MonodromySettings {
  int expected = -1;     ///< stop at this fiber size; -1 = explore until stalled
  int stall_limit = 20;  ///< stagnant loops before giving up (explore mode)
  int reseed_every = 3;  ///< stagnant loops between fresh seed injections
  int rebase_after = 8;  ///< stagnant loops before moving to a fresh base point
  int max_loops = 200;
  TrackSettings track;
};

struct MonodromyResult {
  std::vector<Eigen::VectorXcd> solutions;
  std::vector<Complex> base_params;
  int loops = 0;
  int seeds_used = 0;
  int paths_tracked = 0;
  int rebases = 0;
};

/// Populates the fiber over the first seed's parameter point by driving the
/// known solutions around random triangle loops in coefficient space. Stops
/// as soon as the expected count is reached; throws CountMismatch if the
/// fiber exceeds it or stalls below it, Stalled when exploring
/// (expected < 0) makes no progress and no count was requested.
inline MonodromyResult monodromy_solve(const CompiledFamily& fam, const SeedFn& seed,
                                       const ParamSampler& sample, KeyedRng& rng,
                                       const MonodromySettings& ms = {}) {
  EvalWorkspace ws;
  MonodromyResult out;
  SolutionSet fiber;

  auto [x0, q0] = seed(rng);
  ++out.seeds_used;
  out.base_params = q0;
  Eigen::VectorXcd cv0 = fam.coefficients(q0);
  {
    Eigen::VectorXcd r;
    fam.residual(cv0, x0, r, ws);
    if (r.lpNorm<Eigen::Infinity>() > 1e-8)
      throw SeedTrackingFailure("seed residual " + fmt9(r.lpNorm<Eigen::Infinity>()));
  }
  fiber.add(x0);
  out.solutions.push_back(x0);

  auto check_overshoot = [&] {
    if (ms.expected > 0 && fiber.size() > ms.expected)
      throw CountMismatch("fiber grew to " + std::to_string(fiber.size()) + " > expected " +
                          std::to_string(ms.expected));
  };
  check_overshoot();

  // A failed hop is retried once along a fresh arc with tightened settings;
  // any successful route between the two fibers is equally valid.
  TrackSettings tight = ms.track;
  tight.tol *= 0.1;
  tight.final_tol = std::min(ms.track.final_tol, tight.tol * 0.01);
  tight.h0 *= 0.1;
  auto hop = [&](const Eigen::VectorXcd& cA, const Eigen::VectorXcd& cB,
                 const Eigen::VectorXcd& x) -> TrackResult {
    SegmentHomotopy seg(fam, cA, cB, draw_gamma(rng));
    auto res = track_path(seg, x, ms.track, ws);
    ++out.paths_tracked;
    if (res.ok()) return res;
    SegmentHomotopy seg2(fam, cA, cB, draw_gamma(rng));
    res = track_path(seg2, x, tight, ws);
    ++out.paths_tracked;
    return res;
  };

  int stagnant = 0;      // loops since anything changed (reset by reseeds too)
  int since_growth = 0;  // loops since the fiber actually grew
  while (out.loops < ms.max_loops) {
    if (ms.expected > 0 && fiber.size() == ms.expected) return out;
    if (stagnant >= ms.stall_limit && ms.expected < 0) break;
    if (ms.expected > 0 && since_growth >= 3 * ms.stall_limit) break;
    ++out.loops;

    // A base point can itself be unlucky (a fiber point stuck behind a badly
    // conditioned region). With a count still outstanding, move the whole
    // fiber to a fresh seed's base and keep looping there.
    if (ms.expected > 0 && stagnant > 0 && stagnant % ms.rebase_after == 0) {
      auto [xs, qs] = seed(rng);
      ++out.seeds_used;
      ++out.rebases;
      Eigen::VectorXcd cvn = fam.coefficients(qs);
      SolutionSet moved;
      std::vector<Eigen::VectorXcd> msol;
      for (const auto& s : out.solutions) {
        auto res = hop(cv0, cvn, s);
        if (res.ok() && moved.add(res.x)) msol.push_back(std::move(res.x));
      }
      if (moved.add(xs)) msol.push_back(xs);
      fiber = std::move(moved);
      out.solutions = std::move(msol);
      out.base_params = qs;
      cv0 = std::move(cvn);
      stagnant = 1;  // keep the reseed cadence alive at the new base
      check_overshoot();
      continue;
    }

    // Fresh seed injection: solve a new random member and carry it into the
    // base fiber along its own segment.
    if (stagnant > 0 && stagnant % ms.reseed_every == 0) {
      auto [xs, qs] = seed(rng);
      ++out.seeds_used;
      auto res = hop(fam.coefficients(qs), cv0, xs);
      if (res.ok() && fiber.add(res.x)) {
        out.solutions.push_back(res.x);
        stagnant = 0;
        since_growth = 0;
        check_overshoot();
        continue;
      }
    }

    // Alternate triangle loops with out-and-back loops (same waypoint, two
    // independent arcs); both shapes permute the base fiber.
    std::vector<Eigen::VectorXcd> way{fam.coefficients(sample(rng))};
    if (out.loops % 2 == 1) way.push_back(fam.coefficients(sample(rng)));
    way.push_back(cv0);

    bool grew = false;
    const auto snapshot = out.solutions;  // loop over a stable copy
    for (const auto& s : snapshot) {
      Eigen::VectorXcd cur = s;
      const Eigen::VectorXcd* from = &cv0;
      bool alive = true;
      for (const auto& wp : way) {
        auto res = hop(*from, wp, cur);
        if (!res.ok()) {
          alive = false;
          break;
        }
        cur = std::move(res.x);
        from = &wp;
      }
      if (!alive) continue;
      if (fiber.add(cur)) {
        out.solutions.push_back(cur);
        grew = true;
        check_overshoot();
        if (ms.expected > 0 && fiber.size() == ms.expected) return out;
      }
    }
    stagnant = grew ? 0 : stagnant + 1;
    since_growth = grew ? 0 : since_growth + 1;
  }

  if (ms.expected > 0)
    throw CountMismatch("monodromy stalled at " + std::to_string(fiber.size()) + " of " +
                        std::to_string(ms.expected) + " after " + std::to_string(out.loops) + " loops");
  if (out.loops >= ms.max_loops)
    throw Stalled("loop budget exhausted at fiber size " + std::to_string(fiber.size()));
  return out;
}

// ---------------------------------------------------------------------------
// Fiber transport and real extraction.
// ---------------------------------------------------------------------------

struct TransportResult {
  std::vector<std::optional<Eigen::VectorXcd>> tracked;  ///< aligned with the input order
  int n_failed = 0;    ///< unresolved paths (step underflow / step budget)
  int n_diverged = 0;  ///< paths that left cleanly for infinity (no endpoint there)
};

/// Tracks every solution of the fiber over `from` to the fiber over `to`.
/// A failed path is retried once with a tighter tolerance, a smaller initial
/// step, and a fresh arc factor.
inline TransportResult transport_fiber(const CompiledFamily& fam, std::span<const Complex> from,
                                       std::span<const Complex> to,
                                       const std::vector<Eigen::VectorXcd>& sols, KeyedRng& rng,
                                       const TrackSettings& ts = {}) {
  EvalWorkspace ws;
  Eigen::VectorXcd cF = fam.coefficients(from), cT = fam.coefficients(to);
  SegmentHomotopy main(fam, cF, cT, draw_gamma(rng));
  TrackSettings retry_ts = ts;
  retry_ts.tol *= 0.1;
  retry_ts.final_tol = std::min(ts.final_tol, retry_ts.tol * 0.01);
  retry_ts.h0 *= 0.1;
  SegmentHomotopy retry(fam, cF, cT, draw_gamma(rng));

  TransportResult out;
  out.tracked.resize(sols.size());
  for (std::size_t i = 0; i < sols.size(); ++i) {
    auto res = track_path(main, sols[i], ts, ws);
    if (!res.ok()) res = track_path(retry, sols[i], retry_ts, ws);
    if (res.ok()) {
      out.tracked[i] = std::move(res.x);
    } else if (res.outcome == TrackOutcome::Diverged) {
      ++out.n_diverged;
    } else {
      ++out.n_failed;
    }
  }
  return out;
}

/// Real solutions of the fiber: small imaginary part, re-polished by Newton
/// on the member system, deduplicated after conjugate pairs collapse.
inline std::vector<Eigen::VectorXd> filter_real(const CompiledFamily& fam, std::span<const Complex> params,
                                                const std::vector<Eigen::VectorXcd>& sols,
                                                double imag_tol = 1e-6, double polish_tol = 1e-10) {
  EvalWorkspace ws;
  Eigen::VectorXcd cv = fam.coefficients(params);
  SolutionSet dedup;
  std::vector<Eigen::VectorXd> out;
  Eigen::VectorXcd r;
  Eigen::MatrixXcd J;
  for (const auto& s : sols) {
    double im = 0;
    for (Eigen::Index i = 0; i < s.size(); ++i)
      im = std::max(im, std::abs(s(i).imag()) / std::max(1.0, std::abs(s(i))));
    if (im > imag_tol) continue;
    Eigen::VectorXcd x = s.real().cast<Complex>();
    double rn = std::numeric_limits<double>::infinity();
    double step_rel = std::numeric_limits<double>::infinity();
    for (int it = 0; it < 8; ++it) {
      fam.residual_jacobian(cv, x, r, J, ws);
      rn = r.lpNorm<Eigen::Infinity>();
      if (!std::isfinite(rn) || rn < polish_tol) break;
      Eigen::VectorXcd dx = J.partialPivLu().solve(-r);
      if (!dx.allFinite()) break;
      x = (x + dx).real().cast<Complex>();
      step_rel = dx.lpNorm<Eigen::Infinity>() / std::max(1.0, x.lpNorm<Eigen::Infinity>());
    }
    // Accept on a tiny residual, or on the update shrinking to relative noise
    // (large solutions sit above any absolute residual floor).
    if (!(rn < polish_tol) && !(step_rel < polish_tol)) {
      fam.residual(cv, x, r, ws);
      if (!(r.lpNorm<Eigen::Infinity>() < polish_tol)) continue;
    }
    if (dedup.add(x)) out.push_back(x.real());
  }
  return out;
}

}  // namespace singdist
