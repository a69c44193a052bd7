#pragma once
// Distance pipeline: per (interpretation, branch) family, the four stages
//
//   1. ab-initio   - populate the complete generic fiber over a random
//                    complex source point (monodromy with a known-count
//                    certificate), optionally re-certified at further
//                    random source points by full-fiber transport;
//   2. seeding     - carry the source fiber to a complex pose of the user's
//                    motion, so only the moving-anchor parameters change
//                    during the sweep;
//   3. pose solve  - carry the seed fiber to one real pose, extract real
//                    critical points, take the branch minimum;
//   4. combination - minimum over the interpretation's applicable branches,
//                    with an optional sign from the constraint polynomial.
//
// Deformable-side collinearity branches with a free opposite side bypass the
// homotopy machinery entirely: their minimum is pose independent and the
// minimizer is the pedal construction, both in closed form.
//
// Every random draw is keyed by (run seed, purpose, branch, pose), never by
// call order, so results are identical for any worker count and independent
// of pose ordering.

#include <Eigen/Dense>
#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "singdist/core.hpp"
#include "singdist/family.hpp"
#include "singdist/lagrangian.hpp"
#include "singdist/metrics.hpp"
#include "singdist/model.hpp"
#include "singdist/seeding.hpp"
#include "singdist/solve.hpp"
#include "singdist/tracker.hpp"
#include "singdist/varieties.hpp"

namespace singdist {

// ---------------------------------------------------------------------------
// Stage products and settings.
// ---------------------------------------------------------------------------

/// Stable RNG derivation key of one (interpretation, branch) family.
inline std::uint64_t branch_rng_key(const Interpretation& interp, const BranchSpec& b) {
  return fnv1a(interp.token() + "/" + branch_tag(b));
}

/// One branch family compiled for continuation. The system must outlive every
/// seeder/sampler built from it, so the two always travel together.
struct BranchEngine {
  CriticalSystem cs;
  CompiledFamily fam;

  BranchEngine(const Interpretation& interp, const BranchSpec& branch)
      : cs(build_system(interp, branch)), fam(cs.sys) {}
};

/// Complete generic fiber over one random complex source point.
struct SourceFiber {
  std::vector<Complex> params;
  std::vector<Eigen::VectorXcd> solutions;
  int expected = 0;
  bool from_cache = false;
  // diagnostics of the monodromy run that produced it
  int loops = 0;
  int seeds_used = 0;
  int rebases = 0;
  long paths_tracked = 0;
};

/// Source fiber carried to a complex pose of the concrete design and motion.
struct SeedFiber {
  Complex phi{};  ///< complex motion parameter of the seed pose
  std::vector<Complex> params;
  std::vector<Eigen::VectorXcd> solutions;
};

struct PipelineSettings {
  std::uint64_t seed = 0;
  int workers = 1;
  int certify_sources = 1;  ///< total random source points the fiber count is certified at
  TrackSettings track;
};

/// Optional persistence of source fibers, so the ab-initio stage runs once
/// per family ever. Both hooks may be empty.
struct CacheHooks {
  std::function<std::optional<SourceFiber>(const CriticalSystem&)> load;
  std::function<void(const CriticalSystem&, const SourceFiber&)> store;
};

// ---------------------------------------------------------------------------
// Stage 1: ab-initio.
// ---------------------------------------------------------------------------

/// Populates the branch's generic fiber by monodromy and certifies the count
/// at `certify_sources - 1` further random source points by transporting the
/// whole fiber there (every path must arrive, endpoints must stay distinct).
inline SourceFiber run_ab_initio(const BranchEngine& be, std::uint64_t seed, int certify_sources = 1,
                                 const TrackSettings& ts = {}) {
  const std::uint64_t key = branch_rng_key(be.cs.interp, be.cs.branch);
  const std::string label = be.cs.interp.token() + "/" + branch_tag(be.cs.branch);

  KeyedRng rng(seed, {rngkey::kMonodromy, key});
  MonodromySettings ms;
  ms.expected = be.cs.expected_count;
  ms.track = ts;
  SeedFn seeder = make_reversal_seeder(be.cs);
  ParamSampler sampler = make_param_sampler(be.cs);
  MonodromyResult mr = monodromy_solve(be.fam, seeder, sampler, rng, ms);

  SourceFiber out;
  out.params = std::move(mr.base_params);
  out.solutions = std::move(mr.solutions);
  out.expected = be.cs.expected_count;
  out.loops = mr.loops;
  out.seeds_used = mr.seeds_used;
  out.rebases = mr.rebases;
  out.paths_tracked = mr.paths_tracked;

  KeyedRng crng(seed, {rngkey::kSource, key});
  for (int s = 1; s < certify_sources; ++s) {
    std::vector<Complex> q = source_param_values(be.cs, crng);
    TransportResult tr = transport_fiber(be.fam, out.params, q, out.solutions, crng, ts);
    if (tr.n_failed > 0 || tr.n_diverged > 0)
      throw SeedTrackingFailure(label + ": certification transport " + std::to_string(s) + " lost " +
                                std::to_string(tr.n_failed + tr.n_diverged) + " of " +
                                std::to_string(out.solutions.size()) + " paths");
    SolutionSet distinct;
    int n = 0;
    for (const auto& t : tr.tracked)
      if (t && distinct.add(*t)) ++n;
    if (n != out.expected)
      throw CountMismatch(label + ": certification source " + std::to_string(s) + " carries " +
                          std::to_string(n) + " distinct endpoints, expected " + std::to_string(out.expected));
    out.paths_tracked += static_cast<long>(out.solutions.size());
  }
  return out;
}

/// Re-checks a (possibly cached) fiber against the compiled family: exact
/// count and small residual at every point.
inline bool source_fiber_valid(const BranchEngine& be, const SourceFiber& src, double tol = 1e-7) {
  if (static_cast<int>(src.solutions.size()) != be.cs.expected_count) return false;
  if (static_cast<int>(src.params.size()) != be.fam.n_parameters()) return false;
  EvalWorkspace ws;
  Eigen::VectorXcd cv = be.fam.coefficients(src.params), r;
  for (const auto& x : src.solutions) {
    if (x.size() != be.fam.n_unknowns()) return false;
    be.fam.residual(cv, x, r, ws);
    if (!(r.lpNorm<Eigen::Infinity>() < tol)) return false;
  }
  return true;
}

/// Cache-aware ab-initio: a stored fiber is used only if it still verifies.
inline SourceFiber obtain_source_fiber(const BranchEngine& be, const PipelineSettings& ps,
                                       const CacheHooks& cache = {}) {
  if (cache.load) {
    if (std::optional<SourceFiber> hit = cache.load(be.cs); hit && source_fiber_valid(be, *hit)) {
      hit->from_cache = true;
      hit->expected = be.cs.expected_count;
      return *std::move(hit);
    }
  }
  SourceFiber src = run_ab_initio(be, ps.seed, ps.certify_sources, ps.track);
  if (cache.store) cache.store(be.cs, src);
  return src;
}

// ---------------------------------------------------------------------------
// Stage 2: seeding at a complex pose.
// ---------------------------------------------------------------------------

inline void validate_motion(const MotionSpec& m) {
  if (m.n < 2) throw DegenerateDesign("motion needs at least two samples");
  if (m.v == m.w) throw DegenerateDesign("motion with v == w spans no parameter range");
}

inline void validate_design(const DesignParams& d) {
  if (std::abs(d.x2) < 1e-12 || std::abs(d.x5) < 1e-12)
    throw ArchitectureSingular("first two anchors of a side coincide; relabel the legs first");
}

/// Carries the source fiber to the pose at a random complex motion parameter
/// phi = v - (v - w)(1 - alpha). From here on only the moving-anchor
/// parameters change, and they stay bounded along the sweep. The imaginary
/// part of alpha is kept moderate so the trigonometric factors stay O(1).
inline SeedFiber seed_phase(const BranchEngine& be, const SourceFiber& src, const DesignParams& d,
                            const MotionSpec& m, const PipelineSettings& ps) {
  validate_motion(m);
  validate_design(d);
  KeyedRng rng(ps.seed, {rngkey::kSeedPhase, branch_rng_key(be.cs.interp, be.cs.branch)});
  const double re = rng.uniform(0.15, 0.85);
  const double im = rng.uniform(0.05, 0.25) * (rng.uniform() < 0.5 ? -1.0 : 1.0);
  const Complex alpha{re, im};

  SeedFiber sf;
  sf.phi = m.v - (m.v - m.w) * (Complex(1.0) - alpha);
  sf.params = param_values(be.cs, d, pose_points<Complex>(d, m, sf.phi));

  TransportResult tr = transport_fiber(be.fam, src.params, sf.params, src.solutions, rng, ps.track);
  SolutionSet distinct;
  for (const auto& t : tr.tracked)
    if (t && distinct.add(*t)) sf.solutions.push_back(*t);
  if (tr.n_failed > 0 || static_cast<int>(sf.solutions.size()) != src.expected)
    throw SeedTrackingFailure(be.cs.interp.token() + "/" + branch_tag(be.cs.branch) + ": seed pose carries " +
                              std::to_string(sf.solutions.size()) + " of " + std::to_string(src.expected) +
                              " paths (" + std::to_string(tr.n_failed) + " unresolved)");
  return sf;
}

// ---------------------------------------------------------------------------
// Stage 3: one branch at one real pose.
// ---------------------------------------------------------------------------

/// Minimum of one branch at one pose, plus the path bookkeeping for the run
/// report: n_tracked paths attempted, n_failed unresolved (clean divergences
/// are neither), n_real real critical points after polishing.
struct BranchPose {
  std::string branch;
  double distance = std::numeric_limits<double>::quiet_NaN();
  bool real = false;  ///< a real minimizer exists; false flags a gap
  std::array<Vec2, 6> minimizer{};
  int sign = 0;  ///< side of the branch constraint the query pose lies on
  int n_real = 0;
  int n_tracked = 0;
  int n_failed = 0;
};

inline BranchPose solve_branch_pose(const BranchEngine& be, const SeedFiber& sf, const DesignParams& d,
                                    const std::array<Vec2, 6>& K, const PipelineSettings& ps, double phi) {
  KeyedRng rng(ps.seed,
               {rngkey::kSweep, branch_rng_key(be.cs.interp, be.cs.branch), std::bit_cast<std::uint64_t>(phi)});
  const std::vector<Complex> q = param_values(be.cs, d, K);
  TransportResult tr = transport_fiber(be.fam, sf.params, q, sf.solutions, rng, ps.track);
  std::vector<Eigen::VectorXcd> arrived;
  arrived.reserve(sf.solutions.size());
  for (const auto& t : tr.tracked)
    if (t) arrived.push_back(*t);
  const std::vector<Eigen::VectorXd> reals = filter_real(be.fam, q, arrived);

  BranchPose bp;
  bp.branch = branch_tag(be.cs.branch);
  bp.n_tracked = static_cast<int>(sf.solutions.size());
  bp.n_failed = tr.n_failed;
  bp.n_real = static_cast<int>(reals.size());
  bp.sign = static_cast<int>(branch_sign(be.cs.branch, K));
  double best = std::numeric_limits<double>::infinity();
  for (const auto& u : reals) {
    const std::array<Vec2, 6> kp = reconstruct_closest(be.cs, d, std::span<const double>(u.data(), u.size()));
    const double d2 = extrinsic_dist2(be.cs.interp, K, kp);
    if (d2 < best) {
      best = d2;
      bp.minimizer = kp;
      bp.real = true;
    }
  }
  if (bp.real) bp.distance = std::sqrt(std::max(0.0, best));
  return bp;
}

/// A deformable side's collinearity branch with a free opposite side has a
/// pose-independent minimum and an explicit minimizer; no paths are tracked.
inline bool branch_has_closed_form(const Interpretation& interp, const BranchSpec& b) {
  if (b.kind == BranchKind::CollinearityP)
    return interp.platform == SideMode::Bars && interp.base != SideMode::Rigid;
  if (b.kind == BranchKind::CollinearityB)
    return interp.base == SideMode::Bars && interp.platform != SideMode::Rigid;
  return false;
}

inline BranchPose closed_form_branch_pose(const Interpretation& interp, const DesignParams& d,
                                          const std::array<Vec2, 6>& K, const BranchSpec& b) {
  const Side side = b.kind == BranchKind::CollinearityP ? Side::Platform : Side::Base;
  BranchPose bp;
  bp.branch = branch_tag(b);
  bp.distance = pose_independent_distance(d, interp, side);
  bp.minimizer = pedal_projection(interp, K, side);
  bp.real = true;
  bp.n_real = 1;
  const double c = eval_collinearity(K, side);
  bp.sign = c > 0 ? 1 : (c < 0 ? -1 : 0);
  return bp;
}

// ---------------------------------------------------------------------------
// Stage 4: combination per pose.
// ---------------------------------------------------------------------------

/// All branch minima of one interpretation at one pose plus their combination.
struct DistanceResult {
  int pose_index = -1;  ///< sample index within a sweep, -1 for single poses
  double phi = 0;
  Interpretation interp;
  std::vector<BranchPose> branches;  ///< applicable + feasible, registry order
  double overall = std::numeric_limits<double>::quiet_NaN();
  int overall_index = -1;  ///< branch delivering the overall minimum, -1 = gap
  int sign = 0;            ///< side of the singularity variety the pose lies on
};

/// Per-branch stage diagnostics surfaced in run summaries.
struct StageReport {
  std::string branch;
  int expected = 0;
  int achieved = 0;
  bool closed_form = false;
  bool from_cache = false;
  int loops = 0;
  long paths_tracked = 0;
  int rebases = 0;
};

/// One interpretation with all its stage products, ready to solve poses.
struct PreparedInterpretation {
  Interpretation interp;
  DesignParams design;
  struct Entry {
    BranchSpec spec;
    bool closed_form = false;
    std::unique_ptr<BranchEngine> engine;  // null for closed-form entries
    SourceFiber source;
    SeedFiber seed;
  };
  std::vector<Entry> entries;
  std::vector<StageReport> stages;
  std::vector<std::string> infeasible;  ///< applicable branches this design cannot realize
};

/// Runs stages 1-2 for every applicable branch of the interpretation.
/// A non-empty `only_branches` keeps just the applicable branches whose tag
/// is listed (a solve restricted to families of interest); empty keeps all.
inline PreparedInterpretation prepare_interpretation(const Interpretation& interp, const DesignParams& d,
                                                     const MotionSpec& m, const PipelineSettings& ps,
                                                     const CacheHooks& cache = {},
                                                     std::span<const std::string> only_branches = {}) {
  validate_motion(m);
  validate_design(d);
  PreparedInterpretation prep;
  prep.interp = interp;
  prep.design = d;
  for (const BranchSpec& b : applicable_branches(interp)) {
    if (!only_branches.empty() &&
        std::find(only_branches.begin(), only_branches.end(), branch_tag(b)) == only_branches.end())
      continue;
    if (!branch_feasible(interp, b, d)) {
      prep.infeasible.push_back(branch_tag(b));
      continue;
    }
    PreparedInterpretation::Entry e;
    e.spec = b;
    StageReport rep;
    rep.branch = branch_tag(b);
    rep.expected = expected_count(interp, b);
    if (branch_has_closed_form(interp, b)) {
      e.closed_form = true;
      rep.closed_form = true;
    } else {
      e.engine = std::make_unique<BranchEngine>(interp, b);
      e.source = obtain_source_fiber(*e.engine, ps, cache);
      e.seed = seed_phase(*e.engine, e.source, d, m, ps);
      rep.achieved = static_cast<int>(e.source.solutions.size());
      rep.from_cache = e.source.from_cache;
      rep.loops = e.source.loops;
      rep.paths_tracked = e.source.paths_tracked;
      rep.rebases = e.source.rebases;
    }
    prep.stages.push_back(std::move(rep));
    prep.entries.push_back(std::move(e));
  }
  return prep;
}

/// Solves every branch at one real pose and combines the minima.
inline DistanceResult solve_pose(const PreparedInterpretation& prep, const MotionSpec& m, double phi,
                                 const PipelineSettings& ps) {
  const std::array<Vec2, 6> K = pose_points<double>(prep.design, m, phi);
  DistanceResult dr;
  dr.phi = phi;
  dr.interp = prep.interp;
  for (const auto& e : prep.entries) {
    dr.branches.push_back(e.closed_form ? closed_form_branch_pose(prep.interp, prep.design, K, e.spec)
                                        : solve_branch_pose(*e.engine, e.seed, prep.design, K, ps, phi));
  }
  const double v = eval_variety(K);
  dr.sign = v > 0 ? 1 : (v < 0 ? -1 : 0);
  for (int i = 0; i < static_cast<int>(dr.branches.size()); ++i) {
    const BranchPose& b = dr.branches[i];
    if (b.real && (dr.overall_index < 0 || b.distance < dr.overall)) {
      dr.overall = b.distance;
      dr.overall_index = i;
    }
  }
  return dr;
}

// ---------------------------------------------------------------------------
// Sweeps.
// ---------------------------------------------------------------------------

namespace detail {
/// Index-deterministic parallel loop: every job runs regardless of failures
/// elsewhere; the lowest-index failure is rethrown after the join.
inline void parallel_for(int n, int workers, const std::function<void(int)>& fn) {
  if (n <= 0) return;
  workers = std::max(1, std::min(workers, n));
  std::vector<std::exception_ptr> errs(static_cast<std::size_t>(n));
  if (workers == 1) {
    for (int i = 0; i < n; ++i) {
      try {
        fn(i);
      } catch (...) {
        errs[i] = std::current_exception();
      }
    }
  } else {
    std::atomic<int> next{0};
    auto run = [&] {
      for (int i; (i = next.fetch_add(1)) < n;) {
        try {
          fn(i);
        } catch (...) {
          errs[i] = std::current_exception();
        }
      }
    };
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) pool.emplace_back(run);
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errs)
    if (e) std::rethrow_exception(e);
}
}  // namespace detail

/// One interpretation swept over all sample poses of the motion.
struct SweepOutcome {
  Interpretation interp;
  std::vector<DistanceResult> poses;
  std::vector<StageReport> stages;
  std::vector<std::string> infeasible;
};

inline SweepOutcome sweep_interpretation(const Interpretation& interp, const DesignParams& d,
                                         const MotionSpec& m, const PipelineSettings& ps,
                                         const CacheHooks& cache = {},
                                         std::span<const std::string> only_branches = {}) {
  const PreparedInterpretation prep = prepare_interpretation(interp, d, m, ps, cache, only_branches);
  SweepOutcome out;
  out.interp = interp;
  out.stages = prep.stages;
  out.infeasible = prep.infeasible;
  out.poses.resize(static_cast<std::size_t>(m.n));
  detail::parallel_for(m.n, ps.workers, [&](int j) {
    out.poses[j] = solve_pose(prep, m, m.phi_at(j), ps);
    out.poses[j].pose_index = j;
  });
  return out;
}

/// Stand-alone evaluation at one motion parameter (stages 1-2 included).
inline DistanceResult distance_at(const Interpretation& interp, const DesignParams& d, const MotionSpec& m,
                                  double phi, const PipelineSettings& ps, const CacheHooks& cache = {},
                                  std::span<const std::string> only_branches = {}) {
  const PreparedInterpretation prep = prepare_interpretation(interp, d, m, ps, cache, only_branches);
  return solve_pose(prep, m, phi, ps);
}

// ---------------------------------------------------------------------------
// CSV serialization.
// ---------------------------------------------------------------------------

inline constexpr const char* kDistanceCsvHeader =
    "phi,interpretation,branch,distance,sign,c1,d1,c2,d2,c3,d3,c4,d4,c5,d5,c6,d6,n_real,n_tracked,n_failed";

namespace detail {
inline void append_distance_row(std::string& out, double phi, const std::string& interp_token,
                                const std::string& branch, double distance, int sign, bool signed_output,
                                bool has_minimizer, const std::array<Vec2, 6>& minimizer, int n_real,
                                int n_tracked, int n_failed) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  out += fmt9(phi);
  out += ',';
  out += interp_token;
  out += ',';
  out += branch;
  out += ',';
  out += fmt9(distance);
  out += ',';
  if (signed_output) out += std::to_string(sign);
  for (int i = 0; i < 6; ++i) {
    out += ',';
    out += fmt9(has_minimizer ? minimizer[i].x : nan);
    out += ',';
    out += fmt9(has_minimizer ? minimizer[i].y : nan);
  }
  out += ',' + std::to_string(n_real) + ',' + std::to_string(n_tracked) + ',' + std::to_string(n_failed);
  out += '\n';
}
}  // namespace detail

/// Rows of one pose: every branch, then the combined "overall" row (path
/// counters summed). Deterministic function of the results alone.
inline void append_distance_rows(std::string& out, const DistanceResult& dr, bool signed_output) {
  const std::string tok = dr.interp.token();
  int n_real = 0, n_tracked = 0, n_failed = 0;
  for (const BranchPose& b : dr.branches) {
    detail::append_distance_row(out, dr.phi, tok, b.branch, b.distance, b.sign, signed_output, b.real,
                                b.minimizer, b.n_real, b.n_tracked, b.n_failed);
    n_real += b.n_real;
    n_tracked += b.n_tracked;
    n_failed += b.n_failed;
  }
  const bool won = dr.overall_index >= 0;
  static const std::array<Vec2, 6> kNone{};
  detail::append_distance_row(out, dr.phi, tok, "overall", dr.overall, dr.sign, signed_output, won,
                              won ? dr.branches[dr.overall_index].minimizer : kNone, n_real, n_tracked,
                              n_failed);
}

inline std::string distance_csv(std::span<const SweepOutcome> sweeps, bool signed_output) {
  std::string out = kDistanceCsvHeader;
  out += '\n';
  for (const SweepOutcome& sw : sweeps)
    for (const DistanceResult& dr : sw.poses) append_distance_rows(out, dr, signed_output);
  return out;
}

}  // namespace singdist
