#pragma once
// Nine-anchor chain manipulator: three fixed anchors, each driving a two-bar
// chain through an intermediate joint, with the chain ends pinned to a rigid
// moving plate. Two degeneracy families are searched:
//
//   parallel - the carrier lines of the three distal bars (joint to plate
//              anchor) are concurrent or all parallel; the six involved
//              points satisfy the same determinant V as the six-anchor
//              machine, so that polynomial is reused verbatim;
//   chain i  - the three points of chain i are collinear (the chain is
//              stretched out or folded back), one family per chain.
//
// The squared distance between two nine-anchor configurations averages eight
// unit terms: the six bars swept as segments plus both side plates. Each
// family's critical points solve a 19-unknown stationarity system (18 anchor
// coordinates plus one multiplier) whose parameters are the 18 coordinates of
// the query configuration; the continuation pipeline is the same
// ab-initio / seed / per-pose transport scheme as the six-anchor machine,
// with signs attached per branch from the query's side of the constraint.

#include <Eigen/Dense>
#include <array>
#include <bit>
#include <cmath>
#include <limits>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "singdist/core.hpp"
#include "singdist/family.hpp"
#include "singdist/lagrangian.hpp"
#include "singdist/metrics.hpp"
#include "singdist/model.hpp"
#include "singdist/pipeline.hpp"
#include "singdist/poly.hpp"
#include "singdist/seeding.hpp"
#include "singdist/solve.hpp"
#include "singdist/varieties.hpp"

namespace singdist {

// ---------------------------------------------------------------------------
// Geometry and inverse kinematics.
// ---------------------------------------------------------------------------

/// Chain-manipulator design: fixed anchors, plate anchors in the moving
/// frame, and the intermediate joints at the motion's first sample (which fix
/// both link lengths per chain and select the starting elbow branch).
struct RrrDesign {
  std::array<Vec2, 3> base;      ///< fixed anchors (configuration points 6-8)
  std::array<Vec2, 3> platform;  ///< moving-frame plate anchors (points 3-5)
  std::array<Vec2, 3> elbows;    ///< intermediate joints at the first sample (points 0-2)
};

/// Nine world points: 0-2 intermediate joints, 3-5 plate anchors, 6-8 fixed
/// anchors; chain i is the polyline 6+i -> i -> 3+i.
struct RrrConfiguration {
  std::array<Vec2, 9> k{};
};

/// World positions of the plate anchors at motion parameter phi.
template <class T>
std::array<V2<T>, 3> rrr_moving_anchors(const RrrDesign& d, const MotionSpec& m, T phi) {
  using std::cos;
  using std::sin;
  T c = m.rotate ? cos(phi) : T(1);
  T s = m.rotate ? sin(phi) : T(0);
  V2<T> t{T(m.a0.x) + T(m.a1.x) * cos(phi) + T(m.b1.x) * sin(phi),
          T(m.a0.y) + T(m.a1.y) * cos(phi) + T(m.b1.y) * sin(phi)};
  std::array<V2<T>, 3> out;
  for (int i = 0; i < 3; ++i) {
    const Vec2& p = d.platform[i];
    out[i] = {c * T(p.x) - s * T(p.y) + t.x, s * T(p.x) + c * T(p.y) + t.y};
  }
  return out;
}

struct RrrLinkLengths {
  std::array<double, 3> proximal{};  ///< fixed anchor to joint
  std::array<double, 3> distal{};    ///< joint to plate anchor
};

/// Link lengths implied by the joints given at the first sample.
inline RrrLinkLengths rrr_link_lengths(const RrrDesign& d, const MotionSpec& m) {
  const std::array<Vec2, 3> anchors = rrr_moving_anchors<double>(d, m, m.v);
  RrrLinkLengths L;
  for (int i = 0; i < 3; ++i) {
    L.proximal[i] = norm(d.elbows[i] - d.base[i]);
    L.distal[i] = norm(anchors[i] - d.elbows[i]);
    if (L.proximal[i] < 1e-9 || L.distal[i] < 1e-9)
      throw DegenerateDesign("chain " + std::to_string(i + 1) + " has a zero-length link");
  }
  return L;
}

namespace detail {

/// Intersection of circles (c0, r0) and (c1, r1) nearest to `hint`. A slightly
/// negative discriminant (tangent chain up to roundoff) is clamped to zero.
inline Vec2 circle_circle(const Vec2& c0, double r0, const Vec2& c1, double r1, const Vec2& hint,
                          const std::string& what) {
  const Vec2 u = c1 - c0;
  const double d2 = norm2(u);
  if (d2 < 1e-18) throw InvalidInput(what + ": joint circles are concentric");
  const double alpha = (d2 + r0 * r0 - r1 * r1) / (2 * d2);
  double h2 = r0 * r0 / d2 - alpha * alpha;  // squared offset as a fraction of |u|
  if (h2 < -1e-9 * std::max(1.0, r0 * r0 / d2)) throw InvalidInput(what + ": pose out of reach");
  const double h = std::sqrt(std::max(0.0, h2));
  const Vec2 foot = c0 + alpha * u;
  const Vec2 off = h * perp(u);
  const Vec2 a = foot + off, b = foot - off;
  return norm2(a - hint) <= norm2(b - hint) ? a : b;
}

/// Complex continuation of the circle intersection (principal branch). Any
/// branch yields a valid generic seed configuration, so no hint is needed.
inline CVec2 circle_circle_complex(const CVec2& c0, double r0, const CVec2& c1, double r1,
                                   const std::string& what) {
  const CVec2 u{c1.x - c0.x, c1.y - c0.y};
  const Complex d2 = u.x * u.x + u.y * u.y;
  if (std::abs(d2) < 1e-12) throw SeedTrackingFailure(what + ": seed pose joint circles are concentric");
  const Complex alpha = (d2 + r0 * r0 - r1 * r1) / (2.0 * d2);
  const Complex h = std::sqrt(r0 * r0 / d2 - alpha * alpha);
  return {c0.x + alpha * u.x - h * u.y, c0.y + alpha * u.y + h * u.x};
}

}  // namespace detail

/// Posed configuration at one motion parameter, joints resolved toward
/// `elbow_hint` (branch continuity is the caller's responsibility).
inline RrrConfiguration rrr_config_at(const RrrDesign& d, const MotionSpec& m, double phi,
                                      const RrrLinkLengths& L, const std::array<Vec2, 3>& elbow_hint) {
  RrrConfiguration K;
  const std::array<Vec2, 3> anchors = rrr_moving_anchors<double>(d, m, phi);
  for (int i = 0; i < 3; ++i) {
    K.k[3 + i] = anchors[i];
    K.k[6 + i] = d.base[i];
    K.k[i] = detail::circle_circle(d.base[i], L.proximal[i], anchors[i], L.distal[i], elbow_hint[i],
                                   "chain " + std::to_string(i + 1));
  }
  return K;
}

/// All sample configurations of the motion, joints carried continuously from
/// the given first-sample positions.
inline std::vector<RrrConfiguration> rrr_config_path(const RrrDesign& d, const MotionSpec& m) {
  validate_motion(m);
  const RrrLinkLengths L = rrr_link_lengths(d, m);
  std::vector<RrrConfiguration> out;
  out.reserve(static_cast<std::size_t>(m.n));
  std::array<Vec2, 3> hint = d.elbows;
  for (int j = 0; j < m.n; ++j) {
    RrrConfiguration K = rrr_config_at(d, m, m.phi_at(j), L, hint);
    for (int i = 0; i < 3; ++i) hint[i] = K.k[i];
    out.push_back(K);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Constraint evaluations.
// ---------------------------------------------------------------------------

/// Carrier-line determinant of the three distal bars (points 0-5 in the same
/// layout as the six-anchor machine).
inline double eval_rrr_parallel(const RrrConfiguration& K) {
  std::array<Vec2, 6> six;
  for (int i = 0; i < 6; ++i) six[i] = K.k[i];
  return eval_variety(six);
}

/// Collinearity determinant of chain `leg` (fixed anchor, joint, plate anchor).
inline double eval_rrr_leg(const RrrConfiguration& K, int leg) {
  return collinearity_det(K.k[6 + leg], K.k[leg], K.k[3 + leg]);
}

// ---------------------------------------------------------------------------
// Branch systems.
// ---------------------------------------------------------------------------

struct RrrBranch {
  bool parallel = true;
  int leg = 0;  ///< chain index 0-2 when !parallel

  friend bool operator==(const RrrBranch& a, const RrrBranch& b) {
    return a.parallel == b.parallel && (a.parallel || a.leg == b.leg);
  }
};

inline std::string rrr_branch_tag(const RrrBranch& b) {
  return b.parallel ? "rrr_parallel" : "rrr_leg" + std::to_string(b.leg + 1);
}

/// Registry order: parallel first, then the three chains.
inline std::array<RrrBranch, 4> rrr_branches() {
  return {RrrBranch{true, 0}, RrrBranch{false, 0}, RrrBranch{false, 1}, RrrBranch{false, 2}};
}

/// Generic finite-solution count of a chain branch: eliminating the twelve
/// unconstrained coordinates leaves a rotation-invariant quadratic objective
/// on the chain's collinearity quadric, whose paired eigenvalues collapse the
/// multiplier resolvent to a quadratic — two critical points, the same
/// mechanism that gives the free-collinearity families of the six-anchor
/// machine their count. Confirmed by exploratory monodromy (two seeds) and by
/// an independent 128-path total-degree solve.
inline constexpr int kRrrLegSolutions = 2;

inline int rrr_expected_count(const RrrBranch& b) { return b.parallel ? 50 : kRrrLegSolutions; }

/// A branch's stationarity system: unknowns c1,d1,...,c9,d9,lam; parameters
/// a1,b1,...,a9,b9 (the query configuration's coordinates, same point order).
struct RrrSystem {
  ParameterizedSystem sys;
  RrrBranch branch;
  int expected_count = -1;
};

inline RrrSystem build_rrr_system(const RrrBranch& b) {
  if (!b.parallel && (b.leg < 0 || b.leg > 2)) throw IncompatibleBranch("chain index must be 0, 1, or 2");
  detail::SpaceBuilder sb;
  std::array<int, 18> cv, ref;
  for (int i = 0; i < 9; ++i) {
    cv[2 * i] = sb.add_unknown("c" + std::to_string(i + 1));
    cv[2 * i + 1] = sb.add_unknown("d" + std::to_string(i + 1));
  }
  const int lam = sb.add_unknown("lam");
  sb.seal_unknowns();
  for (int i = 0; i < 9; ++i) {
    ref[2 * i] = sb.add_param("a" + std::to_string(i + 1));
    ref[2 * i + 1] = sb.add_param("b" + std::to_string(i + 1));
  }

  const int nv = static_cast<int>(sb.names().size());
  auto v = [&](int idx) { return MultiPoly::variable(nv, idx); };

  std::vector<std::pair<MultiPoly, MultiPoly>> disp(9);
  for (int i = 0; i < 9; ++i) disp[i] = {v(cv[2 * i]) - v(ref[2 * i]), v(cv[2 * i + 1]) - v(ref[2 * i + 1])};
  const MultiPoly D2 = detail::metric_dist2_poly(nine_point_metric_plan(), disp);

  MultiPoly side(nv);
  if (b.parallel) {
    std::array<MultiPoly, 12> cd;
    for (int i = 0; i < 12; ++i) cd[i] = v(cv[i]);
    side = variety_poly(cd);
  } else {
    const int pa = 6 + b.leg, pb = b.leg, pc = 3 + b.leg;  // fixed anchor, joint, plate anchor
    side = collinearity_poly({v(cv[2 * pa]), v(cv[2 * pa + 1]), v(cv[2 * pb]), v(cv[2 * pb + 1]),
                              v(cv[2 * pc]), v(cv[2 * pc + 1])});
  }
  const MultiPoly L = D2 + v(lam) * side;

  RrrSystem out;
  out.branch = b;
  out.expected_count = rrr_expected_count(b);
  out.sys.n_unknowns = sb.sealed_unknowns_;
  out.sys.names = sb.names();
  for (int i = 0; i < 18; ++i) out.sys.equations.push_back(L.differentiate(cv[i]));
  out.sys.equations.push_back(side);
  return out;
}

/// Parameter vector of a branch family at a (possibly complex) configuration.
inline std::vector<Complex> rrr_param_values(const std::array<CVec2, 9>& K) {
  std::vector<Complex> p;
  p.reserve(18);
  for (int i = 0; i < 9; ++i) {
    p.push_back(K[i].x);
    p.push_back(K[i].y);
  }
  return p;
}

inline std::vector<Complex> rrr_param_values(const RrrConfiguration& K) {
  std::array<CVec2, 9> kc;
  for (int i = 0; i < 9; ++i) kc[i] = {Complex(K.k[i].x), Complex(K.k[i].y)};
  return rrr_param_values(kc);
}

/// Compiled branch family; the system must outlive the engine.
struct RrrEngine {
  RrrSystem cs;
  CompiledFamily fam;

  explicit RrrEngine(const RrrBranch& branch) : cs(build_rrr_system(branch)), fam(cs.sys) {}
};

inline std::uint64_t rrr_branch_rng_key(const RrrBranch& b) { return fnv1a(rrr_branch_tag(b)); }

// ---------------------------------------------------------------------------
// Pipeline stages.
// ---------------------------------------------------------------------------

/// Ab-initio fiber by monodromy over generic complex parameters, certified at
/// `certify_sources - 1` further random source points by full-fiber transport.
/// With expected_count < 0 the monodromy explores until stalled and the
/// stall-size fiber is returned (used to measure new counts).
inline SourceFiber rrr_ab_initio(const RrrEngine& be, std::uint64_t seed, int certify_sources = 1,
                                 const TrackSettings& ts = {}) {
  const std::uint64_t key = rrr_branch_rng_key(be.cs.branch);
  const std::string label = rrr_branch_tag(be.cs.branch);

  KeyedRng rng(seed, {rngkey::kMonodromy, key});
  MonodromySettings ms;
  ms.expected = be.cs.expected_count;
  ms.track = ts;
  SeedFn seeder = [&be, &label](KeyedRng& r) { return reversal_seed(be.cs.sys, r, label); };
  ParamSampler sampler = [](KeyedRng& r) {
    std::vector<Complex> p(18);
    for (auto& x : p) x = r.generic_complex();
    return p;
  };
  MonodromyResult mr = monodromy_solve(be.fam, seeder, sampler, rng, ms);

  SourceFiber out;
  out.params = std::move(mr.base_params);
  out.solutions = std::move(mr.solutions);
  out.expected = static_cast<int>(out.solutions.size());
  out.loops = mr.loops;
  out.seeds_used = mr.seeds_used;
  out.rebases = mr.rebases;
  out.paths_tracked = mr.paths_tracked;

  KeyedRng crng(seed, {rngkey::kSource, key});
  for (int s = 1; s < certify_sources; ++s) {
    std::vector<Complex> q = sampler(crng);
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

/// Carries the source fiber to the configuration at a random complex motion
/// parameter; the joints continue to a complex branch of the circle
/// intersection (either branch is a valid generic seed).
inline SeedFiber rrr_seed_phase(const RrrEngine& be, const SourceFiber& src, const RrrDesign& d,
                                const MotionSpec& m, const PipelineSettings& ps) {
  validate_motion(m);
  const RrrLinkLengths L = rrr_link_lengths(d, m);
  const std::string label = rrr_branch_tag(be.cs.branch);
  KeyedRng rng(ps.seed, {rngkey::kSeedPhase, rrr_branch_rng_key(be.cs.branch)});
  const double re = rng.uniform(0.15, 0.85);
  const double im = rng.uniform(0.05, 0.25) * (rng.uniform() < 0.5 ? -1.0 : 1.0);
  const Complex alpha{re, im};

  SeedFiber sf;
  sf.phi = m.v - (m.v - m.w) * (Complex(1.0) - alpha);
  const std::array<CVec2, 3> anchors = rrr_moving_anchors<Complex>(d, m, sf.phi);
  std::array<CVec2, 9> K;
  for (int i = 0; i < 3; ++i) {
    K[6 + i] = {Complex(d.base[i].x), Complex(d.base[i].y)};
    K[3 + i] = anchors[i];
    K[i] = detail::circle_circle_complex(K[6 + i], L.proximal[i], anchors[i], L.distal[i], label);
  }
  sf.params = rrr_param_values(K);

  TransportResult tr = transport_fiber(be.fam, src.params, sf.params, src.solutions, rng, ps.track);
  SolutionSet distinct;
  for (const auto& t : tr.tracked)
    if (t && distinct.add(*t)) sf.solutions.push_back(*t);
  if (tr.n_failed > 0 || static_cast<int>(sf.solutions.size()) != src.expected)
    throw SeedTrackingFailure(label + ": seed pose carries " + std::to_string(sf.solutions.size()) + " of " +
                              std::to_string(src.expected) + " paths (" + std::to_string(tr.n_failed) +
                              " unresolved)");
  return sf;
}

// ---------------------------------------------------------------------------
// Per-pose solves and sweeps.
// ---------------------------------------------------------------------------

/// Minimum of one branch at one configuration, with path bookkeeping.
struct RrrBranchPose {
  std::string branch;
  double distance = std::numeric_limits<double>::quiet_NaN();
  bool real = false;  ///< a real minimizer exists; false flags a gap
  std::array<Vec2, 9> minimizer{};
  int sign = 0;  ///< side of the branch constraint the query lies on
  int n_real = 0;
  int n_tracked = 0;
  int n_failed = 0;
};

inline RrrBranchPose rrr_solve_branch_pose(const RrrEngine& be, const SeedFiber& sf,
                                           const RrrConfiguration& K, const PipelineSettings& ps,
                                           double phi) {
  KeyedRng rng(ps.seed, {rngkey::kSweep, rrr_branch_rng_key(be.cs.branch), std::bit_cast<std::uint64_t>(phi)});
  const std::vector<Complex> q = rrr_param_values(K);
  TransportResult tr = transport_fiber(be.fam, sf.params, q, sf.solutions, rng, ps.track);
  std::vector<Eigen::VectorXcd> arrived;
  arrived.reserve(sf.solutions.size());
  for (const auto& t : tr.tracked)
    if (t) arrived.push_back(*t);
  const std::vector<Eigen::VectorXd> reals = filter_real(be.fam, q, arrived);

  RrrBranchPose bp;
  bp.branch = rrr_branch_tag(be.cs.branch);
  bp.n_tracked = static_cast<int>(sf.solutions.size());
  bp.n_failed = tr.n_failed;
  bp.n_real = static_cast<int>(reals.size());
  const double c = be.cs.branch.parallel ? eval_rrr_parallel(K) : eval_rrr_leg(K, be.cs.branch.leg);
  bp.sign = c > 0 ? 1 : (c < 0 ? -1 : 0);
  double best = std::numeric_limits<double>::infinity();
  for (const auto& u : reals) {
    RrrConfiguration kp;
    for (int i = 0; i < 9; ++i) kp.k[i] = {u(2 * i), u(2 * i + 1)};
    const double d2 = rrr_dist2(K.k, kp.k);
    if (d2 < best) {
      best = d2;
      bp.minimizer = kp.k;
      bp.real = true;
    }
  }
  if (bp.real) bp.distance = std::sqrt(std::max(0.0, best));
  return bp;
}

/// All branch minima at one configuration plus their combination: the overall
/// value is the smallest branch magnitude, carrying that branch's sign.
struct RrrDistanceResult {
  int pose_index = -1;
  double phi = 0;
  std::vector<RrrBranchPose> branches;  ///< registry order
  double overall = std::numeric_limits<double>::quiet_NaN();
  int overall_index = -1;  ///< branch delivering the overall minimum, -1 = gap
  int sign = 0;            ///< sign of the winning branch
};

/// All four branch families with their stage products, ready to solve poses.
struct RrrPrepared {
  RrrDesign design;
  struct Entry {
    RrrBranch branch;
    std::unique_ptr<RrrEngine> engine;
    SourceFiber source;
    SeedFiber seed;
  };
  std::vector<Entry> entries;
  std::vector<StageReport> stages;
};

inline RrrPrepared rrr_prepare(const RrrDesign& d, const MotionSpec& m, const PipelineSettings& ps) {
  RrrPrepared prep;
  prep.design = d;
  for (const RrrBranch& b : rrr_branches()) {
    RrrPrepared::Entry e;
    e.branch = b;
    e.engine = std::make_unique<RrrEngine>(b);
    e.source = rrr_ab_initio(*e.engine, ps.seed, ps.certify_sources, ps.track);
    e.seed = rrr_seed_phase(*e.engine, e.source, d, m, ps);
    StageReport rep;
    rep.branch = rrr_branch_tag(b);
    rep.expected = rrr_expected_count(b);
    rep.achieved = static_cast<int>(e.source.solutions.size());
    rep.loops = e.source.loops;
    rep.paths_tracked = e.source.paths_tracked;
    rep.rebases = e.source.rebases;
    prep.stages.push_back(rep);
    prep.entries.push_back(std::move(e));
  }
  return prep;
}

inline RrrDistanceResult rrr_solve_pose(const RrrPrepared& prep, const RrrConfiguration& K, double phi,
                                        const PipelineSettings& ps) {
  RrrDistanceResult dr;
  dr.phi = phi;
  for (const auto& e : prep.entries) dr.branches.push_back(rrr_solve_branch_pose(*e.engine, e.seed, K, ps, phi));
  for (int i = 0; i < static_cast<int>(dr.branches.size()); ++i) {
    const RrrBranchPose& b = dr.branches[i];
    if (b.real && (dr.overall_index < 0 || b.distance < dr.overall)) {
      dr.overall = b.distance;
      dr.overall_index = i;
      dr.sign = b.sign;
    }
  }
  return dr;
}

struct RrrSweepOutcome {
  std::vector<RrrDistanceResult> poses;
  std::vector<StageReport> stages;
};

/// Full sweep: joints are resolved serially (branch continuity), then every
/// sample solves all four branches; results are deterministic for any worker
/// count because every random draw is keyed by (seed, purpose, branch, phi).
inline RrrSweepOutcome rrr_sweep(const RrrDesign& d, const MotionSpec& m, const PipelineSettings& ps) {
  const std::vector<RrrConfiguration> configs = rrr_config_path(d, m);
  const RrrPrepared prep = rrr_prepare(d, m, ps);
  RrrSweepOutcome out;
  out.stages = prep.stages;
  out.poses.resize(configs.size());
  detail::parallel_for(static_cast<int>(configs.size()), ps.workers, [&](int j) {
    out.poses[j] = rrr_solve_pose(prep, configs[j], m.phi_at(j), ps);
    out.poses[j].pose_index = j;
  });
  return out;
}

// ---------------------------------------------------------------------------
// CSV serialization.
// ---------------------------------------------------------------------------

inline constexpr const char* kRrrCsvHeader =
    "phi,branch,distance,sign,c1,d1,c2,d2,c3,d3,c4,d4,c5,d5,c6,d6,c7,d7,c8,d8,c9,d9,n_real,n_tracked,n_failed";

namespace detail {
inline void append_rrr_row(std::string& out, double phi, const std::string& branch, double distance, int sign,
                           bool signed_output, bool has_minimizer, const std::array<Vec2, 9>& minimizer,
                           int n_real, int n_tracked, int n_failed) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  out += fmt9(phi);
  out += ',';
  out += branch;
  out += ',';
  out += fmt9(distance);
  out += ',';
  if (signed_output) out += std::to_string(sign);
  for (int i = 0; i < 9; ++i) {
    out += ',';
    out += fmt9(has_minimizer ? minimizer[i].x : nan);
    out += ',';
    out += fmt9(has_minimizer ? minimizer[i].y : nan);
  }
  out += ',' + std::to_string(n_real) + ',' + std::to_string(n_tracked) + ',' + std::to_string(n_failed);
  out += '\n';
}
}  // namespace detail

/// Rows of one pose: every branch, then the combined "overall" row.
inline void append_rrr_rows(std::string& out, const RrrDistanceResult& dr, bool signed_output) {
  int n_real = 0, n_tracked = 0, n_failed = 0;
  for (const RrrBranchPose& b : dr.branches) {
    detail::append_rrr_row(out, dr.phi, b.branch, b.distance, b.sign, signed_output, b.real, b.minimizer,
                           b.n_real, b.n_tracked, b.n_failed);
    n_real += b.n_real;
    n_tracked += b.n_tracked;
    n_failed += b.n_failed;
  }
  const bool won = dr.overall_index >= 0;
  static const std::array<Vec2, 9> kNone{};
  detail::append_rrr_row(out, dr.phi, "overall", dr.overall, dr.sign, signed_output, won,
                         won ? dr.branches[dr.overall_index].minimizer : kNone, n_real, n_tracked, n_failed);
}

inline std::string rrr_distance_csv(std::span<const RrrDistanceResult> poses, bool signed_output) {
  std::string out = kRrrCsvHeader;
  out += '\n';
  for (const RrrDistanceResult& dr : poses) append_rrr_rows(out, dr, signed_output);
  return out;
}

}  // namespace singdist
