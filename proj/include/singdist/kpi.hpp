#pragma once
// Pose-local closeness indices and workspace distances, for comparison
// against the configuration-space distance:
//
//   * manipulability M = |det| of the unit-Plucker leg-line matrix, plus the
//     raw carrier-line determinant;
//   * incircle radius IR of the carrier-line triangle, signed by triangle
//     orientation (the magnitude is the classical incircle radius; the sign
//     flip at a parallel-leg pose is what makes the curve jump there);
//   * transmission index TI / distance-to-singularity DS from the pressure
//     angles at the platform anchors, and their role-symmetric variants
//     MTI / MDS averaging each platform angle with its base counterpart;
//   * control numbers CN (scale invariant) and MCN (scale covariant) from
//     the extreme passive-joint responses to unit prismatic rates;
//   * nearest singular orientation at fixed position, and nearest singular
//     position at fixed orientation.
//
// All of these vanish (or degenerate) together at singular poses; none of
// them measures a displacement of the mechanism itself, which is exactly the
// comparison the distance sweeps are meant to expose.

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <complex>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "singdist/core.hpp"
#include "singdist/family.hpp"
#include "singdist/model.hpp"
#include "singdist/poly.hpp"
#include "singdist/solve.hpp"
#include "singdist/varieties.hpp"

namespace singdist {

// ---------------------------------------------------------------------------
// Result bundles.
// ---------------------------------------------------------------------------

/// One pose's worth of comparison indices.
struct KpiVector {
  double M = 0;      ///< |det| of the unit-Plucker line matrix
  double IR = 0;     ///< signed incircle radius of the carrier-line triangle
  double V_raw = 0;  ///< unnormalized carrier-line determinant
  double TI = 0;     ///< min cos(pressure angle), platform side
  double MTI = 0;    ///< min cos of the platform/base-averaged angles
  double DS = 0;     ///< 1 - 2 max(pressure angle)/pi
  double MDS = 0;    ///< same on the averaged angles
  double CN = 0;     ///< sqrt(mu-/mu+) of the passive-rate response
  double MCN = 0;    ///< sqrt(1/mu+)
  double orientation_dist = 0;  ///< |zeta0 - zeta*| to the nearest singular orientation, in [0, pi]
  double position_dist = 0;     ///< Euclidean distance to the nearest singular position
};

struct Manipulability {
  double M = 0;
  double V_raw = 0;
};

struct TransmissionIndices {
  double TI = 0, MTI = 0, DS = 0, MDS = 0;
  std::array<double, 3> alpha{};  ///< platform-anchor pressure angles, in [0, pi/2]
  std::array<double, 3> beta{};   ///< base-anchor pressure angles (roles exchanged)
};

struct ControlNumbers {
  double CN = 0;
  double MCN = 0;
};

/// Platform pose: translation of the platform origin and rotation angle.
struct PlanarPose {
  Vec2 t{};
  double zeta = 0;
};

inline PlanarPose pose_at(const MotionSpec& m, double phi) {
  PlanarPose p;
  p.t = Vec2{m.a0.x + m.a1.x * std::cos(phi) + m.b1.x * std::sin(phi),
             m.a0.y + m.a1.y * std::cos(phi) + m.b1.y * std::sin(phi)};
  p.zeta = m.rotate ? phi : 0.0;
  return p;
}

namespace detail {

inline std::array<Vec2, 3> unit_leg_dirs(const Configuration& K) {
  std::array<Vec2, 3> u;
  for (int i = 0; i < 3; ++i) {
    Vec2 d = K.leg_dir(i);
    double len = norm(d);
    if (len < 1e-12) throw ZeroLegLength("leg " + std::to_string(i + 1) + " has zero length");
    u[i] = Vec2{d.x / len, d.y / len};
  }
  return u;
}

/// Intersection of the lines through p and q along u and v; nullopt if the
/// directions are (numerically) parallel.
inline std::optional<Vec2> line_intersection(const Vec2& p, const Vec2& u, const Vec2& q, const Vec2& v) {
  double den = cross(u, v);
  if (std::abs(den) <= 1e-10 * norm(u) * norm(v)) return std::nullopt;
  double s = cross(q - p, v) / den;
  return Vec2{p.x + s * u.x, p.y + s * u.y};
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Carrier-line indices.
// ---------------------------------------------------------------------------

inline Manipulability manipulability(const Configuration& K) {
  Manipulability out;
  out.V_raw = eval_variety(K);
  Eigen::Matrix3d J;
  for (int i = 0; i < 3; ++i) {
    Vec2 d = K.leg_dir(i);
    double len = norm(d);
    if (len < 1e-12) throw ZeroLegLength("leg " + std::to_string(i + 1) + " has zero length");
    J(i, 0) = d.x / len;
    J(i, 1) = d.y / len;
    J(i, 2) = cross(K.k[i], K.k[i + 3]) / len;
  }
  out.M = std::abs(J.determinant());
  return out;
}

/// Signed incircle radius of the triangle cut out by the three carrier
/// lines: 2 * signed vertex-triangle area / perimeter, vertices taken in the
/// fixed pair order (1,2), (2,3), (3,1). Concurrent lines give 0. With
/// exactly one parallel pair the inscribed circle sits between the two
/// parallels and touches the third line: +half the strip width (0 when the
/// pair coincides). Three parallel lines have no inscribed circle of finite
/// contact triangle and are reported as an error.
inline double incircle_radius(const Configuration& K) {
  const std::array<Vec2, 3> u = detail::unit_leg_dirs(K);
  const std::array<int, 3> pa = {0, 1, 2}, pb = {1, 2, 0};
  std::array<bool, 3> parallel{};
  for (int p = 0; p < 3; ++p) parallel[p] = std::abs(cross(u[pa[p]], u[pb[p]])) <= 1e-10;

  const int n_par = (parallel[0] ? 1 : 0) + (parallel[1] ? 1 : 0) + (parallel[2] ? 1 : 0);
  if (n_par >= 2) {
    // Parallelism is transitive over unit directions: all three lines parallel.
    double wmax = 0;
    for (int p = 0; p < 3; ++p)
      wmax = std::max(wmax, std::abs(cross(u[pa[p]], K.k[pb[p]] - K.k[pa[p]])));
    throw AllParallel("three parallel carrier lines; largest inscribed circle radius = " + fmt9(wmax / 2));
  }
  if (n_par == 1) {
    int p = parallel[0] ? 0 : (parallel[1] ? 1 : 2);
    return std::abs(cross(u[pa[p]], K.k[pb[p]] - K.k[pa[p]])) / 2;  // half the strip width
  }

  std::array<Vec2, 3> v;  // vertices in pair order (1,2), (2,3), (3,1)
  for (int p = 0; p < 3; ++p)
    v[p] = *detail::line_intersection(K.k[pa[p]], u[pa[p]], K.k[pb[p]], u[pb[p]]);
  double area2 = cross(v[1] - v[0], v[2] - v[0]);  // 2 * signed area
  double perim = norm(v[1] - v[0]) + norm(v[2] - v[1]) + norm(v[0] - v[2]);
  double scale = 1;
  for (const Vec2& p : v) scale = std::max({scale, std::abs(p.x), std::abs(p.y)});
  if (perim <= 1e-14 * scale) return 0;  // concurrent lines
  return area2 / perim;
}

// ---------------------------------------------------------------------------
// Anchor-velocity indices.
// ---------------------------------------------------------------------------

/// Pressure angles and the four derived indices. Driving leg i alone pivots
/// the platform about the pole where the other two carrier lines meet, so
/// anchor velocities are perpendicular to their pole rays; if those lines
/// are parallel the instantaneous motion is the translation normal to them.
inline TransmissionIndices transmission_indices(const Configuration& K) {
  const std::array<Vec2, 3> u = detail::unit_leg_dirs(K);
  double scale = 1;
  for (const Vec2& p : K.k) scale = std::max({scale, std::abs(p.x), std::abs(p.y)});

  auto pressure = [&](int i, const Vec2& anchor) -> double {
    const int j = (i + 1) % 3, l = (i + 2) % 3;
    std::optional<Vec2> pole = detail::line_intersection(K.k[j], u[j], K.k[l], u[l]);
    Vec2 vel;
    if (pole) {
      Vec2 r = anchor - *pole;
      if (norm(r) <= 1e-12 * scale) throw SingularPose("pole coincides with an anchor point");
      vel = perp(r);
    } else {
      vel = perp(u[j]);  // both constraint lines parallel: translation normal to them
    }
    double c = std::abs(dot(u[i], vel)) / norm(vel);
    return std::acos(std::clamp(c, 0.0, 1.0));
  };

  TransmissionIndices out;
  double min_cos_a = 1, max_a = 0, min_cos_m = 1, max_m = 0;
  for (int i = 0; i < 3; ++i) {
    out.alpha[i] = pressure(i, K.k[i + 3]);
    out.beta[i] = pressure(i, K.k[i]);
    double mean = (out.alpha[i] + out.beta[i]) / 2;
    min_cos_a = std::min(min_cos_a, std::cos(out.alpha[i]));
    max_a = std::max(max_a, out.alpha[i]);
    min_cos_m = std::min(min_cos_m, std::cos(mean));
    max_m = std::max(max_m, mean);
  }
  out.TI = min_cos_a;
  out.DS = 1 - 2 * max_a / kPi;
  out.MTI = min_cos_m;
  out.MDS = 1 - 2 * max_m / kPi;
  return out;
}

/// Extreme passive-joint responses: over all prismatic rate vectors of unit
/// norm, mu-/mu+ are the least/greatest possible sum of squared angular
/// rates of the six passive joints (three base pivots, three platform
/// pivots).
inline ControlNumbers control_numbers(const Configuration& K) {
  Eigen::Matrix3d A;           // prismatic rates from the platform twist (vx, vy, omega)
  Eigen::Matrix<double, 6, 3> B;  // passive rates from the twist
  for (int i = 0; i < 3; ++i) {
    Vec2 d = K.leg_dir(i);
    double len = norm(d);
    if (len < 1e-12) throw ZeroLegLength("leg " + std::to_string(i + 1) + " has zero length");
    Vec2 u{d.x / len, d.y / len};
    const Vec2& a = K.k[i + 3];
    A(i, 0) = u.x;
    A(i, 1) = u.y;
    A(i, 2) = cross(a, u);
    // Base pivot rate: normal velocity of the platform anchor over the leg length.
    B(i, 0) = -u.y / len;
    B(i, 1) = u.x / len;
    B(i, 2) = dot(u, a) / len;
    // Platform pivot rate: platform spin minus the leg's own spin.
    B(i + 3, 0) = -B(i, 0);
    B(i + 3, 1) = -B(i, 1);
    B(i + 3, 2) = 1 - B(i, 2);
  }
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(A, Eigen::ComputeFullU | Eigen::ComputeFullV);
  if (svd.singularValues()(2) <= 1e-12 * svd.singularValues()(0))
    throw SingularPose("prismatic rates do not determine the platform twist");
  Eigen::Matrix<double, 6, 3> T = B * svd.solve(Eigen::Matrix3d::Identity());
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(T.transpose() * T);
  double mu_min = std::max(es.eigenvalues()(0), 0.0), mu_max = es.eigenvalues()(2);
  if (!(mu_max > 0)) throw SingularPose("no passive joint responds to the prismatic rates");
  return ControlNumbers{std::sqrt(mu_min / mu_max), std::sqrt(1 / mu_max)};
}

// ---------------------------------------------------------------------------
// Workspace distances at a fixed pose component.
// ---------------------------------------------------------------------------

namespace detail {

/// Carrier-line determinant with the platform placed at translation t and
/// rotation (c, s), all complex so the rotation can be continued analytically.
inline Complex carrier_det(const DesignParams& d, const std::complex<double>& tx,
                           const std::complex<double>& ty, const std::complex<double>& c,
                           const std::complex<double>& s) {
  using C = std::complex<double>;
  auto base = d.base_points();
  auto plat = d.platform_points();
  std::array<std::array<C, 3>, 3> col;  // (dir_x, dir_y, moment) per leg
  for (int i = 0; i < 3; ++i) {
    C px = c * plat[i].x - s * plat[i].y + tx;
    C py = s * plat[i].x + c * plat[i].y + ty;
    col[i] = {px - base[i].x, py - base[i].y, base[i].x * py - base[i].y * px};
  }
  return col[0][0] * (col[1][1] * col[2][2] - col[1][2] * col[2][1]) -
         col[1][0] * (col[0][1] * col[2][2] - col[0][2] * col[2][1]) +
         col[2][0] * (col[0][1] * col[1][2] - col[0][2] * col[1][1]);
}

/// Coefficients (degree 0..6) of the rational-rotation numerator
/// N(T) = det(T) * (1 + T^2)^2 under c = (1-T^2)/(1+T^2), s = 2T/(1+T^2),
/// recovered by interpolation at 7th roots of unity (a perfectly conditioned
/// inverse DFT). The determinant's rotation degree makes the top two
/// coefficients vanish, so N is in fact a degree <= 4 polynomial.
inline std::array<double, 7> orientation_numerator(const DesignParams& d, const Vec2& t) {
  using C = std::complex<double>;
  std::array<C, 7> vals;
  for (int k = 0; k < 7; ++k) {
    C T = std::polar(1.0, 2 * kPi * k / 7);
    C den = 1.0 + T * T;
    C c = (1.0 - T * T) / den, s = 2.0 * T / den;
    vals[k] = carrier_det(d, C(t.x), C(t.y), c, s) * den * den;
  }
  std::array<double, 7> coef{};
  for (int j = 0; j < 7; ++j) {
    C acc = 0;
    for (int k = 0; k < 7; ++k) acc += vals[k] * std::polar(1.0, -2 * kPi * j * k / 7);
    coef[j] = (acc / 7.0).real();
  }
  return coef;
}

/// Real roots of a real-coefficient polynomial via its companion matrix.
inline std::vector<double> real_roots(std::span<const double> coef) {
  int deg = static_cast<int>(coef.size()) - 1;
  double cmax = 0;
  for (double c : coef) cmax = std::max(cmax, std::abs(c));
  while (deg > 0 && std::abs(coef[deg]) <= 1e-10 * cmax) --deg;
  std::vector<double> roots;
  if (deg <= 0) return roots;
  Eigen::MatrixXd comp = Eigen::MatrixXd::Zero(deg, deg);
  for (int i = 1; i < deg; ++i) comp(i, i - 1) = 1;
  for (int i = 0; i < deg; ++i) comp(i, deg - 1) = -coef[i] / coef[deg];
  Eigen::EigenSolver<Eigen::MatrixXd> es(comp);
  for (int i = 0; i < deg; ++i) {
    std::complex<double> r = es.eigenvalues()(i);
    if (std::abs(r.imag()) <= 1e-7 * (1 + std::abs(r.real()))) roots.push_back(r.real());
  }
  return roots;
}

}  // namespace detail

/// Distance |zeta0 - zeta*| (shorter arc, in [0, pi]) to the nearest
/// singular orientation with the position held fixed. A singular orientation
/// always exists, so there is no failure mode; a determinant that vanishes
/// identically in the rotation reports distance 0.
inline double orientation_distance(const DesignParams& d, const PlanarPose& pose) {
  using C = std::complex<double>;
  std::array<double, 7> coef = detail::orientation_numerator(d, pose.t);
  double cmax = 0;
  for (double c : coef) cmax = std::max(cmax, std::abs(c));
  if (cmax <= 1e-13) return 0;  // singular at every orientation

  auto g = [&](C zeta) { return detail::carrier_det(d, C(pose.t.x), C(pose.t.y), std::cos(zeta), std::sin(zeta)); };
  std::vector<double> cands;
  for (double T : detail::real_roots(coef)) cands.push_back(2 * std::atan(T));
  // The half-angle chart misses zeta = pi; admit it whenever the
  // determinant vanishes there.
  if (std::abs(g(C(kPi))) <= 1e-9 * cmax) cands.push_back(kPi);
  if (cands.empty()) return kPi;  // cannot happen for a nondegenerate design; worst case by convention

  double best = kPi;
  for (double zeta : cands) {
    // A couple of Newton corrections on the trig determinant (derivative by
    // complex step) tighten the interpolated root.
    for (int it = 0; it < 3; ++it) {
      const double h = 1e-100;
      C val = g(C(zeta, h));
      double gp = val.imag() / h;
      if (gp == 0) break;
      double step = val.real() / gp;
      if (!std::isfinite(step) || std::abs(step) > 0.1) break;
      zeta -= step;
    }
    best = std::min(best, std::abs(std::remainder(pose.zeta - zeta, 2 * kPi)));
  }
  return best;
}

/// Euclidean distance to the nearest singular position with the orientation
/// held fixed: minimizes |p - p0|^2 on the fixed-rotation singularity conic
/// through the stationarity system in (x, y, multiplier), solved with a
/// total-degree start system (2*2*2 = 8 paths for a nondegenerate design).
inline double position_distance(const DesignParams& d, const PlanarPose& pose, std::uint64_t seed = 0,
                                const TrackSettings& ts = {}) {
  const double c0 = std::cos(pose.zeta), s0 = std::sin(pose.zeta);
  const int nv = 3;  // x, y, multiplier; no free parameters
  auto var = [&](int i) { return MultiPoly::variable(nv, i); };
  auto cst = [&](double v) { return MultiPoly::constant(nv, Complex(v)); };
  auto base = d.base_points();
  auto plat = d.platform_points();

  std::array<MultiPoly, 3> dir_x{cst(0), cst(0), cst(0)}, dir_y{cst(0), cst(0), cst(0)},
      mom{cst(0), cst(0), cst(0)};
  for (int i = 0; i < 3; ++i) {
    MultiPoly px = cst(c0 * plat[i].x - s0 * plat[i].y) + var(0);
    MultiPoly py = cst(s0 * plat[i].x + c0 * plat[i].y) + var(1);
    dir_x[i] = px - cst(base[i].x);
    dir_y[i] = py - cst(base[i].y);
    mom[i] = cst(base[i].x) * py - cst(base[i].y) * px;
  }
  // Expand along the moment row: each minor of two direction rows is linear
  // (its translation-quadratic part cancels exactly term by term), so V comes
  // out as the quadratic it is, with no spurious top-degree residue.
  auto minor = [&](int j, int l) { return dir_x[j] * dir_y[l] - dir_x[l] * dir_y[j]; };
  MultiPoly V = mom[0] * minor(1, 2) - mom[1] * minor(0, 2) + mom[2] * minor(0, 1);

  ParameterizedSystem ps;
  ps.equations = {var(0) - cst(pose.t.x) + var(2) * V.differentiate(0),
                  var(1) - cst(pose.t.y) + var(2) * V.differentiate(1), V};
  ps.n_unknowns = 3;
  ps.names = {"x", "y", "lam"};
  CompiledFamily fam(ps);

  std::vector<int> degrees;
  for (const MultiPoly& e : ps.equations) degrees.push_back(std::max(1, e.total_degree()));
  KeyedRng rng(seed, {rngkey::kKpi, std::bit_cast<std::uint64_t>(pose.t.x),
                      std::bit_cast<std::uint64_t>(pose.t.y), std::bit_cast<std::uint64_t>(pose.zeta)});
  const std::span<const Complex> no_params;
  TotalDegreeResult td = total_degree_solve(fam, fam.coefficients(no_params), degrees, rng, ts);
  std::vector<Eigen::VectorXd> real = filter_real(fam, no_params, td.solutions);
  double best = std::numeric_limits<double>::infinity();
  for (const Eigen::VectorXd& r : real)
    best = std::min(best, std::hypot(r(0) - pose.t.x, r(1) - pose.t.y));
  if (!std::isfinite(best))
    throw EmptyLocus("no real singular position at the fixed orientation");
  return best;
}

// ---------------------------------------------------------------------------
// Per-pose assembly and sweeps.
// ---------------------------------------------------------------------------

/// Evaluates every index at one motion sample. Indices whose instantaneous
/// kinematics degenerate at a singular pose (pole at an anchor, rank-drop of
/// the twist map, parallel carrier lines) report their limit value 0 instead
/// of failing, so singular samples stay well-defined rows. An empty
/// fixed-orientation locus leaves position_dist as NaN (a flagged gap).
inline KpiVector kpi_at(const DesignParams& d, const MotionSpec& m, double phi, std::uint64_t seed = 0) {
  Configuration K{pose_points<double>(d, m, phi)};
  KpiVector out;
  try {
    Manipulability man = manipulability(K);
    out.M = man.M;
    out.V_raw = man.V_raw;
  } catch (const ZeroLegLength&) {
  }
  try {
    out.IR = incircle_radius(K);
  } catch (const AllParallel&) {
  } catch (const ZeroLegLength&) {
  }
  try {
    TransmissionIndices ti = transmission_indices(K);
    out.TI = ti.TI;
    out.MTI = ti.MTI;
    out.DS = ti.DS;
    out.MDS = ti.MDS;
  } catch (const SingularPose&) {
  } catch (const ZeroLegLength&) {
  }
  try {
    ControlNumbers cn = control_numbers(K);
    out.CN = cn.CN;
    out.MCN = cn.MCN;
  } catch (const SingularPose&) {
  } catch (const ZeroLegLength&) {
  }
  PlanarPose pose = pose_at(m, phi);
  out.orientation_dist = orientation_distance(d, pose);
  try {
    out.position_dist = position_distance(d, pose, seed);
  } catch (const EmptyLocus&) {
    out.position_dist = std::numeric_limits<double>::quiet_NaN();
  }
  return out;
}

struct KpiRow {
  int pose_index = -1;
  double phi = 0;
  KpiVector kpi;
};

/// Serial sweep: the cost per pose (one 8-path solve plus closed forms) is
/// negligible next to the distance pipeline, and serial evaluation keeps the
/// rows trivially deterministic.
inline std::vector<KpiRow> kpi_sweep(const DesignParams& d, const MotionSpec& m, std::uint64_t seed = 0) {
  std::vector<KpiRow> rows;
  rows.reserve(static_cast<std::size_t>(m.n));
  for (int j = 0; j < m.n; ++j) {
    KpiRow row;
    row.pose_index = j;
    row.phi = m.phi_at(j);
    row.kpi = kpi_at(d, m, row.phi, seed);
    rows.push_back(row);
  }
  return rows;
}

inline constexpr const char* kKpiCsvHeader =
    "phi,M,IR,V_raw,TI,MTI,DS,MDS,CN,MCN,orientation_dist,position_dist";

inline std::string kpi_csv(std::span<const KpiRow> rows) {
  std::string out = kKpiCsvHeader;
  out += '\n';
  for (const KpiRow& r : rows) {
    out += fmt9(r.phi);
    for (double v : {r.kpi.M, r.kpi.IR, r.kpi.V_raw, r.kpi.TI, r.kpi.MTI, r.kpi.DS, r.kpi.MDS, r.kpi.CN,
                     r.kpi.MCN, r.kpi.orientation_dist, r.kpi.position_dist}) {
      out += ',';
      out += fmt9(v);
    }
    out += '\n';
  }
  return out;
}

}  // namespace singdist
