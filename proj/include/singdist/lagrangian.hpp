#pragma once
// Assembly of the first-order optimality systems whose solutions are the
// critical points of a squared extrinsic distance restricted to a degeneracy
// variety. One "branch" is one such constrained-optimization family:
//
//   variety      - critical points of D^2 on the singularity variety V=0,
//                  with rigid sides eliminated and held congruent;
//   collinear_p  - critical points of D^2 on "platform anchors collinear"
//                  (deformable-platform interpretations only);
//   collinear_b  - mirror image for the base;
//   oneline      - all six anchors on one unknown line (both sides rigid or
//                  plate); for two rigid sides the relative orientation of
//                  the two layouts yields two sub-systems;
//   collapse_p   - platform collapsed to one point, base rigid;
//   collapse_b   - base collapsed to one point, platform rigid.
//
// Every system is polynomial: unknowns first, parameters after. Rigid-side
// shape enters through ratio parameters (third anchor = first + r*(second -
// first) + s*perp(...)), and squared reference lengths are promoted to
// independent parameters, so coefficients stay affine-linear in parameter
// monomials for the continuation layer.

#include <Eigen/Dense>
#include <array>
#include <optional>
#include <string>
#include <vector>

#include "singdist/core.hpp"
#include "singdist/metrics.hpp"
#include "singdist/model.hpp"
#include "singdist/poly.hpp"
#include "singdist/varieties.hpp"

namespace singdist {

enum class BranchKind { SingVariety, CollinearityP, CollinearityB, Case1, CollapsedP, CollapsedB };

struct BranchSpec {
  BranchKind kind = BranchKind::SingVariety;
  int sub = 0;  ///< oneline with two rigid sides: 0 = same orientation, 1 = opposite

  friend bool operator==(const BranchSpec& a, const BranchSpec& b) { return a.kind == b.kind && a.sub == b.sub; }
};

inline std::string branch_tag(const BranchSpec& b) {
  switch (b.kind) {
    case BranchKind::SingVariety: return "variety";
    case BranchKind::CollinearityP: return "collinear_p";
    case BranchKind::CollinearityB: return "collinear_b";
    case BranchKind::Case1: return b.sub == 0 ? "oneline0" : "oneline1";
    case BranchKind::CollapsedP: return "collapse_p";
    case BranchKind::CollapsedB: return "collapse_b";
  }
  return "?";
}

/// A branch's polynomial optimality system plus bookkeeping.
struct CriticalSystem {
  ParameterizedSystem sys;
  Interpretation interp;
  BranchSpec branch;
  int expected_count = -1;  ///< generic finite-solution count; -1 = not frozen
};

// ---------------------------------------------------------------------------
// Branch registry.
// ---------------------------------------------------------------------------

/// Generic finite-solution counts per (interpretation, branch).
inline int expected_count(const Interpretation& interp, const BranchSpec& b) {
  const bool base_r = !interp.preliminary && interp.base == SideMode::Rigid;
  const bool plat_r = !interp.preliminary && interp.platform == SideMode::Rigid;
  switch (b.kind) {
    case BranchKind::SingVariety:
      if (interp.preliminary) return 50;
      if (base_r && plat_r) return 88;
      if (base_r || plat_r) return 80;
      return 50;
    case BranchKind::CollinearityP: return base_r ? 8 : 2;
    case BranchKind::CollinearityB: return plat_r ? 8 : 2;
    case BranchKind::Case1: return 8;
    case BranchKind::CollapsedP:
    case BranchKind::CollapsedB: return 2;
  }
  return -1;
}

/// Branches that serve an interpretation (structure only; see
/// `branch_feasible` for design-dependent feasibility of oneline branches).
inline std::vector<BranchSpec> applicable_branches(const Interpretation& interp) {
  std::vector<BranchSpec> out{{BranchKind::SingVariety, 0}};
  if (interp.preliminary) return out;
  if (interp.platform == SideMode::Bars) out.push_back({BranchKind::CollinearityP, 0});
  if (interp.base == SideMode::Bars) out.push_back({BranchKind::CollinearityB, 0});
  const bool base_line = interp.base != SideMode::Bars;
  const bool plat_line = interp.platform != SideMode::Bars;
  if (base_line && plat_line) {
    out.push_back({BranchKind::Case1, 0});
    if (interp.base == SideMode::Rigid && interp.platform == SideMode::Rigid)
      out.push_back({BranchKind::Case1, 1});
  }
  if (interp.base == SideMode::Rigid && interp.platform == SideMode::Bars)
    out.push_back({BranchKind::CollapsedP, 0});
  if (interp.base == SideMode::Bars && interp.platform == SideMode::Rigid)
    out.push_back({BranchKind::CollapsedB, 0});
  return out;
}

/// A oneline branch with a rigid side demands that side's design be
/// collinear; everything else is always feasible.
inline bool branch_feasible(const Interpretation& interp, const BranchSpec& b, const DesignParams& d) {
  if (b.kind != BranchKind::Case1) return true;
  if (interp.base == SideMode::Rigid && !d.base_collinear(1e-9)) return false;
  if (interp.platform == SideMode::Rigid && !d.platform_collinear(1e-9)) return false;
  return true;
}

// ---------------------------------------------------------------------------
// System construction.
// ---------------------------------------------------------------------------

namespace detail {

inline constexpr const char* kRefNames[12] = {"a1", "b1", "a2", "b2", "a3", "b3",
                                              "a4", "b4", "a5", "b5", "a6", "b6"};

/// Incremental variable-space builder: register unknown names, then parameter
/// names, then mint MultiPoly variables in the finished space.
class SpaceBuilder {
 public:
  int add_unknown(const std::string& n) {
    if (sealed_) throw ArityMismatch("unknowns must be added before parameters");
    names_.push_back(n);
    return static_cast<int>(names_.size()) - 1;
  }
  int add_param(const std::string& n) {
    if (!sealed_) throw ArityMismatch("seal unknowns before adding parameters");
    names_.push_back(n);
    return static_cast<int>(names_.size()) - 1;
  }
  void seal_unknowns() {
    sealed_ = true;
    sealed_unknowns_ = static_cast<int>(names_.size());
  }
  MultiPoly var(int idx) const { return MultiPoly::variable(static_cast<int>(names_.size()), idx); }
  MultiPoly constant(Complex c) const { return MultiPoly::constant(static_cast<int>(names_.size()), c); }
  const std::vector<std::string>& names() const { return names_; }
  int sealed_unknowns_ = 0;

 private:
  std::vector<std::string> names_;
  bool sealed_ = false;
};

/// Squared metric value as a polynomial from displacement component pairs.
inline MultiPoly metric_dist2_poly(const MetricPlan& plan,
                                   const std::vector<std::pair<MultiPoly, MultiPoly>>& d) {
  const int nv = d.front().first.nvars();
  MultiPoly sum(nv);
  auto dotp = [](const std::pair<MultiPoly, MultiPoly>& a, const std::pair<MultiPoly, MultiPoly>& b) {
    return a.first * b.first + a.second * b.second;
  };
  for (int p : plan.points) sum += dotp(d[p], d[p]);
  for (const auto& s : plan.segments) {
    MultiPoly t = dotp(d[s[0]], d[s[0]]) + dotp(d[s[1]], d[s[1]]) + dotp(d[s[0]], d[s[1]]);
    sum += t * Complex(1.0 / 3.0);
  }
  for (const auto& t : plan.triangles) {
    MultiPoly u = dotp(d[t[0]], d[t[0]]) + dotp(d[t[1]], d[t[1]]) + dotp(d[t[2]], d[t[2]]);
    u += dotp(d[t[0]], d[t[1]]) + dotp(d[t[0]], d[t[2]]) + dotp(d[t[1]], d[t[2]]);
    sum += u * Complex(1.0 / 6.0);
  }
  return sum * Complex(1.0 / plan.normalizer);
}

/// One-point collapse of a side with the opposite side rigid: quadratic
/// objective, one rigidity constraint.
inline CriticalSystem build_collapsed(const Interpretation& interp, const BranchSpec& branch) {
  const bool plat_collapsed = branch.kind == BranchKind::CollapsedP;
  if (plat_collapsed && !(interp.base == SideMode::Rigid && interp.platform == SideMode::Bars))
    throw IncompatibleBranch("collapse_p requires a rigid base and a bars platform");
  if (!plat_collapsed && !(interp.base == SideMode::Bars && interp.platform == SideMode::Rigid))
    throw IncompatibleBranch("collapse_b requires a bars base and a rigid platform");

  SpaceBuilder sb;
  std::vector<int> coords;
  int cq = -1, dq = -1, mult = -1;
  std::array<int, 12> cv;
  cv.fill(-1);
  auto addc = [&](int slot, const std::string& n) {
    cv[slot] = sb.add_unknown(n);
    coords.push_back(cv[slot]);
  };
  if (plat_collapsed) {
    addc(0, "c1");
    addc(1, "d1");
    addc(2, "c2");
    addc(3, "d2");
    cq = sb.add_unknown("cq");
    dq = sb.add_unknown("dq");
    coords.push_back(cq);
    coords.push_back(dq);
    mult = sb.add_unknown("mu");
  } else {
    cq = sb.add_unknown("cq");
    dq = sb.add_unknown("dq");
    coords.push_back(cq);
    coords.push_back(dq);
    addc(6, "c4");
    addc(7, "d4");
    addc(8, "c5");
    addc(9, "d5");
    mult = sb.add_unknown("kap");
  }
  sb.seal_unknowns();
  std::array<int, 12> ref;
  for (int i = 0; i < 12; ++i) ref[i] = sb.add_param(kRefNames[i]);
  int rr = sb.add_param(plat_collapsed ? "r3" : "r6");
  int ss = sb.add_param(plat_collapsed ? "s3" : "s6");
  int ll = sb.add_param(plat_collapsed ? "lB" : "lP");

  const int nv = static_cast<int>(sb.names().size());
  auto v = [&](int idx) { return MultiPoly::variable(nv, idx); };
  std::array<MultiPoly, 12> cd;
  if (plat_collapsed) {
    for (int slot : {0, 1, 2, 3}) cd[slot] = v(cv[slot]);
    auto [cx, cy] = similar_third_point(cd[0], cd[1], cd[2], cd[3], v(rr), v(ss));
    cd[4] = cx;
    cd[5] = cy;
    for (int i = 3; i < 6; ++i) {
      cd[2 * i] = v(cq);
      cd[2 * i + 1] = v(dq);
    }
  } else {
    for (int i = 0; i < 3; ++i) {
      cd[2 * i] = v(cq);
      cd[2 * i + 1] = v(dq);
    }
    for (int slot : {6, 7, 8, 9}) cd[slot] = v(cv[slot]);
    auto [cx, cy] = similar_third_point(cd[6], cd[7], cd[8], cd[9], v(rr), v(ss));
    cd[10] = cx;
    cd[11] = cy;
  }
  std::vector<std::pair<MultiPoly, MultiPoly>> disp(6);
  for (int i = 0; i < 6; ++i) disp[i] = {cd[2 * i] - v(ref[2 * i]), cd[2 * i + 1] - v(ref[2 * i + 1])};
  MultiPoly D2 = metric_dist2_poly(metric_plan(interp), disp);
  MultiPoly side = plat_collapsed ? rigidity_condition_poly(cd[0], cd[1], cd[2], cd[3], v(ll))
                                  : rigidity_condition_poly(cd[6], cd[7], cd[8], cd[9], v(ll));
  MultiPoly L = D2 + v(mult) * side;

  CriticalSystem out;
  out.interp = interp;
  out.branch = branch;
  out.expected_count = expected_count(interp, branch);
  out.sys.n_unknowns = sb.sealed_unknowns_;
  out.sys.names = sb.names();
  for (int u : coords) out.sys.equations.push_back(L.differentiate(u));
  out.sys.equations.push_back(side);
  return out;
}

}  // namespace detail

/// Builds the optimality system for one branch of one interpretation.
/// Unknown and parameter names are stable; parameter values are produced by
/// `param_values` / `source_param_values` in matching order.
inline CriticalSystem build_system(const Interpretation& interp, const BranchSpec& branch) {
  using detail::SpaceBuilder;
  if (interp.preliminary && branch.kind != BranchKind::SingVariety)
    throw IncompatibleBranch("the preliminary variant only has the variety branch");
  if (branch.kind == BranchKind::CollapsedP || branch.kind == BranchKind::CollapsedB)
    return detail::build_collapsed(interp, branch);
  if (branch.kind == BranchKind::CollinearityP && interp.platform != SideMode::Bars)
    throw IncompatibleBranch("collinear_p requires a bars platform");
  if (branch.kind == BranchKind::CollinearityB && interp.base != SideMode::Bars)
    throw IncompatibleBranch("collinear_b requires a bars base");
  if (branch.kind == BranchKind::Case1 &&
      (interp.base == SideMode::Bars || interp.platform == SideMode::Bars))
    throw IncompatibleBranch("oneline requires rigid or plate sides");
  const bool base_r = !interp.preliminary && interp.base == SideMode::Rigid;
  const bool plat_r = !interp.preliminary && interp.platform == SideMode::Rigid;

  // --- compute the full space layout first (names in registration order) ---
  SpaceBuilder sb;
  std::vector<int> coord_unknowns;  // geometry unknowns, gradient taken per entry
  int lam = -1, mu = -1, kap = -1;
  // Anchor coordinate expression slots, filled later: [c1,d1,...,c6,d6].
  std::array<int, 12> coord_var;  // variable index or -1 when expressed
  coord_var.fill(-1);

  auto add_coord = [&](int slot, const std::string& n) {
    int idx = sb.add_unknown(n);
    coord_var[slot] = idx;
    coord_unknowns.push_back(idx);
    return idx;
  };

  struct Extra {
    int a = -1, b = -1;                            // oneline anchor point
    std::array<int, 5> delta{-1, -1, -1, -1, -1};  // oneline offsets (unknown slots)
    int e0 = -1, e1 = -1;                          // oneline direction parameters
  } ex;

  switch (branch.kind) {
    case BranchKind::SingVariety:
    case BranchKind::CollinearityP:
    case BranchKind::CollinearityB: {
      // Rigid sides are eliminated except in branches that do not constrain
      // them rigid (never happens: rigidity always accompanies SideMode::Rigid).
      add_coord(0, "c1");
      add_coord(1, "d1");
      add_coord(2, "c2");
      add_coord(3, "d2");
      if (!base_r) {
        add_coord(4, "c3");
        add_coord(5, "d3");
      }
      add_coord(6, "c4");
      add_coord(7, "d4");
      add_coord(8, "c5");
      add_coord(9, "d5");
      if (!plat_r) {
        add_coord(10, "c6");
        add_coord(11, "d6");
      }
      lam = sb.add_unknown("lam");
      if (base_r) mu = sb.add_unknown("mu");
      if (plat_r) kap = sb.add_unknown("kap");
      break;
    }
    case BranchKind::Case1: {
      ex.a = sb.add_unknown("a");
      ex.b = sb.add_unknown("b");
      if (!base_r) {
        ex.delta[0] = sb.add_unknown("g1");
        ex.delta[1] = sb.add_unknown("g2");
      }
      ex.delta[2] = sb.add_unknown("g3");
      if (!plat_r) {
        ex.delta[3] = sb.add_unknown("g4");
        ex.delta[4] = sb.add_unknown("g5");
      }
      ex.e0 = sb.add_unknown("e0");
      ex.e1 = sb.add_unknown("e1");
      lam = sb.add_unknown("lam");
      break;
    }
    default:
      throw IncompatibleBranch("collapse branches are built separately");
  }
  sb.seal_unknowns();

  // Parameters: reference anchor coordinates, then shape extras.
  std::array<int, 12> ref;
  for (int i = 0; i < 12; ++i) ref[i] = sb.add_param(detail::kRefNames[i]);
  int r3 = -1, s3 = -1, lB = -1, r6 = -1, s6 = -1, lP = -1;
  int g1p = -1, g2p = -1, g4p = -1, g5p = -1;
  if (branch.kind == BranchKind::Case1) {
    if (base_r) {
      g1p = sb.add_param("g1");
      g2p = sb.add_param("g2");
    }
    if (plat_r) {
      g4p = sb.add_param("g4");
      g5p = sb.add_param("g5");
    }
  } else {
    if (base_r) {
      r3 = sb.add_param("r3");
      s3 = sb.add_param("s3");
      lB = sb.add_param("lB");
    }
    if (plat_r) {
      r6 = sb.add_param("r6");
      s6 = sb.add_param("s6");
      lP = sb.add_param("lP");
    }
  }

  const int nv = static_cast<int>(sb.names().size());
  auto v = [&](int idx) { return MultiPoly::variable(nv, idx); };

  // --- anchor coordinate expressions --------------------------------------
  std::array<MultiPoly, 12> cd;
  switch (branch.kind) {
    case BranchKind::SingVariety:
    case BranchKind::CollinearityP:
    case BranchKind::CollinearityB: {
      for (int i = 0; i < 12; ++i)
        if (coord_var[i] >= 0) cd[i] = v(coord_var[i]);
      if (base_r) {
        auto [cx, cy] = similar_third_point(cd[0], cd[1], cd[2], cd[3], v(r3), v(s3));
        cd[4] = cx;
        cd[5] = cy;
      }
      if (plat_r) {
        auto [cx, cy] = similar_third_point(cd[6], cd[7], cd[8], cd[9], v(r6), v(s6));
        cd[10] = cx;
        cd[11] = cy;
      }
      break;
    }
    case BranchKind::Case1: {
      MultiPoly ux = v(ex.e0) * v(ex.e0) - v(ex.e1) * v(ex.e1);
      MultiPoly uy = 2.0 * (v(ex.e0) * v(ex.e1));
      MultiPoly A = v(ex.a), B = v(ex.b);
      auto offset = [&](int j) -> MultiPoly {  // line offset of anchor j = 1..5 (anchor 0 sits at (a,b))
        switch (j) {
          case 1: return base_r ? v(g1p) : v(ex.delta[0]);
          case 2: return base_r ? v(g2p) : v(ex.delta[1]);
          case 3: return v(ex.delta[2]);
          case 4:
            return plat_r ? (branch.sub == 0 ? v(ex.delta[2]) + v(g4p) : v(ex.delta[2]) - v(g4p))
                          : v(ex.delta[3]);
          case 5:
            return plat_r ? (branch.sub == 0 ? v(ex.delta[2]) + v(g5p) : v(ex.delta[2]) - v(g5p))
                          : v(ex.delta[4]);
        }
        return MultiPoly(nv);
      };
      cd[0] = A;
      cd[1] = B;
      for (int j = 1; j <= 5; ++j) {
        MultiPoly off = offset(j);
        cd[2 * j] = A + off * ux;
        cd[2 * j + 1] = B + off * uy;
      }
      break;
    }
    default:
      break;
  }

  // --- objective and constraints ------------------------------------------
  std::vector<std::pair<MultiPoly, MultiPoly>> disp(6);
  for (int i = 0; i < 6; ++i) disp[i] = {cd[2 * i] - v(ref[2 * i]), cd[2 * i + 1] - v(ref[2 * i + 1])};
  MultiPoly D2 = detail::metric_dist2_poly(metric_plan(interp), disp);

  std::vector<MultiPoly> constraints;  // paired with multipliers [lam, mu, kap]
  std::vector<int> multipliers;
  switch (branch.kind) {
    case BranchKind::SingVariety:
      constraints.push_back(variety_poly(cd));
      multipliers.push_back(lam);
      break;
    case BranchKind::CollinearityP:
      constraints.push_back(collinearity_poly({cd[6], cd[7], cd[8], cd[9], cd[10], cd[11]}));
      multipliers.push_back(lam);
      break;
    case BranchKind::CollinearityB:
      constraints.push_back(collinearity_poly({cd[0], cd[1], cd[2], cd[3], cd[4], cd[5]}));
      multipliers.push_back(lam);
      break;
    case BranchKind::Case1: {
      MultiPoly N = v(ex.e0) * v(ex.e0) + v(ex.e1) * v(ex.e1) - MultiPoly::constant(nv, 1.0);
      constraints.push_back(N);
      multipliers.push_back(lam);
      break;
    }
    default:
      break;
  }
  if (branch.kind != BranchKind::Case1) {
    if (base_r) {
      constraints.push_back(rigidity_condition_poly(cd[0], cd[1], cd[2], cd[3], v(lB)));
      multipliers.push_back(mu);
    }
    if (plat_r) {
      constraints.push_back(rigidity_condition_poly(cd[6], cd[7], cd[8], cd[9], v(lP)));
      multipliers.push_back(kap);
    }
  }

  MultiPoly L = D2;
  for (std::size_t i = 0; i < constraints.size(); ++i) L += v(multipliers[i]) * constraints[i];

  CriticalSystem out;
  out.interp = interp;
  out.branch = branch;
  out.expected_count = expected_count(interp, branch);
  out.sys.n_unknowns = sb.sealed_unknowns_;
  out.sys.names = sb.names();
  std::vector<int> grad_vars;
  if (branch.kind == BranchKind::Case1) {
    grad_vars.push_back(ex.a);
    grad_vars.push_back(ex.b);
    for (int j = 0; j < 5; ++j)
      if (ex.delta[j] >= 0) grad_vars.push_back(ex.delta[j]);
    grad_vars.push_back(ex.e0);
    grad_vars.push_back(ex.e1);
  } else {
    grad_vars = coord_unknowns;
  }
  for (int u : grad_vars) out.sys.equations.push_back(L.differentiate(u));
  for (const auto& c : constraints) out.sys.equations.push_back(c);
  return out;
}

// ---------------------------------------------------------------------------
// Parameter vectors.
// ---------------------------------------------------------------------------

/// Parameter values of a branch family at reference configuration K; the
/// anchor points may be complex (analytically continued poses), the design
/// shape parameters are always real.
inline std::vector<Complex> param_values(const CriticalSystem& cs, const DesignParams& d,
                                         const std::array<CVec2, 6>& K) {
  std::vector<Complex> p;
  const auto& names = cs.sys.names;
  for (int i = cs.sys.n_unknowns; i < cs.sys.n_vars(); ++i) {
    const std::string& n = names[i];
    if (n.size() == 2 && (n[0] == 'a' || n[0] == 'b') && n[1] >= '1' && n[1] <= '6') {
      int anchor = n[1] - '1';
      p.push_back(n[0] == 'a' ? K[anchor].x : K[anchor].y);
    } else if (n == "r3")
      p.push_back(d.x3 / d.x2);
    else if (n == "s3")
      p.push_back(d.y3 / d.x2);
    else if (n == "lB")
      p.push_back(d.x2 * d.x2);
    else if (n == "r6")
      p.push_back(d.x6 / d.x5);
    else if (n == "s6")
      p.push_back(d.y6 / d.x5);
    else if (n == "lP")
      p.push_back(d.x5 * d.x5);
    else if (n == "g1")
      p.push_back(d.x2);
    else if (n == "g2")
      p.push_back(d.x3);
    else if (n == "g4")
      p.push_back(d.x5);
    else if (n == "g5")
      p.push_back(d.x6);
    else
      throw UnknownVariable("parameter " + n);
  }
  return p;
}

/// Real-pose convenience overload.
inline std::vector<Complex> param_values(const CriticalSystem& cs, const DesignParams& d,
                                         const std::array<Vec2, 6>& K) {
  std::array<CVec2, 6> kc;
  for (int i = 0; i < 6; ++i) kc[i] = {Complex(K[i].x), Complex(K[i].y)};
  return param_values(cs, d, kc);
}

/// Generic complex parameter values for certification runs: anchor-frame
/// normalization zeros kept (a1 = b1 = b2 = 0), everything else random.
inline std::vector<Complex> source_param_values(const CriticalSystem& cs, KeyedRng& rng) {
  std::vector<Complex> p;
  for (int i = cs.sys.n_unknowns; i < cs.sys.n_vars(); ++i) {
    const std::string& n = cs.sys.names[i];
    if (n == "a1" || n == "b1" || n == "b2")
      p.push_back(Complex{0.0});
    else
      p.push_back(rng.generic_complex());
  }
  return p;
}

// ---------------------------------------------------------------------------
// Solution post-processing.
// ---------------------------------------------------------------------------

/// Anchor points of the closest configuration encoded by a real solution
/// vector of the branch system.
inline std::array<Vec2, 6> reconstruct_closest(const CriticalSystem& cs, const DesignParams& d,
                                               std::span<const double> u) {
  if (static_cast<int>(u.size()) < cs.sys.n_unknowns) throw ArityMismatch("solution vector too short");
  auto at = [&](const std::string& name) -> double {
    for (int i = 0; i < cs.sys.n_unknowns; ++i)
      if (cs.sys.names[i] == name) return u[i];
    throw UnknownVariable("unknown " + name);
  };
  std::array<Vec2, 6> k{};
  switch (cs.branch.kind) {
    case BranchKind::SingVariety:
    case BranchKind::CollinearityP:
    case BranchKind::CollinearityB: {
      k[0] = {at("c1"), at("d1")};
      k[1] = {at("c2"), at("d2")};
      k[3] = {at("c4"), at("d4")};
      k[4] = {at("c5"), at("d5")};
      if (!cs.interp.preliminary && cs.interp.base == SideMode::Rigid)
        k[2] = similar_third_point(k[0], k[1], d.x3 / d.x2, d.y3 / d.x2);
      else
        k[2] = {at("c3"), at("d3")};
      if (!cs.interp.preliminary && cs.interp.platform == SideMode::Rigid)
        k[5] = similar_third_point(k[3], k[4], d.x6 / d.x5, d.y6 / d.x5);
      else
        k[5] = {at("c6"), at("d6")};
      return k;
    }
    case BranchKind::Case1: {
      Vec2 o{at("a"), at("b")};
      double e0 = at("e0"), e1 = at("e1");
      Vec2 dir{e0 * e0 - e1 * e1, 2 * e0 * e1};
      const bool base_r = cs.interp.base == SideMode::Rigid;
      const bool plat_r = cs.interp.platform == SideMode::Rigid;
      double g1 = base_r ? d.x2 : at("g1");
      double g2 = base_r ? d.x3 : at("g2");
      double g3 = at("g3");
      double sgn = cs.branch.sub == 0 ? 1.0 : -1.0;
      double g4 = plat_r ? g3 + sgn * d.x5 : at("g4");
      double g5 = plat_r ? g3 + sgn * d.x6 : at("g5");
      k[0] = o;
      k[1] = o + g1 * dir;
      k[2] = o + g2 * dir;
      k[3] = o + g3 * dir;
      k[4] = o + g4 * dir;
      k[5] = o + g5 * dir;
      return k;
    }
    case BranchKind::CollapsedP: {
      k[0] = {at("c1"), at("d1")};
      k[1] = {at("c2"), at("d2")};
      k[2] = similar_third_point(k[0], k[1], d.x3 / d.x2, d.y3 / d.x2);
      Vec2 q{at("cq"), at("dq")};
      k[3] = k[4] = k[5] = q;
      return k;
    }
    case BranchKind::CollapsedB: {
      Vec2 q{at("cq"), at("dq")};
      k[0] = k[1] = k[2] = q;
      k[3] = {at("c4"), at("d4")};
      k[4] = {at("c5"), at("d5")};
      k[5] = similar_third_point(k[3], k[4], d.x6 / d.x5, d.y6 / d.x5);
      return k;
    }
  }
  throw IncompatibleBranch("unhandled branch");
}

/// Sign attached to a branch distance at reference configuration K: the side
/// of the constraint variety K lies on.
inline double branch_sign(const BranchSpec& b, const std::array<Vec2, 6>& K) {
  double s = 0;
  switch (b.kind) {
    case BranchKind::CollinearityP: s = eval_collinearity(K, Side::Platform); break;
    case BranchKind::CollinearityB: s = eval_collinearity(K, Side::Base); break;
    default: s = eval_variety(K); break;
  }
  return s > 0 ? 1.0 : (s < 0 ? -1.0 : 0.0);
}

// ---------------------------------------------------------------------------
// Closed-form companions of the collinearity branches.
// ---------------------------------------------------------------------------

namespace detail {
/// Minimizes a quadratic function f over directions `dirs` around base point
/// x0 (all other coordinates of the underlying space held fixed): returns the
/// minimizing coefficient vector of the affine combination x0 + sum t_i dir_i.
template <class F>
Eigen::VectorXd minimize_quadratic(const F& f, int n, double h = 1.0) {
  // f is exactly quadratic: build Hessian and gradient by evaluation.
  Eigen::MatrixXd H(n, n);
  Eigen::VectorXd g(n);
  std::vector<double> t(n, 0.0);
  double f0 = f(t);
  for (int i = 0; i < n; ++i) {
    auto tp = t, tm = t;
    tp[i] = h;
    tm[i] = -h;
    double fp = f(tp), fm = f(tm);
    H(i, i) = (fp - 2 * f0 + fm) / (h * h);
    g(i) = (fp - fm) / (2 * h);
  }
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      auto tij = t;
      tij[i] = h;
      tij[j] = h;
      double fij = f(tij);
      double hij = (fij - f0 - g(i) * h - g(j) * h - 0.5 * H(i, i) * h * h - 0.5 * H(j, j) * h * h) / (h * h);
      H(i, j) = H(j, i) = hij;
    }
  }
  return H.ldlt().solve(-g);
}
}  // namespace detail

/// Closest configuration with one side collinear, for interpretations whose
/// opposite side is free (plate or bars): the collinear side's anchors are the
/// orthogonal projections onto their own total-least-squares line, and the
/// opposite side solves the remaining unconstrained quadratic problem.
inline std::array<Vec2, 6> pedal_projection(const Interpretation& interp, const std::array<Vec2, 6>& K,
                                            Side collinear_side) {
  if (interp.preliminary) throw IncompatibleBranch("pedal projection serves the nine side interpretations");
  SideMode own = collinear_side == Side::Platform ? interp.platform : interp.base;
  SideMode other = collinear_side == Side::Platform ? interp.base : interp.platform;
  if (own != SideMode::Bars) throw IncompatibleBranch("collinear side must be deformable");
  if (other == SideMode::Rigid) throw IncompatibleBranch("opposite side must be free for the pedal construction");

  const int off = collinear_side == Side::Platform ? 3 : 0;
  Vec2 m = (1.0 / 3.0) * (K[off] + K[off + 1] + K[off + 2]);
  double sxx = 0, sxy = 0, syy = 0;
  for (int i = 0; i < 3; ++i) {
    Vec2 q = K[off + i] - m;
    sxx += q.x * q.x;
    sxy += q.x * q.y;
    syy += q.y * q.y;
  }
  // Principal axis (largest eigenvalue) of the scatter matrix; isotropic
  // scatter degenerates to the x-axis direction.
  Vec2 u;
  double tr = sxx + syy, det = sxx * syy - sxy * sxy;
  double disc = std::sqrt(std::max(0.0, tr * tr / 4 - det));
  double l1 = tr / 2 + disc;
  if (disc < 1e-14 * std::max(1.0, tr)) {
    u = {1, 0};
  } else if (std::abs(sxy) > 1e-14 * std::max(1.0, tr)) {
    u = {l1 - syy, sxy};
    u = (1.0 / norm(u)) * u;
  } else {
    u = sxx >= syy ? Vec2{1, 0} : Vec2{0, 1};
  }

  std::array<Vec2, 6> out = K;
  for (int i = 0; i < 3; ++i) out[off + i] = m + dot(K[off + i] - m, u) * u;

  // Opposite side: minimize the interpretation metric over its six free
  // coordinates with the pedal side held fixed.
  const int oo = collinear_side == Side::Platform ? 0 : 3;
  auto f = [&](const std::vector<double>& t) {
    auto kk = out;
    for (int i = 0; i < 3; ++i) {
      kk[oo + i].x += t[2 * i];
      kk[oo + i].y += t[2 * i + 1];
    }
    return extrinsic_dist2(interp, K, kk);
  };
  Eigen::VectorXd sol = detail::minimize_quadratic(f, 6);
  for (int i = 0; i < 3; ++i) {
    out[oo + i].x += sol(2 * i);
    out[oo + i].y += sol(2 * i + 1);
  }
  return out;
}

/// Pose-independent collinearity distance in closed form, available when the
/// collinear side is deformable and the opposite side is free. S and the
/// discriminant depend only on the collinear side's own shape.
inline double pose_independent_distance(const DesignParams& d, const Interpretation& interp,
                                        Side collinear_side) {
  SideMode own = collinear_side == Side::Platform ? interp.platform : interp.base;
  SideMode other = collinear_side == Side::Platform ? interp.base : interp.platform;
  if (interp.preliminary || own != SideMode::Bars || other == SideMode::Rigid)
    throw IncompatibleBranch("closed form requires a deformable collinear side and a free opposite side");
  double p1, p2, p3;  // shape of the collinear side: anchors (0,0),(p1,0),(p2,p3)
  if (collinear_side == Side::Platform) {
    p1 = d.x5;
    p2 = d.x6;
    p3 = d.y6;
  } else {
    p1 = d.x2;
    p2 = d.x3;
    p3 = d.y3;
  }
  double S = p1 * p1 - p1 * p2 + p2 * p2 + p3 * p3;
  double eta = S * S - 3 * p1 * p1 * p3 * p3;
  double coef = other == SideMode::Plate ? 23.0 / 630.0 : 4.0 / 135.0;
  return std::sqrt(coef * (S - std::sqrt(std::max(0.0, eta))));
}

/// Distance to the fully collapsed candidate (one side contracted to a single
/// point, the opposite side free), obtained from the unconstrained quadratic
/// problem. Comparison value only; not a search branch.
inline double collapsed_free_distance(const Interpretation& interp, const std::array<Vec2, 6>& K,
                                      Side collapsed_side) {
  if (interp.preliminary) throw IncompatibleBranch("collapse comparison serves the nine side interpretations");
  SideMode other = collapsed_side == Side::Platform ? interp.base : interp.platform;
  if (other == SideMode::Rigid)
    throw IncompatibleBranch("rigid opposite side is served by the collapse branch itself");
  const int off = collapsed_side == Side::Platform ? 3 : 0;
  const int oo = collapsed_side == Side::Platform ? 0 : 3;
  Vec2 m = (1.0 / 3.0) * (K[off] + K[off + 1] + K[off + 2]);
  auto f = [&](const std::vector<double>& t) {
    auto kk = K;
    kk[off] = kk[off + 1] = kk[off + 2] = Vec2{m.x + t[0], m.y + t[1]};
    for (int i = 0; i < 3; ++i) {
      kk[oo + i].x += t[2 + 2 * i];
      kk[oo + i].y += t[3 + 2 * i];
    }
    return extrinsic_dist2(interp, K, kk);
  };
  Eigen::VectorXd sol = detail::minimize_quadratic(f, 8);
  std::vector<double> t(sol.data(), sol.data() + 8);
  return std::sqrt(std::max(0.0, f(t)));
}

}  // namespace singdist
