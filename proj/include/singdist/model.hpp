#pragma once
// Mechanism model: design parameters, interpretations of the two rigid sides,
// one-parameter motions, and posed configurations.
//
// Conventions. A design is frame-normalized: base anchors k1=(0,0), k2=(x2,0),
// k3=(x3,y3); platform anchor coordinates p1=(0,0), p2=(x5,0), p3=(x6,y6) in
// the platform frame. A posed configuration lists six world anchor points,
// base first. Leg i connects anchor i-1 to anchor i+2 (0-based).

#include <array>
#include <optional>
#include <string>

#include "singdist/core.hpp"

namespace singdist {

/// How one side of the mechanism is treated when searching for the closest
/// singular configuration:
///  - Rigid: the side moves as a rigid body (congruence enforced exactly);
///  - Plate: the side deforms freely, penalized as a filled triangular plate;
///  - Bars:  the side deforms freely, penalized as three pin-joined bars.
enum class SideMode { Rigid, Plate, Bars };

inline char side_mode_token(SideMode m) {
  switch (m) {
    case SideMode::Rigid: return 'r';
    case SideMode::Plate: return 't';
    default: return 'b';
  }
}

/// Display glyph used in plot legends.
inline const char* side_mode_glyph(SideMode m) {
  switch (m) {
    case SideMode::Rigid: return "▭";  // ▭
    case SideMode::Plate: return "▲";  // ▲
    default: return "△";               // △
  }
}

/// One of the nine (base, platform) treatments, or the preliminary variant
/// that averages raw anchor displacements with no side terms.
struct Interpretation {
  bool preliminary = false;
  SideMode base = SideMode::Bars;
  SideMode platform = SideMode::Bars;

  std::string token() const {
    if (preliminary) return "prelim";
    return std::string{side_mode_token(base)} + side_mode_token(platform);
  }

  /// Legend label, e.g. "D[▭,△]" (base glyph first).
  std::string label() const {
    if (preliminary) return "D[••]";
    return std::string("D[") + side_mode_glyph(base) + "," + side_mode_glyph(platform) + "]";
  }

  friend bool operator==(const Interpretation& a, const Interpretation& b) {
    if (a.preliminary != b.preliminary) return false;
    if (a.preliminary) return true;
    return a.base == b.base && a.platform == b.platform;
  }
};

/// Parses "rr", "rt", ..., "bb" or "prelim"; returns nullopt on anything else.
inline std::optional<Interpretation> parse_interpretation(const std::string& tok) {
  if (tok == "prelim") return Interpretation{true, SideMode::Bars, SideMode::Bars};
  if (tok.size() != 2) return std::nullopt;
  auto mode = [](char c) -> std::optional<SideMode> {
    if (c == 'r') return SideMode::Rigid;
    if (c == 't') return SideMode::Plate;
    if (c == 'b') return SideMode::Bars;
    return std::nullopt;
  };
  auto b = mode(tok[0]), p = mode(tok[1]);
  if (!b || !p) return std::nullopt;
  return Interpretation{false, *b, *p};
}

/// All nine interpretations in row-major (base, platform) order.
inline std::array<Interpretation, 9> all_interpretations() {
  std::array<Interpretation, 9> out;
  int i = 0;
  for (SideMode b : {SideMode::Rigid, SideMode::Plate, SideMode::Bars})
    for (SideMode p : {SideMode::Rigid, SideMode::Plate, SideMode::Bars}) out[i++] = Interpretation{false, b, p};
  return out;
}

/// Frame-normalized design of the two sides.
struct DesignParams {
  double x2 = 0, x3 = 0, y3 = 0;  ///< base anchors (0,0), (x2,0), (x3,y3)
  double x5 = 0, x6 = 0, y6 = 0;  ///< platform anchors (0,0), (x5,0), (x6,y6) in platform frame

  std::array<Vec2, 3> base_points() const { return {Vec2{0, 0}, Vec2{x2, 0}, Vec2{x3, y3}}; }
  std::array<Vec2, 3> platform_points() const { return {Vec2{0, 0}, Vec2{x5, 0}, Vec2{x6, y6}}; }

  bool base_collinear(double tol = 1e-12) const { return std::abs(y3) <= tol * std::max(1.0, std::abs(x2)); }
  bool platform_collinear(double tol = 1e-12) const { return std::abs(y6) <= tol * std::max(1.0, std::abs(x5)); }
};

namespace detail {
/// Renormalizes three labeled points to the design frame (first at origin,
/// second on the positive x-axis). Returns {x2, x3, y3}-style coordinates , or
/// nullopt if the first two points coincide.
inline std::optional<std::array<double, 3>> renormalize(const std::array<Vec2, 3>& q) {
  Vec2 u = q[1] - q[0];
  double len = norm(u);
  if (len < 1e-12) return std::nullopt;
  Vec2 e = {u.x / len, u.y / len};
  Vec2 w = q[2] - q[0];
  return std::array<double, 3>{len, dot(w, e), cross(e, w)};
}
}  // namespace detail

/// Relabels the legs by the lexicographically first permutation for which the
/// normalized design has x2 != 0 and x5 != 0, and renormalizes the frame.
/// Idempotent on already-valid designs. Throws ArchitectureSingular when no
/// permutation works (a side collapses to a single point).
inline DesignParams relabel_canonical(const DesignParams& d) {
  static constexpr std::array<std::array<int, 3>, 6> kPerms = {
      {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}}};
  auto base = d.base_points();
  auto plat = d.platform_points();
  for (const auto& perm : kPerms) {
    std::array<Vec2, 3> b = {base[perm[0]], base[perm[1]], base[perm[2]]};
    std::array<Vec2, 3> p = {plat[perm[0]], plat[perm[1]], plat[perm[2]]};
    auto nb = detail::renormalize(b);
    auto np = detail::renormalize(p);
    if (!nb || !np) continue;
    return DesignParams{(*nb)[0], (*nb)[1], (*nb)[2], (*np)[0], (*np)[1], (*np)[2]};
  }
  throw ArchitectureSingular("no leg relabeling yields distinct first two anchors on both sides");
}

/// One-parameter motion of the platform: rotation by the motion parameter
/// itself (unless `rotate` is false) and a degree-1 trigonometric translation
/// t(phi) = a0 + a1 cos(phi) + b1 sin(phi), sampled at n equally spaced
/// values from v to w inclusive.
struct MotionSpec {
  Vec2 a0{}, a1{}, b1{};
  double v = 0, w = 0;
  int n = 2;
  bool rotate = true;

  double phi_at(int j) const { return v + (w - v) * static_cast<double>(j) / static_cast<double>(n - 1); }
};

/// Six world anchor points; base anchors first.
struct Configuration {
  std::array<Vec2, 6> k{};
  Vec2 leg_dir(int i) const { return k[i + 3] - k[i]; }  ///< anchor i toward anchor i+3
};

/// Posed anchor points over an arbitrary scalar (double, or Complex for
/// analytically continued motion parameters).
template <class T>
std::array<V2<T>, 6> pose_points(const DesignParams& d, const MotionSpec& m, T phi) {
  using std::cos;
  using std::sin;
  T c = m.rotate ? cos(phi) : T(1);
  T s = m.rotate ? sin(phi) : T(0);
  V2<T> t{T(m.a0.x) + T(m.a1.x) * cos(phi) + T(m.b1.x) * sin(phi),
          T(m.a0.y) + T(m.a1.y) * cos(phi) + T(m.b1.y) * sin(phi)};
  auto place = [&](const Vec2& p) -> V2<T> {
    return {c * T(p.x) - s * T(p.y) + t.x, s * T(p.x) + c * T(p.y) + t.y};
  };
  auto base = d.base_points();
  auto plat = d.platform_points();
  std::array<V2<T>, 6> out;
  for (int i = 0; i < 3; ++i) out[i] = {T(base[i].x), T(base[i].y)};
  for (int i = 0; i < 3; ++i) out[i + 3] = place(plat[i]);
  return out;
}

/// Real posed configuration at motion parameter phi.
inline Configuration pose_config(const DesignParams& d, const MotionSpec& m, double phi) {
  Configuration c;
  c.k = pose_points<double>(d, m, phi);
  return c;
}

}  // namespace singdist
