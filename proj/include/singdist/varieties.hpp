#pragma once
// Singularity and degeneracy varieties of six-anchor configurations.
//
// The central object is the degree-4 polynomial V in the twelve anchor
// coordinates whose vanishing characterizes singular configurations: column i
// of a 3x3 matrix holds the leg direction k_{i+3}-k_i on top and the line
// moment det(k_i, k_{i+3}) below (line coordinates of the leg carrier); V is
// the determinant, zero exactly when the three carrier lines are linearly
// dependent (concurrent or all parallel).
//
// Also here: side collinearity determinants, rigid-side conditions, the
// similarity elimination of a rigid side's third anchor, and constructions of
// configurations where the gradient of V vanishes.

#include <array>
#include <utility>

#include "singdist/core.hpp"
#include "singdist/model.hpp"
#include "singdist/poly.hpp"

namespace singdist {

enum class Side { Base, Platform };

// ---------------------------------------------------------------------------
// Symbolic builders. Coordinate polynomials are passed in explicitly so a
// caller can build the varieties over any variable space (plain unknowns,
// eliminated expressions, line parameterizations, ...).
// ---------------------------------------------------------------------------

/// V from coordinate polynomials [c1,d1,c2,d2,...,c6,d6].
inline MultiPoly variety_poly(const std::array<MultiPoly, 12>& cd) {
  auto c = [&](int i) -> const MultiPoly& { return cd[2 * (i - 1)]; };
  auto d = [&](int i) -> const MultiPoly& { return cd[2 * (i - 1) + 1]; };
  std::array<MultiPoly, 9> m;  // column-major 3x3: rows (dir_x, dir_y, moment)
  for (int i = 1; i <= 3; ++i) {
    m[3 * (i - 1) + 0] = c(i + 3) - c(i);
    m[3 * (i - 1) + 1] = d(i + 3) - d(i);
    m[3 * (i - 1) + 2] = c(i) * d(i + 3) - d(i) * c(i + 3);
  }
  auto col = [&](int j, int r) -> const MultiPoly& { return m[3 * j + r]; };
  MultiPoly det = col(0, 0) * (col(1, 1) * col(2, 2) - col(1, 2) * col(2, 1));
  det -= col(1, 0) * (col(0, 1) * col(2, 2) - col(0, 2) * col(2, 1));
  det += col(2, 0) * (col(0, 1) * col(1, 2) - col(0, 2) * col(1, 1));
  return det;
}

/// Collinearity determinant of three points given as [cx1,cy1,cx2,cy2,cx3,cy3]
/// (twice the signed triangle area).
inline MultiPoly collinearity_poly(const std::array<MultiPoly, 6>& p) {
  return (p[2] - p[0]) * (p[5] - p[1]) - (p[3] - p[1]) * (p[4] - p[0]);
}

/// Rigid-side condition |q2 - q1|^2 - ref_len2 for anchor coordinate
/// polynomials q1=(c1,d1), q2=(c2,d2).
inline MultiPoly rigidity_condition_poly(const MultiPoly& c1, const MultiPoly& d1, const MultiPoly& c2,
                                         const MultiPoly& d2, const MultiPoly& ref_len2) {
  MultiPoly dx = c2 - c1, dy = d2 - d1;
  return dx * dx + dy * dy - ref_len2;
}

/// Third anchor of a side moving as a rigid body, expressed from the first
/// two anchors and the shape ratios r, s (third anchor = first + r*(second -
/// first) + s*perp(second - first)); the result is polynomial because the
/// ratios are independent symbols.
inline std::pair<MultiPoly, MultiPoly> similar_third_point(const MultiPoly& c1, const MultiPoly& d1,
                                                           const MultiPoly& c2, const MultiPoly& d2,
                                                           const MultiPoly& r, const MultiPoly& s) {
  MultiPoly dx = c2 - c1, dy = d2 - d1;
  return {c1 + r * dx - s * dy, d1 + r * dy + s * dx};
}

/// Numeric counterpart of similar_third_point.
inline Vec2 similar_third_point(const Vec2& q1, const Vec2& q2, double r, double s) {
  Vec2 u = q2 - q1;
  return q1 + r * u + s * perp(u);
}

/// Substitutes the rigid-side expression for variables (third[0], third[1])
/// in f, where first_two = [c1,d1,c2,d2] and ratios = [r,s] index variables
/// of f's space.
inline MultiPoly pbr_substitute(const MultiPoly& f, const std::array<int, 2>& third,
                                const std::array<int, 4>& first_two, const std::array<int, 2>& ratios) {
  int nv = f.nvars();
  auto v = [&](int i) { return MultiPoly::variable(nv, i); };
  auto [cx, cy] = similar_third_point(v(first_two[0]), v(first_two[1]), v(first_two[2]), v(first_two[3]),
                                      v(ratios[0]), v(ratios[1]));
  return f.substitute(third[0], cx).substitute(third[1], cy);
}

// ---------------------------------------------------------------------------
// Numeric evaluation.
// ---------------------------------------------------------------------------

/// V at a posed configuration.
inline double eval_variety(const std::array<Vec2, 6>& k) {
  std::array<std::array<double, 3>, 3> m;  // m[column][row]
  for (int i = 0; i < 3; ++i) {
    m[i][0] = k[i + 3].x - k[i].x;
    m[i][1] = k[i + 3].y - k[i].y;
    m[i][2] = cross(k[i], k[i + 3]);
  }
  return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[1][0] * (m[0][1] * m[2][2] - m[0][2] * m[2][1]) +
         m[2][0] * (m[0][1] * m[1][2] - m[0][2] * m[1][1]);
}

inline double eval_variety(const Configuration& k) { return eval_variety(k.k); }

/// Collinearity determinant (twice signed area) of three points.
inline double collinearity_det(const Vec2& a, const Vec2& b, const Vec2& c) { return cross(b - a, c - a); }

/// Collinearity determinant of one side of a configuration.
inline double eval_collinearity(const std::array<Vec2, 6>& k, Side side) {
  int o = side == Side::Base ? 0 : 3;
  return collinearity_det(k[o], k[o + 1], k[o + 2]);
}

/// Rigid-side condition at a configuration: |q2-q1|^2 - ref_len2 for the
/// side's first two anchors.
inline double eval_side_condition(const std::array<Vec2, 6>& k, Side side, double ref_len2) {
  int o = side == Side::Base ? 0 : 3;
  return norm2(k[o + 1] - k[o]) - ref_len2;
}

// ---------------------------------------------------------------------------
// Gradient of V and configurations annihilating it.
// ---------------------------------------------------------------------------

namespace detail {
inline const std::array<MultiPoly, 12>& variety_partials() {
  static const std::array<MultiPoly, 12> grads = [] {
    std::array<MultiPoly, 12> cd;
    for (int i = 0; i < 12; ++i) cd[i] = MultiPoly::variable(12, i);
    MultiPoly v = variety_poly(cd);
    std::array<MultiPoly, 12> g;
    for (int i = 0; i < 12; ++i) g[i] = v.differentiate(i);
    return g;
  }();
  return grads;
}
}  // namespace detail

/// Gradient of V with respect to the twelve coordinates (c1,d1,...,c6,d6).
inline std::array<double, 12> variety_gradient(const std::array<Vec2, 6>& k) {
  std::array<Complex, 12> vals;
  for (int i = 0; i < 6; ++i) {
    vals[2 * i] = k[i].x;
    vals[2 * i + 1] = k[i].y;
  }
  std::array<double, 12> g;
  const auto& partials = detail::variety_partials();
  for (int i = 0; i < 12; ++i) g[i] = partials[i].evaluate(std::span<const Complex>(vals)).real();
  return g;
}

/// Scale-normalized gradient magnitude: ||grad V||_inf / s^3 with
/// s = max(1, largest coordinate magnitude); V is homogeneous of degree 4
/// under scaling, its gradient of degree 3.
inline double variety_gradient_scaled(const std::array<Vec2, 6>& k) {
  double s = 1.0;
  for (const auto& p : k) s = std::max({s, std::abs(p.x), std::abs(p.y)});
  double g = 0.0;
  for (double v : variety_gradient(k)) g = std::max(g, std::abs(v));
  return g / (s * s * s);
}

/// Builds a configuration from one of the four families on which the gradient
/// of V vanishes identically:
///   1: all six anchors on one line;
///   2: two legs on a common line, third leg collapsed to a point;
///   3: two legs collapsed to points;
///   4: one leg collapsed to a point, the other two carrier lines through it.
inline std::array<Vec2, 6> gradient_zero_config(int case_id, KeyedRng& rng) {
  auto pt = [&] { return Vec2{rng.uniform(-3, 3), rng.uniform(-3, 3)}; };
  std::array<Vec2, 6> k;
  switch (case_id) {
    case 1: {
      Vec2 o = pt(), u = {std::cos(2 * kPi * rng.uniform()), std::sin(2 * kPi * rng.uniform())};
      for (int i = 0; i < 6; ++i) k[i] = o + rng.uniform(-3, 3) * u;
      return k;
    }
    case 2: {
      Vec2 o = pt(), u = {std::cos(2 * kPi * rng.uniform()), std::sin(2 * kPi * rng.uniform())};
      for (int i : {0, 1, 3, 4}) k[i] = o + rng.uniform(-3, 3) * u;  // legs 1,2 on the line
      k[2] = k[5] = pt();                                            // leg 3 collapsed
      return k;
    }
    case 3: {
      k[0] = k[3] = pt();  // legs 1,2 collapsed
      k[1] = k[4] = pt();
      k[2] = pt();
      k[5] = pt();
      return k;
    }
    case 4: {
      Vec2 p = pt();
      k[0] = k[3] = p;  // leg 1 collapsed at p
      k[1] = pt();
      k[4] = p + rng.uniform(0.2, 2.0) * (k[1] - p);  // carrier of leg 2 through p
      k[2] = pt();
      k[5] = p + rng.uniform(0.2, 2.0) * (k[2] - p);  // carrier of leg 3 through p
      return k;
    }
    default:
      throw DegenerateDesign("gradient_zero_config case must be 1..4");
  }
}

/// Random point of V=0 obtained by solving the (linear) dependence of V on
/// one coordinate; generically a regular point of the variety.
inline std::array<Vec2, 6> random_variety_point(KeyedRng& rng) {
  for (int attempt = 0; attempt < 64; ++attempt) {
    std::array<Vec2, 6> k;
    for (auto& p : k) p = {rng.uniform(-3, 3), rng.uniform(-3, 3)};
    // V is linear in c4 (= k[3].x): V = alpha*c4 + beta.
    std::array<Vec2, 6> k0 = k, k1 = k;
    k0[3].x = 0.0;
    k1[3].x = 1.0;
    double beta = eval_variety(k0);
    double alpha = eval_variety(k1) - beta;
    if (std::abs(alpha) < 1e-6) continue;
    k[3].x = -beta / alpha;
    if (std::abs(k[3].x) > 50) continue;
    return k;
  }
  throw DegenerateDesign("no well-conditioned variety point found");
}

}  // namespace singdist
