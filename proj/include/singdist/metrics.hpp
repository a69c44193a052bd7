#pragma once
// Extrinsic distance metrics between two configurations.
//
// Every metric is an average of "unit terms", each of which is the mean
// squared displacement of a moving part:
//  - a leg (segment swept between the displacements of its two endpoints),
//  - a side treated as a plate (triangle swept between three displacements),
//  - a side treated as three bars (its three anchor-pair segments),
//  - or a bare anchor (preliminary variant only).
// Each unit term evaluates to |v|^2 under a uniform translation by v, so the
// normalizer is simply the number of unit terms.

#include <array>
#include <span>
#include <vector>

#include "singdist/core.hpp"
#include "singdist/model.hpp"

namespace singdist {

/// Mean squared displacement over a segment whose endpoints move by di, dj.
template <class T>
T segment_dist2(const V2<T>& di, const V2<T>& dj) {
  T s = di.x * di.x + di.y * di.y + dj.x * dj.x + dj.y * dj.y + di.x * dj.x + di.y * dj.y;
  return s * (T(1) / T(3));
}

/// Mean squared displacement over a filled triangle whose vertices move by
/// di, dj, dk.
template <class T>
T triangle_dist2(const V2<T>& di, const V2<T>& dj, const V2<T>& dk) {
  T s = di.x * di.x + di.y * di.y + dj.x * dj.x + dj.y * dj.y + dk.x * dk.x + dk.y * dk.y;
  s += di.x * dj.x + di.y * dj.y + di.x * dk.x + di.y * dk.y + dj.x * dk.x + dj.y * dk.y;
  return s * (T(1) / T(6));
}

/// Recipe for assembling a metric from unit terms over anchor indices.
struct MetricPlan {
  std::vector<int> points;                    ///< bare anchor displacement terms
  std::vector<std::array<int, 2>> segments;   ///< swept-segment terms
  std::vector<std::array<int, 3>> triangles;  ///< swept-triangle terms
  double normalizer = 1;                      ///< number of unit terms
};

/// Plan for one of the nine interpretations (or the preliminary variant)
/// over the six anchors of a posed configuration.
inline MetricPlan metric_plan(const Interpretation& interp) {
  MetricPlan plan;
  if (interp.preliminary) {
    plan.points = {0, 1, 2, 3, 4, 5};
    plan.normalizer = 6;
    return plan;
  }
  plan.segments = {{0, 3}, {1, 4}, {2, 5}};  // the three legs
  if (interp.base == SideMode::Plate) plan.triangles.push_back({0, 1, 2});
  if (interp.base == SideMode::Bars) {
    plan.segments.push_back({0, 1});
    plan.segments.push_back({0, 2});
    plan.segments.push_back({1, 2});
  }
  if (interp.platform == SideMode::Plate) plan.triangles.push_back({3, 4, 5});
  if (interp.platform == SideMode::Bars) {
    plan.segments.push_back({3, 4});
    plan.segments.push_back({3, 5});
    plan.segments.push_back({4, 5});
  }
  plan.normalizer = static_cast<double>(plan.points.size() + plan.segments.size() + plan.triangles.size());
  return plan;
}

/// Plan for the nine-anchor variant with intermediate joints: anchors 0-2 are
/// the intermediate joints, 3-5 the moving-side anchors, 6-8 the fixed-side
/// anchors. Six swept links plus both side plates.
inline MetricPlan nine_point_metric_plan() {
  MetricPlan plan;
  plan.segments = {{0, 3}, {0, 6}, {1, 4}, {1, 7}, {2, 5}, {2, 8}};
  plan.triangles = {{6, 7, 8}, {3, 4, 5}};
  plan.normalizer = 8;
  return plan;
}

/// Squared metric value from per-anchor displacements.
template <class T>
T metric_dist2(const MetricPlan& plan, std::span<const V2<T>> disp) {
  T sum{};
  for (int p : plan.points) sum += disp[p].x * disp[p].x + disp[p].y * disp[p].y;
  for (const auto& s : plan.segments) sum += segment_dist2(disp[s[0]], disp[s[1]]);
  for (const auto& t : plan.triangles) sum += triangle_dist2(disp[t[0]], disp[t[1]], disp[t[2]]);
  return sum * (T(1) / T(plan.normalizer));
}

/// Squared extrinsic distance between configuration `a` and candidate `b`
/// under the given interpretation.
inline double extrinsic_dist2(const Interpretation& interp, const std::array<Vec2, 6>& a,
                              const std::array<Vec2, 6>& b) {
  std::array<Vec2, 6> d;
  for (int i = 0; i < 6; ++i) d[i] = b[i] - a[i];
  return metric_dist2(metric_plan(interp), std::span<const Vec2>(d));
}

/// Squared distance between two nine-anchor configurations.
inline double rrr_dist2(const std::array<Vec2, 9>& a, const std::array<Vec2, 9>& b) {
  std::array<Vec2, 9> d;
  for (int i = 0; i < 9; ++i) d[i] = b[i] - a[i];
  return metric_dist2(nine_point_metric_plan(), std::span<const Vec2>(d));
}

}  // namespace singdist
