#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <numeric>
#include <span>
#include <vector>

#include "voyager/projection.hpp"

namespace voyager {

struct LabelPlacement {
  std::size_t dim = 0;
  double angle = 0.0;          // degrees in [0, 360)
  double strength = 0.0;       // projected length of the dimension, [0, 1]
  double font_size = 8.0;      // pt
  double opacity = 0.25;
  double display_angle = 0.0;  // after overlap removal
  bool visible = true;
};

inline constexpr double kVerticalSpacing = 24.0;   // degrees, label on the vertical axis
inline constexpr double kHorizontalSpacing = 4.0;  // degrees, label 45 degrees or more off vertical
inline constexpr double kMinFont = 8.0, kMaxFont = 18.0;
inline constexpr double kMinOpacity = 0.25, kMaxOpacity = 1.0;
inline constexpr std::size_t kDefaultMaxLabels = 10;

inline double normalize_degrees(double a) {
  a = std::fmod(a, 360.0);
  if (a < 0) a += 360.0;
  return a >= 360.0 ? 0.0 : a;
}

/// Angle between a label direction and the vertical axis, folded to [0, 90].
inline double angle_from_vertical(double degrees) {
  const double d = std::fmod(normalize_degrees(degrees), 180.0);
  return std::abs(d - 90.0);
}

/// Label angle and strength for every dimension from the on-screen x/y axes.
inline std::vector<LabelPlacement> base_angles(const Eigen::Matrix3Xd& baked_axes) {
  std::vector<LabelPlacement> out;
  out.reserve(static_cast<std::size_t>(baked_axes.cols()));
  for (Eigen::Index k = 0; k < baked_axes.cols(); ++k) {
    const double wx = baked_axes(0, k);
    const double wy = baked_axes(1, k);
    LabelPlacement p;
    p.dim = static_cast<std::size_t>(k);
    p.strength = std::clamp(std::hypot(wx, wy), 0.0, 1.0);
    p.angle = p.strength > 0.0 ? normalize_degrees(std::atan2(wy, wx) * 180.0 / std::numbers::pi) : 0.0;
    p.font_size = kMinFont + (kMaxFont - kMinFont) * p.strength;
    p.opacity = kMinOpacity + (kMaxOpacity - kMinOpacity) * p.strength;
    p.display_angle = p.angle;
    p.visible = p.strength > 0.0;
    out.push_back(p);
  }
  return out;
}

inline std::vector<LabelPlacement> base_angles(const TrackballState& state) { return base_angles(state.baked_axes()); }

/// Minimum angular gap to the previous label for a label `gamma` degrees off
/// the vertical axis.
inline double required_spacing(double gamma) {
  if (gamma < 45.0) return kVerticalSpacing - (kVerticalSpacing - kHorizontalSpacing) * gamma / 45.0;
  return kHorizontalSpacing;
}

inline double required_spacing_at(double display_degrees) {
  return required_spacing(angle_from_vertical(display_degrees));
}

namespace detail {

/// Smallest d >= prev with d - prev >= required_spacing_at(d). The gap
/// function grows with slope at least 1 - 20/45, so bisection on
/// [prev, prev + 24] brackets a unique crossing.
inline double next_free_angle(double prev) {
  double lo = prev;
  double hi = prev + kVerticalSpacing;
  for (int i = 0; i < 80; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid - prev >= required_spacing_at(mid)) hi = mid;
    else lo = mid;
  }
  return hi;
}

// Sweeps counterclockwise from the first entry; returns false when the
// chain of pushes wraps around onto its own start.
inline bool sweep(std::vector<LabelPlacement*>& chain) {
  const double start = chain.front()->angle;
  chain.front()->display_angle = start;
  double prev = start;
  for (std::size_t i = 1; i < chain.size(); ++i) {
    double a = chain[i]->angle;
    if (a < start) a += 360.0;
    const double d = std::max(a, next_free_angle(prev));
    chain[i]->display_angle = d;
    prev = d;
  }
  if (chain.size() > 1) {
    const double first = start + 360.0;
    if (first - prev < required_spacing_at(first)) return false;
  }
  for (auto* p : chain) p->display_angle = normalize_degrees(p->display_angle);
  return true;
}

// Sweeps counterclockwise from the strongest label. A label just clockwise
// of it would be pushed all the way round into the start, so on failure the
// sweep is retried from the label after each angular gap, widest first.
inline bool fit_ring(const std::vector<LabelPlacement*>& strongest_first) {
  std::vector<LabelPlacement*> ring = strongest_first;
  std::stable_sort(ring.begin(), ring.end(),
                   [](const LabelPlacement* a, const LabelPlacement* b) { return a->angle < b->angle; });
  const std::size_t n = ring.size();
  const auto home = static_cast<std::size_t>(std::find(ring.begin(), ring.end(), strongest_first.front()) - ring.begin());
  std::vector<std::size_t> starts(n);
  std::iota(starts.begin(), starts.end(), std::size_t{0});
  auto gap_before = [&](std::size_t i) {
    return n == 1 ? 360.0 : normalize_degrees(ring[i]->angle - ring[(i + n - 1) % n]->angle);
  };
  std::stable_sort(starts.begin(), starts.end(), [&](std::size_t a, std::size_t b) {
    if ((a == home) != (b == home)) return a == home;
    return gap_before(a) > gap_before(b);
  });
  for (std::size_t s : starts) {
    if (s != home && gap_before(s) == 0.0) break;
    std::vector<LabelPlacement*> chain;
    for (std::size_t i = 0; i < n; ++i) chain.push_back(ring[(s + i) % n]);
    if (sweep(chain)) return true;
  }
  return false;
}

}  // namespace detail

/// Keeps the `max_labels` strongest labels (plus any in `selected`) visible
/// and, when the projection is fixed, displaces them so neighbours are at
/// least the required spacing apart. Weakest labels are hidden when the
/// spacing cannot fit in a full turn. During a drag labels sit at their true
/// angle.
inline std::vector<LabelPlacement> resolve_overlaps(std::vector<LabelPlacement> placements, std::size_t max_labels,
                                                    std::span<const std::size_t> selected = {},
                                                    bool projection_fixed = true) {
  std::vector<LabelPlacement*> order;
  for (auto& p : placements) {
    p.display_angle = p.angle;
    if (p.strength > 0.0) order.push_back(&p);
    p.visible = false;
  }
  auto is_selected = [&](const LabelPlacement* p) {
    return std::find(selected.begin(), selected.end(), p->dim) != selected.end();
  };
  std::stable_sort(order.begin(), order.end(), [&](const LabelPlacement* a, const LabelPlacement* b) {
    const bool sa = is_selected(a), sb = is_selected(b);
    if (sa != sb) return sa;
    return a->strength > b->strength;
  });
  if (order.size() > max_labels) order.resize(max_labels);

  while (projection_fixed && !order.empty() && !detail::fit_ring(order)) order.pop_back();
  for (auto& p : placements) p.display_angle = p.angle;
  if (projection_fixed && !order.empty()) detail::fit_ring(order);
  for (auto* p : order) p->visible = true;
  return placements;
}

/// Angular gap from `prev` to `next` going counterclockwise, in (0, 360].
inline double ccw_gap(double prev, double next) {
  const double g = normalize_degrees(next - prev);
  return g == 0.0 ? 360.0 : g;
}

}  // namespace voyager
