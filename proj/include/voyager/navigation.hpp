#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <vector>

#include "voyager/projection.hpp"

namespace voyager {

enum class MouseButton { left, right, middle };

struct DragEvent {
  Eigen::Vector2d from = Eigen::Vector2d::Zero();
  Eigen::Vector2d to = Eigen::Vector2d::Zero();
  MouseButton button = MouseButton::left;
  std::optional<std::size_t> pinned_dim;
};

struct ChaseConfig {
  double k_a = 0.5;  // speed
  double k_d = 8.0;  // Gaussian reach, rad^-2
  std::size_t max_affected = 4;

  bool operator==(const ChaseConfig&) const = default;
};

/// Gaussian weights below this are treated as out of reach.
inline constexpr double kChaseReachWeight = 0.05;

inline Rotation3 drag_to_rotation(const DragEvent& ev) {
  return rotation_between(sphere_map(ev.from.x(), ev.from.y()), sphere_map(ev.to.x(), ev.to.y()));
}

namespace detail {

inline double column_angle(const VecND& x, const VecND& y, Eigen::Index k) { return std::atan2(y(k), x(k)); }

/// Rotates the (x, y) pair in its own plane so every projected column turns
/// by `delta` radians.
inline void spin_in_plane(ProjectionBasis& basis, double delta) {
  const Eigen::RowVectorXd x = basis.axes.row(0);
  const Eigen::RowVectorXd y = basis.axes.row(1);
  const double c = std::cos(delta);
  const double s = std::sin(delta);
  basis.axes.row(0) = c * x - s * y;
  basis.axes.row(1) = s * x + c * y;
}

inline void repin(ProjectionBasis& basis, Eigen::Index dim, double target_angle) {
  const VecND x = basis.x();
  const VecND y = basis.y();
  if (std::hypot(x(dim), y(dim)) < 1e-12) return;
  spin_in_plane(basis, wrap_angle(target_angle - column_angle(x, y, dim)));
}

}  // namespace detail

/// Signed per-dimension length increments of a right-drag on the baked
/// basis: dimensions whose projected direction lies near the drag line are
/// pushed outward (drag away from center along them) or inward, weighted by
/// exp(-k_d * misalignment^2). Only the `max_affected` best-aligned
/// dimensions move; an inward step never exceeds the current length. The
/// pinned dimension, if any, is never moved.
inline VecND chase_increments(const ProjectionBasis& baked, const DragEvent& ev, const ChaseConfig& cfg = {}) {
  const Eigen::Index n_dims = baked.dims();
  VecND steps = VecND::Zero(n_dims);
  const Eigen::Vector2d motion = ev.to - ev.from;
  const double dist = motion.norm();
  if (dist == 0.0) return steps;
  const Eigen::Vector2d dir = motion / dist;

  struct Hit {
    Eigen::Index dim;
    double weight;
    double sign;
  };
  std::vector<Hit> hits;
  for (Eigen::Index k = 0; k < n_dims; ++k) {
    const Eigen::Vector2d col(baked.axes(0, k), baked.axes(1, k));
    if (col.norm() < 1e-12) continue;
    if (ev.pinned_dim && *ev.pinned_dim == static_cast<std::size_t>(k)) continue;
    const double cos_phi = dir.dot(col.normalized());
    const double misalign = std::acos(std::min(1.0, std::abs(cos_phi)));
    const double w = std::exp(-cfg.k_d * misalign * misalign);
    if (w < kChaseReachWeight) continue;
    hits.push_back({k, w, cos_phi >= 0.0 ? 1.0 : -1.0});
  }
  if (hits.empty()) throw Error(ErrorCode::NoAffectedDims, "no dimension within reach of the drag direction");
  std::stable_sort(hits.begin(), hits.end(), [](const Hit& a, const Hit& b) { return a.weight > b.weight; });
  if (hits.size() > cfg.max_affected) hits.resize(cfg.max_affected);
  for (const Hit& h : hits) {
    const double len = std::hypot(baked.axes(0, h.dim), baked.axes(1, h.dim));
    steps(h.dim) = std::max(cfg.k_a * dist * h.weight * h.sign, -len);
  }
  return steps;
}

/// Right-drag cluster chasing. Applies `chase_increments` along each moved
/// dimension's projected direction, re-orthonormalizes, and turns the plane
/// so a pinned dimension keeps its on-screen angle. A step that collapses
/// the frame is dropped and the input state returned.
inline TrackballState chase(const TrackballState& state, const DragEvent& ev, const ChaseConfig& cfg = {}) {
  if (ev.from == ev.to) return state;
  const TrackballState baked = bake_rotation(state);
  const Eigen::Index n_dims = baked.basis.dims();
  if (ev.pinned_dim && *ev.pinned_dim >= static_cast<std::size_t>(n_dims)) {
    throw Error(ErrorCode::InvalidArgument, "pinned dimension out of range");
  }
  const VecND steps = chase_increments(baked.basis, ev, cfg);

  VecND x = baked.basis.x();
  VecND y = baked.basis.y();
  for (Eigen::Index k = 0; k < n_dims; ++k) {
    if (steps(k) == 0.0) continue;
    const double len = std::hypot(x(k), y(k));
    const double ux = x(k) / len, uy = y(k) / len;
    x(k) += steps(k) * ux;
    y(k) += steps(k) * uy;
  }

  TrackballState out = baked;
  try {
    out.basis = detail::reorthonormalize(x, y, baked.basis.z(), baked.basis.origin);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::DegenerateCandidate) throw;
    return state;
  }
  if (ev.pinned_dim) {
    const auto k = static_cast<Eigen::Index>(*ev.pinned_dim);
    if (std::hypot(baked.basis.x()(k), baked.basis.y()(k)) > 1e-12) {
      detail::repin(out.basis, k, detail::column_angle(baked.basis.x(), baked.basis.y(), k));
    }
  }
  out.depth.reset();
  return out;
}

/// Turns one dimension's projected direction toward `target_dir` by the
/// fraction `step` of the angular gap, keeping its projected length, then
/// re-orthonormalizes and holds the dimension at its new angle.
inline TrackballState align_attribute(const TrackballState& state, std::size_t dim, const Eigen::Vector2d& target_dir,
                                      double step, const ChaseConfig& = {}) {
  if (!(step > 0.0 && step <= 1.0)) throw Error(ErrorCode::InvalidArgument, "step must be in (0, 1]");
  const double tnorm = target_dir.norm();
  if (std::abs(tnorm - 1.0) > 1e-6) throw Error(ErrorCode::InvalidArgument, "target direction must be unit length");

  const TrackballState baked = bake_rotation(state);
  VecND x = baked.basis.x();
  VecND y = baked.basis.y();
  if (dim >= static_cast<std::size_t>(x.size())) throw Error(ErrorCode::InvalidArgument, "dimension out of range");
  const auto k = static_cast<Eigen::Index>(dim);
  const double len = std::hypot(x(k), y(k));
  if (len < 1e-12) throw Error(ErrorCode::NoAffectedDims, "dimension is not expressed in the current view");

  const double current = std::atan2(y(k), x(k));
  const double gap = detail::wrap_angle(std::atan2(target_dir.y(), target_dir.x()) - current);
  if (gap == 0.0) return state;
  const double goal = current + step * gap;
  x(k) = len * std::cos(goal);
  y(k) = len * std::sin(goal);

  TrackballState out = baked;
  try {
    out.basis = detail::reorthonormalize(x, y, baked.basis.z(), baked.basis.origin);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::DegenerateCandidate) throw;
    return state;
  }
  detail::repin(out.basis, k, goal);
  out.depth.reset();
  return out;
}

}  // namespace voyager
