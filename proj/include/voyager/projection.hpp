#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>
#include <span>
#include <variant>
#include <vector>

#include "voyager/core_math.hpp"

namespace voyager {

/// Three orthonormal N-D axes (PPA-x, PPA-y, PPA-z, stored as rows) and the
/// origin the data are centered on before projection.
struct ProjectionBasis {
  Eigen::Matrix3Xd axes;
  VecND origin;

  Eigen::Index dims() const { return axes.cols(); }
  VecND x() const { return axes.row(0).transpose(); }
  VecND y() const { return axes.row(1).transpose(); }
  VecND z() const { return axes.row(2).transpose(); }

  static ProjectionBasis from_axes(const VecND& x, const VecND& y, const VecND& z, VecND origin) {
    ProjectionBasis b;
    b.axes.resize(3, x.size());
    b.axes.row(0) = x.transpose();
    b.axes.row(1) = y.transpose();
    b.axes.row(2) = z.transpose();
    b.origin = std::move(origin);
    return b;
  }

  /// First three coordinate axes, centered on `origin`.
  static ProjectionBasis identity(Eigen::Index dims, VecND origin) {
    return from_axes(VecND::Unit(dims, 0), VecND::Unit(dims, 1), VecND::Unit(dims, 2), std::move(origin));
  }

  bool operator==(const ProjectionBasis&) const = default;
};

/// Bookkeeping for an in-progress depth gesture: z is always recomputed from
/// the vector the gesture started on, so opposite drags cancel exactly.
struct DepthGesture {
  VecND source;
  double exponent = 0.0;
  VecND result;

  bool operator==(const DepthGesture&) const = default;
};

struct TrackballState {
  Rotation3 rotation;
  double zoom = 1.0;
  ProjectionBasis basis;
  std::optional<DepthGesture> depth;

  static TrackballState from_basis(ProjectionBasis basis) {
    TrackballState s;
    s.basis = std::move(basis);
    return s;
  }

  /// M = S * T * P.
  Eigen::Matrix3Xd compound() const { return zoom * rotation.m * basis.axes; }

  /// T * P, i.e. the axes as they appear on screen.
  Eigen::Matrix3Xd baked_axes() const { return rotation.m * basis.axes; }

  bool operator==(const TrackballState&) const = default;
};

struct ProjectedCloud {
  Eigen::MatrixX2d xy;
  Eigen::VectorXd z;
  std::vector<std::size_t> point_ids;
};

struct RandomZ {
  std::uint64_t seed = 0;
};
struct ThirdPc {
  VecND component;
};
using ZSource = std::variant<RandomZ, ThirdPc>;

/// Builds a basis from an orthonormal x/y pair and a z candidate that is
/// orthonormalized against them. Random candidates are redrawn up to 16 times.
inline ProjectionBasis make_basis(const VecND& x, const VecND& y, const ZSource& z_source, VecND origin) {
  const VecND fixed[] = {x, y};
  VecND z;
  if (const auto* pc = std::get_if<ThirdPc>(&z_source)) {
    z = gram_schmidt(fixed, pc->component);
  } else {
    std::mt19937_64 rng(std::get<RandomZ>(z_source).seed);
    std::normal_distribution<double> normal;
    bool found = false;
    for (int attempt = 0; attempt < 16 && !found; ++attempt) {
      VecND candidate(x.size());
      for (auto& v : candidate) v = normal(rng);
      try {
        z = gram_schmidt(fixed, candidate);
        found = true;
      } catch (const Error&) {
      }
    }
    if (!found) throw Error(ErrorCode::DegenerateCandidate, "random z axis degenerate after 16 draws");
  }
  return ProjectionBasis::from_axes(x, y, z, std::move(origin));
}

/// Projects every row of `points` (or the rows listed in `ids`).
inline ProjectedCloud project(const TrackballState& state, const PointMatrix& points,
                              std::span<const std::size_t> ids = {}) {
  const Eigen::Matrix3Xd m = state.compound();
  ProjectedCloud out;
  if (ids.empty()) {
    out.point_ids.resize(static_cast<std::size_t>(points.rows()));
    for (std::size_t i = 0; i < out.point_ids.size(); ++i) out.point_ids[i] = i;
  } else {
    out.point_ids.assign(ids.begin(), ids.end());
  }
  const auto n = static_cast<Eigen::Index>(out.point_ids.size());
  out.xy.resize(n, 2);
  out.z.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto row = static_cast<Eigen::Index>(out.point_ids[static_cast<std::size_t>(i)]);
    const Eigen::Vector3d p = m * (points.row(row).transpose() - state.basis.origin);
    out.xy(i, 0) = p(0);
    out.xy(i, 1) = p(1);
    out.z(i) = p(2);
  }
  return out;
}

inline TrackballState rotate(const TrackballState& state, const Rotation3& delta) {
  TrackballState out = state;
  out.rotation = delta * state.rotation;
  return out;
}

/// Folds T into P so the stored axes are the on-screen axes.
inline TrackballState bake_rotation(const TrackballState& state) {
  if (state.rotation == Rotation3::identity()) return state;
  TrackballState out = state;
  out.basis.axes = orthonormalize_rows(state.baked_axes());
  out.rotation = Rotation3::identity();
  return out;
}

namespace detail {

inline VecND complete_z(const VecND& x, const VecND& y, const VecND& previous_z) {
  const VecND fixed[] = {x, y};
  try {
    return gram_schmidt(fixed, previous_z);
  } catch (const Error&) {
    return orthogonal_completion(fixed, x.size());
  }
}

/// Normalizes x, orthonormalizes y against it and carries z along.
inline ProjectionBasis reorthonormalize(const VecND& x, const VecND& y, const VecND& previous_z,
                                        const VecND& origin) {
  const double nx = x.norm();
  if (!(nx >= kDegenerateNorm)) throw Error(ErrorCode::DegenerateCandidate, "PPA-x collapsed");
  const VecND xn = x / nx;
  const VecND fixed[] = {xn};
  const VecND yn = gram_schmidt(fixed, y);
  return ProjectionBasis::from_axes(xn, yn, complete_z(xn, yn, previous_z), origin);
}

inline double wrap_angle(double a) {
  return std::remainder(a, 2.0 * std::numbers::pi);
}

}  // namespace detail

/// Re-weights PPA-z by a sign-preserving power p = exp(k_a * accumulated
/// drag) of its component magnitudes, relative to the z the gesture started
/// from. Opposite drags restore the starting z exactly.
inline TrackballState deep_adjust(const TrackballState& state, double drag_amount, double k_a = 0.5) {
  if (drag_amount == 0.0) return state;
  const VecND current_z = state.basis.z();
  DepthGesture gesture = state.depth && state.depth->result == current_z
                             ? *state.depth
                             : DepthGesture{current_z, 0.0, current_z};
  gesture.exponent += drag_amount;

  VecND z;
  if (gesture.exponent == 0.0) {
    z = gesture.source;
  } else {
    const double p = std::exp(k_a * gesture.exponent);
    VecND w = gesture.source;
    for (auto& v : w) v = std::copysign(std::pow(std::abs(v), p), v);
    const double norm = w.norm();
    if (!(norm > 0.0) || !std::isfinite(norm)) {
      throw Error(ErrorCode::DegenerateCandidate, "re-weighted PPA-z vanished");
    }
    const VecND fixed[] = {state.basis.x(), state.basis.y()};
    z = gram_schmidt(fixed, w / norm);
  }
  gesture.result = z;

  TrackballState out = state;
  out.basis.axes.row(2) = z.transpose();
  out.depth = std::move(gesture);
  return out;
}

/// Gives the selected dimensions equal, maximal projected length. The
/// selected columns are placed on a tight frame (sum of doubled-angle unit
/// vectors is zero) found by alternating projection from their current
/// directions; every other dimension drops out of the x/y plane.
inline TrackballState equal_express(const TrackballState& state, std::span<const std::size_t> dims) {
  const TrackballState baked = bake_rotation(state);
  const Eigen::Index n_dims = baked.basis.dims();
  const auto m = static_cast<Eigen::Index>(dims.size());
  if (m < 2 || m > n_dims) throw Error(ErrorCode::InvalidArgument, "equal_express needs 2..N dimensions");
  std::vector<std::size_t> sorted(dims.begin(), dims.end());
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end() ||
      sorted.back() >= static_cast<std::size_t>(n_dims)) {
    throw Error(ErrorCode::InvalidArgument, "equal_express dimensions must be distinct and in range");
  }

  const VecND x = baked.basis.x();
  const VecND y = baked.basis.y();
  std::vector<double> theta(dims.size());
  bool all_coincide = true;
  for (std::size_t i = 0; i < dims.size(); ++i) {
    const auto k = static_cast<Eigen::Index>(dims[i]);
    theta[i] = std::hypot(x(k), y(k)) > 1e-12 ? std::atan2(y(k), x(k)) : 0.0;
    if (std::abs(detail::wrap_angle(theta[i] - theta[0])) > 1e-9) all_coincide = false;
  }
  if (all_coincide && m >= n_dims) {
    throw Error(ErrorCode::ColinearSelection, "selected dimensions share one projected direction");
  }

  using cd = std::complex<double>;
  std::vector<cd> doubled(dims.size());
  for (std::size_t i = 0; i < dims.size(); ++i) doubled[i] = std::polar(1.0, 2.0 * theta[i]);
  bool converged = false;
  for (int iter = 0; iter < 20000 && !all_coincide; ++iter) {
    cd mean = 0.0;
    for (const auto& z : doubled) mean += z;
    mean /= static_cast<double>(m);
    if (std::abs(mean) < 1e-15) {
      converged = true;
      break;
    }
    bool collapsed = false;
    for (auto& z : doubled) {
      z -= mean;
      const double r = std::abs(z);
      if (r < 1e-9) {
        collapsed = true;
        break;
      }
      z /= r;
    }
    if (collapsed) break;
  }
  if (!converged) {
    // Even spread of the doubled angles, keeping the angular order.
    std::vector<std::size_t> order(dims.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return theta[a] < theta[b]; });
    for (std::size_t r = 0; r < order.size(); ++r) {
      doubled[order[r]] = std::polar(1.0, 2.0 * theta[order[0]] + 2.0 * std::numbers::pi * r / m);
    }
  }

  const double len = std::sqrt(2.0 / static_cast<double>(m));
  VecND nx = VecND::Zero(n_dims);
  VecND ny = VecND::Zero(n_dims);
  for (std::size_t i = 0; i < dims.size(); ++i) {
    double phi = std::arg(doubled[i]) / 2.0;
    if (std::abs(detail::wrap_angle(phi + std::numbers::pi - theta[i])) <
        std::abs(detail::wrap_angle(phi - theta[i]))) {
      phi += std::numbers::pi;
    }
    const auto k = static_cast<Eigen::Index>(dims[i]);
    nx(k) = len * std::cos(phi);
    ny(k) = len * std::sin(phi);
  }
  TrackballState out = baked;
  out.basis = detail::reorthonormalize(nx, ny, baked.basis.z(), baked.basis.origin);
  out.depth.reset();
  return out;
}

/// Distance of each centered point from span(P).
inline Eigen::VectorXd subspace_residuals(const ProjectionBasis& basis, const PointMatrix& points) {
  const Eigen::MatrixXd centered = points.rowwise() - basis.origin.transpose();
  const Eigen::MatrixXd coords = centered * basis.axes.transpose();
  return (centered - coords * basis.axes).rowwise().norm();
}

/// Flags points whose residual from span(P) is at most the `quantile`-th
/// residual.
inline std::vector<bool> membership(const ProjectionBasis& basis, const PointMatrix& points, double quantile) {
  if (!(quantile > 0.0 && quantile <= 1.0)) throw Error(ErrorCode::InvalidArgument, "quantile must be in (0, 1]");
  const Eigen::VectorXd r = subspace_residuals(basis, points);
  std::vector<bool> flags(static_cast<std::size_t>(r.size()), true);
  if (r.size() == 0 || quantile == 1.0) return flags;
  std::vector<double> sorted(r.begin(), r.end());
  std::sort(sorted.begin(), sorted.end());
  const auto rank = static_cast<std::size_t>(std::ceil(quantile * static_cast<double>(sorted.size())));
  const double threshold = sorted[std::max<std::size_t>(rank, 1) - 1];
  for (Eigen::Index i = 0; i < r.size(); ++i) flags[static_cast<std::size_t>(i)] = r(i) <= threshold;
  return flags;
}

}  // namespace voyager
