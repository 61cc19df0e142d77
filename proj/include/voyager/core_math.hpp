#pragma once

// Linear-algebra primitives shared by the projection engine, the optimizer
// and the trail map. Points are stored one per row in an Eigen::MatrixXd;
// frames of N-D vectors are stored one vector per column.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <vector>

#include "voyager/error.hpp"

namespace voyager {

using VecND = Eigen::VectorXd;
using PointMatrix = Eigen::MatrixXd;  // n x N, one point per row

inline constexpr double kDegenerateNorm = 1e-8;

/// Proper 3x3 rotation. Construction does not re-check orthogonality; use
/// orthonormalized() after long compositions.
struct Rotation3 {
  Eigen::Matrix3d m = Eigen::Matrix3d::Identity();

  static Rotation3 identity() { return {}; }

  static Rotation3 axis_angle(const Eigen::Vector3d& axis, double angle) {
    return {Eigen::AngleAxisd(angle, axis.normalized()).toRotationMatrix()};
  }

  Eigen::Vector3d operator*(const Eigen::Vector3d& v) const { return m * v; }
  Rotation3 operator*(const Rotation3& other) const { return {m * other.m}; }
  Rotation3 inverse() const { return {m.transpose()}; }

  /// Polar projection back onto SO(3), removing accumulated round-off.
  Rotation3 orthonormalized() const {
    Eigen::JacobiSVD<Eigen::Matrix3d> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Eigen::Matrix3d r = svd.matrixU() * svd.matrixV().transpose();
    if (r.determinant() < 0) {
      Eigen::Matrix3d u = svd.matrixU();
      u.col(2) *= -1.0;
      r = u * svd.matrixV().transpose();
    }
    return {r};
  }

  bool operator==(const Rotation3&) const = default;
};

struct PcaResult {
  VecND mean;
  Eigen::MatrixXd components;  // N x k, unit columns ordered by variance
  Eigen::VectorXd variances;   // k, non-increasing

  VecND component(Eigen::Index i) const { return components.col(i); }
};

/// Modified Gram-Schmidt with one re-orthogonalization pass. Throws
/// DegenerateCandidate when the residual is shorter than 1e-8 (relative to
/// the candidate when it is longer than unit).
inline VecND gram_schmidt(std::span<const VecND> fixed, const VecND& candidate) {
  VecND r = candidate;
  for (int pass = 0; pass < 2; ++pass) {
    for (const auto& f : fixed) r -= f.dot(r) * f;
  }
  const double scale = std::max(1.0, candidate.norm());
  const double norm = r.norm();
  if (!(norm >= kDegenerateNorm * scale)) {
    throw Error(ErrorCode::DegenerateCandidate, "candidate lies in the span of the fixed vectors");
  }
  return r / norm;
}

inline VecND gram_schmidt(std::initializer_list<VecND> fixed, const VecND& candidate) {
  return gram_schmidt(std::span<const VecND>(fixed.begin(), fixed.size()), candidate);
}

/// Orthonormalizes the rows of `rows` in order (first row normalized, later
/// rows Gram-Schmidt'd against the earlier ones).
inline Eigen::MatrixXd orthonormalize_rows(const Eigen::MatrixXd& rows) {
  Eigen::MatrixXd out(rows.rows(), rows.cols());
  std::vector<VecND> done;
  done.reserve(static_cast<std::size_t>(rows.rows()));
  for (Eigen::Index i = 0; i < rows.rows(); ++i) {
    VecND v = gram_schmidt(std::span<const VecND>(done), rows.row(i).transpose());
    out.row(i) = v.transpose();
    done.push_back(std::move(v));
  }
  return out;
}

/// Completes `fixed` (orthonormal) with a unit vector orthogonal to it, trying
/// the coordinate axes in index order.
inline VecND orthogonal_completion(std::span<const VecND> fixed, Eigen::Index dims) {
  double best = -1.0;
  VecND pick;
  for (Eigen::Index k = 0; k < dims; ++k) {
    VecND e = VecND::Unit(dims, k);
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto& f : fixed) e -= f.dot(e) * f;
    }
    if (e.norm() > best) {
      best = e.norm();
      pick = e;
    }
    if (best > 0.5) break;
  }
  if (best < kDegenerateNorm) {
    throw Error(ErrorCode::DegenerateCandidate, "no orthogonal completion exists");
  }
  return gram_schmidt(fixed, pick);
}

/// Maps a point of the unit trackball disk onto the unit hemisphere. Points
/// outside the disk are clamped to the rim.
inline Eigen::Vector3d sphere_map(double x, double y) {
  const double r2 = x * x + y * y;
  if (r2 <= 1.0) return {x, y, std::sqrt(1.0 - r2)};
  const double r = std::sqrt(r2);
  return {x / r, y / r, 0.0};
}

/// Rotation carrying unit vector `a` onto unit vector `b` about the axis a x b.
/// Antipodal inputs rotate by pi about the first coordinate axis made
/// orthogonal to `a`.
inline Rotation3 rotation_between(const Eigen::Vector3d& a, const Eigen::Vector3d& b) {
  const Eigen::Vector3d cross = a.cross(b);
  const double s = cross.norm();
  const double c = a.dot(b);
  if (s < 1e-15) {
    if (c > 0) return Rotation3::identity();
    Eigen::Vector3d axis = Eigen::Vector3d::Zero();
    for (int k = 0; k < 3; ++k) {
      Eigen::Vector3d e = Eigen::Vector3d::Unit(k);
      axis = e - a.dot(e) * a;
      if (axis.norm() > 1e-6) break;
    }
    return Rotation3::axis_angle(axis, std::numbers::pi);
  }
  return Rotation3::axis_angle(cross / s, std::atan2(s, c));
}

/// Principal component analysis through the SVD of the centered data. Each
/// component's largest-magnitude entry is made positive. Rank-deficient data
/// yields zero trailing variances with components completed orthonormally.
inline PcaResult pca(const PointMatrix& points, Eigen::Index k) {
  const Eigen::Index n = points.rows();
  const Eigen::Index dims = points.cols();
  if (n < 2) throw Error(ErrorCode::InvalidArgument, "pca needs at least 2 points");
  if (k < 1 || k > dims) throw Error(ErrorCode::InvalidArgument, "pca component count out of range");

  PcaResult out;
  out.mean = points.colwise().mean().transpose();
  const Eigen::MatrixXd centered = points.rowwise() - out.mean.transpose();
  Eigen::BDCSVD<Eigen::MatrixXd> svd(centered, Eigen::ComputeThinV);
  const Eigen::VectorXd& sv = svd.singularValues();
  const Eigen::MatrixXd& v = svd.matrixV();

  out.components.resize(dims, k);
  out.variances = Eigen::VectorXd::Zero(k);
  std::vector<VecND> done;
  const double tiny = (sv.size() > 0 ? sv(0) : 0.0) * 1e-12;
  for (Eigen::Index i = 0; i < k; ++i) {
    VecND c;
    if (i < sv.size() && sv(i) > tiny) {
      c = v.col(i);
      out.variances(i) = sv(i) * sv(i) / static_cast<double>(n - 1);
    } else {
      c = orthogonal_completion(std::span<const VecND>(done), dims);
    }
    Eigen::Index arg = 0;
    c.cwiseAbs().maxCoeff(&arg);
    if (c(arg) < 0) c = -c;
    out.components.col(i) = c;
    done.push_back(c);
  }
  return out;
}

/// Canonical angles between span(frame_a) and span(frame_b), ascending.
/// Small angles come from the sines (the component of B outside A) and large
/// ones from the cosines, so both ends stay accurate.
inline Eigen::VectorXd principal_angles(const Eigen::MatrixXd& frame_a, const Eigen::MatrixXd& frame_b) {
  const Eigen::MatrixXd cross = frame_a.transpose() * frame_b;
  Eigen::JacobiSVD<Eigen::MatrixXd> cos_svd(cross);
  const Eigen::MatrixXd residual = frame_b - frame_a * cross;
  Eigen::JacobiSVD<Eigen::MatrixXd> sin_svd(residual);

  const Eigen::Index d = std::min(frame_a.cols(), frame_b.cols());
  Eigen::VectorXd cosines = cos_svd.singularValues().head(d);  // descending
  Eigen::VectorXd sines = sin_svd.singularValues();             // descending
  Eigen::VectorXd angles(d);
  for (Eigen::Index i = 0; i < d; ++i) {
    const double c = std::clamp(cosines(i), 0.0, 1.0);
    const Eigen::Index j = sines.size() - 1 - i;  // ascending sines
    const double s = j >= 0 && j < sines.size() ? std::clamp(sines(j), 0.0, 1.0) : 0.0;
    angles(i) = c * c >= 0.5 ? std::asin(s) : std::acos(c);
  }
  std::sort(angles.begin(), angles.end());
  return angles;
}

}  // namespace voyager
