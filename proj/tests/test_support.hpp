#pragma once

// Random inputs and independent checks shared by the test binaries. The
// checks deliberately avoid the library's own helpers.

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "voyager/projection.hpp"

namespace vt {

inline Eigen::VectorXd gaussian_vector(std::mt19937_64& rng, Eigen::Index n) {
  std::normal_distribution<double> normal;
  Eigen::VectorXd v(n);
  for (auto& c : v) c = normal(rng);
  return v;
}

inline Eigen::MatrixXd gaussian_matrix(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols) {
  std::normal_distribution<double> normal;
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = normal(rng);
  return m;
}

inline Eigen::Vector3d unit3(std::mt19937_64& rng) { return gaussian_vector(rng, 3).normalized(); }

/// Orthonormal columns from a Householder QR of a Gaussian matrix.
inline Eigen::MatrixXd random_frame(std::mt19937_64& rng, Eigen::Index n, Eigen::Index k) {
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(gaussian_matrix(rng, n, k));
  return qr.householderQ() * Eigen::MatrixXd::Identity(n, k);
}

inline voyager::ProjectionBasis random_basis(std::mt19937_64& rng, Eigen::Index n) {
  const Eigen::MatrixXd f = random_frame(rng, n, 3);
  return voyager::ProjectionBasis::from_axes(f.col(0), f.col(1), f.col(2), Eigen::VectorXd::Zero(n));
}

inline voyager::Rotation3 random_rotation(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> angle(-M_PI, M_PI);
  return voyager::Rotation3::axis_angle(unit3(rng), angle(rng));
}

inline voyager::TrackballState random_state(std::mt19937_64& rng, Eigen::Index n) {
  voyager::TrackballState s = voyager::TrackballState::from_basis(random_basis(rng, n));
  s.rotation = random_rotation(rng);
  return s;
}

/// Largest deviation of the rows of `rows` from an orthonormal set.
inline double orthonormality_error(const Eigen::MatrixXd& rows) {
  double worst = 0;
  for (Eigen::Index i = 0; i < rows.rows(); ++i) {
    for (Eigen::Index j = 0; j < rows.rows(); ++j) {
      double dot = 0;
      for (Eigen::Index k = 0; k < rows.cols(); ++k) dot += rows(i, k) * rows(j, k);
      worst = std::max(worst, std::abs(dot - (i == j ? 1.0 : 0.0)));
    }
  }
  return worst;
}

inline double max_abs_diff(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

/// Orthogonal projector onto the column span of `frame` built from the
/// normal equations, independent of any orthonormalization.
inline Eigen::MatrixXd span_projector(const Eigen::MatrixXd& frame) {
  return frame * (frame.transpose() * frame).inverse() * frame.transpose();
}

}  // namespace vt
