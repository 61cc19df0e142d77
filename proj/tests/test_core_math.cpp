#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "test_support.hpp"
#include "voyager/core_math.hpp"

using namespace voyager;

TEST(GramSchmidt, AlreadyOrthonormalCandidateIsKept) {
  const VecND z = gram_schmidt({VecND::Unit(3, 0), VecND::Unit(3, 1)}, VecND::Unit(3, 2));
  EXPECT_EQ(z, VecND::Unit(3, 2));
}

TEST(GramSchmidt, RemovesFixedComponents) {
  const VecND c = Eigen::Vector3d(1, 1, 1) / std::sqrt(3.0);
  const VecND z = gram_schmidt({VecND::Unit(3, 0), VecND::Unit(3, 1)}, c);
  EXPECT_NEAR(z(0), 0.0, 1e-15);
  EXPECT_NEAR(z(1), 0.0, 1e-15);
  EXPECT_NEAR(z(2), 1.0, 1e-15);
}

TEST(GramSchmidt, RandomEightDimensional) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    const Eigen::MatrixXd f = vt::random_frame(rng, 8, 2);
    const VecND r = gram_schmidt({f.col(0), f.col(1)}, vt::gaussian_vector(rng, 8));
    EXPECT_LE(std::abs(r.dot(f.col(0))), 1e-9);
    EXPECT_LE(std::abs(r.dot(f.col(1))), 1e-9);
    EXPECT_NEAR(r.norm(), 1.0, 1e-12);
  }
}

TEST(GramSchmidt, DegenerateCandidateThrows) {
  try {
    gram_schmidt({VecND::Unit(3, 0), VecND::Unit(3, 1)}, Eigen::Vector3d(2, -1, 0));
    FAIL() << "expected DegenerateCandidate";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DegenerateCandidate);
  }
}

TEST(GramSchmidt, IsIdempotent) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::MatrixXd f = vt::random_frame(rng, 12, 3);
    const std::vector<VecND> fixed = {f.col(0), f.col(1), f.col(2)};
    const VecND once = gram_schmidt(fixed, vt::gaussian_vector(rng, 12));
    const VecND twice = gram_schmidt(fixed, once);
    EXPECT_LE((once - twice).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(GramSchmidt, StaysOrthogonalInHighDimensions) {
  // Nearly parallel candidates are where the classical variant drifts.
  std::mt19937_64 rng(8);
  const Eigen::Index n = 200;
  std::vector<VecND> basis;
  const VecND seed = vt::gaussian_vector(rng, n);
  for (int i = 0; i < 60; ++i) basis.push_back(gram_schmidt(basis, seed + 1e-4 * vt::gaussian_vector(rng, n)));
  Eigen::MatrixXd rows(static_cast<Eigen::Index>(basis.size()), n);
  for (std::size_t i = 0; i < basis.size(); ++i) rows.row(static_cast<Eigen::Index>(i)) = basis[i].transpose();
  EXPECT_LE(vt::orthonormality_error(rows), 1e-9);
}

TEST(SphereMap, Examples) {
  EXPECT_EQ(sphere_map(0, 0), Eigen::Vector3d(0, 0, 1));
  EXPECT_EQ(sphere_map(1, 0), Eigen::Vector3d(1, 0, 0));
  const Eigen::Vector3d p = sphere_map(0.6, 0);
  EXPECT_DOUBLE_EQ(p(0), 0.6);
  EXPECT_DOUBLE_EQ(p(1), 0.0);
  EXPECT_NEAR(p(2), 0.8, 1e-15);
}

TEST(SphereMap, OutsideDiskClampsToRim) {
  const Eigen::Vector3d p = sphere_map(3, 4);
  EXPECT_NEAR(p(0), 0.6, 1e-15);
  EXPECT_NEAR(p(1), 0.8, 1e-15);
  EXPECT_EQ(p(2), 0.0);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-2, 2);
  for (int i = 0; i < 1000; ++i) EXPECT_NEAR(sphere_map(u(rng), u(rng)).norm(), 1.0, 1e-15);
}

TEST(RotationBetween, SameVectorIsIdentity) {
  EXPECT_EQ(rotation_between(Eigen::Vector3d(0, 0, 1), Eigen::Vector3d(0, 0, 1)).m, Eigen::Matrix3d::Identity());
}

TEST(RotationBetween, QuarterTurnAboutZ) {
  const Rotation3 r = rotation_between(Eigen::Vector3d(1, 0, 0), Eigen::Vector3d(0, 1, 0));
  Eigen::Matrix3d expected;
  expected << 0, -1, 0, 1, 0, 0, 0, 0, 1;
  EXPECT_LE(vt::max_abs_diff(r.m, expected), 1e-15);
}

TEST(RotationBetween, RandomPairsAreCarried) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 1000; ++i) {
    const Eigen::Vector3d a = vt::unit3(rng), b = vt::unit3(rng);
    const Rotation3 r = rotation_between(a, b);
    EXPECT_LE(((r * a) - b).cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_LE(vt::max_abs_diff(r.m.transpose() * r.m, Eigen::Matrix3d::Identity()), 1e-9);
    EXPECT_NEAR(r.m.determinant(), 1.0, 1e-9);
    EXPECT_LE(vt::max_abs_diff((rotation_between(a, b) * rotation_between(b, a)).m, Eigen::Matrix3d::Identity()), 1e-9);
  }
}

TEST(RotationBetween, AntipodalIsHalfTurn) {
  const std::vector<Eigen::Vector3d> inputs = {Eigen::Vector3d(1, 0, 0), Eigen::Vector3d(0, 0, 1), Eigen::Vector3d(1, 2, 2) / 3.0};
  for (const Eigen::Vector3d& a : inputs) {
    const Rotation3 r = rotation_between(a, -a);
    EXPECT_LE(((r * a) + a).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_NEAR(r.m.determinant(), 1.0, 1e-12);
  }
}

TEST(Rotation3, PreservesDistances) {
  std::mt19937_64 rng(13);
  const Eigen::MatrixXd cloud = vt::gaussian_matrix(rng, 3, 300) * 5.0;
  for (int t = 0; t < 20; ++t) {
    const Rotation3 r = vt::random_rotation(rng);
    const Eigen::MatrixXd moved = r.m * cloud;
    for (int i = 0; i < 300; i += 7)
      for (int j = 0; j < 300; j += 5)
        EXPECT_NEAR((moved.col(i) - moved.col(j)).norm(), (cloud.col(i) - cloud.col(j)).norm(), 1e-9);
  }
}

TEST(Pca, RankOneLine) {
  const VecND u = Eigen::Vector4d(1, -2, 2, 4).normalized();
  PointMatrix pts(9, 4);
  for (int i = 0; i < 9; ++i) pts.row(i) = (i - 3.5) * u.transpose();
  const PcaResult p = pca(pts, 3);
  EXPECT_NEAR(std::abs(p.component(0).dot(u)), 1.0, 1e-12);
  EXPECT_NEAR(p.variances(1), 0.0, 1e-12);
  EXPECT_NEAR(p.variances(2), 0.0, 1e-12);
  EXPECT_LE(vt::orthonormality_error(p.components.transpose()), 1e-12);
}

TEST(Pca, TwoPointsByHand) {
  PointMatrix pts(2, 2);
  pts << 0, 0, 2, 0;
  const PcaResult p = pca(pts, 1);
  EXPECT_NEAR(p.mean(0), 1.0, 1e-15);
  EXPECT_NEAR(p.mean(1), 0.0, 1e-15);
  EXPECT_NEAR(p.component(0)(0), 1.0, 1e-15);
  EXPECT_NEAR(p.variances(0), 2.0, 1e-12);
}

TEST(Pca, IsotropicDataMatchesCovarianceEigenvalues) {
  std::mt19937_64 rng(17);
  const PointMatrix pts = vt::gaussian_matrix(rng, 10000, 4);
  const PcaResult p = pca(pts, 4);
  const Eigen::MatrixXd centered = pts.rowwise() - pts.colwise().mean();
  const Eigen::MatrixXd cov = centered.transpose() * centered / 9999.0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(p.variances(i), eig.eigenvalues()(3 - i), 1e-9);
  EXPECT_LT(p.variances(0) / p.variances(3), 1.15);
  EXPECT_NEAR(p.variances.sum(), cov.trace(), 1e-8);
}

TEST(Pca, SignConventionAndOrdering) {
  std::mt19937_64 rng(19);
  PointMatrix pts = vt::gaussian_matrix(rng, 500, 6);
  pts.col(2) *= 5;
  pts.col(4) *= 3;
  const PcaResult p = pca(pts, 6);
  for (int i = 0; i < 6; ++i) {
    Eigen::Index arg = 0;
    p.component(i).cwiseAbs().maxCoeff(&arg);
    EXPECT_GT(p.component(i)(arg), 0.0);
    if (i > 0) {
      EXPECT_GE(p.variances(i - 1), p.variances(i));
    }
  }
  EXPECT_GT(std::abs(p.component(0)(2)), 0.99);
}

TEST(PrincipalAngles, IdenticalFramesAreZero) {
  std::mt19937_64 rng(23);
  const Eigen::MatrixXd f = vt::random_frame(rng, 7, 3);
  EXPECT_LE(principal_angles(f, f).maxCoeff(), 1e-12);
}

TEST(PrincipalAngles, SharedAndOrthogonalDirections) {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(4, 2), b = Eigen::MatrixXd::Zero(4, 2);
  a(0, 0) = a(1, 1) = 1;
  b(0, 0) = b(2, 1) = 1;
  const Eigen::VectorXd ang = principal_angles(a, b);
  EXPECT_NEAR(ang(0), 0.0, 1e-15);
  EXPECT_NEAR(ang(1), std::numbers::pi / 2, 1e-15);
}

TEST(PrincipalAngles, MatchSvdOracleAndAreSymmetric) {
  std::mt19937_64 rng(29);
  for (int t = 0; t < 200; ++t) {
    const Eigen::MatrixXd a = vt::random_frame(rng, 6, 2), b = vt::random_frame(rng, 6, 2);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(a.transpose() * b);
    const Eigen::VectorXd ang = principal_angles(a, b);
    for (int i = 0; i < 2; ++i) EXPECT_NEAR(ang(i), std::acos(std::min(1.0, svd.singularValues()(i))), 1e-7);
    EXPECT_LE(ang(0), ang(1));
    EXPECT_LE((principal_angles(b, a) - ang).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(PrincipalAngles, TinyAnglesAreResolved) {
  // acos of the cosine loses everything below ~1e-8; the sine branch must not.
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(3, 1), b = Eigen::MatrixXd::Zero(3, 1);
  a(0, 0) = 1;
  b(0, 0) = std::cos(1e-10);
  b(1, 0) = std::sin(1e-10);
  EXPECT_NEAR(principal_angles(a, b)(0), 1e-10, 1e-20);
}
