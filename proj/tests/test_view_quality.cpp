#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include "test_support.hpp"
#include "voyager/view_quality.hpp"

using namespace voyager;

namespace {

QualityMetric metric_of(MetricKind kind) {
  QualityMetric m;
  m.kind = kind;
  return m;
}

Eigen::MatrixX2d ring(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> angle(0, 2 * std::numbers::pi);
  std::normal_distribution<double> radial(1.0, 0.03);
  Eigen::MatrixX2d xy(n, 2);
  for (int i = 0; i < n; ++i) {
    const double a = angle(rng), r = radial(rng);
    xy.row(i) << r * std::cos(a), r * std::sin(a);
  }
  return xy;
}

// Anisotropic clouds for three labelled classes, so principal axes are well defined.
void labelled_clouds(std::mt19937_64& rng, int n, Eigen::MatrixX2d& xy, std::vector<int>& labels) {
  std::normal_distribution<double> normal;
  xy.resize(n, 2);
  labels.resize(static_cast<std::size_t>(n));
  const double centers[3][2] = {{0, 0}, {3, 0.5}, {1, 2}};
  for (int i = 0; i < n; ++i) {
    const int c = i % 3;
    labels[static_cast<std::size_t>(i)] = c * 10 + 7;  // sparse ids on purpose
    xy.row(i) << 2.0 * centers[c][0] + 1.5 * normal(rng), centers[c][1] + 0.6 * normal(rng);
  }
}

// Brute-force centroid-nearest fraction.
double dc_oracle(const Eigen::MatrixX2d& xy, const std::vector<int>& labels) {
  std::vector<int> ids(labels);
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  std::vector<Eigen::RowVector2d> cent;
  for (int id : ids) {
    Eigen::RowVector2d sum = Eigen::RowVector2d::Zero();
    int cnt = 0;
    for (Eigen::Index i = 0; i < xy.rows(); ++i)
      if (labels[static_cast<std::size_t>(i)] == id) sum += xy.row(i), ++cnt;
    cent.push_back(sum / cnt);
  }
  int good = 0;
  for (Eigen::Index i = 0; i < xy.rows(); ++i) {
    const auto own = static_cast<std::size_t>(std::find(ids.begin(), ids.end(), labels[static_cast<std::size_t>(i)]) - ids.begin());
    bool ok = true;
    for (std::size_t k = 0; k < cent.size(); ++k)
      if (k != own && (xy.row(i) - cent[k]).norm() < (xy.row(i) - cent[own]).norm()) ok = false;
    good += ok;
  }
  return static_cast<double>(good) / static_cast<double>(xy.rows());
}

}  // namespace

TEST(ViewQuality, MetricNamesRoundTrip) {
  for (auto kind : {MetricKind::stress, MetricKind::distance_consistency, MetricKind::distribution_consistency,
                    MetricKind::class_separation, MetricKind::holes, MetricKind::central_mass}) {
    EXPECT_EQ(parse_metric_kind(to_string(kind)), kind);
  }
  EXPECT_THROW(parse_metric_kind("entropy"), Error);
}

TEST(ViewQuality, IsometricEmbeddingHasZeroStress) {
  std::mt19937_64 rng(1);
  const PointMatrix pts = vt::gaussian_matrix(rng, 200, 2);
  EXPECT_EQ(score(metric_of(MetricKind::stress), Eigen::MatrixX2d(pts), pts), 0.0);
  const Eigen::MatrixX2d squashed = pts * Eigen::Vector2d(1.0, 0.2).asDiagonal();
  EXPECT_LT(score(metric_of(MetricKind::stress), squashed, pts), 0.0);
}

TEST(ViewQuality, StressMatchesDirectKruskalFormula) {
  std::mt19937_64 rng(2);
  const PointMatrix pts = vt::gaussian_matrix(rng, 40, 5);
  const Eigen::MatrixX2d xy = pts.leftCols(2) + 0.1 * vt::gaussian_matrix(rng, 40, 2);
  // All 780 pairs fit in the sample, so the oracle uses every pair.
  std::vector<double> hi, lo;
  for (int i = 0; i < 40; ++i)
    for (int j = i + 1; j < 40; ++j) {
      hi.push_back((pts.row(i) - pts.row(j)).norm());
      lo.push_back((xy.row(i) - xy.row(j)).norm());
    }
  const double b = std::inner_product(hi.begin(), hi.end(), lo.begin(), 0.0) /
                   std::inner_product(lo.begin(), lo.end(), lo.begin(), 0.0);
  double num = 0, den = 0;
  for (std::size_t p = 0; p < hi.size(); ++p) {
    num += (hi[p] - b * lo[p]) * (hi[p] - b * lo[p]);
    den += hi[p] * hi[p];
  }
  EXPECT_NEAR(score(metric_of(MetricKind::stress), xy, pts), -std::sqrt(num / den), 1e-12);
}

TEST(ViewQuality, StressSampleIsReproducible) {
  std::mt19937_64 rng(3);
  const PointMatrix pts = vt::gaussian_matrix(rng, 800, 6);
  const Eigen::MatrixX2d xy = pts.leftCols(2);
  QualityMetric m = metric_of(MetricKind::stress);
  m.sample_size = 5000;
  const double a = score(m, xy, pts), b = score(m, xy, pts);
  EXPECT_EQ(a, b);
  m.seed += 1;
  EXPECT_NE(score(m, xy, pts), a);
}

TEST(ViewQuality, SeparatedClassesHavePerfectDistanceConsistency) {
  std::mt19937_64 rng(4);
  Eigen::MatrixX2d xy = vt::gaussian_matrix(rng, 100, 2) * 0.1;
  std::vector<int> labels(100, 0);
  for (int i = 50; i < 100; ++i) {
    xy(i, 0) += 5.0;
    labels[static_cast<std::size_t>(i)] = 1;
  }
  EXPECT_EQ(score(metric_of(MetricKind::distance_consistency), xy, PointMatrix(xy), labels), 1.0);
}

TEST(ViewQuality, DistanceConsistencyMatchesBruteForce) {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 20; ++t) {
    Eigen::MatrixX2d xy;
    std::vector<int> labels;
    labelled_clouds(rng, 150, xy, labels);
    const double s = score(metric_of(MetricKind::distance_consistency), xy, PointMatrix(xy), labels);
    EXPECT_EQ(s, dc_oracle(xy, labels));
    EXPECT_GE(s, 0.0);
    EXPECT_LE(s, 1.0);
  }
}

TEST(ViewQuality, ClassMetricsRequireLabels) {
  std::mt19937_64 rng(6);
  const PointMatrix pts = vt::gaussian_matrix(rng, 20, 3);
  for (auto kind : {MetricKind::distance_consistency, MetricKind::distribution_consistency, MetricKind::class_separation}) {
    try {
      score(metric_of(kind), Eigen::MatrixX2d(pts.leftCols(2)), pts);
      FAIL() << "expected MissingLabels";
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::MissingLabels);
    }
  }
}

TEST(ViewQuality, RingHasMoreHolesThanGaussian) {
  std::mt19937_64 rng(7);
  const Eigen::MatrixX2d r = ring(rng, 500);
  const Eigen::MatrixX2d g = vt::gaussian_matrix(rng, 500, 2);
  const double hr = score(metric_of(MetricKind::holes), r, PointMatrix(r));
  const double hg = score(metric_of(MetricKind::holes), g, PointMatrix(g));
  EXPECT_GT(hr, hg);
  EXPECT_GT(score(metric_of(MetricKind::central_mass), g, PointMatrix(g)),
            score(metric_of(MetricKind::central_mass), r, PointMatrix(r)));
}

TEST(ViewQuality, HolesOfKnownConfiguration) {
  // Four points at (+-1, +-1): covariance is the identity, every |z|^2 = 2.
  Eigen::MatrixX2d xy(4, 2);
  xy << 1, 1, 1, -1, -1, 1, -1, -1;
  const double expected = (1.0 - std::exp(-1.0)) / (1.0 - std::exp(-1.0));
  EXPECT_NEAR(score(metric_of(MetricKind::holes), xy, PointMatrix(xy)), expected, 1e-12);
  EXPECT_NEAR(score(metric_of(MetricKind::central_mass), xy, PointMatrix(xy)), 0.0, 1e-12);
}

TEST(ViewQuality, ClassSeparationIsBetweenOverTotal) {
  Eigen::MatrixX2d xy(4, 2);
  xy << -2, 1, -2, -1, 2, 1, 2, -1;
  const std::vector<int> labels = {0, 0, 1, 1};
  // Between scatter 4 * 4 = 16, total 4 * 5 = 20.
  EXPECT_NEAR(score(metric_of(MetricKind::class_separation), xy, PointMatrix(xy), labels), 0.8, 1e-15);
}

TEST(ViewQuality, DistributionConsistencyExtremes) {
  // Two classes far apart on a 16x16 grid never share a cell.
  std::mt19937_64 rng(8);
  Eigen::MatrixX2d xy = vt::gaussian_matrix(rng, 200, 2) * 0.1;
  std::vector<int> labels(200, 0);
  for (int i = 100; i < 200; ++i) {
    xy(i, 0) += 10.0;
    labels[static_cast<std::size_t>(i)] = 1;
  }
  EXPECT_NEAR(score(metric_of(MetricKind::distribution_consistency), xy, PointMatrix(xy), labels), 1.0, 1e-15);
  // Coincident pairs with different labels mix every occupied cell evenly.
  Eigen::MatrixX2d mixed(200, 2);
  for (int i = 0; i < 100; ++i) mixed.row(2 * i) = mixed.row(2 * i + 1) = xy.row(i) * 3 + Eigen::RowVector2d(i, i * i % 7);
  std::vector<int> alt(200);
  for (int i = 0; i < 200; ++i) alt[static_cast<std::size_t>(i)] = i % 2;
  EXPECT_NEAR(score(metric_of(MetricKind::distribution_consistency), mixed, PointMatrix(mixed), alt), 0.0, 1e-12);
}

TEST(ViewQuality, InvariantUnderRotationAndScaling) {
  std::mt19937_64 rng(9);
  Eigen::MatrixX2d xy;
  std::vector<int> labels;
  labelled_clouds(rng, 300, xy, labels);
  const PointMatrix pts = xy;
  for (auto kind : {MetricKind::stress, MetricKind::distance_consistency, MetricKind::distribution_consistency,
                    MetricKind::class_separation, MetricKind::holes, MetricKind::central_mass}) {
    const ViewScorer scorer(metric_of(kind), pts, labels);
    const double base = scorer(xy);
    for (double angle : {0.3, 1.7, -2.9}) {
      for (double scale : {0.01, 1.0, 250.0}) {
        const Eigen::Matrix2d r = Eigen::Rotation2Dd(angle).toRotationMatrix().transpose() * scale;
        EXPECT_NEAR(scorer(xy * r), base, 1e-9) << to_string(kind) << " angle " << angle << " scale " << scale;
      }
    }
  }
}

TEST(ViewQuality, CoincidentProjectionScoresWorst) {
  std::mt19937_64 rng(10);
  const PointMatrix pts = vt::gaussian_matrix(rng, 30, 4);
  const Eigen::MatrixX2d flat = Eigen::MatrixX2d::Constant(30, 2, 0.25);
  EXPECT_EQ(score(metric_of(MetricKind::holes), flat, pts), kWorstScore);
  EXPECT_EQ(score(metric_of(MetricKind::stress), flat, pts), kWorstScore);
}

TEST(RankViews, SingleAndDuplicateCandidates) {
  std::mt19937_64 rng(11);
  const PointMatrix pts = vt::gaussian_matrix(rng, 100, 5);
  const ViewCandidate c{vt::random_basis(rng, 5), Rotation3::identity()};
  const std::vector<ViewCandidate> one = {c};
  EXPECT_EQ(rank_views(metric_of(MetricKind::holes), one, pts), std::vector<std::size_t>{0});
  const std::vector<ViewCandidate> dup = {c, c, c};
  EXPECT_EQ(rank_views(metric_of(MetricKind::holes), dup, pts), (std::vector<std::size_t>{0, 1, 2}));
}

TEST(RankViews, MatchesIndependentScoring) {
  std::mt19937_64 rng(12);
  PointMatrix pts = vt::gaussian_matrix(rng, 300, 6);
  pts.col(1) = pts.col(1).unaryExpr([](double v) { return v > 0 ? v + 2 : v - 2; });
  std::vector<ViewCandidate> cands;
  for (int i = 0; i < 10; ++i) cands.push_back({vt::random_basis(rng, 6), vt::random_rotation(rng)});
  const QualityMetric m = metric_of(MetricKind::holes);
  std::vector<double> s;
  for (const auto& c : cands) {
    // Independent projection: rotated axes dotted with origin-shifted points.
    const Eigen::Matrix3Xd axes = c.rotation.m * c.basis.axes;
    const Eigen::MatrixXd shifted = pts.rowwise() - c.basis.origin.transpose();
    const Eigen::MatrixX2d xy = shifted * axes.topRows(2).transpose();
    s.push_back(score(m, xy, pts));
  }
  std::vector<std::size_t> expected(10);
  std::iota(expected.begin(), expected.end(), std::size_t{0});
  std::stable_sort(expected.begin(), expected.end(), [&](std::size_t a, std::size_t b) { return s[a] > s[b]; });
  EXPECT_EQ(rank_views(m, cands, pts), expected);
}
