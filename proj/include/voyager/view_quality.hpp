#pragma once

// Scalar view-quality indices over a 2D projection. Higher is always better;
// stress is reported negated. Degenerate projections score -infinity.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "voyager/projection.hpp"

namespace voyager {

enum class MetricKind { stress, distance_consistency, distribution_consistency, class_separation, holes, central_mass };

inline std::string_view to_string(MetricKind kind) {
  switch (kind) {
    case MetricKind::stress: return "stress";
    case MetricKind::distance_consistency: return "distance_consistency";
    case MetricKind::distribution_consistency: return "distribution_consistency";
    case MetricKind::class_separation: return "class_separation";
    case MetricKind::holes: return "holes";
    case MetricKind::central_mass: return "central_mass";
  }
  return "unknown";
}

inline MetricKind parse_metric_kind(std::string_view name) {
  for (auto kind : {MetricKind::stress, MetricKind::distance_consistency, MetricKind::distribution_consistency,
                    MetricKind::class_separation, MetricKind::holes, MetricKind::central_mass}) {
    if (to_string(kind) == name) return kind;
  }
  throw Error(ErrorCode::InvalidArgument, "unknown metric kind '" + std::string(name) + "'");
}

inline bool needs_labels(MetricKind kind) {
  return kind == MetricKind::distance_consistency || kind == MetricKind::distribution_consistency ||
         kind == MetricKind::class_separation;
}

struct QualityMetric {
  MetricKind kind = MetricKind::holes;
  int grid_size = 16;                  // distribution_consistency
  std::size_t sample_size = 20000;     // stress pair sample
  std::uint64_t seed = 0x5eed'0001ULL; // stress pair sample

  bool operator==(const QualityMetric&) const = default;
};

inline constexpr double kWorstScore = -std::numeric_limits<double>::infinity();

/// Precomputes everything that does not depend on the view (stress pair
/// sample and its N-D distances, dense class ids) so one metric can score
/// many candidate projections of the same data.
class ViewScorer {
 public:
  ViewScorer(QualityMetric metric, const PointMatrix& points, std::span<const int> labels = {})
      : metric_(metric), n_(points.rows()) {
    if (n_ < 3) throw Error(ErrorCode::InvalidArgument, "view quality needs at least 3 points");
    if (needs_labels(metric.kind)) {
      if (labels.size() != static_cast<std::size_t>(n_)) {
        throw Error(ErrorCode::MissingLabels, std::string(to_string(metric.kind)) + " requires one label per point");
      }
      std::map<int, int> dense;
      class_of_.reserve(labels.size());
      for (int l : labels) {
        auto [it, inserted] = dense.try_emplace(l, static_cast<int>(dense.size()));
        class_of_.push_back(it->second);
      }
      classes_ = static_cast<int>(dense.size());
    }
    if (metric.kind == MetricKind::stress) build_pairs(points);
  }

  const QualityMetric& metric() const { return metric_; }

  double operator()(const Eigen::MatrixX2d& xy) const {
    if (xy.rows() != n_) throw Error(ErrorCode::InvalidArgument, "projection size does not match the data");
    if (!xy.allFinite()) return kWorstScore;
    const Eigen::RowVector2d mean = xy.colwise().mean();
    if ((xy.rowwise() - mean).cwiseAbs().maxCoeff() < 1e-12) return kWorstScore;
    switch (metric_.kind) {
      case MetricKind::stress: return -stress(xy);
      case MetricKind::distance_consistency: return distance_consistency(xy);
      case MetricKind::distribution_consistency: return distribution_consistency(xy);
      case MetricKind::class_separation: return class_separation(xy);
      case MetricKind::holes: return holes(xy);
      case MetricKind::central_mass: {
        const double h = holes(xy);
        return std::isfinite(h) ? 1.0 - h : h;
      }
    }
    return kWorstScore;
  }

 private:
  void build_pairs(const PointMatrix& points) {
    const auto n = static_cast<std::size_t>(n_);
    const std::size_t all = n * (n - 1) / 2;
    if (all <= metric_.sample_size) {
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) pairs_.emplace_back(i, j);
    } else {
      std::mt19937_64 rng(metric_.seed);
      std::uniform_int_distribution<std::size_t> pick(0, n - 1);
      while (pairs_.size() < metric_.sample_size) {
        const std::size_t i = pick(rng);
        const std::size_t j = pick(rng);
        if (i != j) pairs_.emplace_back(i, j);
      }
    }
    high_dist_.reserve(pairs_.size());
    for (auto [i, j] : pairs_) {
      high_dist_.push_back((points.row(static_cast<Eigen::Index>(i)) - points.row(static_cast<Eigen::Index>(j))).norm());
    }
  }

  // Kruskal stress-1 after the optimal uniform rescaling of the 2D distances.
  double stress(const Eigen::MatrixX2d& xy) const {
    double dd = 0, dl = 0, ll = 0;
    for (std::size_t p = 0; p < pairs_.size(); ++p) {
      const auto [i, j] = pairs_[p];
      const double low = (xy.row(static_cast<Eigen::Index>(i)) - xy.row(static_cast<Eigen::Index>(j))).norm();
      const double high = high_dist_[p];
      dd += high * high;
      dl += high * low;
      ll += low * low;
    }
    if (ll <= 0.0 || dd <= 0.0) return std::numeric_limits<double>::infinity();
    const double b = dl / ll;
    double num = 0;
    for (std::size_t p = 0; p < pairs_.size(); ++p) {
      const auto [i, j] = pairs_[p];
      const double low = (xy.row(static_cast<Eigen::Index>(i)) - xy.row(static_cast<Eigen::Index>(j))).norm();
      const double r = high_dist_[p] - b * low;
      num += r * r;
    }
    return std::sqrt(num / dd);
  }

  Eigen::MatrixX2d centroids(const Eigen::MatrixX2d& xy) const {
    Eigen::MatrixX2d c = Eigen::MatrixX2d::Zero(classes_, 2);
    Eigen::VectorXd count = Eigen::VectorXd::Zero(classes_);
    for (Eigen::Index i = 0; i < n_; ++i) {
      c.row(class_of_[static_cast<std::size_t>(i)]) += xy.row(i);
      count(class_of_[static_cast<std::size_t>(i)]) += 1;
    }
    for (int k = 0; k < classes_; ++k) c.row(k) /= count(k);
    return c;
  }

  double distance_consistency(const Eigen::MatrixX2d& xy) const {
    const Eigen::MatrixX2d c = centroids(xy);
    std::size_t good = 0;
    for (Eigen::Index i = 0; i < n_; ++i) {
      const int own = class_of_[static_cast<std::size_t>(i)];
      const double d_own = (xy.row(i) - c.row(own)).squaredNorm();
      bool nearest = true;
      for (int k = 0; k < classes_ && nearest; ++k) {
        if (k != own && (xy.row(i) - c.row(k)).squaredNorm() < d_own) nearest = false;
      }
      good += nearest ? 1 : 0;
    }
    return static_cast<double>(good) / static_cast<double>(n_);
  }

  // Grid aligned with the cloud's own principal axes so the index does not
  // depend on the in-plane orientation.
  double distribution_consistency(const Eigen::MatrixX2d& xy) const {
    if (classes_ < 2) return 1.0;
    const Eigen::RowVector2d mean = xy.colwise().mean();
    const Eigen::MatrixX2d centered = xy.rowwise() - mean;
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(centered.transpose() * centered);
    const Eigen::MatrixX2d aligned = centered * eig.eigenvectors();
    const int g = metric_.grid_size;
    std::vector<int> cell(static_cast<std::size_t>(n_), 0);
    for (int axis = 0; axis < 2; ++axis) {
      const double lo = aligned.col(axis).minCoeff();
      const double span = aligned.col(axis).maxCoeff() - lo;
      for (Eigen::Index i = 0; i < n_; ++i) {
        int idx = span > 1e-12 ? static_cast<int>(std::floor((aligned(i, axis) - lo) / span * g)) : 0;
        idx = std::clamp(idx, 0, g - 1);
        cell[static_cast<std::size_t>(i)] = cell[static_cast<std::size_t>(i)] * g + idx;
      }
    }
    std::vector<int> counts(static_cast<std::size_t>(g * g * classes_), 0);
    for (Eigen::Index i = 0; i < n_; ++i) {
      ++counts[static_cast<std::size_t>(cell[static_cast<std::size_t>(i)] * classes_ + class_of_[static_cast<std::size_t>(i)])];
    }
    double weighted_entropy = 0;
    for (int c = 0; c < g * g; ++c) {
      int total = 0;
      for (int k = 0; k < classes_; ++k) total += counts[static_cast<std::size_t>(c * classes_ + k)];
      if (total == 0) continue;
      double h = 0;
      for (int k = 0; k < classes_; ++k) {
        const int cnt = counts[static_cast<std::size_t>(c * classes_ + k)];
        if (cnt == 0) continue;
        const double p = static_cast<double>(cnt) / total;
        h -= p * std::log(p);
      }
      weighted_entropy += static_cast<double>(total) / static_cast<double>(n_) * h;
    }
    return 1.0 - weighted_entropy / std::log(static_cast<double>(classes_));
  }

  double class_separation(const Eigen::MatrixX2d& xy) const {
    const Eigen::RowVector2d mean = xy.colwise().mean();
    const Eigen::MatrixX2d c = centroids(xy);
    double total = 0, between = 0;
    for (Eigen::Index i = 0; i < n_; ++i) {
      total += (xy.row(i) - mean).squaredNorm();
      between += (c.row(class_of_[static_cast<std::size_t>(i)]) - mean).squaredNorm();
    }
    if (total <= 0.0) return kWorstScore;
    return between / total;
  }

  double holes(const Eigen::MatrixX2d& xy) const {
    const Eigen::RowVector2d mean = xy.colwise().mean();
    const Eigen::MatrixX2d centered = xy.rowwise() - mean;
    const Eigen::Matrix2d cov = centered.transpose() * centered / static_cast<double>(n_);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(cov);
    const Eigen::Vector2d ev = eig.eigenvalues();
    if (!(ev(0) > 1e-12 * std::max(ev(1), 1e-300))) return kWorstScore;
    const Eigen::Matrix2d whiten =
        eig.eigenvectors() * ev.cwiseSqrt().cwiseInverse().asDiagonal() * eig.eigenvectors().transpose();
    const Eigen::MatrixX2d z = centered * whiten;
    double acc = 0;
    for (Eigen::Index i = 0; i < n_; ++i) acc += std::exp(-0.5 * z.row(i).squaredNorm());
    return (1.0 - acc / static_cast<double>(n_)) / (1.0 - std::exp(-1.0));
  }

  QualityMetric metric_;
  Eigen::Index n_;
  std::vector<int> class_of_;
  int classes_ = 0;
  std::vector<std::pair<std::size_t, std::size_t>> pairs_;
  std::vector<double> high_dist_;
};

inline double score(const QualityMetric& metric, const Eigen::MatrixX2d& xy, const PointMatrix& points,
                    std::span<const int> labels = {}) {
  return ViewScorer(metric, points, labels)(xy);
}

inline double score(const QualityMetric& metric, const ProjectedCloud& proj, const PointMatrix& points,
                    std::span<const int> labels = {}) {
  return score(metric, proj.xy, points, labels);
}

struct ViewCandidate {
  ProjectionBasis basis;
  Rotation3 rotation;
};

/// Candidate indices ordered by descending score; ties keep input order.
inline std::vector<std::size_t> rank_views(const QualityMetric& metric, std::span<const ViewCandidate> candidates,
                                           const PointMatrix& points, std::span<const int> labels = {}) {
  const ViewScorer scorer(metric, points, labels);
  std::vector<double> scores;
  scores.reserve(candidates.size());
  for (const auto& c : candidates) {
    TrackballState s;
    s.basis = c.basis;
    s.rotation = c.rotation;
    scores.push_back(scorer(project(s, points).xy));
  }
  std::vector<std::size_t> order(candidates.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  return order;
}

}  // namespace voyager
