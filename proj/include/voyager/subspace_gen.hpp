#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <span>
#include <vector>

#include "voyager/projection.hpp"

namespace voyager {

/// Three i.i.d. standard-normal N-vectors orthonormalized in order.
inline ProjectionBasis random_subspace(Eigen::Index n_dims, std::uint64_t seed, VecND origin = {}) {
  if (n_dims < 3) throw Error(ErrorCode::TooFewDims, "random subspaces need N >= 3");
  if (origin.size() == 0) origin = VecND::Zero(n_dims);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::vector<VecND> axes;
  while (axes.size() < 3) {
    VecND v(n_dims);
    for (auto& c : v) c = normal(rng);
    try {
      axes.push_back(gram_schmidt(std::span<const VecND>(axes), v));
    } catch (const Error&) {
    }
  }
  return ProjectionBasis::from_axes(axes[0], axes[1], axes[2], std::move(origin));
}

struct KMeansResult {
  std::vector<int> assignment;
  Eigen::MatrixXd centroids;        // k x N
  std::vector<double> objective;    // after each assignment step
  int iterations = 0;
};

/// Lloyd's algorithm with k-means++ seeding. A cluster that empties is
/// re-seeded at the point farthest from its current centroid.
inline KMeansResult kmeans(const PointMatrix& points, int k, std::uint64_t seed, int max_iterations = 100) {
  const Eigen::Index n = points.rows();
  if (k < 1) throw Error(ErrorCode::InvalidArgument, "k must be at least 1");
  if (n < 3 * static_cast<Eigen::Index>(k)) throw Error(ErrorCode::InvalidArgument, "k-means needs at least 3k points");

  std::mt19937_64 rng(seed);
  KMeansResult res;
  res.centroids.resize(k, points.cols());
  std::uniform_int_distribution<Eigen::Index> first(0, n - 1);
  res.centroids.row(0) = points.row(first(rng));
  Eigen::VectorXd d2 = (points.rowwise() - res.centroids.row(0)).rowwise().squaredNorm();
  for (int c = 1; c < k; ++c) {
    const double total = d2.sum();
    Eigen::Index pick = 0;
    if (total > 0) {
      double r = std::uniform_real_distribution<double>(0.0, total)(rng);
      for (pick = 0; pick < n - 1; ++pick) {
        r -= d2(pick);
        if (r < 0) break;
      }
    } else {
      pick = first(rng);
    }
    res.centroids.row(c) = points.row(pick);
    d2 = d2.cwiseMin((points.rowwise() - res.centroids.row(c)).rowwise().squaredNorm());
  }

  res.assignment.assign(static_cast<std::size_t>(n), -1);
  for (int iter = 0; iter < max_iterations; ++iter) {
    bool changed = false;
    double objective = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
      int best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (int c = 0; c < k; ++c) {
        const double d = (points.row(i) - res.centroids.row(c)).squaredNorm();
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      objective += best_d;
      auto& slot = res.assignment[static_cast<std::size_t>(i)];
      if (slot != best) {
        slot = best;
        changed = true;
      }
    }
    res.objective.push_back(objective);
    res.iterations = iter + 1;
    if (!changed && iter > 0) break;

    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, points.cols());
    std::vector<Eigen::Index> counts(static_cast<std::size_t>(k), 0);
    for (Eigen::Index i = 0; i < n; ++i) {
      const int c = res.assignment[static_cast<std::size_t>(i)];
      sums.row(c) += points.row(i);
      ++counts[static_cast<std::size_t>(c)];
    }
    for (int c = 0; c < k; ++c) {
      if (counts[static_cast<std::size_t>(c)] > 0) {
        res.centroids.row(c) = sums.row(c) / static_cast<double>(counts[static_cast<std::size_t>(c)]);
        continue;
      }
      Eigen::Index far = 0;
      (points.rowwise() - res.centroids.row(c)).rowwise().squaredNorm().maxCoeff(&far);
      res.centroids.row(c) = points.row(far);
    }
  }
  return res;
}

struct SubspaceCluster {
  std::vector<std::size_t> member_ids;
  ProjectionBasis basis;
  VecND centroid;
  int color_tag = 0;
};

/// Clusters with k-means and characterizes each cluster by the top three
/// principal components of its members. Clusters come back largest first,
/// tagged 1..k.
inline std::vector<SubspaceCluster> kmeans_subspaces(const PointMatrix& points, int k, std::uint64_t seed) {
  const KMeansResult km = kmeans(points, k, seed);
  const Eigen::Index dims = points.cols();
  if (dims < 3) throw Error(ErrorCode::TooFewDims, "subspace clusters need N >= 3");

  std::vector<SubspaceCluster> out(static_cast<std::size_t>(k));
  for (std::size_t i = 0; i < km.assignment.size(); ++i) {
    out[static_cast<std::size_t>(km.assignment[i])].member_ids.push_back(i);
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const auto& a, const auto& b) { return a.member_ids.size() > b.member_ids.size(); });

  for (std::size_t c = 0; c < out.size(); ++c) {
    auto& cl = out[c];
    cl.color_tag = static_cast<int>(c) + 1;
    PointMatrix members(static_cast<Eigen::Index>(cl.member_ids.size()), dims);
    for (std::size_t i = 0; i < cl.member_ids.size(); ++i) {
      members.row(static_cast<Eigen::Index>(i)) = points.row(static_cast<Eigen::Index>(cl.member_ids[i]));
    }
    cl.centroid = members.rows() > 0 ? VecND(members.colwise().mean().transpose()) : VecND::Zero(dims);

    if (members.rows() >= 3) {
      const PcaResult p = pca(members, 3);
      cl.basis = make_basis(p.component(0), p.component(1), ThirdPc{p.component(2)}, cl.centroid);
      continue;
    }
    // Too few members: keep whatever directions they define, complete randomly.
    std::vector<VecND> axes;
    if (members.rows() == 2) {
      const VecND d = members.row(1) - members.row(0);
      if (d.norm() > kDegenerateNorm) axes.push_back(d.normalized());
    }
    std::mt19937_64 rng(seed + 7919 * (c + 1));
    std::normal_distribution<double> normal;
    while (axes.size() < 3) {
      VecND v(dims);
      for (auto& x : v) x = normal(rng);
      try {
        axes.push_back(gram_schmidt(std::span<const VecND>(axes), v));
      } catch (const Error&) {
      }
    }
    cl.basis = ProjectionBasis::from_axes(axes[0], axes[1], axes[2], cl.centroid);
  }
  return out;
}

/// Per-point cluster tags (1..k) in point order.
inline std::vector<int> cluster_labels(std::span<const SubspaceCluster> clusters, std::size_t n_points) {
  std::vector<int> labels(n_points, 0);
  for (const auto& c : clusters)
    for (auto id : c.member_ids) labels[id] = c.color_tag;
  return labels;
}

inline double adjusted_rand_index(std::span<const int> a, std::span<const int> b) {
  if (a.size() != b.size()) throw Error(ErrorCode::InvalidArgument, "label vectors differ in length");
  std::map<std::pair<int, int>, double> joint;
  std::map<int, double> ra, rb;
  for (std::size_t i = 0; i < a.size(); ++i) {
    joint[{a[i], b[i]}] += 1;
    ra[a[i]] += 1;
    rb[b[i]] += 1;
  }
  auto comb2 = [](double x) { return x * (x - 1) / 2; };
  double index = 0, sa = 0, sb = 0;
  for (const auto& [key, v] : joint) index += comb2(v);
  for (const auto& [key, v] : ra) sa += comb2(v);
  for (const auto& [key, v] : rb) sb += comb2(v);
  const double total = comb2(static_cast<double>(a.size()));
  const double expected = sa * sb / total;
  const double max_index = (sa + sb) / 2;
  if (max_index == expected) return 1.0;
  return (index - expected) / (max_index - expected);
}

}  // namespace voyager
