#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "voyager/projection.hpp"

namespace voyager {

using ViewId = std::uint64_t;

/// Projected 2D coordinates and color tags of the points shown when the view
/// was saved. The UI renders it; nothing here rasterizes.
struct Thumbnail {
  std::vector<std::size_t> ids;
  Eigen::MatrixX2d xy;
  std::vector<int> tags;

  bool operator==(const Thumbnail&) const = default;
};

struct SavedView {
  ViewId view_id = 0;
  ProjectionBasis basis;
  Rotation3 rotation;
  double zoom = 1.0;
  std::string name;
  Thumbnail thumbnail;
  std::int64_t created_at = 0;  // seconds since the epoch

  TrackballState state() const {
    TrackballState s;
    s.rotation = rotation;
    s.zoom = zoom;
    s.basis = basis;
    return s;
  }

  bool operator==(const SavedView&) const = default;
};

inline SavedView make_saved_view(const TrackballState& state, const PointMatrix& points,
                                 std::span<const std::size_t> ids, std::span<const int> tags, ViewId id,
                                 std::string name, std::int64_t created_at) {
  SavedView v;
  v.view_id = id;
  v.basis = state.basis;
  v.rotation = state.rotation;
  v.zoom = state.zoom;
  v.name = std::move(name);
  v.created_at = created_at;
  const ProjectedCloud cloud = project(state, points, ids);
  v.thumbnail.ids = cloud.point_ids;
  v.thumbnail.xy = cloud.xy;
  v.thumbnail.tags.reserve(cloud.point_ids.size());
  for (auto id_ : cloud.point_ids) v.thumbnail.tags.push_back(id_ < tags.size() ? tags[id_] : 0);
  return v;
}

/// S_j: per-dimension L2 weight over the three baked PPA axes.
inline VecND view_weight_vector(const SavedView& v) { return v.state().baked_axes().colwise().norm().transpose(); }

/// Same state as the view with the rotation folded into the basis.
inline TrackballState keyframe_state(const SavedView& v) { return bake_rotation(v.state()); }

struct StmLabel {
  std::size_t dim = 0;
  Eigen::Vector2d position = Eigen::Vector2d::Zero();
  double weight = 0.0;
};

struct TrailMapLayout {
  std::vector<std::pair<ViewId, Eigen::Vector2d>> positions;
  std::vector<StmLabel> labels;  // at most kStmLabels, strongest first
  std::vector<std::vector<ViewId>> paths;
};

inline constexpr std::size_t kStmLabels = 10;

namespace detail {

// Greedy radial push: stronger labels are placed first, weaker ones slide
// outward along their own direction until they clear the ones already placed.
inline void push_labels_apart(std::vector<StmLabel>& labels, double max_weight) {
  const Eigen::Vector2d center(0.5, 0.5);
  auto radius = [&](const StmLabel& l) { return 0.02 + 0.03 * (max_weight > 0 ? l.weight / max_weight : 0.0); };
  for (std::size_t i = 0; i < labels.size(); ++i) {
    Eigen::Vector2d dir = labels[i].position - center;
    if (dir.norm() < 1e-12) dir = Eigen::Vector2d(std::cos(0.7 * i), std::sin(0.7 * i));
    dir.normalize();
    for (int step = 0; step < 400; ++step) {
      bool clear = true;
      for (std::size_t j = 0; j < i && clear; ++j) {
        if ((labels[i].position - labels[j].position).norm() < radius(labels[i]) + radius(labels[j])) clear = false;
      }
      if (clear) break;
      labels[i].position += 0.005 * dir;
    }
  }
}

}  // namespace detail

/// Embeds saved views by PCA over their weight vectors: positions are the
/// top-2 PC scores, uniformly scaled into the unit square with a 5% margin.
/// Attribute labels sit along their PC loadings; the ten strongest are kept.
inline TrailMapLayout layout(std::span<const SavedView> views, std::vector<std::vector<ViewId>> paths = {}) {
  if (views.empty()) throw Error(ErrorCode::InvalidArgument, "layout needs at least one view");
  const Eigen::Index dims = views.front().basis.dims();
  const auto p = static_cast<Eigen::Index>(views.size());
  PointMatrix s(p, dims);
  for (Eigen::Index j = 0; j < p; ++j) s.row(j) = view_weight_vector(views[static_cast<std::size_t>(j)]).transpose();

  TrailMapLayout out;
  out.paths = std::move(paths);
  Eigen::MatrixX2d loadings(dims, 2);
  Eigen::MatrixX2d coords = Eigen::MatrixX2d::Zero(p, 2);
  if (p >= 2) {
    const PcaResult pc = pca(s, 2);
    loadings = pc.components;
    coords = (s.rowwise() - pc.mean.transpose()) * pc.components;
  } else {
    const Eigen::Matrix3Xd baked = views.front().state().baked_axes();
    loadings.col(0) = baked.row(0).transpose();
    loadings.col(1) = baked.row(1).transpose();
  }

  const Eigen::RowVector2d lo = coords.colwise().minCoeff();
  const Eigen::RowVector2d hi = coords.colwise().maxCoeff();
  const double extent = (hi - lo).maxCoeff();
  const Eigen::RowVector2d mid = (lo + hi) / 2.0;
  const double scale = extent > 1e-12 ? 0.9 / extent : 0.0;
  for (Eigen::Index j = 0; j < p; ++j) {
    const Eigen::RowVector2d pos = Eigen::RowVector2d(0.5, 0.5) + (coords.row(j) - mid) * scale;
    out.positions.emplace_back(views[static_cast<std::size_t>(j)].view_id, pos.transpose());
  }

  std::vector<StmLabel> labels;
  for (Eigen::Index k = 0; k < dims; ++k) {
    labels.push_back({static_cast<std::size_t>(k), Eigen::Vector2d::Zero(), loadings.row(k).norm()});
  }
  std::stable_sort(labels.begin(), labels.end(), [](const auto& a, const auto& b) { return a.weight > b.weight; });
  if (labels.size() > kStmLabels) labels.resize(kStmLabels);
  const double max_weight = labels.empty() ? 0.0 : labels.front().weight;
  for (auto& l : labels) {
    const Eigen::Vector2d dir = loadings.row(static_cast<Eigen::Index>(l.dim)).transpose();
    l.position = Eigen::Vector2d(0.5, 0.5) + (max_weight > 0 ? 0.45 / max_weight : 0.0) * dir;
  }
  detail::push_labels_apart(labels, max_weight);
  out.labels = std::move(labels);
  return out;
}

namespace detail {

inline Eigen::MatrixX2d plane_of(const TrackballState& baked) {
  Eigen::MatrixX2d f(baked.basis.dims(), 2);
  f.col(0) = baked.basis.x();
  f.col(1) = baked.basis.y();
  return f;
}

}  // namespace detail

/// Geodesic between the on-screen planes of two views. Principal vector pairs
/// come from the SVD of A^T B; each pair turns by t times its principal
/// angle. The result is expressed in A's in-plane coordinates and, when the
/// residual in-plane map to B is a rotation, that rotation is blended in so
/// t = 1 lands on B's own axes.
inline TrackballState interpolate(const SavedView& a, const SavedView& b, double t) {
  if (!(t >= 0.0 && t <= 1.0)) throw Error(ErrorCode::InvalidArgument, "t must be in [0, 1]");
  const TrackballState sa = keyframe_state(a);
  if (t == 0.0) return sa;
  const TrackballState sb = keyframe_state(b);
  const Eigen::MatrixX2d fa = detail::plane_of(sa);
  const Eigen::MatrixX2d fb = detail::plane_of(sb);

  Eigen::JacobiSVD<Eigen::Matrix2d> svd(fa.transpose() * fb, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::Matrix2d u = svd.matrixU();
  const Eigen::Matrix2d v = svd.matrixV();
  const Eigen::MatrixX2d pa = fa * u;
  const Eigen::MatrixX2d pb = fb * v;

  Eigen::MatrixX2d moving(fa.rows(), 2);
  for (int i = 0; i < 2; ++i) {
    const double c = pa.col(i).dot(pb.col(i));
    const VecND r = pb.col(i) - c * pa.col(i);
    const double s = r.norm();
    const double theta = std::atan2(s, c);
    if (s < 1e-14) {
      moving.col(i) = pa.col(i);
    } else {
      moving.col(i) = std::cos(t * theta) * pa.col(i) + std::sin(t * theta) * (r / s);
    }
  }
  Eigen::MatrixX2d frame = moving * u.transpose();
  const Eigen::Matrix2d twist = u * v.transpose();
  if (twist.determinant() > 0) {
    const double phi = std::atan2(twist(1, 0), twist(0, 0));
    const Eigen::Matrix2d rot = Eigen::Rotation2Dd(t * phi).toRotationMatrix();
    frame = frame * rot;
  }

  const VecND x = frame.col(0).normalized();
  const VecND fixed[] = {x};
  const VecND y = gram_schmidt(fixed, frame.col(1));
  const VecND plane[] = {x, y};
  VecND z;
  try {
    z = gram_schmidt(plane, sa.basis.z());
  } catch (const Error&) {
    z = detail::complete_z(x, y, sb.basis.z());
  }

  TrackballState out;
  out.zoom = (1.0 - t) * a.zoom + t * b.zoom;
  out.basis = ProjectionBasis::from_axes(x, y, z, (1.0 - t) * sa.basis.origin + t * sb.basis.origin);
  return out;
}

/// Geodesic length between the on-screen planes of two views.
inline double geodesic_length(const SavedView& a, const SavedView& b) {
  return principal_angles(detail::plane_of(keyframe_state(a)), detail::plane_of(keyframe_state(b))).sum();
}

/// An ordered chain of keyframes parameterized by accumulated principal angle.
class KeyframePath {
 public:
  static constexpr int kDefaultFrames = 30;

  explicit KeyframePath(std::vector<SavedView> keyframes) : keys_(std::move(keyframes)) {
    if (keys_.size() < 2) throw Error(ErrorCode::PathTooShort, "a path needs at least two keyframes");
    cumulative_.push_back(0.0);
    for (std::size_t i = 0; i + 1 < keys_.size(); ++i) {
      cumulative_.push_back(cumulative_.back() + geodesic_length(keys_[i], keys_[i + 1]));
    }
  }

  std::size_t size() const { return keys_.size(); }
  const SavedView& keyframe(std::size_t i) const { return keys_.at(i); }
  double total_length() const { return cumulative_.back(); }

  /// Slider position t in [0, 1] over the whole path, uniform in arc length.
  TrackballState at(double t) const {
    if (!(t >= 0.0 && t <= 1.0)) throw Error(ErrorCode::InvalidArgument, "t must be in [0, 1]");
    const double total = total_length();
    if (total <= 0.0 || t == 0.0) return keyframe_state(keys_.front());
    if (t == 1.0) return keyframe_state(keys_.back());
    const double target = t * total;
    const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), target);
    const auto seg = static_cast<std::size_t>(std::distance(cumulative_.begin(), it)) - 1;
    const double len = cumulative_[seg + 1] - cumulative_[seg];
    const double local = (target - cumulative_[seg]) / len;
    return local == 0.0 ? keyframe_state(keys_[seg]) : interpolate(keys_[seg], keys_[seg + 1], local);
  }

  /// Frames animating keyframe i to keyframe i + 1; the last frame is the
  /// target keyframe itself.
  std::vector<TrackballState> segment_frames(std::size_t i, int frames = kDefaultFrames) const {
    if (i + 1 >= keys_.size()) throw Error(ErrorCode::InvalidArgument, "no segment after the last keyframe");
    if (frames < 1) throw Error(ErrorCode::InvalidArgument, "frame count must be positive");
    std::vector<TrackballState> out;
    for (int f = 1; f < frames; ++f) out.push_back(interpolate(keys_[i], keys_[i + 1], static_cast<double>(f) / frames));
    out.push_back(keyframe_state(keys_[i + 1]));
    return out;
  }

 private:
  std::vector<SavedView> keys_;
  std::vector<double> cumulative_;
};

}  // namespace voyager
