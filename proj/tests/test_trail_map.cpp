#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "test_support.hpp"
#include "voyager/trail_map.hpp"

using namespace voyager;

namespace {

SavedView view_of(const TrackballState& s, ViewId id) {
  SavedView v;
  v.view_id = id;
  v.basis = s.basis;
  v.rotation = s.rotation;
  v.zoom = s.zoom;
  return v;
}

SavedView random_view(std::mt19937_64& rng, Eigen::Index n, ViewId id) { return view_of(vt::random_state(rng, n), id); }

Eigen::MatrixXd plane(const TrackballState& s) {
  Eigen::MatrixXd f(s.basis.dims(), 2);
  f.col(0) = s.baked_axes().row(0).transpose();
  f.col(1) = s.baked_axes().row(1).transpose();
  return f;
}

Eigen::MatrixXd plane(const SavedView& v) { return plane(v.state()); }

}  // namespace

TEST(ViewWeightVector, AxisAlignedBasis) {
  const SavedView v = view_of(TrackballState::from_basis(ProjectionBasis::identity(5, VecND::Zero(5))), 1);
  VecND expected = VecND::Zero(5);
  expected.head(3).setOnes();
  EXPECT_EQ(view_weight_vector(v), expected);
}

TEST(ViewWeightVector, ThreeFourFiveColumn) {
  VecND x = VecND::Zero(4), y = VecND::Zero(4), z = VecND::Zero(4);
  x << 0.6, 0.8, 0, 0;
  y << 0.8, -0.6, 0, 0;
  z << 0, 0, 1, 0;
  const SavedView v = view_of(TrackballState::from_basis(ProjectionBasis::from_axes(x, y, z, VecND::Zero(4))), 1);
  EXPECT_NEAR(view_weight_vector(v)(0), 1.0, 1e-15);
  EXPECT_NEAR(view_weight_vector(v)(3), 0.0, 1e-15);
}

TEST(ViewWeightVector, InvariantUnderStoredRotation) {
  std::mt19937_64 rng(1);
  for (int t = 0; t < 200; ++t) {
    SavedView v = view_of(TrackballState::from_basis(vt::random_basis(rng, 9)), 1);
    const VecND before = v.basis.axes.colwise().norm().transpose();
    v.rotation = vt::random_rotation(rng);
    EXPECT_LE((view_weight_vector(v) - before).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(SavedView, ThumbnailIsReproducible) {
  std::mt19937_64 rng(2);
  const PointMatrix pts = vt::gaussian_matrix(rng, 60, 6);
  const TrackballState s = vt::random_state(rng, 6);
  const std::vector<std::size_t> ids = {0, 5, 7, 59};
  const std::vector<int> tags(60, 3);
  const SavedView v = make_saved_view(s, pts, ids, tags, 4, "a", 100);
  ASSERT_EQ(v.thumbnail.ids, ids);
  const Eigen::Matrix3Xd axes = v.state().baked_axes();
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const VecND p = pts.row(static_cast<Eigen::Index>(ids[i])).transpose() - v.basis.origin;
    EXPECT_NEAR(v.thumbnail.xy(static_cast<Eigen::Index>(i), 0), v.zoom * axes.row(0).dot(p), 1e-9);
    EXPECT_NEAR(v.thumbnail.xy(static_cast<Eigen::Index>(i), 1), v.zoom * axes.row(1).dot(p), 1e-9);
    EXPECT_EQ(v.thumbnail.tags[i], 3);
  }
}

TEST(Layout, SingleViewIsCentered) {
  std::mt19937_64 rng(3);
  const std::vector<SavedView> views = {random_view(rng, 7, 9)};
  const TrailMapLayout l = layout(views);
  ASSERT_EQ(l.positions.size(), 1u);
  EXPECT_EQ(l.positions[0].first, 9u);
  EXPECT_EQ(l.positions[0].second, Eigen::Vector2d(0.5, 0.5));
  EXPECT_LE(l.labels.size(), kStmLabels);
}

TEST(Layout, IdenticalViewsShareAPosition) {
  std::mt19937_64 rng(4);
  SavedView a = random_view(rng, 6, 1);
  SavedView b = a;
  b.view_id = 2;
  const std::vector<SavedView> views = {a, b, random_view(rng, 6, 3)};
  const TrailMapLayout l = layout(views);
  EXPECT_LE((l.positions[0].second - l.positions[1].second).norm(), 1e-12);
}

TEST(Layout, ThreeViewsKeepTheirTriangleUpToScale) {
  // Three weight vectors are always coplanar, so the top-2 PCA is an isometry up to scale.
  std::mt19937_64 rng(5);
  for (int t = 0; t < 20; ++t) {
    const std::vector<SavedView> views = {random_view(rng, 12, 1), random_view(rng, 12, 2), random_view(rng, 12, 3)};
    const TrailMapLayout l = layout(views);
    double ratio = 0;
    for (std::size_t i = 0; i < 3; ++i) {
      for (std::size_t j = i + 1; j < 3; ++j) {
        const double ds = (view_weight_vector(views[i]) - view_weight_vector(views[j])).norm();
        const double dl = (l.positions[i].second - l.positions[j].second).norm();
        if (ratio == 0) ratio = dl / ds;
        EXPECT_NEAR(dl / ds, ratio, 1e-6);
      }
    }
  }
}

TEST(Layout, PositionsStayInUnitSquareWithMargin) {
  std::mt19937_64 rng(6);
  std::vector<SavedView> views;
  for (ViewId i = 0; i < 25; ++i) views.push_back(random_view(rng, 15, i));
  const TrailMapLayout l = layout(views);
  double lo = 1, hi = 0;
  for (const auto& [id, pos] : l.positions) {
    EXPECT_TRUE(pos.allFinite());
    lo = std::min(lo, pos.minCoeff());
    hi = std::max(hi, pos.maxCoeff());
  }
  EXPECT_GE(lo, 0.05 - 1e-12);
  EXPECT_LE(hi, 0.95 + 1e-12);
  EXPECT_EQ(l.labels.size(), kStmLabels);
  for (std::size_t i = 1; i < l.labels.size(); ++i) EXPECT_GE(l.labels[i - 1].weight, l.labels[i].weight);
}

TEST(Interpolate, EndpointsMatchTheViews) {
  std::mt19937_64 rng(7);
  for (int t = 0; t < 100; ++t) {
    const SavedView a = random_view(rng, 8, 1), b = random_view(rng, 8, 2);
    EXPECT_EQ(interpolate(a, b, 0.0), keyframe_state(a));
    EXPECT_LE(principal_angles(plane(interpolate(a, b, 1.0)), plane(b)).maxCoeff(), 1e-8);
  }
}

TEST(Interpolate, OrthogonalPlanesMeetHalfway) {
  VecND e[4];
  for (int i = 0; i < 4; ++i) e[i] = VecND::Unit(6, i);
  const SavedView a = view_of(TrackballState::from_basis(ProjectionBasis::from_axes(e[0], e[1], e[2], VecND::Zero(6))), 1);
  const SavedView b = view_of(TrackballState::from_basis(ProjectionBasis::from_axes(e[2], e[3], e[0], VecND::Zero(6))), 2);
  const TrackballState mid = interpolate(a, b, 0.5);
  const Eigen::VectorXd to_a = principal_angles(plane(mid), plane(a));
  const Eigen::VectorXd to_b = principal_angles(plane(mid), plane(b));
  for (int i = 0; i < 2; ++i) {
    EXPECT_NEAR(to_a(i), std::numbers::pi / 4, 1e-8);
    EXPECT_NEAR(to_b(i), std::numbers::pi / 4, 1e-8);
  }
}

TEST(Interpolate, ReversedPathSpansSamePlanes) {
  std::mt19937_64 rng(8);
  for (int t = 0; t < 50; ++t) {
    const SavedView a = random_view(rng, 7, 1), b = random_view(rng, 7, 2);
    for (double s : {0.1, 0.37, 0.5, 0.93}) {
      EXPECT_LE(principal_angles(plane(interpolate(a, b, s)), plane(interpolate(b, a, 1 - s))).maxCoeff(), 1e-8);
    }
  }
}

TEST(Interpolate, FramesStayOrthonormal) {
  std::mt19937_64 rng(9);
  for (int t = 0; t < 20; ++t) {
    const SavedView a = random_view(rng, 10, 1), b = random_view(rng, 10, 2);
    for (int k = 0; k <= 100; ++k) {
      EXPECT_LE(vt::orthonormality_error(interpolate(a, b, k / 100.0).basis.axes), 1e-8);
    }
  }
}

TEST(Interpolate, CoincidentSpansStayPut) {
  std::mt19937_64 rng(10);
  const SavedView a = random_view(rng, 6, 1);
  const TrackballState s = interpolate(a, a, 0.4);
  EXPECT_LE(principal_angles(plane(s), plane(a)).maxCoeff(), 1e-8);
  EXPECT_THROW(interpolate(a, a, 1.5), Error);
}

TEST(KeyframePath, SliderEndpointsAndMiddleKeyframe) {
  // a -> b -> c with both segments a quarter turn of one axis.
  VecND e[5];
  for (int i = 0; i < 5; ++i) e[i] = VecND::Unit(5, i);
  auto basis = [&](int i, int j, int k) {
    return view_of(TrackballState::from_basis(ProjectionBasis::from_axes(e[i], e[j], e[k], VecND::Zero(5))), ViewId(i));
  };
  const KeyframePath path({basis(0, 1, 2), basis(0, 3, 2), basis(0, 4, 2)});
  EXPECT_NEAR(path.total_length(), std::numbers::pi, 1e-12);
  EXPECT_EQ(path.at(0.0), keyframe_state(path.keyframe(0)));
  EXPECT_EQ(path.at(0.5), keyframe_state(path.keyframe(1)));
  EXPECT_EQ(path.at(1.0), keyframe_state(path.keyframe(2)));
}

TEST(KeyframePath, SegmentFramesEndOnTheKeyframe) {
  std::mt19937_64 rng(11);
  const KeyframePath path({random_view(rng, 8, 1), random_view(rng, 8, 2)});
  const auto frames = path.segment_frames(0, 12);
  ASSERT_EQ(frames.size(), 12u);
  EXPECT_EQ(frames.back(), keyframe_state(path.keyframe(1)));
  for (const auto& f : frames) EXPECT_LE(vt::orthonormality_error(f.basis.axes), 1e-8);
  for (double t = 0; t <= 1.0; t += 0.01) EXPECT_LE(vt::orthonormality_error(path.at(t).basis.axes), 1e-8);
}

TEST(KeyframePath, NeedsTwoKeyframes) {
  std::mt19937_64 rng(12);
  try {
    KeyframePath path({random_view(rng, 4, 1)});
    FAIL() << "expected PathTooShort";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::PathTooShort);
  }
}
