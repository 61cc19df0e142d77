#pragma once

// JSON encodings shared by the session file, the wire protocol and the CLI.
// Doubles are written by nlohmann::json in shortest round-trip form, so a
// parse of the output reproduces every value bit for bit.

#include <Eigen/Dense>
#include <json.hpp>

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "voyager/aco.hpp"
#include "voyager/dataset.hpp"
#include "voyager/navigation.hpp"
#include "voyager/projection.hpp"
#include "voyager/trail_map.hpp"
#include "voyager/view_quality.hpp"

namespace voyager::io {

using json = nlohmann::json;

// Non-finite scores travel as null.
inline json real(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }
inline double real_from(const json& j) {
  return j.is_null() ? -std::numeric_limits<double>::infinity() : j.get<double>();
}

inline json vec(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

inline Eigen::VectorXd vec_from(const json& j) {
  if (!j.is_array()) throw Error(ErrorCode::ParseError, "expected a numeric array");
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  return v;
}

// Matrices are arrays of rows.
template <class Derived>
json mat(const Eigen::MatrixBase<Derived>& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline Eigen::MatrixXd mat_from(const json& j, Eigen::Index cols_if_empty = 0) {
  if (!j.is_array()) throw Error(ErrorCode::ParseError, "expected an array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = rows ? static_cast<Eigen::Index>(j[0].size()) : cols_if_empty;
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const json& row = j[static_cast<std::size_t>(r)];
    if (static_cast<Eigen::Index>(row.size()) != cols) throw Error(ErrorCode::ParseError, "ragged matrix");
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = row[static_cast<std::size_t>(c)].get<double>();
  }
  return m;
}

inline json basis(const ProjectionBasis& b) {
  return {{"x", vec(b.x())}, {"y", vec(b.y())}, {"z", vec(b.z())}, {"origin", vec(b.origin)}};
}

inline ProjectionBasis basis_from(const json& j) {
  const VecND x = vec_from(j.at("x")), y = vec_from(j.at("y")), z = vec_from(j.at("z"));
  VecND origin = j.contains("origin") ? vec_from(j.at("origin")) : VecND::Zero(x.size());
  if (y.size() != x.size() || z.size() != x.size() || origin.size() != x.size()) {
    throw Error(ErrorCode::ParseError, "basis vectors differ in dimension");
  }
  return ProjectionBasis::from_axes(x, y, z, std::move(origin));
}

inline json rotation(const Rotation3& r) { return mat(r.m); }

inline Rotation3 rotation_from(const json& j) {
  const Eigen::MatrixXd m = mat_from(j);
  if (m.rows() != 3 || m.cols() != 3) throw Error(ErrorCode::ParseError, "rotation must be 3x3");
  Rotation3 r;
  r.m = m;
  return r;
}

inline json state(const TrackballState& s) {
  json j = {{"rotation", rotation(s.rotation)}, {"zoom", s.zoom}, {"basis", basis(s.basis)}};
  if (s.depth) {
    j["depth"] = {{"source", vec(s.depth->source)}, {"exponent", s.depth->exponent}, {"result", vec(s.depth->result)}};
  }
  return j;
}

inline TrackballState state_from(const json& j) {
  TrackballState s;
  s.rotation = rotation_from(j.at("rotation"));
  s.zoom = j.at("zoom").get<double>();
  s.basis = basis_from(j.at("basis"));
  if (j.contains("depth")) {
    const json& d = j["depth"];
    s.depth = DepthGesture{vec_from(d.at("source")), d.at("exponent").get<double>(), vec_from(d.at("result"))};
  }
  return s;
}

inline json thumbnail(const Thumbnail& t) { return {{"ids", t.ids}, {"xy", mat(t.xy)}, {"tags", t.tags}}; }

inline Thumbnail thumbnail_from(const json& j) {
  Thumbnail t;
  t.ids = j.at("ids").get<std::vector<std::size_t>>();
  t.xy = mat_from(j.at("xy"), 2);
  t.tags = j.at("tags").get<std::vector<int>>();
  return t;
}

inline json saved_view(const SavedView& v) {
  return {{"view_id", v.view_id},       {"name", v.name},           {"created_at", v.created_at},
          {"basis", basis(v.basis)},   {"rotation", rotation(v.rotation)}, {"zoom", v.zoom},
          {"thumbnail", thumbnail(v.thumbnail)}};
}

inline SavedView saved_view_from(const json& j) {
  SavedView v;
  v.view_id = j.at("view_id").get<ViewId>();
  v.name = j.value("name", "");
  v.created_at = j.value("created_at", std::int64_t{0});
  v.basis = basis_from(j.at("basis"));
  v.rotation = rotation_from(j.at("rotation"));
  v.zoom = j.at("zoom").get<double>();
  if (j.contains("thumbnail")) v.thumbnail = thumbnail_from(j["thumbnail"]);
  return v;
}

inline json chase_config(const ChaseConfig& c) {
  return {{"k_a", c.k_a}, {"k_d", c.k_d}, {"max_affected", c.max_affected}};
}

inline void update(ChaseConfig& c, const json& j) {
  for (const auto& [key, value] : j.items()) {
    if (key == "k_a") c.k_a = value.get<double>();
    else if (key == "k_d") c.k_d = value.get<double>();
    else if (key == "max_affected") c.max_affected = value.get<std::size_t>();
    else throw Error(ErrorCode::InvalidArgument, "unknown chase setting '" + key + "'");
  }
}

inline json aco_config(const AcoConfig& c) {
  json j = {{"levels", c.levels},           {"ants", c.ants}, {"generations", c.generations},
            {"evaporation", c.evaporation}, {"init_boost", c.init_boost}, {"elite", c.elite},
            {"seed", c.seed},               {"workers", c.workers}};
  j["half_width"] = c.range.half_width ? json(*c.range.half_width) : json(nullptr);
  return j;
}

inline void update(AcoConfig& c, const json& j) {
  for (const auto& [key, value] : j.items()) {
    if (key == "levels") c.levels = value.get<int>();
    else if (key == "ants") c.ants = value.get<int>();
    else if (key == "generations") c.generations = value.get<int>();
    else if (key == "evaporation") c.evaporation = value.get<double>();
    else if (key == "init_boost") c.init_boost = value.get<double>();
    else if (key == "elite") c.elite = value.get<int>();
    else if (key == "seed") c.seed = value.get<std::uint64_t>();
    else if (key == "workers") c.workers = value.get<unsigned>();
    else if (key == "half_width") c.range = value.is_null() ? SearchRange::global() : SearchRange::window(value.get<int>());
    else throw Error(ErrorCode::InvalidArgument, "unknown aco setting '" + key + "'");
  }
  c.validate();
}

inline json metric(const QualityMetric& m) {
  return {{"kind", std::string(to_string(m.kind))},
          {"grid_size", m.grid_size},
          {"sample_size", m.sample_size},
          {"seed", m.seed}};
}

inline void update(QualityMetric& m, const json& j) {
  if (j.is_string()) {
    m.kind = parse_metric_kind(j.get<std::string>());
    return;
  }
  for (const auto& [key, value] : j.items()) {
    if (key == "kind") m.kind = parse_metric_kind(value.get<std::string>());
    else if (key == "grid_size") m.grid_size = value.get<int>();
    else if (key == "sample_size") m.sample_size = value.get<std::size_t>();
    else if (key == "seed") m.seed = value.get<std::uint64_t>();
    else throw Error(ErrorCode::InvalidArgument, "unknown metric setting '" + key + "'");
  }
}

inline json tags(const PointTags& t) {
  std::vector<int> active(t.active.begin(), t.active.end());
  return {{"color", t.color}, {"active", active}};
}

inline PointTags tags_from(const json& j) {
  PointTags t;
  t.color = j.at("color").get<std::vector<int>>();
  for (int a : j.at("active").get<std::vector<int>>()) t.active.push_back(a != 0);
  if (t.color.size() != t.active.size()) throw Error(ErrorCode::ParseError, "tag arrays differ in length");
  return t;
}

inline json normalization(const Normalization& n) {
  return {{"mode", std::string(to_string(n.mode))}, {"min", vec(n.min)}, {"range", vec(n.range)}, {"mean", vec(n.mean)}};
}

inline Normalization normalization_from(const json& j) {
  Normalization n;
  n.mode = parse_normalization(j.at("mode").get<std::string>());
  n.min = vec_from(j.at("min"));
  n.range = vec_from(j.at("range"));
  n.mean = vec_from(j.at("mean"));
  return n;
}

inline json layout(const TrailMapLayout& l, std::span<const std::string> attribute_names) {
  json positions = json::array();
  for (const auto& [id, p] : l.positions) positions.push_back({{"view_id", id}, {"x", p.x()}, {"y", p.y()}});
  json labels = json::array();
  for (const auto& s : l.labels) {
    labels.push_back({{"dim", s.dim},
                      {"text", s.dim < attribute_names.size() ? attribute_names[s.dim] : std::to_string(s.dim)},
                      {"x", s.position.x()},
                      {"y", s.position.y()},
                      {"weight", s.weight}});
  }
  return {{"positions", positions}, {"labels", labels}, {"paths", l.paths}};
}

}  // namespace voyager::io
