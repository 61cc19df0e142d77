#pragma once

#include <Eigen/Dense>
#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "voyager/aco.hpp"
#include "voyager/dataset.hpp"
#include "voyager/label_layout.hpp"
#include "voyager/navigation.hpp"
#include "voyager/projection.hpp"
#include "voyager/serialize.hpp"
#include "voyager/subspace_gen.hpp"
#include "voyager/trail_map.hpp"
#include "voyager/view_quality.hpp"

namespace voyager {

inline constexpr const char* kSessionFormat = "voyager-session/1";

struct SessionConfig {
  ChaseConfig chase;
  AcoConfig aco;
  QualityMetric metric;
  OptimizeScope scope = OptimizeScope::narrow;
  double quantile = 0.9;        // membership residual quantile
  bool turn_off = false;        // hide non-members in the frame
  std::size_t max_labels = kDefaultMaxLabels;
  double small_view_size = 0.08;  // trail-map thumbnail diameter, fraction of the map
  double traverse_btw = 0.0;      // last path slider position
  int path_frames = KeyframePath::kDefaultFrames;
  std::uint64_t seed = 1;         // random subspaces and clustering
  std::vector<std::size_t> selected_dims;

  bool operator==(const SessionConfig&) const = default;
};

enum class InitialView { pca, identity, random };

inline InitialView parse_initial_view(std::string_view s) {
  if (s == "pca") return InitialView::pca;
  if (s == "identity") return InitialView::identity;
  if (s == "random") return InitialView::random;
  throw Error(ErrorCode::InvalidArgument, "unknown initial view '" + std::string(s) + "'");
}

/// Where the class labels for label-aware metrics come from.
enum class LabelSource { automatic, classes, clusters, tags };

/// One exploration session: the dataset, per-point tags, the current view,
/// saved views and paths, and configuration. All mutation goes through a
/// single caller; `request_cancel` is the only member safe to call from
/// another thread.
class Session {
 public:
  using json = nlohmann::json;
  using Emit = std::function<void(const json&)>;

  // --- typed interface ---------------------------------------------------

  void load(Dataset data, InitialView initial = InitialView::pca) {
    data_ = std::move(data);
    tags_ = PointTags::neutral(static_cast<std::size_t>(data_->size()));
    views_.clear();
    paths_.clear();
    clusters_.clear();
    active_path_.reset();
    next_view_id_ = 1;
    switch (initial) {
      case InitialView::pca: generate_pca(); break;
      case InitialView::identity: state_ = TrackballState::from_basis(ProjectionBasis::identity(dims(), active_mean())); break;
      case InitialView::random: generate_random(config_.seed); break;
    }
    ++version_;
  }

  bool loaded() const { return data_.has_value(); }
  const Dataset& dataset() const { return require_data(); }
  const PointTags& tags() const { return tags_; }
  const TrackballState& state() const { return state_; }
  const std::vector<SavedView>& views() const { return views_; }
  const std::vector<std::vector<ViewId>>& paths() const { return paths_; }
  const std::vector<SubspaceCluster>& clusters() const { return clusters_; }
  const SessionConfig& config() const { return config_; }
  SessionConfig& config() { return config_; }
  std::uint64_t version() const { return version_; }
  ViewId next_view_id() const { return next_view_id_; }

  void set_state(TrackballState s) {
    if (s.basis.dims() != dims()) throw Error(ErrorCode::InvalidArgument, "state dimension does not match the data");
    state_ = std::move(s);
    ++version_;
  }

  void request_cancel() { cancel_.store(true); }

  std::vector<std::size_t> active_ids() const { return tags_.active_ids(); }

  /// Normalized coordinates of the active points, in id order.
  PointMatrix active_points() const { return select_rows(require_data().normalized, active_ids()); }

  VecND active_mean() const {
    const PointMatrix pts = active_points();
    if (pts.rows() == 0) return VecND::Zero(dims());
    return pts.colwise().mean().transpose();
  }

  std::vector<int> labels_for(LabelSource source, std::span<const std::size_t> ids) const {
    const Dataset& d = require_data();
    if (source == LabelSource::automatic) {
      source = d.classes ? LabelSource::classes : !clusters_.empty() ? LabelSource::clusters : LabelSource::tags;
    }
    std::vector<int> all;
    switch (source) {
      case LabelSource::classes:
        if (!d.classes) throw Error(ErrorCode::MissingLabels, "dataset has no class column");
        all = *d.classes;
        break;
      case LabelSource::clusters:
        if (clusters_.empty()) throw Error(ErrorCode::MissingLabels, "no subspace clusters computed");
        all = cluster_labels(clusters_, static_cast<std::size_t>(d.size()));
        break;
      default: all = tags_.color; break;
    }
    return select(std::span<const int>(all), ids);
  }

  void generate_pca() {
    const PointMatrix pts = active_points();
    if (pts.rows() < 3) throw Error(ErrorCode::DegenerateData, "PCA needs at least 3 active points");
    const PcaResult p = pca(pts, 3);
    state_ = TrackballState::from_basis(make_basis(p.component(0), p.component(1), ThirdPc{p.component(2)}, p.mean));
  }

  void generate_random(std::uint64_t seed) {
    state_ = TrackballState::from_basis(random_subspace(dims(), seed, active_mean()));
  }

  /// k-means subspace clusters over the active points; members are painted
  /// with their cluster tag and the view moves to cluster `focus`.
  void generate_clusters(int k, std::uint64_t seed, std::size_t focus = 0) {
    const std::vector<std::size_t> ids = active_ids();
    std::vector<SubspaceCluster> found = kmeans_subspaces(select_rows(require_data().normalized, ids), k, seed);
    for (auto& c : found) {
      for (auto& m : c.member_ids) m = ids[m];
      for (auto m : c.member_ids) tags_.color[m] = c.color_tag;
    }
    clusters_ = std::move(found);
    focus_cluster(focus);
  }

  void focus_cluster(std::size_t index) {
    if (index >= clusters_.size()) throw Error(ErrorCode::NotFound, "no cluster " + std::to_string(index));
    state_ = TrackballState::from_basis(clusters_[index].basis);
  }

  void drag(const DragEvent& ev) {
    if (ev.from == ev.to) return;
    switch (ev.button) {
      case MouseButton::left: state_ = rotate(state_, drag_to_rotation(ev)); break;
      case MouseButton::right:
        try {
          state_ = chase(state_, ev, config_.chase);
        } catch (const Error& e) {
          if (e.code() != ErrorCode::NoAffectedDims) throw;
          return;
        }
        break;
      case MouseButton::middle: state_ = deep_adjust(state_, ev.to.y() - ev.from.y(), config_.chase.k_a); break;
    }
    ++version_;
  }

  void deep(double amount) {
    if (amount == 0.0) return;
    state_ = deep_adjust(state_, amount, config_.chase.k_a);
    ++version_;
  }

  void express(std::span<const std::size_t> dims_) {
    state_ = equal_express(state_, dims_);
    ++version_;
  }

  void align(std::size_t dim, const Eigen::Vector2d& target, double step) {
    state_ = align_attribute(state_, dim, target, step, config_.chase);
    ++version_;
  }

  OptimizeOutcome optimize(std::optional<MetricKind> kind, std::optional<OptimizeScope> scope, LabelSource source,
                           const std::function<void(int, double)>& progress = {}) {
    QualityMetric metric = config_.metric;
    if (kind) metric.kind = *kind;
    const std::vector<std::size_t> ids = active_ids();
    const PointMatrix pts = select_rows(require_data().normalized, ids);
    std::vector<int> labels;
    if (needs_labels(metric.kind)) labels = labels_for(source, ids);
    cancel_.store(false);
    AcoControl control{&cancel_, progress};
    OptimizeOutcome out = optimize_view(state_, pts, labels, metric, scope.value_or(config_.scope), config_.aco, control);
    if (!(out.state == state_)) {
      state_ = out.state;
      ++version_;
    }
    return out;
  }

  ViewId save_view(std::string name = {}, std::optional<std::int64_t> created_at = {}) {
    const ViewId id = next_view_id_++;
    if (name.empty()) name = "view " + std::to_string(id);
    const std::int64_t when = created_at.value_or(
        std::chrono::duration_cast<std::chrono::seconds>(std::chrono::system_clock::now().time_since_epoch()).count());
    views_.push_back(make_saved_view(state_, require_data().normalized, active_ids(), tags_.color, id, std::move(name), when));
    ++version_;
    return id;
  }

  const SavedView& view(ViewId id) const {
    const auto it = std::find_if(views_.begin(), views_.end(), [&](const SavedView& v) { return v.view_id == id; });
    if (it == views_.end()) throw Error(ErrorCode::NotFound, "no saved view " + std::to_string(id));
    return *it;
  }

  void restore_view(ViewId id) {
    state_ = view(id).state();
    active_path_.reset();
    ++version_;
  }

  std::size_t build_path(std::vector<ViewId> ids) {
    const KeyframePath path = make_path(ids);
    paths_.push_back(std::move(ids));
    active_path_ = paths_.size() - 1;
    path_key_ = 0;
    config_.traverse_btw = 0.0;
    state_ = path.at(0.0);
    ++version_;
    return *active_path_;
  }

  void path_t(double t, std::optional<std::size_t> index = {}) {
    if (index) select_path(*index);
    const KeyframePath path = current_path();
    state_ = path.at(t);
    config_.traverse_btw = t;
    path_key_ = keyframe_at_or_before(path, t);
    ++version_;
  }

  /// Jumps to the next keyframe, wrapping to the first after the last.
  /// Returns the animation frames for the transition (target last).
  std::vector<TrackballState> path_next() {
    const KeyframePath path = current_path();
    std::vector<TrackballState> frames;
    const std::size_t from = path_key_;
    if (from + 1 < path.size()) {
      frames = path.segment_frames(from, config_.path_frames);
      path_key_ = from + 1;
    } else {
      path_key_ = 0;
      frames.push_back(keyframe_state(path.keyframe(0)));
    }
    state_ = frames.back();
    config_.traverse_btw = arc_position(path, path_key_);
    ++version_;
    return frames;
  }

  void brush_points(std::span<const std::size_t> ids, const BrushAction& action) {
    tags_ = brush(std::move(tags_), ids, action);
    ++version_;
  }

  std::optional<std::size_t> active_path() const { return active_path_; }

  TrailMapLayout trail_map() const { return layout(views_, paths_); }

  // --- frames ------------------------------------------------------------

  /// Everything the UI draws for the current state. `dragging` places
  /// labels at their true angles without overlap removal.
  json frame(bool dragging = false) const {
    const Dataset& d = require_data();
    const ProjectedCloud cloud = project(state_, d.normalized);
    const auto n = static_cast<std::size_t>(d.size());

    std::vector<bool> member(n, false);
    const std::vector<std::size_t> ids = active_ids();
    if (!ids.empty()) {
      const std::vector<bool> m = membership(state_.basis, select_rows(d.normalized, ids), config_.quantile);
      for (std::size_t i = 0; i < ids.size(); ++i) member[ids[i]] = m[i];
    }

    json labels = json::array();
    const auto placements = resolve_overlaps(base_angles(state_), config_.max_labels, config_.selected_dims, !dragging);
    for (const auto& p : placements) {
      labels.push_back({{"dim", p.dim},
                        {"text", d.attributes[p.dim]},
                        {"angle", p.angle},
                        {"display_angle", p.display_angle},
                        {"strength", p.strength},
                        {"font_size", p.font_size},
                        {"opacity", p.opacity},
                        {"visible", p.visible}});
    }

    json f = {{"version", version_},
              {"n", n},
              {"dims", d.dims()},
              {"x", io::vec(cloud.xy.col(0))},
              {"y", io::vec(cloud.xy.col(1))},
              {"z", io::vec(cloud.z)},
              {"colors", tags_.color},
              {"active", std::vector<bool>(tags_.active)},
              {"member", member},
              {"turn_off", config_.turn_off},
              {"labels", labels},
              {"state", io::state(state_)}};
    if (active_path_) f["path"] = {{"index", *active_path_}, {"t", config_.traverse_btw}, {"keyframe", path_key_}};
    return f;
  }

  // --- persistence -------------------------------------------------------

  json to_json(bool embed_data = false) const {
    const Dataset& d = require_data();
    json ds = {{"name", d.name},
               {"source_path", d.source_path},
               {"class_column", d.class_column},
               {"normalization", io::normalization(d.normalization)}};
    if (embed_data || d.source_path.empty()) {
      ds["embedded"] = {{"attributes", d.attributes}, {"raw", io::mat(d.raw)}, {"class_names", d.class_names}};
      ds["embedded"]["classes"] = d.classes ? json(*d.classes) : json(nullptr);
    }
    json views = json::array();
    for (const auto& v : views_) views.push_back(io::saved_view(v));
    json clusters = json::array();
    for (const auto& c : clusters_) {
      clusters.push_back({{"member_ids", c.member_ids},
                          {"basis", io::basis(c.basis)},
                          {"centroid", io::vec(c.centroid)},
                          {"color_tag", c.color_tag}});
    }
    return {{"format", kSessionFormat},
            {"dataset", ds},
            {"state", io::state(state_)},
            {"tags", io::tags(tags_)},
            {"views", views},
            {"next_view_id", next_view_id_},
            {"paths", paths_},
            {"active_path", active_path_ ? json(*active_path_) : json(nullptr)},
            {"path_key", path_key_},
            {"clusters", clusters},
            {"config", config_json()},
            {"version", version_}};
  }

  static Session from_json(const json& j) {
    if (j.value("format", "") != kSessionFormat) {
      throw Error(ErrorCode::ParseError, "unsupported session format '" + j.value("format", "") + "'");
    }
    Session s;
    const json& ds = j.at("dataset");
    const Normalization norm = io::normalization_from(ds.at("normalization"));
    Dataset d;
    if (ds.contains("embedded")) {
      const json& e = ds["embedded"];
      d.attributes = e.at("attributes").get<std::vector<std::string>>();
      d.raw = io::mat_from(e.at("raw"));
      d.class_names = e.value("class_names", std::vector<std::string>{});
      if (!e.at("classes").is_null()) d.classes = e["classes"].get<std::vector<int>>();
      d.source_path = ds.value("source_path", "");
    } else {
      CsvOptions opt;
      opt.normalization = norm.mode;
      const std::string cls = ds.value("class_column", "");
      if (!cls.empty()) opt.class_column = cls;
      d = load_csv(ds.at("source_path").get<std::string>(), opt);
    }
    d.name = ds.value("name", d.name);
    d.class_column = ds.value("class_column", "");
    d.normalization = norm;
    if (d.raw.cols() != norm.min.size()) throw Error(ErrorCode::ParseError, "normalization does not match the data");
    d.normalized = norm.apply(d.raw);
    s.data_ = std::move(d);

    s.state_ = io::state_from(j.at("state"));
    s.tags_ = io::tags_from(j.at("tags"));
    if (s.tags_.size() != static_cast<std::size_t>(s.data_->size())) throw Error(ErrorCode::ParseError, "tags do not match the data");
    for (const auto& v : j.at("views")) s.views_.push_back(io::saved_view_from(v));
    s.next_view_id_ = j.at("next_view_id").get<ViewId>();
    s.paths_ = j.at("paths").get<std::vector<std::vector<ViewId>>>();
    if (!j.at("active_path").is_null()) s.active_path_ = j["active_path"].get<std::size_t>();
    s.path_key_ = j.value("path_key", std::size_t{0});
    for (const auto& c : j.value("clusters", json::array())) {
      SubspaceCluster cl;
      cl.member_ids = c.at("member_ids").get<std::vector<std::size_t>>();
      cl.basis = io::basis_from(c.at("basis"));
      cl.centroid = io::vec_from(c.at("centroid"));
      cl.color_tag = c.at("color_tag").get<int>();
      s.clusters_.push_back(std::move(cl));
    }
    s.apply_config(j.at("config"));
    s.version_ = j.value("version", std::uint64_t{0});
    return s;
  }

  void save_file(const std::string& path, bool embed_data = false) const {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::IoError, "cannot write '" + path + "'");
    out << to_json(embed_data).dump(2) << "\n";
    if (!out) throw Error(ErrorCode::IoError, "write to '" + path + "' failed");
  }

  static Session load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path + "'");
    json j;
    try {
      j = json::parse(in);
    } catch (const json::exception& e) {
      throw Error(ErrorCode::ParseError, std::string("session file: ") + e.what());
    }
    return from_json(j);
  }

  /// Every persisted numeric and structural field, compared exactly.
  bool same_persistent_state(const Session& o) const {
    if (data_.has_value() != o.data_.has_value()) return false;
    if (data_) {
      const Dataset &a = *data_, &b = *o.data_;
      if (a.attributes != b.attributes || a.raw != b.raw || a.normalized != b.normalized ||
          !(a.normalization == b.normalization) || a.classes != b.classes || a.class_names != b.class_names) {
        return false;
      }
    }
    if (clusters_.size() != o.clusters_.size()) return false;
    for (std::size_t i = 0; i < clusters_.size(); ++i) {
      const auto &a = clusters_[i], &b = o.clusters_[i];
      if (a.member_ids != b.member_ids || !(a.basis == b.basis) || a.centroid != b.centroid || a.color_tag != b.color_tag) return false;
    }
    return state_ == o.state_ && tags_ == o.tags_ && views_ == o.views_ && paths_ == o.paths_ &&
           active_path_ == o.active_path_ && path_key_ == o.path_key_ && next_view_id_ == o.next_view_id_ &&
           config_ == o.config_ && version_ == o.version_;
  }

  json config_json() const {
    return {{"chase", io::chase_config(config_.chase)},
            {"aco", io::aco_config(config_.aco)},
            {"metric", io::metric(config_.metric)},
            {"scope", std::string(to_string(config_.scope))},
            {"quantile", config_.quantile},
            {"turn_off", config_.turn_off},
            {"max_labels", config_.max_labels},
            {"small_view_size", config_.small_view_size},
            {"traverse_btw", config_.traverse_btw},
            {"path_frames", config_.path_frames},
            {"seed", config_.seed},
            {"selected_dims", config_.selected_dims}};
  }

  /// Applies a partial configuration; unknown keys are rejected before
  /// anything changes.
  void apply_config(const json& j) {
    if (!j.is_object()) throw Error(ErrorCode::InvalidArgument, "config must be an object");
    SessionConfig c = config_;
    for (const auto& [key, value] : j.items()) {
      if (key == "chase") io::update(c.chase, value);
      else if (key == "aco") io::update(c.aco, value);
      else if (key == "metric") io::update(c.metric, value);
      else if (key == "scope") c.scope = parse_optimize_scope(value.get<std::string>());
      else if (key == "quantile") c.quantile = value.get<double>();
      else if (key == "turn_off") c.turn_off = value.get<bool>();
      else if (key == "max_labels") c.max_labels = value.get<std::size_t>();
      else if (key == "small_view_size") c.small_view_size = value.get<double>();
      else if (key == "traverse_btw") c.traverse_btw = value.get<double>();
      else if (key == "path_frames") c.path_frames = value.get<int>();
      else if (key == "seed") c.seed = value.get<std::uint64_t>();
      else if (key == "selected_dims") c.selected_dims = value.get<std::vector<std::size_t>>();
      else throw Error(ErrorCode::InvalidArgument, "unknown config key '" + key + "'");
    }
    if (!(c.quantile > 0.0 && c.quantile <= 1.0)) throw Error(ErrorCode::InvalidArgument, "quantile must be in (0, 1]");
    if (c.path_frames < 1) throw Error(ErrorCode::InvalidArgument, "path_frames must be positive");
    if (!(c.small_view_size > 0.0 && c.small_view_size <= 1.0)) {
      throw Error(ErrorCode::InvalidArgument, "small_view_size must be in (0, 1]");
    }
    if (!(c.traverse_btw >= 0.0 && c.traverse_btw <= 1.0)) throw Error(ErrorCode::InvalidArgument, "traverse_btw must be in [0, 1]");
    config_ = std::move(c);
  }

  // --- protocol ----------------------------------------------------------

  /// Handles one request object and returns its response. Progress events
  /// for long operations go to `emit` before the response is returned.
  json handle(const json& request, const Emit& emit = {}) {
    json response = {{"ok", true}};
    if (request.is_object() && request.contains("id")) response["id"] = request["id"];
    try {
      if (!request.is_object() || !request.contains("op") || !request["op"].is_string()) {
        throw Error(ErrorCode::InvalidArgument, "request must be an object with a string 'op'");
      }
      dispatch(request["op"].get<std::string>(), request, response, emit);
    } catch (const Error& e) {
      return error_response(response, to_string(e.code()), e.detail());
    } catch (const json::exception& e) {
      return error_response(response, "InvalidArgument", std::string("malformed request: ") + e.what());
    } catch (const std::exception& e) {
      return error_response(response, "InternalError", e.what());
    }
    return response;
  }

  static json error_response(json base, std::string_view code, std::string_view message) {
    base["ok"] = false;
    base.erase("frame");
    base["error"] = {{"code", code}, {"message", message}};
    return base;
  }

 private:
  std::optional<Dataset> data_;
  PointTags tags_;
  TrackballState state_;
  std::vector<SavedView> views_;
  std::vector<std::vector<ViewId>> paths_;
  std::vector<SubspaceCluster> clusters_;
  std::optional<std::size_t> active_path_;
  std::size_t path_key_ = 0;
  SessionConfig config_;
  ViewId next_view_id_ = 1;
  std::uint64_t version_ = 0;
  std::atomic<bool> cancel_{false};

 public:
  Session() = default;
  Session(Session&& o) noexcept { *this = std::move(o); }
  Session& operator=(Session&& o) noexcept {
    data_ = std::move(o.data_);
    tags_ = std::move(o.tags_);
    state_ = std::move(o.state_);
    views_ = std::move(o.views_);
    paths_ = std::move(o.paths_);
    clusters_ = std::move(o.clusters_);
    active_path_ = o.active_path_;
    path_key_ = o.path_key_;
    config_ = std::move(o.config_);
    next_view_id_ = o.next_view_id_;
    version_ = o.version_;
    cancel_.store(false);
    return *this;
  }

 private:
  const Dataset& require_data() const {
    if (!data_) throw Error(ErrorCode::InvalidArgument, "no dataset loaded");
    return *data_;
  }

  Eigen::Index dims() const { return require_data().dims(); }

  KeyframePath make_path(std::span<const ViewId> ids) const {
    std::vector<SavedView> keys;
    for (auto id : ids) keys.push_back(view(id));
    return KeyframePath(std::move(keys));
  }

  void select_path(std::size_t index) {
    if (index >= paths_.size()) throw Error(ErrorCode::NotFound, "no path " + std::to_string(index));
    if (active_path_ != index) path_key_ = 0;
    active_path_ = index;
  }

  KeyframePath current_path() const {
    if (!active_path_) throw Error(ErrorCode::NotFound, "no active path; call build_path first");
    return make_path(paths_[*active_path_]);
  }

  static double arc_position(const KeyframePath& path, std::size_t key) {
    if (path.total_length() <= 0.0) return 0.0;
    double s = 0.0;
    for (std::size_t i = 0; i < key; ++i) s += geodesic_length(path.keyframe(i), path.keyframe(i + 1));
    return std::clamp(s / path.total_length(), 0.0, 1.0);
  }

  static std::size_t keyframe_at_or_before(const KeyframePath& path, double t) {
    std::size_t key = 0;
    for (std::size_t i = 1; i < path.size(); ++i) {
      if (arc_position(path, i) <= t) key = i;
    }
    return key;
  }

  static DragEvent drag_from(const json& r) {
    DragEvent ev;
    const std::string button = r.value("button", "left");
    if (button == "left") ev.button = MouseButton::left;
    else if (button == "right") ev.button = MouseButton::right;
    else if (button == "middle") ev.button = MouseButton::middle;
    else throw Error(ErrorCode::InvalidArgument, "unknown button '" + button + "'");
    const auto from = r.at("from").get<std::vector<double>>();
    const auto to = r.at("to").get<std::vector<double>>();
    if (from.size() != 2 || to.size() != 2) throw Error(ErrorCode::InvalidArgument, "from/to must be [x, y]");
    ev.from = {from[0], from[1]};
    ev.to = {to[0], to[1]};
    if (r.contains("pinned_dim") && !r["pinned_dim"].is_null()) ev.pinned_dim = r["pinned_dim"].get<std::size_t>();
    return ev;
  }

  static LabelSource label_source(const json& r) {
    const std::string s = r.value("labels", "auto");
    if (s == "auto") return LabelSource::automatic;
    if (s == "classes") return LabelSource::classes;
    if (s == "clusters") return LabelSource::clusters;
    if (s == "tags") return LabelSource::tags;
    throw Error(ErrorCode::InvalidArgument, "unknown label source '" + s + "'");
  }

  json view_summary(const SavedView& v) const {
    return {{"view_id", v.view_id}, {"name", v.name}, {"created_at", v.created_at}, {"thumbnail", io::thumbnail(v.thumbnail)}};
  }

  void load_request(const json& r) {
    const NormalizationMode mode = parse_normalization(r.value("normalization", "minmax"));
    Dataset d;
    if (r.contains("fixture")) {
      const json& f = r["fixture"];
      const std::string kind = f.at("kind").get<std::string>();
      if (kind == "tube-stick") {
        TubeStickOptions o;
        o.seed = f.value("seed", o.seed);
        o.dims = f.value("dims", o.dims);
        o.n_tube = f.value("n_tube", o.n_tube);
        o.n_stick = f.value("n_stick", o.n_stick);
        o.axis_aligned = f.value("axis_aligned", false);
        d = gen_tube_stick(o).data;
      } else if (kind == "three-clusters") {
        ThreeClusterOptions o;
        o.seed = f.value("seed", o.seed);
        o.dims = f.value("dims", o.dims);
        o.n_per = f.value("n_per", o.n_per);
        d = gen_three_clusters(o).data;
      } else {
        throw Error(ErrorCode::InvalidArgument, "unknown fixture '" + kind + "'");
      }
      if (mode != d.normalization.mode) d.renormalize(mode);
    } else {
      CsvOptions opt;
      opt.normalization = mode;
      if (r.contains("class_column") && !r["class_column"].is_null()) opt.class_column = r["class_column"].get<std::string>();
      if (r.contains("csv")) {
        std::istringstream in(r["csv"].get<std::string>());
        d = parse_csv(in, opt, r.value("name", "inline"));
      } else {
        d = load_csv(r.at("path").get<std::string>(), opt);
      }
    }
    if (r.contains("seed")) config_.seed = r["seed"].get<std::uint64_t>();
    load(std::move(d), parse_initial_view(r.value("initial", "pca")));
  }

  void dispatch(const std::string& op, const json& r, json& response, const Emit& emit) {
    if (op == "load_data") {
      load_request(r);
      response["warnings"] = data_->warnings;
      response["rejected_rows"] = data_->rejected_rows;
      response["attributes"] = data_->attributes;
      response["frame"] = frame();
    } else if (op == "get_frame") {
      response["frame"] = frame(r.value("dragging", false));
    } else if (op == "drag") {
      const std::uint64_t before = version_;
      drag(drag_from(r));
      response["applied"] = version_ != before;
      response["frame"] = frame(!r.value("final", true));
    } else if (op == "deep") {
      deep(r.at("amount").get<double>());
      response["frame"] = frame();
    } else if (op == "equal_express") {
      const auto dims_ = r.contains("dims") ? r["dims"].get<std::vector<std::size_t>>() : config_.selected_dims;
      express(dims_);
      response["frame"] = frame();
    } else if (op == "align") {
      const auto target = r.at("target").get<std::vector<double>>();
      if (target.size() != 2) throw Error(ErrorCode::InvalidArgument, "target must be [x, y]");
      align(r.at("dim").get<std::size_t>(), {target[0], target[1]}, r.value("step", 1.0));
      response["frame"] = frame();
    } else if (op == "select_dims") {
      apply_config({{"selected_dims", r.at("dims")}});
      ++version_;
      response["frame"] = frame();
    } else if (op == "generate") {
      const std::string method = r.value("method", "pca");
      if (method == "pca") generate_pca();
      else if (method == "random") generate_random(r.value("seed", config_.seed));
      else if (method == "clusters") generate_clusters(r.at("k").get<int>(), r.value("seed", config_.seed), r.value("focus", std::size_t{0}));
      else if (method == "cluster") focus_cluster(r.at("index").get<std::size_t>());
      else throw Error(ErrorCode::InvalidArgument, "unknown generate method '" + method + "'");
      active_path_.reset();
      ++version_;
      response["frame"] = frame();
    } else if (op == "optimize") {
      std::optional<MetricKind> kind;
      if (r.contains("metric")) kind = parse_metric_kind(r["metric"].get<std::string>());
      std::optional<OptimizeScope> scope;
      if (r.contains("scope")) scope = parse_optimize_scope(r["scope"].get<std::string>());
      std::vector<double> trace;
      auto progress = [&](int generation, double best) {
        trace.push_back(best);
        if (!emit) return;
        json ev = {{"event", "progress"}, {"op", "optimize"}, {"generation", generation},
                   {"best_score", io::real(best)}, {"trace", trace}};
        if (r.contains("id")) ev["id"] = r["id"];
        emit(ev);
      };
      const OptimizeOutcome out = optimize(kind, scope, label_source(r), progress);
      json tr = json::array();
      for (double v : out.trace) tr.push_back(io::real(v));
      response["score"] = io::real(out.score);
      response["incoming_score"] = io::real(out.incoming_score);
      response["trace"] = tr;
      response["cancelled"] = out.cancelled;
      response["frame"] = frame();
    } else if (op == "save_view") {
      const ViewId id = save_view(r.value("name", ""));
      response["view_id"] = id;
      response["view"] = view_summary(view(id));
      response["frame"] = frame();
    } else if (op == "list_views") {
      json list = json::array();
      for (const auto& v : views_) list.push_back(view_summary(v));
      response["views"] = list;
      response["small_view_size"] = config_.small_view_size;
      if (!views_.empty()) response["stm"] = io::layout(trail_map(), data_->attributes);
    } else if (op == "restore_view") {
      restore_view(r.at("id").get<ViewId>());
      response["frame"] = frame();
    } else if (op == "build_path") {
      response["path_index"] = build_path(r.at("ids").get<std::vector<ViewId>>());
      response["length"] = current_path().total_length();
      response["frame"] = frame();
    } else if (op == "path_t") {
      std::optional<std::size_t> index;
      if (r.contains("path")) index = r["path"].get<std::size_t>();
      path_t(r.at("t").get<double>(), index);
      response["frame"] = frame();
    } else if (op == "path_next") {
      const auto frames = path_next();
      json states = json::array();
      for (const auto& s : frames) states.push_back(io::state(s));
      response["transition"] = states;
      response["frame"] = frame();
    } else if (op == "brush") {
      const std::string action = r.at("action").get<std::string>();
      BrushAction a;
      if (action == "color") a = BrushAction::paint(r.at("color").get<int>());
      else if (action == "deactivate") a = BrushAction::deactivate();
      else if (action == "reactivate") a = BrushAction::reactivate();
      else throw Error(ErrorCode::InvalidArgument, "unknown brush action '" + action + "'");
      brush_points(r.at("ids").get<std::vector<std::size_t>>(), a);
      response["frame"] = frame();
    } else if (op == "set_config") {
      apply_config(r.at("config"));
      ++version_;
      response["config"] = config_json();
      if (data_) response["frame"] = frame();
    } else if (op == "get_config") {
      response["config"] = config_json();
    } else if (op == "save_session") {
      const std::string path = r.at("path").get<std::string>();
      save_file(path, r.value("embed_data", false));
      response["path"] = path;
    } else if (op == "load_session") {
      *this = load_file(r.at("path").get<std::string>());
      response["frame"] = frame();
    } else if (op == "cancel") {
      request_cancel();
      response["cancelled"] = true;
    } else {
      throw Error(ErrorCode::UnknownOp, "unknown op '" + op + "'");
    }
  }
};

}  // namespace voyager
