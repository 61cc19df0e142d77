#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "voyager/core_math.hpp"

namespace voyager {

enum class NormalizationMode { minmax, center };

inline std::string_view to_string(NormalizationMode m) { return m == NormalizationMode::minmax ? "minmax" : "center"; }

inline NormalizationMode parse_normalization(std::string_view s) {
  if (s == "minmax") return NormalizationMode::minmax;
  if (s == "center") return NormalizationMode::center;
  throw Error(ErrorCode::InvalidArgument, "unknown normalization '" + std::string(s) + "'");
}

/// Per-attribute min-max scaling to [0, 1] followed by mean-centering, or
/// mean-centering alone. Constant attributes map to zero.
struct Normalization {
  NormalizationMode mode = NormalizationMode::minmax;
  VecND min, range, mean;

  static Normalization fit(const Eigen::MatrixXd& raw, NormalizationMode mode) {
    Normalization n;
    n.mode = mode;
    const Eigen::Index dims = raw.cols();
    if (mode == NormalizationMode::minmax) {
      n.min = raw.colwise().minCoeff().transpose();
      n.range = (raw.colwise().maxCoeff().transpose() - n.min);
    } else {
      n.min = VecND::Zero(dims);
      n.range = VecND::Ones(dims);
    }
    n.mean = VecND::Zero(dims);
    n.mean = scaled(n, raw).colwise().mean().transpose();
    return n;
  }

  Eigen::MatrixXd apply(const Eigen::MatrixXd& raw) const { return scaled(*this, raw).rowwise() - mean.transpose(); }

  bool operator==(const Normalization&) const = default;

 private:
  static Eigen::MatrixXd scaled(const Normalization& n, const Eigen::MatrixXd& raw) {
    Eigen::MatrixXd out = raw.rowwise() - n.min.transpose();
    for (Eigen::Index k = 0; k < raw.cols(); ++k) {
      if (n.range(k) > 0.0) out.col(k) /= n.range(k);
      else out.col(k).setZero();
    }
    return out;
  }
};

struct Dataset {
  std::string name;
  std::string source_path;  // empty for generated data
  std::vector<std::string> attributes;
  Eigen::MatrixXd raw;
  Eigen::MatrixXd normalized;
  Normalization normalization;
  std::optional<std::vector<int>> classes;
  std::string class_column;
  std::vector<std::string> class_names;
  std::vector<std::string> warnings;
  std::vector<std::size_t> rejected_rows;  // 1-based file lines with missing values

  Eigen::Index size() const { return raw.rows(); }
  Eigen::Index dims() const { return raw.cols(); }

  static Dataset from_matrix(std::string name, std::vector<std::string> attributes, Eigen::MatrixXd raw,
                             NormalizationMode mode = NormalizationMode::minmax) {
    if (raw.cols() < 3) throw Error(ErrorCode::TooFewDims, "need at least 3 numeric attributes");
    if (raw.rows() < 3) throw Error(ErrorCode::InvalidArgument, "need at least 3 rows");
    if (!raw.allFinite()) throw Error(ErrorCode::InvalidArgument, "data contain non-finite values");
    Dataset d;
    d.name = std::move(name);
    d.attributes = std::move(attributes);
    d.raw = std::move(raw);
    d.renormalize(mode);
    return d;
  }

  void renormalize(NormalizationMode mode) {
    normalization = Normalization::fit(raw, mode);
    normalized = normalization.apply(raw);
    warnings.erase(std::remove_if(warnings.begin(), warnings.end(),
                                  [](const std::string& w) { return w.find("constant") != std::string::npos; }),
                   warnings.end());
    for (Eigen::Index k = 0; k < raw.cols(); ++k) {
      if (mode == NormalizationMode::minmax && !(normalization.range(k) > 0.0)) {
        warnings.push_back("attribute '" + attributes[static_cast<std::size_t>(k)] +
                           "' is constant; normalized to zero");
      }
    }
  }
};

struct CsvOptions {
  std::optional<std::string> class_column;
  NormalizationMode normalization = NormalizationMode::minmax;
};

namespace detail {

inline std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(std::move(cur));
  return out;
}

inline std::string trim(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

inline std::optional<double> parse_number(const std::string& cell) {
  double v = 0;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  if (first != last && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc{} || ptr != last || !std::isfinite(v)) return std::nullopt;
  return v;
}

}  // namespace detail

/// Reads a comma-separated table whose first row names the attributes.
/// Rows with empty cells are skipped and reported; any other non-numeric
/// cell outside the class column is a ParseError naming row and column.
inline Dataset parse_csv(std::istream& in, const CsvOptions& options = {}, std::string name = "data") {
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::ParseError, "empty input: missing header row");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
  std::vector<std::string> header = detail::split_csv_line(line);
  for (auto& h : header) h = detail::trim(h);

  std::optional<std::size_t> class_idx;
  if (options.class_column) {
    const auto it = std::find(header.begin(), header.end(), *options.class_column);
    if (it == header.end()) throw Error(ErrorCode::ParseError, "class column '" + *options.class_column + "' not found");
    class_idx = static_cast<std::size_t>(it - header.begin());
  }

  Dataset d;
  d.name = std::move(name);
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (c != class_idx) d.attributes.push_back(header[c]);
  }
  if (d.attributes.size() < 3) throw Error(ErrorCode::TooFewDims, "need at least 3 numeric attributes");

  std::vector<std::vector<double>> rows;
  std::vector<int> classes;
  std::map<std::string, int> class_ids;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (detail::trim(line).empty()) continue;
    const std::vector<std::string> cells = detail::split_csv_line(line);
    if (cells.size() != header.size()) {
      throw Error(ErrorCode::ParseError, "row " + std::to_string(line_no) + ": expected " +
                                             std::to_string(header.size()) + " fields, found " +
                                             std::to_string(cells.size()));
    }
    std::vector<double> values;
    bool missing = false;
    int cls = 0;
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const std::string cell = detail::trim(cells[c]);
      if (c == class_idx) {
        if (cell.empty()) {
          missing = true;
          continue;
        }
        auto [it, inserted] = class_ids.try_emplace(cell, static_cast<int>(class_ids.size()));
        if (inserted) d.class_names.push_back(cell);
        cls = it->second;
        continue;
      }
      if (cell.empty()) {
        missing = true;
        continue;
      }
      const auto v = detail::parse_number(cell);
      if (!v) {
        throw Error(ErrorCode::ParseError, "row " + std::to_string(line_no) + ", column " + std::to_string(c + 1) +
                                               " ('" + header[c] + "'): '" + cell + "' is not a number");
      }
      values.push_back(*v);
    }
    if (missing) {
      d.rejected_rows.push_back(line_no);
      continue;
    }
    rows.push_back(std::move(values));
    if (class_idx) classes.push_back(cls);
  }
  if (!d.rejected_rows.empty()) {
    d.warnings.push_back(std::to_string(d.rejected_rows.size()) + " row(s) with missing values rejected");
  }
  if (rows.size() < 3) throw Error(ErrorCode::InvalidArgument, "need at least 3 complete rows");

  d.raw.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(d.attributes.size()));
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < rows[r].size(); ++c) d.raw(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
  if (class_idx) {
    d.classes = std::move(classes);
    d.class_column = *options.class_column;
  }
  d.renormalize(options.normalization);
  return d;
}

inline Dataset load_csv(const std::string& path, const CsvOptions& options = {}) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path + "'");
  std::string name = path.substr(path.find_last_of('/') == std::string::npos ? 0 : path.find_last_of('/') + 1);
  Dataset d = parse_csv(in, options, name);
  d.source_path = path;
  return d;
}

/// Round-trippable decimal rendering (17 significant digits).
inline std::string format_real(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

/// Writes the raw values with the class column (if any) appended last.
inline void write_csv(std::ostream& out, const Dataset& d) {
  for (std::size_t c = 0; c < d.attributes.size(); ++c) out << (c ? "," : "") << d.attributes[c];
  if (d.classes) out << "," << (d.class_column.empty() ? "class" : d.class_column);
  out << "\n";
  for (Eigen::Index r = 0; r < d.raw.rows(); ++r) {
    for (Eigen::Index c = 0; c < d.raw.cols(); ++c) out << (c ? "," : "") << format_real(d.raw(r, c));
    if (d.classes) {
      const int id = (*d.classes)[static_cast<std::size_t>(r)];
      out << "," << (static_cast<std::size_t>(id) < d.class_names.size() ? d.class_names[static_cast<std::size_t>(id)]
                                                                        : std::to_string(id));
    }
    out << "\n";
  }
}

// --- tagging ---------------------------------------------------------------

struct PointTags {
  std::vector<int> color;     // palette index, 0 = neutral
  std::vector<bool> active;   // false: grayed out and excluded from analysis

  static PointTags neutral(std::size_t n) { return {std::vector<int>(n, 0), std::vector<bool>(n, true)}; }
  std::size_t size() const { return color.size(); }

  std::vector<std::size_t> active_ids() const {
    std::vector<std::size_t> ids;
    for (std::size_t i = 0; i < active.size(); ++i)
      if (active[i]) ids.push_back(i);
    return ids;
  }

  bool operator==(const PointTags&) const = default;
};

struct BrushAction {
  enum class Kind { color, deactivate, reactivate } kind = Kind::color;
  int color = 0;

  static BrushAction paint(int c) { return {Kind::color, c}; }
  static BrushAction deactivate() { return {Kind::deactivate, 0}; }
  static BrushAction reactivate() { return {Kind::reactivate, 0}; }
};

inline PointTags brush(PointTags tags, std::span<const std::size_t> ids, const BrushAction& action) {
  for (auto id : ids) {
    if (id >= tags.size()) throw Error(ErrorCode::InvalidArgument, "point id " + std::to_string(id) + " out of range");
  }
  for (auto id : ids) {
    switch (action.kind) {
      case BrushAction::Kind::color: tags.color[id] = action.color; break;
      case BrushAction::Kind::deactivate: tags.active[id] = false; break;
      case BrushAction::Kind::reactivate: tags.active[id] = true; break;
    }
  }
  return tags;
}

inline PointMatrix select_rows(const PointMatrix& m, std::span<const std::size_t> ids) {
  PointMatrix out(static_cast<Eigen::Index>(ids.size()), m.cols());
  for (std::size_t i = 0; i < ids.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = m.row(static_cast<Eigen::Index>(ids[i]));
  return out;
}

template <class T>
std::vector<T> select(std::span<const T> v, std::span<const std::size_t> ids) {
  std::vector<T> out;
  out.reserve(ids.size());
  for (auto id : ids) out.push_back(v[id]);
  return out;
}

// --- synthetic fixtures ----------------------------------------------------

struct TubeStickOptions {
  std::size_t n_tube = 900;
  std::size_t n_stick = 100;
  Eigen::Index dims = 6;
  std::uint64_t seed = 7;
  bool axis_aligned = false;  // skip the random rotation and use the first three axes
};

struct TubeStick {
  Dataset data;          // class column "part": 0 = tube, 1 = stick
  VecND axis;            // tube axis direction in raw N-D coordinates
  Eigen::MatrixXd frame; // N x 3: construction frame (columns x, y, axis) in raw coordinates
};

namespace detail {

inline Eigen::Matrix3d random_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  Eigen::Quaterniond q(normal(rng), normal(rng), normal(rng), normal(rng));
  return q.normalized().toRotationMatrix();
}

inline Eigen::MatrixXd random_injection(std::mt19937_64& rng, Eigen::Index dims) {
  std::normal_distribution<double> normal;
  std::vector<VecND> cols;
  while (cols.size() < 3) {
    VecND v(dims);
    for (auto& c : v) c = normal(rng);
    try {
      cols.push_back(gram_schmidt(std::span<const VecND>(cols), v));
    } catch (const Error&) {
    }
  }
  Eigen::MatrixXd q(dims, 3);
  for (int i = 0; i < 3; ++i) q.col(i) = cols[static_cast<std::size_t>(i)];
  return q;
}

// Largest share of a unit direction captured by any pair of coordinate axes.
inline double best_axis_pair_share(const VecND& dir) {
  std::vector<double> sq(dir.size());
  for (Eigen::Index k = 0; k < dir.size(); ++k) sq[static_cast<std::size_t>(k)] = dir(k) * dir(k);
  std::sort(sq.rbegin(), sq.rend());
  return sq[0] + (sq.size() > 1 ? sq[1] : 0.0);
}

}  // namespace detail

/// Hollow cylinder shell (radius 1, half-length 2, radial noise 0.05) with a
/// stick along its axis (radial noise 0.02), rotated off the coordinate axes
/// and injected into N dimensions with 0.01 isotropic noise.
inline TubeStick gen_tube_stick(const TubeStickOptions& opt = {}) {
  if (opt.dims < 3) throw Error(ErrorCode::TooFewDims, "tube-and-stick needs N >= 3");
  std::mt19937_64 rng(opt.seed);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
  std::uniform_real_distribution<double> height(-2.0, 2.0);
  std::normal_distribution<double> tube_noise(0.0, 0.05), stick_noise(0.0, 0.02), embed_noise(0.0, 0.01);

  const auto n = static_cast<Eigen::Index>(opt.n_tube + opt.n_stick);
  Eigen::MatrixXd local(n, 3);
  std::vector<int> part(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    const bool stick = i >= static_cast<Eigen::Index>(opt.n_tube);
    if (stick) {
      local.row(i) << stick_noise(rng), stick_noise(rng), height(rng);
    } else {
      const double a = angle(rng);
      const double r = 1.0 + tube_noise(rng);
      local.row(i) << r * std::cos(a), r * std::sin(a), height(rng);
    }
    part[static_cast<std::size_t>(i)] = stick ? 1 : 0;
  }

  Eigen::MatrixXd frame(opt.dims, 3);
  if (opt.axis_aligned) {
    frame.setZero();
    frame.topLeftCorner(3, 3).setIdentity();
  } else {
    for (int attempt = 0;; ++attempt) {
      const Eigen::Matrix3d rot = detail::random_rotation(rng);
      const Eigen::MatrixXd inject = opt.dims == 3 ? Eigen::MatrixXd::Identity(3, 3) : detail::random_injection(rng, opt.dims);
      frame = inject * rot;
      if (detail::best_axis_pair_share(frame.col(2)) < 0.8 || attempt > 1000) break;
    }
  }

  TubeStick out;
  Eigen::MatrixXd raw = local * frame.transpose();
  for (Eigen::Index i = 0; i < raw.rows(); ++i)
    for (Eigen::Index k = 0; k < raw.cols(); ++k) raw(i, k) += embed_noise(rng);
  std::vector<std::string> names;
  for (Eigen::Index k = 0; k < opt.dims; ++k) names.push_back("d" + std::to_string(k));
  out.data = Dataset::from_matrix("tube-stick", std::move(names), std::move(raw));
  out.data.classes = std::move(part);
  out.data.class_column = "part";
  out.data.class_names = {"tube", "stick"};
  out.axis = frame.col(2);
  out.frame = frame;
  return out;
}

struct ThreeClusterOptions {
  std::size_t n_per = 200;
  Eigen::Index dims = 10;
  std::uint64_t seed = 11;
  double stretch = 4.0;      // std-dev along a cluster's own subset
  double separation = 24.0;  // distance of each mean from the origin
};

struct ThreeClusters {
  Dataset data;  // class column "cluster": 0, 1, 2
  std::vector<std::vector<Eigen::Index>> stretched;  // per-cluster dimension subsets
};

/// Three Gaussians, each stretched along its own 3-dimension subset. Means
/// sit on a circle spanning the last dimension and the first dimension of the
/// next cluster's subset, so each cluster's own principal plane shows the
/// others only partly separated.
inline ThreeClusters gen_three_clusters(const ThreeClusterOptions& opt = {}) {
  if (opt.dims < 4) throw Error(ErrorCode::TooFewDims, "three-cluster fixture needs N >= 4");
  std::mt19937_64 rng(opt.seed);
  std::normal_distribution<double> normal;
  const Eigen::Index pool = opt.dims - 1;
  ThreeClusters out;
  for (int c = 0; c < 3; ++c) {
    std::vector<Eigen::Index> s;
    for (int j = 0; j < 3; ++j) s.push_back((3 * c + j) % pool);
    out.stretched.push_back(std::move(s));
  }
  const auto n = static_cast<Eigen::Index>(3 * opt.n_per);
  Eigen::MatrixXd raw(n, opt.dims);
  std::vector<int> labels(static_cast<std::size_t>(n));
  for (int c = 0; c < 3; ++c) {
    VecND sd = VecND::Ones(opt.dims);
    for (auto k : out.stretched[static_cast<std::size_t>(c)]) sd(k) = opt.stretch;
    VecND mu = VecND::Zero(opt.dims);
    const double a = 2.0 * std::numbers::pi * c / 3.0;
    mu(opt.dims - 1) += opt.separation * std::cos(a);
    mu(out.stretched[static_cast<std::size_t>((c + 1) % 3)][0]) += opt.separation * std::sin(a);
    for (std::size_t i = 0; i < opt.n_per; ++i) {
      const auto row = static_cast<Eigen::Index>(c * static_cast<int>(opt.n_per) + static_cast<int>(i));
      for (Eigen::Index k = 0; k < opt.dims; ++k) raw(row, k) = mu(k) + sd(k) * normal(rng);
      labels[static_cast<std::size_t>(row)] = c;
    }
  }
  std::vector<std::string> names;
  for (Eigen::Index k = 0; k < opt.dims; ++k) names.push_back("a" + std::to_string(k));
  out.data = Dataset::from_matrix("three-clusters", std::move(names), std::move(raw));
  out.data.classes = std::move(labels);
  out.data.class_column = "cluster";
  out.data.class_names = {"c0", "c1", "c2"};
  return out;
}

}  // namespace voyager
