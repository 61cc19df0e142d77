#pragma once

// Grid-based ant-colony projection pursuit. The 2N weights of PPA-x and PPA-y
// are each discretized to L levels over [-1, 1]; ants pick one level per
// weight with probability proportional to pheromone, candidates are
// normalized and Gram-Schmidt'd, scored, and the elite reinforce their
// levels.

#include <Eigen/Dense>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <thread>
#include <utility>
#include <vector>

#include "voyager/projection.hpp"
#include "voyager/view_quality.hpp"

namespace voyager {

struct SearchRange {
  std::optional<int> half_width;  // nullopt: the whole grid

  static SearchRange global() { return {}; }
  static SearchRange window(int half_width) { return {half_width}; }
  bool operator==(const SearchRange&) const = default;
};

struct AcoConfig {
  int levels = 21;
  int ants = 24;
  int generations = 60;
  double evaporation = 0.1;
  double init_boost = 5.0;
  int elite = 4;
  SearchRange range = SearchRange::global();
  std::uint64_t seed = 1;
  unsigned workers = 0;  // 0: hardware concurrency

  bool operator==(const AcoConfig&) const = default;

  void validate() const {
    if (levels < 3) throw Error(ErrorCode::InvalidArgument, "ACO needs at least 3 levels per parameter");
    if (ants < 1 || elite < 0 || elite > ants) throw Error(ErrorCode::InvalidArgument, "ACO elite must not exceed ants");
    if (generations < 0) throw Error(ErrorCode::InvalidArgument, "ACO generations must be non-negative");
    if (!(evaporation > 0.0 && evaporation < 1.0)) throw Error(ErrorCode::InvalidArgument, "evaporation must be in (0, 1)");
    if (!(init_boost > 0.0)) throw Error(ErrorCode::InvalidArgument, "init_boost must be positive");
    if (range.half_width && *range.half_width < 0) throw Error(ErrorCode::InvalidArgument, "window must be non-negative");
  }
};

inline constexpr double kPheromoneFloor = 1e-12;
inline constexpr double kBasePheromone = 1.0;

struct AcoState {
  Eigen::MatrixXd pheromone;   // 2N x L
  Eigen::VectorXd level_values;
  std::vector<int> lo, hi;     // sampleable level window per parameter, inclusive
  std::vector<int> initial_levels;
  std::vector<int> best_levels;
  double best_score = kWorstScore;

  Eigen::Index parameters() const { return pheromone.rows(); }

  int sampleable_levels(Eigen::Index p) const { return hi[static_cast<std::size_t>(p)] - lo[static_cast<std::size_t>(p)] + 1; }

  std::vector<int> argmax_levels() const {
    std::vector<int> out(static_cast<std::size_t>(parameters()));
    for (Eigen::Index p = 0; p < parameters(); ++p) {
      const auto ps = static_cast<std::size_t>(p);
      int arg = lo[ps];
      for (int l = lo[ps]; l <= hi[ps]; ++l) {
        if (pheromone(p, l) > pheromone(p, arg)) arg = l;
      }
      out[ps] = arg;
    }
    return out;
  }
};

inline Eigen::VectorXd level_grid(int levels) { return Eigen::VectorXd::LinSpaced(levels, -1.0, 1.0); }

inline int nearest_level(double w, int levels) {
  const double step = 2.0 / (levels - 1);
  return std::clamp(static_cast<int>(std::lround((w + 1.0) / step)), 0, levels - 1);
}

inline AcoState init_pheromone(const VecND& initial_x, const VecND& initial_y, const AcoConfig& cfg) {
  cfg.validate();
  const Eigen::Index n = initial_x.size();
  AcoState st;
  st.level_values = level_grid(cfg.levels);
  st.pheromone = Eigen::MatrixXd::Constant(2 * n, cfg.levels, kBasePheromone);
  st.lo.resize(static_cast<std::size_t>(2 * n));
  st.hi.resize(static_cast<std::size_t>(2 * n));
  st.initial_levels.resize(static_cast<std::size_t>(2 * n));
  for (Eigen::Index p = 0; p < 2 * n; ++p) {
    const auto ps = static_cast<std::size_t>(p);
    const double w = p < n ? initial_x(p) : initial_y(p - n);
    const int lvl = nearest_level(w, cfg.levels);
    st.initial_levels[ps] = lvl;
    st.pheromone(p, lvl) = kBasePheromone * (1.0 + cfg.init_boost);
    if (cfg.range.half_width) {
      st.lo[ps] = std::max(0, lvl - *cfg.range.half_width);
      st.hi[ps] = std::min(cfg.levels - 1, lvl + *cfg.range.half_width);
    } else {
      st.lo[ps] = 0;
      st.hi[ps] = cfg.levels - 1;
    }
  }
  return st;
}

/// Turns sampled levels into an orthonormal (x, y) pair; nullopt when the
/// sample is degenerate.
inline std::optional<std::pair<VecND, VecND>> view_from_levels(std::span<const int> levels,
                                                               const Eigen::VectorXd& level_values) {
  const auto n = static_cast<Eigen::Index>(levels.size() / 2);
  VecND x(n), y(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    x(k) = level_values(levels[static_cast<std::size_t>(k)]);
    y(k) = level_values(levels[static_cast<std::size_t>(n + k)]);
  }
  const double nx = x.norm();
  if (!(nx >= kDegenerateNorm)) return std::nullopt;
  x /= nx;
  try {
    const VecND fixed[] = {x};
    return std::pair{x, gram_schmidt(fixed, y)};
  } catch (const Error&) {
    return std::nullopt;
  }
}

struct AcoControl {
  const std::atomic<bool>* cancel = nullptr;
  std::function<void(int generation, double best_score)> progress;
};

struct AcoResult {
  VecND x, y;
  double score = kWorstScore;
  std::vector<double> trace;  // best-so-far score after each generation
  AcoState state;
  bool cancelled = false;
};

namespace detail {

inline Eigen::MatrixX2d project_pair(const PointMatrix& centered, const VecND& x, const VecND& y) {
  Eigen::MatrixX2d xy(centered.rows(), 2);
  xy.col(0) = centered * x;
  xy.col(1) = centered * y;
  return xy;
}

template <class Fn>
void parallel_for(std::size_t count, unsigned workers, Fn&& fn) {
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, count));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::jthread> pool;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < count; i += workers) fn(i);
    });
  }
}

}  // namespace detail

/// Runs the colony. The returned view is whichever scores higher of the
/// per-parameter argmax-pheromone view and the best candidate ever seen
/// (the quantized initial view included).
inline AcoResult run(const PointMatrix& points, std::span<const int> labels, const QualityMetric& metric,
                     const VecND& initial_x, const VecND& initial_y, const AcoConfig& cfg,
                     const AcoControl& control = {}) {
  cfg.validate();
  if (initial_x.size() != points.cols() || initial_y.size() != points.cols()) {
    throw Error(ErrorCode::InvalidArgument, "initial view dimension does not match the data");
  }
  const ViewScorer scorer(metric, points, labels);
  const PointMatrix centered = points.rowwise() - points.colwise().mean();
  const Eigen::VectorXd grid = level_grid(cfg.levels);
  auto evaluate = [&](std::span<const int> lv) {
    const auto view = view_from_levels(lv, grid);
    return view ? scorer(detail::project_pair(centered, view->first, view->second)) : kWorstScore;
  };

  AcoResult res;
  res.state = init_pheromone(initial_x, initial_y, cfg);
  AcoState& st = res.state;
  const auto params = static_cast<std::size_t>(st.parameters());
  st.best_levels = st.initial_levels;
  st.best_score = evaluate(st.initial_levels);

  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<std::vector<int>> colony(static_cast<std::size_t>(cfg.ants), std::vector<int>(params));
  std::vector<double> scores(static_cast<std::size_t>(cfg.ants));
  std::vector<std::size_t> order(static_cast<std::size_t>(cfg.ants));

  for (int gen = 0; gen < cfg.generations; ++gen) {
    if (control.cancel && control.cancel->load()) {
      res.cancelled = true;
      break;
    }
    for (auto& ant : colony) {
      for (std::size_t p = 0; p < params; ++p) {
        const auto row = static_cast<Eigen::Index>(p);
        double total = 0;
        for (int l = st.lo[p]; l <= st.hi[p]; ++l) total += st.pheromone(row, l);
        double r = unit(rng) * total;
        int pick = st.hi[p];
        for (int l = st.lo[p]; l <= st.hi[p]; ++l) {
          r -= st.pheromone(row, l);
          if (r < 0) {
            pick = l;
            break;
          }
        }
        ant[p] = pick;
      }
    }
    detail::parallel_for(colony.size(), cfg.workers, [&](std::size_t a) { scores[a] = evaluate(colony[a]); });

    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return scores[a] > scores[b]; });
    if (scores[order[0]] > st.best_score) {
      st.best_score = scores[order[0]];
      st.best_levels = colony[order[0]];
    }

    st.pheromone = (st.pheromone * (1.0 - cfg.evaporation)).cwiseMax(kPheromoneFloor);

    // Elite deposit scaled by the ant's quality relative to this generation's
    // spread of finite scores; the best-so-far path is reinforced as well.
    double worst = scores[order[0]];
    for (double s : scores) {
      if (std::isfinite(s)) worst = std::min(worst, s);
    }
    const double top = scores[order[0]];
    for (int r = 0; r < cfg.elite; ++r) {
      const double s = scores[order[static_cast<std::size_t>(r)]];
      if (!std::isfinite(s)) break;
      const double quality = top > worst ? (s - worst) / (top - worst) : 1.0;
      const auto& ant = colony[order[static_cast<std::size_t>(r)]];
      for (std::size_t p = 0; p < params; ++p) st.pheromone(static_cast<Eigen::Index>(p), ant[p]) += kBasePheromone * quality;
    }
    if (std::isfinite(st.best_score)) {
      for (std::size_t p = 0; p < params; ++p) {
        st.pheromone(static_cast<Eigen::Index>(p), st.best_levels[p]) += kBasePheromone;
      }
    }
    res.trace.push_back(st.best_score);
    if (control.progress) control.progress(gen + 1, st.best_score);
  }

  std::vector<int> chosen = st.best_levels;
  double chosen_score = st.best_score;
  if (cfg.generations > 0) {
    const std::vector<int> arg = st.argmax_levels();
    const double arg_score = evaluate(arg);
    if (arg_score > chosen_score) {
      chosen = arg;
      chosen_score = arg_score;
    }
  }
  const auto view = view_from_levels(chosen, st.level_values);
  if (!view || !std::isfinite(chosen_score)) {
    throw Error(ErrorCode::DegenerateData, "every candidate view was degenerate");
  }
  res.x = view->first;
  res.y = view->second;
  res.score = chosen_score;
  return res;
}

enum class OptimizeScope { within_view, narrow, expanded, global };

inline std::string_view to_string(OptimizeScope scope) {
  switch (scope) {
    case OptimizeScope::within_view: return "within_view";
    case OptimizeScope::narrow: return "narrow";
    case OptimizeScope::expanded: return "expanded";
    case OptimizeScope::global: return "global";
  }
  return "unknown";
}

inline OptimizeScope parse_optimize_scope(std::string_view name) {
  for (auto s : {OptimizeScope::within_view, OptimizeScope::narrow, OptimizeScope::expanded, OptimizeScope::global}) {
    if (to_string(s) == name) return s;
  }
  throw Error(ErrorCode::InvalidArgument, "unknown optimize scope '" + std::string(name) + "'");
}

struct OptimizeOutcome {
  TrackballState state;
  double score = kWorstScore;
  double incoming_score = kWorstScore;
  std::vector<double> trace;
  bool cancelled = false;
};

/// Optimizes the current view. `narrow` and `expanded` search windows of 2
/// and 6 levels around the on-screen axes in N-D, `global` the whole grid
/// (still biased toward the current view); `within_view` searches the
/// 6 weights of a rotation inside the current 3D subspace. The incoming view
/// is kept when nothing found beats it.
inline OptimizeOutcome optimize_view(const TrackballState& state, const PointMatrix& points, std::span<const int> labels,
                                     const QualityMetric& metric, OptimizeScope scope, AcoConfig cfg,
                                     const AcoControl& control = {}) {
  const ViewScorer scorer(metric, points, labels);
  OptimizeOutcome out;
  out.state = state;
  out.incoming_score = scorer(project(state, points).xy);
  out.score = out.incoming_score;

  if (scope == OptimizeScope::within_view) {
    cfg.range = SearchRange::global();
    const PointMatrix local = (points.rowwise() - state.basis.origin.transpose()) * state.basis.axes.transpose();
    const VecND ix = state.rotation.m.row(0).transpose();
    const VecND iy = state.rotation.m.row(1).transpose();
    AcoResult r = run(local, labels, metric, ix, iy, cfg, control);
    out.trace = std::move(r.trace);
    out.cancelled = r.cancelled;
    TrackballState candidate = state;
    const Eigen::Vector3d x3 = r.x, y3 = r.y;
    candidate.rotation.m.row(0) = x3.transpose();
    candidate.rotation.m.row(1) = y3.transpose();
    candidate.rotation.m.row(2) = x3.cross(y3).transpose();
    const double s = scorer(project(candidate, points).xy);
    if (s > out.score) {
      out.state = candidate;
      out.score = s;
    }
    return out;
  }

  cfg.range = scope == OptimizeScope::global ? SearchRange::global()
                                             : SearchRange::window(scope == OptimizeScope::narrow ? 2 : 6);
  const TrackballState baked = bake_rotation(state);
  AcoResult r = run(points, labels, metric, baked.basis.x(), baked.basis.y(), cfg, control);
  out.trace = std::move(r.trace);
  out.cancelled = r.cancelled;
  TrackballState candidate = baked;
  candidate.basis = ProjectionBasis::from_axes(r.x, r.y, detail::complete_z(r.x, r.y, baked.basis.z()),
                                               baked.basis.origin);
  candidate.depth.reset();
  const double s = scorer(project(candidate, points).xy);
  if (s > out.score) {
    out.state = candidate;
    out.score = s;
  }
  return out;
}

}  // namespace voyager
