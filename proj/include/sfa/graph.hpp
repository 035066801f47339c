#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace sfa {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct LonLat {
  double lon = 0.0;
  double lat = 0.0;
};

// Static sensor network: weighted adjacency plus optional coordinates.
// Weights are nonnegative, the diagonal is zero, and the edge list mirrors
// the nonzero pattern of the weight matrix exactly.
struct SensorGraph {
  int n = 0;
  std::vector<std::pair<int, int>> edges;  // ordered (from, to)
  Matrix weights;                          // n x n
  std::vector<LonLat> positions;           // empty or size n

  bool has_positions() const { return !positions.empty(); }

  // Number of distinct neighbours over in- and out-edges, self excluded.
  int degree(int j) const {
    if (j < 0 || j >= n) throw std::invalid_argument("degree: sensor out of range");
    int d = 0;
    for (int k = 0; k < n; ++k) {
      if (k == j) continue;
      if (weights(j, k) != 0.0 || weights(k, j) != 0.0) ++d;
    }
    return d;
  }
};

inline void validate(const SensorGraph& g) {
  if (g.n <= 0) throw std::invalid_argument("graph: need at least one sensor");
  if (g.weights.rows() != g.n || g.weights.cols() != g.n)
    throw std::invalid_argument("graph: weight matrix shape mismatch");
  if (!g.positions.empty() && static_cast<int>(g.positions.size()) != g.n)
    throw std::invalid_argument("graph: positions size mismatch");
  for (int i = 0; i < g.n; ++i) {
    if (g.weights(i, i) != 0.0) throw std::invalid_argument("graph: nonzero diagonal");
    for (int j = 0; j < g.n; ++j) {
      const double w = g.weights(i, j);
      if (!std::isfinite(w) || w < 0.0)
        throw std::invalid_argument("graph: weights must be finite and nonnegative");
    }
  }
  std::set<std::pair<int, int>> seen;
  for (const auto& e : g.edges) {
    if (e.first < 0 || e.first >= g.n || e.second < 0 || e.second >= g.n)
      throw std::invalid_argument("graph: edge endpoint out of range");
    if (e.first == e.second) throw std::invalid_argument("graph: self edge");
    if (!seen.insert(e).second) throw std::invalid_argument("graph: duplicate edge");
    if (g.weights(e.first, e.second) == 0.0)
      throw std::invalid_argument("graph: edge without weight");
  }
  for (int i = 0; i < g.n; ++i)
    for (int j = 0; j < g.n; ++j)
      if (g.weights(i, j) != 0.0 && seen.find({i, j}) == seen.end())
        throw std::invalid_argument("graph: weight without edge");
}

// Builds a graph from a weight matrix; the edge list is derived.
inline SensorGraph make_graph(Matrix weights, std::vector<LonLat> positions = {}) {
  SensorGraph g;
  g.n = static_cast<int>(weights.rows());
  g.weights = std::move(weights);
  g.positions = std::move(positions);
  for (int i = 0; i < g.n; ++i)
    for (int j = 0; j < g.n; ++j)
      if (i != j && g.weights(i, j) != 0.0) g.edges.emplace_back(i, j);
  validate(g);
  return g;
}

struct StateSnapshot {
  int t = 0;       // sample index, uniformly spaced
  Vector values;   // km/h, one entry per sensor
};

// Speed series over a fixed graph. Snapshot indices are consecutive.
struct GraphSeries {
  SensorGraph graph;
  std::vector<StateSnapshot> snapshots;
  double interval_minutes = 5.0;
  std::int64_t start_epoch_seconds = 1704067200;  // 2024-01-01T00:00:00Z

  int length() const { return static_cast<int>(snapshots.size()); }
  int sensors() const { return graph.n; }
};

inline void validate(const GraphSeries& s) {
  validate(s.graph);
  if (s.interval_minutes <= 0.0) throw std::invalid_argument("series: interval must be positive");
  for (std::size_t i = 0; i < s.snapshots.size(); ++i) {
    const auto& snap = s.snapshots[i];
    if (snap.t != static_cast<int>(i)) throw std::invalid_argument("series: snapshot indices must be consecutive");
    if (snap.values.size() != s.graph.n) throw std::invalid_argument("series: snapshot width mismatch");
    for (int j = 0; j < snap.values.size(); ++j) {
      const double v = snap.values[j];
      if (!std::isfinite(v) || v < 0.0)
        throw std::invalid_argument("series: speeds must be finite and nonnegative");
    }
  }
}

inline GraphSeries make_series(SensorGraph graph, const Matrix& values, double interval_minutes = 5.0) {
  GraphSeries s;
  s.graph = std::move(graph);
  s.interval_minutes = interval_minutes;
  s.snapshots.reserve(static_cast<std::size_t>(values.rows()));
  for (int t = 0; t < values.rows(); ++t)
    s.snapshots.push_back({t, values.row(t).transpose()});
  validate(s);
  return s;
}

// Rows = time, one column per sensor.
inline Matrix values_matrix(const GraphSeries& s, int begin, int end) {
  if (begin < 0 || end > s.length() || begin > end)
    throw std::invalid_argument("values_matrix: range out of bounds");
  Matrix m(end - begin, s.sensors());
  for (int t = begin; t < end; ++t) m.row(t - begin) = s.snapshots[static_cast<std::size_t>(t)].values.transpose();
  return m;
}

struct WindowSpec {
  int input_steps = 12;   // observed snapshots fed to the model
  int horizon_steps = 3;  // recursive forecast length
};

inline void validate(const WindowSpec& w) {
  if (w.input_steps < 5) throw std::invalid_argument("window spec: need at least 5 input steps");
  if (w.horizon_steps < 1 || w.horizon_steps > w.input_steps)
    throw std::invalid_argument("window spec: horizon must be in [1, input_steps]");
}

struct IndexRange {
  int begin = 0;
  int end = 0;  // exclusive
  int length() const { return end - begin; }
};

struct DatasetSplit {
  IndexRange train;
  IndexRange validation;
  IndexRange test;
};

struct Window {
  int start = 0;  // series index of the first input row
  Matrix input;   // input_steps x n
  Matrix target;  // horizon_steps x n
};

// Raised when a window range is valid but cannot host a single window.
struct EmptyRangeError : std::runtime_error {
  explicit EmptyRangeError(const std::string& msg) : std::runtime_error(msg) {}
};

// Every window lies entirely inside [range.begin, range.end).
inline std::vector<Window> sliding_windows(const GraphSeries& series, const WindowSpec& spec,
                                           const IndexRange& range) {
  validate(spec);
  if (range.begin < 0 || range.end > series.length() || range.begin > range.end)
    throw std::invalid_argument("sliding_windows: range outside series");
  const int block = spec.input_steps + spec.horizon_steps;
  if (range.length() < block)
    throw EmptyRangeError("sliding_windows: range of length " + std::to_string(range.length()) +
                          " cannot host a window of " + std::to_string(block) + " steps");
  std::vector<Window> out;
  out.reserve(static_cast<std::size_t>(range.length() - block + 1));
  for (int k = range.begin; k + block <= range.end; ++k) {
    Window w;
    w.start = k;
    w.input = values_matrix(series, k, k + spec.input_steps);
    w.target = values_matrix(series, k + spec.input_steps, k + block);
    out.push_back(std::move(w));
  }
  return out;
}

// Chronological split; train and validation sizes are floored, the test
// range absorbs the remainder.
inline DatasetSplit split(const GraphSeries& series, double train_frac, double val_frac,
                          double test_frac, const WindowSpec& spec) {
  validate(spec);
  if (train_frac <= 0.0 || val_frac <= 0.0 || test_frac <= 0.0)
    throw std::invalid_argument("split: fractions must be positive");
  if (std::abs(train_frac + val_frac + test_frac - 1.0) > 1e-9)
    throw std::invalid_argument("split: fractions must sum to 1");
  const int len = series.length();
  if (len < 3 * (spec.input_steps + spec.horizon_steps))
    throw std::invalid_argument("split: series too short to split");
  const int n_train = static_cast<int>(std::floor(train_frac * len));
  const int n_val = static_cast<int>(std::floor(val_frac * len));
  DatasetSplit s;
  s.train = {0, n_train};
  s.validation = {n_train, n_train + n_val};
  s.test = {n_train + n_val, len};
  return s;
}

struct DistanceEntry {
  int from = 0;
  int to = 0;
  double km = 0.0;
};

// Population standard deviation of the listed distances.
inline double distance_stddev(const std::vector<DistanceEntry>& entries) {
  if (entries.empty()) throw std::invalid_argument("distance_stddev: no entries");
  double mean = 0.0;
  for (const auto& e : entries) mean += e.km;
  mean /= static_cast<double>(entries.size());
  double var = 0.0;
  for (const auto& e : entries) var += (e.km - mean) * (e.km - mean);
  return std::sqrt(var / static_cast<double>(entries.size()));
}

// Root-mean-square of the listed distances; the default kernel bandwidth
// below. With sigma = rms the mean of (d/sigma)^2 is exactly 1, so kernel
// weights stay informative no matter how tightly the listed distances
// cluster (a stddev bandwidth collapses when they are nearly equal).
inline double distance_rms(const std::vector<DistanceEntry>& entries) {
  if (entries.empty()) throw std::invalid_argument("distance_rms: no entries");
  double acc = 0.0;
  for (const auto& e : entries) acc += e.km * e.km;
  return std::sqrt(acc / static_cast<double>(entries.size()));
}

// Gaussian kernel adjacency: w_ij = exp(-d^2 / sigma^2), thresholded at
// kappa and zeroed on the diagonal.
inline Matrix build_adjacency_from_distances(int n, const std::vector<DistanceEntry>& entries,
                                             double sigma, double kappa) {
  if (n <= 0) throw std::invalid_argument("adjacency: need at least one sensor");
  if (!(sigma > 0.0)) throw std::invalid_argument("adjacency: sigma must be positive");
  if (kappa < 0.0 || kappa >= 1.0) throw std::invalid_argument("adjacency: kappa must be in [0, 1)");
  Matrix w = Matrix::Zero(n, n);
  for (const auto& e : entries) {
    if (e.from < 0 || e.from >= n || e.to < 0 || e.to >= n)
      throw std::invalid_argument("adjacency: sensor index out of range");
    if (!std::isfinite(e.km) || e.km < 0.0)
      throw std::invalid_argument("adjacency: distances must be finite and nonnegative");
    if (e.from == e.to) continue;
    const double v = std::exp(-(e.km * e.km) / (sigma * sigma));
    w(e.from, e.to) = v >= kappa ? v : 0.0;
  }
  return w;
}

}  // namespace sfa
