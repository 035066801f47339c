#pragma once

#include <sfa/graph.hpp>

namespace sfa {

// Extremes and centre of the training speed distribution, shared by all
// sensors. The centre is the arithmetic mean.
struct DatasetStats {
  double v_min = 0.0;
  double v_max = 0.0;
  double v_mid = 0.0;
};

inline DatasetStats dataset_stats(const GraphSeries& series, const IndexRange& range) {
  if (range.begin < 0 || range.end > series.length() || range.length() <= 0)
    throw std::invalid_argument("dataset_stats: bad range");
  DatasetStats s;
  s.v_min = std::numeric_limits<double>::infinity();
  s.v_max = -std::numeric_limits<double>::infinity();
  double sum = 0.0;
  std::int64_t count = 0;
  for (int t = range.begin; t < range.end; ++t) {
    const Vector& v = series.snapshots[static_cast<std::size_t>(t)].values;
    for (int j = 0; j < v.size(); ++j) {
      s.v_min = std::min(s.v_min, v[j]);
      s.v_max = std::max(s.v_max, v[j]);
      sum += v[j];
      ++count;
    }
  }
  s.v_mid = sum / static_cast<double>(count);
  return s;
}

// Next-step stand-in used by the undirected attack: assume the state does
// not change over one sampling interval.
inline Vector direct_estimate(const Vector& current) { return current; }

// Flip to the far extreme: congested sensors are estimated free-flowing and
// vice versa. The midpoint itself counts as fast, so it flips to v_min.
inline double opposite_value(double v, const DatasetStats& stats) {
  return v < stats.v_mid ? stats.v_max : stats.v_min;
}

struct OppositeSnapshot {
  Vector values;  // every entry is stats.v_min or stats.v_max
};

inline OppositeSnapshot inverse_estimate(const Vector& current, const DatasetStats& stats) {
  OppositeSnapshot out;
  out.values.resize(current.size());
  for (int j = 0; j < current.size(); ++j) out.values[j] = opposite_value(current[j], stats);
  return out;
}

}  // namespace sfa
