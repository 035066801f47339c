#pragma once

#include <map>
#include <set>
#include <vector>

#include <sfa/attack.hpp>
#include <sfa/model.hpp>
#include <sfa/random.hpp>

// Vertex weakness: how many sensors' one-step forecasts a fixed universal
// perturbation throws off by more than theta km/h when it is injected at a
// single vertex. The locators search for the vertex that maximises the
// aggregate over a set of held-out windows.

namespace sfa {

struct FilterConfig {
  double theta = 5.0;             // km/h error threshold, strict
  bool relative_to_clean = false; // compare against the clean forecast instead of the truth
};

// Count of sensors pushed past theta when rho_u is applied at `sensor` only.
inline int weakness_at(const ForecastModel& model, const Matrix& input, const Vector& truth_next,
                       const UniversalPerturbation& rho_u, int sensor, const FilterConfig& cfg) {
  if (cfg.theta < 0.0) throw std::invalid_argument("weakness: theta must be nonnegative");
  if (sensor < 0 || sensor >= model.graph.n) throw std::invalid_argument("weakness: sensor out of range");
  if (truth_next.size() != model.graph.n) throw std::invalid_argument("weakness: truth width mismatch");
  if (rho_u.delta.rows() != input.rows() || rho_u.delta.cols() != input.cols())
    throw std::invalid_argument("weakness: perturbation shape mismatch");
  Matrix poisoned = input;
  poisoned.col(sensor) += rho_u.delta.col(sensor);
  const Vector pred = forecast_one_step(model, poisoned);
  const Vector base = cfg.relative_to_clean ? forecast_one_step(model, input) : truth_next;
  int count = 0;
  for (int j = 0; j < pred.size(); ++j)
    if (std::abs(pred[j] - base[j]) > cfg.theta) ++count;
  return count;
}

struct WeaknessScore {
  int sensor = 0;
  std::vector<int> per_window;
  double aggregate = 0.0;  // euclidean norm of the per-window counts
};

inline WeaknessScore aggregate_weakness(const ForecastModel& model, const std::vector<Window>& windows,
                                        const UniversalPerturbation& rho_u, int sensor,
                                        const FilterConfig& cfg) {
  if (windows.empty()) throw std::invalid_argument("weakness: no windows");
  WeaknessScore s;
  s.sensor = sensor;
  s.per_window.reserve(windows.size());
  double acc = 0.0;
  for (const auto& w : windows) {
    const int c = weakness_at(model, w.input, w.target.row(0).transpose(), rho_u, sensor, cfg);
    s.per_window.push_back(c);
    acc += static_cast<double>(c) * static_cast<double>(c);
  }
  s.aggregate = std::sqrt(acc);
  return s;
}

// Seeded subsample without replacement, kept in chronological order.
inline std::vector<Window> subsample_windows(const std::vector<Window>& windows, int count,
                                             std::uint64_t seed) {
  if (count <= 0) throw std::invalid_argument("subsample_windows: count must be positive");
  if (static_cast<std::size_t>(count) >= windows.size()) return windows;
  Rng rng(seed);
  std::vector<Window> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int idx : rng.sample_indices(static_cast<int>(windows.size()), count))
    out.push_back(windows[static_cast<std::size_t>(idx)]);
  return out;
}

struct DESearchConfig {
  int candidates = 10;            // population size
  int max_generations = 10;
  double differential_weight = 0.5;
  std::uint64_t seed = 0;
  int window_subsample = 50;      // used by callers when trimming the window set
};

struct LocateResult {
  int sensor = -1;
  double aggregate = 0.0;
  long long weakness_evaluations = 0;  // one per (sensor, window) forecast
  int generations_run = 0;
  std::map<int, double> scores;  // aggregate per evaluated sensor
};

// Exhaustive scan over every vertex.
inline LocateResult locate_ct(const ForecastModel& model, const std::vector<Window>& windows,
                              const UniversalPerturbation& rho_u, const FilterConfig& cfg) {
  LocateResult res;
  for (int j = 0; j < model.graph.n; ++j) {
    const auto s = aggregate_weakness(model, windows, rho_u, j, cfg);
    res.weakness_evaluations += static_cast<long long>(windows.size());
    res.scores[j] = s.aggregate;
    if (res.sensor < 0 || s.aggregate > res.aggregate) {
      res.sensor = j;
      res.aggregate = s.aggregate;
    }
  }
  return res;
}

namespace detail {
// Candidates sorted by aggregate descending, index ascending on ties.
inline std::vector<int> top_candidates(const std::map<int, double>& scores,
                                       const std::set<int>& pool, int s) {
  std::vector<int> v(pool.begin(), pool.end());
  std::sort(v.begin(), v.end(), [&](int a, int b) {
    const double sa = scores.at(a), sb = scores.at(b);
    if (sa != sb) return sa > sb;
    return a < b;
  });
  if (static_cast<int>(v.size()) > s) v.resize(static_cast<std::size_t>(s));
  return v;
}
}  // namespace detail

// Differential-evolution search over vertex positions.
//  1. seed with the s best-connected sensors,
//  2. recombine candidate coordinates (c_r1 + p * (c_r2 - c_r3)) and snap
//     each trial point to the nearest sensor not already proposed in the
//     current generation,
//  3. keep the s strongest of old and new candidates,
//  4. stop when the set is stable or the generation budget is spent.
// Aggregates are memoised per sensor, so re-proposed vertices cost nothing.
inline LocateResult locate_de(const ForecastModel& model, const std::vector<Window>& windows,
                              const UniversalPerturbation& rho_u, const SensorGraph& graph,
                              const DESearchConfig& de, const FilterConfig& cfg) {
  const int n = graph.n;
  const int s = de.candidates;
  if (!graph.has_positions()) throw std::invalid_argument("locate_de: graph has no positions");
  if (s > n) throw std::invalid_argument("locate_de: more candidates than sensors");
  if (s < 4) throw std::invalid_argument("locate_de: need at least 4 candidates");
  if (de.max_generations < 0 || de.differential_weight < 0.0)
    throw std::invalid_argument("locate_de: bad config");

  LocateResult res;
  auto eval = [&](int j) -> double {
    auto it = res.scores.find(j);
    if (it != res.scores.end()) return it->second;
    const auto sc = aggregate_weakness(model, windows, rho_u, j, cfg);
    res.weakness_evaluations += static_cast<long long>(windows.size());
    res.scores[j] = sc.aggregate;
    return sc.aggregate;
  };

  // seeds: most-connected sensors, ties to the lower index
  std::vector<int> order(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) order[static_cast<std::size_t>(j)] = j;
  std::vector<int> deg(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) deg[static_cast<std::size_t>(j)] = graph.degree(j);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (deg[static_cast<std::size_t>(a)] != deg[static_cast<std::size_t>(b)])
      return deg[static_cast<std::size_t>(a)] > deg[static_cast<std::size_t>(b)];
    return a < b;
  });
  std::vector<int> cand(order.begin(), order.begin() + s);
  std::sort(cand.begin(), cand.end());
  for (int j : cand) eval(j);

  Rng rng(de.seed);
  for (int gen = 1; gen <= de.max_generations; ++gen) {
    std::set<int> proposed;
    for (int i = 0; i < s; ++i) {
      int r1 = i, r2 = i, r3 = i;
      while (r1 == i) r1 = static_cast<int>(rng.uniform_int(0, s - 1));
      while (r2 == i || r2 == r1) r2 = static_cast<int>(rng.uniform_int(0, s - 1));
      while (r3 == i || r3 == r1 || r3 == r2) r3 = static_cast<int>(rng.uniform_int(0, s - 1));
      const LonLat& a = graph.positions[static_cast<std::size_t>(cand[static_cast<std::size_t>(r1)])];
      const LonLat& b = graph.positions[static_cast<std::size_t>(cand[static_cast<std::size_t>(r2)])];
      const LonLat& c = graph.positions[static_cast<std::size_t>(cand[static_cast<std::size_t>(r3)])];
      const double lon = a.lon + de.differential_weight * (b.lon - c.lon);
      const double lat = a.lat + de.differential_weight * (b.lat - c.lat);
      int best_j = -1;
      double best_d = 0.0;
      for (int j = 0; j < n; ++j) {
        if (proposed.count(j)) continue;
        const double dlon = graph.positions[static_cast<std::size_t>(j)].lon - lon;
        const double dlat = graph.positions[static_cast<std::size_t>(j)].lat - lat;
        const double d = dlon * dlon + dlat * dlat;
        if (best_j < 0 || d < best_d) {
          best_j = j;
          best_d = d;
        }
      }
      if (best_j >= 0) proposed.insert(best_j);
    }

    std::set<int> pool(cand.begin(), cand.end());
    pool.insert(proposed.begin(), proposed.end());
    for (int j : pool) eval(j);
    std::vector<int> next = detail::top_candidates(res.scores, pool, s);
    std::sort(next.begin(), next.end());
    res.generations_run = gen;
    if (next == cand) break;
    cand = std::move(next);
  }

  res.sensor = cand[0];
  res.aggregate = res.scores.at(cand[0]);
  for (int j : cand) {
    const double a = res.scores.at(j);
    if (a > res.aggregate || (a == res.aggregate && j < res.sensor)) {
      res.sensor = j;
      res.aggregate = a;
    }
  }
  return res;
}

// Structural baselines: most-connected vertex and largest weighted row sum.
inline int locate_deg(const SensorGraph& graph) {
  int best = 0;
  int best_d = graph.degree(0);
  for (int j = 1; j < graph.n; ++j) {
    const int d = graph.degree(j);
    if (d > best_d) {
      best = j;
      best_d = d;
    }
  }
  return best;
}

inline int locate_cen(const SensorGraph& graph) {
  int best = 0;
  double best_w = graph.weights.row(0).sum();
  for (int j = 1; j < graph.n; ++j) {
    const double w = graph.weights.row(j).sum();
    if (w > best_w) {
      best = j;
      best_w = w;
    }
  }
  return best;
}

}  // namespace sfa
