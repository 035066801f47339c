#pragma once

#include <cmath>
#include <queue>
#include <vector>

#include <sfa/graph.hpp>
#include <sfa/random.hpp>

// Synthetic benchmark: a random geometric sensor network and a speed series
// with a daily rhythm, congestion events that spill over to neighbours, and
// observation noise. Everything is a pure function of the config seed.

namespace sfa {

struct SynthConfig {
  int sensors = 50;
  int days = 30;
  double interval_minutes = 5.0;
  double free_flow_kmh = 70.0;
  double daily_dip_kmh = 15.0;        // depth of the daily slowdown
  double event_rate_per_day = 0.3;    // expected congestion events per sensor per day
  double event_depth_kmh = 30.0;
  double event_duration_min = 60.0;
  double diffusion = 0.4;             // neighbour spill-over per hop
  double noise_std_kmh = 2.0;
  double radius = 0.0;                // edge radius in the unit square; 0 = 1.5*sqrt(1/n)
  double kappa = 0.1;                 // adjacency kernel threshold
  std::uint64_t seed = 1;
};

inline void validate(const SynthConfig& c) {
  if (c.sensors < 2) throw std::invalid_argument("synth: need at least two sensors");
  if (c.days < 1) throw std::invalid_argument("synth: need at least one day");
  if (!(c.interval_minutes > 0.0)) throw std::invalid_argument("synth: bad interval");
  if (!(c.free_flow_kmh > 0.0)) throw std::invalid_argument("synth: bad free-flow speed");
  if (c.daily_dip_kmh < 0.0 || c.event_depth_kmh < 0.0 || c.noise_std_kmh < 0.0)
    throw std::invalid_argument("synth: amplitudes must be nonnegative");
  if (c.event_rate_per_day < 0.0 || c.event_duration_min <= 0.0)
    throw std::invalid_argument("synth: bad event parameters");
  if (c.diffusion < 0.0 || c.diffusion >= 1.0) throw std::invalid_argument("synth: diffusion must be in [0, 1)");
  if (c.radius < 0.0) throw std::invalid_argument("synth: radius must be nonnegative");
}

struct SynthGraphResult {
  SensorGraph graph;
  std::vector<DistanceEntry> distances;  // both directions, matches the graph edges
};

// Random geometric graph in the unit square; positions double as (lon, lat).
// Sensors are jittered over a grid rather than drawn iid so the default
// radius almost always yields one component; only the largest connected
// component is kept, so the realised count can still drop on unlucky draws.
inline SynthGraphResult synth_graph(const SynthConfig& cfg) {
  validate(cfg);
  const double radius = cfg.radius > 0.0 ? cfg.radius : 1.5 * std::sqrt(1.0 / cfg.sensors);
  Rng rng(derive_seed(cfg.seed, 0));
  const int side = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(cfg.sensors))));
  std::vector<int> cells(static_cast<std::size_t>(side) * static_cast<std::size_t>(side));
  for (std::size_t i = 0; i < cells.size(); ++i) cells[i] = static_cast<int>(i);
  rng.shuffle(cells);
  // jitter 0.4 keeps side-adjacent occupied cells within the default radius
  // (sqrt(1.4^2 + 0.4^2) < 1.5 <= 1.5 * side / sqrt(n)), so splits can only
  // come from unlucky patterns of empty cells
  std::vector<LonLat> pts(static_cast<std::size_t>(cfg.sensors));
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const int cx = cells[i] % side, cy = cells[i] / side;
    pts[i].lon = (cx + 0.5 + 0.4 * (rng.uniform() - 0.5)) / side;
    pts[i].lat = (cy + 0.5 + 0.4 * (rng.uniform() - 0.5)) / side;
  }

  auto dist = [&](int i, int j) {
    const double dx = pts[static_cast<std::size_t>(i)].lon - pts[static_cast<std::size_t>(j)].lon;
    const double dy = pts[static_cast<std::size_t>(i)].lat - pts[static_cast<std::size_t>(j)].lat;
    return std::sqrt(dx * dx + dy * dy);
  };

  std::vector<std::vector<int>> adj(static_cast<std::size_t>(cfg.sensors));
  bool any_edge = false;
  for (int i = 0; i < cfg.sensors; ++i)
    for (int j = i + 1; j < cfg.sensors; ++j)
      if (dist(i, j) <= radius) {
        adj[static_cast<std::size_t>(i)].push_back(j);
        adj[static_cast<std::size_t>(j)].push_back(i);
        any_edge = true;
      }
  if (!any_edge) throw std::runtime_error("synth: degenerate graph, all sensors beyond the edge radius");

  // largest connected component, earliest tie wins
  std::vector<int> comp(static_cast<std::size_t>(cfg.sensors), -1);
  int best_root = -1, best_size = 0, n_comp = 0;
  for (int i = 0; i < cfg.sensors; ++i) {
    if (comp[static_cast<std::size_t>(i)] >= 0) continue;
    int size = 0;
    std::queue<int> q;
    q.push(i);
    comp[static_cast<std::size_t>(i)] = n_comp;
    while (!q.empty()) {
      const int u = q.front();
      q.pop();
      ++size;
      for (int v : adj[static_cast<std::size_t>(u)])
        if (comp[static_cast<std::size_t>(v)] < 0) {
          comp[static_cast<std::size_t>(v)] = n_comp;
          q.push(v);
        }
    }
    if (size > best_size) {
      best_size = size;
      best_root = n_comp;
    }
    ++n_comp;
  }

  std::vector<int> keep;
  for (int i = 0; i < cfg.sensors; ++i)
    if (comp[static_cast<std::size_t>(i)] == best_root) keep.push_back(i);
  const int n = static_cast<int>(keep.size());
  if (n < 2) throw std::runtime_error("synth: degenerate graph, largest component has a single sensor");

  std::vector<int> remap(static_cast<std::size_t>(cfg.sensors), -1);
  for (int i = 0; i < n; ++i) remap[static_cast<std::size_t>(keep[static_cast<std::size_t>(i)])] = i;

  std::vector<LonLat> positions(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    positions[static_cast<std::size_t>(i)] = pts[static_cast<std::size_t>(keep[static_cast<std::size_t>(i)])];

  std::vector<DistanceEntry> entries;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const double d = dist(keep[static_cast<std::size_t>(i)], keep[static_cast<std::size_t>(j)]);
      if (d <= radius) {
        entries.push_back({i, j, d});
        entries.push_back({j, i, d});
      }
    }

  double sigma = distance_rms(entries);
  if (sigma <= 0.0) sigma = 1.0;
  SynthGraphResult out;
  out.graph = make_graph(build_adjacency_from_distances(n, entries, sigma, cfg.kappa), positions);
  out.distances = std::move(entries);
  return out;
}

// speed = free flow - daily slowdown - diffused congestion + noise, clamped
// to [0, 1.1 * free flow]. The slowdown phase varies smoothly with position
// so nearby sensors move together; with noise and events disabled the
// series is seed-independent.
inline GraphSeries synth_series(const SensorGraph& graph, const SynthConfig& cfg) {
  validate(cfg);
  validate(graph);
  const int n = graph.n;
  const int steps_per_day = static_cast<int>(std::lround(1440.0 / cfg.interval_minutes));
  const int T = cfg.days * steps_per_day;

  // hop kernel: I + g*P + g^2*P^2 with P the row-normalised adjacency
  Matrix p = graph.weights;
  for (int i = 0; i < n; ++i) {
    const double s = p.row(i).sum();
    if (s > 0.0) p.row(i) /= s;
  }
  Matrix hop = Matrix::Identity(n, n) + cfg.diffusion * p + cfg.diffusion * cfg.diffusion * (p * p);

  Matrix congestion = Matrix::Zero(T, n);
  if (cfg.event_rate_per_day > 0.0) {
    Rng ev(derive_seed(cfg.seed, 1));
    const double p_step = cfg.event_rate_per_day * cfg.interval_minutes / 1440.0;
    const double base_steps = cfg.event_duration_min / cfg.interval_minutes;
    for (int i = 0; i < n; ++i)
      for (int t0 = 0; t0 < T; ++t0) {
        if (ev.uniform() >= p_step) continue;
        const double depth = cfg.event_depth_kmh * ev.uniform(0.5, 1.5);
        const int dur = std::max(1, static_cast<int>(std::lround(base_steps * ev.uniform(0.5, 1.5))));
        constexpr double pi = 3.1415926535897932384626433832795;
        for (int t = t0; t < std::min(T, t0 + dur); ++t) {
          const double shape = std::sin(pi * (static_cast<double>(t - t0) + 0.5) / static_cast<double>(dur));
          congestion.row(t) += depth * shape * hop.row(i);
        }
      }
  }

  constexpr double pi = 3.1415926535897932384626433832795;
  constexpr double two_pi = 2.0 * pi;
  Matrix values(T, n);
  Rng noise(derive_seed(cfg.seed, 2));
  const LonLat origin{};
  for (int t = 0; t < T; ++t) {
    const double tod = static_cast<double>(t % steps_per_day) / static_cast<double>(steps_per_day);
    for (int j = 0; j < n; ++j) {
      const LonLat& pos = graph.positions.empty() ? origin : graph.positions[static_cast<std::size_t>(j)];
      const double phase = pi * (pos.lon + pos.lat);
      const double dip = cfg.daily_dip_kmh * 0.5 * (1.0 + std::sin(two_pi * tod + phase));
      double v = cfg.free_flow_kmh - dip - congestion(t, j);
      if (cfg.noise_std_kmh > 0.0) v += noise.normal(0.0, cfg.noise_std_kmh);
      values(t, j) = std::clamp(v, 0.0, 1.1 * cfg.free_flow_kmh);
    }
  }
  return make_series(graph, values, cfg.interval_minutes);
}

}  // namespace sfa
