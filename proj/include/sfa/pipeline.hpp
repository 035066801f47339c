#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include <sfa/attack.hpp>
#include <sfa/estimation.hpp>
#include <sfa/io.hpp>
#include <sfa/metrics.hpp>
#include <sfa/weakness.hpp>

// Evaluation protocol shared by the command-line tool and the test suites.
// Test windows are taken non-overlapping (stride = input + horizon), so the
// rows a window is scored against are never part of any other evaluated
// window's input. Perturbation generation sees only window inputs and
// training statistics; targets enter at scoring time only.

namespace sfa::pipeline {

inline std::vector<Window> select_eval_windows(const GraphSeries& series, const WindowSpec& spec,
                                               const IndexRange& range, int max_count) {
  if (max_count < 1) throw std::invalid_argument("eval: need at least one window");
  const int block = spec.input_steps + spec.horizon_steps;
  std::vector<Window> out;
  for (int k = range.begin; k + block <= range.end && static_cast<int>(out.size()) < max_count;
       k += block) {
    Window w;
    w.start = k;
    w.input = values_matrix(series, k, k + spec.input_steps);
    w.target = values_matrix(series, k + spec.input_steps, k + block);
    out.push_back(std::move(w));
  }
  if (out.empty()) throw EmptyRangeError("eval: range cannot host a single evaluation window");
  return out;
}

inline const std::vector<std::string>& attack_methods() {
  static const std::vector<std::string> m = {"sfa", "gwn", "mfgsm", "full-inverse", "full-direct"};
  return m;
}

struct AttackRunConfig {
  std::string method = "sfa";
  AttackConfig opt;
  MFGSMConfig fgsm;
  int sensor = -1;                      // vertex for sfa/gwn
  bool all_steps = false;               // pool errors over the horizon instead of the last step
  bool network_mean_of_sensors = false; // network scores from sensor means instead of pooled errors
};

struct AttackOutcome {
  AttackReport report;
  std::vector<int> window_starts;
  std::vector<Perturbation> perturbations;
};

inline AttackOutcome evaluate_attack(const ForecastModel& model, const DatasetStats& stats,
                                     const std::vector<Window>& windows, const AttackRunConfig& cfg) {
  const auto t_total0 = std::chrono::steady_clock::now();
  if (windows.empty()) throw std::invalid_argument("evaluate_attack: no windows");
  bool known = false;
  for (const auto& m : attack_methods()) known = known || m == cfg.method;
  if (!known) throw std::invalid_argument("evaluate_attack: unknown method '" + cfg.method + "'");
  const bool needs_sensor = cfg.method == "sfa" || cfg.method == "gwn";
  if (needs_sensor && (cfg.sensor < 0 || cfg.sensor >= model.graph.n))
    throw std::invalid_argument("evaluate_attack: method '" + cfg.method + "' needs a vertex");

  const int n = model.graph.n, N = model.spec.input_steps, M = model.spec.horizon_steps;
  AttackOutcome out;
  out.window_starts.reserve(windows.size());
  out.perturbations.reserve(windows.size());

  Matrix clean_err = Matrix::Zero(1, n);   // accumulated |err|/max(truth,floor)
  Matrix att_err = Matrix::Zero(1, n);
  long long samples_per_sensor = 0;
  double solver_seconds = 0.0;

  for (const auto& w : windows) {
    const Vector last = w.input.row(N - 1).transpose();
    const auto t0 = std::chrono::steady_clock::now();
    Perturbation pert;
    if (cfg.method == "sfa") {
      pert = solve_sfa(model, w.input, inverse_estimate(last, stats).values, SpatialMask{cfg.sensor}, cfg.opt);
    } else if (cfg.method == "gwn") {
      pert = gwn_baseline(N, n, SpatialMask{cfg.sensor}, cfg.opt.xi,
                          derive_seed(cfg.opt.seed, static_cast<std::uint64_t>(w.start)));
    } else if (cfg.method == "mfgsm") {
      pert = mfgsm(model, w.input, inverse_estimate(last, stats).values, cfg.fgsm);
    } else if (cfg.method == "full-inverse") {
      pert = solve_full_graph_attack(model, w.input, inverse_estimate(last, stats).values, cfg.opt,
                                     AttackDirection::TowardTarget);
    } else {  // full-direct
      pert = solve_full_graph_attack(model, w.input, direct_estimate(last), cfg.opt,
                                     AttackDirection::AwayFromTarget);
    }
    solver_seconds += std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    const Matrix clean_fc = forecast_recursive(model, w.input);
    const Matrix att_fc = forecast_recursive(model, apply_perturbation(w.input, pert, stats));
    const int step_lo = cfg.all_steps ? 0 : M - 1;
    for (int h = step_lo; h < M; ++h) {
      for (int j = 0; j < n; ++j) {
        const double denom = std::max(w.target(h, j), 1.0);
        clean_err(0, j) += std::abs(clean_fc(h, j) - w.target(h, j)) / denom;
        att_err(0, j) += std::abs(att_fc(h, j) - w.target(h, j)) / denom;
      }
    }
    samples_per_sensor += M - step_lo;

    out.window_starts.push_back(w.start);
    out.perturbations.push_back(std::move(pert));
  }

  AttackReport r;
  r.method = cfg.method;
  r.eval_windows = static_cast<int>(windows.size());
  r.horizon_step = M;
  r.all_steps = cfg.all_steps;
  r.sensor_clean_mape.resize(static_cast<std::size_t>(n));
  r.sensor_attacked_mape.resize(static_cast<std::size_t>(n));
  r.sensor_mapei.resize(static_cast<std::size_t>(n));
  r.sensor_nmapei.resize(static_cast<std::size_t>(n));
  const double scale = 100.0 / static_cast<double>(samples_per_sensor);
  for (int j = 0; j < n; ++j) {
    const double c = clean_err(0, j) * scale;
    const double a = att_err(0, j) * scale;
    r.sensor_clean_mape[static_cast<std::size_t>(j)] = c;
    r.sensor_attacked_mape[static_cast<std::size_t>(j)] = a;
    r.sensor_mapei[static_cast<std::size_t>(j)] = mapei(c, a);
    r.sensor_nmapei[static_cast<std::size_t>(j)] = nmapei(c, a);
  }
  if (cfg.network_mean_of_sensors) {
    double mc = 0.0, ma = 0.0, mn = 0.0;
    for (int j = 0; j < n; ++j) {
      mc += r.sensor_clean_mape[static_cast<std::size_t>(j)];
      ma += r.sensor_attacked_mape[static_cast<std::size_t>(j)];
      mn += r.sensor_nmapei[static_cast<std::size_t>(j)];
    }
    r.network_clean_mape = mc / n;
    r.network_attacked_mape = ma / n;
    r.network_mapei = mapei(r.network_clean_mape, r.network_attacked_mape);
    r.network_nmapei = mn / n;
  } else {
    r.network_clean_mape = clean_err.sum() * scale / n;
    r.network_attacked_mape = att_err.sum() * scale / n;
    r.network_mapei = mapei(r.network_clean_mape, r.network_attacked_mape);
    r.network_nmapei = nmapei(r.network_clean_mape, r.network_attacked_mape);
  }
  for (double k : k_iv_levels()) {
    char key[16];
    std::snprintf(key, sizeof(key), "%g", k);
    r.k_iv_counts[key] = k_iv(r.sensor_nmapei, k);
  }
  r.solver_seconds = solver_seconds;
  r.total_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_total0).count();
  out.report = std::move(r);
  return out;
}

// One row per (window, lag): window_start,lag,s0,...
inline void write_perturbations_csv(const std::string& path, const std::vector<int>& starts,
                                    const std::vector<Perturbation>& perts) {
  if (starts.size() != perts.size()) throw std::invalid_argument("perturbations: size mismatch");
  auto f = open_out(path);
  f << "window_start,lag";
  if (!perts.empty())
    for (int j = 0; j < perts[0].delta.cols(); ++j) f << ",s" << j;
  f << "\n";
  char buf[40];
  for (std::size_t w = 0; w < perts.size(); ++w) {
    const Matrix& d = perts[w].delta;
    for (int i = 0; i < d.rows(); ++i) {
      f << starts[w] << ',' << i;
      for (int j = 0; j < d.cols(); ++j) {
        std::snprintf(buf, sizeof(buf), "%.17g", d(i, j));
        f << ',' << buf;
      }
      f << "\n";
    }
  }
}

}  // namespace sfa::pipeline
