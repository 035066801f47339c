#pragma once

#include <cmath>
#include <optional>
#include <vector>

#include <sfa/estimation.hpp>
#include <sfa/model.hpp>
#include <sfa/random.hpp>

// Perturbation solvers. The descent moves every entry by step_size km/h
// along the sign of its gradient and projects onto the [-sqrt(xi), sqrt(xi)]
// box after each step; the returned matrix is the best projected iterate
// seen, so the scale guarantee is exact, not approximate. The hinge penalty
// stays in the objective; it prices any infeasible point and keeps the
// reported objective comparable across solvers.

namespace sfa {

struct AttackConfig {
  double xi = 225.0;       // bound on squared entries, km/h^2 (15^2 default)
  double alpha = 1e4;      // hinge penalty factor
  int iters = 100;
  double step_size = 0.5;  // km/h per iteration
  std::uint64_t seed = 0;
};

inline void validate(const AttackConfig& c) {
  if (!(c.xi > 0.0)) throw std::invalid_argument("attack: xi must be positive");
  if (c.alpha < 0.0) throw std::invalid_argument("attack: alpha must be nonnegative");
  if (c.iters < 0) throw std::invalid_argument("attack: iters must be nonnegative");
  if (!(c.step_size > 0.0)) throw std::invalid_argument("attack: step size must be positive");
}

struct Perturbation {
  Matrix delta;  // input_steps x n, added to the window in km/h
};

// Input-independent perturbation, fitted once on validation windows and
// frozen afterwards.
struct UniversalPerturbation {
  Matrix delta;
};

// Restriction of an attack to a single sensor (one column of the window).
struct SpatialMask {
  int sensor = 0;
};

inline Matrix masked(const Matrix& delta, const SpatialMask& m) {
  if (m.sensor < 0 || m.sensor >= delta.cols())
    throw std::invalid_argument("mask: sensor out of range");
  Matrix out = Matrix::Zero(delta.rows(), delta.cols());
  out.col(m.sensor) = delta.col(m.sensor);
  return out;
}

enum class AttackDirection {
  TowardTarget,    // minimise the distance to the target state
  AwayFromTarget,  // maximise the distance to it
};

inline double hinge_penalty(const Matrix& delta, double xi, double alpha) {
  double acc = 0.0;
  for (int i = 0; i < delta.rows(); ++i)
    for (int j = 0; j < delta.cols(); ++j) acc += std::max(0.0, delta(i, j) * delta(i, j) - xi);
  return alpha * acc;
}

// Objective of the opposite-state attack: distance of the one-step forecast
// of the perturbed window to the target, plus the scale penalty.
inline double objective_inverse(const ForecastModel& model, const Matrix& window,
                                const Perturbation& pert, const Vector& target,
                                const AttackConfig& cfg) {
  validate(cfg);
  if (pert.delta.rows() != window.rows() || pert.delta.cols() != window.cols())
    throw std::invalid_argument("objective: perturbation shape mismatch");
  const Vector y = forecast_one_step(model, window + pert.delta);
  return (y - target).norm() + hinge_penalty(pert.delta, cfg.xi, cfg.alpha);
}

namespace detail {

// Shared projected-gradient loop. Averages distance terms over the given
// windows (one window = the per-input solvers, many = the universal fit).
// mask restricts updates to one column; broadcast_rows ties all rows
// together so the result is constant over lags.
inline Matrix solve_projected(const ForecastModel& model, const std::vector<const Matrix*>& windows,
                              const std::vector<Vector>& targets, AttackDirection dir,
                              const std::optional<SpatialMask>& mask, bool broadcast_rows,
                              const AttackConfig& cfg) {
  validate(cfg);
  if (windows.empty() || windows.size() != targets.size())
    throw std::invalid_argument("attack: need matching windows and targets");
  const int N = model.spec.input_steps, n = model.graph.n;
  for (std::size_t i = 0; i < windows.size(); ++i) {
    if (windows[i]->rows() != N || windows[i]->cols() != n)
      throw std::invalid_argument("attack: window shape mismatch");
    if (targets[i].size() != n) throw std::invalid_argument("attack: target shape mismatch");
  }
  if (mask && (mask->sensor < 0 || mask->sensor >= n))
    throw std::invalid_argument("attack: masked sensor out of range");

  const double bound = std::sqrt(cfg.xi);
  const double sign = dir == AttackDirection::TowardTarget ? 1.0 : -1.0;
  const double inv_count = 1.0 / static_cast<double>(windows.size());

  Matrix delta = Matrix::Zero(N, n);
  Matrix best = delta;
  double best_obj = std::numeric_limits<double>::infinity();

  for (int it = 0; it <= cfg.iters; ++it) {
    double dist_acc = 0.0;
    Matrix grad = Matrix::Zero(N, n);
    const bool want_grad = it < cfg.iters;
    for (std::size_t w = 0; w < windows.size(); ++w) {
      ForwardCache cache;
      const Vector y = forecast_one_step(model, *windows[w] + delta, &cache);
      const Vector r = y - targets[w];
      const double nr = r.norm();
      dist_acc += sign * nr;
      if (want_grad && nr > 0.0) grad += backward_input(model, cache, (sign / nr) * r);
    }
    const double obj = dist_acc * inv_count + hinge_penalty(delta, cfg.xi, cfg.alpha);
    if (!std::isfinite(obj))
      throw std::runtime_error("attack: objective not finite at iteration " + std::to_string(it));
    if (obj < best_obj) {
      best_obj = obj;
      best = delta;
    }
    if (!want_grad) break;

    grad *= inv_count;
    // hinge gradient; identically zero on the projected path, but it prices
    // infeasible starts the same way the objective does
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < n; ++j)
        if (delta(i, j) * delta(i, j) > cfg.xi) grad(i, j) += cfg.alpha * 2.0 * delta(i, j);

    if (broadcast_rows) {
      const Eigen::RowVectorXd row_grad = grad.colwise().sum();
      for (int i = 0; i < N; ++i) grad.row(i) = row_grad;
    }
    if (mask) {
      Matrix g = Matrix::Zero(N, n);
      g.col(mask->sensor) = grad.col(mask->sensor);
      grad = std::move(g);
    }
    // fixed-size descent: every entry moves step_size km/h along the sign of
    // its gradient, so progress is independent of the objective's scale
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < n; ++j) {
        const double g = grad(i, j);
        if (g > 0.0)
          delta(i, j) -= cfg.step_size;
        else if (g < 0.0)
          delta(i, j) += cfg.step_size;
      }
    delta = delta.cwiseMax(-bound).cwiseMin(bound);
  }
  return best;
}

}  // namespace detail

// Unrestricted attack over the whole window. TowardTarget with an opposite
// state reproduces the inverse scheme; AwayFromTarget with the current state
// is the direct baseline.
inline Perturbation solve_full_graph_attack(const ForecastModel& model, const Matrix& window,
                                            const Vector& target, const AttackConfig& cfg,
                                            AttackDirection dir = AttackDirection::TowardTarget) {
  std::vector<const Matrix*> ws{&window};
  std::vector<Vector> ts{target};
  return {detail::solve_projected(model, ws, ts, dir, std::nullopt, false, cfg)};
}

// Single-sensor attack: only the masked column is optimised, everything
// else stays exactly zero.
inline Perturbation solve_sfa(const ForecastModel& model, const Matrix& window, const Vector& target,
                              const SpatialMask& mask, const AttackConfig& cfg) {
  std::vector<const Matrix*> ws{&window};
  std::vector<Vector> ts{target};
  return {detail::solve_projected(model, ws, ts, AttackDirection::TowardTarget, mask, false, cfg)};
}

struct UniversalOptions {
  bool broadcast_rows = false;  // constrain the fit to one value per sensor
};

// Fits one perturbation against the opposite states of many windows and
// returns it frozen; apply it later without further optimisation.
inline UniversalPerturbation fit_universal(const ForecastModel& model,
                                           const std::vector<Window>& windows,
                                           const DatasetStats& stats, const AttackConfig& cfg,
                                           const UniversalOptions& opts = {}) {
  if (windows.empty()) throw std::invalid_argument("fit_universal: no windows");
  std::vector<const Matrix*> ws;
  std::vector<Vector> ts;
  ws.reserve(windows.size());
  ts.reserve(windows.size());
  for (const auto& w : windows) {
    ws.push_back(&w.input);
    ts.push_back(inverse_estimate(w.input.row(w.input.rows() - 1).transpose(), stats).values);
  }
  return {detail::solve_projected(model, ws, ts, AttackDirection::TowardTarget, std::nullopt,
                                  opts.broadcast_rows, cfg)};
}

struct MFGSMConfig {
  double epsilon = 2.0;  // km/h
};

// One-shot sign attack: a single gradient of the targeted cost at the clean
// window, quantised to +-epsilon. The cost is the negated distance to the
// opposite state, so the step moves the forecast toward it.
inline Perturbation mfgsm(const ForecastModel& model, const Matrix& window, const Vector& target,
                          const MFGSMConfig& cfg) {
  if (!(cfg.epsilon > 0.0)) throw std::invalid_argument("mfgsm: epsilon must be positive");
  Matrix t(1, target.size());
  t.row(0) = target.transpose();
  const Matrix g = input_gradient(model, window, L2ToTarget(t, -1.0), GradientMode::OneStep);
  Matrix delta(g.rows(), g.cols());
  for (int i = 0; i < g.rows(); ++i)
    for (int j = 0; j < g.cols(); ++j)
      delta(i, j) = g(i, j) > 0.0 ? cfg.epsilon : (g(i, j) < 0.0 ? -cfg.epsilon : 0.0);
  return {delta};
}

// Gaussian white noise on one sensor, stddev sqrt(xi), clipped to the same
// box as the optimised attacks.
inline Perturbation gwn_baseline(int rows, int cols, const SpatialMask& mask, double xi,
                                 std::uint64_t seed) {
  if (rows < 1 || cols < 1) throw std::invalid_argument("gwn: bad shape");
  if (!(xi > 0.0)) throw std::invalid_argument("gwn: xi must be positive");
  if (mask.sensor < 0 || mask.sensor >= cols) throw std::invalid_argument("gwn: sensor out of range");
  const double bound = std::sqrt(xi);
  Rng rng(seed);
  Matrix delta = Matrix::Zero(rows, cols);
  for (int i = 0; i < rows; ++i)
    delta(i, mask.sensor) = std::clamp(rng.normal(0.0, bound), -bound, bound);
  return {delta};
}

// Physical application of a perturbation: speeds cannot go negative or past
// 1.2x the fastest observed training speed.
inline Matrix apply_perturbation(const Matrix& window, const Perturbation& pert,
                                 const DatasetStats& stats) {
  if (pert.delta.rows() != window.rows() || pert.delta.cols() != window.cols())
    throw std::invalid_argument("apply_perturbation: shape mismatch");
  const double cap = 1.2 * stats.v_max;
  return (window + pert.delta).cwiseMax(0.0).cwiseMin(cap);
}

}  // namespace sfa
