#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <json.hpp>
#include <sfa/graph.hpp>
#include <sfa/io.hpp>
#include <sfa/random.hpp>

// Reference forecaster: temporal gated convolution -> spatial graph
// convolution -> temporal gated convolution -> shared per-sensor linear
// head. Channels are shared across sensors; the spatial step mixes sensors
// through the symmetrically normalised adjacency. Both the forward pass and
// the exact reverse-mode gradients (inputs and parameters) live here.

namespace sfa {

struct NormStats {
  double mean = 0.0;
  double stddev = 1.0;
};

// Scalar z-score statistics over one split of the series, shared by all
// sensors so perturbation magnitudes keep a single physical meaning.
inline NormStats norm_stats(const GraphSeries& series, const IndexRange& range) {
  const Matrix v = values_matrix(series, range.begin, range.end);
  NormStats s;
  s.mean = v.mean();
  s.stddev = std::sqrt((v.array() - s.mean).square().mean());
  if (!(s.stddev > 0.0)) throw std::invalid_argument("norm_stats: series has zero variance");
  return s;
}

struct ArchConfig {
  int hidden = 32;
  int kernel = 3;
  int input_steps = 12;
  int sensors = 0;  // bound to the training graph
};

inline void validate(const ArchConfig& a) {
  if (a.hidden < 1) throw std::invalid_argument("arch: hidden width must be positive");
  if (a.kernel < 2) throw std::invalid_argument("arch: kernel must be at least 2");
  if (a.sensors < 1) throw std::invalid_argument("arch: sensor count must be positive");
  if (a.input_steps < 2 * (a.kernel - 1) + 1)
    throw std::invalid_argument("arch: input window too short for two temporal convolutions");
}

// Flat parameter vector with named slots. Offsets are a function of the
// architecture only, so models with equal configs are directly comparable.
struct ParamLayout {
  int C = 0, K = 0, T2 = 0;
  int off_tc1_w = 0, off_tc1_b = 0;
  int off_theta = 0, off_sp_b = 0;
  int off_tc2_w = 0, off_tc2_b = 0;
  int off_head_w = 0, off_head_b = 0;
  int total = 0;

  explicit ParamLayout(const ArchConfig& a) {
    validate(a);
    C = a.hidden;
    K = a.kernel;
    T2 = a.input_steps - 2 * (a.kernel - 1);
    int off = 0;
    off_tc1_w = off;
    off += K * 2 * C;  // K taps of 1 x 2C
    off_tc1_b = off;
    off += 2 * C;
    off_theta = off;
    off += C * C;
    off_sp_b = off;
    off += C;
    off_tc2_w = off;
    off += K * C * 2 * C;  // K taps of C x 2C
    off_tc2_b = off;
    off += 2 * C;
    off_head_w = off;
    off += T2 * C;
    off_head_b = off;
    off += 1;
    total = off;
  }

  struct Slot {
    std::string name;
    int rows, cols, offset;
  };

  std::vector<Slot> slots() const {
    std::vector<Slot> s;
    for (int k = 0; k < K; ++k)
      s.push_back({"tconv1.w" + std::to_string(k), 1, 2 * C, off_tc1_w + k * 2 * C});
    s.push_back({"tconv1.b", 1, 2 * C, off_tc1_b});
    s.push_back({"spatial.theta", C, C, off_theta});
    s.push_back({"spatial.b", 1, C, off_sp_b});
    for (int k = 0; k < K; ++k)
      s.push_back({"tconv2.w" + std::to_string(k), C, 2 * C, off_tc2_w + k * C * 2 * C});
    s.push_back({"tconv2.b", 1, 2 * C, off_tc2_b});
    s.push_back({"head.w", T2, C, off_head_w});
    s.push_back({"head.b", 1, 1, off_head_b});
    return s;
  }
};

using ConstView = Eigen::Map<const Matrix>;
using View = Eigen::Map<Matrix>;

inline ConstView cview(const Vector& flat, int offset, int rows, int cols) {
  return ConstView(flat.data() + offset, rows, cols);
}
inline View view(Vector& flat, int offset, int rows, int cols) {
  return View(flat.data() + offset, rows, cols);
}

struct ModelParams {
  ArchConfig arch;
  NormStats norm;
  Vector flat;
};

// Glorot-uniform weights, zero biases. With zero head weights the output is
// the head bias alone, so an untrained head yields an input-independent
// forecast; initialisation keeps that property for the biases only.
inline ModelParams init_params(const ArchConfig& arch, const NormStats& norm, std::uint64_t seed) {
  if (!(norm.stddev > 0.0)) throw std::invalid_argument("init_params: stddev must be positive");
  ParamLayout L(arch);
  ModelParams p;
  p.arch = arch;
  p.norm = norm;
  p.flat = Vector::Zero(L.total);
  Rng rng(seed);
  auto fill = [&](int offset, int rows, int cols, double fan_in, double fan_out) {
    const double limit = std::sqrt(6.0 / (fan_in + fan_out));
    auto m = view(p.flat, offset, rows, cols);
    for (int c = 0; c < cols; ++c)
      for (int r = 0; r < rows; ++r) m(r, c) = rng.uniform(-limit, limit);
  };
  const int C = L.C, K = L.K;
  for (int k = 0; k < K; ++k) fill(L.off_tc1_w + k * 2 * C, 1, 2 * C, K, 2 * C);
  fill(L.off_theta, C, C, C, C);
  for (int k = 0; k < K; ++k) fill(L.off_tc2_w + k * C * 2 * C, C, 2 * C, K * C, 2 * C);
  fill(L.off_head_w, L.T2, C, L.T2 * C, 1);
  return p;
}

// D^{-1/2} (W + I) D^{-1/2} with D the row sums after adding self loops.
inline Matrix normalized_adjacency(const SensorGraph& g) {
  Matrix a = g.weights + Matrix::Identity(g.n, g.n);
  Vector d = a.rowwise().sum();
  Vector dinv = d.array().rsqrt();
  return dinv.asDiagonal() * a * dinv.asDiagonal();
}

struct ForecastModel {
  ModelParams params;
  SensorGraph graph;
  WindowSpec spec;
  Matrix a_hat;  // cached normalised adjacency
};

inline ForecastModel make_model(ModelParams params, SensorGraph graph, WindowSpec spec) {
  validate(graph);
  validate(spec);
  validate(params.arch);
  if (params.arch.sensors != graph.n)
    throw std::invalid_argument("model: parameters were trained for " +
                                std::to_string(params.arch.sensors) + " sensors, graph has " +
                                std::to_string(graph.n));
  if (params.arch.input_steps != spec.input_steps)
    throw std::invalid_argument("model: parameter window length does not match spec");
  ParamLayout L(params.arch);
  if (params.flat.size() != L.total) throw std::invalid_argument("model: parameter vector size mismatch");
  if (!params.flat.allFinite()) throw std::invalid_argument("model: parameters must be finite");
  if (!(params.norm.stddev > 0.0)) throw std::invalid_argument("model: stddev must be positive");
  ForecastModel m;
  m.params = std::move(params);
  m.spec = spec;
  m.a_hat = normalized_adjacency(graph);
  m.graph = std::move(graph);
  return m;
}

struct ForwardCache {
  Matrix xn;                       // normalised input, N x n
  std::vector<Matrix> p1, sq1;     // gate halves of the first temporal conv
  std::vector<Matrix> y1;
  std::vector<Matrix> ay;          // a_hat * y1[t]
  std::vector<Matrix> r1;          // relu output of the spatial conv
  std::vector<Matrix> p2, sq2;
  std::vector<Matrix> h2;
  Vector y_norm;
};

namespace detail {
inline Matrix sigmoid(const Matrix& x) { return (1.0 / (1.0 + (-x.array()).exp())).matrix(); }
}  // namespace detail

// One forecast step in km/h. Inputs may be arbitrary finite values: attack
// search deliberately probes outside the physical range.
inline Vector forecast_one_step(const ForecastModel& m, const Matrix& input, ForwardCache* cache = nullptr) {
  const int N = m.spec.input_steps, n = m.graph.n;
  if (input.rows() != N || input.cols() != n)
    throw std::invalid_argument("forecast: input must be " + std::to_string(N) + "x" + std::to_string(n));
  if (!input.allFinite()) throw std::invalid_argument("forecast: input must be finite");

  const ParamLayout L(m.params.arch);
  const int C = L.C, K = L.K, T1 = N - K + 1, T2 = L.T2;
  const Vector& flat = m.params.flat;
  ForwardCache local;
  ForwardCache& cc = cache ? *cache : local;

  cc.xn = (input.array() - m.params.norm.mean).matrix() / m.params.norm.stddev;

  const Vector ones = Vector::Ones(n);
  auto tc1_b = cview(flat, L.off_tc1_b, 1, 2 * C);
  cc.p1.assign(T1, Matrix());
  cc.sq1.assign(T1, Matrix());
  cc.y1.assign(T1, Matrix());
  for (int t = 0; t < T1; ++t) {
    Matrix s = ones * tc1_b;
    for (int k = 0; k < K; ++k) {
      auto w = cview(flat, L.off_tc1_w + k * 2 * C, 1, 2 * C);
      s.noalias() += cc.xn.row(t + k).transpose() * w;
    }
    cc.p1[t] = s.leftCols(C);
    cc.sq1[t] = detail::sigmoid(s.rightCols(C));
    cc.y1[t] = cc.p1[t].cwiseProduct(cc.sq1[t]);
  }

  auto theta = cview(flat, L.off_theta, C, C);
  auto sp_b = cview(flat, L.off_sp_b, 1, C);
  cc.ay.assign(T1, Matrix());
  cc.r1.assign(T1, Matrix());
  for (int t = 0; t < T1; ++t) {
    cc.ay[t].noalias() = m.a_hat * cc.y1[t];
    Matrix z = cc.ay[t] * theta;
    z.noalias() += ones * sp_b;
    cc.r1[t] = z.cwiseMax(0.0);
  }

  auto tc2_b = cview(flat, L.off_tc2_b, 1, 2 * C);
  cc.p2.assign(T2, Matrix());
  cc.sq2.assign(T2, Matrix());
  cc.h2.assign(T2, Matrix());
  for (int t = 0; t < T2; ++t) {
    Matrix s = ones * tc2_b;
    for (int k = 0; k < K; ++k) {
      auto w = cview(flat, L.off_tc2_w + k * C * 2 * C, C, 2 * C);
      s.noalias() += cc.r1[t + k] * w;
    }
    cc.p2[t] = s.leftCols(C);
    cc.sq2[t] = detail::sigmoid(s.rightCols(C));
    cc.h2[t] = cc.p2[t].cwiseProduct(cc.sq2[t]);
  }

  auto head_w = cview(flat, L.off_head_w, T2, C);
  const double head_b = flat[L.off_head_b];
  cc.y_norm = Vector::Constant(n, head_b);
  for (int t = 0; t < T2; ++t) cc.y_norm.noalias() += cc.h2[t] * head_w.row(t).transpose();

  return (cc.y_norm.array() * m.params.norm.stddev + m.params.norm.mean).matrix();
}

// Reverse pass. dout_kmh is the loss gradient at the km/h output; returns
// the gradient at the km/h input and, when param_grad is non-null,
// accumulates parameter gradients into it (same layout as params.flat).
inline Matrix backward_input(const ForecastModel& m, const ForwardCache& cc, const Vector& dout_kmh,
                             Vector* param_grad = nullptr) {
  const ParamLayout L(m.params.arch);
  const int N = m.spec.input_steps, n = m.graph.n;
  const int C = L.C, K = L.K, T1 = N - K + 1, T2 = L.T2;
  const Vector& flat = m.params.flat;
  if (dout_kmh.size() != n) throw std::invalid_argument("backward: gradient width mismatch");
  if (param_grad && param_grad->size() != L.total)
    throw std::invalid_argument("backward: parameter gradient size mismatch");

  const Vector dy = dout_kmh * m.params.norm.stddev;

  auto head_w = cview(flat, L.off_head_w, T2, C);
  std::vector<Matrix> dh2(static_cast<std::size_t>(T2));
  for (int t = 0; t < T2; ++t) dh2[static_cast<std::size_t>(t)].noalias() = dy * head_w.row(t);
  if (param_grad) {
    auto gw = view(*param_grad, L.off_head_w, T2, C);
    for (int t = 0; t < T2; ++t) gw.row(t).noalias() += dy.transpose() * cc.h2[static_cast<std::size_t>(t)];
    (*param_grad)[L.off_head_b] += dy.sum();
  }

  // second temporal conv
  std::vector<Matrix> dr1(static_cast<std::size_t>(T1), Matrix::Zero(n, C));
  for (int t = 0; t < T2; ++t) {
    const Matrix& p = cc.p2[static_cast<std::size_t>(t)];
    const Matrix& sq = cc.sq2[static_cast<std::size_t>(t)];
    const Matrix& dh = dh2[static_cast<std::size_t>(t)];
    Matrix ds(n, 2 * C);
    ds.leftCols(C) = dh.cwiseProduct(sq);
    ds.rightCols(C) = dh.cwiseProduct(p).cwiseProduct(sq).cwiseProduct(Matrix::Ones(n, C) - sq);
    for (int k = 0; k < K; ++k) {
      auto w = cview(flat, L.off_tc2_w + k * C * 2 * C, C, 2 * C);
      dr1[static_cast<std::size_t>(t + k)].noalias() += ds * w.transpose();
      if (param_grad) {
        auto gw = view(*param_grad, L.off_tc2_w + k * C * 2 * C, C, 2 * C);
        gw.noalias() += cc.r1[static_cast<std::size_t>(t + k)].transpose() * ds;
      }
    }
    if (param_grad) view(*param_grad, L.off_tc2_b, 1, 2 * C) += ds.colwise().sum();
  }

  // spatial conv (relu mask recovered from the cached output)
  auto theta = cview(flat, L.off_theta, C, C);
  std::vector<Matrix> dy1(static_cast<std::size_t>(T1));
  for (int t = 0; t < T1; ++t) {
    const Matrix& r = cc.r1[static_cast<std::size_t>(t)];
    Matrix dz = dr1[static_cast<std::size_t>(t)].cwiseProduct((r.array() > 0.0).cast<double>().matrix());
    if (param_grad) {
      auto gt = view(*param_grad, L.off_theta, C, C);
      gt.noalias() += cc.ay[static_cast<std::size_t>(t)].transpose() * dz;
      view(*param_grad, L.off_sp_b, 1, C) += dz.colwise().sum();
    }
    dy1[static_cast<std::size_t>(t)].noalias() = m.a_hat.transpose() * (dz * theta.transpose());
  }

  // first temporal conv
  Matrix dxn = Matrix::Zero(N, n);
  for (int t = 0; t < T1; ++t) {
    const Matrix& p = cc.p1[static_cast<std::size_t>(t)];
    const Matrix& sq = cc.sq1[static_cast<std::size_t>(t)];
    const Matrix& dh = dy1[static_cast<std::size_t>(t)];
    Matrix ds(n, 2 * C);
    ds.leftCols(C) = dh.cwiseProduct(sq);
    ds.rightCols(C) = dh.cwiseProduct(p).cwiseProduct(sq).cwiseProduct(Matrix::Ones(n, C) - sq);
    for (int k = 0; k < K; ++k) {
      auto w = cview(flat, L.off_tc1_w + k * 2 * C, 1, 2 * C);
      dxn.row(t + k).noalias() += (ds * w.transpose()).transpose();
      if (param_grad)
        view(*param_grad, L.off_tc1_w + k * 2 * C, 1, 2 * C).noalias() += cc.xn.row(t + k) * ds;
    }
    if (param_grad) view(*param_grad, L.off_tc1_b, 1, 2 * C) += ds.colwise().sum();
  }

  return dxn / m.params.norm.stddev;
}

// Recursive rollout: each prediction is appended to the window and the
// oldest row drops off, horizon_steps times.
inline Matrix forecast_recursive(const ForecastModel& m, const Matrix& input,
                                 std::vector<Matrix>* step_windows = nullptr,
                                 std::vector<ForwardCache>* step_caches = nullptr) {
  const int N = m.spec.input_steps, M = m.spec.horizon_steps, n = m.graph.n;
  Matrix out(M, n);
  Matrix cur = input;
  for (int k = 0; k < M; ++k) {
    if (step_windows) step_windows->push_back(cur);
    ForwardCache cache;
    const Vector y = forecast_one_step(m, cur, &cache);
    if (step_caches) step_caches->push_back(std::move(cache));
    out.row(k) = y.transpose();
    Matrix next(N, n);
    next.topRows(N - 1) = cur.bottomRows(N - 1);
    next.row(N - 1) = y.transpose();
    cur = std::move(next);
  }
  return out;
}

// Differentiable scalar of a forecast; implementations supply their own
// closed-form gradient with respect to the forecast matrix.
struct ForecastLoss {
  virtual ~ForecastLoss() = default;
  virtual double value(const Matrix& forecast) const = 0;
  virtual Matrix gradient(const Matrix& forecast) const = 0;
};

// sign * ||forecast - target||_2. sign=+1 pulls toward the target when
// minimised, sign=-1 pushes away.
struct L2ToTarget final : ForecastLoss {
  Matrix target;
  double sign;
  explicit L2ToTarget(Matrix t, double s = 1.0) : target(std::move(t)), sign(s) {}
  double value(const Matrix& f) const override { return sign * (f - target).norm(); }
  Matrix gradient(const Matrix& f) const override {
    Matrix r = f - target;
    const double nr = r.norm();
    if (nr == 0.0) return Matrix::Zero(f.rows(), f.cols());
    return (sign / nr) * r;
  }
};

enum class GradientMode { OneStep, Recursive };

// Exact gradient of loss(forecast(input)) with respect to the input window.
// Recursive mode backpropagates through the rollout, including the paths
// where predictions re-enter the window.
inline Matrix input_gradient(const ForecastModel& m, const Matrix& input, const ForecastLoss& loss,
                             GradientMode mode = GradientMode::OneStep) {
  const int N = m.spec.input_steps, n = m.graph.n;
  if (mode == GradientMode::OneStep) {
    ForwardCache cache;
    const Vector y = forecast_one_step(m, input, &cache);
    Matrix f(1, n);
    f.row(0) = y.transpose();
    const Matrix g = loss.gradient(f);
    if (g.rows() != 1 || g.cols() != n) throw std::invalid_argument("input_gradient: loss gradient shape mismatch");
    return backward_input(m, cache, g.row(0).transpose());
  }

  const int M = m.spec.horizon_steps;
  std::vector<Matrix> windows;
  std::vector<ForwardCache> caches;
  windows.reserve(static_cast<std::size_t>(M));
  caches.reserve(static_cast<std::size_t>(M));
  const Matrix f = forecast_recursive(m, input, &windows, &caches);
  const Matrix g = loss.gradient(f);
  if (g.rows() != M || g.cols() != n) throw std::invalid_argument("input_gradient: loss gradient shape mismatch");

  Matrix carry = Matrix::Zero(N, n);
  for (int k = M - 1; k >= 0; --k) {
    const Vector gy = g.row(k).transpose() + carry.row(N - 1).transpose();
    Matrix gx = backward_input(m, caches[static_cast<std::size_t>(k)], gy);
    gx.bottomRows(N - 1) += carry.topRows(N - 1);
    carry = std::move(gx);
  }
  return carry;
}

// ---- training ---------------------------------------------------------------

struct TrainConfig {
  int epochs = 30;
  int batch_size = 32;
  double learning_rate = 1e-3;
  int patience = 5;
  std::uint64_t seed = 0;
};

inline double validation_mape(const ForecastModel& m, const std::vector<Window>& windows,
                              double floor_kmh = 1.0) {
  if (windows.empty()) throw std::invalid_argument("validation_mape: no windows");
  double acc = 0.0;
  for (const auto& w : windows) {
    const Vector y = forecast_one_step(m, w.input);
    const Vector truth = w.target.row(0).transpose();
    double e = 0.0;
    for (int j = 0; j < y.size(); ++j) e += std::abs(y[j] - truth[j]) / std::max(truth[j], floor_kmh);
    acc += e / static_cast<double>(y.size()) * 100.0;
  }
  return acc / static_cast<double>(windows.size());
}

struct TrainResult {
  ModelParams params;
  double initial_val_mape = 0.0;
  double best_val_mape = 0.0;
  int best_epoch = 0;  // 0 = initialisation
  int epochs_run = 0;
  std::vector<double> val_mape_history;
};

// Adam on the one-step squared error in normalised units. Single-threaded,
// fixed shuffle order per seed, bit-reproducible.
inline TrainResult train(const ForecastModel& initial, const std::vector<Window>& train_windows,
                         const std::vector<Window>& val_windows, const TrainConfig& cfg) {
  if (train_windows.empty()) throw std::invalid_argument("train: no training windows");
  if (cfg.epochs < 0 || cfg.batch_size < 1) throw std::invalid_argument("train: bad config");
  const ParamLayout L(initial.params.arch);
  const int n = initial.graph.n;
  const double sd = initial.params.norm.stddev;

  ForecastModel model = initial;
  TrainResult res;
  res.initial_val_mape = validation_mape(model, val_windows);
  res.best_val_mape = res.initial_val_mape;
  res.params = model.params;

  Vector mom = Vector::Zero(L.total), vel = Vector::Zero(L.total);
  const double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  std::int64_t steps = 0;
  Rng rng(cfg.seed);
  std::vector<int> order(train_windows.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);

  int since_best = 0;
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    rng.shuffle(order);
    for (std::size_t b = 0; b < order.size(); b += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t ub = std::min(order.size(), b + static_cast<std::size_t>(cfg.batch_size));
      Vector grad = Vector::Zero(L.total);
      double batch_loss = 0.0;
      for (std::size_t i = b; i < ub; ++i) {
        const Window& w = train_windows[static_cast<std::size_t>(order[i])];
        ForwardCache cache;
        const Vector y = forecast_one_step(model, w.input, &cache);
        const Vector rn = (y - w.target.row(0).transpose()) / sd;
        batch_loss += rn.squaredNorm() / static_cast<double>(n);
        const Vector dout = rn * (2.0 / (static_cast<double>(n) * sd));
        backward_input(model, cache, dout, &grad);
      }
      const double count = static_cast<double>(ub - b);
      batch_loss /= count;
      if (!std::isfinite(batch_loss))
        throw std::runtime_error("train: diverged at epoch " + std::to_string(epoch));
      grad /= count;
      ++steps;
      const double c1 = 1.0 - std::pow(beta1, static_cast<double>(steps));
      const double c2 = 1.0 - std::pow(beta2, static_cast<double>(steps));
      mom = beta1 * mom + (1.0 - beta1) * grad;
      vel = beta2 * vel + (1.0 - beta2) * grad.cwiseProduct(grad);
      model.params.flat -=
          (cfg.learning_rate * (mom / c1).array() / ((vel / c2).array().sqrt() + eps)).matrix();
    }
    const double vm = validation_mape(model, val_windows);
    if (!std::isfinite(vm)) throw std::runtime_error("train: diverged at epoch " + std::to_string(epoch));
    res.val_mape_history.push_back(vm);
    res.epochs_run = epoch;
    if (vm < res.best_val_mape) {
      res.best_val_mape = vm;
      res.best_epoch = epoch;
      res.params = model.params;
      since_best = 0;
    } else if (++since_best >= cfg.patience) {
      break;
    }
  }
  return res;
}

// ---- parameter files --------------------------------------------------------
// Self-describing json: format tag, architecture, normalisation, one named
// array per slot (column-major). Doubles survive the round trip exactly.

inline void save_params(const ModelParams& p, const std::string& path) {
  ParamLayout L(p.arch);
  if (p.flat.size() != L.total) throw std::invalid_argument("save_params: size mismatch");
  nlohmann::json j;
  j["format"] = "sfa-model";
  j["format_version"] = 1;
  j["architecture"] = {{"hidden", p.arch.hidden},
                       {"kernel", p.arch.kernel},
                       {"input_steps", p.arch.input_steps},
                       {"sensors", p.arch.sensors}};
  j["normalization"] = {{"mean", p.norm.mean}, {"stddev", p.norm.stddev}};
  nlohmann::json slots = nlohmann::json::object();
  for (const auto& s : L.slots()) {
    std::vector<double> data(static_cast<std::size_t>(s.rows) * static_cast<std::size_t>(s.cols));
    auto v = cview(p.flat, s.offset, s.rows, s.cols);
    int idx = 0;
    for (int c = 0; c < s.cols; ++c)
      for (int r = 0; r < s.rows; ++r) data[static_cast<std::size_t>(idx++)] = v(r, c);
    slots[s.name] = {{"rows", s.rows}, {"cols", s.cols}, {"data", data}};
  }
  j["slots"] = std::move(slots);
  auto f = open_out(path);
  f << j.dump(1) << "\n";
}

inline ModelParams load_params(const std::string& path) {
  auto f = open_in(path);
  nlohmann::json j;
  try {
    f >> j;
  } catch (const std::exception& e) {
    throw std::runtime_error(path + ": not valid json: " + e.what());
  }
  if (j.value("format", "") != "sfa-model") throw std::runtime_error(path + ": not a model file");
  if (j.value("format_version", -1) != 1)
    throw std::runtime_error(path + ": unsupported format version");
  ModelParams p;
  const auto& a = j.at("architecture");
  p.arch.hidden = a.at("hidden").get<int>();
  p.arch.kernel = a.at("kernel").get<int>();
  p.arch.input_steps = a.at("input_steps").get<int>();
  p.arch.sensors = a.at("sensors").get<int>();
  p.norm.mean = j.at("normalization").at("mean").get<double>();
  p.norm.stddev = j.at("normalization").at("stddev").get<double>();
  ParamLayout L(p.arch);
  p.flat = Vector::Zero(L.total);
  const auto& slots = j.at("slots");
  const auto expected = L.slots();
  if (slots.size() != expected.size()) throw std::runtime_error(path + ": unexpected slot count");
  for (const auto& s : expected) {
    if (!slots.contains(s.name)) throw std::runtime_error(path + ": missing slot " + s.name);
    const auto& js = slots.at(s.name);
    if (js.at("rows").get<int>() != s.rows || js.at("cols").get<int>() != s.cols)
      throw std::runtime_error(path + ": shape mismatch in slot " + s.name);
    const auto data = js.at("data").get<std::vector<double>>();
    if (static_cast<int>(data.size()) != s.rows * s.cols)
      throw std::runtime_error(path + ": data length mismatch in slot " + s.name);
    auto v = view(p.flat, s.offset, s.rows, s.cols);
    int idx = 0;
    for (int c = 0; c < s.cols; ++c)
      for (int r = 0; r < s.rows; ++r) v(r, c) = data[static_cast<std::size_t>(idx++)];
  }
  return p;
}

}  // namespace sfa
