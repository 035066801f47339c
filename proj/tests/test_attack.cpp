#include <catch2/catch_amalgamated.hpp>
#include <sfa/sfa.hpp>

#include "helpers.hpp"

using namespace sfa;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

Vector opposite_of_last_row(const Matrix& window, const DatasetStats& stats) {
  return inverse_estimate(window.row(window.rows() - 1).transpose(), stats).values;
}

}  // namespace

TEST_CASE("objective at zero perturbation is the plain distance") {
  const auto& t = fixtures::trained();
  const Matrix& w = t.test_windows[0].input;
  const Vector target = opposite_of_last_row(w, t.stats);
  Perturbation zero{Matrix::Zero(w.rows(), w.cols())};
  AttackConfig cfg;
  const double obj = objective_inverse(t.model, w, zero, target, cfg);
  const double dist = (forecast_one_step(t.model, w) - target).norm();
  REQUIRE(obj == dist);
}

TEST_CASE("hinge penalty prices each entry past the bound") {
  const double xi = 225.0, alpha = 1e4;
  Matrix d = Matrix::Zero(3, 4);
  d(1, 2) = std::sqrt(xi);
  REQUIRE(hinge_penalty(d, xi, alpha) == 0.0);
  d(1, 2) = std::sqrt(xi + 1.0);
  REQUIRE_THAT(hinge_penalty(d, xi, alpha), WithinRel(alpha, 1e-12));
  d(0, 0) = -std::sqrt(xi + 2.0);
  REQUIRE_THAT(hinge_penalty(d, xi, alpha), WithinRel(3.0 * alpha, 1e-12));
}

TEST_CASE("objective matches an independent recomposition") {
  const auto& t = fixtures::trained();
  const Matrix& w = t.test_windows[1].input;
  const Vector target = opposite_of_last_row(w, t.stats);
  Rng rng(77);
  Matrix d(w.rows(), w.cols());
  for (int i = 0; i < d.rows(); ++i)
    for (int j = 0; j < d.cols(); ++j) d(i, j) = rng.uniform(-20.0, 20.0);
  AttackConfig cfg;
  cfg.xi = 100.0;
  cfg.alpha = 3.5;
  const double obj = objective_inverse(t.model, w, Perturbation{d}, target, cfg);

  double recomposed = (forecast_one_step(t.model, w + d) - target).norm();
  for (int i = 0; i < d.rows(); ++i)
    for (int j = 0; j < d.cols(); ++j)
      recomposed += cfg.alpha * std::max(0.0, d(i, j) * d(i, j) - cfg.xi);
  REQUIRE_THAT(obj, WithinRel(recomposed, 1e-12));
}

TEST_CASE("zero iterations return the zero perturbation") {
  const auto& t = fixtures::trained();
  const Matrix& w = t.test_windows[0].input;
  AttackConfig cfg;
  cfg.iters = 0;
  const auto p = solve_full_graph_attack(t.model, w, opposite_of_last_row(w, t.stats), cfg);
  REQUIRE(p.delta == Matrix::Zero(w.rows(), w.cols()));
}

TEST_CASE("the first iteration already improves the objective") {
  const auto& t = fixtures::trained();
  const Matrix& w = t.test_windows[2].input;
  const Vector target = opposite_of_last_row(w, t.stats);
  AttackConfig cfg;
  cfg.iters = 1;
  const auto p = solve_full_graph_attack(t.model, w, target, cfg);
  const Perturbation zero{Matrix::Zero(w.rows(), w.cols())};
  REQUIRE(objective_inverse(t.model, w, p, target, cfg) <
          objective_inverse(t.model, w, zero, target, cfg));
}

TEST_CASE("solutions respect the scale bound exactly") {
  const auto& t = fixtures::trained();
  AttackConfig cfg;
  cfg.xi = 64.0;
  cfg.iters = 40;
  for (const auto& win : t.test_windows) {
    const auto p = solve_full_graph_attack(t.model, win.input,
                                           opposite_of_last_row(win.input, t.stats), cfg);
    REQUIRE(p.delta.cwiseAbs().maxCoeff() <= std::sqrt(cfg.xi));
  }
}

TEST_CASE("a large penalty keeps iterates essentially feasible") {
  const auto& t = fixtures::trained();
  const Matrix& w = t.test_windows[3].input;
  AttackConfig cfg;
  cfg.alpha = 1e6;
  cfg.iters = 60;
  const auto p = solve_full_graph_attack(t.model, w, opposite_of_last_row(w, t.stats), cfg);
  const double worst = p.delta.cwiseAbs().maxCoeff();
  REQUIRE(worst * worst - cfg.xi <= 1e-3 * cfg.xi);
}

TEST_CASE("single-sensor attack touches exactly one column") {
  const auto& t = fixtures::trained();
  const Matrix& w = t.test_windows[0].input;
  const Vector target = opposite_of_last_row(w, t.stats);
  const SpatialMask mask{3};
  AttackConfig cfg;
  cfg.iters = 30;
  const auto p = solve_sfa(t.model, w, target, mask, cfg);
  for (int j = 0; j < p.delta.cols(); ++j) {
    if (j == mask.sensor) continue;
    REQUIRE(p.delta.col(j).cwiseAbs().maxCoeff() == 0.0);
  }
  REQUIRE(p.delta.col(mask.sensor).cwiseAbs().maxCoeff() > 0.0);
  // non-increasing objective vs the clean window
  const Perturbation zero{Matrix::Zero(w.rows(), w.cols())};
  REQUIRE(objective_inverse(t.model, w, p, target, cfg) <=
          objective_inverse(t.model, w, zero, target, cfg));
}

TEST_CASE("masking validates the sensor index") {
  Matrix d = Matrix::Ones(2, 3);
  REQUIRE_THROWS_AS(masked(d, SpatialMask{3}), std::invalid_argument);
  REQUIRE_THROWS_AS(masked(d, SpatialMask{-1}), std::invalid_argument);
  const Matrix kept = masked(d, SpatialMask{1});
  REQUIRE(kept.col(1) == d.col(1));
  REQUIRE(kept.col(0).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("universal fit on one window equals the full-graph solve") {
  const auto& t = fixtures::trained();
  std::vector<Window> one{t.val_windows[0]};
  AttackConfig cfg;
  cfg.iters = 25;
  const auto u = fit_universal(t.model, one, t.stats, cfg);
  const auto p = solve_full_graph_attack(
      t.model, one[0].input, opposite_of_last_row(one[0].input, t.stats), cfg);
  REQUIRE(u.delta == p.delta);
}

TEST_CASE("universal perturbation stays inside the box and transfers") {
  const auto& t = fixtures::trained();
  AttackConfig cfg;
  cfg.iters = 60;
  const auto u = fit_universal(t.model, t.val_windows, t.stats, cfg);
  REQUIRE(u.delta.cwiseAbs().maxCoeff() <= std::sqrt(cfg.xi));

  // applied unchanged to held-out windows it still hurts the forecast
  double clean = 0.0, attacked = 0.0;
  for (const auto& win : t.test_windows) {
    Matrix truth(1, t.series.graph.n);
    truth.row(0) = win.target.row(0);
    Matrix pred(1, t.series.graph.n);
    pred.row(0) = forecast_one_step(t.model, win.input).transpose();
    clean += mape(pred, truth);
    pred.row(0) =
        forecast_one_step(t.model, apply_perturbation(win.input, {u.delta}, t.stats)).transpose();
    attacked += mape(pred, truth);
  }
  REQUIRE(attacked > clean);
}

TEST_CASE("universal fit can be tied across lags") {
  const auto& t = fixtures::trained();
  AttackConfig cfg;
  cfg.iters = 15;
  UniversalOptions opts;
  opts.broadcast_rows = true;
  const auto u = fit_universal(t.model, t.val_windows, t.stats, cfg, opts);
  for (int i = 1; i < u.delta.rows(); ++i) REQUIRE(u.delta.row(i) == u.delta.row(0));
}

TEST_CASE("sign attack quantises the gradient") {
  const auto& t = fixtures::trained();
  const Matrix& w = t.test_windows[1].input;
  const Vector target = opposite_of_last_row(w, t.stats);
  MFGSMConfig cfg;
  cfg.epsilon = 2.0;
  const auto p = mfgsm(t.model, w, target, cfg);

  Matrix tm(1, target.size());
  tm.row(0) = target.transpose();
  const Matrix g = input_gradient(t.model, w, L2ToTarget(tm, -1.0), GradientMode::OneStep);
  for (int i = 0; i < p.delta.rows(); ++i)
    for (int j = 0; j < p.delta.cols(); ++j) {
      const double v = p.delta(i, j);
      REQUIRE((v == cfg.epsilon || v == -cfg.epsilon || v == 0.0));
      if (g(i, j) > 0.0) REQUIRE(v == cfg.epsilon);
      if (g(i, j) < 0.0) REQUIRE(v == -cfg.epsilon);
    }
  REQUIRE_THROWS_AS(mfgsm(t.model, w, target, MFGSMConfig{0.0}), std::invalid_argument);
  REQUIRE_THROWS_AS(mfgsm(t.model, w, target, MFGSMConfig{-1.0}), std::invalid_argument);
}

TEST_CASE("noise baseline hits one sensor with clipped gaussian noise") {
  const double xi = 225.0;
  const auto a = gwn_baseline(12, 8, SpatialMask{5}, xi, 99);
  const auto b = gwn_baseline(12, 8, SpatialMask{5}, xi, 99);
  REQUIRE(a.delta == b.delta);
  const auto c = gwn_baseline(12, 8, SpatialMask{5}, xi, 100);
  REQUIRE(a.delta != c.delta);
  for (int j = 0; j < 8; ++j)
    if (j != 5) REQUIRE(a.delta.col(j).cwiseAbs().maxCoeff() == 0.0);
  REQUIRE(a.delta.col(5).cwiseAbs().maxCoeff() <= std::sqrt(xi));
  REQUIRE(a.delta.col(5).cwiseAbs().minCoeff() > 0.0);
  REQUIRE_THROWS_AS(gwn_baseline(12, 8, SpatialMask{8}, xi, 1), std::invalid_argument);
  REQUIRE_THROWS_AS(gwn_baseline(12, 8, SpatialMask{0}, 0.0, 1), std::invalid_argument);
}

TEST_CASE("clipped noise has the closed-form standard deviation") {
  // std of N(0, s) clipped to [-s, s] is 0.718372 s
  const double xi = 225.0, bound = std::sqrt(xi);
  const int rows = 40000;
  const auto p = gwn_baseline(rows, 1, SpatialMask{0}, xi, 4242);
  const double mean = p.delta.col(0).mean();
  double var = 0.0;
  for (int i = 0; i < rows; ++i) var += (p.delta(i, 0) - mean) * (p.delta(i, 0) - mean);
  var /= rows;
  REQUIRE_THAT(std::sqrt(var), WithinRel(0.718372 * bound, 0.02));
}

TEST_CASE("perturbed windows stay physical") {
  const auto& t = fixtures::trained();
  const Matrix& w = t.test_windows[0].input;
  const double cap = 1.2 * t.stats.v_max;

  Perturbation up{Matrix::Constant(w.rows(), w.cols(), 500.0)};
  const Matrix hi = apply_perturbation(w, up, t.stats);
  REQUIRE(hi.maxCoeff() <= cap);
  REQUIRE(hi.minCoeff() >= 0.0);

  Perturbation down{Matrix::Constant(w.rows(), w.cols(), -500.0)};
  REQUIRE(apply_perturbation(w, down, t.stats).maxCoeff() == 0.0);

  Perturbation zero{Matrix::Zero(w.rows(), w.cols())};
  REQUIRE(apply_perturbation(w, zero, t.stats) == w.cwiseMax(0.0).cwiseMin(cap));

  Perturbation bad{Matrix::Zero(w.rows() - 1, w.cols())};
  REQUIRE_THROWS_AS(apply_perturbation(w, bad, t.stats), std::invalid_argument);
}

TEST_CASE("a numerically exploding model is reported with the iteration") {
  auto m = fixtures::probe_model();
  m.params.flat *= 1e150;  // finite parameters, infinite activations
  const Matrix w = fixtures::probe_window(m);
  AttackConfig cfg;
  cfg.iters = 3;
  REQUIRE_THROWS_WITH(
      solve_full_graph_attack(m, w, Vector::Zero(m.graph.n), cfg),
      ContainsSubstring("not finite") && ContainsSubstring("iteration 0"));
}

TEST_CASE("attack config validation") {
  AttackConfig bad;
  bad.xi = 0.0;
  REQUIRE_THROWS_AS(validate(bad), std::invalid_argument);
  bad = {};
  bad.step_size = 0.0;
  REQUIRE_THROWS_AS(validate(bad), std::invalid_argument);
  bad = {};
  bad.iters = -1;
  REQUIRE_THROWS_AS(validate(bad), std::invalid_argument);
  bad = {};
  bad.alpha = -1.0;
  REQUIRE_THROWS_AS(validate(bad), std::invalid_argument);
}
