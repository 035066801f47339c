#include <catch2/catch_amalgamated.hpp>
#include <sfa/sfa.hpp>

#include "helpers.hpp"

using namespace sfa;

namespace {

const UniversalPerturbation& universal() {
  static const UniversalPerturbation u = [] {
    const auto& t = fixtures::trained();
    AttackConfig cfg;
    cfg.iters = 40;
    return fit_universal(t.model, t.val_windows, t.stats, cfg);
  }();
  return u;
}

}  // namespace

TEST_CASE("an impossible threshold counts nothing") {
  const auto& t = fixtures::trained();
  FilterConfig f;
  f.theta = 1e6;
  REQUIRE(weakness_at(t.model, t.val_windows[0].input, t.val_windows[0].target.row(0).transpose(),
                      universal(), 2, f) == 0);
}

TEST_CASE("weakness count matches a hand recount") {
  const auto& t = fixtures::trained();
  const auto& w = t.val_windows[1];
  const int sensor = 4;
  FilterConfig f;
  f.theta = 3.0;

  const int got = weakness_at(t.model, w.input, w.target.row(0).transpose(), universal(), sensor, f);

  Matrix poisoned = w.input;
  poisoned.col(sensor) += universal().delta.col(sensor);
  const Vector pred = forecast_one_step(t.model, poisoned);
  int expect = 0;
  for (int j = 0; j < pred.size(); ++j)
    if (std::abs(pred[j] - w.target(0, j)) > f.theta) ++expect;
  REQUIRE(got == expect);
}

TEST_CASE("weakness can be measured against the clean forecast") {
  const auto& t = fixtures::trained();
  const auto& w = t.val_windows[2];
  FilterConfig f;
  f.theta = 1.0;
  f.relative_to_clean = true;
  const int got = weakness_at(t.model, w.input, w.target.row(0).transpose(), universal(), 1, f);

  Matrix poisoned = w.input;
  poisoned.col(1) += universal().delta.col(1);
  const Vector pred = forecast_one_step(t.model, poisoned);
  const Vector clean = forecast_one_step(t.model, w.input);
  int expect = 0;
  for (int j = 0; j < pred.size(); ++j)
    if (std::abs(pred[j] - clean[j]) > f.theta) ++expect;
  REQUIRE(got == expect);
}

TEST_CASE("weakness is non-increasing in the threshold") {
  const auto& t = fixtures::trained();
  const auto& w = t.val_windows[0];
  FilterConfig f;
  int prev = t.series.graph.n + 1;
  for (double theta : {0.0, 1.0, 3.0, 6.0, 12.0, 1e6}) {
    f.theta = theta;
    const int c = weakness_at(t.model, w.input, w.target.row(0).transpose(), universal(), 3, f);
    REQUIRE(c <= prev);
    prev = c;
  }
}

TEST_CASE("aggregate is the euclidean norm of per-window counts") {
  const auto& t = fixtures::trained();
  FilterConfig f;
  f.theta = 2.0;
  const auto s = aggregate_weakness(t.model, t.val_windows, universal(), 5, f);
  REQUIRE(s.per_window.size() == t.val_windows.size());
  double acc = 0.0;
  for (int c : s.per_window) acc += static_cast<double>(c) * c;
  REQUIRE(s.aggregate == std::sqrt(acc));
  REQUIRE_THROWS_AS(aggregate_weakness(t.model, {}, universal(), 5, f), std::invalid_argument);
}

TEST_CASE("exhaustive scan returns the argmax and bills every forecast") {
  const auto& t = fixtures::trained();
  FilterConfig f;
  f.theta = 2.0;
  const auto res = locate_ct(t.model, t.val_windows, universal(), f);
  const int n = t.series.graph.n;
  REQUIRE(res.weakness_evaluations ==
          static_cast<long long>(n) * static_cast<long long>(t.val_windows.size()));
  REQUIRE(static_cast<int>(res.scores.size()) == n);
  for (const auto& [j, a] : res.scores) {
    REQUIRE(a <= res.aggregate);
    if (j < res.sensor) REQUIRE(a < res.aggregate);  // first argmax wins ties
  }
  REQUIRE(res.scores.at(res.sensor) == res.aggregate);
}

TEST_CASE("evolutionary search agrees with the scan and costs no more") {
  const auto& t = fixtures::trained();
  FilterConfig f;
  f.theta = 2.0;
  const auto ct = locate_ct(t.model, t.val_windows, universal(), f);

  DESearchConfig de;
  de.candidates = 4;
  de.max_generations = 10;
  de.seed = 3;
  const auto res = locate_de(t.model, t.val_windows, universal(), t.series.graph, de, f);
  REQUIRE(res.weakness_evaluations <= ct.weakness_evaluations);
  REQUIRE(res.generations_run >= 1);
  // elitism: never worse than the best degree-based seed
  std::vector<int> order(static_cast<std::size_t>(t.series.graph.n));
  for (std::size_t j = 0; j < order.size(); ++j) order[j] = static_cast<int>(j);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    const int da = t.series.graph.degree(a), db = t.series.graph.degree(b);
    if (da != db) return da > db;
    return a < b;
  });
  for (int i = 0; i < de.candidates; ++i)
    REQUIRE(res.aggregate >= ct.scores.at(order[static_cast<std::size_t>(i)]));
}

TEST_CASE("a candidate set as large as the graph reduces to the scan") {
  const auto& t = fixtures::trained();
  FilterConfig f;
  f.theta = 2.0;
  DESearchConfig de;
  de.candidates = t.series.graph.n;
  const auto res = locate_de(t.model, t.val_windows, universal(), t.series.graph, de, f);
  const auto ct = locate_ct(t.model, t.val_windows, universal(), f);
  REQUIRE(res.sensor == ct.sensor);
  REQUIRE(res.aggregate == ct.aggregate);
}

TEST_CASE("the evolutionary search is deterministic under its seed") {
  const auto& t = fixtures::trained();
  FilterConfig f;
  f.theta = 2.0;
  DESearchConfig de;
  de.candidates = 5;
  de.seed = 11;
  const auto a = locate_de(t.model, t.val_windows, universal(), t.series.graph, de, f);
  const auto b = locate_de(t.model, t.val_windows, universal(), t.series.graph, de, f);
  REQUIRE(a.sensor == b.sensor);
  REQUIRE(a.weakness_evaluations == b.weakness_evaluations);
  REQUIRE(a.generations_run == b.generations_run);
  REQUIRE(a.scores == b.scores);
}

TEST_CASE("search configuration is validated") {
  const auto& t = fixtures::trained();
  FilterConfig f;
  DESearchConfig de;
  de.candidates = t.series.graph.n + 1;
  REQUIRE_THROWS_AS(locate_de(t.model, t.val_windows, universal(), t.series.graph, de, f),
                    std::invalid_argument);
  de.candidates = 3;
  REQUIRE_THROWS_AS(locate_de(t.model, t.val_windows, universal(), t.series.graph, de, f),
                    std::invalid_argument);
  auto no_pos = t.series.graph;
  no_pos.positions.clear();
  de.candidates = 5;
  REQUIRE_THROWS_AS(locate_de(t.model, t.val_windows, universal(), no_pos, de, f),
                    std::invalid_argument);
  FilterConfig neg;
  neg.theta = -1.0;
  REQUIRE_THROWS_AS(weakness_at(t.model, t.val_windows[0].input,
                                t.val_windows[0].target.row(0).transpose(), universal(), 0, neg),
                    std::invalid_argument);
}

TEST_CASE("structural baselines pick hub and heaviest row") {
  // star with four leaves; the hub has the most edges, but leaves 1 and 2
  // carry a heavy edge so the weighted centrality prefers them
  const int n = 5;
  Matrix w = Matrix::Zero(n, n);
  for (int leaf = 1; leaf < n; ++leaf) {
    w(0, leaf) = 0.1;
    w(leaf, 0) = 0.1;
  }
  w(1, 2) = w(2, 1) = 0.9;
  std::vector<LonLat> pos;
  for (int i = 0; i < n; ++i) pos.push_back({0.01 * i, 0.02 * i});
  const auto g = make_graph(w, pos);
  REQUIRE(locate_deg(g) == 0);
  REQUIRE(locate_cen(g) == 1);  // 0.1 + 0.9 beats the hub's 0.4
}

TEST_CASE("subsampling keeps order and membership") {
  const auto& t = fixtures::trained();
  const auto all = sliding_windows(t.series, t.spec, t.split.validation);
  const auto sub = subsample_windows(all, 10, 21);
  REQUIRE(sub.size() == 10);
  for (std::size_t i = 1; i < sub.size(); ++i) REQUIRE(sub[i - 1].start < sub[i].start);
  for (const auto& w : sub) {
    const auto it = std::find_if(all.begin(), all.end(),
                                 [&](const Window& o) { return o.start == w.start; });
    REQUIRE(it != all.end());
    REQUIRE(it->input == w.input);
  }
  // asking for at least as many as exist returns the set unchanged
  REQUIRE(subsample_windows(all, static_cast<int>(all.size()), 5).size() == all.size());
  REQUIRE_THROWS_AS(subsample_windows(all, 0, 1), std::invalid_argument);

  const auto again = subsample_windows(all, 10, 21);
  for (std::size_t i = 0; i < sub.size(); ++i) REQUIRE(again[i].start == sub[i].start);
}
