#pragma once

#include <sfa/sfa.hpp>

#include <filesystem>
#include <unistd.h>

// Shared fixtures. Everything is seeded and small; the trained setup is
// built once per binary and reused by the attack/weakness/pipeline suites.

namespace fixtures {

struct TempDir {
  std::filesystem::path path;
  TempDir() {
    path = std::filesystem::temp_directory_path() /
           ("sfa_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter()++));
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
  static int& counter() {
    static int c = 0;
    return c;
  }
};

struct TrainedSetup {
  sfa::GraphSeries series;
  sfa::WindowSpec spec;
  sfa::DatasetSplit split;
  sfa::DatasetStats stats;
  sfa::ForecastModel model;
  std::vector<sfa::Window> val_windows;
  std::vector<sfa::Window> test_windows;
};

inline const TrainedSetup& trained() {
  static const TrainedSetup s = [] {
    sfa::SynthConfig cfg;
    cfg.sensors = 8;
    cfg.days = 2;
    cfg.seed = 7;
    const auto g = sfa::synth_graph(cfg);
    auto series = sfa::synth_series(g.graph, cfg);
    TrainedSetup t;
    t.spec = {12, 3};
    t.split = sfa::split(series, 0.7, 0.1, 0.2, t.spec);
    t.stats = sfa::dataset_stats(series, t.split.train);
    const auto norm = sfa::norm_stats(series, t.split.train);
    sfa::ArchConfig arch{12, 3, 12, series.graph.n};
    auto params = sfa::init_params(arch, norm, 11);
    auto model = sfa::make_model(std::move(params), series.graph, t.spec);
    auto train_w = sfa::sliding_windows(series, t.spec, t.split.train);
    auto val_w = sfa::sliding_windows(series, t.spec, t.split.validation);
    sfa::TrainConfig tc;
    tc.epochs = 3;
    tc.seed = 5;
    const auto res = sfa::train(model, train_w, val_w, tc);
    t.model = sfa::make_model(res.params, series.graph, t.spec);
    t.val_windows = sfa::pipeline::select_eval_windows(series, t.spec, t.split.validation, 6);
    t.test_windows = sfa::pipeline::select_eval_windows(series, t.spec, t.split.test, 8);
    t.series = std::move(series);
    return t;
  }();
  return s;
}

// Small handmade ring-with-chords graph, untrained seeded parameters.
inline sfa::ForecastModel probe_model(int n = 5, int input_steps = 6, int horizon = 2,
                                      int hidden = 6, std::uint64_t seed = 3) {
  sfa::Matrix w = sfa::Matrix::Zero(n, n);
  std::vector<sfa::LonLat> pos;
  for (int i = 0; i < n; ++i) {
    const int j = (i + 1) % n;
    w(i, j) = 0.6 + 0.05 * i;
    w(j, i) = w(i, j);
    if (n > 3) {
      const int k = (i + 2) % n;
      w(i, k) = std::max(w(i, k), 0.2);
      w(k, i) = w(i, k);
    }
    pos.push_back({0.1 * i, 0.05 * i * i});
  }
  auto graph = sfa::make_graph(w, pos);
  sfa::NormStats norm{50.0, 10.0};
  sfa::ArchConfig arch{hidden, 3, input_steps, n};
  return sfa::make_model(sfa::init_params(arch, norm, seed), graph,
                         sfa::WindowSpec{input_steps, horizon});
}

inline sfa::Matrix probe_window(const sfa::ForecastModel& m, std::uint64_t seed = 17) {
  sfa::Rng rng(seed);
  sfa::Matrix x(m.spec.input_steps, m.graph.n);
  for (int i = 0; i < x.rows(); ++i)
    for (int j = 0; j < x.cols(); ++j) x(i, j) = 30.0 + 40.0 * rng.uniform();
  return x;
}

}  // namespace fixtures
