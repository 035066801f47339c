// sfalab: synthesise a sensor dataset, train the reference forecaster, fit a
// universal perturbation, locate the weakest vertex and evaluate single-vertex
// attacks on held-out windows. Every command reads and extends manifest.json
// in the run directory.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <sfa/sfa.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json load_config_file(int argc, char** argv) {
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    std::string path;
    if (a == "--config" && i + 1 < argc) path = argv[i + 1];
    if (a.rfind("--config=", 0) == 0) path = a.substr(9);
    if (!path.empty()) {
      auto f = sfa::open_in(path);
      json j;
      f >> j;
      if (!j.is_object()) throw std::invalid_argument("config: top level must be a json object");
      return j;
    }
  }
  return json::object();
}

// Precedence: defaults, then top-level config keys, then the subcommand's
// section, then flags (CLI11 overwrites after seeding).
class Layered {
 public:
  Layered(json file, std::string sub) : file_(std::move(file)), sub_(std::move(sub)) {}

  template <class T>
  void seed(const std::string& key, T& var) const {
    if (file_.contains(key) && !file_.at(key).is_object()) var = file_.at(key).get<T>();
    if (!sub_.empty() && file_.contains(sub_) && file_.at(sub_).is_object() &&
        file_.at(sub_).contains(key))
      var = file_.at(sub_).at(key).get<T>();
  }

 private:
  json file_;
  std::string sub_;
};

sfa::IndexRange range_from(const json& j) {
  return {j.at(0).get<int>(), j.at(1).get<int>()};
}

json range_to(const sfa::IndexRange& r) { return json::array({r.begin, r.end}); }

// Evenly strided chronological subset, at most cap windows.
std::vector<sfa::Window> strided_cap(std::vector<sfa::Window> windows, int cap) {
  if (cap < 1) throw std::invalid_argument("window cap must be positive");
  const int size = static_cast<int>(windows.size());
  if (size <= cap) return windows;
  std::vector<sfa::Window> out;
  out.reserve(static_cast<std::size_t>(cap));
  for (int i = 0; i < cap; ++i)
    out.push_back(std::move(windows[static_cast<std::size_t>(
        static_cast<long long>(i) * size / cap)]));
  return out;
}

void write_lag_matrix_csv(const std::string& path, const sfa::Matrix& m) {
  auto f = sfa::open_out(path);
  f << "lag";
  for (int j = 0; j < m.cols(); ++j) f << ",s" << j;
  f << "\n";
  char buf[40];
  for (int i = 0; i < m.rows(); ++i) {
    f << i;
    for (int j = 0; j < m.cols(); ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", m(i, j));
      f << ',' << buf;
    }
    f << "\n";
  }
}

sfa::Matrix read_lag_matrix_csv(const std::string& path) {
  auto f = sfa::open_in(path);
  std::string line;
  if (!std::getline(f, line)) throw std::invalid_argument(path + ": empty file");
  const auto header = sfa::split_csv_line(line);
  if (header.size() < 2 || header[0] != "lag")
    throw std::invalid_argument(path + ": expected a lag matrix header");
  const int n = static_cast<int>(header.size()) - 1;
  std::vector<std::vector<double>> rows;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    const auto tok = sfa::split_csv_line(line);
    if (static_cast<int>(tok.size()) != n + 1)
      throw std::invalid_argument(path + ": ragged row");
    std::vector<double> r(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) r[static_cast<std::size_t>(j)] = sfa::parse_double(tok[static_cast<std::size_t>(j) + 1], path);
    rows.push_back(std::move(r));
  }
  if (rows.empty()) throw std::invalid_argument(path + ": no data rows");
  sfa::Matrix m(static_cast<int>(rows.size()), n);
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < n; ++j) m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  return m;
}

const json& require(const json& man, const std::string& key, const std::string& hint) {
  if (!man.contains(key)) throw std::invalid_argument(hint);
  return man.at(key);
}

struct LoadedRun {
  sfa::GraphSeries series;
  sfa::WindowSpec spec;
  sfa::DatasetSplit split;
  sfa::DatasetStats stats;
  sfa::ForecastModel model;
};

// Everything the downstream stages need, rebuilt from the run directory and
// the manifest's train section.
LoadedRun load_run(const std::string& run, const json& man) {
  const json& tr = require(man, "train", "run 'train' before this command");
  const json& cfg = tr.at("config");
  LoadedRun r;
  r.series = sfa::load_dataset(run, cfg.at("sigma").get<double>(), cfg.at("kappa").get<double>());
  r.spec.input_steps = cfg.at("input_steps").get<int>();
  r.spec.horizon_steps = cfg.at("horizon").get<int>();
  r.split.train = range_from(tr.at("split").at("train"));
  r.split.validation = range_from(tr.at("split").at("validation"));
  r.split.test = range_from(tr.at("split").at("test"));
  r.stats.v_min = tr.at("stats").at("v_min").get<double>();
  r.stats.v_max = tr.at("stats").at("v_max").get<double>();
  r.stats.v_mid = tr.at("stats").at("v_mid").get<double>();
  auto params = sfa::load_params(run + "/" + tr.at("model_file").get<std::string>());
  r.model = sfa::make_model(std::move(params), r.series.graph, r.spec);
  return r;
}

int cmd_synth(const std::string& run, const sfa::SynthConfig& cfg) {
  fs::create_directories(run);
  const auto g = sfa::synth_graph(cfg);
  const auto series = sfa::synth_series(g.graph, cfg);
  sfa::write_speeds_csv(run + "/speeds.csv", series);
  sfa::write_distances_csv(run + "/distances.csv", g.distances);
  sfa::write_positions_csv(run + "/positions.csv", g.graph.positions);

  json man = sfa::load_manifest(run);
  json c;
  c["sensors"] = cfg.sensors;
  c["days"] = cfg.days;
  c["interval"] = cfg.interval_minutes;
  c["free_flow"] = cfg.free_flow_kmh;
  c["daily_dip"] = cfg.daily_dip_kmh;
  c["event_rate"] = cfg.event_rate_per_day;
  c["event_depth"] = cfg.event_depth_kmh;
  c["event_duration"] = cfg.event_duration_min;
  c["diffusion"] = cfg.diffusion;
  c["noise_std"] = cfg.noise_std_kmh;
  c["radius"] = cfg.radius;
  c["kappa"] = cfg.kappa;
  c["seed"] = cfg.seed;
  man["dataset"] = {{"source", "synth"},
                    {"config", c},
                    {"sensors", g.graph.n},
                    {"steps", series.length()},
                    {"interval_minutes", series.interval_minutes},
                    {"hashes",
                     {{"speeds.csv", sfa::file_hash(run + "/speeds.csv")},
                      {"distances.csv", sfa::file_hash(run + "/distances.csv")},
                      {"positions.csv", sfa::file_hash(run + "/positions.csv")}}}};
  sfa::save_manifest(run, man);
  std::cout << "synth: " << g.graph.n << " sensors, " << series.length() << " steps -> " << run
            << "\n";
  return 0;
}

struct TrainFlags {
  int epochs = 30, batch = 32, patience = 5, hidden = 32, kernel = 3;
  int input_steps = 12, horizon = 3;
  double lr = 1e-3, train_frac = 0.7, val_frac = 0.1, test_frac = 0.2;
  double sigma = 0.0, kappa = 0.1;
  int max_train_windows = 1500, max_val_windows = 256;
  std::uint64_t seed = 0;
};

int cmd_train(const std::string& run, const TrainFlags& f) {
  json man = sfa::load_manifest(run);
  require(man, "dataset", "run 'synth' (or place dataset files) before 'train'");
  auto series = sfa::load_dataset(run, f.sigma, f.kappa);
  sfa::WindowSpec spec{f.input_steps, f.horizon};
  const auto sp = sfa::split(series, f.train_frac, f.val_frac, f.test_frac, spec);
  const auto stats = sfa::dataset_stats(series, sp.train);
  const auto norm = sfa::norm_stats(series, sp.train);

  auto train_w = strided_cap(sfa::sliding_windows(series, spec, sp.train), f.max_train_windows);
  auto val_w = strided_cap(sfa::sliding_windows(series, spec, sp.validation), f.max_val_windows);

  sfa::ArchConfig arch{f.hidden, f.kernel, f.input_steps, series.graph.n};
  auto params = sfa::init_params(arch, norm, sfa::derive_seed(f.seed, 0));
  auto model = sfa::make_model(std::move(params), series.graph, spec);
  sfa::TrainConfig tc{f.epochs, f.batch, f.lr, f.patience, sfa::derive_seed(f.seed, 1)};
  const auto res = sfa::train(model, train_w, val_w, tc);
  sfa::save_params(res.params, run + "/model.json");

  json cfg;
  cfg["epochs"] = f.epochs;
  cfg["batch"] = f.batch;
  cfg["lr"] = f.lr;
  cfg["patience"] = f.patience;
  cfg["hidden"] = f.hidden;
  cfg["kernel"] = f.kernel;
  cfg["input_steps"] = f.input_steps;
  cfg["horizon"] = f.horizon;
  cfg["train_frac"] = f.train_frac;
  cfg["val_frac"] = f.val_frac;
  cfg["test_frac"] = f.test_frac;
  cfg["sigma"] = f.sigma;
  cfg["kappa"] = f.kappa;
  cfg["max_train_windows"] = f.max_train_windows;
  cfg["max_val_windows"] = f.max_val_windows;
  cfg["seed"] = f.seed;
  man["train"] = {{"config", cfg},
                  {"split",
                   {{"train", range_to(sp.train)},
                    {"validation", range_to(sp.validation)},
                    {"test", range_to(sp.test)}}},
                  {"norm", {{"mean", res.params.norm.mean}, {"stddev", res.params.norm.stddev}}},
                  {"stats",
                   {{"v_min", stats.v_min}, {"v_max", stats.v_max}, {"v_mid", stats.v_mid}}},
                  {"model_file", "model.json"},
                  {"initial_val_mape", res.initial_val_mape},
                  {"best_val_mape", res.best_val_mape},
                  {"best_epoch", res.best_epoch},
                  {"epochs_run", res.epochs_run},
                  {"val_mape_history", res.val_mape_history}};
  sfa::save_manifest(run, man);
  std::printf("train: val mape %.2f%% (initial %.2f%%), best epoch %d of %d -> model.json\n",
              res.best_val_mape, res.initial_val_mape, res.best_epoch, res.epochs_run);
  return 0;
}

struct UniversalFlags {
  double sqrt_xi = 15.0, alpha = 1e4, step = 0.5;
  int iters = 100, windows = 64;
  bool broadcast = false;
  std::uint64_t seed = 0;
};

int cmd_universal(const std::string& run, const UniversalFlags& f) {
  json man = sfa::load_manifest(run);
  auto r = load_run(run, man);
  const auto windows =
      sfa::pipeline::select_eval_windows(r.series, r.spec, r.split.validation, f.windows);
  sfa::AttackConfig ac{f.sqrt_xi * f.sqrt_xi, f.alpha, f.iters, f.step, f.seed};
  const auto rho = sfa::fit_universal(r.model, windows, r.stats, ac, {f.broadcast});
  write_lag_matrix_csv(run + "/universal.csv", rho.delta);

  json cfg;
  cfg["sqrt_xi"] = f.sqrt_xi;
  cfg["alpha"] = f.alpha;
  cfg["iters"] = f.iters;
  cfg["step"] = f.step;
  cfg["windows"] = f.windows;
  cfg["broadcast"] = f.broadcast;
  cfg["seed"] = f.seed;
  man["universal"] = {{"config", cfg},
                      {"windows_used", static_cast<int>(windows.size())},
                      {"file", "universal.csv"},
                      {"max_abs", rho.delta.cwiseAbs().maxCoeff()}};
  sfa::save_manifest(run, man);
  std::printf("universal: fitted on %d validation windows, max |rho| %.3f -> universal.csv\n",
              static_cast<int>(windows.size()), rho.delta.cwiseAbs().maxCoeff());
  return 0;
}

struct LocateFlags {
  std::string strategy = "de";
  int candidates = 10, generations = 10, subsample = 50;
  double weight = 0.5, theta = 5.0;
  bool relative_to_clean = false;
  std::uint64_t seed = 0;
};

int cmd_locate(const std::string& run, const LocateFlags& f) {
  if (f.strategy != "de" && f.strategy != "ct" && f.strategy != "deg" && f.strategy != "cen")
    throw std::invalid_argument("locate: unknown strategy '" + f.strategy + "'");
  json man = sfa::load_manifest(run);
  auto r = load_run(run, man);

  sfa::LocateResult res;
  if (f.strategy == "deg") {
    res.sensor = sfa::locate_deg(r.series.graph);
  } else if (f.strategy == "cen") {
    res.sensor = sfa::locate_cen(r.series.graph);
  } else {
    if (!fs::exists(run + "/universal.csv"))
      throw std::invalid_argument("locate: run 'universal' before strategy '" + f.strategy + "'");
    sfa::UniversalPerturbation rho{read_lag_matrix_csv(run + "/universal.csv")};
    auto windows = sfa::pipeline::select_eval_windows(r.series, r.spec, r.split.validation,
                                                      std::max(f.subsample * 4, f.subsample));
    windows = sfa::subsample_windows(windows, f.subsample, sfa::derive_seed(f.seed, 7));
    sfa::FilterConfig fc{f.theta, f.relative_to_clean};
    if (f.strategy == "ct") {
      res = sfa::locate_ct(r.model, windows, rho, fc);
    } else {
      sfa::DESearchConfig dc{f.candidates, f.generations, f.weight, f.seed, f.subsample};
      res = sfa::locate_de(r.model, windows, rho, r.series.graph, dc, fc);
    }
  }

  {
    auto out = sfa::open_out(run + "/weakness.csv");
    out << "sensor,aggregate\n";
    char buf[40];
    for (const auto& [j, a] : res.scores) {
      std::snprintf(buf, sizeof(buf), "%.17g", a);
      out << j << ',' << buf << "\n";
    }
  }

  json cfg;
  cfg["strategy"] = f.strategy;
  cfg["candidates"] = f.candidates;
  cfg["generations"] = f.generations;
  cfg["weight"] = f.weight;
  cfg["theta"] = f.theta;
  cfg["subsample"] = f.subsample;
  cfg["relative_to_clean"] = f.relative_to_clean;
  cfg["seed"] = f.seed;
  man["locate"] = {{"config", cfg},
                   {"sensor", res.sensor},
                   {"aggregate", res.aggregate},
                   {"weakness_evaluations", res.weakness_evaluations},
                   {"generations_run", res.generations_run},
                   {"file", "weakness.csv"}};
  sfa::save_manifest(run, man);
  std::printf("locate (%s): sensor %d, aggregate %.3f, %lld weakness evaluations\n",
              f.strategy.c_str(), res.sensor, res.aggregate,
              static_cast<long long>(res.weakness_evaluations));
  return 0;
}

struct AttackFlags {
  std::string method = "sfa", tag;
  int sensor = -1, windows = 96, iters = 100;
  double sqrt_xi = 15.0, alpha = 1e4, step = 0.5, epsilon = 2.0;
  bool all_steps = false, mean_of_sensors = false, dump = false;
  std::uint64_t seed = 0;
};

int cmd_attack(const std::string& run, const AttackFlags& f) {
  json man = sfa::load_manifest(run);
  auto r = load_run(run, man);

  sfa::pipeline::AttackRunConfig cfg;
  cfg.method = f.method;
  cfg.opt = sfa::AttackConfig{f.sqrt_xi * f.sqrt_xi, f.alpha, f.iters, f.step, f.seed};
  cfg.fgsm.epsilon = f.epsilon;
  cfg.all_steps = f.all_steps;
  cfg.network_mean_of_sensors = f.mean_of_sensors;
  cfg.sensor = f.sensor;
  if (cfg.sensor < 0 && (f.method == "sfa" || f.method == "gwn")) {
    if (man.contains("locate"))
      cfg.sensor = man.at("locate").at("sensor").get<int>();
    else
      throw std::invalid_argument("attack: method '" + f.method +
                                  "' needs --sensor or a prior 'locate' run");
  }

  const auto windows = sfa::pipeline::select_eval_windows(r.series, r.spec, r.split.test, f.windows);
  const auto outcome = sfa::pipeline::evaluate_attack(r.model, r.stats, windows, cfg);

  const std::string tag = f.tag.empty() ? f.method : f.tag;
  json echo;
  echo["method"] = f.method;
  echo["sensor"] = cfg.sensor;
  echo["sqrt_xi"] = f.sqrt_xi;
  echo["alpha"] = f.alpha;
  echo["iters"] = f.iters;
  echo["step"] = f.step;
  echo["epsilon"] = f.epsilon;
  echo["windows"] = f.windows;
  echo["all_steps"] = f.all_steps;
  echo["mean_of_sensors"] = f.mean_of_sensors;
  echo["seed"] = f.seed;

  sfa::AttackReport report = outcome.report;
  report.config = echo;
  json out = report.to_json();
  out.erase("timing");  // keeps metrics byte-reproducible; timing goes to the manifest
  {
    auto fo = sfa::open_out(run + "/metrics_" + tag + ".json");
    fo << out.dump(1) << "\n";
  }
  if (f.dump)
    sfa::pipeline::write_perturbations_csv(run + "/perturbations_" + tag + ".csv",
                                           outcome.window_starts, outcome.perturbations);

  if (!man.contains("attacks")) man["attacks"] = json::object();
  json entry;
  entry["method"] = f.method;
  entry["config"] = echo;
  entry["sensor"] = cfg.sensor;
  entry["metrics_file"] = "metrics_" + tag + ".json";
  if (f.dump) entry["perturbations_file"] = "perturbations_" + tag + ".csv";
  entry["timing"] = {{"solver_seconds", outcome.report.solver_seconds},
                     {"total_seconds", outcome.report.total_seconds}};
  man["attacks"][tag] = entry;
  sfa::save_manifest(run, man);
  std::printf("attack (%s): nmapei %.2f%% (clean %.2f%%, attacked %.2f%%) -> metrics_%s.json\n",
              f.method.c_str(), report.network_nmapei, report.network_clean_mape,
              report.network_attacked_mape, tag.c_str());
  return 0;
}

// First dumped window of a perturbation csv, as a lag x sensor matrix.
std::optional<sfa::Matrix> first_dumped_perturbation(const std::string& path) {
  if (!fs::exists(path)) return std::nullopt;
  auto f = sfa::open_in(path);
  std::string line;
  if (!std::getline(f, line)) return std::nullopt;
  const auto header = sfa::split_csv_line(line);
  if (header.size() < 3) return std::nullopt;
  const int n = static_cast<int>(header.size()) - 2;
  std::vector<std::vector<double>> rows;
  std::string first_start;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    const auto tok = sfa::split_csv_line(line);
    if (first_start.empty()) first_start = tok[0];
    if (tok[0] != first_start) break;
    std::vector<double> r(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) r[static_cast<std::size_t>(j)] = sfa::parse_double(tok[static_cast<std::size_t>(j) + 2], path);
    rows.push_back(std::move(r));
  }
  if (rows.empty()) return std::nullopt;
  sfa::Matrix m(static_cast<int>(rows.size()), n);
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < n; ++j) m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  return m;
}

int cmd_report(const std::string& run, std::string tag) {
  json man = sfa::load_manifest(run);
  const json& attacks = require(man, "attacks", "report: run 'attack' at least once");
  if (attacks.empty()) throw std::invalid_argument("report: run 'attack' at least once");
  if (tag.empty()) tag = attacks.contains("sfa") ? "sfa" : attacks.begin().key();
  if (!attacks.contains(tag)) throw std::invalid_argument("report: no attack tagged '" + tag + "'");

  const std::string fig = run + "/figures";
  fs::create_directories(fig);
  std::vector<std::string> written;

  auto read_report = [&](const std::string& t) {
    auto f = sfa::open_in(run + "/" + attacks.at(t).at("metrics_file").get<std::string>());
    json j;
    f >> j;
    return sfa::AttackReport::from_json(j);
  };

  const auto rep = read_report(tag);
  const auto positions = sfa::read_positions_csv(run + "/positions.csv");
  const int chosen = attacks.at(tag).at("sensor").get<int>();
  sfa::svg::write_scatter_map(fig + "/nmapei_map.svg", "Per-sensor degradation (" + tag + ")",
                              positions, rep.sensor_nmapei, chosen);
  written.push_back("nmapei_map.svg");

  auto r = load_run(run, man);
  const auto windows = sfa::pipeline::select_eval_windows(
      r.series, r.spec, r.split.test, rep.config.at("windows").get<int>());
  const auto& w0 = windows.front();

  std::optional<sfa::Matrix> delta;
  if (attacks.at(tag).contains("perturbations_file"))
    delta = first_dumped_perturbation(
        run + "/" + attacks.at(tag).at("perturbations_file").get<std::string>());
  if (!delta && rep.method == "sfa" && chosen >= 0) {
    sfa::AttackConfig ac{rep.config.at("sqrt_xi").get<double>() * rep.config.at("sqrt_xi").get<double>(),
                         rep.config.at("alpha").get<double>(), rep.config.at("iters").get<int>(),
                         rep.config.at("step").get<double>(), rep.config.at("seed").get<std::uint64_t>()};
    const sfa::Vector last = w0.input.row(r.spec.input_steps - 1).transpose();
    delta = sfa::solve_sfa(r.model, w0.input, sfa::inverse_estimate(last, r.stats).values,
                           sfa::SpatialMask{chosen}, ac)
                .delta;
  }

  if (delta && chosen >= 0) {
    sfa::svg::Series s;
    s.name = "sensor " + std::to_string(chosen);
    for (int i = 0; i < delta->rows(); ++i) {
      s.x.push_back(i);
      s.y.push_back((*delta)(i, chosen));
    }
    sfa::svg::write_line_chart(fig + "/perturbation.svg", "Perturbation at the chosen vertex",
                               "input lag", "km/h", {s});
    written.push_back("perturbation.svg");
  }

  if (delta) {
    const int N = r.spec.input_steps, M = r.spec.horizon_steps;
    const int watch = chosen >= 0 ? chosen : 0;
    const sfa::Matrix clean_fc = sfa::forecast_recursive(r.model, w0.input);
    const sfa::Matrix att_fc = sfa::forecast_recursive(
        r.model, sfa::apply_perturbation(w0.input, sfa::Perturbation{*delta}, r.stats));
    sfa::svg::Series truth{"observed", {}, {}, "#444444"};
    for (int t = 0; t < N; ++t) {
      truth.x.push_back(t);
      truth.y.push_back(w0.input(t, watch));
    }
    for (int h = 0; h < M; ++h) {
      truth.x.push_back(N + h);
      truth.y.push_back(w0.target(h, watch));
    }
    sfa::svg::Series clean{"clean forecast", {}, {}, "#1f77b4"};
    sfa::svg::Series attacked{"attacked forecast", {}, {}, "#d62728"};
    for (int h = 0; h < M; ++h) {
      clean.x.push_back(N + h);
      clean.y.push_back(clean_fc(h, watch));
      attacked.x.push_back(N + h);
      attacked.y.push_back(att_fc(h, watch));
    }
    sfa::svg::write_line_chart(fig + "/forecast_vs_attack.svg",
                               "Forecasts at sensor " + std::to_string(watch), "step", "km/h",
                               {truth, clean, attacked});
    written.push_back("forecast_vs_attack.svg");
  }

  std::string inv_tag, dir_tag;
  for (const auto& [t, e] : attacks.items()) {
    if (e.at("method") == "full-inverse" && inv_tag.empty()) inv_tag = t;
    if (e.at("method") == "full-direct" && dir_tag.empty()) dir_tag = t;
  }
  if (!inv_tag.empty() && !dir_tag.empty()) {
    const auto ri = read_report(inv_tag), rd = read_report(dir_tag);
    sfa::svg::write_bar_chart(fig + "/estimation_comparison.svg",
                              "Network degradation by ground-truth surrogate", "NMAPEI (%)",
                              {"inverse", "direct"}, {ri.network_nmapei, rd.network_nmapei});
    written.push_back("estimation_comparison.svg");
  }

  {
    struct Row {
      double sqrt_xi;
      std::string tag;
      sfa::AttackReport rep;
    };
    std::vector<Row> rows;
    for (const auto& [t, e] : attacks.items())
      rows.push_back({e.at("config").at("sqrt_xi").get<double>(), t, read_report(t)});
    std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
      return a.sqrt_xi != b.sqrt_xi ? a.sqrt_xi < b.sqrt_xi : a.tag < b.tag;
    });
    auto f = sfa::open_out(fig + "/kiv_table.csv");
    f << "tag,method,sqrt_xi,nmapei";
    for (double k : sfa::k_iv_levels()) f << ",iv_" << static_cast<int>(k);
    f << "\n";
    char buf[40];
    for (const auto& row : rows) {
      std::snprintf(buf, sizeof(buf), "%.4f", row.rep.network_nmapei);
      f << row.tag << ',' << row.rep.method << ',' << row.sqrt_xi << ',' << buf;
      for (double k : sfa::k_iv_levels()) {
        std::snprintf(buf, sizeof(buf), "%g", k);
        f << ',' << row.rep.k_iv_counts.at(buf);
      }
      f << "\n";
    }
    written.push_back("kiv_table.csv");
  }

  std::cout << "report: wrote";
  for (const auto& w : written) std::cout << ' ' << w;
  std::cout << " -> " << fig << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    const json file_cfg = load_config_file(argc, argv);
    const std::string sub = argc > 1 && argv[1][0] != '-' ? argv[1] : "";
    Layered cfg(file_cfg, sub);

    CLI::App app{"single-vertex attack laboratory for graph speed forecasting"};
    app.require_subcommand(1);
    std::string config_path;
    app.add_option("--config", config_path, "json config file (flags override it)");

    std::string run;
    auto add_run = [&](CLI::App* c) {
      c->add_option("--run", run, "run directory")->required();
      c->add_option("--config", config_path, "json config file (flags override it)");
    };

    sfa::SynthConfig sc;
    auto* synth = app.add_subcommand("synth", "generate a synthetic dataset");
    add_run(synth);
    cfg.seed("sensors", sc.sensors);
    cfg.seed("days", sc.days);
    cfg.seed("interval", sc.interval_minutes);
    cfg.seed("free-flow", sc.free_flow_kmh);
    cfg.seed("daily-dip", sc.daily_dip_kmh);
    cfg.seed("event-rate", sc.event_rate_per_day);
    cfg.seed("event-depth", sc.event_depth_kmh);
    cfg.seed("event-duration", sc.event_duration_min);
    cfg.seed("diffusion", sc.diffusion);
    cfg.seed("noise-std", sc.noise_std_kmh);
    cfg.seed("radius", sc.radius);
    cfg.seed("kappa", sc.kappa);
    cfg.seed("seed", sc.seed);
    synth->add_option("--sensors", sc.sensors);
    synth->add_option("--days", sc.days);
    synth->add_option("--interval", sc.interval_minutes);
    synth->add_option("--free-flow", sc.free_flow_kmh);
    synth->add_option("--daily-dip", sc.daily_dip_kmh);
    synth->add_option("--event-rate", sc.event_rate_per_day);
    synth->add_option("--event-depth", sc.event_depth_kmh);
    synth->add_option("--event-duration", sc.event_duration_min);
    synth->add_option("--diffusion", sc.diffusion);
    synth->add_option("--noise-std", sc.noise_std_kmh);
    synth->add_option("--radius", sc.radius);
    synth->add_option("--kappa", sc.kappa);
    synth->add_option("--seed", sc.seed);

    TrainFlags tf;
    auto* train = app.add_subcommand("train", "train the reference forecaster");
    add_run(train);
    cfg.seed("epochs", tf.epochs);
    cfg.seed("batch", tf.batch);
    cfg.seed("lr", tf.lr);
    cfg.seed("patience", tf.patience);
    cfg.seed("hidden", tf.hidden);
    cfg.seed("kernel", tf.kernel);
    cfg.seed("input-steps", tf.input_steps);
    cfg.seed("horizon", tf.horizon);
    cfg.seed("train-frac", tf.train_frac);
    cfg.seed("val-frac", tf.val_frac);
    cfg.seed("test-frac", tf.test_frac);
    cfg.seed("sigma", tf.sigma);
    cfg.seed("kappa", tf.kappa);
    cfg.seed("max-train-windows", tf.max_train_windows);
    cfg.seed("max-val-windows", tf.max_val_windows);
    cfg.seed("seed", tf.seed);
    train->add_option("--epochs", tf.epochs);
    train->add_option("--batch", tf.batch);
    train->add_option("--lr", tf.lr);
    train->add_option("--patience", tf.patience);
    train->add_option("--hidden", tf.hidden);
    train->add_option("--kernel", tf.kernel);
    train->add_option("--input-steps", tf.input_steps);
    train->add_option("--horizon", tf.horizon);
    train->add_option("--train-frac", tf.train_frac);
    train->add_option("--val-frac", tf.val_frac);
    train->add_option("--test-frac", tf.test_frac);
    train->add_option("--sigma", tf.sigma);
    train->add_option("--kappa", tf.kappa);
    train->add_option("--max-train-windows", tf.max_train_windows);
    train->add_option("--max-val-windows", tf.max_val_windows);
    train->add_option("--seed", tf.seed);

    UniversalFlags uf;
    auto* uni = app.add_subcommand("universal", "fit the frozen universal perturbation");
    add_run(uni);
    cfg.seed("sqrt-xi", uf.sqrt_xi);
    cfg.seed("alpha", uf.alpha);
    cfg.seed("iters", uf.iters);
    cfg.seed("step", uf.step);
    cfg.seed("windows", uf.windows);
    cfg.seed("broadcast", uf.broadcast);
    cfg.seed("seed", uf.seed);
    uni->add_option("--sqrt-xi", uf.sqrt_xi);
    uni->add_option("--alpha", uf.alpha);
    uni->add_option("--iters", uf.iters);
    uni->add_option("--step", uf.step);
    uni->add_option("--windows", uf.windows);
    uni->add_flag("--broadcast", uf.broadcast);
    uni->add_option("--seed", uf.seed);

    LocateFlags lf;
    auto* loc = app.add_subcommand("locate", "find the weakest vertex");
    add_run(loc);
    cfg.seed("strategy", lf.strategy);
    cfg.seed("candidates", lf.candidates);
    cfg.seed("generations", lf.generations);
    cfg.seed("weight", lf.weight);
    cfg.seed("theta", lf.theta);
    cfg.seed("subsample", lf.subsample);
    cfg.seed("relative-to-clean", lf.relative_to_clean);
    cfg.seed("seed", lf.seed);
    loc->add_option("--strategy", lf.strategy, "de | ct | deg | cen");
    loc->add_option("--candidates", lf.candidates);
    loc->add_option("--generations", lf.generations);
    loc->add_option("--weight", lf.weight);
    loc->add_option("--theta", lf.theta);
    loc->add_option("--subsample", lf.subsample);
    loc->add_flag("--relative-to-clean", lf.relative_to_clean);
    loc->add_option("--seed", lf.seed);

    AttackFlags af;
    auto* att = app.add_subcommand("attack", "evaluate an attack on test windows");
    add_run(att);
    cfg.seed("method", af.method);
    cfg.seed("tag", af.tag);
    cfg.seed("sensor", af.sensor);
    cfg.seed("windows", af.windows);
    cfg.seed("iters", af.iters);
    cfg.seed("sqrt-xi", af.sqrt_xi);
    cfg.seed("alpha", af.alpha);
    cfg.seed("step", af.step);
    cfg.seed("epsilon", af.epsilon);
    cfg.seed("all-steps", af.all_steps);
    cfg.seed("mean-of-sensors", af.mean_of_sensors);
    cfg.seed("dump-perturbations", af.dump);
    cfg.seed("seed", af.seed);
    att->add_option("--method", af.method, "sfa | gwn | mfgsm | full-inverse | full-direct");
    att->add_option("--tag", af.tag, "metrics file suffix (default: method name)");
    att->add_option("--sensor", af.sensor, "attacked vertex (default: locate result)");
    att->add_option("--windows", af.windows);
    att->add_option("--iters", af.iters);
    att->add_option("--sqrt-xi", af.sqrt_xi);
    att->add_option("--alpha", af.alpha);
    att->add_option("--step", af.step);
    att->add_option("--epsilon", af.epsilon);
    att->add_flag("--all-steps", af.all_steps);
    att->add_flag("--mean-of-sensors", af.mean_of_sensors);
    att->add_flag("--dump-perturbations", af.dump);
    att->add_option("--seed", af.seed);

    std::string report_tag;
    auto* rep = app.add_subcommand("report", "emit figures and the threshold table");
    add_run(rep);
    cfg.seed("tag", report_tag);
    rep->add_option("--tag", report_tag, "attack tag to illustrate (default: sfa, else first)");

    CLI11_PARSE(app, argc, argv);

    if (synth->parsed()) return cmd_synth(run, sc);
    if (train->parsed()) return cmd_train(run, tf);
    if (uni->parsed()) return cmd_universal(run, uf);
    if (loc->parsed()) return cmd_locate(run, lf);
    if (att->parsed()) return cmd_attack(run, af);
    if (rep->parsed()) return cmd_report(run, report_tag);
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "sfalab: error: " << e.what() << "\n";
    return 1;
  }
}
