#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>
#include <sfa/graph.hpp>

namespace sfa {

// Percentage error with a floored denominator so near-zero speeds cannot
// blow the score up.
inline double mape(const Matrix& prediction, const Matrix& truth, double floor_kmh = 1.0) {
  if (prediction.rows() != truth.rows() || prediction.cols() != truth.cols())
    throw std::invalid_argument("mape: shape mismatch");
  if (prediction.size() == 0) throw std::invalid_argument("mape: empty input");
  if (floor_kmh <= 0.0) throw std::invalid_argument("mape: floor must be positive");
  double acc = 0.0;
  for (int i = 0; i < prediction.rows(); ++i)
    for (int j = 0; j < prediction.cols(); ++j)
      acc += std::abs(prediction(i, j) - truth(i, j)) / std::max(truth(i, j), floor_kmh);
  return acc / static_cast<double>(prediction.size()) * 100.0;
}

// Absolute increase of the error under attack, percentage points.
inline double mapei(double clean_mape, double attacked_mape) { return attacked_mape - clean_mape; }

// Increase relative to the clean error, in percent of it.
inline double nmapei(double clean_mape, double attacked_mape) {
  if (clean_mape == 0.0) throw std::invalid_argument("nmapei: clean error is zero");
  return (attacked_mape - clean_mape) / clean_mape * 100.0;
}

// Number of sensors whose relative degradation strictly exceeds k percent.
inline int k_iv(const std::vector<double>& nmapei_per_sensor, double k) {
  int c = 0;
  for (double v : nmapei_per_sensor)
    if (v > k) ++c;
  return c;
}

inline const std::vector<double>& k_iv_levels() {
  static const std::vector<double> levels = {5.0, 10.0, 20.0, 30.0, 40.0};
  return levels;
}

// Full evaluation of one attack run, serialisable as metrics json.
struct AttackReport {
  int schema_version = 1;
  std::string method;
  nlohmann::json config;  // echo of everything that shaped the run
  int eval_windows = 0;
  int horizon_step = 0;         // 1-based forecast step the errors are taken at
  bool all_steps = false;       // true: errors pooled over the whole horizon
  double network_clean_mape = 0.0;
  double network_attacked_mape = 0.0;
  double network_mapei = 0.0;
  double network_nmapei = 0.0;
  std::vector<double> sensor_clean_mape;
  std::vector<double> sensor_attacked_mape;
  std::vector<double> sensor_mapei;
  std::vector<double> sensor_nmapei;
  std::map<std::string, int> k_iv_counts;  // keys "5".."40"
  double solver_seconds = 0.0;
  double total_seconds = 0.0;

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["schema_version"] = schema_version;
    j["method"] = method;
    j["config"] = config;
    j["eval"] = {{"windows", eval_windows},
                 {"horizon_step", horizon_step},
                 {"all_steps", all_steps}};
    j["network"] = {{"clean_mape", network_clean_mape},
                    {"attacked_mape", network_attacked_mape},
                    {"mapei", network_mapei},
                    {"nmapei", network_nmapei}};
    j["per_sensor"] = {{"clean_mape", sensor_clean_mape},
                       {"attacked_mape", sensor_attacked_mape},
                       {"mapei", sensor_mapei},
                       {"nmapei", sensor_nmapei}};
    j["k_iv"] = k_iv_counts;
    j["timing"] = {{"solver_seconds", solver_seconds}, {"total_seconds", total_seconds}};
    return j;
  }

  static AttackReport from_json(const nlohmann::json& j) {
    AttackReport r;
    r.schema_version = j.at("schema_version").get<int>();
    r.method = j.at("method").get<std::string>();
    r.config = j.at("config");
    r.eval_windows = j.at("eval").at("windows").get<int>();
    r.horizon_step = j.at("eval").at("horizon_step").get<int>();
    r.all_steps = j.at("eval").at("all_steps").get<bool>();
    r.network_clean_mape = j.at("network").at("clean_mape").get<double>();
    r.network_attacked_mape = j.at("network").at("attacked_mape").get<double>();
    r.network_mapei = j.at("network").at("mapei").get<double>();
    r.network_nmapei = j.at("network").at("nmapei").get<double>();
    r.sensor_clean_mape = j.at("per_sensor").at("clean_mape").get<std::vector<double>>();
    r.sensor_attacked_mape = j.at("per_sensor").at("attacked_mape").get<std::vector<double>>();
    r.sensor_mapei = j.at("per_sensor").at("mapei").get<std::vector<double>>();
    r.sensor_nmapei = j.at("per_sensor").at("nmapei").get<std::vector<double>>();
    r.k_iv_counts = j.at("k_iv").get<std::map<std::string, int>>();
    // timing is volatile and gets stripped from files meant to be byte-reproducible
    if (j.contains("timing")) {
      r.solver_seconds = j.at("timing").at("solver_seconds").get<double>();
      r.total_seconds = j.at("timing").at("total_seconds").get<double>();
    }
    return r;
  }
};

}  // namespace sfa
