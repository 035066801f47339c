#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <sfa/graph.hpp>

namespace sfa {

// ---- civil time <-> unix epoch, UTC only ----------------------------------
// Days-from-civil algorithm; avoids timegm and timezone state entirely.

inline std::int64_t days_from_civil(int y, int m, int d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = static_cast<unsigned>((153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1);
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

inline void civil_from_days(std::int64_t z, int& y, int& m, int& d) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const std::int64_t yy = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
  m = static_cast<int>(mp + (mp < 10 ? 3 : -9));
  y = static_cast<int>(yy + (m <= 2));
}

inline std::string format_iso8601(std::int64_t epoch_seconds) {
  std::int64_t days = epoch_seconds / 86400;
  std::int64_t rem = epoch_seconds % 86400;
  if (rem < 0) {
    rem += 86400;
    days -= 1;
  }
  int y, m, d;
  civil_from_days(days, y, m, d);
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02d", y, m, d,
                static_cast<int>(rem / 3600), static_cast<int>(rem / 60 % 60),
                static_cast<int>(rem % 60));
  return buf;
}

inline std::int64_t parse_iso8601(const std::string& s) {
  int y, mo, d, h, mi, se;
  if (std::sscanf(s.c_str(), "%d-%d-%dT%d:%d:%d", &y, &mo, &d, &h, &mi, &se) != 6)
    throw std::invalid_argument("bad timestamp: " + s);
  return days_from_civil(y, mo, d) * 86400 + h * 3600 + mi * 60 + se;
}

// ---- csv helpers -----------------------------------------------------------

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

inline double parse_double(const std::string& s, const std::string& what) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument("bad number in " + what + ": '" + s + "'");
  }
}

inline int parse_int(const std::string& s, const std::string& what) {
  try {
    std::size_t pos = 0;
    const int v = std::stoi(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument("bad integer in " + what + ": '" + s + "'");
  }
}

inline std::ofstream open_out(const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path);
  return f;
}

inline std::ifstream open_in(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot read " + path);
  return f;
}

// ---- dataset files ---------------------------------------------------------
// speeds.csv     timestamp,s0,s1,...   ISO-8601 timestamps, km/h values
// distances.csv  from,to,dist_km       both directions listed
// positions.csv  sensor,lon,lat

inline void write_speeds_csv(const std::string& path, const GraphSeries& series) {
  auto f = open_out(path);
  f << "timestamp";
  for (int j = 0; j < series.sensors(); ++j) f << ",s" << j;
  f << "\n";
  const std::int64_t step = static_cast<std::int64_t>(series.interval_minutes * 60.0);
  char buf[32];
  for (const auto& snap : series.snapshots) {
    f << format_iso8601(series.start_epoch_seconds + step * snap.t);
    for (int j = 0; j < snap.values.size(); ++j) {
      std::snprintf(buf, sizeof(buf), "%.4f", snap.values[j]);
      f << ',' << buf;
    }
    f << "\n";
  }
}

struct SpeedsCsv {
  Matrix values;  // rows = time
  double interval_minutes = 0.0;
  std::int64_t start_epoch_seconds = 0;
  int sensors = 0;
};

inline SpeedsCsv read_speeds_csv(const std::string& path) {
  auto f = open_in(path);
  std::string line;
  if (!std::getline(f, line)) throw std::invalid_argument(path + ": empty file");
  auto header = split_csv_line(line);
  if (header.size() < 2 || header[0] != "timestamp")
    throw std::invalid_argument(path + ": expected header 'timestamp,s0,...'");
  const int n = static_cast<int>(header.size()) - 1;
  for (int j = 0; j < n; ++j)
    if (header[static_cast<std::size_t>(j) + 1] != "s" + std::to_string(j))
      throw std::invalid_argument(path + ": sensor columns must be s0..s" + std::to_string(n - 1));

  std::vector<std::int64_t> stamps;
  std::vector<double> flat;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    auto fields = split_csv_line(line);
    if (static_cast<int>(fields.size()) != n + 1)
      throw std::invalid_argument(path + ": row with " + std::to_string(fields.size()) + " fields, expected " + std::to_string(n + 1));
    stamps.push_back(parse_iso8601(fields[0]));
    for (int j = 0; j < n; ++j) flat.push_back(parse_double(fields[static_cast<std::size_t>(j) + 1], path));
  }
  if (stamps.size() < 2) throw std::invalid_argument(path + ": need at least two rows");
  const std::int64_t step = stamps[1] - stamps[0];
  if (step <= 0) throw std::invalid_argument(path + ": timestamps must increase");
  for (std::size_t i = 1; i < stamps.size(); ++i)
    if (stamps[i] - stamps[i - 1] != step)
      throw std::invalid_argument(path + ": non-uniform sampling at row " + std::to_string(i + 1));

  SpeedsCsv out;
  out.sensors = n;
  out.interval_minutes = static_cast<double>(step) / 60.0;
  out.start_epoch_seconds = stamps[0];
  out.values.resize(static_cast<int>(stamps.size()), n);
  for (int t = 0; t < out.values.rows(); ++t)
    for (int j = 0; j < n; ++j) out.values(t, j) = flat[static_cast<std::size_t>(t) * n + static_cast<std::size_t>(j)];
  return out;
}

inline void write_distances_csv(const std::string& path, const std::vector<DistanceEntry>& entries) {
  auto f = open_out(path);
  f << "from,to,dist_km\n";
  char buf[40];
  for (const auto& e : entries) {
    std::snprintf(buf, sizeof(buf), "%.17g", e.km);
    f << e.from << ',' << e.to << ',' << buf << "\n";
  }
}

inline std::vector<DistanceEntry> read_distances_csv(const std::string& path) {
  auto f = open_in(path);
  std::string line;
  if (!std::getline(f, line)) throw std::invalid_argument(path + ": empty file");
  if (split_csv_line(line) != std::vector<std::string>{"from", "to", "dist_km"})
    throw std::invalid_argument(path + ": expected header 'from,to,dist_km'");
  std::vector<DistanceEntry> out;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    auto fields = split_csv_line(line);
    if (fields.size() != 3) throw std::invalid_argument(path + ": malformed row '" + line + "'");
    out.push_back({parse_int(fields[0], path), parse_int(fields[1], path), parse_double(fields[2], path)});
  }
  return out;
}

inline void write_positions_csv(const std::string& path, const std::vector<LonLat>& positions) {
  auto f = open_out(path);
  f << "sensor,lon,lat\n";
  char buf[96];
  for (std::size_t i = 0; i < positions.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%zu,%.17g,%.17g", i, positions[i].lon, positions[i].lat);
    f << buf << "\n";
  }
}

inline std::vector<LonLat> read_positions_csv(const std::string& path) {
  auto f = open_in(path);
  std::string line;
  if (!std::getline(f, line)) throw std::invalid_argument(path + ": empty file");
  if (split_csv_line(line) != std::vector<std::string>{"sensor", "lon", "lat"})
    throw std::invalid_argument(path + ": expected header 'sensor,lon,lat'");
  std::vector<LonLat> out;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    auto fields = split_csv_line(line);
    if (fields.size() != 3) throw std::invalid_argument(path + ": malformed row '" + line + "'");
    const int idx = parse_int(fields[0], path);
    if (idx != static_cast<int>(out.size()))
      throw std::invalid_argument(path + ": sensor ids must be consecutive from 0");
    out.push_back({parse_double(fields[1], path), parse_double(fields[2], path)});
  }
  return out;
}

// Assembles a series from the three dataset files in `dir`. The adjacency is
// rebuilt from the distance list; sigma defaults to the rms distance.
inline GraphSeries load_dataset(const std::string& dir, double sigma = 0.0, double kappa = 0.1) {
  const auto speeds = read_speeds_csv(dir + "/speeds.csv");
  const auto dists = read_distances_csv(dir + "/distances.csv");
  const auto positions = read_positions_csv(dir + "/positions.csv");
  if (static_cast<int>(positions.size()) != speeds.sensors)
    throw std::invalid_argument(dir + ": positions.csv and speeds.csv disagree on sensor count");
  if (sigma <= 0.0) sigma = distance_rms(dists);
  if (sigma <= 0.0) sigma = 1.0;  // degenerate: all listed distances identical
  auto graph = make_graph(build_adjacency_from_distances(speeds.sensors, dists, sigma, kappa), positions);
  auto series = make_series(std::move(graph), speeds.values, speeds.interval_minutes);
  series.start_epoch_seconds = speeds.start_epoch_seconds;
  return series;
}

}  // namespace sfa
