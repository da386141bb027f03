// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 the xlmimo authors

#include "xlmimo/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace xlmimo {

std::string to_string(Scenario s) {
  switch (s) {
    case Scenario::Iid: return "iid";
    case Scenario::LowCorrelation: return "low-corr";
    case Scenario::HighCorrelation: return "high-corr";
    case Scenario::Custom: return "custom";
  }
  return "?";
}

std::string to_string(DetectorKind d) {
  switch (d) {
    case DetectorKind::VmpSic: return "vmp-sic";
    case DetectorKind::VmpNonIterative: return "vmp-noniterative";
    case DetectorKind::CentralMrc: return "mrc";
    case DetectorKind::CentralZf: return "zf";
    case DetectorKind::MatchedFilterBound: return "mfb";
  }
  return "?";
}

Scenario scenario_from_string(const std::string& s) {
  if (s == "iid") return Scenario::Iid;
  if (s == "low-corr") return Scenario::LowCorrelation;
  if (s == "high-corr") return Scenario::HighCorrelation;
  if (s == "custom") return Scenario::Custom;
  throw ConfigError("unknown scenario: " + s);
}

std::vector<DetectorKind> detectors_from_string(const std::string& s) {
  if (s == "all")
    return {DetectorKind::VmpSic, DetectorKind::VmpNonIterative, DetectorKind::CentralMrc,
            DetectorKind::CentralZf, DetectorKind::MatchedFilterBound};
  std::vector<DetectorKind> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item == "vmp-sic") out.push_back(DetectorKind::VmpSic);
    else if (item == "vmp-noniterative") out.push_back(DetectorKind::VmpNonIterative);
    else if (item == "mrc") out.push_back(DetectorKind::CentralMrc);
    else if (item == "zf") out.push_back(DetectorKind::CentralZf);
    else if (item == "mfb") out.push_back(DetectorKind::MatchedFilterBound);
    else throw ConfigError("unknown detector: " + item);
  }
  if (out.empty()) throw ConfigError("no detectors selected");
  return out;
}

std::vector<double> parse_snr_grid(const std::string& text) {
  std::vector<double> out;
  if (text.find(':') != std::string::npos) {
    double lo = 0, hi = 0, step = 0;
    char c1 = 0, c2 = 0;
    std::stringstream ss(text);
    if (!(ss >> lo >> c1 >> hi >> c2 >> step) || c1 != ':' || c2 != ':' || step <= 0)
      throw ConfigError("bad SNR range (want lo:hi:step): " + text);
    for (double v = lo; v <= hi + 1e-9; v += step) out.push_back(v);
  } else {
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
      try {
        out.push_back(std::stod(item));
      } catch (const std::exception&) {
        throw ConfigError("bad SNR value: " + item);
      }
    }
  }
  if (out.empty()) throw ConfigError("empty SNR grid");
  return out;
}

void SimConfig::apply_scenario() {
  constexpr double pi = 3.14159265358979323846;
  if (scenario == Scenario::LowCorrelation) channel.bs_angular_spread = 7.0 * pi / 8.0;
  if (scenario == Scenario::HighCorrelation) channel.bs_angular_spread = 3.0 * pi / 4.0;
}

void SimConfig::validate() const {
  if (snr_db.empty()) throw ConfigError("config: empty SNR grid");
  if (trials < 1) throw ConfigError("config: trials must be >= 1");
  if (detectors.empty()) throw ConfigError("config: no detectors selected");
  if (vmp_iterations < 1) throw ConfigError("config: vmp_iterations must be >= 1");
  if (!(power_ratio > 0.0 && power_ratio <= 1.0))
    throw ConfigError("config: p0 must be in (0, 1]");
  if (budget < 1 || budget > channel.subarrays)
    throw ConfigError("config: b_max must be in [1, subarrays]");
  Constellation::from_name(constellation).validate();
  try {
    channel.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

namespace {

std::string format_double(double v) {
  std::ostringstream ss;
  ss.precision(17);
  ss << v;
  return ss.str();
}

}  // namespace

std::string SimConfig::canonical() const {
  std::ostringstream out;
  out << "scenario = " << to_string(scenario) << '\n';
  out << "antennas = " << channel.antennas << '\n';
  out << "users = " << channel.users << '\n';
  out << "subarrays = " << channel.subarrays << '\n';
  out << "bs_clusters = " << channel.bs_clusters << '\n';
  out << "scatterers_per_cluster = " << channel.scatterers_per_cluster << '\n';
  out << "ucluster_scatterers = " << channel.ucluster_scatterers << '\n';
  out << "clusters_per_user = " << channel.clusters_per_user << '\n';
  out << "d_r_m = " << format_double(channel.bs_spacing_m) << '\n';
  out << "d_s_m = " << format_double(channel.ucluster_spacing_m) << '\n';
  out << "wavelength_norm = " << format_double(channel.wavelength_norm) << '\n';
  out << "vr_length_logmean = " << format_double(channel.vr_length_log_mean) << '\n';
  out << "vr_length_logsigma = " << format_double(channel.vr_length_log_sigma) << '\n';
  out << "psi_mean_db_per_m = " << format_double(channel.slope_mean_db_per_m) << '\n';
  out << "psi_std_db_per_m = " << format_double(channel.slope_sigma_db_per_m) << '\n';
  out << "theta_bs_rad = " << format_double(channel.bs_angular_spread) << '\n';
  out << "theta_u_rad = " << format_double(channel.ucluster_angular_spread) << '\n';
  out << "refresh_period = " << channel.refresh_period << '\n';
  out << "constellation = " << constellation << '\n';
  out << "snr_db = ";
  for (std::size_t i = 0; i < snr_db.size(); ++i)
    out << (i ? "," : "") << format_double(snr_db[i]);
  out << '\n';
  out << "trials = " << trials << '\n';
  out << "seed = " << seed << '\n';
  out << "init = " << to_string(init) << '\n';
  out << "init_strategy = " << to_string(strategy) << '\n';
  out << "fusion = " << to_string(fusion) << '\n';
  out << "p0 = " << format_double(power_ratio) << '\n';
  out << "b_max = " << budget << '\n';
  out << "vmp_iterations = " << vmp_iterations << '\n';
  out << "vmp_parallel_update = " << (vmp_parallel_update ? 1 : 0) << '\n';
  out << "detector = ";
  for (std::size_t i = 0; i < detectors.size(); ++i)
    out << (i ? "," : "") << to_string(detectors[i]);
  out << '\n';
  out << "out = " << output_path << '\n';
  return out.str();
}

std::string SimConfig::digest() const {
  std::uint64_t hash = 1469598103934665603ULL;  // FNV-1a
  for (unsigned char c : canonical()) {
    hash ^= c;
    hash *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash));
  return buf;
}

void SimConfig::set(const std::string& key, const std::string& value) {
  auto as_int = [&](int lo) {
    int v;
    try {
      v = std::stoi(value);
    } catch (const std::exception&) {
      throw ConfigError("bad integer for " + key + ": " + value);
    }
    if (v < lo) throw ConfigError(key + " must be >= " + std::to_string(lo));
    return v;
  };
  auto as_double = [&]() {
    try {
      return std::stod(value);
    } catch (const std::exception&) {
      throw ConfigError("bad number for " + key + ": " + value);
    }
  };

  if (key == "scenario") scenario = scenario_from_string(value);
  else if (key == "antennas") channel.antennas = as_int(1);
  else if (key == "users") channel.users = as_int(1);
  else if (key == "subarrays") channel.subarrays = as_int(1);
  else if (key == "bs_clusters") channel.bs_clusters = as_int(1);
  else if (key == "scatterers_per_cluster") channel.scatterers_per_cluster = as_int(1);
  else if (key == "ucluster_scatterers") channel.ucluster_scatterers = as_int(1);
  else if (key == "clusters_per_user") channel.clusters_per_user = as_int(1);
  else if (key == "d_r_m") channel.bs_spacing_m = as_double();
  else if (key == "d_s_m") channel.ucluster_spacing_m = as_double();
  else if (key == "wavelength_norm") channel.wavelength_norm = as_double();
  else if (key == "vr_length_logmean") channel.vr_length_log_mean = as_double();
  else if (key == "vr_length_logsigma") channel.vr_length_log_sigma = as_double();
  else if (key == "psi_mean_db_per_m") channel.slope_mean_db_per_m = as_double();
  else if (key == "psi_std_db_per_m") channel.slope_sigma_db_per_m = as_double();
  else if (key == "theta_bs_rad") channel.bs_angular_spread = as_double();
  else if (key == "theta_u_rad") channel.ucluster_angular_spread = as_double();
  else if (key == "refresh_period") channel.refresh_period = as_int(1);
  else if (key == "constellation") constellation = value;
  else if (key == "snr_db") snr_db = parse_snr_grid(value);
  else if (key == "trials") trials = as_int(1);
  else if (key == "seed") seed = std::stoull(value);
  else if (key == "init") init = init_mode_from_string(value);
  else if (key == "init_strategy") strategy = init_strategy_from_string(value);
  else if (key == "fusion") fusion = fusion_mode_from_string(value);
  else if (key == "p0") power_ratio = as_double();
  else if (key == "b_max") budget = as_int(1);
  else if (key == "vmp_iterations") vmp_iterations = as_int(1);
  else if (key == "vmp_parallel_update") vmp_parallel_update = as_int(0) != 0;
  else if (key == "detector") detectors = detectors_from_string(value);
  else if (key == "out") output_path = value;
  else if (key == "dump_channels") dump_channels_path = value;
  else throw ConfigError("unknown config key: " + key);
}

SimConfig SimConfig::from_stream(std::istream& in) {
  SimConfig cfg;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto strip = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      if (b == std::string::npos) return std::string();
      const auto e = s.find_last_not_of(" \t\r");
      return s.substr(b, e - b + 1);
    };
    line = strip(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
    cfg.set(strip(line.substr(0, eq)), strip(line.substr(eq + 1)));
  }
  cfg.apply_scenario();
  return cfg;
}

SimConfig SimConfig::from_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config file: " + path);
  return from_stream(f);
}

}  // namespace xlmimo
