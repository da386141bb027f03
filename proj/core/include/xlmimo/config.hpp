// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 the xlmimo authors

#ifndef XLMIMO_CONFIG_HPP
#define XLMIMO_CONFIG_HPP

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "xlmimo/channel.hpp"
#include "xlmimo/fusion.hpp"

namespace xlmimo {

enum class Scenario { Iid, LowCorrelation, HighCorrelation, Custom };
enum class DetectorKind { VmpSic, VmpNonIterative, CentralMrc, CentralZf, MatchedFilterBound };

std::string to_string(Scenario s);
std::string to_string(DetectorKind d);
Scenario scenario_from_string(const std::string& s);
std::vector<DetectorKind> detectors_from_string(const std::string& s);  // "all" expands

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Full description of one reproducible run. Serialized as flat key=value
/// lines; keys carry their units.
struct SimConfig {
  Scenario scenario = Scenario::LowCorrelation;
  ChannelConfig channel;
  std::string constellation = "qpsk";
  std::vector<double> snr_db = {0, 2, 4, 6, 8, 10};
  int trials = 500;
  std::uint64_t seed = 1;

  InitMode init = InitMode::MrcGlobal;
  InitStrategy strategy = InitStrategy::PerSicStep;
  FusionMode fusion = FusionMode::All;
  double power_ratio = 0.75;
  int budget = 3;
  int vmp_iterations = 1;
  bool vmp_parallel_update = false;

  std::vector<DetectorKind> detectors = {DetectorKind::VmpSic};
  std::string output_path = "ser.csv";
  std::string dump_channels_path;  // optional debug dump of H, first SNR point

  /// Pins the scenario's angular spreads (no-op for Custom and Iid).
  void apply_scenario();
  void validate() const;

  /// Canonical key=value serialization (fixed key order).
  std::string canonical() const;
  /// FNV-1a hash of canonical(), 16 hex digits.
  std::string digest() const;

  static SimConfig from_stream(std::istream& in);
  static SimConfig from_file(const std::string& path);

  /// Applies one key=value assignment (the config-file grammar).
  void set(const std::string& key, const std::string& value);
};

/// Parses "a:b:step" (inclusive endpoints) or a comma-separated list.
std::vector<double> parse_snr_grid(const std::string& text);

}  // namespace xlmimo

#endif  // XLMIMO_CONFIG_HPP
