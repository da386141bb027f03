// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 the xlmimo authors

#ifndef XLMIMO_EXPERIMENT_HPP
#define XLMIMO_EXPERIMENT_HPP

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "xlmimo/config.hpp"

namespace xlmimo {

/// One (detector, SNR point) outcome of a Monte Carlo run.
struct SerRecord {
  std::string method;
  double snr_db = 0.0;
  std::uint64_t errors = 0;
  std::uint64_t symbols = 0;
  double ser = 0.0;
  double ci95 = 0.0;  // normal-approximation half width
  std::uint64_t seed = 0;
  std::string config_digest;
};

/// Runs the configured detectors over the SNR grid. All detectors within a
/// trial share the same channel, symbols, and noise; trials reuse the same
/// draws across SNR points with only the noise scale changing. Results are
/// identical for any worker count (XLSIM_WORKERS; 0/unset = hardware).
std::vector<SerRecord> run_experiment(const SimConfig& cfg);

/// Worker count resolution used by run_experiment (exposed for tests).
int resolve_worker_count();
void set_worker_count_override(int workers);  // 0 clears the override

void write_csv(const std::vector<SerRecord>& records, std::ostream& out);
void write_csv(const std::vector<SerRecord>& records, const std::string& path);

}  // namespace xlmimo

#endif  // XLMIMO_EXPERIMENT_HPP
