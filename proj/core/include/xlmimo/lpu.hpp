// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 the xlmimo authors

#ifndef XLMIMO_LPU_HPP
#define XLMIMO_LPU_HPP

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include "xlmimo/constellation.hpp"
#include "xlmimo/linalg.hpp"

namespace xlmimo {

/// Gamma posterior over a sub-array's noise precision. The rate is floored
/// so the posterior mean stays finite when the residual vanishes.
struct NoisePrecision {
  double alpha = 1.0;  // shape, equals the sub-array antenna count
  double beta = 1.0;   // rate, equals the residual energy (floored)
  double mean() const { return alpha / beta; }
};

/// Gaussian message from the observation factor to one symbol variable.
struct GaussianMessage {
  std::complex<double> mean;
  double variance = 0.0;
};

/// Everything one local processing unit tracks for its sub-array: the
/// local channel and signal slice, per-user beliefs and prior factors, the
/// noise-precision estimate, and cached belief moments.
class LpuState {
 public:
  LpuState() = default;
  LpuState(int index, CMatrix channel, CVector received, const Constellation& a);

  int index() const { return index_; }
  int antennas() const { return static_cast<int>(channel_.rows()); }
  int users() const { return static_cast<int>(channel_.cols()); }

  const CMatrix& channel() const { return channel_; }
  const CVector& received() const { return received_; }
  void set_received(const CVector& y);

  const SymbolPmf& marginal(int user) const { return marginals_[user]; }
  const SymbolPmf& prior(int user) const { return priors_[user]; }
  bool active(int user) const { return active_[user] != 0; }
  std::complex<double> mean(int user) const { return mean_[user]; }
  double variance(int user) const { return variance_[user]; }
  double column_energy(int user) const { return column_energy_[user]; }
  const NoisePrecision& precision() const { return precision_; }

  /// Replaces a user's belief and refreshes its cached moments.
  void set_marginal(int user, SymbolPmf q, const Constellation& a);
  /// Replaces a user's prior factor (uniform by default; delta for
  /// cancelled users goes through fix_user instead).
  void set_prior(int user, SymbolPmf q) { priors_[user] = std::move(q); }
  void set_precision(NoisePrecision p) { precision_ = p; }

  /// Pins a detected user: delta prior and belief, removed from every
  /// residual and message sum from now on.
  void fix_user(int user, int symbol, const Constellation& a);

  /// Recomputes all cached moments from the stored beliefs.
  void refresh_moments(const Constellation& a);

 private:
  int index_ = 0;
  CMatrix channel_;
  CVector received_;
  std::vector<SymbolPmf> marginals_;
  std::vector<SymbolPmf> priors_;
  std::vector<std::uint8_t> active_;
  std::vector<std::complex<double>> mean_;
  std::vector<double> variance_;
  std::vector<double> column_energy_;
  NoisePrecision precision_;
};

/// Residual energy Z_b: squared distance between y_b and the belief-mean
/// reconstruction, plus the belief-variance-weighted column energies.
/// Detected (inactive) users are excluded.
double residual_energy(const LpuState& state);

/// Gamma posterior from the current residual: shape = antennas,
/// rate = max(Z_b, 1e-12 * antennas).
NoisePrecision update_precision(const LpuState& state);

/// Message from the observation factor to user k's symbol: interference-
/// cancelled matched-filter output with variance 1/(lambda * ||h||^2).
/// The user's channel column must be nonzero.
GaussianMessage symbol_message(const LpuState& state, int user);

/// Belief proportional to the Gaussian message times the prior factor.
SymbolPmf local_marginal(const GaussianMessage& message, const SymbolPmf& prior,
                         const Constellation& a);

/// One or more mean-field sweeps over the sub-array: refresh moments,
/// update the noise precision, then update each active user's belief in
/// ascending index order, committing each update before the next user
/// (set parallel_update to defer all commits to the end of the sweep).
/// Users whose local channel column is zero receive a uniform belief.
void run_local_vmp(LpuState& state, const Constellation& a, int iterations,
                   bool parallel_update = false);

std::vector<SymbolPmf> init_uniform(int users, const Constellation& a);

/// Matched-filter initialization: per-user MRC estimate with a Gaussian
/// variance from residual interference plus noise. Pass the full channel
/// and signal for the global variant or a sub-array slice for the local
/// one. Inactive users keep a uniform belief, as do users with a zero
/// column. The variance is floored at 1e-12.
std::vector<SymbolPmf> init_mrc(const CMatrix& h, const CVector& y, double noise_var,
                                const Constellation& a,
                                std::span<const std::uint8_t> active = {});

/// Zero-forcing initialization over the active columns. Raises
/// SingularChannelError when the active channel is rank deficient (the
/// caller is expected to fall back to init_mrc).
std::vector<SymbolPmf> init_zf(const CMatrix& h, const CVector& y, double noise_var,
                               const Constellation& a,
                               std::span<const std::uint8_t> active = {});

}  // namespace xlmimo

#endif  // XLMIMO_LPU_HPP
