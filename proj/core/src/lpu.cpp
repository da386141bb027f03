// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 the xlmimo authors

#include "xlmimo/lpu.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <stdexcept>

namespace xlmimo {

LpuState::LpuState(int index, CMatrix channel, CVector received, const Constellation& a)
    : index_(index), channel_(std::move(channel)), received_(std::move(received)) {
  if (channel_.rows() != received_.size())
    throw std::invalid_argument("LpuState: channel and signal sizes disagree");
  const int k = users();
  marginals_.assign(k, SymbolPmf::uniform(a.size()));
  priors_.assign(k, SymbolPmf::uniform(a.size()));
  active_.assign(k, 1);
  mean_.assign(k, 0.0);
  variance_.assign(k, 0.0);
  column_energy_.resize(k);
  for (int u = 0; u < k; ++u) column_energy_[u] = channel_.col(u).squaredNorm();
  refresh_moments(a);
}

void LpuState::set_received(const CVector& y) {
  if (y.size() != received_.size())
    throw std::invalid_argument("LpuState: signal size changed");
  received_ = y;
}

void LpuState::set_marginal(int user, SymbolPmf q, const Constellation& a) {
  const PmfMoments m = pmf_moments(q, a);
  marginals_[user] = std::move(q);
  mean_[user] = m.mean;
  variance_[user] = m.variance;
}

void LpuState::fix_user(int user, int symbol, const Constellation& a) {
  priors_[user] = SymbolPmf::delta(a.size(), symbol);
  set_marginal(user, SymbolPmf::delta(a.size(), symbol), a);
  active_[user] = 0;
}

void LpuState::refresh_moments(const Constellation& a) {
  for (int u = 0; u < users(); ++u) {
    const PmfMoments m = pmf_moments(marginals_[u], a);
    mean_[u] = m.mean;
    variance_[u] = m.variance;
  }
}

double residual_energy(const LpuState& state) {
  CVector residual = state.received();
  double weighted = 0.0;
  for (int u = 0; u < state.users(); ++u) {
    if (!state.active(u)) continue;
    residual -= state.mean(u) * state.channel().col(u);
    weighted += state.variance(u) * state.column_energy(u);
  }
  return residual.squaredNorm() + weighted;
}

NoisePrecision update_precision(const LpuState& state) {
  NoisePrecision p;
  p.alpha = static_cast<double>(state.antennas());
  p.beta = std::max(residual_energy(state), 1e-12 * p.alpha);
  return p;
}

GaussianMessage symbol_message(const LpuState& state, int user) {
  const double energy = state.column_energy(user);
  if (energy <= 0.0)
    throw std::invalid_argument("symbol_message: user has a zero channel column");
  CVector cancelled = state.received();
  for (int u = 0; u < state.users(); ++u) {
    if (u == user || !state.active(u)) continue;
    cancelled -= state.mean(u) * state.channel().col(u);
  }
  GaussianMessage msg;
  msg.mean = state.channel().col(user).dot(cancelled) / energy;
  msg.variance = 1.0 / (state.precision().mean() * energy);
  return msg;
}

SymbolPmf local_marginal(const GaussianMessage& message, const SymbolPmf& prior,
                         const Constellation& a) {
  if (!(message.variance > 0.0))
    throw std::invalid_argument("local_marginal: message variance must be positive");
  std::vector<double> logs(a.size());
  double max_log = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < a.size(); ++i) {
    logs[i] = prior.w[i] > 0.0
                  ? std::log(prior.w[i]) - std::norm(a.points[i] - message.mean) / message.variance
                  : -std::numeric_limits<double>::infinity();
    max_log = std::max(max_log, logs[i]);
  }
  if (!std::isfinite(max_log))
    throw std::runtime_error("local_marginal: belief underflowed to zero everywhere");
  SymbolPmf q;
  q.w.resize(a.size());
  double total = 0.0;
  for (int i = 0; i < a.size(); ++i) {
    q.w[i] = std::exp(logs[i] - max_log);
    total += q.w[i];
  }
  for (double& x : q.w) x /= total;
  return q;
}

void run_local_vmp(LpuState& state, const Constellation& a, int iterations,
                   bool parallel_update) {
  if (iterations < 1) throw std::invalid_argument("run_local_vmp: iterations must be >= 1");
  const int k = state.users();
  for (int it = 0; it < iterations; ++it) {
    state.refresh_moments(a);
    state.set_precision(update_precision(state));

    // Track the interference-cancelled residual incrementally; each user's
    // message just adds its own column contribution back.
    CVector residual = state.received();
    for (int u = 0; u < k; ++u)
      if (state.active(u)) residual -= state.mean(u) * state.channel().col(u);

    std::vector<SymbolPmf> pending;
    if (parallel_update) pending.resize(k);

    std::vector<int> sweep(k);
    for (int u = 0; u < k; ++u) sweep[u] = u;
    if (std::getenv("XLSIM_ENERGY_ORDER")) {
      std::stable_sort(sweep.begin(), sweep.end(), [&](int a2, int b2) {
        return state.column_energy(a2) > state.column_energy(b2);
      });
    }
    for (int u : sweep) {
      if (!state.active(u)) continue;
      SymbolPmf updated;
      if (state.column_energy(u) <= 0.0) {
        updated = SymbolPmf::uniform(a.size());
      } else {
        GaussianMessage msg;
        msg.mean = state.channel().col(u).dot(residual + state.mean(u) * state.channel().col(u)) /
                   state.column_energy(u);
        msg.variance = 1.0 / (state.precision().mean() * state.column_energy(u));
        updated = local_marginal(msg, state.prior(u), a);
      }
      if (parallel_update) {
        pending[u] = std::move(updated);
      } else {
        const std::complex<double> old_mean = state.mean(u);
        state.set_marginal(u, std::move(updated), a);
        residual -= (state.mean(u) - old_mean) * state.channel().col(u);
      }
    }
    if (parallel_update)
      for (int u = 0; u < k; ++u)
        if (state.active(u)) state.set_marginal(u, std::move(pending[u]), a);
  }
}

std::vector<SymbolPmf> init_uniform(int users, const Constellation& a) {
  return std::vector<SymbolPmf>(users, SymbolPmf::uniform(a.size()));
}

namespace {

std::vector<std::uint8_t> all_active(int users, std::span<const std::uint8_t> active) {
  if (active.empty()) return std::vector<std::uint8_t>(users, 1);
  if (static_cast<int>(active.size()) != users)
    throw std::invalid_argument("init: active mask size mismatch");
  return {active.begin(), active.end()};
}

}  // namespace

std::vector<SymbolPmf> init_mrc(const CMatrix& h, const CVector& y, double noise_var,
                                const Constellation& a,
                                std::span<const std::uint8_t> active) {
  const int users = static_cast<int>(h.cols());
  const auto mask = all_active(users, active);
  std::vector<SymbolPmf> out(users, SymbolPmf::uniform(a.size()));
  for (int k = 0; k < users; ++k) {
    if (!mask[k]) continue;
    const double energy = h.col(k).squaredNorm();
    if (energy <= 0.0) continue;  // invisible here: no information
    const std::complex<double> estimate = h.col(k).dot(y) / energy;
    double interference = 0.0;
    for (int j = 0; j < users; ++j) {
      if (j == k || !mask[j]) continue;
      interference += std::norm(h.col(k).dot(h.col(j)));  // unit symbol power
    }
    const double var =
        std::max((interference + energy * noise_var) / (energy * energy), 1e-12);
    out[k] = gaussian_to_pmf(estimate, var, a);
  }
  return out;
}

std::vector<SymbolPmf> init_zf(const CMatrix& h, const CVector& y, double noise_var,
                               const Constellation& a,
                               std::span<const std::uint8_t> active) {
  const int users = static_cast<int>(h.cols());
  const auto mask = all_active(users, active);
  std::vector<int> cols;
  for (int k = 0; k < users; ++k)
    if (mask[k]) cols.push_back(k);
  if (cols.empty()) return std::vector<SymbolPmf>(users, SymbolPmf::uniform(a.size()));

  CMatrix pruned(h.rows(), cols.size());
  for (std::size_t j = 0; j < cols.size(); ++j) pruned.col(j) = h.col(cols[j]);
  if (pruned.rows() < pruned.cols())
    throw SingularChannelError("init_zf: fewer antennas than active users", 0.0);

  std::vector<SymbolPmf> out(users, SymbolPmf::uniform(a.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) {
    const ZfFilter zf = solve_projected_zf(pruned, static_cast<int>(j));
    const std::complex<double> estimate = (zf.filter * y)(0);
    const double var = std::max(noise_var / zf.gain, 1e-12);
    out[cols[j]] = gaussian_to_pmf(estimate, var, a);
  }
  return out;
}

}  // namespace xlmimo
