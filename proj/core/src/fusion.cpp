// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 the xlmimo authors

#include "xlmimo/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "xlmimo/channel.hpp"

namespace xlmimo {

std::string to_string(FusionMode m) {
  switch (m) {
    case FusionMode::All: return "all";
    case FusionMode::Power: return "pwr";
    case FusionMode::Precision: return "nop";
    case FusionMode::Hybrid: return "hyb";
  }
  return "?";
}

std::string to_string(InitMode m) {
  switch (m) {
    case InitMode::Uniform: return "uniform";
    case InitMode::MrcGlobal: return "mrc-global";
    case InitMode::MrcLocal: return "mrc-local";
    case InitMode::ZfGlobal: return "zf-global";
    case InitMode::ZfLocal: return "zf-local";
  }
  return "?";
}

std::string to_string(InitStrategy s) {
  return s == InitStrategy::OneTime ? "one-time" : "per-sic-step";
}

FusionMode fusion_mode_from_string(const std::string& s) {
  if (s == "all") return FusionMode::All;
  if (s == "pwr") return FusionMode::Power;
  if (s == "nop") return FusionMode::Precision;
  if (s == "hyb") return FusionMode::Hybrid;
  throw std::invalid_argument("unknown fusion mode: " + s);
}

InitMode init_mode_from_string(const std::string& s) {
  if (s == "uniform") return InitMode::Uniform;
  if (s == "mrc-global") return InitMode::MrcGlobal;
  if (s == "mrc-local") return InitMode::MrcLocal;
  if (s == "zf-global") return InitMode::ZfGlobal;
  if (s == "zf-local") return InitMode::ZfLocal;
  throw std::invalid_argument("unknown init mode: " + s);
}

InitStrategy init_strategy_from_string(const std::string& s) {
  if (s == "one-time") return InitStrategy::OneTime;
  if (s == "per-sic-step") return InitStrategy::PerSicStep;
  throw std::invalid_argument("unknown init strategy: " + s);
}

std::vector<int> FusionMatrix::column(int user) const {
  std::vector<int> out;
  for (int b = 0; b < v.rows(); ++b)
    if (v(b, user) != 0) out.push_back(b);
  return out;
}

HybridMeasure hybrid_measure(const CMatrix& h, int subarrays,
                             const Eigen::VectorXd& lambda) {
  if (lambda.size() != subarrays)
    throw std::invalid_argument("hybrid_measure: lambda size mismatch");
  HybridMeasure m;
  const int users = static_cast<int>(h.cols());
  m.energy.resize(subarrays, users);
  for (int b = 0; b < subarrays; ++b)
    for (int k = 0; k < users; ++k)
      m.energy(b, k) = subarray_rows(h, b, subarrays).col(k).squaredNorm();
  m.lambda = lambda;
  m.gamma = lambda.asDiagonal() * m.energy;
  return m;
}

namespace {

// Indices 0..n-1 ordered by decreasing score, ties by lower index.
std::vector<int> order_by_score_desc(const Eigen::VectorXd& score) {
  std::vector<int> idx(score.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](int a, int b) { return score(a) > score(b); });
  return idx;
}

}  // namespace

FusionMatrix build_fusion_matrix(FusionMode mode, const CMatrix& h, int subarrays,
                                 const Eigen::VectorXd& lambda, double power_ratio,
                                 int budget) {
  const int users = static_cast<int>(h.cols());
  if (h.rows() % subarrays != 0)
    throw std::invalid_argument("build_fusion_matrix: antennas must split evenly");
  FusionMatrix out;
  out.mode = mode;
  out.power_ratio = power_ratio;
  out.budget = budget;
  out.v = Eigen::MatrixXi::Zero(subarrays, users);

  switch (mode) {
    case FusionMode::All:
      out.v.setOnes();
      break;

    case FusionMode::Power: {
      if (!(power_ratio > 0.0 && power_ratio <= 1.0))
        throw std::invalid_argument("build_fusion_matrix: power ratio must be in (0, 1]");
      for (int k = 0; k < users; ++k) {
        Eigen::VectorXd energy(subarrays);
        for (int b = 0; b < subarrays; ++b)
          energy(b) = subarray_rows(h, b, subarrays).col(k).squaredNorm();
        const double total = energy.sum();
        if (total <= 0.0) {
          std::clog << "xlmimo: PWR fusion saw a zero-energy user, using all sub-arrays\n";
          out.v.col(k).setOnes();
          continue;
        }
        const auto ranked = order_by_score_desc(energy);
        double kept = 0.0;
        for (int b : ranked) {
          if (kept > power_ratio * total) break;
          kept += energy(b);
          out.v(b, k) = 1;
        }
      }
      break;
    }

    case FusionMode::Precision: {
      if (budget < 1 || budget > subarrays)
        throw std::invalid_argument("build_fusion_matrix: budget out of range");
      if (lambda.size() != subarrays)
        throw std::invalid_argument("build_fusion_matrix: lambda size mismatch");
      const auto ranked = order_by_score_desc(lambda);
      for (int j = 0; j < budget; ++j) out.v.row(ranked[j]).setOnes();
      break;
    }

    case FusionMode::Hybrid: {
      if (budget < 1 || budget > subarrays)
        throw std::invalid_argument("build_fusion_matrix: budget out of range");
      const HybridMeasure m = hybrid_measure(h, subarrays, lambda);
      for (int k = 0; k < users; ++k) {
        const auto ranked = order_by_score_desc(m.gamma.col(k));
        for (int j = 0; j < budget; ++j) out.v(ranked[j], k) = 1;
      }
      break;
    }
  }
  return out;
}

SymbolPmf fuse_marginals(std::span<const SymbolPmf* const> locals, bool* conflict) {
  if (locals.empty()) throw std::invalid_argument("fuse_marginals: empty selection");
  const int n = locals.front()->size();
  std::vector<double> logs(n, 0.0);
  for (const SymbolPmf* q : locals) {
    if (q->size() != n) throw std::invalid_argument("fuse_marginals: size mismatch");
    for (int i = 0; i < n; ++i)
      logs[i] += q->w[i] > 0.0 ? std::log(q->w[i])
                               : -std::numeric_limits<double>::infinity();
  }
  const double max_log = *std::max_element(logs.begin(), logs.end());
  if (conflict) *conflict = false;
  if (!std::isfinite(max_log)) {
    if (conflict) *conflict = true;
    return SymbolPmf::uniform(n);
  }
  SymbolPmf out;
  out.w.resize(n);
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    out.w[i] = std::exp(logs[i] - max_log);
    total += out.w[i];
  }
  for (double& x : out.w) x /= total;
  return out;
}

int hard_detect(const SymbolPmf& q) {
  int best = 0;
  for (int i = 1; i < q.size(); ++i)
    if (q.w[i] > q.w[best]) best = i;
  return best;
}

double certainty_ratio(const SymbolPmf& q) {
  if (q.size() < 2) throw std::invalid_argument("certainty_ratio: need >= 2 weights");
  double top = -1.0, second = -1.0;
  for (double x : q.w) {
    if (x > top) {
      second = top;
      top = x;
    } else if (x > second) {
      second = x;
    }
  }
  if (second <= 0.0) return std::numeric_limits<double>::infinity();
  return top / second;
}

namespace {

/// The CPU-plus-LPUs pipeline shared by both detectors.
class DetectionEngine {
 public:
  DetectionEngine(const CVector& y, const CMatrix& h, double noise_var,
                  const Constellation& a, const VmpOptions& opt)
      : h_(h), a_(a), opt_(opt), noise_var_(noise_var), residual_(y) {
    if (h.cols() < 1) throw std::invalid_argument("detect: need at least one user");
    if (y.size() != h.rows()) throw std::invalid_argument("detect: signal length mismatch");
    if (opt.subarrays < 1 || h.rows() % opt.subarrays != 0)
      throw std::invalid_argument("detect: antennas must split evenly into sub-arrays");
    const int users = static_cast<int>(h.cols());
    active_.assign(users, 1);
    lpus_.reserve(opt.subarrays);
    const int mb = static_cast<int>(h.rows()) / opt.subarrays;
    for (int b = 0; b < opt.subarrays; ++b)
      lpus_.emplace_back(b, subarray_rows(h, b, opt.subarrays),
                         residual_.segment(static_cast<Eigen::Index>(b) * mb, mb), a_);
  }

  int users() const { return static_cast<int>(h_.cols()); }

  void initialize_marginals() {
    switch (opt_.init) {
      case InitMode::Uniform: {
        for (auto& lpu : lpus_)
          for (int k = 0; k < users(); ++k)
            if (active_[k]) lpu.set_marginal(k, SymbolPmf::uniform(a_.size()), a_);
        break;
      }
      case InitMode::MrcGlobal:
      case InitMode::ZfGlobal: {
        const auto marginals = opt_.init == InitMode::ZfGlobal
                                   ? zf_with_fallback(h_, residual_)
                                   : init_mrc(h_, residual_, noise_var_, a_, active_);
        for (auto& lpu : lpus_)
          for (int k = 0; k < users(); ++k)
            if (active_[k]) lpu.set_marginal(k, marginals[k], a_);
        break;
      }
      case InitMode::MrcLocal:
      case InitMode::ZfLocal: {
        for (auto& lpu : lpus_) {
          const auto marginals =
              opt_.init == InitMode::ZfLocal
                  ? zf_with_fallback(lpu.channel(), lpu.received())
                  : init_mrc(lpu.channel(), lpu.received(), noise_var_, a_, active_);
          for (int k = 0; k < users(); ++k)
            if (active_[k]) lpu.set_marginal(k, marginals[k], a_);
        }
        break;
      }
    }
  }

  void run_lpus() {
    for (auto& lpu : lpus_) run_local_vmp(lpu, a_, opt_.iterations, opt_.parallel_update);
  }

  Eigen::VectorXd lambdas() const {
    Eigen::VectorXd l(lpus_.size());
    for (std::size_t b = 0; b < lpus_.size(); ++b) l(b) = lpus_[b].precision().mean();
    return l;
  }

  SymbolPmf fuse_user(const FusionMatrix& v, int user) {
    std::vector<const SymbolPmf*> picked;
    for (int b = 0; b < static_cast<int>(lpus_.size()); ++b)
      if (v.v(b, user) != 0) picked.push_back(&lpus_[b].marginal(user));
    bool conflict = false;
    SymbolPmf fused = fuse_marginals(picked, &conflict);
    if (conflict) warn("fusion conflict: disjoint supports, using a uniform belief");
    return fused;
  }

  void cancel(int user, int symbol) {
    residual_ -= a_.points[symbol] * h_.col(user);
    const int mb = static_cast<int>(h_.rows()) / opt_.subarrays;
    for (int b = 0; b < opt_.subarrays; ++b) {
      lpus_[b].set_received(residual_.segment(static_cast<Eigen::Index>(b) * mb, mb));
      lpus_[b].fix_user(user, symbol, a_);
    }
    active_[user] = 0;
  }

  const std::vector<std::uint8_t>& active() const { return active_; }

 private:
  std::vector<SymbolPmf> zf_with_fallback(const CMatrix& h, const CVector& y) {
    try {
      return init_zf(h, y, noise_var_, a_, active_);
    } catch (const SingularChannelError& e) {
      warn(std::string("ZF initialization failed (") + e.what() + "), using MRC");
      return init_mrc(h, y, noise_var_, a_, active_);
    }
  }

  void warn(const std::string& msg) {
    if (opt_.warn) opt_.warn(msg);
  }

  const CMatrix& h_;
  const Constellation& a_;
  const VmpOptions& opt_;
  double noise_var_;
  CVector residual_;
  std::vector<LpuState> lpus_;
  std::vector<std::uint8_t> active_;
};

}  // namespace

DetectionResult sic_detect(const CVector& y, const CMatrix& h, double noise_var,
                           const Constellation& a, const VmpOptions& opt) {
  DetectionEngine engine(y, h, noise_var, a, opt);
  const int users = engine.users();
  DetectionResult result;
  result.symbols.assign(users, 0);
  result.marginals.assign(users, SymbolPmf::uniform(a.size()));
  result.certainty.assign(users, 0.0);
  result.order.reserve(users);

  for (int step = 0; step < users; ++step) {
    if (step == 0 || opt.strategy == InitStrategy::PerSicStep)
      engine.initialize_marginals();
    engine.run_lpus();
    const FusionMatrix v = build_fusion_matrix(opt.fusion, h, opt.subarrays,
                                               engine.lambdas(), opt.power_ratio,
                                               opt.budget);
    int best = -1;
    double best_score = -1.0;
    std::vector<SymbolPmf> fused(users);
    std::vector<double> score(users, 0.0);
    for (int k = 0; k < users; ++k) {
      if (!engine.active()[k]) continue;
      fused[k] = engine.fuse_user(v, k);
      score[k] = certainty_ratio(fused[k]);
      if (score[k] > best_score) {
        best_score = score[k];
        best = k;
      }
    }
    const int symbol = hard_detect(fused[best]);
    result.symbols[best] = symbol;
    result.marginals[best] = std::move(fused[best]);
    result.certainty[best] = score[best];
    result.order.push_back(best);
    engine.cancel(best, symbol);
  }
  return result;
}

DetectionResult detect_noniterative(const CVector& y, const CMatrix& h, double noise_var,
                                    const Constellation& a, const VmpOptions& opt) {
  DetectionEngine engine(y, h, noise_var, a, opt);
  const int users = engine.users();
  engine.initialize_marginals();
  engine.run_lpus();
  const FusionMatrix v = build_fusion_matrix(opt.fusion, h, opt.subarrays,
                                             engine.lambdas(), opt.power_ratio,
                                             opt.budget);
  DetectionResult result;
  result.symbols.resize(users);
  result.marginals.resize(users);
  result.certainty.resize(users);
  result.order.resize(users);
  std::iota(result.order.begin(), result.order.end(), 0);
  for (int k = 0; k < users; ++k) {
    result.marginals[k] = engine.fuse_user(v, k);
    result.certainty[k] = certainty_ratio(result.marginals[k]);
    result.symbols[k] = hard_detect(result.marginals[k]);
  }
  return result;
}

}  // namespace xlmimo
