// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 the xlmimo authors

#ifndef XLMIMO_FUSION_HPP
#define XLMIMO_FUSION_HPP

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "xlmimo/lpu.hpp"

namespace xlmimo {

enum class FusionMode { All, Power, Precision, Hybrid };  // ALL / PWR / NOP / HYB
enum class InitMode { Uniform, MrcGlobal, MrcLocal, ZfGlobal, ZfLocal };
enum class InitStrategy { OneTime, PerSicStep };

std::string to_string(FusionMode m);
std::string to_string(InitMode m);
std::string to_string(InitStrategy s);
FusionMode fusion_mode_from_string(const std::string& s);
InitMode init_mode_from_string(const std::string& s);
InitStrategy init_strategy_from_string(const std::string& s);

/// B x K selector of which sub-arrays contribute to each user's fused
/// belief. Every column has at least one 1.
struct FusionMatrix {
  Eigen::MatrixXi v;
  FusionMode mode = FusionMode::All;
  double power_ratio = 0.75;  // p0, PWR only
  int budget = 0;             // B_max, NOP/HYB only

  std::vector<int> column(int user) const;  // selected sub-arrays, ascending
};

/// Per-(sub-array, user) reliability score: row-scaled energies
/// gamma_{b,k} = lambda_b * ||h~_{b,k}||^2.
struct HybridMeasure {
  Eigen::MatrixXd gamma;   // B x K
  Eigen::MatrixXd energy;  // B x K, entry (b,k) = ||h~_{b,k}||^2
  Eigen::VectorXd lambda;  // length B
};

HybridMeasure hybrid_measure(const CMatrix& h, int subarrays,
                             const Eigen::VectorXd& lambda);

/// Builds the fusion selector.
///   All:       every entry 1.
///   Power:     per user, add sub-arrays in decreasing captured energy until
///              the kept energy strictly exceeds p0 times the user total
///              (a zero-energy user falls back to the full column).
///   Precision: rows of the budget sub-arrays with largest lambda set to 1.
///   Hybrid:    per user, ones at the budget largest hybrid-measure entries.
/// Sorting ties resolve to the lower sub-array index.
FusionMatrix build_fusion_matrix(FusionMode mode, const CMatrix& h, int subarrays,
                                 const Eigen::VectorXd& lambda, double power_ratio,
                                 int budget);

/// Normalized product of the selected local beliefs, in the log domain.
/// If the supports are disjoint the result falls back to uniform and
/// *conflict (when given) is set.
SymbolPmf fuse_marginals(std::span<const SymbolPmf* const> locals,
                         bool* conflict = nullptr);

/// Argmax symbol index; exact ties resolve to the lowest index.
int hard_detect(const SymbolPmf& q);

/// Ratio of the largest to the second-largest weight (+inf when the
/// second-largest is zero; 1 when the top two tie).
double certainty_ratio(const SymbolPmf& q);

struct DetectionResult {
  std::vector<int> symbols;           // detected constellation index per user
  std::vector<int> order;             // detection order (identity if one-shot)
  std::vector<SymbolPmf> marginals;   // fused belief at decision time
  std::vector<double> certainty;      // certainty ratio at decision time
};

struct VmpOptions {
  int subarrays = 4;
  int iterations = 1;
  InitMode init = InitMode::MrcGlobal;
  InitStrategy strategy = InitStrategy::PerSicStep;
  FusionMode fusion = FusionMode::All;
  double power_ratio = 0.75;
  int budget = 3;
  bool parallel_update = false;
  /// Optional sink for non-fatal events (ZF fallback, fusion conflicts).
  std::function<void(const std::string&)> warn;
};

/// Distributed VMP with successive interference cancellation: per step,
/// re-initialize the undetected users (strategy permitting), run all LPUs,
/// rebuild the fusion matrix, fuse, detect the user with the highest
/// certainty ratio, cancel it from the received signal everywhere, and pin
/// its belief.
DetectionResult sic_detect(const CVector& y, const CMatrix& h, double noise_var,
                           const Constellation& a, const VmpOptions& opt);

/// One initialization, one LPU pass, one fusion, one hard decision per
/// user; no cancellation.
DetectionResult detect_noniterative(const CVector& y, const CMatrix& h, double noise_var,
                                    const Constellation& a, const VmpOptions& opt);

}  // namespace xlmimo

#endif  // XLMIMO_FUSION_HPP
