// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 the xlmimo authors

#ifndef XLMIMO_CHANNEL_HPP
#define XLMIMO_CHANNEL_HPP

#include <memory>
#include <span>
#include <vector>

#include "xlmimo/linalg.hpp"
#include "xlmimo/rng.hpp"

namespace xlmimo {

/// Geometry and statistics parameters of the non-stationary
/// double-scattering channel. Angles in radians, distances in meters.
struct ChannelConfig {
  int antennas = 256;              // M
  int users = 32;                  // K
  int subarrays = 4;               // B
  int bs_clusters = 20;            // C
  int scatterers_per_cluster = 31; // S_i, same for every BS-cluster
  int ucluster_scatterers = 31;    // S, virtual antennas at the user side
  int clusters_per_user = 4;       // n_b

  double bs_spacing_m = 0.0578;       // d_r
  double ucluster_spacing_m = 5.0;    // d_s
  double wavelength_norm = 0.5;       // d_r expressed in wavelengths

  // Visibility-region distributions.
  double vr_length_log_mean = 0.7;    // l_i ~ lognormal, meters
  double vr_length_log_sigma = 0.2;
  double slope_mean_db_per_m = -0.21; // psi_i ~ normal, dB/m
  double slope_sigma_db_per_m = 0.8;

  double bs_angular_spread = 7.0 * 3.14159265358979323846 / 8.0;  // theta_i
  double ucluster_angular_spread = 3.0 * 3.14159265358979323846 / 4.0;

  int refresh_period = 50;  // realizations between correlation refreshes

  void validate() const;
  int subarray_antennas() const { return antennas / subarrays; }
  double array_length_m() const { return antennas * bs_spacing_m; }
  /// d_s expressed in wavelengths, using the same wavelength as d_r.
  double ucluster_spacing_wavelengths() const {
    return ucluster_spacing_m * wavelength_norm / bs_spacing_m;
  }
};

/// Per-cluster visibility regions on the array. Antenna indices are
/// 1-based; each region is the contiguous run of antennas whose positions
/// d_r*(n-1) fall inside [c_i - l_i/2, c_i + l_i/2] clipped to the array.
struct ClusterGeometry {
  std::vector<double> center_m;        // c_i
  std::vector<double> length_m;        // l_i
  std::vector<double> slope_db_per_m;  // psi_i (signed as drawn)
  std::vector<double> azimuth_rad;     // alpha_i
  std::vector<int> first_antenna;      // a_1^i
  std::vector<int> antenna_count;      // r_i

  int clusters() const { return static_cast<int>(center_m.size()); }
};

/// Which BS-clusters (and therefore which scatterers) each user sees.
/// Cluster and scatterer indices are 0-based.
struct UserVisibility {
  std::vector<std::vector<int>> clusters;    // V_k, sorted, |V_k| = n_b
  std::vector<std::vector<int>> scatterers;  // S_k, union of cluster blocks

  int users() const { return static_cast<int>(clusters.size()); }
};

/// Long-term state shared by every realization within a refresh period:
/// geometry, visibility gains, correlation matrices and their Hermitian
/// square roots, and per-user cluster visibility.
struct ChannelStatistics {
  ClusterGeometry geometry;
  std::vector<Eigen::VectorXd> visibility_gains;  // rho_i diagonal, length r_i
  std::vector<CMatrix> bs_corr;                   // R_i, r_i x r_i
  std::vector<CMatrix> bs_corr_sqrt;
  std::vector<std::vector<CMatrix>> u_corr;       // [cluster][user], S_i x S_i
  std::vector<std::vector<CMatrix>> u_corr_sqrt;
  std::vector<std::vector<double>> u_azimuth;     // alpha~_{i,k}
  UserVisibility visibility;
  int antennas = 0;
  int ucluster_scatterers = 0;
};

/// One channel realization: H plus the fast-fading draws and a handle on
/// the statistics that produced it (null for i.i.d. channels).
struct ChannelRealization {
  CMatrix matrix;  // M x K
  std::shared_ptr<const ChannelStatistics> statistics;
  std::vector<CMatrix> cluster_fading;  // G_i, r_i x S_i
  CMatrix user_fading;                  // S x K, column k is g_k

  int antennas() const { return static_cast<int>(matrix.rows()); }
  int users() const { return static_cast<int>(matrix.cols()); }
};

/// Rows of H owned by sub-array b when the array splits into `subarrays`
/// equal blocks. Stacking the B blocks in order reproduces H exactly.
inline auto subarray_rows(const CMatrix& h, int subarray, int subarrays) {
  const int mb = static_cast<int>(h.rows()) / subarrays;
  return h.middleRows(static_cast<Eigen::Index>(subarray) * mb, mb);
}

/// Contiguous 1-based antenna run {first, count} covered by the interval
/// [center - length/2, center + length/2]; count is 0 when no antenna
/// position falls inside after clipping to the array.
std::pair<int, int> antenna_region(double center_m, double length_m, double spacing_m,
                                   int antennas);

ClusterGeometry sample_geometry(const ChannelConfig& cfg, Rng& rng);

/// Energy captured by antenna n (1-based) from cluster i: zero outside the
/// visibility region, otherwise a dB-linear decay from the region center.
double visibility_gain(const ClusterGeometry& geom, int cluster, int antenna,
                       double spacing_m);

/// M x r_i selection matrix placing a cluster's antennas into the array.
CMatrix association_matrix(const ClusterGeometry& geom, int cluster, int antennas);

/// BS-side correlation: scatterers spread around azimuth alpha with total
/// angular spread theta, antenna spacing given in wavelengths.
CMatrix bs_correlation(int scatterers, double spacing_wavelengths, double azimuth,
                       double angular_spread, int size);

/// User-side correlation between a BS-cluster and the U-cluster's virtual
/// array; size equals the cluster's scatterer count.
CMatrix u_correlation(int scatterers, double spacing_wavelengths, double azimuth,
                      double angular_spread);

UserVisibility sample_visibility(const ChannelConfig& cfg, Rng& rng);

/// S' x S binary mask whose row m is all ones iff scatterer m is visible
/// to the user.
CMatrix visibility_matrix(const UserVisibility& vis, int user, int total_scatterers,
                          int ucluster_scatterers);

std::shared_ptr<const ChannelStatistics> sample_statistics(const ChannelConfig& cfg,
                                                           Rng& rng);

/// Draws fresh fast fading and assembles H from the long-term statistics.
ChannelRealization assemble_channel(const ChannelConfig& cfg,
                                    std::shared_ptr<const ChannelStatistics> stats,
                                    Rng& rng);

/// Scales every member of the batch by a common factor chosen so the
/// batch-average of trace(H H^H) equals the antenna count; returns the
/// factor.
double normalize_channel(std::span<ChannelRealization> batch);

ChannelRealization make_iid_channel(int antennas, int users, Rng& rng);

/// Writes realizations back to back as little-endian complex doubles in
/// column-major order, prefixed by a small header (see README).
void dump_channels(std::span<const ChannelRealization> batch, const std::string& path);

}  // namespace xlmimo

#endif  // XLMIMO_CHANNEL_HPP
