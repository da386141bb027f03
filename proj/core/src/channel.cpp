// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 the xlmimo authors

#include "xlmimo/channel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace xlmimo {

void ChannelConfig::validate() const {
  if (antennas < 1 || users < 1) throw std::invalid_argument("channel: antennas and users must be positive");
  if (subarrays < 1 || antennas % subarrays != 0)
    throw std::invalid_argument("channel: antennas must split evenly into subarrays");
  if (bs_clusters < 1) throw std::invalid_argument("channel: need at least one BS-cluster");
  if (scatterers_per_cluster < 1) throw std::invalid_argument("channel: scatterers_per_cluster must be >= 1");
  if (ucluster_scatterers < 1) throw std::invalid_argument("channel: ucluster_scatterers must be >= 1");
  if (clusters_per_user < 1 || clusters_per_user > bs_clusters)
    throw std::invalid_argument("channel: clusters_per_user must be in [1, bs_clusters]");
  if (bs_spacing_m <= 0.0 || ucluster_spacing_m <= 0.0)
    throw std::invalid_argument("channel: spacings must be positive");
  if (wavelength_norm <= 0.0) throw std::invalid_argument("channel: wavelength_norm must be positive");
  if (refresh_period < 1) throw std::invalid_argument("channel: refresh_period must be >= 1");
}

std::pair<int, int> antenna_region(double center_m, double length_m, double spacing_m,
                                   int antennas) {
  const double lo = center_m - 0.5 * length_m;
  const double hi = center_m + 0.5 * length_m;
  int first = static_cast<int>(std::ceil(lo / spacing_m)) + 1;
  int last = static_cast<int>(std::floor(hi / spacing_m)) + 1;
  first = std::max(first, 1);
  last = std::min(last, antennas);
  if (first > last) return {0, 0};
  return {first, last - first + 1};
}

ClusterGeometry sample_geometry(const ChannelConfig& cfg, Rng& rng) {
  cfg.validate();
  ClusterGeometry geom;
  const int c = cfg.bs_clusters;
  geom.center_m.resize(c);
  geom.length_m.resize(c);
  geom.slope_db_per_m.resize(c);
  geom.azimuth_rad.resize(c);
  geom.first_antenna.resize(c);
  geom.antenna_count.resize(c);

  constexpr int max_retries = 128;
  for (int i = 0; i < c; ++i) {
    bool placed = false;
    for (int attempt = 0; attempt < max_retries && !placed; ++attempt) {
      geom.center_m[i] = rng.uniform(0.0, cfg.array_length_m());
      geom.length_m[i] = rng.lognormal(cfg.vr_length_log_mean, cfg.vr_length_log_sigma);
      geom.slope_db_per_m[i] = rng.gaussian(cfg.slope_mean_db_per_m, cfg.slope_sigma_db_per_m);
      geom.azimuth_rad[i] = rng.uniform(-std::numbers::pi / 2.0, std::numbers::pi / 2.0);
      auto [first, count] =
          antenna_region(geom.center_m[i], geom.length_m[i], cfg.bs_spacing_m, cfg.antennas);
      geom.first_antenna[i] = first;
      geom.antenna_count[i] = count;
      placed = count > 0;
    }
    if (!placed)
      throw std::runtime_error("sample_geometry: visibility region stayed empty after retries");
  }
  return geom;
}

double visibility_gain(const ClusterGeometry& geom, int cluster, int antenna,
                       double spacing_m) {
  const int first = geom.first_antenna[cluster];
  const int last = first + geom.antenna_count[cluster] - 1;
  if (antenna < first || antenna > last) return 0.0;
  const double dist = std::abs(geom.center_m[cluster] - spacing_m * (antenna - 1));
  return std::pow(10.0, -std::abs(geom.slope_db_per_m[cluster]) * dist / 10.0);
}

CMatrix association_matrix(const ClusterGeometry& geom, int cluster, int antennas) {
  const int first = geom.first_antenna[cluster];
  const int count = geom.antenna_count[cluster];
  CMatrix m = CMatrix::Zero(antennas, count);
  for (int j = 0; j < count; ++j) m(first - 1 + j, j) = 1.0;
  return m;
}

namespace {

CMatrix scatter_ring_correlation(int scatterers, double spacing_wavelengths,
                                 double angle_offset, double azimuth_sign, double azimuth,
                                 double angular_spread, int size) {
  if (scatterers < 2) throw std::invalid_argument("correlation: needs >= 2 scatterers");
  if (size < 1) throw std::invalid_argument("correlation: empty matrix");
  // Precompute the per-scatterer phase slopes; entry (m,l) only depends on m-l.
  std::vector<double> slopes(scatterers);
  for (int n = 0; n < scatterers; ++n) {
    const double offset = (1.0 - scatterers) / 2.0 + n;
    slopes[n] = std::cos(angle_offset + azimuth_sign * azimuth +
                         offset * angular_spread / (scatterers - 1));
  }
  CMatrix r(size, size);
  for (int diff = 0; diff < size; ++diff) {
    std::complex<double> acc = 0.0;
    for (int n = 0; n < scatterers; ++n) {
      const double phase = -2.0 * std::numbers::pi * diff * spacing_wavelengths * slopes[n];
      acc += std::complex<double>(std::cos(phase), std::sin(phase));
    }
    acc /= static_cast<double>(scatterers);
    for (int m = diff; m < size; ++m) {
      r(m, m - diff) = acc;
      r(m - diff, m) = std::conj(acc);
    }
  }
  return r;
}

}  // namespace

CMatrix bs_correlation(int scatterers, double spacing_wavelengths, double azimuth,
                       double angular_spread, int size) {
  return scatter_ring_correlation(scatterers, spacing_wavelengths, std::numbers::pi / 2.0,
                                  +1.0, azimuth, angular_spread, size);
}

CMatrix u_correlation(int scatterers, double spacing_wavelengths, double azimuth,
                      double angular_spread) {
  return scatter_ring_correlation(scatterers, spacing_wavelengths, std::numbers::pi / 2.0,
                                  -1.0, azimuth, angular_spread, scatterers);
}

UserVisibility sample_visibility(const ChannelConfig& cfg, Rng& rng) {
  UserVisibility vis;
  vis.clusters.resize(cfg.users);
  vis.scatterers.resize(cfg.users);
  std::vector<int> pool(cfg.bs_clusters);
  for (int k = 0; k < cfg.users; ++k) {
    std::iota(pool.begin(), pool.end(), 0);
    // Partial Fisher-Yates: the first n_b entries are a uniform draw
    // without replacement.
    for (int j = 0; j < cfg.clusters_per_user; ++j) {
      const int pick = rng.uniform_int(j, cfg.bs_clusters - 1);
      std::swap(pool[j], pool[pick]);
    }
    vis.clusters[k].assign(pool.begin(), pool.begin() + cfg.clusters_per_user);
    std::sort(vis.clusters[k].begin(), vis.clusters[k].end());
    for (int i : vis.clusters[k])
      for (int s = 0; s < cfg.scatterers_per_cluster; ++s)
        vis.scatterers[k].push_back(i * cfg.scatterers_per_cluster + s);
  }
  return vis;
}

CMatrix visibility_matrix(const UserVisibility& vis, int user, int total_scatterers,
                          int ucluster_scatterers) {
  CMatrix d = CMatrix::Zero(total_scatterers, ucluster_scatterers);
  for (int m : vis.scatterers[user]) d.row(m).setOnes();
  return d;
}

std::shared_ptr<const ChannelStatistics> sample_statistics(const ChannelConfig& cfg,
                                                           Rng& rng) {
  cfg.validate();
  auto stats = std::make_shared<ChannelStatistics>();
  stats->antennas = cfg.antennas;
  stats->ucluster_scatterers = cfg.ucluster_scatterers;
  stats->geometry = sample_geometry(cfg, rng);
  stats->visibility = sample_visibility(cfg, rng);

  const int c = cfg.bs_clusters;
  const int si = cfg.scatterers_per_cluster;

  stats->u_azimuth.assign(c, std::vector<double>(cfg.users));
  for (int i = 0; i < c; ++i)
    for (int k = 0; k < cfg.users; ++k)
      stats->u_azimuth[i][k] = rng.uniform(-std::numbers::pi / 2.0, std::numbers::pi / 2.0);

  stats->visibility_gains.resize(c);
  stats->bs_corr.resize(c);
  stats->bs_corr_sqrt.resize(c);
  for (int i = 0; i < c; ++i) {
    const int r = stats->geometry.antenna_count[i];
    const int first = stats->geometry.first_antenna[i];
    Eigen::VectorXd gains(r);
    for (int j = 0; j < r; ++j)
      gains(j) = visibility_gain(stats->geometry, i, first + j, cfg.bs_spacing_m);
    stats->visibility_gains[i] = gains;
    // Single-scatterer clusters carry no angular correlation structure.
    stats->bs_corr[i] = si >= 2 ? bs_correlation(si, cfg.wavelength_norm,
                                                 stats->geometry.azimuth_rad[i],
                                                 cfg.bs_angular_spread, r)
                                : CMatrix::Identity(r, r);
    stats->bs_corr_sqrt[i] = hermitian_sqrt(stats->bs_corr[i]);
  }

  stats->u_corr.assign(c, {});
  stats->u_corr_sqrt.assign(c, {});
  const double ds = cfg.ucluster_spacing_wavelengths();
  for (int i = 0; i < c; ++i) {
    stats->u_corr[i].resize(cfg.users);
    stats->u_corr_sqrt[i].resize(cfg.users);
    for (int k = 0; k < cfg.users; ++k) {
      stats->u_corr[i][k] = si >= 2 ? u_correlation(si, ds, stats->u_azimuth[i][k],
                                                    cfg.ucluster_angular_spread)
                                    : CMatrix::Identity(si, si);
      stats->u_corr_sqrt[i][k] = hermitian_sqrt(stats->u_corr[i][k]);
    }
  }
  return stats;
}

ChannelRealization assemble_channel(const ChannelConfig& cfg,
                                    std::shared_ptr<const ChannelStatistics> stats,
                                    Rng& rng) {
  cfg.validate();
  if (!stats) throw std::invalid_argument("assemble_channel: null statistics");
  for (int k = 0; k < cfg.users; ++k)
    if (stats->visibility.clusters[k].empty())
      throw std::invalid_argument("assemble_channel: user sees no cluster");

  ChannelRealization out;
  out.statistics = stats;

  const int c = cfg.bs_clusters;
  out.cluster_fading.resize(c);
  for (int i = 0; i < c; ++i)
    out.cluster_fading[i] = sample_cgauss(rng, stats->geometry.antenna_count[i],
                                          cfg.scatterers_per_cluster, 1.0);
  out.user_fading = sample_cgauss(rng, cfg.ucluster_scatterers, cfg.users, 1.0);

  out.matrix = CMatrix::Zero(cfg.antennas, cfg.users);
  const Eigen::VectorXcd ones = Eigen::VectorXcd::Ones(cfg.scatterers_per_cluster);
  for (int k = 0; k < cfg.users; ++k) {
    // D_k has all-ones rows for visible scatterers, so D_k g_k collapses to
    // the scalar sum of g_k replicated over the visible rows.
    const std::complex<double> fading_sum = out.user_fading.col(k).sum();
    for (int i : stats->visibility.clusters[k]) {
      const Eigen::VectorXcd through_u = stats->u_corr_sqrt[i][k] * ones;
      const Eigen::VectorXcd scattered = out.cluster_fading[i] * through_u;
      Eigen::VectorXcd at_array = stats->bs_corr_sqrt[i] * scattered;
      at_array.array() *=
          stats->visibility_gains[i].array().sqrt().cast<std::complex<double>>();
      out.matrix.col(k).segment(stats->geometry.first_antenna[i] - 1,
                                stats->geometry.antenna_count[i]) += fading_sum * at_array;
    }
  }
  return out;
}

double normalize_channel(std::span<ChannelRealization> batch) {
  if (batch.empty()) throw std::invalid_argument("normalize_channel: empty batch");
  double mean_trace = 0.0;
  for (const auto& r : batch) mean_trace += r.matrix.squaredNorm();
  mean_trace /= static_cast<double>(batch.size());
  if (mean_trace <= 0.0)
    throw std::runtime_error("normalize_channel: degenerate all-zero batch");
  const double scale = std::sqrt(static_cast<double>(batch[0].antennas()) / mean_trace);
  for (auto& r : batch) r.matrix *= scale;
  return scale;
}

ChannelRealization make_iid_channel(int antennas, int users, Rng& rng) {
  ChannelRealization out;
  out.matrix = sample_cgauss(rng, antennas, users, 1.0);
  return out;
}

void dump_channels(std::span<const ChannelRealization> batch, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("dump_channels: cannot open " + path);
  const char magic[8] = {'X', 'L', 'C', 'H', 'A', 'N', '0', '1'};
  f.write(magic, sizeof(magic));
  const std::uint64_t count = batch.size();
  const std::uint64_t rows = batch.empty() ? 0 : batch[0].matrix.rows();
  const std::uint64_t cols = batch.empty() ? 0 : batch[0].matrix.cols();
  f.write(reinterpret_cast<const char*>(&count), 8);
  f.write(reinterpret_cast<const char*>(&rows), 8);
  f.write(reinterpret_cast<const char*>(&cols), 8);
  for (const auto& r : batch)
    f.write(reinterpret_cast<const char*>(r.matrix.data()),
            static_cast<std::streamsize>(sizeof(std::complex<double>) * r.matrix.size()));
}

}  // namespace xlmimo
