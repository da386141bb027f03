// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 the xlmimo authors

#include "xlmimo/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include "xlmimo/reference.hpp"

namespace xlmimo {

namespace {

// Stream labels under the experiment's root seed.
constexpr std::uint64_t kGeometryStream = 1;
constexpr std::uint64_t kTrialStream = 2;
// Labels under a trial's stream.
constexpr std::uint64_t kFadingSubstream = 0;
constexpr std::uint64_t kSymbolSubstream = 1;
constexpr std::uint64_t kNoiseSubstream = 2;

std::atomic<int> g_worker_override{0};

struct TrialData {
  CMatrix channel;           // normalized H
  std::vector<int> sent;     // true symbol indices
  CVector noise_unit;        // CN(0, 1) per antenna
};

std::vector<int> draw_symbols(Rng& rng, int users, int alphabet) {
  std::vector<int> out(users);
  for (int& s : out) s = rng.uniform_int(0, alphabet - 1);
  return out;
}

CVector draw_noise(Rng& rng, int antennas) {
  CVector n(antennas);
  for (int i = 0; i < antennas; ++i) n(i) = rng.cgaussian(1.0);
  return n;
}

DetectionResult run_detector(DetectorKind kind, const TrialData& trial, const CVector& y,
                             const CVector& noise, double noise_var,
                             const Constellation& a, const VmpOptions& opt) {
  switch (kind) {
    case DetectorKind::VmpSic:
      return sic_detect(y, trial.channel, noise_var, a, opt);
    case DetectorKind::VmpNonIterative:
      return detect_noniterative(y, trial.channel, noise_var, a, opt);
    case DetectorKind::CentralMrc:
      return central_mrc(y, trial.channel, a);
    case DetectorKind::CentralZf:
      return central_zf(y, trial.channel, a);
    case DetectorKind::MatchedFilterBound:
      return matched_filter_bound(trial.channel, trial.sent, noise, a);
  }
  throw std::logic_error("run_detector: unreachable");
}

}  // namespace

int resolve_worker_count() {
  const int forced = g_worker_override.load();
  if (forced > 0) return forced;
  if (const char* env = std::getenv("XLSIM_WORKERS")) {
    const int w = std::atoi(env);
    if (w > 0) return w;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

void set_worker_count_override(int workers) { g_worker_override.store(workers); }

std::vector<SerRecord> run_experiment(const SimConfig& cfg) {
  cfg.validate();
  const Constellation a = Constellation::from_name(cfg.constellation);
  const ChannelConfig& ch = cfg.channel;
  const std::string digest = cfg.digest();
  const Rng root(cfg.seed);
  const int workers = resolve_worker_count();

  VmpOptions opt;
  opt.subarrays = ch.subarrays;
  opt.iterations = cfg.vmp_iterations;
  opt.init = cfg.init;
  opt.strategy = cfg.strategy;
  opt.fusion = cfg.fusion;
  opt.power_ratio = cfg.power_ratio;
  opt.budget = cfg.budget;
  opt.parallel_update = cfg.vmp_parallel_update;
  std::atomic<std::uint64_t> warning_count{0};
  opt.warn = [&warning_count](const std::string&) { warning_count.fetch_add(1); };

  const int methods = static_cast<int>(cfg.detectors.size());
  std::vector<SerRecord> records;
  records.reserve(static_cast<std::size_t>(methods) * cfg.snr_db.size());

  std::vector<ChannelRealization> dump;
  const bool want_dump = !cfg.dump_channels_path.empty();

  for (std::size_t snr_idx = 0; snr_idx < cfg.snr_db.size(); ++snr_idx) {
    const double snr_lin = std::pow(10.0, cfg.snr_db[snr_idx] / 10.0);
    const double noise_var = 1.0 / snr_lin;  // P = 1
    const double noise_scale = std::sqrt(noise_var);

    std::vector<std::uint64_t> errors(static_cast<std::size_t>(methods) * cfg.trials, 0);

    for (int block_start = 0; block_start < cfg.trials;
         block_start += ch.refresh_period) {
      const int block_size = std::min(ch.refresh_period, cfg.trials - block_start);
      const int block_index = block_start / ch.refresh_period;

      std::shared_ptr<const ChannelStatistics> stats;
      if (cfg.scenario != Scenario::Iid) {
        Rng geom_rng = root.split(kGeometryStream, block_index);
        stats = sample_statistics(ch, geom_rng);
      }

      std::vector<ChannelRealization> batch(block_size);
      for (int j = 0; j < block_size; ++j) {
        Rng fading = root.split(kTrialStream, block_start + j)
                         .split(kFadingSubstream, 0);
        batch[j] = cfg.scenario == Scenario::Iid
                       ? make_iid_channel(ch.antennas, ch.users, fading)
                       : assemble_channel(ch, stats, fading);
      }
      const double scale = normalize_channel(batch);

      if (want_dump && snr_idx == 0)
        dump.insert(dump.end(), batch.begin(), batch.end());

      // Detection is pure per trial; workers write to disjoint slots.
      std::atomic<int> next{0};
      auto run_trials = [&]() {
        for (int j = next.fetch_add(1); j < block_size; j = next.fetch_add(1)) {
          const int t = block_start + j;
          const Rng trial_rng = root.split(kTrialStream, t);

          TrialData trial;
          trial.channel = batch[j].matrix;
          {
            Rng symbol_rng = trial_rng.split(kSymbolSubstream, 0);
            trial.sent = draw_symbols(symbol_rng, ch.users, a.size());
          }
          {
            Rng noise_rng = trial_rng.split(kNoiseSubstream, 0);
            trial.noise_unit = draw_noise(noise_rng, ch.antennas);
          }
          const CVector noise = noise_scale * trial.noise_unit;

          CVector y = noise;
          for (int k = 0; k < ch.users; ++k)
            y += a.points[trial.sent[k]] * trial.channel.col(k);

          for (int m = 0; m < methods; ++m) {
            DetectionResult result;
            bool done = false;
            for (int retry = 0; !done; ++retry) {
              try {
                result = run_detector(cfg.detectors[m], trial, y, noise, noise_var, a, opt);
                done = true;
              } catch (const SingularChannelError&) {
                if (retry >= 8) throw;
                // Redraw the fast fading for this trial only, keep the
                // block's normalization scale and this trial's symbols
                // and noise.
                Rng refade = trial_rng.split(kFadingSubstream, retry + 1);
                ChannelRealization redraw =
                    cfg.scenario == Scenario::Iid
                        ? make_iid_channel(ch.antennas, ch.users, refade)
                        : assemble_channel(ch, stats, refade);
                trial.channel = scale * redraw.matrix;
                y = noise;
                for (int k = 0; k < ch.users; ++k)
                  y += a.points[trial.sent[k]] * trial.channel.col(k);
              }
            }
            std::uint64_t err = 0;
            for (int k = 0; k < ch.users; ++k)
              if (result.symbols[k] != trial.sent[k]) ++err;
            errors[static_cast<std::size_t>(m) * cfg.trials + t] = err;
          }
        }
      };

      const int active_workers = std::max(1, std::min(workers, block_size));
      if (active_workers == 1) {
        run_trials();
      } else {
        std::exception_ptr failure;
        std::mutex failure_mutex;
        auto work = [&]() {
          try {
            run_trials();
          } catch (...) {
            const std::lock_guard<std::mutex> lock(failure_mutex);
            if (!failure) failure = std::current_exception();
          }
        };
        std::vector<std::thread> pool;
        pool.reserve(active_workers);
        for (int w = 0; w < active_workers; ++w) pool.emplace_back(work);
        for (auto& th : pool) th.join();
        if (failure) std::rethrow_exception(failure);
      }
    }

    for (int m = 0; m < methods; ++m) {
      SerRecord rec;
      rec.method = to_string(cfg.detectors[m]);
      rec.snr_db = cfg.snr_db[snr_idx];
      rec.symbols = static_cast<std::uint64_t>(cfg.trials) * ch.users;
      for (int t = 0; t < cfg.trials; ++t)
        rec.errors += errors[static_cast<std::size_t>(m) * cfg.trials + t];
      rec.ser = static_cast<double>(rec.errors) / static_cast<double>(rec.symbols);
      rec.ci95 = 1.96 * std::sqrt(rec.ser * (1.0 - rec.ser) /
                                  static_cast<double>(rec.symbols));
      rec.seed = cfg.seed;
      rec.config_digest = digest;
      records.push_back(std::move(rec));
    }
  }

  if (want_dump) dump_channels(dump, cfg.dump_channels_path);
  if (const auto warned = warning_count.load(); warned > 0)
    std::clog << "xlmimo: " << warned << " detector warnings (ZF fallback or fusion conflict)\n";

  std::stable_sort(records.begin(), records.end(), [](const SerRecord& x, const SerRecord& y) {
    if (x.method != y.method) return x.method < y.method;
    return x.snr_db < y.snr_db;
  });
  return records;
}

void write_csv(const std::vector<SerRecord>& records, std::ostream& out) {
  out << "method,snr_db,errors,symbols,ser,ci95,seed,config_digest\n";
  char buf[160];
  for (const auto& r : records) {
    std::snprintf(buf, sizeof(buf), "%.17g,%llu,%llu,%.17g,%.17g,%llu",
                  r.snr_db, static_cast<unsigned long long>(r.errors),
                  static_cast<unsigned long long>(r.symbols), r.ser, r.ci95,
                  static_cast<unsigned long long>(r.seed));
    out << r.method << ',' << buf << ',' << r.config_digest << '\n';
  }
}

void write_csv(const std::vector<SerRecord>& records, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("write_csv: cannot open " + path);
  write_csv(records, f);
}

}  // namespace xlmimo
