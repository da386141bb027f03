// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 the xlmimo authors

#include <doctest.h>

#include <sstream>

#include "xlmimo/experiment.hpp"

using namespace xlmimo;

namespace {

SimConfig tiny_config() {
  SimConfig cfg;
  cfg.scenario = Scenario::Iid;
  cfg.channel.antennas = 16;
  cfg.channel.users = 2;
  cfg.channel.subarrays = 2;
  cfg.channel.refresh_period = 10;
  cfg.snr_db = {0.0, 10.0};
  cfg.trials = 60;
  cfg.seed = 9;
  cfg.budget = 2;
  cfg.detectors = {DetectorKind::VmpSic, DetectorKind::CentralMrc};
  return cfg;
}

std::string csv_string(const std::vector<SerRecord>& records) {
  std::ostringstream out;
  write_csv(records, out);
  return out.str();
}

}  // namespace

TEST_CASE("config files parse with comments, units, and overrides") {
  std::istringstream in(
      "# sample run\n"
      "scenario = iid\n"
      "antennas = 32\n"
      "users = 4\n"
      "subarrays = 2\n"
      "b_max = 2\n"
      "snr_db = 0:10:5\n"
      "trials = 7\n"
      "seed = 123\n"
      "detector = zf,mrc\n"
      "d_r_m = 0.06   # meters\n");
  const SimConfig cfg = SimConfig::from_stream(in);
  CHECK(cfg.scenario == Scenario::Iid);
  CHECK(cfg.channel.antennas == 32);
  CHECK(cfg.channel.users == 4);
  CHECK(cfg.channel.bs_spacing_m == 0.06);
  CHECK(cfg.snr_db == std::vector<double>{0.0, 5.0, 10.0});
  CHECK(cfg.trials == 7);
  CHECK(cfg.seed == 123);
  CHECK(cfg.detectors.size() == 2);
  cfg.validate();
}

TEST_CASE("config rejects unknown keys, bad values, and bad shapes") {
  SimConfig cfg;
  CHECK_THROWS_AS(cfg.set("no_such_key", "1"), ConfigError);
  CHECK_THROWS_AS(cfg.set("trials", "zero"), ConfigError);
  CHECK_THROWS_AS(cfg.set("trials", "0"), ConfigError);
  CHECK_THROWS_AS(cfg.set("snr_db", ""), ConfigError);
  CHECK_THROWS_AS(cfg.set("detector", "psychic"), ConfigError);

  SimConfig uneven = tiny_config();
  uneven.channel.antennas = 9;  // not divisible by subarrays
  CHECK_THROWS_AS(uneven.validate(), ConfigError);
}

TEST_CASE("scenario presets pin the angular spreads") {
  SimConfig low;
  low.scenario = Scenario::LowCorrelation;
  low.apply_scenario();
  CHECK(low.channel.bs_angular_spread == doctest::Approx(7.0 * 3.14159265358979 / 8.0));

  SimConfig high;
  high.scenario = Scenario::HighCorrelation;
  high.apply_scenario();
  CHECK(high.channel.bs_angular_spread == doctest::Approx(3.0 * 3.14159265358979 / 4.0));
}

TEST_CASE("the digest changes with any field and survives a round trip") {
  const SimConfig base = tiny_config();
  SimConfig changed = base;
  changed.channel.bs_spacing_m += 1e-6;
  CHECK(base.digest() != changed.digest());

  SimConfig reseeded = base;
  reseeded.seed += 1;
  CHECK(base.digest() != reseeded.digest());

  // canonical() parses back to an identical configuration.
  std::istringstream in(base.canonical());
  const SimConfig reparsed = SimConfig::from_stream(in);
  CHECK(reparsed.canonical() == base.canonical());
  CHECK(reparsed.digest() == base.digest());
}

TEST_CASE("CSV output is stable: header, one line per record, parseable") {
  CHECK(csv_string({}) == "method,snr_db,errors,symbols,ser,ci95,seed,config_digest\n");

  SerRecord rec;
  rec.method = "mrc";
  rec.snr_db = 2.5;
  rec.errors = 10;
  rec.symbols = 1000;
  rec.ser = 0.01;
  rec.ci95 = 0.0061;
  rec.seed = 7;
  rec.config_digest = "00ff00ff00ff00ff";
  const std::string text = csv_string({rec});
  CHECK(text.find("mrc,2.5,10,1000,0.01,") != std::string::npos);

  // Parse the row back and compare the numeric fields.
  std::istringstream in(text);
  std::string header, row;
  std::getline(in, header);
  std::getline(in, row);
  std::stringstream fields(row);
  std::string method, snr, errors, symbols, ser;
  std::getline(fields, method, ',');
  std::getline(fields, snr, ',');
  std::getline(fields, errors, ',');
  std::getline(fields, symbols, ',');
  std::getline(fields, ser, ',');
  CHECK(method == "mrc");
  CHECK(std::stod(snr) == rec.snr_db);
  CHECK(std::stoull(errors) == rec.errors);
  CHECK(std::stod(ser) == rec.ser);
}

TEST_CASE("experiments validate before computing") {
  SimConfig cfg = tiny_config();
  cfg.trials = 0;
  CHECK_THROWS_AS(run_experiment(cfg), ConfigError);

  SimConfig no_snr = tiny_config();
  no_snr.snr_db.clear();
  CHECK_THROWS_AS(run_experiment(no_snr), ConfigError);
}

TEST_CASE("a near-noiseless ZF run is error free") {
  SimConfig cfg;
  cfg.scenario = Scenario::Iid;
  cfg.channel.antennas = 32;
  cfg.channel.users = 4;
  cfg.channel.subarrays = 2;
  cfg.budget = 2;
  cfg.snr_db = {40.0};
  cfg.trials = 2500;  // 1e4 symbols
  cfg.seed = 4;
  cfg.detectors = {DetectorKind::CentralZf};
  const auto records = run_experiment(cfg);
  REQUIRE(records.size() == 1);
  CHECK(records[0].errors == 0);
  CHECK(records[0].symbols == 10000);
}

TEST_CASE("record bookkeeping: symbols equal trials times users, sorted output") {
  SimConfig cfg = tiny_config();
  const auto records = run_experiment(cfg);
  REQUIRE(records.size() == 4);  // 2 methods x 2 SNR points
  for (const auto& r : records) {
    CHECK(r.symbols == static_cast<std::uint64_t>(cfg.trials) * cfg.channel.users);
    CHECK(r.ser == doctest::Approx(static_cast<double>(r.errors) / r.symbols));
    CHECK(r.config_digest == cfg.digest());
  }
  for (std::size_t i = 1; i < records.size(); ++i) {
    const bool ordered = records[i - 1].method < records[i].method ||
                         (records[i - 1].method == records[i].method &&
                          records[i - 1].snr_db < records[i].snr_db);
    CHECK(ordered);
  }
}

TEST_CASE("identical seeds give identical CSV bytes for any worker count") {
  SimConfig cfg = tiny_config();
  set_worker_count_override(1);
  const std::string serial = csv_string(run_experiment(cfg));
  set_worker_count_override(3);
  const std::string threaded = csv_string(run_experiment(cfg));
  set_worker_count_override(4);
  const std::string wider = csv_string(run_experiment(cfg));
  set_worker_count_override(0);
  CHECK(serial == threaded);
  CHECK(serial == wider);

  const std::string repeat = csv_string(run_experiment(cfg));
  CHECK(serial == repeat);
}

TEST_CASE("SER does not grow with SNR on a shared-draw grid") {
  SimConfig cfg;
  cfg.scenario = Scenario::Iid;
  cfg.channel.antennas = 16;
  cfg.channel.users = 2;
  cfg.channel.subarrays = 2;
  cfg.budget = 2;
  cfg.snr_db = {-10.0, 0.0, 10.0};
  cfg.trials = 400;
  cfg.seed = 11;
  cfg.detectors = {DetectorKind::CentralMrc, DetectorKind::VmpSic};
  const auto records = run_experiment(cfg);
  REQUIRE(records.size() == 6);
  for (std::size_t i = 1; i < records.size(); ++i) {
    if (records[i].method != records[i - 1].method) continue;
    const double slack = records[i - 1].ci95 + records[i].ci95;
    CHECK(records[i].ser <= records[i - 1].ser + slack);
  }
}

TEST_CASE("the non-stationary scenario runs end to end at desk scale") {
  SimConfig cfg;
  cfg.scenario = Scenario::LowCorrelation;
  cfg.apply_scenario();
  cfg.channel.antennas = 32;
  cfg.channel.users = 4;
  cfg.channel.subarrays = 4;
  cfg.channel.bs_clusters = 6;
  cfg.channel.scatterers_per_cluster = 7;
  cfg.channel.ucluster_scatterers = 7;
  cfg.channel.clusters_per_user = 3;
  cfg.channel.refresh_period = 25;
  cfg.snr_db = {10.0};
  cfg.trials = 50;
  cfg.seed = 3;
  cfg.budget = 3;
  cfg.detectors = detectors_from_string("all");
  const auto records = run_experiment(cfg);
  CHECK(records.size() == 5);
  for (const auto& r : records) CHECK(r.symbols == 200);
}
