#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <limits>
#include <string>
#include <vector>

#include "aiot/channel.hpp"
#include "aiot/dsp.hpp"
#include "aiot/harness.hpp"
#include "aiot/io.hpp"
#include "aiot/rng.hpp"
#include "oracles.hpp"

using namespace aiot;

namespace {

struct TempFile {
  std::string path;
  explicit TempFile(std::string p) : path(std::move(p)) {}
  ~TempFile() {
    std::remove(path.c_str());
    std::remove((path + ".meta").c_str());
  }
};

std::vector<TracePoint> line_trace(double x0, double y0, double x1, double y1,
                                   double duration_s, double dt_s) {
  std::vector<TracePoint> tr;
  const long steps = static_cast<long>(std::llround(duration_s / dt_s));
  for (long i = 0; i <= steps; ++i) {
    const double a = static_cast<double>(i) / static_cast<double>(steps);
    tr.push_back({static_cast<double>(i) * dt_s, x0 + a * (x1 - x0),
                  y0 + a * (y1 - y0)});
  }
  return tr;
}

}  // namespace

TEST_CASE("path loss composes over legs and matches the log-distance form") {
  ChannelModel m;
  m.ref_loss_db = 22;
  CHECK(path_loss_db(m, 1.0) == doctest::Approx(22.0));
  CHECK(path_loss_db(m, 10.0) == doctest::Approx(42.0));
  CHECK(path_loss_db(m, {0.5, 3.0}) ==
        doctest::Approx(path_loss_db(m, 0.5) + path_loss_db(m, 3.0)));

  CHECK(path_legs(m, 7.0) == std::vector<double>{7.0});
  m.path = ChannelPath::Backscatter;
  CHECK(path_legs(m, 7.0) == std::vector<double>{7.0, 7.0});

  CHECK_THROWS_AS(path_loss_db(m, 0.0), ArgumentError);
  CHECK_THROWS_AS(path_loss_db(m, std::vector<double>{}), ArgumentError);
  ChannelModel bad;
  bad.exponent = 0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("noiseless channel output lands at the predicted rssi") {
  ChannelModel m;
  m.ref_loss_db = 22;
  IqBufferd tx;
  tx.sample_rate = 1e6;
  tx.samples = CVecXd::Constant(4096, dbm_to_amplitude(15.0));
  const std::vector<double> legs{0.5, 3.0};
  IqBufferd rx = channel_apply(m, tx, legs);
  CHECK(rssi_estimate(rx.samples) ==
        doctest::Approx(oracle::path_rx_dbm(15.0, 22.0, 2.0, legs)).epsilon(1e-9));
}

TEST_CASE("channel noise streams are seeded and decorrelated") {
  ChannelModel m;
  m.noise_density_w_hz = 1e-12;
  IqBufferd tx;
  tx.sample_rate = 1e6;
  tx.samples = CVecXd::Zero(256);
  IqBufferd a = channel_apply(m, tx, 1.0, 3);
  IqBufferd b = channel_apply(m, tx, 1.0, 3);
  IqBufferd c = channel_apply(m, tx, 1.0, 4);
  CHECK((a.samples - b.samples).norm() == doctest::Approx(0.0));
  CHECK((a.samples - c.samples).norm() > 0);
}

TEST_CASE("awgn power and rssi estimation") {
  CHECK(noise_mw_per_sample(1e-17, 4e6) == doctest::Approx(4e-8));

  Rng rng(5);
  CVecXd buf = CVecXd::Zero(200000);
  awgn_add(buf, 0.25, rng);
  CHECK(buf.squaredNorm() / 200000.0 == doctest::Approx(0.25).epsilon(0.02));

  CVecXd clean = CVecXd::Constant(100, 1.0);
  Rng r2(1);
  awgn_add(clean, 0.0, r2);
  CHECK(rssi_estimate(clean) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(rssi_estimate(CVecXd::Constant(64, 0.5)) ==
        doctest::Approx(-6.0206).epsilon(1e-4));
  CHECK(rssi_estimate(clean, 3.0) == doctest::Approx(3.0).epsilon(1e-9));

  CVecXd mixed(1000);
  mixed.head(900).setConstant(0.1);
  mixed.tail(100).setConstant(2.0);
  CHECK(rssi_estimate(mixed, 0, 100) == doctest::Approx(mw_to_dbm(4.0)));

  CHECK_THROWS_AS(rssi_estimate(CVecXd()), ArgumentError);
  CHECK_THROWS_AS(rssi_estimate(clean, 0, 101), ArgumentError);
}

TEST_CASE("wilson interval behaves like a confidence interval") {
  auto [lo0, hi0] = wilson_interval(0, 1000);
  CHECK(lo0 == doctest::Approx(0.0));
  CHECK(hi0 > 0.0);
  auto [lo1, hi1] = wilson_interval(1000, 1000);
  CHECK(hi1 == doctest::Approx(1.0));
  CHECK(lo1 < 1.0);

  // Coverage of the true p under repeated binomial sampling.
  Rng rng(424242);
  const double p = 0.01;
  const long n = 2000;
  int covered = 0;
  const int trials = 400;
  for (int t = 0; t < trials; ++t) {
    long errors = 0;
    for (long i = 0; i < n; ++i) errors += rng.uniform() < p;
    auto [lo, hi] = wilson_interval(errors, n);
    covered += (lo <= p && p <= hi);
  }
  CHECK(static_cast<double>(covered) / trials >= 0.90);
}

TEST_CASE("noiseless sweep reports zero errors and full goodput") {
  BerSweepConfig cfg;
  cfg.snr_db = {std::numeric_limits<double>::infinity()};
  cfg.bits_per_point = 20000;
  BerSweepResult res = ber_sweep(cfg);
  REQUIRE(res.points.size() == 1);
  CHECK(res.points[0].errors == 0);
  CHECK(res.points[0].ber == doctest::Approx(0.0));
  CHECK(res.points[0].meets_target);
  CHECK(res.points[0].goodput_bps == doctest::Approx(cfg.protocol.data_rate));
  CHECK_FALSE(res.low_bits_warning);

  cfg.bits_per_point = 5000;  // < 10 / target_ber
  CHECK(ber_sweep(cfg).low_bits_warning);

  BerSweepConfig ble;
  ble.protocol.protocol = Protocol::BleAdv;
  ble.protocol.modulation = Modulation::Msk;
  ble.protocol.data_rate = 1e6;
  ble.protocol.channel = 37;
  CHECK_THROWS_AS(ber_sweep(ble), ConfigError);
}

TEST_CASE("backscatter pays both legs relative to a direct link") {
  BerSweepConfig cfg;
  cfg.protocol.protocol = Protocol::Amp80211;
  cfg.protocol.modulation = Modulation::Ook;
  cfg.protocol.data_rate = 250e3;
  cfg.distances_m = {3.0};
  cfg.channel.ref_loss_db = 22;
  cfg.channel.noise_density_w_hz = 1e-13;
  cfg.tx_power_dbm = 15;
  cfg.bits_per_point = 20000;
  cfg.seed = 99;

  BerSweepResult direct = ber_sweep(cfg);
  cfg.channel.path = ChannelPath::Backscatter;
  BerSweepResult back = ber_sweep(cfg);

  CHECK(direct.points[0].snr_db > back.points[0].snr_db);
  CHECK(direct.points[0].ber < 0.05);
  CHECK(back.points[0].ber > 0.3);
  CHECK(back.points[0].ber > direct.points[0].ber);

  const std::string csv = ber_sweep_csv(direct, cfg.seed);
  CHECK(csv.rfind("snr_db,distance_m,bits,errors,ber,", 0) == 0);
  CHECK(csv.find(",99\n") != std::string::npos);
}

TEST_CASE("random waypoint traces stay in the room and repeat by seed") {
  auto tr = random_waypoint_trace(3.0, 2.0, 0.5, 60.0, 0.1, 12);
  CHECK(tr.size() == 601);
  for (std::size_t i = 0; i < tr.size(); ++i) {
    CHECK(tr[i].t == doctest::Approx(0.1 * static_cast<double>(i)));
    CHECK(tr[i].x >= 0.0);
    CHECK(tr[i].x <= 3.0);
    CHECK(tr[i].y >= 0.0);
    CHECK(tr[i].y <= 2.0);
    if (i > 0) {
      const double step =
          std::hypot(tr[i].x - tr[i - 1].x, tr[i].y - tr[i - 1].y);
      CHECK(step <= 0.5 * 0.1 + 1e-9);
    }
  }
  auto again = random_waypoint_trace(3.0, 2.0, 0.5, 60.0, 0.1, 12);
  REQUIRE(again.size() == tr.size());
  for (std::size_t i = 0; i < tr.size(); ++i) {
    CHECK(again[i].x == tr[i].x);
    CHECK(again[i].y == tr[i].y);
  }
  auto other = random_waypoint_trace(3.0, 2.0, 0.5, 60.0, 0.1, 13);
  CHECK((other[1].x != tr[1].x || other[1].y != tr[1].y));

  CHECK_THROWS_AS(random_waypoint_trace(3.0, 2.0, 0.0, 60.0, 0.1, 1),
                  ArgumentError);
}

TEST_CASE("passive zone radius inverts the backscatter budget") {
  Scenario sc = default_scenario();
  const double r = passive_zone_radius_m(sc);
  CHECK(r == doctest::Approx(std::pow(10.0, 0.15)).epsilon(1e-12));
  CHECK(backscatter_rssi_dbm(sc, r) ==
        doctest::Approx(sc.rssi_threshold_dbm).epsilon(1e-9));
  CHECK(backscatter_rssi_dbm(sc, r / 2) > sc.rssi_threshold_dbm);
  CHECK(backscatter_rssi_dbm(sc, r * 2) < sc.rssi_threshold_dbm);
}

TEST_CASE("hybrid policy tracks the zone on stationary traces") {
  Scenario sc = default_scenario();
  sc.duration_s = 30;

  auto inside = hybrid_policy_run(sc, line_trace(1.8, 1.5, 1.8, 1.5, 30, 0.1), 7);
  CHECK(inside.hybrid.passive_time_fraction == doctest::Approx(1.0));
  CHECK(inside.hybrid.transitions == 0);
  CHECK(inside.hybrid.energy_j ==
        doctest::Approx(inside.always_passive.energy_j));
  CHECK(inside.hybrid.beacons == 300);
  CHECK(inside.hybrid.prr == doctest::Approx(1.0));

  auto outside = hybrid_policy_run(sc, line_trace(0.0, 1.5, 0.0, 1.5, 30, 0.1), 7);
  CHECK(outside.hybrid.passive_time_fraction == doctest::Approx(0.0));
  CHECK(outside.hybrid.energy_j ==
        doctest::Approx(outside.always_active.energy_j));
  CHECK(outside.always_active.normalized_power == doctest::Approx(1.0));
}

TEST_CASE("hybrid policy sits between the static policies on a crossing") {
  Scenario sc = default_scenario();
  sc.duration_s = 60;
  // Noise floor chosen so the passive link dies near the room corner while
  // the zone edge still decodes cleanly.
  sc.channel.noise_density_w_hz = 3.1e-14;
  auto trace = line_trace(1.5, 1.5, 3.0, 3.0, 60, 0.1);
  auto res = hybrid_policy_run(sc, trace, 7);

  CHECK(res.always_passive.beacons == 600);
  CHECK(res.always_active.beacons == 600);
  CHECK(res.hybrid.beacons == 600);

  CHECK(res.hybrid.transitions == 1);
  CHECK(res.hybrid.passive_time_fraction > 0.5);
  CHECK(res.hybrid.passive_time_fraction < 0.8);

  CHECK(res.hybrid.delivered >= res.always_passive.delivered);
  CHECK(res.hybrid.prr >= 0.99);
  CHECK(res.always_passive.prr < res.hybrid.prr);

  CHECK(res.always_passive.energy_j < res.hybrid.energy_j);
  CHECK(res.hybrid.energy_j < res.always_active.energy_j);
  CHECK(res.hybrid.normalized_power > 0.2);
  CHECK(res.hybrid.normalized_power < 0.7);
  CHECK(res.zone_radius_m == doctest::Approx(std::pow(10.0, 0.15)));

  const std::string csv = policy_csv(res);
  CHECK(csv.rfind("policy,beacons,delivered,prr,energy_j,", 0) == 0);
  CHECK(csv.find("always_passive,600,") != std::string::npos);
  CHECK(csv.find("hybrid,600,") != std::string::npos);
  CHECK(policy_csv(hybrid_policy_run(sc, trace, 7)) == csv);

  CHECK_THROWS_AS(hybrid_policy_run(sc, {{0, 1, 1}}, 7), ArgumentError);
}

TEST_CASE("iq files round trip through the cf32 format and sidecar") {
  TempFile tmp("netsim_iq_test.cf32");
  IqBufferd buf;
  buf.sample_rate = 4e6;
  buf.center_freq = 915e6;
  Rng rng(3);
  buf.samples = CVecXd(257);
  for (Index i = 0; i < buf.samples.size(); ++i)
    buf.samples[i] = std::complex<double>(rng.gaussian(), rng.gaussian());

  iq_write(tmp.path, buf, 1.5);
  IqBufferd rt = iq_read(tmp.path);
  REQUIRE(rt.samples.size() == buf.samples.size());
  CHECK(rt.sample_rate == doctest::Approx(4e6));
  CHECK(rt.center_freq == doctest::Approx(915e6));
  CHECK((rt.samples - buf.samples).cwiseAbs().maxCoeff() < 1e-6);

  const std::string meta = text_read(tmp.path + ".meta");
  CHECK(meta.find("format=cf32le\n") != std::string::npos);
  CHECK(meta.find("samples=257\n") != std::string::npos);

  // Without the sidecar the rate is unknown, not guessed.
  std::remove((tmp.path + ".meta").c_str());
  CHECK(iq_read(tmp.path).sample_rate == doctest::Approx(0.0));

  text_write(tmp.path, std::string(12, '\0'));  // 3 floats: odd count
  CHECK_THROWS_AS(iq_read(tmp.path), ParseError);
  text_write(tmp.path, std::string(6, '\0'));  // not float-aligned
  CHECK_THROWS_AS(iq_read(tmp.path), ParseError);
}

TEST_CASE("meta files are sorted key=value lines") {
  TempFile tmp("netsim_meta_test.meta");
  meta_write(tmp.path, {{"zeta", "3"}, {"alpha", "1"}, {"mid", "2"}});
  CHECK(text_read(tmp.path) == "alpha=1\nmid=2\nzeta=3\n");
  CHECK(fmt_g(0.1) == "0.1");
  CHECK(fmt_g(1e-17) == "1e-17");
  CHECK(csv_line({"a", "b", "c"}) == "a,b,c\n");
}

TEST_CASE("config parser keeps line numbers and lets the last key win") {
  ConfigFile cfg = config_parse_string(
      "# comment\n"
      "top = 1\n"
      "[sim]\n"
      "duration_s = 30\n"
      "duration_s = 45\n");
  REQUIRE(cfg.find("sim") != nullptr);
  CHECK(cfg.find("sim")->get_double("duration_s", 0) == doctest::Approx(45));
  CHECK(cfg.find("sim")->find("duration_s")->line == 5);
  CHECK(cfg.find("")->get_double("top", 0) == doctest::Approx(1));
  CHECK(cfg.find("sim")->get_double("missing", -2) == doctest::Approx(-2));

  try {
    config_parse_string("a = 1\nnot a pair\n");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line == 2);
  }
  CHECK_THROWS_AS(config_parse_string("[unterminated\n"), ParseError);
  CHECK_THROWS_AS(
      config_double(ConfigEntry{"abc", 4}, "k"), ParseError);
}

TEST_CASE("scenario config covers every key and rejects unknown ones") {
  ConfigFile cfg = config_parse_string(
      "[sim]\n"
      "duration_s = 30\n"
      "rssi_threshold_dbm = -40\n"
      "[gateway]\n"
      "tx_power_dbm = 18\n"
      "[channel]\n"
      "ref_loss_db = 25\n"
      "[device.tag7]\n"
      "x = 1\n"
      "y = 1\n"
      "device_id = 7\n"
      "profile = asic\n"
      "[device]\n"
      "x = 2\n"
      "y = 2\n");
  Scenario sc = scenario_parse(cfg);
  CHECK(sc.duration_s == doctest::Approx(30));
  CHECK(sc.rssi_threshold_dbm == doctest::Approx(-40));
  CHECK(sc.tx_power_dbm == doctest::Approx(18));
  CHECK(sc.channel.ref_loss_db == doctest::Approx(25));
  REQUIRE(sc.devices.size() == 2);
  CHECK(sc.devices[0].name == "tag7");
  CHECK(sc.devices[0].registers.device_id == 7);
  CHECK(sc.devices[0].profile.kind == PowerProfile::Kind::Asic);
  CHECK(sc.devices[1].name == "dev1");

  try {
    scenario_parse(config_parse_string("[sim]\nbogus = 1\n"));
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("bogus") != std::string::npos);
    CHECK(e.line == 2);
  }
  CHECK_THROWS_AS(scenario_parse(config_parse_string("[weird]\nx = 1\n")),
                  ParseError);
  CHECK_THROWS_AS(
      scenario_parse(config_parse_string("[device]\ndevice_id = 300\n")),
      ParseError);
  CHECK_THROWS_AS(
      scenario_parse(config_parse_string("[device]\nprofile = turbo\n")),
      ParseError);

  Scenario bad = default_scenario();
  bad.devices[0].x = 99;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("harvest traces hold the last sample and validate their input") {
  TempFile tmp("netsim_harvest_test.csv");
  text_write(tmp.path, "time_s,power_w\n0, 0.001\n10, 0.002\n");
  HarvestTrace tr = harvest_trace_read(tmp.path);
  REQUIRE(tr.t.size() == 2);
  CHECK(tr.at(-5.0) == doctest::Approx(0.001));
  CHECK(tr.at(5.0) == doctest::Approx(0.001));
  CHECK(tr.at(10.0) == doctest::Approx(0.002));
  CHECK(tr.at(100.0) == doctest::Approx(0.002));

  text_write(tmp.path, "0,0.001\n5,-1\n");
  CHECK_THROWS_AS(harvest_trace_read(tmp.path), ParseError);
  text_write(tmp.path, "5,0.001\n1,0.002\n");
  CHECK_THROWS_AS(harvest_trace_read(tmp.path), ParseError);
  text_write(tmp.path, "# nothing\n");
  CHECK_THROWS_AS(harvest_trace_read(tmp.path), ParseError);
}

TEST_CASE("timeline csv interleaves samples and events in time order") {
  PowerProfile profile;
  auto tl = run_duty_cycle_mode(make_energy_state(0.09, 3.3), profile,
                                {1.0, 0.2}, 3.0, constant_harvest(10e-3),
                                profile.p_passive);
  const std::string csv = timeline_csv(tl);
  CHECK(csv.rfind("time_s,voltage_v,mode,event\n", 0) == 0);
  CHECK(csv.find("wake_start") != std::string::npos);

  double prev = -1;
  std::size_t pos = csv.find('\n') + 1;
  long rows = 0;
  while (pos < csv.size()) {
    const double t = std::strtod(csv.c_str() + pos, nullptr);
    CHECK(t >= prev);
    prev = t;
    ++rows;
    pos = csv.find('\n', pos) + 1;
  }
  CHECK(rows == static_cast<long>(tl.samples.size() + tl.events.size()));
}
