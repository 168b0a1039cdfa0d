// Acceptance gate for the simulator. Each criterion prints one line and the
// process exit code is the number of failed criteria. Tolerances are pinned
// here, next to the check they gate.

#include <cmath>
#include <complex>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <numbers>
#include <string>
#include <vector>

#include "aiot/baseband.hpp"
#include "aiot/ble.hpp"
#include "aiot/control_plane.hpp"
#include "aiot/dsp.hpp"
#include "aiot/energy.hpp"
#include "aiot/harness.hpp"
#include "aiot/io.hpp"
#include "aiot/rf_frontend.hpp"
#include "aiot/rng.hpp"
#include "oracles.hpp"

using namespace aiot;

namespace {

int g_failed = 0;

void report(int num, const char* name, bool ok, const std::string& detail) {
  std::printf("[%s] criterion %d: %s (%s)\n", ok ? "PASS" : "FAIL", num, name,
              detail.c_str());
  if (!ok) ++g_failed;
}

std::string fmt(const char* f, double a, double b = 0, double c = 0) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

BitVec random_bits(long n, Rng& rng) {
  BitVec bits(static_cast<std::size_t>(n));
  for (auto& b : bits) b = static_cast<std::uint8_t>(rng.bit());
  return bits;
}

// 1. Parameter mapping: a1 places an FSK tone, a2 sets the chirp slope, a0
// carries BPSK phase; each is recovered from the synthesized waveform.
bool criterion_parameter_mapping(std::string& detail) {
  const double fs = 1e6;

  const Index n_fsk = 4096;
  auto fsk = params_for_fsk(100e3, fs, n_fsk);
  CVecXd wave = synth_baseband(fsk, fs).samples.cast<std::complex<double>>();
  CVecXd spec = fft(wave);
  const double f_peak = std::abs(fft_bin_freq(fft_peak_bin(spec), n_fsk, fs));
  const double bin_hz = fs / static_cast<double>(n_fsk);
  const bool fsk_ok = std::abs(f_peak - 100e3) <= bin_hz;

  const Index n_css = 50000;
  auto css = params_for_css(-200e3, 8e6, fs, n_css);
  std::vector<std::complex<double>> chirp(static_cast<std::size_t>(n_css));
  for (Index i = 0; i < n_css; ++i) {
    const double ph = 2.0 * std::numbers::pi * phase_at(css, i);
    chirp[static_cast<std::size_t>(i)] = {std::cos(ph), std::sin(ph)};
  }
  const double slope = oracle::chirp_slope_hz_per_s(chirp, fs, 1024);
  const double slope_want = css.a2 * fs * fs;
  const bool css_ok = std::abs(slope - slope_want) <= 0.05 * std::abs(slope_want);

  const Index n_psk = 512;
  const auto ref = synth_baseband(params_for_fsk(50e3, fs, n_psk), fs).samples;
  bool psk_ok = true;
  for (double a0 : {0.0, 0.5}) {
    const auto sym =
        synth_baseband(params_for_fsk(50e3, fs, n_psk, a0), fs).samples;
    const double corr = ref.dot(sym);
    const double recovered = corr >= 0 ? 0.0 : 0.5;
    psk_ok = psk_ok && recovered == a0 &&
             std::abs(corr) > 0.4 * static_cast<double>(n_psk);
  }

  detail = fmt("fsk peak off %.3g Hz, css slope err %.2f%%, psk by correlation",
               std::abs(f_peak - 100e3),
               100.0 * std::abs(slope - slope_want) / slope_want);
  return fsk_ok && css_ok && psk_ok;
}

// 2. Switch-as-mixer: square-wave gating of a carrier puts sidebands at the
// gating frequency with the odd-harmonic 1/3 amplitude ladder.
bool criterion_mixer_identity(std::string& detail) {
  const double fs = 1e6;
  const Index n = 10000;
  const Index period = 100;  // fine grid keeps zero-order-hold distortion small
  IqBufferd exc;
  exc.sample_rate = fs;
  exc.samples = CVecXd::Constant(n, std::complex<double>(1, 0));
  SwitchSequence seq;
  seq.bits = 1;
  seq.sample_rate = fs;
  seq.levels.resize(n);
  for (Index i = 0; i < n; ++i) seq.levels[i] = (i % period) < period / 2 ? 1 : 0;

  IqBufferd out = synth_passive<double>(
      exc, seq, {std::complex<double>(0, 0), std::complex<double>(1, 0)});
  CVecXd spec = fft(out.samples);
  const Index fb_bin = n / period;  // gating tone, 10 kHz
  const double a1 = std::abs(spec[fb_bin]);
  const double a1_neg = std::abs(spec[n - fb_bin]);
  const double a3 = std::abs(spec[3 * fb_bin]);
  const double floor_mag = std::abs(spec[2 * fb_bin]);  // even harmonics vanish

  const double ratio = a3 / a1;
  const bool ratio_ok = std::abs(ratio - 1.0 / 3.0) <= 0.02 / 3.0;
  const bool sidebands_ok =
      std::abs(a1 - a1_neg) <= 1e-6 * a1 && a1 > 50.0 * floor_mag;
  detail = fmt("third harmonic ratio %.5f vs 1/3, +/-fb asymmetry %.2g", ratio,
               std::abs(a1 - a1_neg) / a1);
  return ratio_ok && sidebands_ok;
}

bool within_factor_2(double measured, double analytic) {
  return measured >= analytic / 2.0 && measured <= analytic * 2.0;
}

// 3. Monte-Carlo BER against the closed AWGN forms.
bool criterion_ber_oracles(std::string& detail) {
  BerSweepConfig bpsk;
  bpsk.protocol.modulation = Modulation::Bpsk;
  bpsk.snr_db = {4, 6, 8, 10};
  bpsk.bits_per_point = 1000000;
  bpsk.seed = 8601;
  bool ok = true;
  double worst = 1.0;
  for (const auto& pt : ber_sweep(bpsk).points) {
    ok = ok && within_factor_2(pt.ber, pt.analytic);
    worst = std::min(worst, pt.ber > 0 ? std::min(pt.ber / pt.analytic,
                                                  pt.analytic / pt.ber)
                                       : 0.0);
  }

  BerSweepConfig fsk = bpsk;
  fsk.protocol.modulation = Modulation::Fsk;
  fsk.snr_db = {10, 13};
  fsk.bits_per_point = 400000;
  fsk.seed = 8602;
  for (const auto& pt : ber_sweep(fsk).points)
    ok = ok && within_factor_2(pt.ber, pt.analytic);

  BerSweepConfig ook = bpsk;
  ook.protocol.protocol = Protocol::Amp80211;
  ook.protocol.modulation = Modulation::Ook;
  ook.protocol.data_rate = 250e3;
  ook.snr_db = {10, 13};
  ook.bits_per_point = 400000;
  ook.seed = 8603;
  for (const auto& pt : ber_sweep(ook).points)
    ok = ok && within_factor_2(pt.ber, pt.analytic);

  detail = fmt("bpsk 4x1e6 bits, fsk/ook 2x4e5 bits, worst ratio-to-analytic %.2f",
               worst);
  return ok;
}

// 4. Link calibration reproduces the passive uplink range anchor.
bool criterion_distance_anchor(std::string& detail) {
  LinkCalibration cal = calibrate_link({});
  const double err = std::abs(cal.predicted_uplink_crossing_m - 28.0) / 28.0;
  detail = fmt("uplink 1%% crossing %.1f m vs 28 m (%.0f%%), downlink %.1f m",
               cal.predicted_uplink_crossing_m, 100.0 * err,
               cal.predicted_downlink_crossing_m);
  return err <= 0.20;
}

// 5. Frame protocol: sliding sync after random prefixes, lossless payloads,
// oversize data rejected.
bool criterion_frame_protocol(std::string& detail) {
  Rng rng(4242);
  const TypeLengthTable table = default_type_length_table();
  const std::uint8_t kinds[4] = {kFrameTypeSamplingRate, kFrameTypeSampleCount,
                                 kFrameTypeSymbolDuration, kFrameTypePayload};
  long misses = 0;
  const long trials = 100000;
  for (long t = 0; t < trials; ++t) {
    InteractionFrame f;
    f.id = static_cast<std::uint8_t>(rng.integer(256));
    f.type_field = kinds[rng.integer(4)];
    f.data = random_bits(table.at(f.type_field), rng);

    BitVec stream = random_bits(static_cast<long>(rng.integer(65)), rng);
    const BitVec enc = frame_encode(f);
    stream.insert(stream.end(), enc.begin(), enc.end());

    bool hit = false;
    for (const auto& d : frame_decode(stream, table).frames)
      hit = hit || (d.frame.id == f.id && d.frame.type_field == f.type_field &&
                    d.frame.data == f.data);
    misses += !hit;
  }

  bool reject_ok = false;
  try {
    InteractionFrame big;
    big.type_field = kFrameTypePayload;
    big.data.assign(129, 1);
    frame_encode(big);
  } catch (const ArgumentError&) {
    reject_ok = true;
  }

  detail = fmt("%g random-prefix round trips, %g missed, >128-bit data rejected",
               static_cast<double>(trials), static_cast<double>(misses));
  return misses == 0 && reject_ok;
}

// 6. Mode-switch latency figures and their decomposition.
bool criterion_latency(std::string& detail) {
  const LatencyTable t;
  const long to_active = transition_latency_us(RadioOpState::Sleep,
                                               RadioOpState::ActiveOp);
  const long to_passive = transition_latency_us(RadioOpState::Sleep,
                                                RadioOpState::PassiveOp);
  const bool ok =
      to_active == 88800 &&
      to_active == t.mcu_wake_us + t.regulators_us + t.fpga_init_us +
                       t.pll_settle_us &&
      to_passive == 58800 &&
      to_passive == t.mcu_wake_us + t.regulators_us + t.fpga_init_us &&
      transition_latency_us(RadioOpState::PassiveOp, RadioOpState::ActiveOp) ==
          30000 &&
      transition_latency_us(RadioOpState::ActiveOp, RadioOpState::PassiveOp) == 0;
  detail = fmt("sleep->active %g us = 300+500+58000+30000, sleep->passive %g us",
               static_cast<double>(to_active), static_cast<double>(to_passive));
  return ok;
}

// 7. Harvesting operating points as long-run exhaustion duty cycles.
bool criterion_energy_anchors(std::string& detail) {
  PowerProfile profile;
  struct Case {
    double p_harvest;
    double p_task;
    double target;
    double horizon;
  };
  RfHarvest rf33{33, 0.1, 915e6};
  SolarHarvest bright{524, 0.053 * 0.030};
  const Case cases[4] = {
      {rf_harvest_power(RfHarvest{}), profile.p_passive, 0.14, 600},
      {rf_harvest_power(rf33), profile.p_passive, 0.21, 500},
      {solar_harvest_power(SolarHarvest{}), profile.p_active, 0.02, 400},
      {solar_harvest_power(bright), profile.p_active, 0.33, 60},
  };
  bool ok = true;
  double worst_pp = 0;
  for (const auto& c : cases) {
    auto tl = run_exhaustion_mode(make_energy_state(0.09, 2.0), profile,
                                  c.p_task, c.horizon,
                                  constant_harvest(c.p_harvest));
    const auto stats = measure_cycles(tl);
    const double err_pp = std::abs(stats.duty - c.target);
    worst_pp = std::max(worst_pp, err_pp);
    ok = ok && stats.cycles >= 2 && err_pp <= 0.03;
  }

  auto tl = run_exhaustion_mode(make_energy_state(0.09, 2.0), profile,
                                profile.p_passive, 600,
                                constant_harvest(rf_harvest_power(RfHarvest{})));
  const auto stats = measure_cycles(tl);
  const auto pred = oracle::two_phase_cycle(0.09, 3.3, 2.0,
                                            rf_harvest_power(RfHarvest{}),
                                            profile.p_sleep, profile.p_passive);
  const double period_err =
      std::abs(stats.mean_period_s - pred.period_s) / pred.period_s;
  ok = ok && period_err <= 0.05;

  detail = fmt("duty anchors 14/21/2/33%%, worst err %.2f pp, period err %.1f%%",
               100.0 * worst_pp, 100.0 * period_err);
  return ok;
}

// 8. Hybrid policy sandwich and the energy headline on waypoint traces.
bool criterion_hybrid_policy(std::string& detail) {
  Scenario sc = default_scenario();
  sc.duration_s = 240;
  bool ok = true;
  double worst_ratio = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto trace = random_waypoint_trace(sc.room_w_m, sc.room_h_m,
                                             sc.speed_mps, 240, 0.1, seed);
    const HybridRunResult res = hybrid_policy_run(sc, trace, seed);
    const double ratio = res.hybrid.energy_j / res.always_active.energy_j;
    worst_ratio = std::max(worst_ratio, ratio);
    ok = ok && res.hybrid.prr >= res.always_passive.prr - 1e-12;
    ok = ok && res.hybrid.energy_j <= res.always_active.energy_j + 1e-12;
    ok = ok && ratio <= 0.40;
  }
  detail = fmt("20 traces, worst hybrid/active energy ratio %.3f (gate 0.40)",
               worst_ratio);
  return ok;
}

// 9. BLE frames against the independent oracle, and CRC detection of every
// single-bit corruption of the protected span.
bool criterion_ble_validity(std::string& detail) {
  const std::array<std::uint8_t, 6> addr{0x11, 0x22, 0x33, 0x44, 0x55, 0x66};
  bool oracle_ok = true;
  for (int ch : {37, 38, 39}) {
    const AirFrame frame = ble_adv_build({0x02, 0x01, 0x06}, addr, ch);
    const auto want = oracle::ble_adv_frame_bits({0x02, 0x01, 0x06}, addr, ch,
                                                 kBleAdvNonconnInd);
    oracle_ok = oracle_ok && frame.bits == want;
  }

  Rng rng(909);
  long detected = 0;
  const long trials = 10000;
  const std::size_t pdu_start = 40;  // preamble + access address
  for (long t = 0; t < trials; ++t) {
    std::vector<std::uint8_t> payload(rng.integer(32));
    for (auto& b : payload) b = static_cast<std::uint8_t>(rng.integer(256));
    AirFrame frame = ble_adv_build(payload, addr, 37);
    BitVec bits = frame.bits;
    const std::size_t flip =
        pdu_start + static_cast<std::size_t>(rng.integer(
                        static_cast<std::uint64_t>(bits.size() - pdu_start)));
    bits[flip] ^= 1;
    detected += !ble_adv_decode(bits, 37).crc_ok;
  }
  detail = fmt("oracle frames equal on ch 37/38/39, %g/%g corruptions detected",
               static_cast<double>(detected), static_cast<double>(trials));
  return oracle_ok && detected == trials;
}

// 10. CLI determinism: identical seed and flags give identical bytes.
bool criterion_determinism(const std::string& cli, std::string& detail) {
  if (cli.empty()) {
    detail = "aiotsim path not provided on the command line";
    return false;
  }
  namespace fsys = std::filesystem;
  const fsys::path base = fsys::temp_directory_path();
  const fsys::path dir_a = base / "aiot_acc_det_a";
  const fsys::path dir_b = base / "aiot_acc_det_b";
  fsys::remove_all(dir_a);
  fsys::remove_all(dir_b);

  auto run = [&](const fsys::path& dir, const std::string& rest) {
    const std::string cmd =
        "\"" + cli + "\" --seed 7 --out-dir " + dir.string() + " " + rest +
        " > /dev/null 2>&1";
    return std::system(cmd.c_str()) == 0;
  };
  const std::string sweep = "ber-sweep --bits 20000 --snrs 6,8";
  const std::string wave = "modulate --nbits 256 --out wave.cf32";
  if (!run(dir_a, sweep) || !run(dir_b, sweep) || !run(dir_a, wave) ||
      !run(dir_b, wave)) {
    detail = "CLI invocation failed";
    return false;
  }

  bool ok = true;
  int compared = 0;
  for (const char* name : {"ber_sweep.csv", "ber_sweep.meta", "wave.cf32",
                           "wave.cf32.meta", "wave.cf32.bits.txt",
                           "modulate.meta"}) {
    const std::string a = text_read((dir_a / name).string());
    ok = ok && a == text_read((dir_b / name).string());
    ok = ok && !a.empty();
    ++compared;
  }
  fsys::remove_all(dir_a);
  fsys::remove_all(dir_b);
  detail = fmt("%g artifacts byte-identical across two seeded runs",
               static_cast<double>(compared));
  return ok;
}

template <typename Fn>
void guard(int num, const char* name, Fn&& fn) {
  std::string detail;
  bool ok = false;
  try {
    ok = fn(detail);
  } catch (const std::exception& e) {
    detail = std::string("exception: ") + e.what();
  }
  report(num, name, ok, detail);
}

}  // namespace

int main(int argc, char** argv) {
  const std::string cli = argc > 1 ? argv[1] : "";

  guard(1, "phase-polynomial parameter mapping", criterion_parameter_mapping);
  guard(2, "switch-as-mixer harmonic identity", criterion_mixer_identity);
  guard(3, "analytic BER agreement", criterion_ber_oracles);
  guard(4, "calibrated uplink distance anchor", criterion_distance_anchor);
  guard(5, "interaction frame protocol", criterion_frame_protocol);
  guard(6, "mode-switch latency decomposition", criterion_latency);
  guard(7, "harvesting duty-cycle anchors", criterion_energy_anchors);
  guard(8, "hybrid policy energy/PRR sandwich", criterion_hybrid_policy);
  guard(9, "BLE advertising frame validity", criterion_ble_validity);
  guard(10, "CLI artifact determinism",
        [&](std::string& d) { return criterion_determinism(cli, d); });

  std::printf("acceptance: %d/10 criteria passed\n", 10 - g_failed);
  return g_failed;
}
