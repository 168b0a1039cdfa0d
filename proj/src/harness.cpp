#include "aiot/harness.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "aiot/rng.hpp"

namespace aiot {

namespace {

constexpr double kBoltzmannT290 = 4.0045e-21;  ///< kT at 290 K, W/Hz
constexpr long kBeaconBits = 128;

long hamming(const BitVec& a, const BitVec& b) {
  long e = 0;
  for (std::size_t i = 0; i < a.size(); ++i) e += (a[i] != 0) != (b[i] != 0);
  return e;
}

BitVec random_bits(long n, Rng& rng) {
  BitVec bits(static_cast<std::size_t>(n));
  for (auto& b : bits) b = static_cast<std::uint8_t>(rng.bit());
  return bits;
}

}  // namespace

double q_function(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

std::pair<double, double> wilson_interval(long errors, long bits) {
  if (bits <= 0) return {0.0, 1.0};
  const double z = 1.959963985;
  const double n = static_cast<double>(bits);
  const double p = static_cast<double>(errors) / n;
  const double denom = 1.0 + z * z / n;
  const double center = (p + z * z / (2 * n)) / denom;
  const double half =
      z * std::sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / denom;
  return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

double analytic_ber(Modulation m, double snr_db) {
  const double g = std::pow(10.0, snr_db / 10.0);
  switch (m) {
    case Modulation::Bpsk:
      return q_function(std::sqrt(2.0 * g));
    case Modulation::Fsk:
      return 0.5 * std::exp(-g / 2.0);
    case Modulation::Ook:
      return 0.5 * std::exp(-g / 4.0);
    default:
      return std::numeric_limits<double>::quiet_NaN();
  }
}

double noise_variance_for_snr(const ProtocolConfig& cfg, double snr_db) {
  if (std::isinf(snr_db) && snr_db > 0) return 0.0;
  return cfg.samples_per_symbol / std::pow(10.0, snr_db / 10.0);
}

namespace {

BerPoint eval_ber_point(const BerSweepConfig& cfg, int point_index, double snr_db,
                        double distance_m) {
  BerPoint pt;
  pt.snr_db = snr_db;
  pt.distance_m = distance_m;
  const double sigma2 = noise_variance_for_snr(cfg.protocol, snr_db);
  long block = 0;
  while (pt.bits < cfg.bits_per_point) {
    const long n = std::min(cfg.block_bits, cfg.bits_per_point - pt.bits);
    Rng rng(cfg.seed ^ splitmix64((static_cast<std::uint64_t>(point_index) << 32) |
                                  static_cast<std::uint64_t>(block)));
    const BitVec bits = random_bits(n, rng);
    IqBufferd tx = modulate(bits, cfg.protocol);
    awgn_add(tx.samples, sigma2, rng);
    DemodResult r = demodulate(tx, cfg.protocol);
    if (r.no_signal || r.bits.size() != bits.size())
      pt.errors += n;  // decode failure counts every bit lost
    else
      pt.errors += hamming(bits, r.bits);
    pt.bits += n;
    ++block;
  }
  pt.ber = static_cast<double>(pt.errors) / static_cast<double>(pt.bits);
  std::tie(pt.ci_low, pt.ci_high) = wilson_interval(pt.errors, pt.bits);
  pt.analytic = analytic_ber(cfg.protocol.modulation, snr_db);
  pt.goodput_bps = cfg.protocol.data_rate *
                   std::pow(1.0 - pt.ber, static_cast<double>(cfg.goodput_frame_bits));
  pt.meets_target = pt.ber <= cfg.target_ber;
  return pt;
}

}  // namespace

BerSweepResult ber_sweep(const BerSweepConfig& cfg) {
  cfg.protocol.validate();
  if (cfg.protocol.protocol == Protocol::BleAdv)
    throw ConfigError("ber_sweep: drives the generic modulation families, not BLE");
  if (cfg.bits_per_point <= 0 || cfg.block_bits <= 0)
    throw ConfigError("ber_sweep: bit counts must be positive");
  const bool distance_mode = !cfg.distances_m.empty();
  if (distance_mode) cfg.channel.validate();

  BerSweepResult res;
  res.low_bits_warning =
      static_cast<double>(cfg.bits_per_point) < 10.0 / cfg.target_ber;

  const std::size_t n_points =
      distance_mode ? cfg.distances_m.size() : cfg.snr_db.size();
  for (std::size_t i = 0; i < n_points; ++i) {
    double snr_db;
    double distance = std::numeric_limits<double>::quiet_NaN();
    if (distance_mode) {
      distance = cfg.distances_m[i];
      const double loss =
          path_loss_db(cfg.channel, path_legs(cfg.channel, distance));
      const double p_rx_w = dbm_to_mw(cfg.tx_power_dbm - loss) * 1e-3;
      snr_db = cfg.channel.noise_density_w_hz > 0
                   ? 10.0 * std::log10(p_rx_w / (cfg.channel.noise_density_w_hz *
                                                 cfg.protocol.data_rate))
                   : std::numeric_limits<double>::infinity();
    } else {
      snr_db = cfg.snr_db[i];
    }
    res.points.push_back(
        eval_ber_point(cfg, static_cast<int>(i), snr_db, distance));
  }
  return res;
}

std::string ber_sweep_csv(const BerSweepResult& res, std::uint64_t seed) {
  std::string out =
      "snr_db,distance_m,bits,errors,ber,wilson_low,wilson_high,analytic_ber,"
      "goodput_bps,meets_target,seed\n";
  for (const auto& p : res.points) {
    out += csv_line({fmt_g(p.snr_db), fmt_g(p.distance_m), std::to_string(p.bits),
                     std::to_string(p.errors), fmt_g(p.ber), fmt_g(p.ci_low),
                     fmt_g(p.ci_high), fmt_g(p.analytic), fmt_g(p.goodput_bps),
                     p.meets_target ? "1" : "0", std::to_string(seed)});
  }
  return out;
}

double downlink_rx_dbm(const LinkBudgetConfig& cfg, double ref_loss_db,
                       double distance_m) {
  return cfg.tx_power_dbm -
         (ref_loss_db + 10.0 * cfg.exponent * std::log10(distance_m));
}

double uplink_rx_dbm(const LinkBudgetConfig& cfg, double ref_loss_db,
                     double distance_m) {
  const double exc_leg =
      ref_loss_db + 10.0 * cfg.exponent * std::log10(cfg.excitation_distance_m);
  const double refl_leg =
      ref_loss_db + 10.0 * cfg.exponent * std::log10(distance_m);
  return cfg.tx_power_dbm - exc_leg - refl_leg;
}

namespace {

ProtocolConfig amp_config(const LinkBudgetConfig& cfg) {
  ProtocolConfig p;
  p.protocol = Protocol::Amp80211;
  p.modulation = Modulation::Ook;
  p.data_rate = cfg.data_rate;
  p.samples_per_symbol = cfg.samples_per_symbol;
  return p;
}

// Downlink chain at a given ON-state amplitude and per-sample noise power.
double downlink_chain_ber(const ProtocolConfig& p, double amplitude,
                          double noise_mw, long nbits, std::uint64_t seed) {
  Rng rng(seed);
  const BitVec bits = random_bits(nbits, rng);
  IqBufferd tx = amp_downlink_synthesize(bits, p);
  tx.samples *= amplitude;
  awgn_add(tx.samples, noise_mw, rng);
  const BitVec out = amp_ook_demodulate(tx, p, OokFrontEnd::EnvelopeFirst);
  if (out.size() != bits.size()) return 1.0;
  return static_cast<double>(hamming(bits, out)) / static_cast<double>(nbits);
}

// Backscatter chain: CW excitation of the given amplitude reflected through
// the modulated switch, matched-filter receive.
double uplink_chain_ber(const ProtocolConfig& p, double amplitude,
                        double noise_mw, long nbits, std::uint64_t seed) {
  Rng rng(seed);
  const BitVec bits = random_bits(nbits, rng);
  const SwitchSequence seq = amp_uplink_modulate(bits, p, RadioMode::Passive);
  IqBufferd exc;
  exc.sample_rate = seq.sample_rate;
  exc.samples = CVecXd::Constant(seq.levels.size(),
                                 std::complex<double>(amplitude, 0));
  IqBufferd rx = synth_passive<double>(
      exc, seq, {std::complex<double>(0, 0), std::complex<double>(1, 0)});
  awgn_add(rx.samples, noise_mw, rng);
  const BitVec out = amp_ook_demodulate(rx, p, OokFrontEnd::MatchedFilter);
  if (out.size() != bits.size()) return 1.0;
  return static_cast<double>(hamming(bits, out)) / static_cast<double>(nbits);
}

// Chip-level SNR definition shared by calibration and prediction:
// gamma = P_on / (N0 * chip_rate).
double chain_gamma_sigma2(double chip_sps, double gamma_db) {
  return chip_sps / std::pow(10.0, gamma_db / 10.0);
}

double bisect_gamma_star(const std::function<double(double, std::uint64_t)>& ber_at,
                         int iters, std::uint64_t seed) {
  double lo = 0.0, hi = 30.0;
  for (int i = 0; i < iters; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double ber = ber_at(mid, seed ^ splitmix64(0x5150 + i));
    if (ber > 0.01)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

double bisect_crossing_m(const std::function<double(double, std::uint64_t)>& ber_at,
                         double lo, double hi, int iters, std::uint64_t seed) {
  for (int i = 0; i < iters; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double ber = ber_at(mid, seed ^ splitmix64(0xd157 + i));
    if (ber < 0.01)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

LinkCalibration calibrate_link(const LinkBudgetConfig& cfg) {
  if (cfg.excitation_distance_m <= 0 || cfg.downlink_anchor_m <= 0 ||
      cfg.uplink_anchor_m <= 0)
    throw ConfigError("calibrate_link: distances must be positive");
  const ProtocolConfig p = amp_config(cfg);
  const double chip_rate = 2.0 * cfg.data_rate;

  LinkCalibration cal;
  cal.ref_loss_db = cfg.tx_power_dbm - cfg.sensitivity_dbm -
                    10.0 * cfg.exponent * std::log10(cfg.downlink_anchor_m);

  // 1% SNR of each receive chain, measured at unit amplitude.
  const long n = cfg.bisect_bits;
  const double down_chip_sps = std::max(16, cfg.samples_per_symbol);
  cal.gamma_star_down_db = bisect_gamma_star(
      [&](double gdb, std::uint64_t s) {
        return downlink_chain_ber(p, 1.0, chain_gamma_sigma2(down_chip_sps, gdb),
                                  n, s);
      },
      cfg.snr_bisect_iters, cfg.seed ^ splitmix64(1));
  cal.gamma_star_up_db = bisect_gamma_star(
      [&](double gdb, std::uint64_t s) {
        return uplink_chain_ber(
            p, 1.0, chain_gamma_sigma2(cfg.samples_per_symbol, gdb), n, s);
      },
      cfg.snr_bisect_iters, cfg.seed ^ splitmix64(2));

  // Noise floors pinned so each chain crosses 1% exactly at its anchor.
  const double sens_w = dbm_to_mw(cfg.sensitivity_dbm) * 1e-3;
  cal.device_noise_density_w_hz =
      sens_w / (std::pow(10.0, cal.gamma_star_down_db / 10.0) * chip_rate);
  cal.uplink_anchor_rx_dbm =
      uplink_rx_dbm(cfg, cal.ref_loss_db, cfg.uplink_anchor_m);
  const double anchor_w = dbm_to_mw(cal.uplink_anchor_rx_dbm) * 1e-3;
  cal.gateway_noise_density_w_hz =
      anchor_w / (std::pow(10.0, cal.gamma_star_up_db / 10.0) * chip_rate);
  cal.implied_gateway_nf_db =
      10.0 * std::log10(cal.gateway_noise_density_w_hz / kBoltzmannT290);

  // Close the loop: rerun both chains against the frozen constants at
  // physical amplitudes and re-locate the 1% crossings.
  const double down_fs = chip_rate * down_chip_sps;
  const double up_fs = chip_rate * cfg.samples_per_symbol;
  const double down_noise_mw =
      noise_mw_per_sample(cal.device_noise_density_w_hz, down_fs);
  const double up_noise_mw =
      noise_mw_per_sample(cal.gateway_noise_density_w_hz, up_fs);
  cal.predicted_downlink_crossing_m = bisect_crossing_m(
      [&](double d, std::uint64_t s) {
        const double amp =
            dbm_to_amplitude(downlink_rx_dbm(cfg, cal.ref_loss_db, d));
        return downlink_chain_ber(p, amp, down_noise_mw, n, s);
      },
      2.0, 4.0 * cfg.downlink_anchor_m, cfg.dist_bisect_iters,
      cfg.seed ^ splitmix64(3));
  cal.predicted_uplink_crossing_m = bisect_crossing_m(
      [&](double d, std::uint64_t s) {
        const double amp =
            dbm_to_amplitude(uplink_rx_dbm(cfg, cal.ref_loss_db, d));
        return uplink_chain_ber(p, amp, up_noise_mw, n, s);
      },
      2.0, 4.0 * cfg.uplink_anchor_m, cfg.dist_bisect_iters,
      cfg.seed ^ splitmix64(4));
  return cal;
}

std::string calibration_report(const LinkBudgetConfig& cfg,
                               const LinkCalibration& cal) {
  std::string out;
  out += "# link budget calibration (fitted constants, not physical claims)\n";
  out += "ref_loss_db=" + fmt_g(cal.ref_loss_db) + "\n";
  out += "gamma_star_down_db=" + fmt_g(cal.gamma_star_down_db) + "\n";
  out += "gamma_star_up_db=" + fmt_g(cal.gamma_star_up_db) + "\n";
  out += "device_noise_density_w_hz=" + fmt_g(cal.device_noise_density_w_hz) + "\n";
  out += "gateway_noise_density_w_hz=" + fmt_g(cal.gateway_noise_density_w_hz) + "\n";
  out += "uplink_anchor_rx_dbm=" + fmt_g(cal.uplink_anchor_rx_dbm) + "\n";
  out += "implied_gateway_nf_db=" + fmt_g(cal.implied_gateway_nf_db) + "\n";
  out += "predicted_downlink_crossing_m=" + fmt_g(cal.predicted_downlink_crossing_m) +
         " (anchor " + fmt_g(cfg.downlink_anchor_m) + ")\n";
  out += "predicted_uplink_crossing_m=" + fmt_g(cal.predicted_uplink_crossing_m) +
         " (anchor " + fmt_g(cfg.uplink_anchor_m) + ")\n";
  return out;
}

std::vector<TracePoint> random_waypoint_trace(double room_w_m, double room_h_m,
                                              double speed_mps, double duration_s,
                                              double dt_s, std::uint64_t seed) {
  if (room_w_m <= 0 || room_h_m <= 0 || speed_mps <= 0 || duration_s <= 0 ||
      dt_s <= 0)
    throw ArgumentError("random_waypoint_trace: all parameters must be positive");
  Rng rng(seed);
  double x = rng.uniform() * room_w_m;
  double y = rng.uniform() * room_h_m;
  double wx = rng.uniform() * room_w_m;
  double wy = rng.uniform() * room_h_m;
  std::vector<TracePoint> trace;
  const long steps = static_cast<long>(std::floor(duration_s / dt_s));
  trace.reserve(static_cast<std::size_t>(steps) + 1);
  for (long i = 0; i <= steps; ++i) {
    trace.push_back({static_cast<double>(i) * dt_s, x, y});
    double remaining = speed_mps * dt_s;
    while (remaining > 0) {
      const double dx = wx - x, dy = wy - y;
      const double dist = std::hypot(dx, dy);
      if (dist <= remaining) {
        x = wx;
        y = wy;
        remaining -= dist;
        wx = rng.uniform() * room_w_m;
        wy = rng.uniform() * room_h_m;
      } else {
        x += dx / dist * remaining;
        y += dy / dist * remaining;
        remaining = 0;
      }
    }
  }
  return trace;
}

double backscatter_rssi_dbm(const Scenario& sc, double distance_m) {
  const double d = std::max(distance_m, 0.01);
  const double leg =
      sc.channel.ref_loss_db + 10.0 * sc.channel.exponent * std::log10(d);
  return sc.tx_power_dbm - 2.0 * leg;
}

double passive_zone_radius_m(const Scenario& sc) {
  const double exp20 = 2.0 * 10.0 * sc.channel.exponent;
  return std::pow(10.0, (sc.tx_power_dbm - sc.rssi_threshold_dbm -
                         2.0 * sc.channel.ref_loss_db) /
                            exp20);
}

namespace {

double active_rx_dbm(const Scenario& sc, double d) {
  return sc.active_tx_dbm - (sc.channel.ref_loss_db +
                             10.0 * sc.channel.exponent * std::log10(d));
}

double beacon_ber(const Scenario& sc, double d, RadioOpState mode) {
  const double n0 = sc.channel.noise_density_w_hz;
  if (n0 <= 0) return 0.0;
  const double rate = 250e3;
  d = std::max(d, 0.01);
  if (mode == RadioOpState::PassiveOp) {
    const double p_w = dbm_to_mw(backscatter_rssi_dbm(sc, d)) * 1e-3;
    const double gamma = p_w / (n0 * 2.0 * rate);  // Manchester chip rate
    return std::min(0.5, 0.5 * std::exp(-gamma / 2.0));
  }
  const double p_w = dbm_to_mw(active_rx_dbm(sc, d)) * 1e-3;
  const double gamma = p_w / (n0 * rate);
  return q_function(std::sqrt(2.0 * gamma));
}

struct PolicyRun {
  PolicyStats stats;
  RadioState radio;
  double passive_time = 0;
};

RadioOpState policy_target(Policy pol, double rssi_dbm, double threshold_dbm) {
  switch (pol) {
    case Policy::AlwaysPassive:
      return RadioOpState::PassiveOp;
    case Policy::AlwaysActive:
      return RadioOpState::ActiveOp;
    case Policy::Hybrid:
      return rssi_dbm >= threshold_dbm ? RadioOpState::PassiveOp
                                       : RadioOpState::ActiveOp;
  }
  return RadioOpState::ActiveOp;
}

double mode_power(const PowerProfile& prof, RadioOpState mode) {
  return mode == RadioOpState::PassiveOp ? prof.passive() : prof.active();
}

}  // namespace

HybridRunResult hybrid_policy_run(const Scenario& sc,
                                  const std::vector<TracePoint>& trace,
                                  std::uint64_t seed) {
  sc.validate();
  if (trace.size() < 2)
    throw ArgumentError("hybrid_policy_run: trace needs at least two points");
  if (trace.back().t > sc.duration_s + 1e-9)
    throw ArgumentError("hybrid_policy_run: trace outlasts the scenario duration");

  const PowerProfile& prof = sc.devices.front().profile;
  const LatencyTable latency;
  const Policy kinds[3] = {Policy::AlwaysPassive, Policy::AlwaysActive,
                           Policy::Hybrid};
  PolicyRun runs[3];
  {
    const double d0 =
        std::hypot(trace[0].x - sc.gateway_x, trace[0].y - sc.gateway_y);
    const double rssi0 = backscatter_rssi_dbm(sc, d0);
    for (int m = 0; m < 3; ++m) {
      runs[m].stats.policy = kinds[m];
      const RadioOpState init =
          policy_target(kinds[m], rssi0, sc.rssi_threshold_dbm);
      runs[m].radio.current = init;
      runs[m].radio.target = init;
    }
  }

  Rng crn(seed ^ splitmix64(0xbeac0));
  double next_beacon = trace.front().t;
  for (std::size_t i = 0; i + 1 < trace.size(); ++i) {
    const double dt = trace[i + 1].t - trace[i].t;
    if (dt <= 0) throw ArgumentError("hybrid_policy_run: non-increasing trace time");
    const double d =
        std::hypot(trace[i].x - sc.gateway_x, trace[i].y - sc.gateway_y);
    const double rssi = backscatter_rssi_dbm(sc, d);

    // Beacons falling inside this segment share one uniform draw across the
    // three policies (common random numbers).
    while (next_beacon < trace[i + 1].t - 1e-12) {
      const double u = crn.uniform();
      for (auto& run : runs) {
        const double ber = beacon_ber(sc, d, run.radio.current);
        const double psr = std::pow(1.0 - ber, static_cast<double>(kBeaconBits));
        ++run.stats.beacons;
        if (u < psr) ++run.stats.delivered;
      }
      next_beacon += sc.beacon_interval_s;
    }

    for (auto& run : runs) {
      const RadioOpState want =
          policy_target(run.stats.policy, rssi, sc.rssi_threshold_dbm);
      if (want != run.radio.target) {
        run.radio = transition(run.radio, want, latency);
        ++run.stats.transitions;
      }
      const RadioOpState billed =
          run.radio.pending_latency_s > 0 ? run.radio.target : run.radio.current;
      run.stats.energy_j += mode_power(prof, billed) * dt;
      if (billed == RadioOpState::PassiveOp) run.passive_time += dt;
      radio_advance(run.radio, dt);
    }
  }

  const double total = trace.back().t - trace.front().t;
  for (auto& run : runs) {
    run.stats.prr = run.stats.beacons
                        ? static_cast<double>(run.stats.delivered) /
                              static_cast<double>(run.stats.beacons)
                        : 0.0;
    run.stats.passive_time_fraction = total > 0 ? run.passive_time / total : 0.0;
  }
  const double e_active = runs[1].stats.energy_j;
  for (auto& run : runs)
    run.stats.normalized_power = e_active > 0 ? run.stats.energy_j / e_active : 0.0;

  HybridRunResult res;
  res.always_passive = runs[0].stats;
  res.always_active = runs[1].stats;
  res.hybrid = runs[2].stats;
  res.zone_radius_m = passive_zone_radius_m(sc);
  return res;
}

std::string policy_csv(const HybridRunResult& res) {
  std::string out =
      "policy,beacons,delivered,prr,energy_j,power_normalized_to_always_active,"
      "passive_time_fraction,transitions\n";
  const PolicyStats* rows[3] = {&res.always_passive, &res.always_active,
                                &res.hybrid};
  const char* names[3] = {"always_passive", "always_active", "hybrid"};
  for (int i = 0; i < 3; ++i) {
    const PolicyStats& s = *rows[i];
    out += csv_line({names[i], std::to_string(s.beacons),
                     std::to_string(s.delivered), fmt_g(s.prr), fmt_g(s.energy_j),
                     fmt_g(s.normalized_power), fmt_g(s.passive_time_fraction),
                     std::to_string(s.transitions)});
  }
  return out;
}

CycleStats measure_cycles(const EnergyTimeline& tl) {
  std::vector<double> starts;
  std::vector<std::pair<double, double>> run_spans;
  double open_start = -1;
  for (const auto& ev : tl.events) {
    if (ev.kind == EnergyEvent::Kind::RunStart) {
      starts.push_back(ev.t);
      open_start = ev.t;
    } else if (ev.kind == EnergyEvent::Kind::RunEnd && open_start >= 0) {
      run_spans.emplace_back(open_start, ev.t);
      open_start = -1;
    }
  }
  CycleStats cs;
  if (starts.size() < 2) return cs;
  const double t0 = starts.front(), t1 = starts.back();
  cs.cycles = static_cast<long>(starts.size()) - 1;
  cs.mean_period_s = (t1 - t0) / static_cast<double>(cs.cycles);
  double run_time = 0;
  for (const auto& [a, b] : run_spans)
    if (a >= t0 && a < t1) run_time += b - a;
  cs.duty = run_time / (t1 - t0);
  return cs;
}

}  // namespace aiot
