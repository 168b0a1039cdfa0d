#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "aiot/channel.hpp"
#include "aiot/control_plane.hpp"
#include "aiot/energy.hpp"
#include "aiot/io.hpp"
#include "aiot/phy.hpp"

namespace aiot {

/// Gaussian tail Q(x) = 0.5 erfc(x / sqrt(2)).
double q_function(double x);

/// 95% Wilson score interval for an error count.
std::pair<double, double> wilson_interval(long errors, long bits);

/// Closed-form AWGN BER at Eb/N0 = snr_db for the families that have one:
/// Bpsk Q(sqrt(2g)), noncoherent orthogonal Fsk exp(-g/2)/2, noncoherent Ook
/// exp(-g/4)/2. NaN for the rest.
double analytic_ber(Modulation m, double snr_db);

/// Complex noise variance per sample that realizes Eb/N0 = snr_db against a
/// unit-amplitude symbol stream: sigma^2 = samples_per_symbol / gamma.
double noise_variance_for_snr(const ProtocolConfig& cfg, double snr_db);

struct BerPoint {
  double snr_db = 0;
  double distance_m = std::numeric_limits<double>::quiet_NaN();
  long bits = 0;
  long errors = 0;
  double ber = 0;
  double ci_low = 0;
  double ci_high = 0;
  double analytic = std::numeric_limits<double>::quiet_NaN();
  double goodput_bps = 0;
  bool meets_target = false;
};

struct BerSweepConfig {
  ProtocolConfig protocol;
  std::vector<double> snr_db = {4, 6, 8, 10};  ///< used when distances_m empty
  std::vector<double> distances_m;             ///< distance-domain sweep
  ChannelModel channel;                        ///< noise/path for distance mode
  double tx_power_dbm = 15;
  long bits_per_point = 200000;
  long block_bits = 2000;
  long goodput_frame_bits = 1024;  ///< 128-byte packets
  double target_ber = 1e-3;
  std::uint64_t seed = 1;
};

struct BerSweepResult {
  std::vector<BerPoint> points;
  /// bits_per_point < 10 / target_ber: estimates too coarse for the target.
  bool low_bits_warning = false;
};

/// Monte-Carlo BER: random bits -> modulate -> AWGN (or channel at distance)
/// -> demodulate, per sweep point, with independent per-block seeded streams.
BerSweepResult ber_sweep(const BerSweepConfig& cfg);

std::string ber_sweep_csv(const BerSweepResult& res, std::uint64_t seed);

/// Link-budget anchors: downlink range and sensitivity pin ref_loss and the
/// device noise floor; the uplink anchor pins the gateway noise floor.
struct LinkBudgetConfig {
  double tx_power_dbm = 15;
  double sensitivity_dbm = -60;
  double downlink_anchor_m = 44;
  double uplink_anchor_m = 28;
  double excitation_distance_m = 0.5;
  double exponent = 2.0;
  double data_rate = 250e3;
  int samples_per_symbol = 8;
  long bisect_bits = 30000;
  int snr_bisect_iters = 14;
  int dist_bisect_iters = 12;
  std::uint64_t seed = 1;
};

struct LinkCalibration {
  double ref_loss_db = 0;
  double gamma_star_down_db = 0;  ///< 1% BER SNR of the OFDM downlink chain
  double gamma_star_up_db = 0;    ///< 1% BER SNR of the backscatter chain
  double device_noise_density_w_hz = 0;
  double gateway_noise_density_w_hz = 0;
  double uplink_anchor_rx_dbm = 0;
  double implied_gateway_nf_db = 0;
  /// Full-chain Monte-Carlo re-runs of the 1% crossings under the frozen
  /// constants; these close the loop on the anchors.
  double predicted_downlink_crossing_m = 0;
  double predicted_uplink_crossing_m = 0;
};

/// Fits ref_loss to (downlink anchor, sensitivity), the device noise floor to
/// the sensitivity via the measured downlink 1% SNR, and the gateway noise
/// floor to the uplink anchor via the measured uplink 1% SNR; then re-derives
/// both crossings by simulation. The noise floors are calibration constants,
/// not physical claims.
LinkCalibration calibrate_link(const LinkBudgetConfig& cfg = {});

double downlink_rx_dbm(const LinkBudgetConfig& cfg, double ref_loss_db,
                       double distance_m);
double uplink_rx_dbm(const LinkBudgetConfig& cfg, double ref_loss_db,
                     double distance_m);

std::string calibration_report(const LinkBudgetConfig& cfg,
                               const LinkCalibration& cal);

struct TracePoint {
  double t = 0, x = 0, y = 0;
};

/// Seeded random-waypoint mobility inside a w x h room, sampled every dt.
std::vector<TracePoint> random_waypoint_trace(double room_w_m, double room_h_m,
                                              double speed_mps, double duration_s,
                                              double dt_s, std::uint64_t seed);

enum class Policy { AlwaysPassive, AlwaysActive, Hybrid };

struct PolicyStats {
  Policy policy = Policy::Hybrid;
  long beacons = 0;
  long delivered = 0;
  double prr = 0;
  double energy_j = 0;
  double normalized_power = 0;  ///< vs Always-Active
  double passive_time_fraction = 0;
  long transitions = 0;
};

struct HybridRunResult {
  PolicyStats always_passive;
  PolicyStats always_active;
  PolicyStats hybrid;
  double zone_radius_m = 0;
};

/// Gateway-side RSSI of the backscatter return from distance d (both legs).
double backscatter_rssi_dbm(const Scenario& sc, double distance_m);

/// Distance at which the backscatter RSSI meets the scenario threshold.
double passive_zone_radius_m(const Scenario& sc);

/// Replays the trace for the three policies with common per-beacon randomness
/// (one uniform draw per beacon shared across policies). Mode transitions go
/// through the radio latency model and are billed at the target mode's power.
HybridRunResult hybrid_policy_run(const Scenario& sc,
                                  const std::vector<TracePoint>& trace,
                                  std::uint64_t seed);

std::string policy_csv(const HybridRunResult& res);

struct CycleStats {
  double duty = 0;
  double mean_period_s = 0;
  long cycles = 0;
};

/// Duty and period measured over whole charge/run cycles (RunStart-aligned).
CycleStats measure_cycles(const EnergyTimeline& tl);

}  // namespace aiot
