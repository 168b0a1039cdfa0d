#pragma once

#include <cstdint>
#include <vector>

#include "aiot/rng.hpp"
#include "aiot/types.hpp"

namespace aiot {

/// Direct: one leg. Backscatter: excitation leg plus reflection leg, both at
/// the queried distance (monostatic reader).
enum class ChannelPath { Direct, Backscatter };

/// Log-distance channel. Power convention throughout the library: a complex
/// sample of magnitude 1 carries 0 dBm (|s|^2 is milliwatts).
struct ChannelModel {
  ChannelPath path = ChannelPath::Direct;
  double exponent = 2.0;
  double ref_loss_db = 42.13;     ///< loss at 1 m
  double noise_density_w_hz = 0;  ///< one-sided N0 at the receiver input
  std::uint64_t rng_seed = 1;

  void validate() const;
};

/// Leg distances implied by the model's path kind at `distance_m`.
std::vector<double> path_legs(const ChannelModel& model, double distance_m);

/// Path loss in dB over one leg of `distance_m`.
double path_loss_db(const ChannelModel& model, double distance_m);

/// Total loss over a multi-leg path (excitation leg + reflection leg for
/// backscatter, a single leg for a direct link).
double path_loss_db(const ChannelModel& model,
                    const std::vector<double>& leg_distances_m);

/// Attenuates through the legs and adds receiver AWGN at the model's noise
/// density (noise power per sample = N0 * fs). `stream` decorrelates
/// independent links under one scenario seed.
IqBufferd channel_apply(const ChannelModel& model, const IqBufferd& tx,
                        const std::vector<double>& leg_distances_m,
                        std::uint64_t stream = 0);

/// Single-distance form: legs follow the model's path kind.
IqBufferd channel_apply(const ChannelModel& model, const IqBufferd& tx,
                        double distance_m, std::uint64_t stream = 0);

/// Adds complex AWGN of total power `noise_mw` per sample in place.
void awgn_add(CVecXd& samples, double noise_mw, Rng& rng);

/// Mean-power RSSI in dBm over the trailing `window` samples (0 = whole
/// buffer), plus a front-end calibration offset.
double rssi_estimate(const CVecXd& samples, double calibration_dbm_offset = 0,
                     Index window = 0);

/// Noise power per complex sample in mW for a given density and sample rate.
double noise_mw_per_sample(double noise_density_w_hz, double sample_rate);

}  // namespace aiot
