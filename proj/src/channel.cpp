#include "aiot/channel.hpp"

#include <cmath>

#include "aiot/errors.hpp"

namespace aiot {

void ChannelModel::validate() const {
  if (exponent <= 0) throw ConfigError("ChannelModel: exponent must be > 0");
  if (noise_density_w_hz < 0) throw ConfigError("ChannelModel: negative noise density");
}

double path_loss_db(const ChannelModel& model, double distance_m) {
  model.validate();
  if (distance_m <= 0) throw ArgumentError("path_loss_db: distance must be > 0");
  return model.ref_loss_db + 10.0 * model.exponent * std::log10(distance_m);
}

double path_loss_db(const ChannelModel& model,
                    const std::vector<double>& leg_distances_m) {
  if (leg_distances_m.empty()) throw ArgumentError("path_loss_db: no legs");
  double total = 0;
  for (double d : leg_distances_m) total += path_loss_db(model, d);
  return total;
}

std::vector<double> path_legs(const ChannelModel& model, double distance_m) {
  if (model.path == ChannelPath::Backscatter)
    return {distance_m, distance_m};
  return {distance_m};
}

double noise_mw_per_sample(double noise_density_w_hz, double sample_rate) {
  if (sample_rate <= 0) throw ArgumentError("noise_mw_per_sample: bad sample rate");
  return noise_density_w_hz * sample_rate * 1e3;
}

void awgn_add(CVecXd& samples, double noise_mw, Rng& rng) {
  if (noise_mw < 0) throw ArgumentError("awgn_add: negative noise power");
  if (noise_mw == 0) return;
  double sigma = std::sqrt(noise_mw / 2.0);
  for (Index i = 0; i < samples.size(); ++i)
    samples[i] += std::complex<double>(sigma * rng.gaussian(), sigma * rng.gaussian());
}

IqBufferd channel_apply(const ChannelModel& model, const IqBufferd& tx,
                        const std::vector<double>& leg_distances_m,
                        std::uint64_t stream) {
  tx.validate();
  double loss_db = path_loss_db(model, leg_distances_m);
  double gain = std::pow(10.0, -loss_db / 20.0);
  IqBufferd rx = tx;
  rx.samples *= gain;
  Rng rng(model.rng_seed ^ splitmix64(stream));
  awgn_add(rx.samples, noise_mw_per_sample(model.noise_density_w_hz, tx.sample_rate),
           rng);
  return rx;
}

IqBufferd channel_apply(const ChannelModel& model, const IqBufferd& tx,
                        double distance_m, std::uint64_t stream) {
  return channel_apply(model, tx, path_legs(model, distance_m), stream);
}

double rssi_estimate(const CVecXd& samples, double calibration_dbm_offset,
                     Index window) {
  if (samples.size() == 0) throw ArgumentError("rssi_estimate: empty buffer");
  if (window < 0 || window > samples.size())
    throw ArgumentError("rssi_estimate: window exceeds buffer");
  const Index n = window == 0 ? samples.size() : window;
  double mean_mw = samples.tail(n).squaredNorm() / static_cast<double>(n);
  return 10.0 * std::log10(mean_mw + 1e-300) + calibration_dbm_offset;
}

}  // namespace aiot
