#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "aiot/dsp.hpp"
#include "aiot/types.hpp"

namespace aiot {

/// Antenna load relative to a reference impedance.
struct Impedance {
  std::complex<double> z;  ///< ohms; infinities model an open circuit
  double z0 = 50.0;        ///< reference impedance, ohms
};

/// Gamma = (z - z0) / (z + z0). Open circuit maps to +1, short to -1.
std::complex<double> reflection_coefficient(const Impedance& imp);

enum class RadioMode { Passive, Active };
enum class ModeSwitchRoute { FiftyOhm, Pll };
enum class DataSwitchRoute { Antenna, FiftyOhm };

/// Dual-switch front-end routing. In active mode the off state always
/// terminates into 50 ohms, never an open circuit.
struct SwitchTopology {
  RadioMode mode = RadioMode::Passive;
  ModeSwitchRoute mode_switch_route = ModeSwitchRoute::FiftyOhm;
  std::array<DataSwitchRoute, 2> data_switch_route = {DataSwitchRoute::FiftyOhm,
                                                      DataSwitchRoute::Antenna};
  /// Reflection coefficient presented per data-switch state (passive mode).
  std::array<std::complex<double>, 2> gamma = {std::complex<double>(0, 0),
                                               std::complex<double>(1, 0)};
};

SwitchTopology configure_topology(RadioMode mode);

inline constexpr double kPllMinHz = 54e6;
inline constexpr double kPllMaxHz = 6.8e9;
inline constexpr double kPllSettleSeconds = 30e-3;

/// Carrier source state threaded through the simulated clock.
struct PllState {
  double freq = 0;          ///< Hz
  double power_dbm = 0;     ///< output power, 0 dBm == unit amplitude
  bool settled = false;
  double settle_time = kPllSettleSeconds;  ///< seconds
  double elapsed = 0;       ///< simulated seconds since tune
};

/// Starts a tune; the state settles only after pll_advance passes settle_time.
PllState pll_tune(double target_freq_hz, double target_power_dbm);

/// Advances the simulated clock; flips `settled` once settle_time has elapsed.
void pll_advance(PllState& state, double dt_seconds);

/// Backscatter synthesis: output[n] = excitation[n] * gamma_levels[seq[n]].
/// Output length is the shorter of the two inputs; `truncated`, when given,
/// reports whether truncation occurred.
template <typename Scalar>
IqBuffer<Scalar> synth_passive(const IqBuffer<Scalar>& excitation,
                               const SwitchSequence& seq,
                               const std::vector<std::complex<Scalar>>& gamma_levels,
                               bool* truncated = nullptr) {
  excitation.validate();
  seq.validate();
  if (gamma_levels.size() != (1u << seq.bits))
    throw ArgumentError("synth_passive: gamma_levels must have 2^bits entries");
  for (const auto& g : gamma_levels)
    if (std::abs(g) > Scalar(1) + Scalar(1e-12))
      throw ArgumentError("synth_passive: |gamma| must be <= 1 for passive loads");
  const Index n = std::min(excitation.samples.size(), seq.levels.size());
  if (truncated)
    *truncated = (excitation.samples.size() != seq.levels.size());
  IqBuffer<Scalar> out;
  out.sample_rate = excitation.sample_rate;
  out.center_freq = excitation.center_freq;
  out.samples.resize(n);
  for (Index i = 0; i < n; ++i)
    out.samples[i] = excitation.samples[i] * gamma_levels[seq.levels[i]];
  return out;
}

/// Switch-as-mixer active synthesis: the 1-bit sequence gates the local
/// oscillator toward the antenna. Amplitude is set by pll.power_dbm with
/// 0 dBm == unit full scale; output center_freq = pll.freq - if_offset.
template <typename Scalar>
IqBuffer<Scalar> synth_active(const PllState& pll, Scalar if_offset,
                              const SwitchSequence& seq, Scalar sample_rate) {
  if (!pll.settled)
    throw StateError("synth_active: PLL has not settled");
  if (seq.bits != 1)
    throw UnsupportedError("synth_active: gating sequence must be 1-bit");
  seq.validate();
  if (!(std::abs(if_offset) < sample_rate / Scalar(2)))
    throw ConfigError("synth_active: IF offset exceeds Nyquist");
  const Scalar amp = static_cast<Scalar>(dbm_to_amplitude(pll.power_dbm));
  const Scalar w = Scalar(2) * std::numbers::pi_v<Scalar> * if_offset / sample_rate;
  IqBuffer<Scalar> out;
  out.sample_rate = sample_rate;
  out.center_freq = Scalar(pll.freq) - if_offset;
  out.samples.resize(seq.levels.size());
  for (Index i = 0; i < seq.levels.size(); ++i) {
    if (seq.levels[i]) {
      const Scalar ph = w * Scalar(i);
      out.samples[i] = std::complex<Scalar>(amp * std::cos(ph), amp * std::sin(ph));
    } else {
      out.samples[i] = std::complex<Scalar>(0, 0);
    }
  }
  return out;
}

/// Optional first-order switch-edge shaping (default 30 ns rise time).
template <typename Scalar>
IqBuffer<Scalar> switch_transition_filter(const IqBuffer<Scalar>& in,
                                          Scalar rise_time = Scalar(30e-9)) {
  in.validate();
  const Scalar alpha = std::exp(-Scalar(1) / (rise_time * in.sample_rate));
  IqBuffer<Scalar> out = in;
  std::complex<Scalar> acc(0, 0);
  for (Index i = 0; i < in.samples.size(); ++i) {
    acc = alpha * acc + (Scalar(1) - alpha) * in.samples[i];
    out.samples[i] = acc;
  }
  return out;
}

/// Hold-upsample a switch sequence by an integer factor (alignment helper for
/// driving synth_passive from a slower sequence clock).
SwitchSequence seq_upsample_hold(const SwitchSequence& seq, int factor);

template <typename Scalar = double>
struct OokResult {
  Eigen::VectorXi bits;    ///< hard decisions
  VecX<Scalar> soft;       ///< integrator output minus threshold, per bit
  Scalar threshold = 0;    ///< decision threshold on the integrator outputs
  bool no_signal = false;  ///< dynamic range below the detection floor
};

/// Receiver front-end variant for ook_receive.
/// MatchedFilter: complex boxcar over one bit period before the envelope;
/// approaches the analytic noncoherent bound for rectangular OOK pulses.
/// EnvelopeFirst: envelope immediately, then RC smoothing and a per-bit mean
/// dump; required for waveforms with no DC content inside a bit (e.g.
/// OFDM-synthesized OOK, where a complex boxcar would integrate to zero).
enum class OokFrontEnd { MatchedFilter, EnvelopeFirst };

/// Non-coherent OOK receive chain. MatchedFilter: boxcar of one bit period ->
/// envelope -> RC integrate-and-dump per bit (single pole with time constant
/// rc_tau, reset at each bit boundary, dumped at bit end). EnvelopeFirst:
/// envelope -> continuous RC smoothing -> per-bit mean dump. Both threshold
/// at the midpoint of the 10th/90th percentile of the dumps.
template <typename Scalar>
OokResult<Scalar> ook_receive(const IqBuffer<Scalar>& rx, Scalar bit_rate,
                              Scalar rc_tau,
                              OokFrontEnd front_end = OokFrontEnd::MatchedFilter) {
  rx.validate();
  if (!(rx.sample_rate >= Scalar(8) * bit_rate))
    throw ConfigError("ook_receive: need sample_rate >= 8 x bit_rate");
  const Scalar bit_period = Scalar(1) / bit_rate;
  if (!(rc_tau > Scalar(0)) || !(rc_tau < bit_period))
    throw ArgumentError("ook_receive: rc_tau must lie in (0, bit period)");
  const Scalar sps = rx.sample_rate / bit_rate;
  const Index n_bits = static_cast<Index>(std::floor(
      static_cast<double>(rx.samples.size()) / static_cast<double>(sps)));
  if (n_bits < 2)
    throw ArgumentError("ook_receive: buffer shorter than 2 bits");

  const Scalar alpha = std::exp(-Scalar(1) / (rc_tau * rx.sample_rate));
  VecX<Scalar> dumps(n_bits);
  if (front_end == OokFrontEnd::MatchedFilter) {
    const Index mf_len = std::max<Index>(1, static_cast<Index>(std::llround(sps)));
    CVecX<Scalar> filtered = moving_average(rx.samples, mf_len);
    for (Index k = 0; k < n_bits; ++k) {
      const Index lo = static_cast<Index>(std::floor(Scalar(k) * sps));
      const Index hi = std::min<Index>(
          static_cast<Index>(std::floor(Scalar(k + 1) * sps)), filtered.size());
      Scalar acc = 0;
      for (Index n = lo; n < hi; ++n)
        acc = alpha * acc + (Scalar(1) - alpha) * std::abs(filtered[n]);
      dumps[k] = acc;
    }
  } else {
    VecX<Scalar> env = rx.samples.array().abs().matrix();
    VecX<Scalar> smooth = one_pole(env, alpha);
    for (Index k = 0; k < n_bits; ++k) {
      const Index lo = static_cast<Index>(std::floor(Scalar(k) * sps));
      const Index hi = std::min<Index>(
          static_cast<Index>(std::floor(Scalar(k + 1) * sps)), smooth.size());
      Scalar acc = 0;
      for (Index n = lo; n < hi; ++n) acc += smooth[n];
      dumps[k] = acc / Scalar(std::max<Index>(1, hi - lo));
    }
  }

  const Scalar p10 = percentile<Scalar>(dumps, Scalar(10));
  const Scalar p90 = percentile<Scalar>(dumps, Scalar(90));
  OokResult<Scalar> res;
  res.threshold = (p10 + p90) / Scalar(2);
  const Scalar floor_abs = Scalar(1e-12);
  const Scalar floor_rel = Scalar(0.05) * std::max(p90, Scalar(0));
  if (p90 - p10 < std::max(floor_abs, floor_rel)) {
    res.no_signal = true;
    return res;
  }
  res.bits.resize(n_bits);
  res.soft = dumps.array() - res.threshold;
  for (Index k = 0; k < n_bits; ++k) res.bits[k] = dumps[k] > res.threshold ? 1 : 0;
  return res;
}

/// Default post-envelope integrator time constant: one sixteenth of a bit.
inline double default_ook_rc_tau(double bit_rate) { return 1.0 / (16.0 * bit_rate); }

}  // namespace aiot
