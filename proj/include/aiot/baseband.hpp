#pragma once

#include <cmath>
#include <numbers>

#include "aiot/types.hpp"

namespace aiot {

namespace detail {

/// Raw polynomial evaluation without the index precondition; used internally
/// for symbol-boundary phase continuity where n == n_samples is needed.
template <typename Scalar>
Scalar phase_poly(const PhaseParams<Scalar>& p, Scalar n) {
  return Scalar(0.5) * p.a2 * n * n + p.a1 * n + p.a0;
}

template <typename Scalar>
Scalar frac_cycles(Scalar x) {
  return x - std::floor(x);
}

}  // namespace detail

/// Phase of the symbol at sample index n, in cycles (no modular reduction).
template <typename Scalar>
Scalar phase_at(const PhaseParams<Scalar>& params, Index n) {
  if (n < 0 || n >= params.n_samples)
    throw ArgumentError("phase_at: sample index out of range");
  return detail::phase_poly(params, Scalar(n));
}

/// Synthesizes cos(2 pi phase(n)) for n = 0 .. n_samples-1.
template <typename Scalar>
RealBaseband<Scalar> synth_baseband(const PhaseParams<Scalar>& params,
                                    Scalar sample_rate = Scalar(1)) {
  params.validate();
  const Index n = params.n_samples;
  ArrX<Scalar> idx = ArrX<Scalar>::LinSpaced(n, Scalar(0), Scalar(n - 1));
  ArrX<Scalar> phase =
      Scalar(0.5) * params.a2 * idx.square() + params.a1 * idx + params.a0;
  RealBaseband<Scalar> out;
  out.samples = (Scalar(2) * std::numbers::pi_v<Scalar> * phase).cos().matrix();
  out.sample_rate = sample_rate;
  return out;
}

/// Uniform mid-rise quantization of [-1, 1] into 2^bits levels:
/// level = floor((s + 1)/2 * 2^bits), clamped to [0, 2^bits - 1].
/// For bits == 1 this maps s >= 0 to 1 and s < 0 to 0.
template <typename Scalar>
SwitchSequence quantize(const RealBaseband<Scalar>& bb, int bits) {
  if (bits < 1) throw ArgumentError("quantize: bits must be >= 1");
  bb.validate();
  const long levels_count = 1L << bits;
  SwitchSequence seq;
  seq.bits = bits;
  seq.sample_rate = static_cast<double>(bb.sample_rate);
  seq.levels.resize(bb.samples.size());
  for (Index i = 0; i < bb.samples.size(); ++i) {
    const Scalar s = bb.samples[i];
    long level = static_cast<long>(
        std::floor((s + Scalar(1)) / Scalar(2) * Scalar(levels_count)));
    if (level < 0) level = 0;
    if (level > levels_count - 1) level = levels_count - 1;
    seq.levels[i] = static_cast<int>(level);
  }
  return seq;
}

/// Sample period of the shifting square wave, quantized to the nearest even
/// sample count (preserves the 50% duty cycle).
inline Index freq_shift_period(double sample_rate, double f_shift) {
  const Index half = static_cast<Index>(std::llround(sample_rate / (2.0 * f_shift)));
  return 2 * std::max<Index>(half, 1);
}

/// XOR frequency shifting for 1-bit sequences: out[n] = seq[n] XOR square(n),
/// square = 1 for the first half of each period, 0 for the second half.
inline SwitchSequence apply_freq_shift(const SwitchSequence& seq, double f_shift) {
  if (seq.bits != 1)
    throw UnsupportedError("apply_freq_shift: XOR shifting is defined for 1-bit sequences only");
  seq.validate();
  if (!(f_shift > 0.0) || !(f_shift < seq.sample_rate / 2.0))
    throw ArgumentError("apply_freq_shift: f_shift must lie in (0, sample_rate/2)");
  const Index period = freq_shift_period(seq.sample_rate, f_shift);
  SwitchSequence out = seq;
  for (Index i = 0; i < out.levels.size(); ++i) {
    const int sq = (i % period) < period / 2 ? 1 : 0;
    out.levels[i] = seq.levels[i] ^ sq;
  }
  return out;
}

/// PSK mapping: payload on a0, reduced mod 1.
template <typename Scalar>
PhaseParams<Scalar> params_for_psk(Scalar phase_cycles, Index n_samples) {
  return PhaseParams<Scalar>{Scalar(0), Scalar(0),
                             detail::frac_cycles(phase_cycles), n_samples};
}

/// FSK mapping: payload on a1 = f / fs; a0 left configurable.
template <typename Scalar>
PhaseParams<Scalar> params_for_fsk(Scalar f_hz, Scalar sample_rate, Index n_samples,
                                   Scalar a0 = Scalar(0)) {
  if (!(std::abs(f_hz) < sample_rate / Scalar(2)))
    throw ConfigError("params_for_fsk: |f| must be below sample_rate/2");
  PhaseParams<Scalar> p{Scalar(0), f_hz / sample_rate, a0, n_samples};
  p.validate();
  return p;
}

/// CSS mapping: chirp rate on a2 = k / fs^2, start frequency on a1; a0 fixed 0.
template <typename Scalar>
PhaseParams<Scalar> params_for_css(Scalar f0_hz, Scalar chirp_rate_hz_per_s,
                                   Scalar sample_rate, Index n_samples) {
  PhaseParams<Scalar> p{chirp_rate_hz_per_s / (sample_rate * sample_rate),
                        f0_hz / sample_rate, Scalar(0), n_samples};
  if (!(std::abs(p.a1) < Scalar(0.5)))
    throw ConfigError("params_for_css: start frequency exceeds Nyquist");
  const Scalar f_end = p.a2 * Scalar(n_samples - 1) + p.a1;
  if (!(std::abs(f_end) < Scalar(0.5)))
    throw ConfigError("params_for_css: end frequency exceeds Nyquist");
  return p;
}

}  // namespace aiot
