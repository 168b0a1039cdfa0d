#pragma once

#include <unsupported/Eigen/FFT>

#include <cmath>
#include <complex>

#include "aiot/types.hpp"

namespace aiot {

/// Forward FFT of a complex vector.
template <typename Scalar>
CVecX<Scalar> fft(const CVecX<Scalar>& x) {
  Eigen::FFT<Scalar> f;
  CVecX<Scalar> out(x.size());
  f.fwd(out, x);
  return out;
}

/// Inverse FFT of a complex vector.
template <typename Scalar>
CVecX<Scalar> ifft(const CVecX<Scalar>& x) {
  Eigen::FFT<Scalar> f;
  CVecX<Scalar> out(x.size());
  f.inv(out, x);
  return out;
}

/// Index of the maximum-magnitude FFT bin.
template <typename Scalar>
Index fft_peak_bin(const CVecX<Scalar>& spectrum) {
  Index best = 0;
  Scalar best_mag = std::abs(spectrum[0]);
  for (Index i = 1; i < spectrum.size(); ++i) {
    const Scalar m = std::abs(spectrum[i]);
    if (m > best_mag) {
      best_mag = m;
      best = i;
    }
  }
  return best;
}

/// Frequency in Hz of an FFT bin index (wraps bins above N/2 to negative).
inline double fft_bin_freq(Index bin, Index n, double sample_rate) {
  const Index wrapped = (bin <= n / 2) ? bin : bin - n;
  return static_cast<double>(wrapped) * sample_rate / static_cast<double>(n);
}

/// Single-pole low-pass y[n] = alpha y[n-1] + (1-alpha) x[n] on a real vector.
template <typename Scalar>
VecX<Scalar> one_pole(const VecX<Scalar>& x, Scalar alpha, Scalar y0 = Scalar(0)) {
  VecX<Scalar> y(x.size());
  Scalar acc = y0;
  for (Index i = 0; i < x.size(); ++i) {
    acc = alpha * acc + (Scalar(1) - alpha) * x[i];
    y[i] = acc;
  }
  return y;
}

/// Causal moving average of length `len` over a complex vector (boxcar
/// matched filter for rectangular pulses).
template <typename Scalar>
CVecX<Scalar> moving_average(const CVecX<Scalar>& x, Index len) {
  CVecX<Scalar> y(x.size());
  std::complex<Scalar> acc(0, 0);
  for (Index i = 0; i < x.size(); ++i) {
    acc += x[i];
    if (i >= len) acc -= x[i - len];
    y[i] = acc / Scalar(std::min<Index>(i + 1, len));
  }
  return y;
}

/// p-th percentile (0..100) of a real vector, linear interpolation.
template <typename Scalar>
Scalar percentile(VecX<Scalar> v, Scalar p) {
  std::sort(v.begin(), v.end());
  if (v.size() == 1) return v[0];
  const Scalar pos = p / Scalar(100) * Scalar(v.size() - 1);
  const Index lo = static_cast<Index>(std::floor(pos));
  const Index hi = std::min<Index>(lo + 1, v.size() - 1);
  const Scalar w = pos - Scalar(lo);
  return v[lo] * (Scalar(1) - w) + v[hi] * w;
}

/// dBm <-> milliwatt helpers (power convention: |sample|^2 is in mW).
inline double dbm_to_mw(double dbm) { return std::pow(10.0, dbm / 10.0); }
inline double mw_to_dbm(double mw) { return 10.0 * std::log10(mw); }
/// dBm to amplitude (0 dBm -> unit amplitude).
inline double dbm_to_amplitude(double dbm) { return std::pow(10.0, dbm / 20.0); }

}  // namespace aiot
