#pragma once

#include <Eigen/Dense>

#include <complex>
#include <string>

#include "aiot/errors.hpp"

namespace aiot {

template <typename Scalar>
using VecX = Eigen::Vector<Scalar, Eigen::Dynamic>;
template <typename Scalar>
using ArrX = Eigen::Array<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using CVecX = Eigen::Vector<std::complex<Scalar>, Eigen::Dynamic>;
template <typename Scalar>
using CArrX = Eigen::Array<std::complex<Scalar>, Eigen::Dynamic, 1>;

using Index = Eigen::Index;

using VecXd = VecX<double>;
using ArrXd = ArrX<double>;
using CVecXd = CVecX<double>;

/// Four-parameter symbol descriptor driving all modulation.
/// Phase trajectory in cycles: phase(n) = 0.5*a2*n^2 + a1*n + a0.
template <typename Scalar = double>
struct PhaseParams {
  Scalar a2 = 0;        ///< chirp rate, cycles/sample^2
  Scalar a1 = 0;        ///< frequency, cycles/sample
  Scalar a0 = 0;        ///< phase offset, cycles (phase / 2 pi)
  Index n_samples = 1;  ///< samples per symbol

  /// Checks the structural invariants; throws ConfigError on violation.
  void validate() const {
    if (n_samples < 1) throw ConfigError("PhaseParams: n_samples must be >= 1");
    if (!(std::abs(a1) < Scalar(0.5)))
      throw ConfigError("PhaseParams: |a1| must be < 0.5 (Nyquist at n=0)");
    const Scalar f_end = a2 * Scalar(n_samples - 1) + a1;
    if (!(std::abs(f_end) < Scalar(0.5)))
      throw ConfigError(
          "PhaseParams: instantaneous frequency exceeds Nyquist over the symbol");
  }
};

using PhaseParamsd = PhaseParams<double>;

/// Quantized per-sample switch-state stream.
struct SwitchSequence {
  Eigen::VectorXi levels;    ///< each in [0, 2^bits - 1]
  int bits = 1;              ///< quantizer width, >= 1
  double sample_rate = 1.0;  ///< Hz

  void validate() const {
    if (bits < 1) throw ConfigError("SwitchSequence: bits must be >= 1");
    if (levels.size() == 0) throw ConfigError("SwitchSequence: empty sequence");
    if (sample_rate <= 0) throw ConfigError("SwitchSequence: sample_rate must be > 0");
    const int max_level = (bits >= 31) ? INT32_MAX : ((1 << bits) - 1);
    for (Index i = 0; i < levels.size(); ++i) {
      if (levels[i] < 0 || levels[i] > max_level)
        throw ConfigError("SwitchSequence: level out of range at index " +
                          std::to_string(i));
    }
  }
};

/// Real-valued baseband samples, bounded to [-1, 1].
template <typename Scalar = double>
struct RealBaseband {
  VecX<Scalar> samples;
  Scalar sample_rate = 1;

  void validate() const {
    if (samples.size() == 0) throw ConfigError("RealBaseband: empty buffer");
    if ((samples.array().abs() > Scalar(1) + Scalar(1e-12)).any())
      throw ConfigError("RealBaseband: sample outside [-1, 1]");
  }
};

using RealBasebandd = RealBaseband<double>;

/// Complex-baseband sample vector with rate metadata; the universal signal
/// currency. Amplitude convention: |sample|^2 == 1 corresponds to 0 dBm.
template <typename Scalar = double>
struct IqBuffer {
  CVecX<Scalar> samples;
  Scalar sample_rate = 1;   ///< Hz
  Scalar center_freq = 0;   ///< Hz, RF frequency this baseband references

  void validate() const {
    if (sample_rate <= 0) throw ConfigError("IqBuffer: sample_rate must be > 0");
    if (samples.size() == 0) throw ConfigError("IqBuffer: empty buffer");
  }
};

using IqBufferd = IqBuffer<double>;

}  // namespace aiot
