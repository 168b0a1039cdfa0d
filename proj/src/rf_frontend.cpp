#include "aiot/rf_frontend.hpp"

namespace aiot {

std::complex<double> reflection_coefficient(const Impedance& imp) {
  if (imp.z0 <= 0) throw ConfigError("reflection_coefficient: z0 must be positive real");
  if (std::isinf(imp.z.real()) || std::isinf(imp.z.imag()))
    return {1.0, 0.0};
  const std::complex<double> denom = imp.z + imp.z0;
  if (std::abs(denom) == 0.0)
    throw SingularityError("reflection_coefficient: z == -z0");
  return (imp.z - imp.z0) / denom;
}

SwitchTopology configure_topology(RadioMode mode) {
  SwitchTopology t;
  t.mode = mode;
  if (mode == RadioMode::Passive) {
    t.mode_switch_route = ModeSwitchRoute::FiftyOhm;
    t.data_switch_route = {DataSwitchRoute::FiftyOhm, DataSwitchRoute::Antenna};
    t.gamma = {std::complex<double>(0, 0), std::complex<double>(1, 0)};
  } else {
    t.mode_switch_route = ModeSwitchRoute::Pll;
    t.data_switch_route = {DataSwitchRoute::FiftyOhm, DataSwitchRoute::Antenna};
    t.gamma = {std::complex<double>(0, 0), std::complex<double>(0, 0)};
  }
  return t;
}

PllState pll_tune(double target_freq_hz, double target_power_dbm) {
  if (target_freq_hz < kPllMinHz || target_freq_hz > kPllMaxHz)
    throw RangeError("pll_tune: frequency outside [54 MHz, 6.8 GHz]");
  PllState s;
  s.freq = target_freq_hz;
  s.power_dbm = target_power_dbm;
  s.settled = false;
  s.settle_time = kPllSettleSeconds;
  s.elapsed = 0;
  return s;
}

void pll_advance(PllState& state, double dt_seconds) {
  if (dt_seconds < 0) throw ArgumentError("pll_advance: negative time step");
  state.elapsed += dt_seconds;
  if (state.elapsed >= state.settle_time) state.settled = true;
}

SwitchSequence seq_upsample_hold(const SwitchSequence& seq, int factor) {
  if (factor < 1) throw ArgumentError("seq_upsample_hold: factor must be >= 1");
  seq.validate();
  SwitchSequence out;
  out.bits = seq.bits;
  out.sample_rate = seq.sample_rate * factor;
  out.levels.resize(seq.levels.size() * factor);
  for (Index i = 0; i < seq.levels.size(); ++i)
    for (int j = 0; j < factor; ++j) out.levels[i * factor + j] = seq.levels[i];
  return out;
}

}  // namespace aiot
