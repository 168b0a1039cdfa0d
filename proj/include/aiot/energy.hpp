#pragma once

#include <functional>
#include <string>
#include <vector>

#include "aiot/errors.hpp"

namespace aiot {

/// Per-mode power draw. Defaults are the discrete-prototype figures; the ASIC
/// pair is carried alongside for comparison runs.
struct PowerProfile {
  double p_passive = 24.8e-3;    ///< W
  double p_active = 249e-3;      ///< W
  double p_sleep = 18e-6;        ///< W
  double asic_passive = 61.18e-6;
  double asic_active = 17.2e-3;
  enum class Kind { Prototype, Asic } kind = Kind::Prototype;

  void validate() const {
    if (p_sleep <= 0 || p_passive <= 0 || p_active <= 0 || asic_passive <= 0 ||
        asic_active <= 0)
      throw ConfigError("PowerProfile: powers must be positive");
    if (!(p_sleep < p_passive && p_passive < p_active))
      throw ConfigError("PowerProfile: require sleep < passive < active");
  }

  double passive() const { return kind == Kind::Asic ? asic_passive : p_passive; }
  double active() const { return kind == Kind::Asic ? asic_active : p_active; }
};

enum class EnergyMode { Harvesting, Running, Sleeping };

/// Capacitor storage with PMIC hysteresis thresholds.
struct EnergyState {
  double capacitance = 0.09;  ///< F
  double voltage = 0;         ///< V
  double v_activate = 3.3;    ///< V, run threshold
  double v_cutoff = 2.0;      ///< V, stop threshold
  double v_max = 5.5;         ///< V, storage rating
  double leakage_a = 3e-6;    ///< constant-current leakage
  EnergyMode mode = EnergyMode::Harvesting;

  void validate() const {
    if (capacitance <= 0) throw ConfigError("EnergyState: capacitance must be > 0");
    if (!(v_cutoff < v_activate)) throw ConfigError("EnergyState: need v_cutoff < v_activate");
    if (voltage < 0 || voltage > v_max) throw ConfigError("EnergyState: voltage outside [0, v_max]");
    if (v_activate > v_max) throw ConfigError("EnergyState: v_activate above v_max");
    if (leakage_a < 0) throw ConfigError("EnergyState: negative leakage");
  }

  double energy_j() const { return 0.5 * capacitance * voltage * voltage; }
  bool eligible() const { return voltage >= v_activate; }
};

EnergyState make_energy_state(double capacitance_f, double initial_voltage_v,
                              double v_activate = 3.3, double v_cutoff = 2.0);

/// RF harvesting operating point (EIRP source, isotropic receive antenna).
struct RfHarvest {
  double eirp_dbm = 36;
  double distance_m = 0.3;
  double freq_hz = 915e6;
};

/// Solar harvesting operating point; default panel 53 mm x 30 mm.
struct SolarHarvest {
  double irradiance_w_m2 = 164;
  double area_m2 = 0.053 * 0.030;
};

/// Friis received power at the rectifier input, W (pre-efficiency).
double rf_friis_input_power_w(const RfHarvest& src);

/// Harvested power after the calibrated piecewise-linear rectifier curve and
/// the 93% converter factor.
double rf_harvest_power(const RfHarvest& src);

/// Harvested power with the irradiance-calibrated cell efficiency and the
/// 93% converter factor.
double solar_harvest_power(const SolarHarvest& src);

/// Cell efficiency at a given irradiance (pre-converter).
double solar_cell_efficiency(double irradiance_w_m2);

/// Calibration summary, including the residual a constant efficiency would
/// leave at the second solar anchor.
std::string harvest_calibration_report();

/// Fixed-step energy bookkeeping: E' = clamp(E + (p_harvest - p_load) dt
/// - V I_leak dt, 0, Emax); Running drops to Harvesting below v_cutoff.
EnergyState step_energy(const EnergyState& state, double dt, double p_harvest,
                        double p_load);

struct EnergyEvent {
  double t = 0;
  enum class Kind {
    WakeStart,
    WakeSkipped,
    TaskEnd,
    TaskAborted,
    RunStart,
    RunEnd,
  } kind = Kind::WakeStart;
  double voltage = 0;
};

struct TimelineSample {
  double t = 0;
  double voltage = 0;
  EnergyMode mode = EnergyMode::Harvesting;
};

struct EnergyTimeline {
  std::vector<EnergyEvent> events;
  std::vector<TimelineSample> samples;  ///< decimated (t, V, mode) trace
  double achieved_duty = 0;             ///< task/run time over the horizon
  long attempts = 0;
  long successes = 0;
  EnergyState final_state;
};

struct DutySchedule {
  double period_s = 1.0;
  double on_duration_s = 0.1;
};

/// RTC-driven sleep-wake operation. Each wake pays the transition latency at
/// task power, runs the task, then sleeps; the wake is skipped (and logged)
/// if V < v_cutoff at the tick. `achieved_duty` counts task time only.
EnergyTimeline run_duty_cycle_mode(const EnergyState& initial,
                                   const PowerProfile& profile,
                                   const DutySchedule& schedule, double horizon_s,
                                   const std::function<double(double)>& p_harvest,
                                   double task_power_w,
                                   double transition_latency_s = 0.0588,
                                   double dt = 1e-3,
                                   double sample_every_s = 0.1);

/// Run-until-depleted operation gated by the voltage hysteresis: charge at
/// p_sleep until v_activate, run at task power until v_cutoff, repeat.
EnergyTimeline run_exhaustion_mode(const EnergyState& initial,
                                   const PowerProfile& profile,
                                   double task_power_w, double horizon_s,
                                   const std::function<double(double)>& p_harvest,
                                   double dt = 1e-3,
                                   double sample_every_s = 0.1);

inline std::function<double(double)> constant_harvest(double watts) {
  return [watts](double) { return watts; };
}

}  // namespace aiot
