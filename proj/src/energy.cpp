#include "aiot/energy.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace aiot {
namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kC = 299792458.0;
constexpr double kConverterEfficiency = 0.93;

// Rectifier input->output curve, W. Knots are calibrated so that the two
// reference operating points ((36 dBm EIRP, 0.3 m) and (33 dBm, 0.1 m))
// come out at 3.472 mW and 5.208 mW after the 93% converter stage. Above
// the last knot the final segment's slope is extended.
constexpr double kRectIn[] = {0.0, 30.06e-3, 135.58e-3};
constexpr double kRectOut[] = {0.0, 3.7333e-3, 5.6003e-3};

double rectifier_output_w(double p_in_w) {
  if (p_in_w <= 0) return 0;
  constexpr int n = 3;
  for (int i = 1; i < n; ++i) {
    if (p_in_w <= kRectIn[i]) {
      double f = (p_in_w - kRectIn[i - 1]) / (kRectIn[i] - kRectIn[i - 1]);
      return kRectOut[i - 1] + f * (kRectOut[i] - kRectOut[i - 1]);
    }
  }
  double slope =
      (kRectOut[n - 1] - kRectOut[n - 2]) / (kRectIn[n - 1] - kRectIn[n - 2]);
  return kRectOut[n - 1] + slope * (p_in_w - kRectIn[n - 1]);
}

// Cell efficiency vs irradiance, linear through the two calibration anchors
// (164 W/m^2 office light, 524 W/m^2 bright panel), clamped at zero.
constexpr double kSolarIrr0 = 164, kSolarEff0 = 0.02054;
constexpr double kSolarIrr1 = 524, kSolarEff1 = 0.10602;

}  // namespace

EnergyState make_energy_state(double capacitance_f, double initial_voltage_v,
                              double v_activate, double v_cutoff) {
  EnergyState s;
  s.capacitance = capacitance_f;
  s.voltage = initial_voltage_v;
  s.v_activate = v_activate;
  s.v_cutoff = v_cutoff;
  s.validate();
  return s;
}

double rf_friis_input_power_w(const RfHarvest& src) {
  if (src.distance_m <= 0) throw ConfigError("RfHarvest: distance must be > 0");
  if (src.freq_hz <= 0) throw ConfigError("RfHarvest: frequency must be > 0");
  double eirp_w = std::pow(10.0, src.eirp_dbm / 10.0) * 1e-3;
  double lam = kC / src.freq_hz;
  double gain = lam / (4 * kPi * src.distance_m);
  return eirp_w * gain * gain;
}

double rf_harvest_power(const RfHarvest& src) {
  return kConverterEfficiency * rectifier_output_w(rf_friis_input_power_w(src));
}

double solar_cell_efficiency(double irradiance_w_m2) {
  double eff = kSolarEff0 + (irradiance_w_m2 - kSolarIrr0) *
                                (kSolarEff1 - kSolarEff0) /
                                (kSolarIrr1 - kSolarIrr0);
  return std::max(0.0, eff);
}

double solar_harvest_power(const SolarHarvest& src) {
  if (src.area_m2 <= 0) throw ConfigError("SolarHarvest: area must be > 0");
  if (src.irradiance_w_m2 < 0) throw ConfigError("SolarHarvest: negative irradiance");
  return kConverterEfficiency * solar_cell_efficiency(src.irradiance_w_m2) *
         src.irradiance_w_m2 * src.area_m2;
}

std::string harvest_calibration_report() {
  char buf[512];
  RfHarvest a;  // 36 dBm, 0.3 m
  RfHarvest b;
  b.eirp_dbm = 33;
  b.distance_m = 0.1;
  SolarHarvest s0;  // 164 W/m^2
  SolarHarvest s1;
  s1.irradiance_w_m2 = 524;
  // What a single constant efficiency fitted at the first anchor would
  // predict at the second one.
  double const_eff = solar_harvest_power(s0) / (s0.irradiance_w_m2 * s0.area_m2);
  double naive1 = const_eff * s1.irradiance_w_m2 * s1.area_m2;
  std::snprintf(buf, sizeof buf,
                "rf:  %.4g W in -> %.4g W ; %.4g W in -> %.4g W\n"
                "solar: %.4g W -> %.4g W ; %.4g W -> %.4g W "
                "(constant-eff would give %.4g W, %.0f%% low)\n",
                rf_friis_input_power_w(a), rf_harvest_power(a),
                rf_friis_input_power_w(b), rf_harvest_power(b),
                s0.irradiance_w_m2 * s0.area_m2, solar_harvest_power(s0),
                s1.irradiance_w_m2 * s1.area_m2, solar_harvest_power(s1), naive1,
                100.0 * (1 - naive1 / solar_harvest_power(s1)));
  return buf;
}

EnergyState step_energy(const EnergyState& state, double dt, double p_harvest,
                        double p_load) {
  if (dt <= 0) throw ArgumentError("step_energy: dt must be > 0");
  if (p_harvest < 0 || p_load < 0)
    throw ArgumentError("step_energy: negative power");
  state.validate();
  EnergyState next = state;
  double e = state.energy_j();
  e += (p_harvest - p_load) * dt;
  e -= state.voltage * state.leakage_a * dt;
  double e_max = 0.5 * state.capacitance * state.v_max * state.v_max;
  e = std::clamp(e, 0.0, e_max);
  next.voltage = std::sqrt(2 * e / state.capacitance);
  if (state.mode == EnergyMode::Running && next.voltage < state.v_cutoff)
    next.mode = EnergyMode::Harvesting;
  return next;
}

namespace {

struct TimelineBuilder {
  EnergyTimeline tl;
  double sample_every;
  double next_sample = 0;

  void sample(double t, const EnergyState& s) {
    if (t + 1e-12 >= next_sample) {
      tl.samples.push_back({t, s.voltage, s.mode});
      next_sample += sample_every;
    }
  }
  void event(double t, EnergyEvent::Kind k, double v) {
    tl.events.push_back({t, k, v});
  }
};

}  // namespace

EnergyTimeline run_duty_cycle_mode(const EnergyState& initial,
                                   const PowerProfile& profile,
                                   const DutySchedule& schedule, double horizon_s,
                                   const std::function<double(double)>& p_harvest,
                                   double task_power_w,
                                   double transition_latency_s, double dt,
                                   double sample_every_s) {
  initial.validate();
  profile.validate();
  if (schedule.period_s <= 0 || schedule.on_duration_s <= 0)
    throw ConfigError("DutySchedule: period and on_duration must be > 0");
  if (schedule.on_duration_s + transition_latency_s > schedule.period_s)
    throw ConfigError("DutySchedule: wake does not fit in the period");
  if (horizon_s <= 0) throw ArgumentError("horizon must be > 0");
  if (task_power_w <= 0) throw ArgumentError("task power must be > 0");

  TimelineBuilder b;
  b.sample_every = sample_every_s;
  b.tl.final_state = initial;
  EnergyState s = initial;
  s.mode = EnergyMode::Sleeping;

  double t = 0;
  double task_time = 0;
  long tick = 0;
  while (t < horizon_s - 1e-12) {
    double wake_at = tick * schedule.period_s;
    // Sleep until the next RTC tick (or the horizon).
    double sleep_until = std::min(wake_at, horizon_s);
    while (t < sleep_until - 1e-12) {
      double step = std::min(dt, sleep_until - t);
      s.mode = EnergyMode::Sleeping;
      s = step_energy(s, step, p_harvest(t), profile.p_sleep);
      t += step;
      b.sample(t, s);
    }
    if (t >= horizon_s - 1e-12) break;

    ++tick;
    ++b.tl.attempts;
    if (s.voltage < s.v_cutoff) {
      b.event(t, EnergyEvent::Kind::WakeSkipped, s.voltage);
      continue;
    }
    b.event(t, EnergyEvent::Kind::WakeStart, s.voltage);
    // Transition latency is paid at the task's power draw.
    double phases[2] = {transition_latency_s, schedule.on_duration_s};
    bool aborted = false;
    for (int ph = 0; ph < 2 && !aborted; ++ph) {
      double end = std::min(t + phases[ph], horizon_s);
      while (t < end - 1e-12) {
        double step = std::min(dt, end - t);
        s.mode = EnergyMode::Running;
        s = step_energy(s, step, p_harvest(t), task_power_w);
        if (ph == 1) task_time += step;
        t += step;
        b.sample(t, s);
        if (s.mode != EnergyMode::Running) {
          b.event(t, EnergyEvent::Kind::TaskAborted, s.voltage);
          aborted = true;
          break;
        }
      }
    }
    if (!aborted) {
      ++b.tl.successes;
      b.event(t, EnergyEvent::Kind::TaskEnd, s.voltage);
    }
    s.mode = EnergyMode::Sleeping;
  }

  b.tl.achieved_duty = task_time / horizon_s;
  b.tl.final_state = s;
  return b.tl;
}

EnergyTimeline run_exhaustion_mode(const EnergyState& initial,
                                   const PowerProfile& profile,
                                   double task_power_w, double horizon_s,
                                   const std::function<double(double)>& p_harvest,
                                   double dt, double sample_every_s) {
  initial.validate();
  profile.validate();
  if (horizon_s <= 0) throw ArgumentError("horizon must be > 0");
  if (task_power_w <= 0) throw ArgumentError("task power must be > 0");

  TimelineBuilder b;
  b.sample_every = sample_every_s;
  EnergyState s = initial;
  s.mode = EnergyMode::Harvesting;

  double t = 0;
  double run_time = 0;
  while (t < horizon_s - 1e-12) {
    double step = std::min(dt, horizon_s - t);
    if (s.mode != EnergyMode::Running && s.eligible()) {
      s.mode = EnergyMode::Running;
      b.event(t, EnergyEvent::Kind::RunStart, s.voltage);
    }
    bool was_running = s.mode == EnergyMode::Running;
    double p_load = was_running ? task_power_w : profile.p_sleep;
    s = step_energy(s, step, p_harvest(t), p_load);
    if (was_running) run_time += step;
    t += step;
    b.sample(t, s);
    if (was_running && s.mode != EnergyMode::Running)
      b.event(t, EnergyEvent::Kind::RunEnd, s.voltage);
  }

  b.tl.achieved_duty = run_time / horizon_s;
  b.tl.final_state = s;
  return b.tl;
}

}  // namespace aiot
