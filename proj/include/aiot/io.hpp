#pragma once

#include <string>
#include <utility>
#include <vector>

#include "aiot/channel.hpp"
#include "aiot/control_plane.hpp"
#include "aiot/energy.hpp"
#include "aiot/types.hpp"

namespace aiot {

/// Writes interleaved float32 little-endian I/Q plus a `<path>.meta` sidecar
/// (sample_rate, center_freq, samples, timestamp). `timestamp` is simulated
/// seconds, so identical runs produce identical bytes.
void iq_write(const std::string& path, const IqBufferd& buf, double timestamp = 0);

/// Reads I/Q written by iq_write. Without a sidecar the sample rate comes in
/// as 0 and the caller must supply one. An odd float count is a ParseError.
IqBufferd iq_read(const std::string& path);

/// %.10g, the library-wide text format for floating point output.
std::string fmt_g(double v);

/// One CSV line from preformatted cells.
std::string csv_line(const std::vector<std::string>& cells);

void text_write(const std::string& path, const std::string& content);
std::string text_read(const std::string& path);

/// Deterministic run manifest: one key=value per line, sorted by key.
void meta_write(const std::string& path,
                std::vector<std::pair<std::string, std::string>> kv);

struct ConfigEntry {
  std::string value;
  int line = 0;
};

struct ConfigSection {
  std::string name;
  int line = 0;
  std::vector<std::pair<std::string, ConfigEntry>> entries;

  const ConfigEntry* find(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  long get_long(const std::string& key, long fallback) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
};

/// INI-style config: [section] headers, key = value pairs, # or ; comments.
/// Repeated sections are kept in order (used for multiple devices).
struct ConfigFile {
  std::vector<ConfigSection> sections;
  const ConfigSection* find(const std::string& name) const;
};

ConfigFile config_parse_string(const std::string& text);
ConfigFile config_parse_file(const std::string& path);

double config_double(const ConfigEntry& e, const std::string& key);
long config_long(const ConfigEntry& e, const std::string& key);

/// Energy timeline as CSV rows (time_s, voltage_v, mode, event).
std::string timeline_csv(const EnergyTimeline& tl);

/// Sampled harvest power trace, usable as a harvest source via at().
struct HarvestTrace {
  std::vector<double> t;
  std::vector<double> p;

  /// Sample-and-hold lookup (first value before the trace starts).
  double at(double time_s) const;
};

/// Reads a (time_s, power_w) CSV, optional header line.
HarvestTrace harvest_trace_read(const std::string& path);

struct DeviceSpec {
  std::string name = "dev0";
  double x = 0, y = 0;
  RegisterBank registers;
  EnergyState energy;
  PowerProfile profile;
};

/// Room-scale scenario for the policy demo.
struct Scenario {
  double room_w_m = 3, room_h_m = 3;
  double gateway_x = 1.5, gateway_y = 1.5;
  double tx_power_dbm = 15;     ///< gateway carrier / excitation power
  double active_tx_dbm = 0;     ///< device transmit power in active mode
  double duration_s = 60;
  double beacon_interval_s = 0.1;
  double rssi_threshold_dbm = -35;  ///< gateway-side backscatter RSSI gate
  double speed_mps = 0.5;
  ChannelModel channel;
  std::vector<DeviceSpec> devices;

  void validate() const;
};

Scenario default_scenario();

/// Builds a Scenario from a parsed config. Every key is checked; an unknown
/// key or section raises ParseError naming it and its line.
Scenario scenario_parse(const ConfigFile& cfg);

}  // namespace aiot
