#include "aiot/io.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "aiot/errors.hpp"

namespace aiot {
namespace {

std::string trim(const std::string& s) {
  size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

}  // namespace

std::string fmt_g(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string csv_line(const std::vector<std::string>& cells) {
  std::string out;
  for (size_t i = 0; i < cells.size(); ++i) {
    if (i) out += ',';
    out += cells[i];
  }
  out += '\n';
  return out;
}

void text_write(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot open for writing: " + path);
  f.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!f) throw Error("write failed: " + path);
}

std::string text_read(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error("cannot open: " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void meta_write(const std::string& path,
                std::vector<std::pair<std::string, std::string>> kv) {
  std::sort(kv.begin(), kv.end());
  std::string out;
  for (const auto& [k, v] : kv) out += k + "=" + v + "\n";
  text_write(path, out);
}

void iq_write(const std::string& path, const IqBufferd& buf, double timestamp) {
  buf.validate();
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot open for writing: " + path);
  std::vector<float> interleaved(2 * static_cast<size_t>(buf.samples.size()));
  for (Index i = 0; i < buf.samples.size(); ++i) {
    interleaved[2 * i] = static_cast<float>(buf.samples[i].real());
    interleaved[2 * i + 1] = static_cast<float>(buf.samples[i].imag());
  }
  f.write(reinterpret_cast<const char*>(interleaved.data()),
          static_cast<std::streamsize>(interleaved.size() * sizeof(float)));
  if (!f) throw Error("write failed: " + path);
  meta_write(path + ".meta",
             {{"format", "cf32le"},
              {"sample_rate", fmt_g(buf.sample_rate)},
              {"center_freq", fmt_g(buf.center_freq)},
              {"samples", std::to_string(buf.samples.size())},
              {"timestamp", fmt_g(timestamp)}});
}

IqBufferd iq_read(const std::string& path) {
  std::string raw = text_read(path);
  if (raw.size() % sizeof(float) != 0)
    throw ParseError("IQ file size is not a multiple of 4 bytes: " + path, 0);
  size_t nfloats = raw.size() / sizeof(float);
  if (nfloats % 2 != 0)
    throw ParseError("IQ file holds an odd number of floats: " + path, 0);
  IqBufferd buf;
  buf.sample_rate = 0;  // unknown until the sidecar supplies it
  buf.samples.resize(static_cast<Index>(nfloats / 2));
  const float* p = reinterpret_cast<const float*>(raw.data());
  for (Index i = 0; i < buf.samples.size(); ++i)
    buf.samples[i] = std::complex<double>(p[2 * i], p[2 * i + 1]);

  std::ifstream probe(path + ".meta");
  if (probe) {
    ConfigFile meta = config_parse_file(path + ".meta");
    if (const ConfigSection* s = meta.find("")) {
      buf.sample_rate = s->get_double("sample_rate", 0);
      buf.center_freq = s->get_double("center_freq", 0);
    }
  }
  return buf;
}

const ConfigEntry* ConfigSection::find(const std::string& key) const {
  const ConfigEntry* hit = nullptr;
  for (const auto& [k, e] : entries)
    if (k == key) hit = &e;  // last one wins
  return hit;
}

double ConfigSection::get_double(const std::string& key, double fallback) const {
  const ConfigEntry* e = find(key);
  return e ? config_double(*e, key) : fallback;
}

long ConfigSection::get_long(const std::string& key, long fallback) const {
  const ConfigEntry* e = find(key);
  return e ? config_long(*e, key) : fallback;
}

std::string ConfigSection::get_string(const std::string& key,
                                      const std::string& fallback) const {
  const ConfigEntry* e = find(key);
  return e ? e->value : fallback;
}

const ConfigSection* ConfigFile::find(const std::string& name) const {
  for (const auto& s : sections)
    if (s.name == name) return &s;
  return nullptr;
}

ConfigFile config_parse_string(const std::string& text) {
  ConfigFile cfg;
  cfg.sections.push_back({"", 0, {}});
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#' || t[0] == ';') continue;
    if (t.front() == '[') {
      if (t.back() != ']')
        throw ParseError("unterminated section header", lineno);
      cfg.sections.push_back({trim(t.substr(1, t.size() - 2)), lineno, {}});
      continue;
    }
    size_t eq = t.find('=');
    if (eq == std::string::npos)
      throw ParseError("expected key = value, got '" + t + "'", lineno);
    std::string key = trim(t.substr(0, eq));
    std::string value = trim(t.substr(eq + 1));
    if (key.empty()) throw ParseError("empty key", lineno);
    cfg.sections.back().entries.emplace_back(key, ConfigEntry{value, lineno});
  }
  if (cfg.sections.front().entries.empty() && cfg.sections.size() > 1)
    cfg.sections.erase(cfg.sections.begin());
  return cfg;
}

ConfigFile config_parse_file(const std::string& path) {
  return config_parse_string(text_read(path));
}

double config_double(const ConfigEntry& e, const std::string& key) {
  char* end = nullptr;
  double v = std::strtod(e.value.c_str(), &end);
  if (end == e.value.c_str() || *end != '\0')
    throw ParseError("value of '" + key + "' is not a number: '" + e.value + "'",
                     e.line);
  return v;
}

long config_long(const ConfigEntry& e, const std::string& key) {
  char* end = nullptr;
  long v = std::strtol(e.value.c_str(), &end, 0);
  if (end == e.value.c_str() || *end != '\0')
    throw ParseError("value of '" + key + "' is not an integer: '" + e.value + "'",
                     e.line);
  return v;
}

namespace {

const char* mode_name(EnergyMode m) {
  switch (m) {
    case EnergyMode::Harvesting: return "harvesting";
    case EnergyMode::Running: return "running";
    case EnergyMode::Sleeping: return "sleeping";
  }
  return "?";
}

const char* event_name(EnergyEvent::Kind k) {
  switch (k) {
    case EnergyEvent::Kind::WakeStart: return "wake_start";
    case EnergyEvent::Kind::WakeSkipped: return "wake_skipped";
    case EnergyEvent::Kind::TaskEnd: return "task_end";
    case EnergyEvent::Kind::TaskAborted: return "task_aborted";
    case EnergyEvent::Kind::RunStart: return "run_start";
    case EnergyEvent::Kind::RunEnd: return "run_end";
  }
  return "?";
}

}  // namespace

std::string timeline_csv(const EnergyTimeline& tl) {
  std::string out = "time_s,voltage_v,mode,event\n";
  std::size_t si = 0, ei = 0;
  while (si < tl.samples.size() || ei < tl.events.size()) {
    const bool take_sample =
        ei >= tl.events.size() ||
        (si < tl.samples.size() && tl.samples[si].t <= tl.events[ei].t);
    if (take_sample) {
      const auto& s = tl.samples[si++];
      out += csv_line({fmt_g(s.t), fmt_g(s.voltage), mode_name(s.mode), ""});
    } else {
      const auto& e = tl.events[ei++];
      out += csv_line({fmt_g(e.t), fmt_g(e.voltage), "", event_name(e.kind)});
    }
  }
  return out;
}

double HarvestTrace::at(double time_s) const {
  if (t.empty()) return 0;
  auto it = std::upper_bound(t.begin(), t.end(), time_s);
  if (it == t.begin()) return p.front();
  return p[static_cast<std::size_t>(std::distance(t.begin(), it)) - 1];
}

HarvestTrace harvest_trace_read(const std::string& path) {
  std::istringstream in(text_read(path));
  HarvestTrace trace;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string s = trim(line);
    if (s.empty() || s[0] == '#') continue;
    size_t comma = s.find(',');
    if (comma == std::string::npos)
      throw ParseError("expected time_s,power_w", lineno);
    char* end = nullptr;
    const std::string a = trim(s.substr(0, comma));
    const std::string b = trim(s.substr(comma + 1));
    double tv = std::strtod(a.c_str(), &end);
    if (end == a.c_str() || *end != '\0') {
      if (lineno == 1) continue;  // header
      throw ParseError("bad time value '" + a + "'", lineno);
    }
    double pv = std::strtod(b.c_str(), &end);
    if (end == b.c_str() || *end != '\0')
      throw ParseError("bad power value '" + b + "'", lineno);
    if (pv < 0) throw ParseError("negative harvest power", lineno);
    if (!trace.t.empty() && tv < trace.t.back())
      throw ParseError("trace times must be non-decreasing", lineno);
    trace.t.push_back(tv);
    trace.p.push_back(pv);
  }
  if (trace.t.empty()) throw ParseError("empty harvest trace: " + path, 0);
  return trace;
}

void Scenario::validate() const {
  if (room_w_m <= 0 || room_h_m <= 0) throw ConfigError("Scenario: room must have positive size");
  if (duration_s <= 0) throw ConfigError("Scenario: duration must be > 0");
  if (beacon_interval_s <= 0) throw ConfigError("Scenario: beacon interval must be > 0");
  if (speed_mps <= 0) throw ConfigError("Scenario: speed must be > 0");
  if (devices.empty()) throw ConfigError("Scenario: no devices");
  channel.validate();
  for (const auto& d : devices) {
    d.energy.validate();
    d.profile.validate();
    if (d.x < 0 || d.x > room_w_m || d.y < 0 || d.y > room_h_m)
      throw ConfigError("Scenario: device '" + d.name + "' outside the room");
  }
}

Scenario default_scenario() {
  Scenario sc;
  sc.channel.ref_loss_db = 22;
  sc.channel.noise_density_w_hz = 1e-17;
  DeviceSpec dev;
  dev.x = 1.0;
  dev.y = 1.5;
  dev.energy.voltage = dev.energy.v_activate;
  sc.devices.push_back(dev);
  return sc;
}

namespace {

[[noreturn]] void unknown_key(const std::string& key, const std::string& section,
                              int line) {
  throw ParseError("unknown key '" + key + "' in [" + section + "]", line);
}

}  // namespace

Scenario scenario_parse(const ConfigFile& cfg) {
  Scenario sc = default_scenario();
  sc.devices.clear();
  for (const ConfigSection& s : cfg.sections) {
    if (s.name.empty() && s.entries.empty()) continue;
    if (s.name == "sim") {
      for (const auto& [key, e] : s.entries) {
        if (key == "duration_s") sc.duration_s = config_double(e, key);
        else if (key == "beacon_interval_s") sc.beacon_interval_s = config_double(e, key);
        else if (key == "rssi_threshold_dbm") sc.rssi_threshold_dbm = config_double(e, key);
        else if (key == "speed_mps") sc.speed_mps = config_double(e, key);
        else if (key == "room_w_m") sc.room_w_m = config_double(e, key);
        else if (key == "room_h_m") sc.room_h_m = config_double(e, key);
        else unknown_key(key, s.name, e.line);
      }
    } else if (s.name == "gateway") {
      for (const auto& [key, e] : s.entries) {
        if (key == "x") sc.gateway_x = config_double(e, key);
        else if (key == "y") sc.gateway_y = config_double(e, key);
        else if (key == "tx_power_dbm") sc.tx_power_dbm = config_double(e, key);
        else if (key == "active_tx_dbm") sc.active_tx_dbm = config_double(e, key);
        else unknown_key(key, s.name, e.line);
      }
    } else if (s.name == "channel") {
      for (const auto& [key, e] : s.entries) {
        if (key == "exponent") sc.channel.exponent = config_double(e, key);
        else if (key == "ref_loss_db") sc.channel.ref_loss_db = config_double(e, key);
        else if (key == "noise_density_w_hz") sc.channel.noise_density_w_hz = config_double(e, key);
        else if (key == "seed") sc.channel.rng_seed = static_cast<std::uint64_t>(config_long(e, key));
        else unknown_key(key, s.name, e.line);
      }
    } else if (s.name == "device" || s.name.rfind("device.", 0) == 0) {
      DeviceSpec dev;
      dev.name = s.name == "device" ? "dev" + std::to_string(sc.devices.size())
                                    : s.name.substr(7);
      dev.energy.voltage = dev.energy.v_activate;
      for (const auto& [key, e] : s.entries) {
        if (key == "x") dev.x = config_double(e, key);
        else if (key == "y") dev.y = config_double(e, key);
        else if (key == "capacitance_f") dev.energy.capacitance = config_double(e, key);
        else if (key == "initial_voltage_v") dev.energy.voltage = config_double(e, key);
        else if (key == "v_activate") {
          dev.energy.v_activate = config_double(e, key);
          dev.registers.v_activate = dev.energy.v_activate;
        } else if (key == "v_cutoff") {
          dev.energy.v_cutoff = config_double(e, key);
          dev.registers.v_cutoff = dev.energy.v_cutoff;
        } else if (key == "device_id") {
          long id = config_long(e, key);
          if (id < 0 || id > 255) throw ParseError("device_id out of [0,255]", e.line);
          dev.registers.device_id = static_cast<std::uint8_t>(id);
        } else if (key == "profile") {
          if (e.value == "prototype") dev.profile.kind = PowerProfile::Kind::Prototype;
          else if (e.value == "asic") dev.profile.kind = PowerProfile::Kind::Asic;
          else throw ParseError("profile must be 'prototype' or 'asic'", e.line);
        } else {
          unknown_key(key, s.name, e.line);
        }
      }
      sc.devices.push_back(dev);
    } else {
      throw ParseError("unknown section '[" + s.name + "]'", s.line);
    }
  }
  if (sc.devices.empty()) sc.devices = default_scenario().devices;
  sc.validate();
  return sc;
}

}  // namespace aiot
