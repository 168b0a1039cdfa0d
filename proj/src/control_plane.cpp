#include "aiot/control_plane.hpp"

#include <algorithm>
#include <cmath>

#include "aiot/rf_frontend.hpp"

namespace aiot {

TypeLengthTable default_type_length_table() {
  return {
      {kFrameTypeSamplingRate, 32},
      {kFrameTypeSampleCount, 16},
      {kFrameTypeSymbolDuration, 32},
      {kFrameTypePayload, 128},
  };
}

BitVec frame_encode(const InteractionFrame& frame) {
  frame.validate();
  BitVec bits;
  bits.reserve(kFrameHeaderBits + frame.data.size());
  append_uint_msb_first(bits, kFramePreamble, kFramePreambleBits);
  append_byte_msb_first(bits, frame.id);
  append_byte_msb_first(bits, frame.type_field);
  bits.insert(bits.end(), frame.data.begin(), frame.data.end());
  return bits;
}

FrameDecodeResult frame_decode(const BitVec& stream, const TypeLengthTable& table,
                               int expected_id) {
  FrameDecodeResult res;
  const Index n = static_cast<Index>(stream.size());
  Index gap_start = 0;
  Index i = 0;
  while (i + kFrameHeaderBits <= n) {
    const std::uint32_t window =
        static_cast<std::uint32_t>(read_uint_msb_first(stream, i, kFramePreambleBits));
    if (window != kFramePreamble) {
      ++i;
      continue;
    }
    const std::uint8_t id = static_cast<std::uint8_t>(
        read_uint_msb_first(stream, i + kFramePreambleBits, 8));
    const std::uint8_t type = static_cast<std::uint8_t>(
        read_uint_msb_first(stream, i + kFramePreambleBits + 8, 8));
    const auto it = table.find(type);
    if (it == table.end()) {
      res.invalid.push_back(i);
      ++i;
      continue;
    }
    const Index data_len = it->second;
    if (i + kFrameHeaderBits + data_len > n) break;  // truncated tail stays a gap
    if (expected_id >= 0 && id != static_cast<std::uint8_t>(expected_id)) {
      ++res.dropped_id_mismatch;
      i += kFrameHeaderBits + data_len;
      gap_start = i;
      continue;
    }
    if (i > gap_start) res.gaps.emplace_back(gap_start, i);
    DecodedFrame df;
    df.start = i;
    df.frame.id = id;
    df.frame.type_field = type;
    df.frame.data.assign(stream.begin() + i + kFrameHeaderBits,
                         stream.begin() + i + kFrameHeaderBits + data_len);
    res.frames.push_back(std::move(df));
    i += kFrameHeaderBits + data_len;
    gap_start = i;
  }
  if (gap_start < n) res.gaps.emplace_back(gap_start, n);
  return res;
}

WireTransferResult wire_transfer(const BitVec& bits, WireDirection direction,
                                 double clock_period, double jitter) {
  if (clock_period <= 0) throw ArgumentError("wire_transfer: clock period must be > 0");
  if (jitter < 0) throw ArgumentError("wire_transfer: negative jitter");
  WireTransferResult res;
  res.master = direction;
  const Index n = static_cast<Index>(bits.size());
  res.trace.reserve(2 * n + 1);
  for (Index k = 0; k < n; ++k) {
    const double t0 = static_cast<double>(k) * clock_period;
    res.trace.push_back({t0, 0, bits[k], 1});
    res.trace.push_back({t0 + clock_period / 2, 1, bits[k], 1});
  }
  res.trace.push_back({static_cast<double>(n) * clock_period, 0, 0, 0});

  res.received.reserve(n);
  for (Index k = 0; k < n; ++k) {
    const double sample_t =
        static_cast<double>(k) * clock_period + clock_period / 2 + jitter;
    Index src = static_cast<Index>(std::floor(sample_t / clock_period));
    if (src != k) ++res.violations;
    if (src >= n) src = n - 1;
    res.received.push_back(bits[src]);
  }
  return res;
}

void RegisterBank::validate() const {
  if (mode == DeviceMode::Active) {
    if (freq_hz < kPllMinHz || freq_hz > kPllMaxHz)
      throw ConfigError("register freq: active mode requires a PLL-range frequency");
  }
  if (power_dbm < -40.0 || power_dbm > 20.0)
    throw ConfigError("register power_dbm: outside [-40, 20] dBm");
  if (phy.protocol == Protocol::Amp80211 && phy.data_rate == 4e6 &&
      mode != DeviceMode::Active)
    throw ConfigError("register data_rate: 4 Mbps requires active mode");
  if (!(v_cutoff < v_activate))
    throw ConfigError("register v_cutoff: must stay below v_activate");
  phy.validate();
  if (phy.protocol == Protocol::BleAdv && channel != 0 && channel != phy.channel)
    throw ConfigError("register channel: conflicts with phy channel");
}

namespace {

bool parse_bool(const std::string& v, bool& out) {
  if (v == "true" || v == "1" || v == "on") { out = true; return true; }
  if (v == "false" || v == "0" || v == "off") { out = false; return true; }
  return false;
}

bool parse_double(const std::string& v, double& out) {
  try {
    std::size_t pos = 0;
    out = std::stod(v, &pos);
    return pos == v.size();
  } catch (...) {
    return false;
  }
}

}  // namespace

RegisterSetResult registers_set(const RegisterBank& bank, const std::string& key,
                                const std::string& value) {
  RegisterBank next = bank;
  auto fail = [&](const std::string& msg) {
    return RegisterSetResult{bank, false, msg};
  };

  double num = 0;
  if (key == "mode") {
    if (value == "passive") next.mode = DeviceMode::Passive;
    else if (value == "active") next.mode = DeviceMode::Active;
    else if (value == "sleep") next.mode = DeviceMode::Sleep;
    else return fail("mode: expected passive|active|sleep");
  } else if (key == "freq_hz") {
    if (!parse_double(value, num)) return fail("freq_hz: not a number");
    next.freq_hz = num;
  } else if (key == "power_dbm") {
    if (!parse_double(value, num)) return fail("power_dbm: not a number");
    next.power_dbm = num;
  } else if (key == "payload_id") {
    next.payload_id = value;
  } else if (key == "channel") {
    if (!parse_double(value, num)) return fail("channel: not a number");
    next.channel = static_cast<int>(num);
    if (next.phy.protocol == Protocol::BleAdv) next.phy.channel = next.channel;
  } else if (key == "sensor_enable") {
    bool b;
    if (!parse_bool(value, b)) return fail("sensor_enable: expected boolean");
    next.sensor_enable = b;
  } else if (key == "device_id") {
    if (!parse_double(value, num) || num < 0 || num > 255)
      return fail("device_id: expected 0..255");
    next.device_id = static_cast<std::uint8_t>(num);
  } else if (key == "protocol") {
    if (value == "amp80211") next.phy.protocol = Protocol::Amp80211;
    else if (value == "aiot3gpp") next.phy.protocol = Protocol::Aiot3gpp;
    else if (value == "bleadv") next.phy.protocol = Protocol::BleAdv;
    else if (value == "css") next.phy.protocol = Protocol::Css;
    else return fail("protocol: expected amp80211|aiot3gpp|bleadv|css");
    if (next.phy.protocol == Protocol::BleAdv) {
      next.phy.data_rate = 1e6;
      if (next.channel != 0) next.phy.channel = next.channel;
      else { next.channel = 37; next.phy.channel = 37; }
    }
  } else if (key == "data_rate") {
    if (!parse_double(value, num)) return fail("data_rate: not a number");
    next.phy.data_rate = num;
  } else if (key == "modulation") {
    if (value == "ook") next.phy.modulation = Modulation::Ook;
    else if (value == "bpsk") next.phy.modulation = Modulation::Bpsk;
    else if (value == "msk") next.phy.modulation = Modulation::Msk;
    else if (value == "fsk") next.phy.modulation = Modulation::Fsk;
    else if (value == "css") next.phy.modulation = Modulation::Css;
    else return fail("modulation: expected ook|bpsk|msk|fsk|css");
  } else if (key == "samples_per_symbol") {
    if (!parse_double(value, num) || num < 1)
      return fail("samples_per_symbol: expected integer >= 1");
    next.phy.samples_per_symbol = static_cast<int>(num);
  } else if (key == "band_hz") {
    if (!parse_double(value, num)) return fail("band_hz: not a number");
    next.phy.band_hz = num;
  } else if (key == "v_activate") {
    if (!parse_double(value, num)) return fail("v_activate: not a number");
    next.v_activate = num;
  } else if (key == "v_cutoff") {
    if (!parse_double(value, num)) return fail("v_cutoff: not a number");
    next.v_cutoff = num;
  } else {
    return fail("unknown register '" + key + "'");
  }

  try {
    next.validate();
  } catch (const ConfigError& e) {
    return fail(e.what());
  }
  return RegisterSetResult{next, true, ""};
}

namespace {

InteractionFrame make_frame(std::uint8_t id, std::uint8_t type, std::uint64_t value,
                            int bits) {
  InteractionFrame f;
  f.id = id;
  f.type_field = type;
  append_uint_msb_first(f.data, value, bits);
  return f;
}

}  // namespace

std::vector<Command> interpret(const RegisterBank& bank) {
  try {
    bank.validate();
  } catch (const ConfigError& e) {
    throw InterpretError(e.what());
  }
  std::vector<Command> cmds;
  if (bank.mode == DeviceMode::Sleep) {
    cmds.push_back({Command::Kind::DisablePowerDomain, "pll", 0, {}});
    cmds.push_back({Command::Kind::DisablePowerDomain, "fpga", 0, {}});
    return cmds;
  }

  cmds.push_back({Command::Kind::EnablePowerDomain, "mcu", 0, {}});
  cmds.push_back({Command::Kind::EnablePowerDomain, "fpga", 0, {}});
  if (bank.mode == DeviceMode::Active) {
    if (bank.freq_hz <= 0)
      throw InterpretError("interpret: register freq is required in active mode");
    cmds.push_back({Command::Kind::EnablePowerDomain, "pll", 0, {}});
    cmds.push_back({Command::Kind::PllTune, "", bank.freq_hz, {}});
  }
  cmds.push_back({Command::Kind::ConfigureTopology,
                  bank.mode == DeviceMode::Active ? "active" : "passive", 0, {}});

  const double fs = bank.phy.sample_rate();
  const double symbol_ns = 1e9 * bank.phy.samples_per_symbol / fs;
  if (symbol_ns < 1.0)
    throw InterpretError("interpret: register data_rate yields sub-ns symbols");
  Command c;
  c.kind = Command::Kind::PhyFrame;
  c.frame = make_frame(bank.device_id, kFrameTypeSamplingRate,
                       static_cast<std::uint64_t>(std::llround(fs)), 32);
  cmds.push_back(c);
  c.frame = make_frame(bank.device_id, kFrameTypeSampleCount,
                       static_cast<std::uint64_t>(bank.phy.samples_per_symbol), 16);
  cmds.push_back(c);
  c.frame = make_frame(bank.device_id, kFrameTypeSymbolDuration,
                       static_cast<std::uint64_t>(std::llround(symbol_ns)), 32);
  cmds.push_back(c);

  Command payload;
  payload.kind = Command::Kind::PayloadFrame;
  payload.frame.id = bank.device_id;
  payload.frame.type_field = kFrameTypePayload;
  for (int i = 0; i < 16; ++i) {
    const std::uint8_t b =
        i < static_cast<int>(bank.payload_id.size())
            ? static_cast<std::uint8_t>(bank.payload_id[i])
            : 0;
    append_byte_msb_first(payload.frame.data, b);
  }
  cmds.push_back(payload);
  return cmds;
}

void apply_commands(SimHardware& hw, const std::vector<Command>& cmds) {
  for (const auto& c : cmds) {
    switch (c.kind) {
      case Command::Kind::EnablePowerDomain: hw.domains.insert(c.arg); break;
      case Command::Kind::DisablePowerDomain: hw.domains.erase(c.arg); break;
      case Command::Kind::PllTune: hw.pll_freq = c.value; break;
      case Command::Kind::ConfigureTopology: hw.topology = c.arg; break;
      case Command::Kind::PhyFrame:
      case Command::Kind::PayloadFrame:
        hw.frames[c.frame.type_field] = c.frame.data;
        break;
    }
  }
}

long transition_latency_us(RadioOpState from, RadioOpState to,
                           const LatencyTable& table) {
  if (from == to || to == RadioOpState::Sleep) return 0;
  if (from == RadioOpState::Sleep) {
    long total = table.mcu_wake_us + table.regulators_us + table.fpga_init_us;
    if (to == RadioOpState::ActiveOp) total += table.pll_settle_us;
    return total;
  }
  if (from == RadioOpState::PassiveOp && to == RadioOpState::ActiveOp)
    return table.pll_settle_us;
  return 0;  // ActiveOp -> PassiveOp: PLL release is immediate
}

RadioState transition(const RadioState& state, RadioOpState target,
                      const LatencyTable& table) {
  RadioState next = state;
  next.target = target;
  next.pending_latency_s =
      static_cast<double>(transition_latency_us(state.current, target, table)) * 1e-6;
  if (next.pending_latency_s == 0) next.current = target;
  return next;
}

void radio_advance(RadioState& state, double dt_seconds) {
  if (dt_seconds < 0) throw ArgumentError("radio_advance: negative time step");
  state.clock_s += dt_seconds;
  if (state.current == state.target) return;
  state.pending_latency_s -= dt_seconds;
  if (state.pending_latency_s <= 1e-12) {
    state.pending_latency_s = 0;
    state.current = state.target;
  }
}

}  // namespace aiot
