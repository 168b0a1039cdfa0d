#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "aiot/bits.hpp"
#include "aiot/phy.hpp"

namespace aiot {

inline constexpr std::uint32_t kFramePreamble = 0xE256E2u;  ///< 24 bits
inline constexpr int kFramePreambleBits = 24;
inline constexpr int kFrameHeaderBits = 40;  ///< preamble + id + type
inline constexpr int kFrameMaxDataBits = 128;

/// Register categories carried in PHY parameter frames.
inline constexpr std::uint8_t kFrameTypeSamplingRate = 0x01;   ///< 32-bit Hz
inline constexpr std::uint8_t kFrameTypeSampleCount = 0x02;    ///< 16-bit samples/symbol
inline constexpr std::uint8_t kFrameTypeSymbolDuration = 0x03; ///< 32-bit ns
inline constexpr std::uint8_t kFrameTypePayload = 0x04;        ///< 128-bit payload token

/// Host<->radio configuration frame: preamble | id | type | data.
struct InteractionFrame {
  std::uint8_t id = 0;
  std::uint8_t type_field = 0;
  BitVec data;  ///< 0..128 bits

  void validate() const {
    if (data.size() > kFrameMaxDataBits)
      throw ArgumentError("InteractionFrame: data exceeds 128 bits");
  }
};

using TypeLengthTable = std::map<std::uint8_t, int>;

/// Table for the built-in frame types.
TypeLengthTable default_type_length_table();

/// MSB-first concatenation preamble | id | type | data.
BitVec frame_encode(const InteractionFrame& frame);

struct DecodedFrame {
  InteractionFrame frame;
  Index start = 0;  ///< bit offset of the preamble in the stream
};

struct FrameDecodeResult {
  std::vector<DecodedFrame> frames;
  std::vector<std::pair<Index, Index>> gaps;   ///< [begin, end) uncovered spans
  std::vector<Index> invalid;                  ///< preamble hits with unknown type
  long dropped_id_mismatch = 0;
};

/// Slides an exact 24-bit correlator over the stream; parses id/type on a
/// match, takes the data length from the table, then resumes after the frame.
/// Unknown type codes are flagged invalid and scanning resumes at the next
/// bit. When expected_id >= 0, frames with another id are dropped (counted).
FrameDecodeResult frame_decode(const BitVec& stream, const TypeLengthTable& table,
                               int expected_id = -1);

enum class WireDirection { McuToFpga, FpgaToMcu };

struct WireSample {
  double t = 0;
  int clk = 0;
  int data = 0;
  int en = 0;
};

struct WireTransferResult {
  std::vector<WireSample> trace;  ///< CLK/DATA/EN line events
  BitVec received;
  long violations = 0;  ///< rising-edge samples landing outside the bit window
  WireDirection master = WireDirection::McuToFpga;
};

/// Four-wire synchronous link: bit k is valid over [kT, (k+1)T), CLK rises at
/// kT + T/2, the receiver samples at the rising edge plus `jitter`. Jitter of
/// at least half a clock period produces flagged sampling violations.
WireTransferResult wire_transfer(const BitVec& bits, WireDirection direction,
                                 double clock_period = 1e-6, double jitter = 0.0);

enum class DeviceMode { Passive, Active, Sleep };

/// Validated configuration registers.
struct RegisterBank {
  DeviceMode mode = DeviceMode::Sleep;
  double freq_hz = 0;
  double power_dbm = 0;
  std::string payload_id;
  int channel = 0;
  bool sensor_enable = false;
  std::uint8_t device_id = 1;
  ProtocolConfig phy;
  double v_activate = 3.3;
  double v_cutoff = 2.0;

  /// Cross-register consistency checks; throws ConfigError naming the register.
  void validate() const;
};

struct RegisterSetResult {
  RegisterBank bank;  ///< updated bank, or the input bank on failure
  bool ok = true;
  std::string error;
};

/// Atomic validated write of a textual key=value pair.
RegisterSetResult registers_set(const RegisterBank& bank, const std::string& key,
                                const std::string& value);

struct Command {
  enum class Kind {
    EnablePowerDomain,
    DisablePowerDomain,
    PllTune,
    ConfigureTopology,
    PhyFrame,
    PayloadFrame,
  };
  Kind kind = Kind::EnablePowerDomain;
  std::string arg;          ///< domain name or topology mode
  double value = 0;         ///< PLL frequency for PllTune
  InteractionFrame frame;   ///< for PhyFrame / PayloadFrame
};

/// Translates a register bank into a deterministic, dependency-ordered
/// command list. Throws InterpretError naming the offending register.
std::vector<Command> interpret(const RegisterBank& bank);

/// Minimal hardware model for interpreter idempotence checks.
struct SimHardware {
  std::set<std::string> domains;
  double pll_freq = 0;
  std::string topology;
  std::map<std::uint8_t, BitVec> frames;

  bool operator==(const SimHardware&) const = default;
};

void apply_commands(SimHardware& hw, const std::vector<Command>& cmds);

enum class RadioOpState { Sleep, PassiveOp, ActiveOp };

/// Individually configurable transition latency components, microseconds.
struct LatencyTable {
  long mcu_wake_us = 300;
  long regulators_us = 500;
  long fpga_init_us = 58000;
  long pll_settle_us = 30000;
};

/// Latency consumed by a transition, in microseconds.
long transition_latency_us(RadioOpState from, RadioOpState to,
                           const LatencyTable& table = {});

struct RadioState {
  RadioOpState current = RadioOpState::Sleep;
  RadioOpState target = RadioOpState::Sleep;
  double pending_latency_s = 0;
  double clock_s = 0;
};

/// Schedules a transition; `current` changes only after the latency elapses
/// under radio_advance.
RadioState transition(const RadioState& state, RadioOpState target,
                      const LatencyTable& table = {});

void radio_advance(RadioState& state, double dt_seconds);

}  // namespace aiot
