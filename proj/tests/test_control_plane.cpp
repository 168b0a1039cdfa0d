#include <doctest.h>

#include <string>
#include <vector>

#include "aiot/control_plane.hpp"
#include "aiot/rng.hpp"

using namespace aiot;

namespace {

BitVec random_bits(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  BitVec bits(n);
  for (auto& b : bits) b = static_cast<std::uint8_t>(rng.bit());
  return bits;
}

InteractionFrame sample_frame(std::uint8_t id, std::uint64_t seed) {
  InteractionFrame f;
  f.id = id;
  f.type_field = kFrameTypeSampleCount;
  f.data = random_bits(16, seed);
  return f;
}

}  // namespace

TEST_CASE("frame_encode lays out preamble | id | type | data") {
  InteractionFrame f;
  f.id = 0x01;
  f.type_field = 0x02;
  CHECK(bits_to_hex(frame_encode(f)) == "e256e20102");

  f.id = 0;
  f.type_field = 0;
  f.data = BitVec(8, 0);
  const BitVec bits = frame_encode(f);
  CHECK(bits.size() == 48);
  CHECK(bits_to_hex(bits) == "e256e2000000");

  f.data = BitVec(129, 0);
  CHECK_THROWS_AS(frame_encode(f), ArgumentError);
  f.data = BitVec(128, 0);
  CHECK_NOTHROW(frame_encode(f));
}

TEST_CASE("frame_decode inverts frame_encode") {
  const auto table = default_type_length_table();
  const InteractionFrame f = sample_frame(5, 1);
  auto res = frame_decode(frame_encode(f), table);
  REQUIRE(res.frames.size() == 1);
  CHECK(res.frames[0].start == 0);
  CHECK(res.frames[0].frame.id == 5);
  CHECK(res.frames[0].frame.type_field == kFrameTypeSampleCount);
  CHECK(res.frames[0].frame.data == f.data);
  CHECK(res.gaps.empty());
  CHECK(res.invalid.empty());
  CHECK(res.dropped_id_mismatch == 0);
}

TEST_CASE("the correlator finds a frame behind pad bits") {
  const auto table = default_type_length_table();
  const InteractionFrame f = sample_frame(9, 2);
  BitVec stream = random_bits(8, 3);
  const BitVec enc = frame_encode(f);
  stream.insert(stream.end(), enc.begin(), enc.end());

  auto res = frame_decode(stream, table);
  REQUIRE(res.frames.size() == 1);
  CHECK(res.frames[0].start == 8);
  REQUIRE(res.gaps.size() == 1);
  CHECK(res.gaps[0] == std::pair<Index, Index>{0, 8});
}

TEST_CASE("a corrupted preamble reads as a gap, not a frame") {
  const auto table = default_type_length_table();
  BitVec stream = frame_encode(sample_frame(9, 4));
  stream[3] ^= 1;
  auto res = frame_decode(stream, table);
  CHECK(res.frames.empty());
  REQUIRE(res.gaps.size() == 1);
  CHECK(res.gaps[0] == std::pair<Index, Index>{0, static_cast<Index>(stream.size())});
}

TEST_CASE("unknown type codes are flagged invalid") {
  const auto table = default_type_length_table();
  InteractionFrame f;
  f.id = 1;
  f.type_field = 0x7F;
  auto res = frame_decode(frame_encode(f), table);
  CHECK(res.frames.empty());
  REQUIRE(res.invalid.size() == 1);
  CHECK(res.invalid[0] == 0);
}

TEST_CASE("id filtering drops and counts foreign frames") {
  const auto table = default_type_length_table();
  BitVec stream = frame_encode(sample_frame(1, 5));
  const BitVec other = frame_encode(sample_frame(2, 6));
  stream.insert(stream.end(), other.begin(), other.end());

  auto all = frame_decode(stream, table);
  CHECK(all.frames.size() == 2);
  CHECK(all.gaps.empty());

  auto filtered = frame_decode(stream, table, 1);
  REQUIRE(filtered.frames.size() == 1);
  CHECK(filtered.frames[0].frame.id == 1);
  CHECK(filtered.dropped_id_mismatch == 1);
}

TEST_CASE("decoder recovers from a false sync on a stray preamble") {
  // A bare preamble directly in front of a frame aliases: the scanner locks
  // at bit 0, reads the real preamble's first byte as the id and a bogus
  // type, flags it invalid, and must still find the true frame one preamble
  // later.
  BitVec stream;
  append_uint_msb_first(stream, kFramePreamble, kFramePreambleBits);
  InteractionFrame f;
  f.id = 1;
  f.type_field = kFrameTypeSampleCount;
  f.data = random_bits(16, 5);
  const BitVec enc = frame_encode(f);
  stream.insert(stream.end(), enc.begin(), enc.end());

  const auto res = frame_decode(stream, default_type_length_table());
  REQUIRE(res.frames.size() == 1);
  CHECK(res.frames[0].start == 24);
  CHECK(res.frames[0].frame.id == 1);
  CHECK(res.frames[0].frame.data == f.data);
  REQUIRE(res.invalid.size() == 1);
  CHECK(res.invalid[0] == 0);
  REQUIRE(res.gaps.size() == 1);
  CHECK(res.gaps[0] == std::pair<Index, Index>{0, 24});

  // A frame embedded inside another frame's payload is consumed as data,
  // never decoded as a second frame.
  InteractionFrame outer;
  outer.id = 9;
  outer.type_field = kFrameTypePayload;
  outer.data.clear();
  const BitVec inner = frame_encode(f);  // 56 bits
  outer.data.insert(outer.data.end(), inner.begin(), inner.end());
  outer.data.resize(128, 0);
  const auto nested = frame_decode(frame_encode(outer),
                                   default_type_length_table());
  REQUIRE(nested.frames.size() == 1);
  CHECK(nested.frames[0].frame.id == 9);
  CHECK(nested.gaps.empty());
  CHECK(nested.invalid.empty());
}

TEST_CASE("wire transfer is exact at zero jitter") {
  const BitVec bits = random_bits(40, 7);
  auto res = wire_transfer(bits, WireDirection::McuToFpga);
  CHECK(res.received == bits);
  CHECK(res.violations == 0);
  CHECK(res.master == WireDirection::McuToFpga);

  // Master drives CLK: first rising edge at half a period, data already valid.
  REQUIRE(res.trace.size() >= 2);
  CHECK(res.trace[0].t == doctest::Approx(0.0));
  CHECK(res.trace[0].clk == 0);
  CHECK(res.trace[1].t == doctest::Approx(0.5e-6));
  CHECK(res.trace[1].clk == 1);
  CHECK(res.trace[1].data == bits[0]);
  CHECK(res.trace.back().en == 0);

  auto rev = wire_transfer(bits, WireDirection::FpgaToMcu);
  CHECK(rev.received == bits);
  CHECK(rev.master == WireDirection::FpgaToMcu);
}

TEST_CASE("excess jitter produces flagged sampling violations") {
  const BitVec bits = {1, 0, 1, 1, 0, 0, 1, 0};
  auto res = wire_transfer(bits, WireDirection::McuToFpga, 1e-6, 0.6e-6);
  CHECK(res.violations >= 1);
  CHECK(res.received != bits);

  auto mild = wire_transfer(bits, WireDirection::McuToFpga, 1e-6, 0.4e-6);
  CHECK(mild.violations == 0);
  CHECK(mild.received == bits);
}

TEST_CASE("register writes validate and commit atomically") {
  RegisterBank bank;
  auto r = registers_set(bank, "power_dbm", "2");
  CHECK(r.ok);
  CHECK(r.bank.power_dbm == doctest::Approx(2.0));
  r = registers_set(r.bank, "channel", "37");
  CHECK(r.ok);
  CHECK(r.bank.channel == 37);
  r = registers_set(r.bank, "sensor_enable", "true");
  CHECK(r.ok);
  CHECK(r.bank.sensor_enable);

  // Active-mode PLL bound: the failed write leaves the bank untouched.
  r = registers_set(r.bank, "freq_hz", "920e6");
  REQUIRE(r.ok);
  r = registers_set(r.bank, "mode", "active");
  REQUIRE(r.ok);
  auto bad = registers_set(r.bank, "freq_hz", "6.9e9");
  CHECK_FALSE(bad.ok);
  CHECK(bad.error.find("freq") != std::string::npos);
  CHECK(bad.bank.freq_hz == doctest::Approx(920e6));
  CHECK(bad.bank.mode == DeviceMode::Active);

  auto unknown = registers_set(bank, "frobnicate", "1");
  CHECK_FALSE(unknown.ok);
  CHECK(unknown.error.find("unknown register") != std::string::npos);
}

TEST_CASE("a write sequence equals its successful subsequence") {
  const std::vector<std::pair<std::string, std::string>> writes = {
      {"power_dbm", "2"},      {"power_dbm", "100"}, {"sensor_enable", "true"},
      {"v_cutoff", "5"},       {"channel", "37"},    {"bogus_key", "1"},
      {"data_rate", "1e6"},
  };
  RegisterBank mixed;
  std::vector<std::pair<std::string, std::string>> succeeded;
  for (const auto& [k, v] : writes) {
    auto r = registers_set(mixed, k, v);
    if (r.ok) {
      mixed = r.bank;
      succeeded.emplace_back(k, v);
    }
  }
  RegisterBank clean;
  for (const auto& [k, v] : succeeded) {
    auto r = registers_set(clean, k, v);
    REQUIRE(r.ok);
    clean = r.bank;
  }
  CHECK(succeeded.size() == 4);
  CHECK(mixed.power_dbm == clean.power_dbm);
  CHECK(mixed.sensor_enable == clean.sensor_enable);
  CHECK(mixed.channel == clean.channel);
  CHECK(mixed.v_cutoff == clean.v_cutoff);
  CHECK(mixed.phy.data_rate == clean.phy.data_rate);
}

namespace {

RegisterBank ble_active_bank() {
  RegisterBank bank;
  bank.mode = DeviceMode::Active;
  bank.freq_hz = 2.402e9;
  bank.power_dbm = 2;
  bank.payload_id = "beacon01";
  bank.channel = 37;
  bank.phy.protocol = Protocol::BleAdv;
  bank.phy.data_rate = 1e6;
  bank.phy.channel = 37;
  return bank;
}

}  // namespace

TEST_CASE("the interpreter emits a dependency-ordered command list") {
  const auto cmds = interpret(ble_active_bank());
  REQUIRE(cmds.size() == 9);
  CHECK(cmds[0].kind == Command::Kind::EnablePowerDomain);
  CHECK(cmds[0].arg == "mcu");
  CHECK(cmds[1].kind == Command::Kind::EnablePowerDomain);
  CHECK(cmds[1].arg == "fpga");
  CHECK(cmds[2].kind == Command::Kind::EnablePowerDomain);
  CHECK(cmds[2].arg == "pll");
  CHECK(cmds[3].kind == Command::Kind::PllTune);
  CHECK(cmds[3].value == doctest::Approx(2.402e9));
  CHECK(cmds[4].kind == Command::Kind::ConfigureTopology);
  CHECK(cmds[4].arg == "active");
  CHECK(cmds[5].kind == Command::Kind::PhyFrame);
  CHECK(cmds[5].frame.type_field == kFrameTypeSamplingRate);
  CHECK(cmds[6].frame.type_field == kFrameTypeSampleCount);
  CHECK(cmds[7].frame.type_field == kFrameTypeSymbolDuration);
  CHECK(cmds[8].kind == Command::Kind::PayloadFrame);
  CHECK(cmds[8].frame.data.size() == 128);

  // Determinism: same bank, same list.
  const auto again = interpret(ble_active_bank());
  REQUIRE(again.size() == cmds.size());
  for (std::size_t i = 0; i < cmds.size(); ++i) {
    CHECK(again[i].kind == cmds[i].kind);
    CHECK(again[i].arg == cmds[i].arg);
    CHECK(again[i].frame.data == cmds[i].frame.data);
  }
}

TEST_CASE("passive banks never touch the PLL") {
  RegisterBank bank;
  bank.mode = DeviceMode::Passive;
  bank.phy.protocol = Protocol::Amp80211;
  bank.phy.modulation = Modulation::Ook;
  for (const auto& c : interpret(bank)) {
    CHECK(c.kind != Command::Kind::PllTune);
    CHECK(c.arg != "pll");
  }
}

TEST_CASE("the interpreter names the register it cannot satisfy") {
  RegisterBank bank;
  bank.mode = DeviceMode::Active;
  bank.freq_hz = 0;
  CHECK_THROWS_AS(interpret(bank), InterpretError);
  try {
    interpret(bank);
  } catch (const InterpretError& e) {
    CHECK(std::string(e.what()).find("freq") != std::string::npos);
  }
}

TEST_CASE("interpreting twice is idempotent on the hardware model") {
  const auto cmds = interpret(ble_active_bank());
  SimHardware once, twice;
  apply_commands(once, cmds);
  apply_commands(twice, cmds);
  apply_commands(twice, cmds);
  CHECK(once == twice);

  // Sleep tears down what the active bank set up.
  RegisterBank sleeping;
  sleeping.mode = DeviceMode::Sleep;
  apply_commands(once, interpret(sleeping));
  CHECK_FALSE(once.domains.contains("pll"));
  CHECK_FALSE(once.domains.contains("fpga"));
}

TEST_CASE("transition latencies match the measured figures") {
  CHECK(transition_latency_us(RadioOpState::Sleep, RadioOpState::ActiveOp) == 88800);
  CHECK(transition_latency_us(RadioOpState::Sleep, RadioOpState::PassiveOp) == 58800);
  CHECK(transition_latency_us(RadioOpState::PassiveOp, RadioOpState::ActiveOp) == 30000);
  CHECK(transition_latency_us(RadioOpState::ActiveOp, RadioOpState::PassiveOp) == 0);
  CHECK(transition_latency_us(RadioOpState::ActiveOp, RadioOpState::Sleep) == 0);
  CHECK(transition_latency_us(RadioOpState::PassiveOp, RadioOpState::Sleep) == 0);
  CHECK(transition_latency_us(RadioOpState::Sleep, RadioOpState::Sleep) == 0);
}

TEST_CASE("latency is the sum of the enabled components") {
  LatencyTable t;
  CHECK(transition_latency_us(RadioOpState::Sleep, RadioOpState::ActiveOp, t) ==
        t.mcu_wake_us + t.regulators_us + t.fpga_init_us + t.pll_settle_us);
  t.pll_settle_us = 0;
  CHECK(transition_latency_us(RadioOpState::Sleep, RadioOpState::ActiveOp, t) ==
        transition_latency_us(RadioOpState::Sleep, RadioOpState::PassiveOp));
}

TEST_CASE("state flips only after the scheduled latency elapses") {
  RadioState st;
  st = transition(st, RadioOpState::ActiveOp);
  CHECK(st.current == RadioOpState::Sleep);
  CHECK(st.target == RadioOpState::ActiveOp);
  CHECK(st.pending_latency_s == doctest::Approx(0.0888));

  radio_advance(st, 0.0887);
  CHECK(st.current == RadioOpState::Sleep);
  radio_advance(st, 0.0001);
  CHECK(st.current == RadioOpState::ActiveOp);
  CHECK(st.pending_latency_s == doctest::Approx(0.0));

  // Immediate transitions complete inside transition().
  st = transition(st, RadioOpState::PassiveOp);
  CHECK(st.current == RadioOpState::PassiveOp);
  CHECK_THROWS_AS(radio_advance(st, -1.0), ArgumentError);
}
