#pragma once

#include <array>
#include <cstdint>

#include "aiot/phy.hpp"

namespace aiot {

inline constexpr std::uint32_t kBleAccessAddress = 0x8E89BED6u;
inline constexpr std::uint32_t kBleCrcPoly = 0x00065Bu;
inline constexpr std::uint32_t kBleCrcInit = 0x555555u;
inline constexpr std::uint8_t kBleAdvNonconnInd = 0x02;  ///< PDU type field

/// Center frequency of a BLE advertising channel (37, 38, 39).
double ble_channel_freq_hz(int channel);

/// CRC-24 over bits in transmission order (poly 0x65B, init 0x555555).
std::uint32_t ble_crc24(const BitVec& bits, std::uint32_t init = kBleCrcInit);

/// Data whitening with the 7-bit LFSR x^7 + x^4 + 1 seeded from the channel
/// index; XOR-involutive per channel.
void ble_whiten(BitVec& bits, int channel);

/// Builds a valid advertising frame: preamble 0xAA, access address
/// 0x8E89BED6, PDU (header + AdvA + AdvData), CRC-24; PDU+CRC whitened.
/// Bytes serialize LSB-first; adv_address[0] is transmitted first.
AirFrame ble_adv_build(const std::vector<std::uint8_t>& payload_bytes,
                       const std::array<std::uint8_t, 6>& adv_address,
                       int channel, std::uint8_t pdu_type = kBleAdvNonconnInd);

struct BleDecodeResult {
  bool preamble_ok = false;
  bool access_ok = false;
  bool crc_ok = false;
  std::uint8_t pdu_type = 0;
  std::array<std::uint8_t, 6> adv_address{};
  std::vector<std::uint8_t> payload;
};

/// Sniffer-style decoder for frames produced by ble_adv_build (dewhitens with
/// the channel index, validates the CRC).
BleDecodeResult ble_adv_decode(const BitVec& frame_bits, int channel);

/// GFSK mapping at 1 Mbps: bit b -> +/- 250 kHz with continuous phase. With
/// `gaussian` set, a BT = 0.5 Gaussian filter smooths the frequency track and
/// the result is emitted at one-sample granularity.
std::vector<PhaseParamsd> ble_gfsk_map(const AirFrame& frame,
                                       const ProtocolConfig& cfg,
                                       bool gaussian = false);

}  // namespace aiot
