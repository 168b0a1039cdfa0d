#include "aiot/ble.hpp"

#include <cmath>

namespace aiot {

double ble_channel_freq_hz(int channel) {
  switch (channel) {
    case 37: return 2.402e9;
    case 38: return 2.426e9;
    case 39: return 2.480e9;
    default: throw ConfigError("ble_channel_freq_hz: advertising channel must be 37, 38 or 39");
  }
}

std::uint32_t ble_crc24(const BitVec& bits, std::uint32_t init) {
  std::uint32_t reg = init & 0xFFFFFFu;
  for (auto b : bits) {
    const std::uint32_t fb = (b & 1u) ^ ((reg >> 23) & 1u);
    reg = (reg << 1) & 0xFFFFFFu;
    if (fb) reg ^= kBleCrcPoly;
  }
  return reg;
}

void ble_whiten(BitVec& bits, int channel) {
  if (channel < 0 || channel > 39)
    throw ConfigError("ble_whiten: channel index out of range");
  // Galois form of x^7 + x^4 + 1, seeded with the channel index and a leading 1.
  std::uint32_t w = static_cast<std::uint32_t>(channel) | 0x40u;
  for (auto& b : bits) {
    const std::uint32_t out = w & 1u;
    w = (w >> 1) ^ (out ? 0x44u : 0u);
    b ^= static_cast<std::uint8_t>(out);
  }
}

AirFrame ble_adv_build(const std::vector<std::uint8_t>& payload_bytes,
                       const std::array<std::uint8_t, 6>& adv_address,
                       int channel, std::uint8_t pdu_type) {
  if (payload_bytes.size() > 31)
    throw ArgumentError("ble_adv_build: AdvData is limited to 31 bytes");
  if (channel != 37 && channel != 38 && channel != 39)
    throw ConfigError("ble_adv_build: advertising channel must be 37, 38 or 39");

  BitVec pdu;
  const std::uint8_t header0 = pdu_type & 0x0Fu;
  const std::uint8_t length = static_cast<std::uint8_t>(6 + payload_bytes.size());
  append_byte_lsb_first(pdu, header0);
  append_byte_lsb_first(pdu, length);
  for (auto b : adv_address) append_byte_lsb_first(pdu, b);
  for (auto b : payload_bytes) append_byte_lsb_first(pdu, b);

  const std::uint32_t crc = ble_crc24(pdu);
  BitVec body = pdu;
  for (int i = 23; i >= 0; --i) body.push_back((crc >> i) & 1u);
  ble_whiten(body, channel);

  AirFrame frame;
  frame.protocol.protocol = Protocol::BleAdv;
  frame.protocol.data_rate = 1e6;
  frame.protocol.modulation = Modulation::Fsk;
  frame.protocol.channel = channel;
  frame.protocol.band_hz = ble_channel_freq_hz(channel);

  append_byte_lsb_first(frame.bits, 0xAAu);
  for (int i = 0; i < 32; ++i)
    frame.bits.push_back((kBleAccessAddress >> i) & 1u);
  frame.bits.insert(frame.bits.end(), body.begin(), body.end());

  const Index pdu_len = static_cast<Index>(pdu.size());
  frame.annotations = {
      {"preamble", 0, 8},
      {"access_address", 8, 40},
      {"pdu_header", 40, 56},
      {"adv_a", 56, 104},
      {"adv_data", 104, 40 + pdu_len},
      {"crc", 40 + pdu_len, 40 + pdu_len + 24},
  };
  frame.validate();
  return frame;
}

BleDecodeResult ble_adv_decode(const BitVec& frame_bits, int channel) {
  BleDecodeResult res;
  if (frame_bits.size() < 40 + 16 + 24) return res;

  BitVec preamble_ref;
  append_byte_lsb_first(preamble_ref, 0xAAu);
  res.preamble_ok = std::equal(preamble_ref.begin(), preamble_ref.end(),
                               frame_bits.begin());

  std::uint32_t aa = 0;
  for (int i = 0; i < 32; ++i)
    aa |= static_cast<std::uint32_t>(frame_bits[8 + i]) << i;
  res.access_ok = (aa == kBleAccessAddress);

  BitVec body(frame_bits.begin() + 40, frame_bits.end());
  ble_whiten(body, channel);

  auto read_byte = [&body](std::size_t bit_pos) {
    std::uint8_t v = 0;
    for (int i = 0; i < 8; ++i)
      v |= static_cast<std::uint8_t>(body[bit_pos + i]) << i;
    return v;
  };
  res.pdu_type = read_byte(0) & 0x0Fu;
  const std::uint8_t length = read_byte(8) & 0x3Fu;
  const std::size_t pdu_bits = (2u + length) * 8u;
  if (body.size() < pdu_bits + 24) return res;
  if (length >= 6) {
    for (int i = 0; i < 6; ++i) res.adv_address[i] = read_byte(16 + 8 * i);
    for (int i = 6; i < length; ++i) res.payload.push_back(read_byte(16 + 8 * i));
  }

  BitVec pdu(body.begin(), body.begin() + pdu_bits);
  const std::uint32_t expect = ble_crc24(pdu);
  std::uint32_t got = 0;
  for (int i = 0; i < 24; ++i)
    got = (got << 1) | body[pdu_bits + i];
  res.crc_ok = (expect == got);
  return res;
}

std::vector<PhaseParamsd> ble_gfsk_map(const AirFrame& frame,
                                       const ProtocolConfig& cfg,
                                       bool gaussian) {
  if (cfg.data_rate != 1e6)
    throw ConfigError("ble_gfsk_map: symbol rate must be 1 Mbps");
  const double fs = cfg.sample_rate();
  if (std::abs(fs / 1e6 - std::round(fs / 1e6)) > 1e-9)
    throw ConfigError("ble_gfsk_map: sample rate must be an integer multiple of 1 MHz");
  const double dev = 250e3;
  const Index sps = cfg.samples_per_symbol;

  if (!gaussian) {
    std::vector<PhaseParamsd> out;
    out.reserve(frame.bits.size());
    double a0 = 0.0;
    for (auto b : frame.bits) {
      PhaseParamsd p{0.0, (b ? dev : -dev) / fs, a0, sps};
      out.push_back(p);
      a0 = detail::frac_cycles(detail::phase_poly(p, static_cast<double>(sps)));
    }
    return out;
  }

  // BT = 0.5 Gaussian pulse over the per-sample frequency track, emitted at
  // one-sample granularity so sub-symbol frequency variation is representable.
  const double bt = 0.5;
  const double sigma = std::sqrt(std::numbers::ln2_v<double>) /
                       (2.0 * std::numbers::pi * bt) * static_cast<double>(sps);
  const Index half = 2 * sps;
  std::vector<double> taps(2 * half + 1);
  double sum = 0;
  for (Index i = 0; i < static_cast<Index>(taps.size()); ++i) {
    const double t = static_cast<double>(i - half);
    taps[i] = std::exp(-t * t / (2.0 * sigma * sigma));
    sum += taps[i];
  }
  for (auto& t : taps) t /= sum;

  const Index n = static_cast<Index>(frame.bits.size()) * sps;
  std::vector<double> freq(n);
  for (Index i = 0; i < n; ++i)
    freq[i] = frame.bits[i / sps] ? dev : -dev;
  std::vector<PhaseParamsd> out;
  out.reserve(n);
  double a0 = 0.0;
  for (Index i = 0; i < n; ++i) {
    double f = 0;
    for (Index j = 0; j < static_cast<Index>(taps.size()); ++j) {
      Index src = i + j - half;
      if (src < 0) src = 0;
      if (src >= n) src = n - 1;
      f += taps[j] * freq[src];
    }
    PhaseParamsd p{0.0, f / fs, a0, 1};
    out.push_back(p);
    a0 = detail::frac_cycles(detail::phase_poly(p, 1.0));
  }
  return out;
}

}  // namespace aiot
