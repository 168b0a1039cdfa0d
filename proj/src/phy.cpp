#include "aiot/phy.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "aiot/dsp.hpp"
#include "aiot/rng.hpp"

namespace aiot {

namespace {

constexpr std::uint64_t kOfdmPopulationSeed = 0x0a10f0d4u;

bool is_amp_rate(double rate) {
  for (double r : kAmpRates)
    if (rate == r) return true;
  return false;
}

}  // namespace

void ProtocolConfig::validate() const {
  if (data_rate <= 0) throw ConfigError("ProtocolConfig: data_rate must be > 0");
  if (samples_per_symbol < 1)
    throw ConfigError("ProtocolConfig: samples_per_symbol must be >= 1");
  switch (protocol) {
    case Protocol::Amp80211:
      if (!is_amp_rate(data_rate))
        throw ConfigError(
            "ProtocolConfig: 802.11AMP rate must be 250 kbps, 1 Mbps or 4 Mbps");
      break;
    case Protocol::BleAdv:
      if (channel != 37 && channel != 38 && channel != 39)
        throw ConfigError("ProtocolConfig: BLE advertising channel must be 37, 38 or 39");
      if (data_rate != 1e6)
        throw ConfigError("ProtocolConfig: BLE advertising rate is 1 Mbps");
      break;
    default:
      break;
  }
}

void AirFrame::validate() const {
  std::vector<FieldSpan> spans = annotations;
  std::sort(spans.begin(), spans.end(),
            [](const FieldSpan& a, const FieldSpan& b) { return a.begin < b.begin; });
  Index cursor = 0;
  for (const auto& s : spans) {
    if (s.begin != cursor)
      throw ConfigError("AirFrame: annotation gap or overlap at bit " +
                        std::to_string(cursor));
    if (s.end < s.begin) throw ConfigError("AirFrame: negative span " + s.name);
    cursor = s.end;
  }
  if (cursor != static_cast<Index>(bits.size()))
    throw ConfigError("AirFrame: annotations do not cover the bit vector");
}

BitVec manchester_encode(const BitVec& bits) {
  BitVec chips;
  chips.reserve(bits.size() * 2);
  for (auto b : bits) {
    chips.push_back(b ? 1 : 0);
    chips.push_back(b ? 0 : 1);
  }
  return chips;
}

ManchesterResult manchester_decode(const BitVec& chips) {
  if (chips.size() % 2 != 0)
    throw ArgumentError("manchester_decode: chip stream length must be even");
  ManchesterResult res;
  res.bits.reserve(chips.size() / 2);
  for (std::size_t k = 0; k + 1 < chips.size(); k += 2) {
    const int c0 = chips[k], c1 = chips[k + 1];
    if (c0 == c1) res.bad_pairs.push_back(static_cast<Index>(k / 2));
    res.bits.push_back(c0 ? 1 : 0);
  }
  return res;
}

BitVec manchester_decode_strict(const BitVec& chips) {
  ManchesterResult res = manchester_decode(chips);
  if (!res.bad_pairs.empty())
    throw DecodeError("manchester_decode: invalid chip pair at index " +
                          std::to_string(res.bad_pairs.front()),
                      static_cast<long>(res.bad_pairs.front()));
  return res.bits;
}

BitVec manchester_decode_soft(const VecX<double>& soft_chips) {
  BitVec bits;
  bits.reserve(soft_chips.size() / 2);
  for (Index k = 0; k + 1 < soft_chips.size(); k += 2)
    bits.push_back(soft_chips[k] > soft_chips[k + 1] ? 1 : 0);
  return bits;
}

SwitchSequence amp_uplink_modulate(const BitVec& bits, const ProtocolConfig& cfg,
                                   RadioMode mode, double f_shift) {
  cfg.validate();
  if (cfg.protocol != Protocol::Amp80211)
    throw ConfigError("amp_uplink_modulate: protocol must be 802.11AMP");
  if (cfg.data_rate == 4e6 && mode == RadioMode::Passive)
    throw CapabilityError("amp_uplink_modulate: 4 Mbps is reserved for active devices");
  if (f_shift > 0 && mode == RadioMode::Active)
    throw ConfigError("amp_uplink_modulate: frequency shifting applies to passive mode");
  const BitVec chips = manchester_encode(bits);
  SwitchSequence seq;
  seq.bits = 1;
  seq.sample_rate = 2.0 * cfg.data_rate * cfg.samples_per_symbol;
  seq.levels.resize(static_cast<Index>(chips.size()) * cfg.samples_per_symbol);
  Index n = 0;
  for (auto c : chips)
    for (int j = 0; j < cfg.samples_per_symbol; ++j) seq.levels[n++] = c;
  if (f_shift > 0) return apply_freq_shift(seq, f_shift);
  return seq;
}

IqBufferd amp_downlink_synthesize(const BitVec& bits, const ProtocolConfig& cfg) {
  cfg.validate();
  if (cfg.protocol != Protocol::Amp80211)
    throw ConfigError("amp_downlink_synthesize: protocol must be 802.11AMP");
  if (cfg.data_rate != 250e3 && cfg.data_rate != 1e6)
    throw ConfigError("amp_downlink_synthesize: downlink rate must be 250 kbps or 1 Mbps");
  const Index n_fft = std::max(16, cfg.samples_per_symbol);

  // Fixed seeded subcarrier population: 3/4 of the bins, DC excluded,
  // QPSK-valued; identical for every ON symbol.
  CVecX<double> spectrum = CVecX<double>::Zero(n_fft);
  Rng rng(kOfdmPopulationSeed);
  const Index band = 3 * n_fft / 8;
  for (Index k = 1; k <= band; ++k) {
    const double ph0 = (0.25 + 0.5 * static_cast<double>(rng.integer(4))) *
                       std::numbers::pi;
    const double ph1 = (0.25 + 0.5 * static_cast<double>(rng.integer(4))) *
                       std::numbers::pi;
    spectrum[k] = {std::cos(ph0), std::sin(ph0)};
    spectrum[n_fft - k] = {std::cos(ph1), std::sin(ph1)};
  }
  CVecX<double> on_symbol = ifft(spectrum);
  on_symbol /= std::sqrt(on_symbol.squaredNorm() / static_cast<double>(n_fft));

  const BitVec chips = manchester_encode(bits);
  IqBufferd out;
  out.sample_rate = 2.0 * cfg.data_rate * static_cast<double>(n_fft);
  out.center_freq = cfg.band_hz;
  out.samples = CVecX<double>::Zero(static_cast<Index>(chips.size()) * n_fft);
  for (Index c = 0; c < static_cast<Index>(chips.size()); ++c)
    if (chips[c]) out.samples.segment(c * n_fft, n_fft) = on_symbol;
  return out;
}

BitVec amp_ook_demodulate(const IqBufferd& rx, const ProtocolConfig& cfg,
                          OokFrontEnd front_end) {
  const double chip_rate = 2.0 * cfg.data_rate;
  OokResult<double> chips =
      ook_receive(rx, chip_rate, default_ook_rc_tau(chip_rate), front_end);
  if (chips.no_signal) return {};
  return manchester_decode_soft(chips.soft);
}

std::vector<PhaseParamsd> aiot_bpsk_map(const BitVec& bits, const ProtocolConfig& cfg) {
  std::vector<PhaseParamsd> out;
  out.reserve(bits.size());
  for (auto b : bits)
    out.push_back(params_for_psk(b ? 0.5 : 0.0,
                                 static_cast<Index>(cfg.samples_per_symbol)));
  return out;
}

std::vector<PhaseParamsd> aiot_msk_map(const BitVec& bits, const ProtocolConfig& cfg) {
  const double fs = cfg.sample_rate();
  const double dev = cfg.data_rate / 4.0;
  std::vector<PhaseParamsd> out;
  out.reserve(bits.size());
  double a0 = 0.0;
  for (auto b : bits) {
    PhaseParamsd p{0.0, (b ? dev : -dev) / fs, a0,
                   static_cast<Index>(cfg.samples_per_symbol)};
    out.push_back(p);
    a0 = detail::frac_cycles(detail::phase_poly(p, static_cast<double>(p.n_samples)));
  }
  return out;
}

IqBufferd synth_phase_waveform(const std::vector<PhaseParamsd>& symbols,
                               double sample_rate, double amplitude,
                               double center_freq) {
  Index total = 0;
  for (const auto& s : symbols) total += s.n_samples;
  if (total == 0) throw ArgumentError("synth_phase_waveform: no symbols");
  IqBufferd out;
  out.sample_rate = sample_rate;
  out.center_freq = center_freq;
  out.samples.resize(total);
  Index n = 0;
  for (const auto& s : symbols) {
    s.validate();
    for (Index i = 0; i < s.n_samples; ++i) {
      const double ph = 2.0 * std::numbers::pi *
                        detail::phase_poly(s, static_cast<double>(i));
      out.samples[n++] = {amplitude * std::cos(ph), amplitude * std::sin(ph)};
    }
  }
  return out;
}

double fsk_tone_offset_hz(const ProtocolConfig& cfg) {
  return cfg.modulation == Modulation::Msk ? cfg.data_rate / 4.0
                                           : cfg.data_rate / 2.0;
}

double css_bandwidth_hz(const ProtocolConfig& cfg) { return cfg.sample_rate() / 4.0; }

namespace {

std::vector<PhaseParamsd> fsk_like_map(const BitVec& bits, const ProtocolConfig& cfg) {
  const double fs = cfg.sample_rate();
  const double dev = fsk_tone_offset_hz(cfg);
  std::vector<PhaseParamsd> out;
  out.reserve(bits.size());
  double a0 = 0.0;
  for (auto b : bits) {
    PhaseParamsd p{0.0, (b ? dev : -dev) / fs, a0,
                   static_cast<Index>(cfg.samples_per_symbol)};
    out.push_back(p);
    a0 = detail::frac_cycles(detail::phase_poly(p, static_cast<double>(p.n_samples)));
  }
  return out;
}

PhaseParamsd css_chirp_params(const ProtocolConfig& cfg, bool up) {
  const double fs = cfg.sample_rate();
  const double bw = css_bandwidth_hz(cfg);
  const double t_sym = cfg.samples_per_symbol / fs;
  const double k = (up ? bw : -bw) / t_sym;
  return params_for_css(up ? -bw / 2 : bw / 2, k, fs,
                        static_cast<Index>(cfg.samples_per_symbol));
}

}  // namespace

IqBufferd modulate(const BitVec& bits, const ProtocolConfig& cfg, double amplitude) {
  cfg.validate();
  if (bits.empty()) throw ArgumentError("modulate: empty payload");
  const double fs = cfg.sample_rate();
  switch (cfg.modulation) {
    case Modulation::Ook: {
      IqBufferd out;
      out.sample_rate = fs;
      out.center_freq = cfg.band_hz;
      out.samples = CVecX<double>::Zero(static_cast<Index>(bits.size()) *
                                        cfg.samples_per_symbol);
      for (Index k = 0; k < static_cast<Index>(bits.size()); ++k)
        if (bits[k])
          out.samples.segment(k * cfg.samples_per_symbol, cfg.samples_per_symbol)
              .setConstant(std::complex<double>(amplitude, 0));
      return out;
    }
    case Modulation::Bpsk: {
      BitVec with_pilot(static_cast<std::size_t>(kBpskPilotSymbols), 0);
      with_pilot.reserve(bits.size() + with_pilot.size());
      with_pilot.insert(with_pilot.end(), bits.begin(), bits.end());
      return synth_phase_waveform(aiot_bpsk_map(with_pilot, cfg), fs, amplitude,
                                  cfg.band_hz);
    }
    case Modulation::Msk:
      return synth_phase_waveform(aiot_msk_map(bits, cfg), fs, amplitude, cfg.band_hz);
    case Modulation::Fsk:
      return synth_phase_waveform(fsk_like_map(bits, cfg), fs, amplitude, cfg.band_hz);
    case Modulation::Css: {
      std::vector<PhaseParamsd> syms;
      syms.reserve(bits.size());
      for (auto b : bits) syms.push_back(css_chirp_params(cfg, b != 0));
      return synth_phase_waveform(syms, fs, amplitude, cfg.band_hz);
    }
  }
  throw ConfigError("modulate: unknown modulation");
}

DemodResult demodulate(const IqBufferd& rx, const ProtocolConfig& cfg) {
  cfg.validate();
  rx.validate();
  DemodResult res;
  res.rssi_dbm = mw_to_dbm(rx.samples.squaredNorm() /
                           static_cast<double>(rx.samples.size()));
  const Index sps = cfg.samples_per_symbol;
  const Index n_sym = rx.samples.size() / sps;

  switch (cfg.modulation) {
    case Modulation::Ook: {
      OokResult<double> r =
          ook_receive(rx, cfg.data_rate, default_ook_rc_tau(cfg.data_rate));
      res.no_signal = r.no_signal;
      if (!r.no_signal) {
        res.bits.assign(r.bits.begin(), r.bits.end());
        res.soft = r.soft;
      }
      return res;
    }
    case Modulation::Bpsk: {
      if (n_sym < kBpskPilotSymbols + 1)
        throw ArgumentError("demodulate: BPSK needs the pilot run plus data");
      CVecX<double> sym(n_sym);
      for (Index k = 0; k < n_sym; ++k) {
        std::complex<double> c(0, 0);
        for (Index n = 0; n < sps; ++n) c += rx.samples[k * sps + n];
        sym[k] = c;
      }
      // Squaring carrier recovery: symbols sit at +/-ref, so sym^2 clusters
      // around ref^2; the known-zero pilot run, summed coherently, resolves
      // the 180-degree ambiguity.
      std::complex<double> sq(0, 0);
      for (Index k = 0; k < n_sym; ++k) sq += sym[k] * sym[k];
      const double psi = 0.5 * std::arg(sq);
      std::complex<double> ref(std::cos(psi), std::sin(psi));
      std::complex<double> pilot(0, 0);
      for (Index k = 0; k < kBpskPilotSymbols; ++k) pilot += sym[k];
      if ((pilot * std::conj(ref)).real() < 0) ref = -ref;
      const double scale =
          sym.cwiseAbs().sum() / static_cast<double>(n_sym) + 1e-300;
      res.soft.resize(n_sym - kBpskPilotSymbols);
      res.bits.reserve(n_sym - kBpskPilotSymbols);
      for (Index k = kBpskPilotSymbols; k < n_sym; ++k) {
        const double metric = -(sym[k] * std::conj(ref)).real() / scale;
        res.soft[k - kBpskPilotSymbols] = metric;
        res.bits.push_back(metric > 0 ? 1 : 0);
      }
      return res;
    }
    case Modulation::Msk:
    case Modulation::Fsk: {
      if (n_sym < 1) throw ArgumentError("demodulate: buffer shorter than one symbol");
      const double w =
          2.0 * std::numbers::pi * fsk_tone_offset_hz(cfg) / rx.sample_rate;
      res.soft.resize(n_sym);
      res.bits.reserve(n_sym);
      for (Index k = 0; k < n_sym; ++k) {
        std::complex<double> cp(0, 0), cm(0, 0);
        for (Index n = 0; n < sps; ++n) {
          const double ph = w * static_cast<double>(n);
          const std::complex<double> rot(std::cos(ph), -std::sin(ph));
          cp += rx.samples[k * sps + n] * rot;
          cm += rx.samples[k * sps + n] * std::conj(rot);
        }
        const double ep = std::norm(cp), em = std::norm(cm);
        res.soft[k] = (ep - em) / (ep + em + 1e-300);
        res.bits.push_back(ep > em ? 1 : 0);
      }
      return res;
    }
    case Modulation::Css: {
      if (n_sym < 1) throw ArgumentError("demodulate: buffer shorter than one symbol");
      IqBufferd up = synth_phase_waveform({css_chirp_params(cfg, true)},
                                          rx.sample_rate);
      IqBufferd down = synth_phase_waveform({css_chirp_params(cfg, false)},
                                            rx.sample_rate);
      res.soft.resize(n_sym);
      res.bits.reserve(n_sym);
      for (Index k = 0; k < n_sym; ++k) {
        std::complex<double> cu(0, 0), cd(0, 0);
        for (Index n = 0; n < sps; ++n) {
          cu += rx.samples[k * sps + n] * std::conj(up.samples[n]);
          cd += rx.samples[k * sps + n] * std::conj(down.samples[n]);
        }
        const double eu = std::norm(cu), ed = std::norm(cd);
        res.soft[k] = (eu - ed) / (eu + ed + 1e-300);
        res.bits.push_back(eu > ed ? 1 : 0);
      }
      return res;
    }
  }
  throw ConfigError("demodulate: unknown modulation");
}

}  // namespace aiot
