#pragma once

#include <string>
#include <vector>

#include "aiot/baseband.hpp"
#include "aiot/bits.hpp"
#include "aiot/rf_frontend.hpp"
#include "aiot/types.hpp"

namespace aiot {

enum class Protocol { Amp80211, Aiot3gpp, BleAdv, Css };
enum class Modulation { Ook, Bpsk, Msk, Fsk, Css };

/// Protocol-level waveform configuration.
struct ProtocolConfig {
  Protocol protocol = Protocol::Aiot3gpp;
  double data_rate = 250e3;            ///< bits/s
  Modulation modulation = Modulation::Bpsk;
  int samples_per_symbol = 8;
  int channel = 0;                     ///< protocol-specific channel index
  double band_hz = 0;                  ///< carrier band, Hz

  void validate() const;

  double sample_rate() const { return data_rate * samples_per_symbol; }
};

inline constexpr double kAmpRates[] = {250e3, 1e6, 4e6};

/// Span [begin, end) of a named field inside an AirFrame bit vector.
struct FieldSpan {
  std::string name;
  Index begin = 0;
  Index end = 0;
};

/// Post-encoding, pre-modulation frame bits with field annotations.
struct AirFrame {
  BitVec bits;
  ProtocolConfig protocol;
  std::vector<FieldSpan> annotations;

  void validate() const;  ///< annotation spans disjoint and covering
};

// Manchester line code, IEEE convention: 1 -> [1,0], 0 -> [0,1].

BitVec manchester_encode(const BitVec& bits);

struct ManchesterResult {
  BitVec bits;
  std::vector<Index> bad_pairs;  ///< indices of invalid chip pairs
};

/// Tolerant decode: invalid pairs are reported per position (bit emitted from
/// the first chip). Throws ArgumentError on odd-length input.
ManchesterResult manchester_decode(const BitVec& chips);

/// Strict decode: throws DecodeError at the first invalid pair.
BitVec manchester_decode_strict(const BitVec& chips);

/// Soft pairwise decision on per-chip metrics: bit = chip(2k) > chip(2k+1).
BitVec manchester_decode_soft(const VecX<double>& soft_chips);

/// Uplink OOK + Manchester mapped onto switch states, one chip per
/// samples_per_symbol samples. Passive mode may compose XOR frequency
/// shifting via f_shift > 0.
SwitchSequence amp_uplink_modulate(const BitVec& bits, const ProtocolConfig& cfg,
                                   RadioMode mode, double f_shift = 0.0);

/// OFDM-synthesized downlink OOK: each ON bit is one OFDM symbol with a fixed
/// seeded pseudo-random subcarrier population, each OFF bit a null symbol.
IqBufferd amp_downlink_synthesize(const BitVec& bits, const ProtocolConfig& cfg);

/// OOK + Manchester receive path (chip-rate envelope chain, soft pairwise
/// Manchester decision). Pass EnvelopeFirst for OFDM-synthesized downlink.
BitVec amp_ook_demodulate(const IqBufferd& rx, const ProtocolConfig& cfg,
                          OokFrontEnd front_end = OokFrontEnd::MatchedFilter);

/// BPSK mapping: bit b -> a0 = b * 0.5 cycles.
std::vector<PhaseParamsd> aiot_bpsk_map(const BitVec& bits, const ProtocolConfig& cfg);

/// MSK mapping: bit b -> a1 = +/- R/(4 fs); a0 accumulates so phase is
/// continuous at every symbol boundary.
std::vector<PhaseParamsd> aiot_msk_map(const BitVec& bits, const ProtocolConfig& cfg);

/// Ideal complex-exponential synthesis exp(j 2 pi phase(n)) of a symbol
/// sequence (the waveform the phase polynomial represents at RF).
IqBufferd synth_phase_waveform(const std::vector<PhaseParamsd>& symbols,
                               double sample_rate, double amplitude = 1.0,
                               double center_freq = 0.0);

struct DemodResult {
  BitVec bits;
  VecX<double> soft;       ///< per-bit decision metric
  double rssi_dbm = 0;
  bool no_signal = false;  ///< OOK chain found no modulation
};

/// Pilot run prepended to BPSK payloads. Integrated coherently on receive, so
/// the sign-ambiguity error rate is Q(sqrt(2*snr*kBpskPilotSymbols)) per
/// burst instead of the per-bit rate a single pilot would give.
inline constexpr Eigen::Index kBpskPilotSymbols = 4;

/// Ideal modulator used by the experiment harness. BPSK prepends a run of
/// kBpskPilotSymbols zero bits as the coherent phase reference; all other
/// modulations map bits directly.
IqBufferd modulate(const BitVec& bits, const ProtocolConfig& cfg,
                   double amplitude = 1.0);

/// Receiver oracle: BPSK coherent with squaring carrier recovery and
/// pilot-resolved sign, FSK/MSK noncoherent dual-tone energy, OOK envelope
/// chain, CSS dual-chirp correlation. Inverse of modulate() over a noiseless
/// channel.
DemodResult demodulate(const IqBufferd& rx, const ProtocolConfig& cfg);

/// FSK tone offset (Hz) used by modulate/demodulate for a modulation family:
/// orthogonal spacing R/2 for Fsk, R/4 for Msk.
double fsk_tone_offset_hz(const ProtocolConfig& cfg);

/// CSS sweep bandwidth used by modulate/demodulate (fixed fraction of fs).
double css_bandwidth_hz(const ProtocolConfig& cfg);

}  // namespace aiot
