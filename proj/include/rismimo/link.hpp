#pragma once

// Link-level models: budget/SNR, EVM, CP-OFDM + PA for ACLR, dual-polarized SINR, NR peak
// rate and power comparison.

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "rismimo/common.hpp"
#include "rismimo/geometry.hpp"

namespace rismimo {

enum class Modulation { QPSK, QAM16, QAM64, QAM256 };

std::string_view to_string(Modulation m);
Modulation modulation_from_string(std::string_view s);
int bits_per_symbol(Modulation m);

/// Unit-average-power square constellation.
std::vector<cplx> constellation(Modulation m);

struct LinkScenario {
  double distance_m = 4.0;
  Direction aod;
  double center_freq_ghz = 25.2;
  double bandwidth_mhz = 400.0;
  double tx_power_dbm = 1.0;
  double tx_gain_dbi = 22.2;
  double rx_gain_dbi = 22.0;
  double lna_gain_db = 30.0;
  double noise_figure_db = 5.0;
  double tx_evm_floor = 0.03;
  Modulation modulation = Modulation::QAM64;

  void validate() const;
};

inline constexpr double kThermalNoiseDbmPerHz = -174.0;
inline constexpr double kEvmLimit64Qam = 0.08;

double path_loss_fspl(double distance_m, double freq_ghz);
double noise_power_dbm(double bandwidth_mhz, double noise_figure_db);
/// Received SNR; the LNA gain scales signal and noise alike so only the chain NF enters.
double link_budget(const LinkScenario& s);

double evm_closed_form(double snr_db, double tx_evm_floor);
/// Monte Carlo EVM: random constellation symbols plus AWGN at `snr_db` and a Gaussian
/// transmitter error of RMS `tx_evm_floor`.
double simulate_evm(double snr_db, double tx_evm_floor, Modulation m, std::size_t n_symbols, std::uint64_t seed);
double simulate_evm(const LinkScenario& s, std::size_t n_symbols, std::uint64_t seed);

struct EvmPoint {
  double distance_m;
  double snr_db;
  double evm_percent;
  bool pass;
};

std::vector<EvmPoint> evm_vs_distance(const LinkScenario& s, const std::vector<double>& distances_m);
std::string evm_to_csv(const std::vector<EvmPoint>& rows);

// ---------------------------------------------------------------------------

struct OfdmParams {
  int fft_size = 16384;
  int occupied = 3168;  // 264 PRB x 12 at 120 kHz ~ 380 MHz
  int cp_length = 1152;
  int rolloff = 1024;   // WOLA ramp length (samples), <= cp_length
  double scs_khz = 120.0;
  Modulation modulation = Modulation::QAM64;

  double sample_rate_hz() const { return fft_size * scs_khz * 1e3; }
  void validate() const;
};

/// CP-OFDM with random QAM on the centered occupied band and WOLA edge windowing between
/// symbols. Average power is 1 in expectation.
std::vector<cplx> ofdm_waveform(const OfdmParams& p, int n_symbols, std::uint64_t seed);

enum class PaKind { Ideal, Rapp };

struct PaModel {
  PaKind kind = PaKind::Rapp;
  double saturation = 4.0;  // linear amplitude, relative to unit RMS input
  double smoothness = 2.0;

  void validate() const;
};

std::vector<cplx> apply_pa(const std::vector<cplx>& x, const PaModel& pa);

struct Channel {
  double center_hz = 0.0;  // baseband offset
  double bandwidth_hz = 400e6;
};

/// Averaged Hann-window periodogram, two-sided, bins ordered from -fs/2.
struct Psd {
  std::vector<double> freq_hz;
  std::vector<double> power;  // per bin
  double bin_hz = 0.0;
};

Psd welch_psd(const std::vector<cplx>& x, double sample_rate_hz, int segment = 4096);
double channel_power(const Psd& psd, const Channel& ch);

/// 10 log10(P_adjacent / P_designated) per adjacent channel.
std::vector<double> aclr(const std::vector<cplx>& x, double sample_rate_hz, const Channel& designated,
                         const std::vector<Channel>& adjacent, int segment = 4096);

// ---------------------------------------------------------------------------

struct XpdModel {
  double h_leakage_db = -15.19;
  double v_leakage_db = -10.16;

  void validate() const;
};

struct StreamGains {
  double h_dbi = 22.01;
  double v_dbi = 22.11;
};

struct DualStreamResult {
  double snr_h_db = 0.0;
  double snr_v_db = 0.0;
  double sinr_h_db = 0.0;
  double sinr_v_db = 0.0;
};

/// Each stream's interference is the other stream's received power times the leakage of
/// the victim stream's antenna.
DualStreamResult dual_stream_sinr(const StreamGains& gains, const XpdModel& xpd, const LinkScenario& s);

LinkScenario dual_stream_scenario();

// ---------------------------------------------------------------------------

struct FrameConfig {
  std::string slot_pattern = "DDDSU";
  int s_dl = 10;
  int s_guard = 2;
  int s_ul = 2;
  double scs_khz = 120.0;
  int cc_count = 4;
  double cc_bandwidth_mhz = 200.0;
  int layers = 2;
  int modulation_order = 6;
  double max_code_rate = 948.0 / 1024.0;
  double scaling = 1.0;
  double overhead = 0.18;
  int prb_per_cc = 132;

  void validate() const;
};

double dl_duty(const FrameConfig& f);
double peak_rate_3gpp(const FrameConfig& f);

/// Candidate overhead values from the NR peak-rate tables (FR1/FR2, DL/UL), ranked by
/// distance of the resulting rate from `target_bps`; other parameters fixed.
struct RateCalibration {
  double overhead = 0.0;
  int prb_per_cc = 0;
  double rate_bps = 0.0;
  double rel_error = 0.0;
};
std::vector<RateCalibration> calibrate_peak_rate(const FrameConfig& base, double target_bps);

inline constexpr double kPrototypePeakRateBps = 5.17e9;

/// Frame used by the prototype scenario: nominal parameters with the calibrated overhead.
FrameConfig prototype_frame();

double power_saving(double p_candidate_w, double p_baseline_w);

}  // namespace rismimo
