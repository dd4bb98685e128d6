#pragma once

// Beam synthesis for the one-bit aperture: required phases, grouping + quantization,
// wide-lobe codewords, hierarchical codebooks and noisy beam training.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rismimo/geometry.hpp"
#include "rismimo/pattern.hpp"

namespace rismimo {

/// k (|r_feed - r_n| - r_n . u(target)) mod 360, degrees in [0, 360).
double required_phase(const AntennaAssembly& assembly, int element_index, const Direction& target);

/// 0 -> state_0 (0 deg), 1 -> state_1 (180 deg). Exact ties at 90/270 go to state_1.
std::uint8_t quantize_one_bit(double phase_deg);

struct SynthesisOptions {
  bool compensate_incidence = false;
  bool continuous = false;  // bypass quantization (ideal phase per group)
};

struct Sector {
  double az_min = -60.0;
  double az_max = 60.0;
  double el_min = 0.0;
  double el_max = 0.0;

  Direction center() const { return {(az_min + az_max) / 2.0, (el_min + el_max) / 2.0}; }
  double az_width() const { return az_max - az_min; }
  bool contains(const Direction& d, double tol = 1e-9) const {
    return d.az_deg >= az_min - tol && d.az_deg <= az_max + tol && d.el_deg >= el_min - tol &&
           d.el_deg <= el_max + tol;
  }
  void validate() const;
};

struct Codeword {
  PhaseMask mask;
  Direction target;
  Sector sector;
  int level = 0;
  int index = 0;
};

/// Per-group phases (degrees) before quantization: circular mean of the members' required
/// phases, optionally pre-corrected for the angle-dependent reflection phase.
std::vector<double> group_phases(const AntennaAssembly& assembly, const Direction& target,
                                 bool compensate_incidence);

Codeword synthesize_codeword(const AntennaAssembly& assembly, const Direction& target,
                             const SynthesisOptions& options = {});

struct ScanPoint {
  Direction target;
  Direction peak;
  double pointing_error_deg = 0.0;
  double gain_dbi = 0.0;
  double loss_db = 0.0;  // broadside gain minus this gain
};

std::vector<ScanPoint> scan_evaluation(const AntennaAssembly& assembly,
                                       const std::vector<Direction>& directions,
                                       const SynthesisOptions& options = {}, double step_deg = 0.5);

/// Half-power width estimate of the full-aperture beam steered to `az_deg`, degrees.
double narrow_beamwidth_deg(const AntennaAssembly& assembly, double az_deg);

struct WideBeam {
  Codeword codeword;
  int subapertures = 1;
  std::vector<Direction> directions;  // per sub-aperture, low x to high x
  double ripple_db = 0.0;
  std::string note;
};

/// Splits the columns into contiguous sub-apertures, each steered to the center of its slice
/// of the sector (az). `subapertures` = 0 picks ceil(sector width / narrow beamwidth).
/// With `phase_align`, each block gets a constant phase offset that keeps the steering phase
/// continuous across block boundaries; without it the blocks are plain restrictions of the
/// narrow codewords.
WideBeam synthesize_wide_beam(const AntennaAssembly& assembly, const Sector& sector,
                              const SynthesisOptions& options = {}, int subapertures = 0,
                              bool phase_align = true);

/// max - min realized gain (dB) over the sector interior on an az cut at the sector's
/// center elevation.
double sector_ripple_db(const AntennaAssembly& assembly, const PhaseMask& mask, const Sector& sector,
                        double step_deg = 0.5);

struct Codebook {
  std::vector<std::vector<Codeword>> levels;
  int branching = 2;
  Sector scan;

  const std::vector<Codeword>& leaves() const { return levels.back(); }
  int codeword_count() const;
  /// Flat id of (level, index), stable across runs.
  int id(int level, int index) const;
  std::string to_json() const;
};

/// Level l holds branching^(l+1) codewords splitting the scan sector in az, each a wide beam
/// over its sector (a narrow beam once the sector is within one beamwidth).
Codebook build_codebook(const AntennaAssembly& assembly, const Sector& scan, int levels,
                        int branching = 2, const SynthesisOptions& options = {});

struct TrainingConfig {
  double snr_db = 5.0;
  bool widening = true;
  double accept_threshold_db = -6.0;
};

struct TrainingResult {
  int leaf_index = -1;
  int pilots_used = 0;
  int widenings_triggered = 0;
  bool success = false;
};

/// Received power per codeword is tabulated once on an az/el grid and interpolated.
class BeamTrainer {
 public:
  BeamTrainer(const AntennaAssembly& assembly, Codebook codebook, double az_step_deg = 0.5,
              double el_step_deg = 1.0);

  /// Linear realized gain of codeword (level, index) toward `d`.
  double gain(int level, int index, const Direction& d) const;
  /// Noise variance per pilot: mean leaf boresight gain / snr.
  double noise_variance(double snr_db) const;

  TrainingResult train(const Direction& truth, const TrainingConfig& cfg, std::uint64_t seed) const;
  /// Leaf with the largest noiseless gain toward `truth`.
  int exhaustive_leaf(const Direction& truth) const;

  const Codebook& codebook() const { return codebook_; }

 private:
  Codebook codebook_;
  std::vector<double> az_;
  std::vector<double> el_;
  std::vector<std::vector<double>> table_;  // per flat id, row-major [el][az]
  double mean_leaf_gain_ = 0.0;
};

struct MonteCarloSummary {
  int trials = 0;
  double success_with = 0.0;     // success rate with widening
  double success_without = 0.0;  // success rate without
  double pilots_with = 0.0;      // mean pilots per trial
  double pilots_without = 0.0;
  double mean_widenings = 0.0;
  double paired_diff_mean = 0.0;  // mean of (with - without) per-trial success
  double paired_diff_se = 0.0;
};

/// Paired trials: both arms see the same ground truth and the same pilot noise per codeword.
/// Ground truth is uniform over the codebook's scan sector.
MonteCarloSummary training_monte_carlo(const BeamTrainer& trainer, int trials, const TrainingConfig& cfg,
                                       std::uint64_t seed);

}  // namespace rismimo
