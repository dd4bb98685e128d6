#pragma once

// Feed placement: an analytic aperture-efficiency model (spillover, taper) searched on a
// coarse grid plus simplex polish, then candidate neighborhoods re-scored through the
// pattern engine.

#include <limits>
#include <string>
#include <vector>

#include "rismimo/geometry.hpp"
#include "rismimo/synthesis.hpp"

namespace rismimo {

/// Fraction of the feed's cos^q power pattern intercepted by the aperture rectangle
/// (midpoint rule, `samples` per side).
double spillover_efficiency(const AntennaAssembly& assembly, int samples = 128);

/// |sum |A_n||^2 / (N sum |A_n|^2) over the element illumination magnitudes.
double illumination_efficiency(const AntennaAssembly& assembly);

/// One-bit phase quantization loss of a uniformly distributed phase front, 20 log10(2/pi).
inline constexpr double kOneBitLossDb = -3.9224;

struct EfficiencyBreakdown {
  double spillover = 0.0;
  double illumination = 0.0;
  double directivity_dbi = 0.0;  // aperture upper bound
  double predicted_gain_dbi = 0.0;
};

/// predicted = upper bound + 10 log10(eta_s eta_i) + loss efficiency + one-bit loss.
EfficiencyBreakdown aperture_efficiency(const AntennaAssembly& assembly, bool one_bit = true);

struct FeedSearchSpace {
  double x_min = -150.0, x_max = 50.0;
  double y_min = -50.0, y_max = 50.0;
  double z_min = 60.0, z_max = 250.0;
  double resolution_mm = 10.0;
  std::vector<Vec3> offsets = default_offsets(10.0);

  static std::vector<Vec3> default_offsets(double spacing);  // 3x3x3 cube incl. zero
  void validate() const;
  bool contains(const Vec3& p) const;
};

struct FeedSample {
  Vec3 position;
  EfficiencyBreakdown eff;
  double realized_gain_dbi = std::numeric_limits<double>::quiet_NaN();
};

struct CoarseResult {
  Vec3 grid_best;  // best coarse-grid node
  EfficiencyBreakdown grid_best_eff;
  Vec3 position;   // after simplex polish
  EfficiencyBreakdown eff;
  std::vector<FeedSample> grid;
};

CoarseResult coarse_optimize_feed(const FeedSearchSpace& space, const AntennaAssembly& assembly_template,
                                  bool one_bit = true);

struct RefineResult {
  Vec3 position;
  double realized_gain_dbi = 0.0;
  double baseline_gain_dbi = 0.0;  // zero offset
  std::vector<FeedSample> samples;
};

/// Re-scores candidate + offsets with a synthesized codeword toward `target`. Offsets that
/// would put the feed at z <= 0 are skipped.
RefineResult refine_feed(const Vec3& candidate, const std::vector<Vec3>& offsets,
                         const AntennaAssembly& assembly_template, const Direction& target = {},
                         const SynthesisOptions& options = {}, double step_deg = 0.5);

std::string feed_samples_to_csv(const std::vector<FeedSample>& samples);

}  // namespace rismimo
