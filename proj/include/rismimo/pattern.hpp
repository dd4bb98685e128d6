#pragma once

// Far-field evaluation of a fed reflectarray under a phase mask.
//
//   E(u) = sum_n A_n * Gamma_n * cos^qe(theta_u) * exp(j k r_n . u)
//
// A_n is the spherical-wave feed illumination, Gamma_n the element reflection for the
// element's state (including the optional angle-of-incidence model). Realized gain is the
// pattern directivity (4 pi U_peak / P_rad over the forward hemisphere) scaled by
// spillover, element reflection power and the assembly loss efficiency.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rismimo/common.hpp"
#include "rismimo/geometry.hpp"

namespace rismimo {

/// Per-group control: either one-bit states (1 = ON, nominal 180 deg) or ideal continuous
/// phases (bypass of quantization, unit-amplitude reflection).
struct PhaseMask {
  std::vector<std::uint8_t> states;
  std::vector<double> phases_deg;

  static PhaseMask binary(std::vector<std::uint8_t> s) { return {std::move(s), {}}; }
  static PhaseMask continuous(std::vector<double> p) { return {{}, std::move(p)}; }
  static PhaseMask uniform(int group_count, std::uint8_t state = 0) {
    return binary(std::vector<std::uint8_t>(group_count, state));
  }

  bool is_continuous() const { return !phases_deg.empty(); }
  std::size_t size() const { return is_continuous() ? phases_deg.size() : states.size(); }
  std::string bitstring() const;
};

/// Per-element complex feed illumination, normalized so sum |A_n|^2 = 1.
std::vector<cplx> illumination(const AntennaAssembly& assembly);

/// Per-element complex reflection for the mask (grouping resolved, incidence model applied).
std::vector<cplx> element_reflections(const AntennaAssembly& assembly, const PhaseMask& mask);

struct AngularGrid {
  double az_min = -90.0;
  double az_max = 90.0;
  double az_step = 0.25;
  double el_min = -90.0;
  double el_max = 90.0;
  double el_step = 0.25;

  static AngularGrid hemisphere(double step) { return {-90, 90, step, -90, 90, step}; }
  std::vector<double> az() const;
  std::vector<double> el() const;
  bool covers_hemisphere() const;
  void validate() const;
};

struct FarFieldPattern {
  std::vector<double> az_deg;
  std::vector<double> el_deg;
  std::vector<cplx> copol;  // row-major: [el index][az index]
  std::vector<cplx> xpol;
  double total_power = 0.0;  // radiated power integrated over the forward hemisphere
  double efficiency = 1.0;   // realized gain = directivity * efficiency
  std::vector<std::string> warnings;

  std::size_t index(std::size_t iel, std::size_t iaz) const { return iel * az_deg.size() + iaz; }
  double intensity(std::size_t iel, std::size_t iaz) const { return std::norm(copol[index(iel, iaz)]); }
};

struct PatternMetrics {
  double peak_gain_dbi = 0.0;
  double directivity_dbi = 0.0;
  Direction peak_direction;
  std::optional<double> sll_db;   // highest sidelobe relative to peak, along principal cuts
  std::optional<double> hpbw_az_deg;
  std::optional<double> hpbw_el_deg;
  double cross_pol_db = 0.0;
};

/// Realized-gain efficiency of an assembly under a mask: spillover * reflection power *
/// loss efficiency * blockage.
double realized_efficiency(const AntennaAssembly& assembly, const PhaseMask& mask);

/// Precomputed aperture excitation for fast repeated field evaluation.
class ApertureField {
 public:
  ApertureField(const AntennaAssembly& assembly, const PhaseMask& mask);
  /// Same geometry, explicit per-element weights (A_n * Gamma_n).
  ApertureField(const AntennaAssembly& assembly, std::vector<cplx> weights);

  cplx field(const Direction& d) const;
  double intensity(const Direction& d) const { return std::norm(field(d)); }
  /// Integral of |E|^2 over the forward hemisphere on a grid of the given step.
  double total_power(double step_deg) const;
  /// Fields over a grid, row-major [el][az].
  std::vector<cplx> grid_fields(const AngularGrid& grid) const;

  const std::vector<cplx>& weights() const { return weights_; }

 private:
  int n_x_;
  int n_y_;
  double period_mm_;
  double k_;
  double element_q_;
  std::vector<cplx> weights_;
};

/// Power integral of row-major grid intensities with the cos(el) solid-angle weight
/// (trapezoidal in az and el).
double integrate_intensity(const std::vector<double>& az_deg, const std::vector<double>& el_deg,
                           const std::vector<double>& intensity);

FarFieldPattern far_field(const AntennaAssembly& assembly, const PhaseMask& mask,
                          const AngularGrid& grid = AngularGrid{});

/// Throws ComputeError when the main lobe cannot be bracketed by nulls on the grid.
PatternMetrics pattern_metrics(const FarFieldPattern& pattern);

/// 10 log10(4 pi A / lambda^2).
double directivity_upper_bound_dbi(double aperture_area_m2, double freq_ghz);

struct BeamEvaluation {
  Direction peak;
  double directivity_dbi = 0.0;
  double gain_dbi = 0.0;
};

/// Directivity and realized gain of the beam nearest `look` (local peak search within
/// `window_deg`); total power integrated on a hemisphere grid of `step_deg`.
BeamEvaluation evaluate_beam(const AntennaAssembly& assembly, const PhaseMask& mask,
                             const Direction& look, double step_deg = 0.5, double window_deg = 6.0);

std::string pattern_to_csv(const FarFieldPattern& pattern);

}  // namespace rismimo
