#pragma once

// One-bit RIS element: lumped equivalent circuit, reflection response and
// coordinate-sweep structure optimization.
//
// Circuit topology (normal incidence, seen from free space):
//
//   Z_in = Z_patch || Z_diode_branch || Z_substrate
//
//   Z_patch        = R_loss + jw(L_p + L_g) + 1/(jw C_p)
//   Z_diode_branch = Z_diode(state) + jw L_v
//   Z_substrate    = Z_c tanh(gamma h)   (grounded substrate = shorted line)
//
// Z_diode(ON)  = R_on + jw L_on
// Z_diode(OFF) = (R_off || 1/(jw C_off)) + jw L_off

#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rismimo/common.hpp"

namespace rismimo {

struct ElementGeometry {
  double period_mm = 5.0;
  double patch_l_mm = 2.68;
  double patch_w_mm = 1.92;
  double groove_l_mm = 0.74;
  double groove_w_mm = 0.86;
  double substrate_h_mm = 0.508;
  double eps_r = 3.66;
  double tan_delta = 0.0037;

  void validate() const;
};

enum class DiodeState { Off = 0, On = 1 };

struct DiodeModel {
  double r_on_ohm = 5.0;
  double l_on_nh = 0.05;
  double r_off_ohm = 10e3;
  double c_off_ff = 35.0;
  double l_off_nh = 0.05;

  void validate() const;
};

struct ElementCircuit {
  double c_patch_ff = 0.0;
  double l_patch_nh = 0.0;
  double l_groove_nh = 0.0;
  double l_via_nh = 0.0;
  double r_loss_ohm = 0.0;
  // Substrate line: electrical length beta*h at line_ref_freq_ghz, scales linearly with frequency.
  double line_electrical_length_rad = 0.0;
  double line_ref_freq_ghz = 26.0;
  double line_z0_ohm = kEta0;
  double line_tan_delta = 0.0;
  DiodeModel diode;

  void validate() const;
};

/// Input impedance; `open` marks the open-circuit sentinel (exact lossless resonance).
struct Impedance {
  cplx value{0.0, 0.0};
  bool open = false;
};

struct ReflectionCoefficient {
  double amplitude = 0.0;
  double phase_deg = 0.0;  // (-180, 180]

  cplx value() const { return std::polar(amplitude, deg2rad(phase_deg)); }
};

// Surrogate calibration constants for geometry_to_circuit. These are fitted so that
// the reference geometry lands near the one-bit design point; they are not physics claims.
inline constexpr double kPatchCapPerMm = 5.0;         // fF per mm of (patch area / gap)
inline constexpr double kPatchIndPerMm = 0.04;        // nH per mm of patch length
inline constexpr double kGrooveIndPerMm = 0.8;        // nH per mm of groove length
inline constexpr double kViaIndPerMm = 0.3;           // nH per mm of substrate height
inline constexpr double kElementLossOhm = 0.5;        // patch conductor loss

/// Free-space reference impedance used for the reflection coefficient.
inline constexpr double kElementReferenceImpedance = kEta0;

Impedance element_impedance(const ElementCircuit& circuit, DiodeState state, double freq_ghz);
ReflectionCoefficient reflection_from_impedance(const Impedance& z);
ReflectionCoefficient reflection_coefficient(const ElementCircuit& circuit, DiodeState state,
                                             double freq_ghz);
/// Wrapped phase(ON) - phase(OFF), degrees in (-180, 180].
double phase_difference(const ElementCircuit& circuit, double freq_ghz);

ElementCircuit geometry_to_circuit(const ElementGeometry& geom);
/// Reference design: geometry_to_circuit(ElementGeometry{}).
ElementCircuit default_element_circuit();

// ---------------------------------------------------------------------------
// Structure optimization

struct DesignTargets {
  double min_amplitude = 0.85;
  double phase_diff_deg = 180.0;
  double phase_tolerance_deg = 5.0;
};

enum class CircuitParam { PatchCapacitance, GrooveInductance, ViaInductance, DiodeInductance };

std::string_view to_string(CircuitParam p);
CircuitParam circuit_param_from_string(std::string_view name);
double get_param(const ElementCircuit& c, CircuitParam p);
void set_param(ElementCircuit& c, CircuitParam p, double value);

struct ParamSweep {
  CircuitParam param;
  double lo;
  double hi;
  double step;

  std::vector<double> grid() const;
};

/// Sweep order C_p, L_g, L_v, diode L.
std::vector<ParamSweep> default_sweeps();

struct ElementMetrics {
  double amp_on = 0.0;
  double amp_off = 0.0;
  double phase_diff_deg = 0.0;
  double objective = 0.0;  // lower is better
  bool targets_met = false;
};

/// Penalty weight on the phase-difference deviation, per deg^2.
inline constexpr double kPhasePenaltyPerDeg2 = 0.01;

/// Circular distance between a wrapped phase difference and the target, degrees in [0, 180].
double phase_deviation_deg(double phase_diff_deg, double target_deg);

ElementMetrics evaluate_element(const ElementCircuit& c, const DesignTargets& targets, double freq_ghz);

struct SweepTraceRow {
  int round;
  CircuitParam param;
  double value;
  double amp_on;
  double amp_off;
  double phase_diff_deg;
  double objective;
};

struct OptimizeResult {
  ElementCircuit circuit;
  ElementMetrics metrics;
  int rounds = 0;           // full sweep rounds executed
  bool targets_met = false; // false flags "targets unmet"
  std::vector<double> objective_history;  // objective at start and after each round
  std::vector<SweepTraceRow> trace;
};

/// Alternating one-dimensional sweeps. Minimizes
///   J = -min(|G_on|, |G_off|) + lambda * dev(dphi, target)^2
/// over each swept parameter in turn (others frozen). A parameter moves only when a grid
/// point strictly improves J; ties resolve to the lowest grid index. Stops when a round
/// changes nothing, the targets are met, or max_rounds is reached.
OptimizeResult optimize_structure(const ElementCircuit& start, const DesignTargets& targets,
                                  std::span<const ParamSweep> sweeps, int max_rounds,
                                  double freq_ghz = 26.0);

std::string trace_to_csv(const std::vector<SweepTraceRow>& trace);

}  // namespace rismimo
