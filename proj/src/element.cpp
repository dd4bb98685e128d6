#include "rismimo/element.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <limits>
#include <sstream>

#include "rismimo/parallel.hpp"

namespace rismimo {

void ElementGeometry::validate() const {
  require(period_mm > 0 && patch_l_mm > 0 && patch_w_mm > 0 && groove_l_mm >= 0 &&
              groove_w_mm >= 0 && substrate_h_mm > 0,
          "element geometry: lengths must be positive");
  require(patch_l_mm < period_mm && patch_w_mm < period_mm,
          "element geometry: patch must fit inside the period");
  require(groove_l_mm < patch_l_mm && groove_w_mm < patch_w_mm,
          "element geometry: groove must fit inside the patch");
  require(eps_r >= 1.0, "element geometry: eps_r must be >= 1");
  require(tan_delta >= 0.0, "element geometry: tan_delta must be >= 0");
}

void DiodeModel::validate() const {
  require(r_on_ohm >= 0 && r_off_ohm >= 0, "diode: resistances must be >= 0");
  require(l_on_nh >= 0 && l_off_nh >= 0, "diode: inductances must be >= 0");
  require(c_off_ff > 0, "diode: OFF capacitance must be > 0");
}

void ElementCircuit::validate() const {
  require(c_patch_ff > 0, "element circuit: patch capacitance must be > 0");
  require(l_patch_nh >= 0 && l_groove_nh >= 0 && l_via_nh >= 0,
          "element circuit: inductances must be >= 0");
  require(r_loss_ohm >= 0, "element circuit: loss resistance must be >= 0");
  require(line_electrical_length_rad >= 0 && line_ref_freq_ghz > 0,
          "element circuit: invalid substrate line length");
  require(line_z0_ohm > 0, "element circuit: line impedance must be > 0");
  require(line_tan_delta >= 0, "element circuit: line loss tangent must be >= 0");
  diode.validate();
}

namespace {

cplx diode_impedance(const DiodeModel& d, DiodeState state, double omega) {
  if (state == DiodeState::On) return {d.r_on_ohm, omega * d.l_on_nh * 1e-9};
  cplx z_shunt{0.0, 0.0};
  if (d.r_off_ohm > 0) z_shunt = 1.0 / cplx(1.0 / d.r_off_ohm, omega * d.c_off_ff * 1e-15);
  return z_shunt + cplx(0.0, omega * d.l_off_nh * 1e-9);
}

}  // namespace

Impedance element_impedance(const ElementCircuit& c, DiodeState state, double freq_ghz) {
  require(freq_ghz > 0, "element_impedance: frequency must be > 0");
  const double omega = 2.0 * kPi * freq_ghz * 1e9;

  const cplx z_patch{c.r_loss_ohm,
                     omega * (c.l_patch_nh + c.l_groove_nh) * 1e-9 - 1.0 / (omega * c.c_patch_ff * 1e-15)};
  const cplx z_diode = diode_impedance(c.diode, state, omega) + cplx(0.0, omega * c.l_via_nh * 1e-9);
  const double beta_h = c.line_electrical_length_rad * freq_ghz / c.line_ref_freq_ghz;
  const cplx gamma_h{beta_h * c.line_tan_delta / 2.0, beta_h};
  const cplx z_sub = c.line_z0_ohm * std::tanh(gamma_h);

  const cplx branches[] = {z_patch, z_diode, z_sub};
  cplx y{0.0, 0.0};
  for (const cplx& z : branches) {
    if (z == cplx(0.0, 0.0)) return {};
    y += 1.0 / z;
  }
  if (std::abs(y) * kElementReferenceImpedance < 1e-15) {
    return {cplx(std::numeric_limits<double>::infinity(), 0.0), true};
  }
  const cplx z = 1.0 / y;
  if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) {
    return {cplx(std::numeric_limits<double>::infinity(), 0.0), true};
  }
  return {z, false};
}

ReflectionCoefficient reflection_from_impedance(const Impedance& z) {
  if (z.open) return {1.0, 0.0};
  const cplx g = (z.value - kElementReferenceImpedance) / (z.value + kElementReferenceImpedance);
  return {std::abs(g), wrap_deg(rad2deg(std::arg(g)))};
}

ReflectionCoefficient reflection_coefficient(const ElementCircuit& c, DiodeState state,
                                             double freq_ghz) {
  return reflection_from_impedance(element_impedance(c, state, freq_ghz));
}

double phase_difference(const ElementCircuit& c, double freq_ghz) {
  const auto on = reflection_coefficient(c, DiodeState::On, freq_ghz);
  const auto off = reflection_coefficient(c, DiodeState::Off, freq_ghz);
  return wrap_deg(on.phase_deg - off.phase_deg);
}

ElementCircuit geometry_to_circuit(const ElementGeometry& g) {
  g.validate();
  ElementCircuit c;
  const double gap = g.period_mm - g.patch_l_mm;
  c.c_patch_ff = kPatchCapPerMm * g.patch_l_mm * g.patch_w_mm / gap;
  c.l_patch_nh = kPatchIndPerMm * g.patch_l_mm;
  c.l_groove_nh = kGrooveIndPerMm * g.groove_l_mm;
  c.l_via_nh = kViaIndPerMm * g.substrate_h_mm;
  c.r_loss_ohm = kElementLossOhm;
  c.line_ref_freq_ghz = 26.0;
  const double sqrt_eps = std::sqrt(g.eps_r);
  c.line_electrical_length_rad =
      2.0 * kPi * c.line_ref_freq_ghz * 1e9 * sqrt_eps * g.substrate_h_mm * 1e-3 / kSpeedOfLight;
  c.line_z0_ohm = kEta0 / sqrt_eps;
  c.line_tan_delta = g.tan_delta;
  return c;
}

ElementCircuit default_element_circuit() { return geometry_to_circuit(ElementGeometry{}); }

// ---------------------------------------------------------------------------

std::string_view to_string(CircuitParam p) {
  switch (p) {
    case CircuitParam::PatchCapacitance: return "c_patch_ff";
    case CircuitParam::GrooveInductance: return "l_groove_nh";
    case CircuitParam::ViaInductance: return "l_via_nh";
    case CircuitParam::DiodeInductance: return "l_diode_nh";
  }
  return "?";
}

CircuitParam circuit_param_from_string(std::string_view name) {
  for (auto p : {CircuitParam::PatchCapacitance, CircuitParam::GrooveInductance,
                 CircuitParam::ViaInductance, CircuitParam::DiodeInductance}) {
    if (to_string(p) == name) return p;
  }
  throw ConfigError(fmt::format("unknown circuit parameter '{}'", name));
}

double get_param(const ElementCircuit& c, CircuitParam p) {
  switch (p) {
    case CircuitParam::PatchCapacitance: return c.c_patch_ff;
    case CircuitParam::GrooveInductance: return c.l_groove_nh;
    case CircuitParam::ViaInductance: return c.l_via_nh;
    case CircuitParam::DiodeInductance: return c.diode.l_on_nh;
  }
  return 0.0;
}

void set_param(ElementCircuit& c, CircuitParam p, double v) {
  switch (p) {
    case CircuitParam::PatchCapacitance: c.c_patch_ff = v; break;
    case CircuitParam::GrooveInductance: c.l_groove_nh = v; break;
    case CircuitParam::ViaInductance: c.l_via_nh = v; break;
    case CircuitParam::DiodeInductance:
      c.diode.l_on_nh = v;
      c.diode.l_off_nh = v;
      break;
  }
}

std::vector<double> ParamSweep::grid() const {
  require(step > 0 && hi >= lo, fmt::format("invalid sweep for {}", to_string(param)));
  const auto n = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = lo + static_cast<double>(i) * step;
  return v;
}

std::vector<ParamSweep> default_sweeps() {
  return {
      {CircuitParam::PatchCapacitance, 2.0, 40.0, 0.25},
      {CircuitParam::GrooveInductance, 0.0, 1.2, 0.01},
      {CircuitParam::ViaInductance, 0.01, 0.8, 0.01},
      {CircuitParam::DiodeInductance, 0.0, 0.3, 0.005},
  };
}

double phase_deviation_deg(double phase_diff_deg, double target_deg) {
  return std::abs(wrap_deg(phase_diff_deg - target_deg));
}

ElementMetrics evaluate_element(const ElementCircuit& c, const DesignTargets& t, double freq_ghz) {
  const auto on = reflection_coefficient(c, DiodeState::On, freq_ghz);
  const auto off = reflection_coefficient(c, DiodeState::Off, freq_ghz);
  ElementMetrics m;
  m.amp_on = on.amplitude;
  m.amp_off = off.amplitude;
  m.phase_diff_deg = wrap_deg(on.phase_deg - off.phase_deg);
  const double dev = phase_deviation_deg(m.phase_diff_deg, t.phase_diff_deg);
  m.objective = -std::min(m.amp_on, m.amp_off) + kPhasePenaltyPerDeg2 * dev * dev;
  m.targets_met = std::min(m.amp_on, m.amp_off) >= t.min_amplitude && dev <= t.phase_tolerance_deg;
  return m;
}

OptimizeResult optimize_structure(const ElementCircuit& start, const DesignTargets& targets,
                                  std::span<const ParamSweep> sweeps, int max_rounds,
                                  double freq_ghz) {
  start.validate();
  require(max_rounds >= 1, "optimize_structure: max_rounds must be >= 1");
  std::vector<std::vector<double>> grids;
  for (const auto& s : sweeps) {
    const double v = get_param(start, s.param);
    require(v >= s.lo - 1e-12 && v <= s.hi + 1e-12,
            fmt::format("optimize_structure: start value {} of {} outside sweep [{}, {}]", v,
                        to_string(s.param), s.lo, s.hi));
    grids.push_back(s.grid());
  }

  OptimizeResult res;
  res.circuit = start;
  res.metrics = evaluate_element(start, targets, freq_ghz);
  res.objective_history.push_back(res.metrics.objective);

  while (!res.metrics.targets_met && res.rounds < max_rounds) {
    ++res.rounds;
    bool changed = false;
    for (std::size_t k = 0; k < sweeps.size(); ++k) {
      const auto param = sweeps[k].param;
      const auto& grid = grids[k];
      std::vector<ElementMetrics> evals(grid.size());
      parallel_for(grid.size(), [&](std::size_t i) {
        ElementCircuit trial = res.circuit;
        set_param(trial, param, grid[i]);
        evals[i] = evaluate_element(trial, targets, freq_ghz);
      });
      std::size_t best = grid.size();
      double best_obj = res.metrics.objective;
      for (std::size_t i = 0; i < grid.size(); ++i) {
        const auto& m = evals[i];
        res.trace.push_back({res.rounds, param, grid[i], m.amp_on, m.amp_off, m.phase_diff_deg, m.objective});
        if (m.objective < best_obj) {
          best_obj = m.objective;
          best = i;
        }
      }
      if (best < grid.size()) {
        set_param(res.circuit, param, grid[best]);
        res.metrics = evals[best];
        changed = true;
      }
    }
    res.objective_history.push_back(res.metrics.objective);
    if (!changed) break;
  }
  res.targets_met = res.metrics.targets_met;
  return res;
}

std::string trace_to_csv(const std::vector<SweepTraceRow>& trace) {
  std::ostringstream os;
  os << "round,parameter,value,amp_on,amp_off,phase_diff_deg,objective\n";
  for (const auto& r : trace) {
    os << fmt::format("{},{},{:.6g},{:.9f},{:.9f},{:.6f},{:.9f}\n", r.round, to_string(r.param),
                      r.value, r.amp_on, r.amp_off, r.phase_diff_deg, r.objective);
  }
  return os.str();
}

}  // namespace rismimo
