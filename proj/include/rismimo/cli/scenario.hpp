#pragma once

// Scenario file: nested sections mirroring the module inputs. Every key is optional and
// defaults to the prototype configuration; unknown keys are rejected.

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "rismimo/element.hpp"
#include "rismimo/feed.hpp"
#include "rismimo/geometry.hpp"
#include "rismimo/link.hpp"
#include "rismimo/pattern.hpp"
#include "rismimo/synthesis.hpp"

namespace rismimo::cli {

struct ElementSection {
  ElementGeometry geometry;
  bool from_geometry = true;  // start circuit from geometry_to_circuit
  double c_patch_ff = 0.0;    // explicit start values when from_geometry is false
  double l_patch_nh = 0.0;
  double l_groove_nh = 0.0;
  double l_via_nh = 0.0;
  DiodeModel diode;
  double freq_ghz = 26.0;
  DesignTargets targets;
  int max_rounds = 20;
};

struct ArraySection {
  int n_x = 32;
  int n_y = 32;
  double period_mm = 5.0;
  int group_size = 2;
  std::string group_axis = "y";
  std::string polarization = "H";
};

struct FeedSection {
  double x_mm = -82.0;
  double y_mm = 0.0;
  double z_mm = 150.0;
  double q = 6.5;
  double gain_dbi = 10.0;
};

struct AntennaSection {
  double freq_ghz = 26.0;
  double cross_pol_db = -15.19;
  double element_q = kDefaultElementPatternExponent;
  double loss_efficiency = kDefaultLossEfficiency;
  double blockage_db = 0.0;
  bool incidence = true;
  double incidence_beta = 0.004;
  double incidence_amplitude_exp = 0.5;
};

struct PatternSection {
  AngularGrid grid;
  double target_az = 0.0;
  double target_el = 0.0;
  bool continuous = false;
  bool compensate_incidence = false;
};

struct SteerSection {
  std::vector<std::vector<double>> directions = {{-60, 0}, {-30, 0}, {0, 0}, {30, 0}, {60, 0},
                                                 {0, -30}, {0, -10}, {0, 10}, {0, 30}};
  bool continuous = false;
  bool compensate_incidence = false;
  double step_deg = 0.5;
};

struct WidebeamSection {
  double az_min = 0.0;
  double az_max = 30.0;
  double el = 0.0;
  int subapertures = 0;
  bool phase_align = true;
  bool continuous = false;
  double cut_step_deg = 0.25;
};

struct FeedSearchSection {
  FeedSearchSpace space;
  double offset_mm = 10.0;
  double target_az = 0.0;
  double target_el = 0.0;
  double step_deg = 0.5;
};

struct LinkSection {
  LinkScenario scenario;
  std::string modulation = "64QAM";
  std::vector<double> evm_distances = {1, 2, 4, 6, 8, 10, 12, 14, 16, 18, 20};
  int evm_symbols = 100000;
};

struct AclrSection {
  OfdmParams ofdm;
  int n_symbols = 14;
  std::string pa_kind = "rapp";
  double pa_saturation = 4.0;
  double pa_smoothness = 2.0;
  int segment = 4096;
  std::vector<double> centers_ghz = {25.2, 26.8};
  std::vector<double> aod_deg = {0, 10, 20, 30, 40, 50, 60};
  double channel_bw_mhz = 400.0;
  double adjacent_offset_mhz = 400.0;
  double limit_dbc = -28.0;
};

struct DualSection {
  LinkScenario scenario = dual_stream_scenario();
  StreamGains gains;
  XpdModel xpd;
};

struct PowerSection {
  double candidate_w = 15.8;
  double baseline_w = 25.6;
};

struct TrainingSection {
  Sector scan;
  int levels = 5;
  int branching = 2;
  double snr_db = 5.0;
  double accept_threshold_db = -6.0;
  int trials = 1000;
  bool continuous = false;
};

struct Scenario {
  std::uint64_t rng_seed = 20240601;
  ElementSection element;
  ArraySection array;
  FeedSection feed;
  AntennaSection antenna;
  PatternSection pattern;
  SteerSection steer;
  WidebeamSection widebeam;
  FeedSearchSection feed_search;
  LinkSection link;
  AclrSection aclr;
  DualSection dual;
  FrameConfig frame = prototype_frame();
  PowerSection power;
  TrainingSection training;
};

/// Parses YAML text. `source` names the input in error messages.
Scenario load_scenario_text(const std::string& text, const std::string& source = "<scenario>");
Scenario load_scenario_file(const std::string& path);

/// Applies a dotted-key override such as ("array.n_x", "16"); the value is parsed as YAML.
void apply_override(Scenario& s, const std::string& key, const std::string& value);

/// Checks cross-field invariants (enum strings, ranges); throws ConfigError.
void validate(const Scenario& s);

/// Every key with its resolved value.
nlohmann::ordered_json to_json(const Scenario& s);
/// FNV-1a 64 of the canonical JSON dump, hex.
std::string scenario_hash(const Scenario& s);

std::vector<std::string> scenario_keys();

/// Start circuit for the element optimizer.
ElementCircuit element_start_circuit(const Scenario& s);
/// Assembly with the optimized element (optimizer run from the scenario start circuit).
/// The optimizer result is copied to `element_result` when given.
AntennaAssembly build_assembly(const Scenario& s, OptimizeResult* element_result = nullptr);

}  // namespace rismimo::cli
