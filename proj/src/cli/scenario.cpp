#include "rismimo/cli/scenario.hpp"

#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

namespace rismimo::cli {
namespace {

using Json = nlohmann::ordered_json;

std::string where(const YAML::Mark& m) {
  if (m.line < 0) return {};
  return fmt::format(" (line {}, column {})", m.line + 1, m.column + 1);
}

template <class T>
T decode(const YAML::Node& n, const std::string& key) {
  try {
    if constexpr (std::is_same_v<T, std::vector<double>> ||
                  std::is_same_v<T, std::vector<std::vector<double>>>) {
      if (!n.IsSequence()) throw ConfigError(fmt::format("{}: expected a list{}", key, where(n.Mark())));
    } else {
      if (!n.IsScalar()) throw ConfigError(fmt::format("{}: expected a scalar{}", key, where(n.Mark())));
    }
    return n.as<T>();
  } catch (const YAML::Exception& e) {
    throw ConfigError(fmt::format("{}: invalid value{}", key, where(n.Mark())));
  }
}

struct Field {
  std::function<void(Scenario&, const YAML::Node&)> set;
  std::function<Json(const Scenario&)> get;
};

using Registry = std::map<std::string, std::map<std::string, Field>>;

template <class T, class Acc>
void bind_field(Registry& r, const std::string& section, const std::string& key, Acc acc) {
  const std::string full = section.empty() ? key : section + "." + key;
  r[section][key] = Field{
      [acc, full](Scenario& s, const YAML::Node& n) { acc(s) = decode<T>(n, full); },
      [acc](const Scenario& s) { return Json(acc(const_cast<Scenario&>(s))); }};
}

#define RISMIMO_BIND(section, key, member)                                                   \
  bind_field<std::remove_reference_t<decltype(std::declval<Scenario&>().member)>>(                \
      r, section, key, [](Scenario& s) -> auto& { return s.member; })

Registry make_registry() {
  Registry r;
  RISMIMO_BIND("", "rng_seed", rng_seed);

  RISMIMO_BIND("element", "period_mm", element.geometry.period_mm);
  RISMIMO_BIND("element", "patch_l_mm", element.geometry.patch_l_mm);
  RISMIMO_BIND("element", "patch_w_mm", element.geometry.patch_w_mm);
  RISMIMO_BIND("element", "groove_l_mm", element.geometry.groove_l_mm);
  RISMIMO_BIND("element", "groove_w_mm", element.geometry.groove_w_mm);
  RISMIMO_BIND("element", "substrate_h_mm", element.geometry.substrate_h_mm);
  RISMIMO_BIND("element", "eps_r", element.geometry.eps_r);
  RISMIMO_BIND("element", "tan_delta", element.geometry.tan_delta);
  RISMIMO_BIND("element", "from_geometry", element.from_geometry);
  RISMIMO_BIND("element", "c_patch_ff", element.c_patch_ff);
  RISMIMO_BIND("element", "l_patch_nh", element.l_patch_nh);
  RISMIMO_BIND("element", "l_groove_nh", element.l_groove_nh);
  RISMIMO_BIND("element", "l_via_nh", element.l_via_nh);
  RISMIMO_BIND("element", "diode_r_on_ohm", element.diode.r_on_ohm);
  RISMIMO_BIND("element", "diode_l_on_nh", element.diode.l_on_nh);
  RISMIMO_BIND("element", "diode_r_off_ohm", element.diode.r_off_ohm);
  RISMIMO_BIND("element", "diode_c_off_ff", element.diode.c_off_ff);
  RISMIMO_BIND("element", "diode_l_off_nh", element.diode.l_off_nh);
  RISMIMO_BIND("element", "freq_ghz", element.freq_ghz);
  RISMIMO_BIND("element", "min_amplitude", element.targets.min_amplitude);
  RISMIMO_BIND("element", "phase_diff_deg", element.targets.phase_diff_deg);
  RISMIMO_BIND("element", "phase_tolerance_deg", element.targets.phase_tolerance_deg);
  RISMIMO_BIND("element", "max_rounds", element.max_rounds);

  RISMIMO_BIND("array", "n_x", array.n_x);
  RISMIMO_BIND("array", "n_y", array.n_y);
  RISMIMO_BIND("array", "period_mm", array.period_mm);
  RISMIMO_BIND("array", "group_size", array.group_size);
  RISMIMO_BIND("array", "group_axis", array.group_axis);
  RISMIMO_BIND("array", "polarization", array.polarization);

  RISMIMO_BIND("feed", "x_mm", feed.x_mm);
  RISMIMO_BIND("feed", "y_mm", feed.y_mm);
  RISMIMO_BIND("feed", "z_mm", feed.z_mm);
  RISMIMO_BIND("feed", "q", feed.q);
  RISMIMO_BIND("feed", "gain_dbi", feed.gain_dbi);

  RISMIMO_BIND("antenna", "freq_ghz", antenna.freq_ghz);
  RISMIMO_BIND("antenna", "cross_pol_db", antenna.cross_pol_db);
  RISMIMO_BIND("antenna", "element_q", antenna.element_q);
  RISMIMO_BIND("antenna", "loss_efficiency", antenna.loss_efficiency);
  RISMIMO_BIND("antenna", "blockage_db", antenna.blockage_db);
  RISMIMO_BIND("antenna", "incidence", antenna.incidence);
  RISMIMO_BIND("antenna", "incidence_beta", antenna.incidence_beta);
  RISMIMO_BIND("antenna", "incidence_amplitude_exp", antenna.incidence_amplitude_exp);

  RISMIMO_BIND("pattern", "az_min", pattern.grid.az_min);
  RISMIMO_BIND("pattern", "az_max", pattern.grid.az_max);
  RISMIMO_BIND("pattern", "az_step", pattern.grid.az_step);
  RISMIMO_BIND("pattern", "el_min", pattern.grid.el_min);
  RISMIMO_BIND("pattern", "el_max", pattern.grid.el_max);
  RISMIMO_BIND("pattern", "el_step", pattern.grid.el_step);
  RISMIMO_BIND("pattern", "target_az", pattern.target_az);
  RISMIMO_BIND("pattern", "target_el", pattern.target_el);
  RISMIMO_BIND("pattern", "continuous", pattern.continuous);
  RISMIMO_BIND("pattern", "compensate_incidence", pattern.compensate_incidence);

  RISMIMO_BIND("steer", "directions", steer.directions);
  RISMIMO_BIND("steer", "continuous", steer.continuous);
  RISMIMO_BIND("steer", "compensate_incidence", steer.compensate_incidence);
  RISMIMO_BIND("steer", "step_deg", steer.step_deg);

  RISMIMO_BIND("widebeam", "az_min", widebeam.az_min);
  RISMIMO_BIND("widebeam", "az_max", widebeam.az_max);
  RISMIMO_BIND("widebeam", "el", widebeam.el);
  RISMIMO_BIND("widebeam", "subapertures", widebeam.subapertures);
  RISMIMO_BIND("widebeam", "phase_align", widebeam.phase_align);
  RISMIMO_BIND("widebeam", "continuous", widebeam.continuous);
  RISMIMO_BIND("widebeam", "cut_step_deg", widebeam.cut_step_deg);

  RISMIMO_BIND("feed_search", "x_min", feed_search.space.x_min);
  RISMIMO_BIND("feed_search", "x_max", feed_search.space.x_max);
  RISMIMO_BIND("feed_search", "y_min", feed_search.space.y_min);
  RISMIMO_BIND("feed_search", "y_max", feed_search.space.y_max);
  RISMIMO_BIND("feed_search", "z_min", feed_search.space.z_min);
  RISMIMO_BIND("feed_search", "z_max", feed_search.space.z_max);
  RISMIMO_BIND("feed_search", "resolution_mm", feed_search.space.resolution_mm);
  RISMIMO_BIND("feed_search", "offset_mm", feed_search.offset_mm);
  RISMIMO_BIND("feed_search", "target_az", feed_search.target_az);
  RISMIMO_BIND("feed_search", "target_el", feed_search.target_el);
  RISMIMO_BIND("feed_search", "step_deg", feed_search.step_deg);

  RISMIMO_BIND("link", "distance_m", link.scenario.distance_m);
  RISMIMO_BIND("link", "aod_az", link.scenario.aod.az_deg);
  RISMIMO_BIND("link", "aod_el", link.scenario.aod.el_deg);
  RISMIMO_BIND("link", "center_freq_ghz", link.scenario.center_freq_ghz);
  RISMIMO_BIND("link", "bandwidth_mhz", link.scenario.bandwidth_mhz);
  RISMIMO_BIND("link", "tx_power_dbm", link.scenario.tx_power_dbm);
  RISMIMO_BIND("link", "tx_gain_dbi", link.scenario.tx_gain_dbi);
  RISMIMO_BIND("link", "rx_gain_dbi", link.scenario.rx_gain_dbi);
  RISMIMO_BIND("link", "lna_gain_db", link.scenario.lna_gain_db);
  RISMIMO_BIND("link", "noise_figure_db", link.scenario.noise_figure_db);
  RISMIMO_BIND("link", "tx_evm_floor", link.scenario.tx_evm_floor);
  RISMIMO_BIND("link", "modulation", link.modulation);
  RISMIMO_BIND("link", "evm_distances", link.evm_distances);
  RISMIMO_BIND("link", "evm_symbols", link.evm_symbols);

  RISMIMO_BIND("aclr", "fft_size", aclr.ofdm.fft_size);
  RISMIMO_BIND("aclr", "occupied", aclr.ofdm.occupied);
  RISMIMO_BIND("aclr", "cp_length", aclr.ofdm.cp_length);
  RISMIMO_BIND("aclr", "rolloff", aclr.ofdm.rolloff);
  RISMIMO_BIND("aclr", "scs_khz", aclr.ofdm.scs_khz);
  RISMIMO_BIND("aclr", "n_symbols", aclr.n_symbols);
  RISMIMO_BIND("aclr", "pa_kind", aclr.pa_kind);
  RISMIMO_BIND("aclr", "pa_saturation", aclr.pa_saturation);
  RISMIMO_BIND("aclr", "pa_smoothness", aclr.pa_smoothness);
  RISMIMO_BIND("aclr", "segment", aclr.segment);
  RISMIMO_BIND("aclr", "centers_ghz", aclr.centers_ghz);
  RISMIMO_BIND("aclr", "aod_deg", aclr.aod_deg);
  RISMIMO_BIND("aclr", "channel_bw_mhz", aclr.channel_bw_mhz);
  RISMIMO_BIND("aclr", "adjacent_offset_mhz", aclr.adjacent_offset_mhz);
  RISMIMO_BIND("aclr", "limit_dbc", aclr.limit_dbc);

  RISMIMO_BIND("dual", "distance_m", dual.scenario.distance_m);
  RISMIMO_BIND("dual", "center_freq_ghz", dual.scenario.center_freq_ghz);
  RISMIMO_BIND("dual", "bandwidth_mhz", dual.scenario.bandwidth_mhz);
  RISMIMO_BIND("dual", "tx_power_dbm", dual.scenario.tx_power_dbm);
  RISMIMO_BIND("dual", "rx_gain_dbi", dual.scenario.rx_gain_dbi);
  RISMIMO_BIND("dual", "noise_figure_db", dual.scenario.noise_figure_db);
  RISMIMO_BIND("dual", "h_gain_dbi", dual.gains.h_dbi);
  RISMIMO_BIND("dual", "v_gain_dbi", dual.gains.v_dbi);
  RISMIMO_BIND("dual", "h_leakage_db", dual.xpd.h_leakage_db);
  RISMIMO_BIND("dual", "v_leakage_db", dual.xpd.v_leakage_db);

  RISMIMO_BIND("frame", "slot_pattern", frame.slot_pattern);
  RISMIMO_BIND("frame", "s_dl", frame.s_dl);
  RISMIMO_BIND("frame", "s_guard", frame.s_guard);
  RISMIMO_BIND("frame", "s_ul", frame.s_ul);
  RISMIMO_BIND("frame", "scs_khz", frame.scs_khz);
  RISMIMO_BIND("frame", "cc_count", frame.cc_count);
  RISMIMO_BIND("frame", "cc_bandwidth_mhz", frame.cc_bandwidth_mhz);
  RISMIMO_BIND("frame", "layers", frame.layers);
  RISMIMO_BIND("frame", "modulation_order", frame.modulation_order);
  RISMIMO_BIND("frame", "max_code_rate", frame.max_code_rate);
  RISMIMO_BIND("frame", "scaling", frame.scaling);
  RISMIMO_BIND("frame", "overhead", frame.overhead);
  RISMIMO_BIND("frame", "prb_per_cc", frame.prb_per_cc);

  RISMIMO_BIND("power", "candidate_w", power.candidate_w);
  RISMIMO_BIND("power", "baseline_w", power.baseline_w);

  RISMIMO_BIND("training", "az_min", training.scan.az_min);
  RISMIMO_BIND("training", "az_max", training.scan.az_max);
  RISMIMO_BIND("training", "el_min", training.scan.el_min);
  RISMIMO_BIND("training", "el_max", training.scan.el_max);
  RISMIMO_BIND("training", "levels", training.levels);
  RISMIMO_BIND("training", "branching", training.branching);
  RISMIMO_BIND("training", "snr_db", training.snr_db);
  RISMIMO_BIND("training", "accept_threshold_db", training.accept_threshold_db);
  RISMIMO_BIND("training", "trials", training.trials);
  RISMIMO_BIND("training", "continuous", training.continuous);
  return r;
}

#undef RISMIMO_BIND

const Registry& registry() {
  static const Registry r = make_registry();
  return r;
}

const Field& lookup(const std::string& dotted) {
  const auto& r = registry();
  const auto dot = dotted.find('.');
  const std::string section = dot == std::string::npos ? "" : dotted.substr(0, dot);
  const std::string key = dot == std::string::npos ? dotted : dotted.substr(dot + 1);
  auto s = r.find(section);
  if (s != r.end()) {
    auto f = s->second.find(key);
    if (f != s->second.end()) return f->second;
  }
  throw ConfigError(fmt::format("unknown scenario key '{}'", dotted));
}

std::string mark_of(const YAML::Node& n) { return where(n.Mark()); }

}  // namespace

Scenario load_scenario_text(const std::string& text, const std::string& source) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError(fmt::format("{}: parse error{}: {}", source, where(e.mark), e.msg));
  }
  Scenario s;
  if (root.IsNull()) {
    validate(s);
    return s;
  }
  if (!root.IsMap()) throw ConfigError(fmt::format("{}: top level must be a mapping", source));
  const auto& r = registry();
  for (const auto& top : root) {
    const std::string name = top.first.as<std::string>();
    if (auto f = r.at("").find(name); f != r.at("").end()) {
      f->second.set(s, top.second);
      continue;
    }
    auto sec = r.find(name);
    if (name.empty() || sec == r.end()) {
      throw ConfigError(fmt::format("{}: unknown section '{}'{}", source, name, mark_of(top.first)));
    }
    if (top.second.IsNull()) continue;
    if (!top.second.IsMap()) {
      throw ConfigError(fmt::format("{}: section '{}' must be a mapping{}", source, name, mark_of(top.second)));
    }
    for (const auto& kv : top.second) {
      const std::string key = kv.first.as<std::string>();
      auto f = sec->second.find(key);
      if (f == sec->second.end()) {
        throw ConfigError(fmt::format("{}: unknown key '{}.{}'{}", source, name, key, mark_of(kv.first)));
      }
      f->second.set(s, kv.second);
    }
  }
  validate(s);
  return s;
}

Scenario load_scenario_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open scenario '{}'", path));
  std::stringstream ss;
  ss << in.rdbuf();
  return load_scenario_text(ss.str(), path);
}

void apply_override(Scenario& s, const std::string& key, const std::string& value) {
  const Field& f = lookup(key);
  YAML::Node n;
  try {
    n = YAML::Load(value);
  } catch (const YAML::ParserException& e) {
    throw ConfigError(fmt::format("--{}: cannot parse '{}'", key, value));
  }
  f.set(s, n);
}

void validate(const Scenario& s) {
  s.element.geometry.validate();
  s.element.diode.validate();
  require(s.element.max_rounds >= 1, "element.max_rounds must be >= 1");
  require(s.element.freq_ghz > 0, "element.freq_ghz must be > 0");
  if (!s.element.from_geometry) {
    require(s.element.c_patch_ff > 0 && s.element.l_patch_nh >= 0 && s.element.l_groove_nh >= 0 &&
                s.element.l_via_nh >= 0,
            "element: explicit circuit values must be set (c_patch_ff > 0, inductances >= 0)");
  }
  axis_from_string(s.array.group_axis);
  polarization_from_string(s.array.polarization);
  modulation_from_string(s.link.modulation);
  require(s.aclr.pa_kind == "rapp" || s.aclr.pa_kind == "ideal", "aclr.pa_kind must be 'rapp' or 'ideal'");
  require(s.aclr.n_symbols >= 1, "aclr.n_symbols must be >= 1");
  require(!s.aclr.centers_ghz.empty() && !s.aclr.aod_deg.empty(), "aclr: centers and AoDs must be non-empty");
  require(s.aclr.channel_bw_mhz > 0, "aclr.channel_bw_mhz must be > 0");
  s.pattern.grid.validate();
  Direction{s.pattern.target_az, s.pattern.target_el}.validate();
  require(!s.steer.directions.empty(), "steer.directions must be non-empty");
  for (const auto& d : s.steer.directions) {
    require(d.size() == 2, "steer.directions entries must be [az, el] pairs");
    Direction{d[0], d[1]}.validate();
  }
  require(s.steer.step_deg > 0, "steer.step_deg must be > 0");
  Sector{s.widebeam.az_min, s.widebeam.az_max, s.widebeam.el, s.widebeam.el}.validate();
  require(s.widebeam.subapertures >= 0, "widebeam.subapertures must be >= 0");
  require(s.widebeam.cut_step_deg > 0, "widebeam.cut_step_deg must be > 0");
  s.feed_search.space.validate();
  require(s.feed_search.offset_mm > 0, "feed_search.offset_mm must be > 0");
  require(s.link.evm_symbols >= 1, "link.evm_symbols must be >= 1");
  for (double d : s.link.evm_distances) require(d > 0, "link.evm_distances must be > 0");
  s.frame.validate();
  require(s.power.baseline_w > 0 && s.power.candidate_w >= 0, "power: wattages must be positive");
  s.training.scan.validate();
  require(s.training.levels >= 1 && s.training.branching >= 2, "training: levels >= 1 and branching >= 2");
  require(s.training.trials >= 1, "training.trials must be >= 1");
  s.dual.xpd.validate();
}

nlohmann::ordered_json to_json(const Scenario& s) {
  Json out;
  for (const auto& [section, fields] : registry()) {
    for (const auto& [key, f] : fields) {
      if (section.empty()) out[key] = f.get(s);
      else out[section][key] = f.get(s);
    }
  }
  return out;
}

std::string scenario_hash(const Scenario& s) {
  const std::string text = to_json(s).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return fmt::format("{:016x}", h);
}

std::vector<std::string> scenario_keys() {
  std::vector<std::string> keys;
  for (const auto& [section, fields] : registry()) {
    for (const auto& [key, f] : fields) keys.push_back(section.empty() ? key : section + "." + key);
  }
  return keys;
}

ElementCircuit element_start_circuit(const Scenario& s) {
  ElementCircuit c = geometry_to_circuit(s.element.geometry);
  if (!s.element.from_geometry) {
    c.c_patch_ff = s.element.c_patch_ff;
    c.l_patch_nh = s.element.l_patch_nh;
    c.l_groove_nh = s.element.l_groove_nh;
    c.l_via_nh = s.element.l_via_nh;
  }
  c.diode = s.element.diode;
  return c;
}

AntennaAssembly build_assembly(const Scenario& s, OptimizeResult* element_result) {
  AntennaAssembly a;
  a.array = RisArray::make(s.array.n_x, s.array.n_y, s.array.period_mm, s.array.group_size,
                           axis_from_string(s.array.group_axis), polarization_from_string(s.array.polarization));
  a.feed.position_mm = {s.feed.x_mm, s.feed.y_mm, s.feed.z_mm};
  a.feed.q = s.feed.q;
  a.feed.gain_dbi = s.feed.gain_dbi;
  a.feed.polarization = a.array.polarization;
  a.freq_ghz = s.antenna.freq_ghz;
  a.cross_pol_db = s.antenna.cross_pol_db;
  a.element_q = s.antenna.element_q;
  a.loss_efficiency = s.antenna.loss_efficiency;
  a.blockage_db = s.antenna.blockage_db;
  a.incidence.enabled = s.antenna.incidence;
  a.incidence.beta_deg_per_deg2 = s.antenna.incidence_beta;
  a.incidence.amplitude_exponent = s.antenna.incidence_amplitude_exp;
  const auto sweeps = default_sweeps();
  OptimizeResult opt = optimize_structure(element_start_circuit(s), s.element.targets, sweeps,
                                          s.element.max_rounds, s.element.freq_ghz);
  a.element = opt.circuit;
  if (element_result) *element_result = std::move(opt);
  a.validate();
  return a;
}

}  // namespace rismimo::cli
