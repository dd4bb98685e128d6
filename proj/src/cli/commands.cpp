#include "rismimo/cli/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "rismimo/parallel.hpp"

namespace rismimo::cli {
namespace {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return fmt::format("{:016x}", h);
}

class Run {
 public:
  Run(const Scenario& s, const RunOptions& o) : scn(s), opts(o) {}

  const Scenario& scn;
  const RunOptions& opts;

  void write(const std::string& name, const std::string& content) {
    const fs::path p = opts.out_dir / name;
    std::ofstream out(p, std::ios::binary);
    if (!out) throw ConfigError(fmt::format("cannot write '{}'", p.string()));
    out << content;
    if (!out) throw ConfigError(fmt::format("write failed for '{}'", p.string()));
    outputs_.push_back({{"file", name}, {"bytes", content.size()}, {"fnv1a", fnv1a_hex(content)}});
  }
  void write_json(const std::string& name, const Json& j) { write(name, j.dump(2) + "\n"); }

  AntennaAssembly assembly() {
    OptimizeResult opt;
    AntennaAssembly a = build_assembly(scn, &opt);
    if (!opt.targets_met) {
      warn("element optimizer did not meet its targets");
      if (opts.strict) throw ComputeError("element targets unmet (--strict)");
    }
    return a;
  }

  void warn(const std::string& w) {
    std::cerr << "warning: " << w << "\n";
    warnings_.push_back(w);
  }

  const Json& outputs() const { return outputs_; }
  const std::vector<std::string>& warnings() const { return warnings_; }

 private:
  Json outputs_ = Json::array();
  std::vector<std::string> warnings_;
};

Json to_json(const Vec3& v) { return Json::array({v.x, v.y, v.z}); }
Json to_json(const Direction& d) { return Json{{"az_deg", d.az_deg}, {"el_deg", d.el_deg}}; }

Json to_json(const ElementCircuit& c) {
  return Json{{"c_patch_ff", c.c_patch_ff},   {"l_patch_nh", c.l_patch_nh},
              {"l_groove_nh", c.l_groove_nh}, {"l_via_nh", c.l_via_nh},
              {"r_loss_ohm", c.r_loss_ohm},   {"diode_l_on_nh", c.diode.l_on_nh},
              {"diode_l_off_nh", c.diode.l_off_nh}};
}

Json to_json(const EfficiencyBreakdown& e) {
  return Json{{"spillover", e.spillover},
              {"illumination", e.illumination},
              {"directivity_bound_dbi", e.directivity_dbi},
              {"predicted_gain_dbi", e.predicted_gain_dbi}};
}

SynthesisOptions synth(bool continuous, bool compensate = false) {
  SynthesisOptions o;
  o.continuous = continuous;
  o.compensate_incidence = compensate;
  return o;
}

// ---------------------------------------------------------------------------

void cmd_element_opt(Run& run) {
  const auto& e = run.scn.element;
  const ElementCircuit start = element_start_circuit(run.scn);
  const auto sweeps = default_sweeps();
  const OptimizeResult r = optimize_structure(start, e.targets, sweeps, e.max_rounds, e.freq_ghz);
  run.write("element_trace.csv", trace_to_csv(r.trace));
  const auto on = reflection_coefficient(r.circuit, DiodeState::On, e.freq_ghz);
  const auto off = reflection_coefficient(r.circuit, DiodeState::Off, e.freq_ghz);
  run.write_json("element.json",
                 Json{{"freq_ghz", e.freq_ghz},
                      {"start", to_json(start)},
                      {"optimized", to_json(r.circuit)},
                      {"on", {{"amplitude", on.amplitude}, {"phase_deg", on.phase_deg}}},
                      {"off", {{"amplitude", off.amplitude}, {"phase_deg", off.phase_deg}}},
                      {"phase_diff_deg", r.metrics.phase_diff_deg},
                      {"objective", r.metrics.objective},
                      {"rounds", r.rounds},
                      {"targets_met", r.targets_met},
                      {"objective_history", r.objective_history}});
  fmt::print("|G_on| {:.4f}  |G_off| {:.4f}  dphi {:.2f} deg  rounds {}  targets {}\n", on.amplitude,
             off.amplitude, r.metrics.phase_diff_deg, r.rounds, r.targets_met ? "met" : "UNMET");
  if (!r.targets_met) {
    run.warn("targets unmet");
    if (run.opts.strict) throw ComputeError("element targets unmet (--strict)");
  }
}

void cmd_pattern(Run& run) {
  const auto& p = run.scn.pattern;
  const AntennaAssembly a = run.assembly();
  const Direction target{p.target_az, p.target_el};
  const Codeword cw = synthesize_codeword(a, target, synth(p.continuous, p.compensate_incidence));
  const FarFieldPattern fp = far_field(a, cw.mask, p.grid);
  for (const auto& w : fp.warnings) run.warn(w);
  if (run.opts.strict && !fp.warnings.empty()) throw ComputeError("pattern warnings raised (--strict)");
  const PatternMetrics m = pattern_metrics(fp);
  run.write("pattern.csv", pattern_to_csv(fp));
  auto opt = [](const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); };
  run.write_json("pattern_metrics.json", Json{{"target", to_json(target)},
                                              {"mask", cw.mask.is_continuous() ? "continuous" : "one-bit"},
                                              {"peak_gain_dbi", m.peak_gain_dbi},
                                              {"directivity_dbi", m.directivity_dbi},
                                              {"efficiency", fp.efficiency},
                                              {"peak_direction", to_json(m.peak_direction)},
                                              {"sll_db", opt(m.sll_db)},
                                              {"hpbw_az_deg", opt(m.hpbw_az_deg)},
                                              {"hpbw_el_deg", opt(m.hpbw_el_deg)},
                                              {"cross_pol_db", m.cross_pol_db},
                                              {"warnings", fp.warnings}});
  fmt::print("gain {:.2f} dBi  D {:.2f} dBi  SLL {}  HPBW {} / {}\n", m.peak_gain_dbi, m.directivity_dbi,
             m.sll_db ? fmt::format("{:.2f} dB", *m.sll_db) : "n/a",
             m.hpbw_az_deg ? fmt::format("{:.2f}", *m.hpbw_az_deg) : "n/a",
             m.hpbw_el_deg ? fmt::format("{:.2f}", *m.hpbw_el_deg) : "n/a");
}

void cmd_steer(Run& run) {
  const auto& st = run.scn.steer;
  const AntennaAssembly a = run.assembly();
  std::vector<Direction> dirs;
  for (const auto& d : st.directions) dirs.push_back({d[0], d[1]});
  const auto opts = synth(st.continuous, st.compensate_incidence);
  const auto pts = scan_evaluation(a, dirs, opts, st.step_deg);
  std::string csv = "target_az,target_el,peak_az,peak_el,pointing_error_deg,gain_dbi,loss_db\n";
  Json cws = Json::array();
  for (const auto& p : pts) {
    csv += fmt::format("{:.4f},{:.4f},{:.4f},{:.4f},{:.4f},{:.4f},{:.4f}\n", p.target.az_deg, p.target.el_deg,
                       p.peak.az_deg, p.peak.el_deg, p.pointing_error_deg, p.gain_dbi, p.loss_db);
    const auto cw = synthesize_codeword(a, p.target, opts);
    cws.push_back({{"target", to_json(p.target)}, {"states", cw.mask.bitstring()}});
    fmt::print("({:6.1f},{:6.1f}) -> peak ({:7.2f},{:7.2f})  err {:.2f} deg  gain {:.2f} dBi  loss {:.2f} dB\n",
               p.target.az_deg, p.target.el_deg, p.peak.az_deg, p.peak.el_deg, p.pointing_error_deg, p.gain_dbi,
               p.loss_db);
  }
  run.write("steer.csv", csv);
  run.write_json("steer_codewords.json", cws);
}

void cmd_widebeam(Run& run) {
  const auto& w = run.scn.widebeam;
  const AntennaAssembly a = run.assembly();
  const Sector sector{w.az_min, w.az_max, w.el, w.el};
  const WideBeam wb = synthesize_wide_beam(a, sector, synth(w.continuous), w.subapertures, w.phase_align);
  if (!wb.note.empty()) run.warn(wb.note);

  AngularGrid cut;
  cut.az_min = std::max(-90.0, w.az_min - 30.0);
  cut.az_max = std::min(90.0, w.az_max + 30.0);
  cut.az_step = w.cut_step_deg;
  cut.el_min = cut.el_max = w.el;
  cut.el_step = 1.0;
  const FarFieldPattern fp = far_field(a, wb.codeword.mask, cut);
  std::string csv = "az_deg,gain_dbi,in_sector\n";
  for (std::size_t i = 0; i < fp.az_deg.size(); ++i) {
    const double g = db10(4.0 * kPi * fp.intensity(0, i) / fp.total_power * fp.efficiency);
    csv += fmt::format("{:.4f},{:.4f},{}\n", fp.az_deg[i], g, sector.contains({fp.az_deg[i], w.el}) ? 1 : 0);
  }
  run.write("widebeam_cut.csv", csv);
  Json dirs = Json::array();
  for (const auto& d : wb.directions) dirs.push_back(to_json(d));
  run.write_json("widebeam.json", Json{{"sector", {{"az_min", w.az_min}, {"az_max", w.az_max}, {"el", w.el}}},
                                       {"subapertures", wb.subapertures},
                                       {"phase_align", w.phase_align},
                                       {"directions", dirs},
                                       {"ripple_db", wb.ripple_db},
                                       {"narrow_beamwidth_deg", narrow_beamwidth_deg(a, sector.center().az_deg)},
                                       {"states", wb.codeword.mask.bitstring()},
                                       {"note", wb.note}});
  fmt::print("sector [{}, {}] deg  K = {}  ripple {:.2f} dB\n", w.az_min, w.az_max, wb.subapertures, wb.ripple_db);
}

void cmd_feed_opt(Run& run) {
  const auto& fs_ = run.scn.feed_search;
  const AntennaAssembly tmpl = run.assembly();
  FeedSearchSpace space = fs_.space;
  space.offsets = FeedSearchSpace::default_offsets(fs_.offset_mm);
  const CoarseResult coarse = coarse_optimize_feed(space, tmpl, true);
  run.write("feed_coarse.csv", feed_samples_to_csv(coarse.grid));
  const Direction target{fs_.target_az, fs_.target_el};
  const RefineResult ref = refine_feed(coarse.position, space.offsets, tmpl, target, {}, fs_.step_deg);
  run.write("feed_refine.csv", feed_samples_to_csv(ref.samples));
  const Vec3 ref_pos{-82.0, 0.0, 150.0};
  run.write_json("feed.json", Json{{"coarse_grid_best", to_json(coarse.grid_best)},
                                   {"coarse_grid_best_efficiency", to_json(coarse.grid_best_eff)},
                                   {"coarse_candidate", to_json(coarse.position)},
                                   {"coarse_candidate_efficiency", to_json(coarse.eff)},
                                   {"coarse_candidate_realized_gain_dbi", ref.baseline_gain_dbi},
                                   {"refined", to_json(ref.position)},
                                   {"refined_realized_gain_dbi", ref.realized_gain_dbi},
                                   {"prototype_position", to_json(ref_pos)},
                                   {"axial_deviation_mm", ref.position.z - ref_pos.z}});
  fmt::print("coarse ({:.2f}, {:.2f}, {:.2f}) {:.2f} dBi  ->  refined ({:.2f}, {:.2f}, {:.2f}) {:.2f} dBi\n",
             coarse.position.x, coarse.position.y, coarse.position.z, ref.baseline_gain_dbi, ref.position.x,
             ref.position.y, ref.position.z, ref.realized_gain_dbi);
}

LinkScenario link_scenario(const Scenario& s) {
  LinkScenario l = s.link.scenario;
  l.modulation = modulation_from_string(s.link.modulation);
  l.validate();
  return l;
}

void cmd_link(Run& run) {
  const LinkScenario l = link_scenario(run.scn);
  const double snr = link_budget(l);
  const double evm_cf = evm_closed_form(snr, l.tx_evm_floor);
  const double evm_mc = simulate_evm(l, static_cast<std::size_t>(run.scn.link.evm_symbols),
                                     derive_seed(run.scn.rng_seed, 1));
  run.write_json("link.json", Json{{"distance_m", l.distance_m},
                                   {"center_freq_ghz", l.center_freq_ghz},
                                   {"bandwidth_mhz", l.bandwidth_mhz},
                                   {"modulation", to_string(l.modulation)},
                                   {"fspl_db", path_loss_fspl(l.distance_m, l.center_freq_ghz)},
                                   {"noise_power_dbm", noise_power_dbm(l.bandwidth_mhz, l.noise_figure_db)},
                                   {"rx_power_dbm", l.tx_power_dbm + l.tx_gain_dbi + l.rx_gain_dbi -
                                                        path_loss_fspl(l.distance_m, l.center_freq_ghz)},
                                   {"snr_db", snr},
                                   {"evm_closed_form_pct", 100.0 * evm_cf},
                                   {"evm_monte_carlo_pct", 100.0 * evm_mc},
                                   {"evm_pass_8pct", evm_cf <= kEvmLimit64Qam}});
  fmt::print("SNR {:.2f} dB  EVM {:.2f}% (closed form) {:.2f}% (Monte Carlo)\n", snr, 100 * evm_cf, 100 * evm_mc);
}

void cmd_evm_sweep(Run& run) {
  const LinkScenario l = link_scenario(run.scn);
  std::vector<double> d = run.scn.link.evm_distances;
  std::sort(d.begin(), d.end());
  const auto pts = evm_vs_distance(l, d);
  std::string csv = "d_m,snr_db,evm_pct,evm_mc_pct,pass_8pct\n";
  Json rows = Json::array();
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const auto& p = pts[i];
    const double mc = simulate_evm(p.snr_db, l.tx_evm_floor, l.modulation,
                                   static_cast<std::size_t>(run.scn.link.evm_symbols),
                                   derive_seed(run.scn.rng_seed, 100 + i));
    csv += fmt::format("{:.4f},{:.4f},{:.4f},{:.4f},{}\n", p.distance_m, p.snr_db, p.evm_percent, 100 * mc,
                       p.pass ? 1 : 0);
    rows.push_back({{"d_m", p.distance_m}, {"snr_db", p.snr_db}, {"evm_pct", p.evm_percent}, {"pass", p.pass}});
  }
  run.write("evm_sweep.csv", csv);
  const bool all = std::all_of(pts.begin(), pts.end(), [](const EvmPoint& p) { return p.pass; });
  run.write_json("evm_sweep.json", Json{{"tx_evm_floor", l.tx_evm_floor}, {"all_pass", all}, {"points", rows}});
  fmt::print("{} distances, EVM {:.2f}% .. {:.2f}%, all <= 8%: {}\n", pts.size(), pts.front().evm_percent,
             pts.back().evm_percent, all ? "yes" : "no");
}

void cmd_aclr_sweep(Run& run) {
  const auto& c = run.scn.aclr;
  OfdmParams ofdm = c.ofdm;
  ofdm.modulation = modulation_from_string(run.scn.link.modulation);
  PaModel pa;
  pa.kind = c.pa_kind == "ideal" ? PaKind::Ideal : PaKind::Rapp;
  pa.saturation = c.pa_saturation;
  pa.smoothness = c.pa_smoothness;
  pa.validate();
  const double adj_offset = c.adjacent_offset_mhz * 1e6;
  const Channel designated{0.0, c.channel_bw_mhz * 1e6};
  const std::vector<Channel> adjacent{{-adj_offset, c.channel_bw_mhz * 1e6}, {adj_offset, c.channel_bw_mhz * 1e6}};

  // The baseband PA model has no frequency or direction dependence, so each (center, AoD)
  // configuration shares the waveform; only the radiated power toward the AoD differs.
  const auto x = apply_pa(ofdm_waveform(ofdm, c.n_symbols, derive_seed(run.scn.rng_seed, 2)), pa);
  const auto leak = aclr(x, ofdm.sample_rate_hz(), designated, adjacent, c.segment);

  AntennaAssembly a = run.assembly();
  std::string csv = "center_ghz,aod_deg,tx_gain_dbi,aclr_lower_dbc,aclr_upper_dbc,pass\n";
  Json rows = Json::array();
  bool all = true;
  for (double f : c.centers_ghz) {
    a.freq_ghz = f;
    for (double aod : c.aod_deg) {
      const Direction d{aod, 0.0};
      d.validate();
      const auto cw = synthesize_codeword(a, d);
      const double g = evaluate_beam(a, cw.mask, d, 1.0).gain_dbi;
      const bool pass = leak[0] < c.limit_dbc && leak[1] < c.limit_dbc;
      all = all && pass;
      csv += fmt::format("{:.3f},{:.2f},{:.4f},{:.4f},{:.4f},{}\n", f, aod, g, leak[0], leak[1], pass ? 1 : 0);
      rows.push_back({{"center_ghz", f}, {"aod_deg", aod}, {"tx_gain_dbi", g}, {"pass", pass}});
    }
  }
  run.write("aclr.csv", csv);
  run.write_json("aclr.json", Json{{"pa", {{"kind", c.pa_kind}, {"saturation", pa.saturation},
                                            {"smoothness", pa.smoothness}}},
                                   {"aclr_lower_dbc", leak[0]},
                                   {"aclr_upper_dbc", leak[1]},
                                   {"limit_dbc", c.limit_dbc},
                                   {"all_pass", all},
                                   {"configs", rows}});
  fmt::print("ACLR {:.2f} / {:.2f} dBc (limit {:.0f})  compliant: {}\n", leak[0], leak[1], c.limit_dbc,
             all ? "yes" : "no");
}

void cmd_dual_stream(Run& run) {
  const auto& d = run.scn.dual;
  LinkScenario l = d.scenario;
  l.validate();
  d.xpd.validate();
  const auto r = dual_stream_sinr(d.gains, d.xpd, l);
  std::string csv = "stream,tx_gain_dbi,leakage_db,snr_db,sinr_db\n";
  csv += fmt::format("H,{:.4f},{:.4f},{:.4f},{:.4f}\n", d.gains.h_dbi, d.xpd.h_leakage_db, r.snr_h_db, r.sinr_h_db);
  csv += fmt::format("V,{:.4f},{:.4f},{:.4f},{:.4f}\n", d.gains.v_dbi, d.xpd.v_leakage_db, r.snr_v_db, r.sinr_v_db);
  run.write("dual_stream.csv", csv);
  run.write_json("dual_stream.json", Json{{"distance_m", l.distance_m},
                                          {"center_freq_ghz", l.center_freq_ghz},
                                          {"bandwidth_mhz", l.bandwidth_mhz},
                                          {"snr_h_db", r.snr_h_db},
                                          {"snr_v_db", r.snr_v_db},
                                          {"sinr_h_db", r.sinr_h_db},
                                          {"sinr_v_db", r.sinr_v_db}});
  fmt::print("SINR H {:.2f} dB  V {:.2f} dB\n", r.sinr_h_db, r.sinr_v_db);
}

void cmd_rate(Run& run) {
  const FrameConfig& f = run.scn.frame;
  const double rate = peak_rate_3gpp(f);
  const auto cal = calibrate_peak_rate(f, kPrototypePeakRateBps);
  std::string csv = "overhead,prb_per_cc,rate_gbps,rel_error\n";
  for (const auto& c : cal) {
    csv += fmt::format("{:.2f},{},{:.6f},{:.6f}\n", c.overhead, c.prb_per_cc, c.rate_bps / 1e9, c.rel_error);
  }
  run.write("rate_calibration.csv", csv);
  const double saving = power_saving(run.scn.power.candidate_w, run.scn.power.baseline_w);
  run.write_json("rate.json", Json{{"peak_rate_bps", rate},
                                   {"peak_rate_gbps", rate / 1e9},
                                   {"reference_gbps", kPrototypePeakRateBps / 1e9},
                                   {"rel_error", rate / kPrototypePeakRateBps - 1.0},
                                   {"dl_duty", dl_duty(f)},
                                   {"frame",
                                    {{"slot_pattern", f.slot_pattern},
                                     {"s_dl", f.s_dl},
                                     {"s_guard", f.s_guard},
                                     {"s_ul", f.s_ul},
                                     {"scs_khz", f.scs_khz},
                                     {"cc_count", f.cc_count},
                                     {"cc_bandwidth_mhz", f.cc_bandwidth_mhz},
                                     {"layers", f.layers},
                                     {"modulation_order", f.modulation_order},
                                     {"max_code_rate", f.max_code_rate},
                                     {"scaling", f.scaling},
                                     {"overhead", f.overhead},
                                     {"prb_per_cc", f.prb_per_cc}}},
                                   {"power_w", {{"candidate", run.scn.power.candidate_w},
                                                {"baseline", run.scn.power.baseline_w}}},
                                   {"power_saving_pct", 100.0 * saving}});
  fmt::print("peak rate {:.4f} Gbps  power saving {:.2f}%\n", rate / 1e9, 100 * saving);
}

void cmd_train(Run& run) {
  const auto& t = run.scn.training;
  const AntennaAssembly a = run.assembly();
  const Codebook cb = build_codebook(a, t.scan, t.levels, t.branching, synth(t.continuous));
  run.write("codebook.json", cb.to_json() + "\n");
  const BeamTrainer trainer(a, cb);
  TrainingConfig cfg;
  cfg.snr_db = t.snr_db;
  cfg.accept_threshold_db = t.accept_threshold_db;
  const auto mc = training_monte_carlo(trainer, t.trials, cfg, run.scn.rng_seed);
  run.write_json("training.json", Json{{"levels", t.levels},
                                       {"branching", t.branching},
                                       {"snr_db", t.snr_db},
                                       {"accept_threshold_db", t.accept_threshold_db},
                                       {"trials", mc.trials},
                                       {"success_with_widening", mc.success_with},
                                       {"success_without_widening", mc.success_without},
                                       {"pilots_with_widening", mc.pilots_with},
                                       {"pilots_without_widening", mc.pilots_without},
                                       {"mean_widenings", mc.mean_widenings},
                                       {"paired_diff_mean", mc.paired_diff_mean},
                                       {"paired_diff_se", mc.paired_diff_se}});
  fmt::print("success {:.3f} with widening, {:.3f} without  (diff {:+.4f} +- {:.4f})  pilots {:.2f} vs {:.2f}\n",
             mc.success_with, mc.success_without, mc.paired_diff_mean, mc.paired_diff_se, mc.pilots_with,
             mc.pilots_without);
}

void cmd_geometry(Run& run) {
  const auto& s = run.scn;
  const RisArray arr = RisArray::make(s.array.n_x, s.array.n_y, s.array.period_mm, s.array.group_size,
                                      axis_from_string(s.array.group_axis),
                                      polarization_from_string(s.array.polarization));
  FeedModel feed;
  feed.position_mm = {s.feed.x_mm, s.feed.y_mm, s.feed.z_mm};
  feed.q = s.feed.q;
  feed.validate();
  const auto pos = element_positions(arr);
  std::string csv = "index,row,col,group,x_mm,y_mm,incidence_deg\n";
  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300, tmin = 1e300, tmax = -1e300;
  for (std::size_t i = 0; i < pos.size(); ++i) {
    const int row = static_cast<int>(i) / arr.n_x, col = static_cast<int>(i) % arr.n_x;
    const double th = incidence_angle_deg(feed, pos[i]);
    csv += fmt::format("{},{},{},{},{:.4f},{:.4f},{:.4f}\n", i, row, col, arr.grouping.group_of[i], pos[i].x,
                       pos[i].y, th);
    xmin = std::min(xmin, pos[i].x);
    xmax = std::max(xmax, pos[i].x);
    ymin = std::min(ymin, pos[i].y);
    ymax = std::max(ymax, pos[i].y);
    tmin = std::min(tmin, th);
    tmax = std::max(tmax, th);
  }
  run.write("geometry.csv", csv);
  run.write_json("geometry.json", Json{{"element_count", arr.element_count()},
                                       {"group_count", arr.grouping.group_count},
                                       {"x_extent_mm", {xmin, xmax}},
                                       {"y_extent_mm", {ymin, ymax}},
                                       {"aperture_area_m2", arr.aperture_area_m2()},
                                       {"feed_mm", to_json(feed.position_mm)},
                                       {"incidence_range_deg", {tmin, tmax}}});
  fmt::print("{} elements, {} groups, x [{:.1f}, {:.1f}] mm, y [{:.1f}, {:.1f}] mm\n", arr.element_count(),
             arr.grouping.group_count, xmin, xmax, ymin, ymax);
}

using Handler = std::function<void(Run&)>;

const std::vector<std::pair<std::string, Handler>>& handlers() {
  static const std::vector<std::pair<std::string, Handler>> h = {
      {"element-opt", cmd_element_opt}, {"pattern", cmd_pattern},         {"steer", cmd_steer},
      {"widebeam", cmd_widebeam},       {"feed-opt", cmd_feed_opt},       {"link", cmd_link},
      {"evm-sweep", cmd_evm_sweep},     {"aclr-sweep", cmd_aclr_sweep},   {"dual-stream", cmd_dual_stream},
      {"rate", cmd_rate},               {"train", cmd_train},             {"geometry", cmd_geometry}};
  return h;
}

/// Pulls `--a.b=v` and `--a.b v` pairs out of leftover arguments.
std::vector<std::pair<std::string, std::string>> parse_overrides(const std::vector<std::string>& rest) {
  std::vector<std::pair<std::string, std::string>> out;
  for (std::size_t i = 0; i < rest.size(); ++i) {
    const std::string& a = rest[i];
    if (a.rfind("--", 0) != 0) throw ConfigError(fmt::format("unexpected argument '{}'", a));
    std::string key = a.substr(2), value;
    if (auto eq = key.find('='); eq != std::string::npos) {
      value = key.substr(eq + 1);
      key = key.substr(0, eq);
    } else {
      if (i + 1 >= rest.size()) throw ConfigError(fmt::format("--{}: missing value", key));
      value = rest[++i];
    }
    out.emplace_back(key, value);
  }
  return out;
}

}  // namespace

std::vector<std::string> subcommands() {
  std::vector<std::string> names;
  for (const auto& [n, h] : handlers()) names.push_back(n);
  return names;
}

void run_subcommand(const std::string& name, const Scenario& scenario, const RunOptions& opts) {
  const auto& hs = handlers();
  auto it = std::find_if(hs.begin(), hs.end(), [&](const auto& p) { return p.first == name; });
  if (it == hs.end()) throw ConfigError(fmt::format("unknown subcommand '{}'", name));
  std::error_code ec;
  fs::create_directories(opts.out_dir, ec);
  if (ec) throw ConfigError(fmt::format("cannot create output directory '{}': {}", opts.out_dir.string(), ec.message()));

  const auto t0 = std::chrono::steady_clock::now();
  Run run(scenario, opts);
  it->second(run);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  Json outputs = run.outputs();
  Json manifest{{"tool", "rismimo"},
                {"version", RISMIMO_VERSION},
                {"subcommand", name},
                {"scenario_hash", scenario_hash(scenario)},
                {"seed", scenario.rng_seed},
                {"strict", opts.strict},
                {"threads", thread_count()},
                {"wall_clock_s", wall},
                {"warnings", run.warnings()},
                {"outputs", outputs},
                {"scenario", cli::to_json(scenario)}};
  std::ofstream out(opts.out_dir / "manifest.json");
  if (!out) throw ConfigError("cannot write manifest.json");
  out << manifest.dump(2) << "\n";
}

int main_entry(int argc, char** argv) {
  CLI::App app{"rismimo: RIS-based MIMO antenna and link simulator"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(RISMIMO_VERSION));

  std::string scenario_path, out_dir;
  std::uint64_t seed = 0;
  bool strict = false;
  unsigned threads = 0;
  static const std::map<std::string, std::string> blurbs{
      {"element-opt", "optimize the one-bit element circuit"},
      {"pattern", "far-field pattern and beam metrics"},
      {"steer", "pointing error and scan loss over steering directions"},
      {"widebeam", "sub-aperture wide beam over a sector"},
      {"feed-opt", "coarse feed search plus realized-gain refinement"},
      {"link", "link budget, SNR and EVM at one distance"},
      {"evm-sweep", "EVM versus distance"},
      {"aclr-sweep", "ACLR over carrier centers and AoDs"},
      {"dual-stream", "dual-polarized per-stream SINR"},
      {"rate", "NR peak rate and power comparison"},
      {"train", "hierarchical beam training Monte Carlo"},
      {"geometry", "element positions, groups and incidence angles"}};
  std::map<std::string, CLI::App*> subs;
  for (const auto& name : subcommands()) {
    CLI::App* sub = app.add_subcommand(name, blurbs.at(name));
    sub->allow_extras();
    sub->add_option("-s,--scenario", scenario_path, "scenario YAML (empty: prototype defaults)");
    sub->add_option("-o,--out", out_dir, fmt::format("output directory (default ${} or ./out)", kOutDirEnv));
    sub->add_option("--seed", seed, "override rng_seed");
    sub->add_flag("--strict", strict, "treat unmet targets and pattern warnings as failures");
    sub->add_option("--threads", threads, "worker threads (0 = all cores)");
    sub->footer("Any scenario key can be overridden as --section.key=value.");
    subs[name] = sub;
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    CLI::App* sub = app.get_subcommands().front();
    Scenario s = scenario_path.empty() ? load_scenario_text("", "<defaults>") : load_scenario_file(scenario_path);
    for (const auto& [k, v] : parse_overrides(sub->remaining())) apply_override(s, k, v);
    if (sub->count("--seed") > 0) s.rng_seed = seed;
    validate(s);
    set_thread_count(threads);

    RunOptions opts;
    opts.strict = strict;
    if (!out_dir.empty()) opts.out_dir = out_dir;
    else if (const char* env = std::getenv(kOutDirEnv); env && *env) opts.out_dir = env;
    else opts.out_dir = "out";
    run_subcommand(sub->get_name(), s, opts);
    return kExitOk;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const ComputeError& e) {
    std::cerr << "computation failed: " << e.what() << "\n";
    return kExitCompute;
  } catch (const std::exception& e) {
    std::cerr << "computation failed: " << e.what() << "\n";
    return kExitCompute;
  }
}

}  // namespace rismimo::cli
