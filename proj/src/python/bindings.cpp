#include <pybind11/complex.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "rismimo/element.hpp"
#include "rismimo/feed.hpp"
#include "rismimo/geometry.hpp"
#include "rismimo/link.hpp"
#include "rismimo/pattern.hpp"
#include "rismimo/synthesis.hpp"

namespace py = pybind11;
using namespace rismimo;

PYBIND11_MODULE(_core, m) {
  m.doc() = "One-bit reflectarray antenna and link models";
  m.attr("__version__") = RISMIMO_VERSION;

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<ComputeError>(m, "ComputeError", PyExc_RuntimeError);

  py::class_<Vec3>(m, "Vec3")
      .def(py::init<double, double, double>(), py::arg("x") = 0.0, py::arg("y") = 0.0, py::arg("z") = 0.0)
      .def_readwrite("x", &Vec3::x)
      .def_readwrite("y", &Vec3::y)
      .def_readwrite("z", &Vec3::z)
      .def("__repr__", [](const Vec3& v) { return "Vec3(" + std::to_string(v.x) + ", " + std::to_string(v.y) + ", " + std::to_string(v.z) + ")"; });

  py::class_<Direction>(m, "Direction")
      .def(py::init<double, double>(), py::arg("az_deg") = 0.0, py::arg("el_deg") = 0.0)
      .def_readwrite("az_deg", &Direction::az_deg)
      .def_readwrite("el_deg", &Direction::el_deg)
      .def("unit", &Direction::unit);

  // element
  py::enum_<DiodeState>(m, "DiodeState").value("ON", DiodeState::On).value("OFF", DiodeState::Off);
  py::class_<ElementCircuit>(m, "ElementCircuit")
      .def_readwrite("c_patch_ff", &ElementCircuit::c_patch_ff)
      .def_readwrite("l_patch_nh", &ElementCircuit::l_patch_nh)
      .def_readwrite("l_groove_nh", &ElementCircuit::l_groove_nh)
      .def_readwrite("l_via_nh", &ElementCircuit::l_via_nh)
      .def_readwrite("r_loss_ohm", &ElementCircuit::r_loss_ohm);
  m.def("default_element_circuit", &default_element_circuit);
  m.def("design_element_circuit", &design_element_circuit, py::return_value_policy::copy);
  m.def(
      "reflection",
      [](const ElementCircuit& c, DiodeState s, double f) { return reflection_coefficient(c, s, f).value(); },
      py::arg("circuit"), py::arg("state"), py::arg("freq_ghz") = 26.0);
  m.def("phase_difference", &phase_difference, py::arg("circuit"), py::arg("freq_ghz") = 26.0);
  m.def(
      "optimize_element",
      [](const ElementCircuit& start, int max_rounds) {
        const auto sweeps = default_sweeps();
        const auto r = optimize_structure(start, DesignTargets{}, sweeps, max_rounds);
        py::dict d;
        d["circuit"] = r.circuit;
        d["amp_on"] = r.metrics.amp_on;
        d["amp_off"] = r.metrics.amp_off;
        d["phase_diff_deg"] = r.metrics.phase_diff_deg;
        d["rounds"] = r.rounds;
        d["targets_met"] = r.targets_met;
        return d;
      },
      py::arg("start") = default_element_circuit(), py::arg("max_rounds") = 20);

  // assembly, synthesis, pattern
  py::class_<AntennaAssembly>(m, "AntennaAssembly")
      .def_property(
          "feed_position_mm", [](const AntennaAssembly& a) { return a.feed.position_mm; },
          [](AntennaAssembly& a, const Vec3& p) { a.feed.position_mm = p; })
      .def_property(
          "feed_q", [](const AntennaAssembly& a) { return a.feed.q; }, [](AntennaAssembly& a, double q) { a.feed.q = q; })
      .def_readwrite("freq_ghz", &AntennaAssembly::freq_ghz)
      .def_readwrite("loss_efficiency", &AntennaAssembly::loss_efficiency)
      .def_readwrite("element_q", &AntennaAssembly::element_q)
      .def_property_readonly("element_count", [](const AntennaAssembly& a) { return a.array.element_count(); })
      .def_property_readonly("group_count", [](const AntennaAssembly& a) { return a.array.grouping.group_count; });
  m.def("prototype_assembly", &prototype_assembly);
  m.def("required_phase", &required_phase, py::arg("assembly"), py::arg("element"), py::arg("target"));
  m.def("quantize_one_bit", &quantize_one_bit);
  m.def(
      "codeword_states",
      [](const AntennaAssembly& a, const Direction& t) { return synthesize_codeword(a, t).mask.states; },
      py::arg("assembly"), py::arg("target"));
  m.def(
      "beam_gain",
      [](const AntennaAssembly& a, const Direction& t, bool continuous, double step) {
        const auto cw = synthesize_codeword(a, t, SynthesisOptions{false, continuous});
        const auto b = evaluate_beam(a, cw.mask, t, step);
        py::dict d;
        d["gain_dbi"] = b.gain_dbi;
        d["directivity_dbi"] = b.directivity_dbi;
        d["peak"] = b.peak;
        return d;
      },
      py::arg("assembly"), py::arg("target") = Direction{}, py::arg("continuous") = false, py::arg("step_deg") = 0.5);
  m.def("directivity_upper_bound_dbi", &directivity_upper_bound_dbi);
  m.def(
      "aperture_efficiency",
      [](const AntennaAssembly& a, bool one_bit) {
        const auto e = aperture_efficiency(a, one_bit);
        py::dict d;
        d["spillover"] = e.spillover;
        d["illumination"] = e.illumination;
        d["directivity_dbi"] = e.directivity_dbi;
        d["predicted_gain_dbi"] = e.predicted_gain_dbi;
        return d;
      },
      py::arg("assembly"), py::arg("one_bit") = true);

  // link
  py::enum_<Modulation>(m, "Modulation")
      .value("QPSK", Modulation::QPSK)
      .value("QAM16", Modulation::QAM16)
      .value("QAM64", Modulation::QAM64)
      .value("QAM256", Modulation::QAM256);
  py::class_<LinkScenario>(m, "LinkScenario")
      .def(py::init<>())
      .def_readwrite("distance_m", &LinkScenario::distance_m)
      .def_readwrite("center_freq_ghz", &LinkScenario::center_freq_ghz)
      .def_readwrite("bandwidth_mhz", &LinkScenario::bandwidth_mhz)
      .def_readwrite("tx_power_dbm", &LinkScenario::tx_power_dbm)
      .def_readwrite("tx_gain_dbi", &LinkScenario::tx_gain_dbi)
      .def_readwrite("rx_gain_dbi", &LinkScenario::rx_gain_dbi)
      .def_readwrite("noise_figure_db", &LinkScenario::noise_figure_db)
      .def_readwrite("tx_evm_floor", &LinkScenario::tx_evm_floor)
      .def_readwrite("modulation", &LinkScenario::modulation);
  m.def("path_loss_fspl", &path_loss_fspl, py::arg("distance_m"), py::arg("freq_ghz"));
  m.def("link_budget", &link_budget);
  m.def("evm_closed_form", &evm_closed_form, py::arg("snr_db"), py::arg("tx_evm_floor"));
  m.def("simulate_evm", py::overload_cast<double, double, Modulation, std::size_t, std::uint64_t>(&simulate_evm),
        py::arg("snr_db"), py::arg("tx_evm_floor"), py::arg("modulation"), py::arg("n_symbols"), py::arg("seed"));

  py::class_<StreamGains>(m, "StreamGains")
      .def(py::init<>())
      .def_readwrite("h_dbi", &StreamGains::h_dbi)
      .def_readwrite("v_dbi", &StreamGains::v_dbi);
  py::class_<XpdModel>(m, "XpdModel")
      .def(py::init<>())
      .def_readwrite("h_leakage_db", &XpdModel::h_leakage_db)
      .def_readwrite("v_leakage_db", &XpdModel::v_leakage_db);
  m.def("dual_stream_scenario", &dual_stream_scenario);
  m.def(
      "dual_stream_sinr",
      [](const StreamGains& g, const XpdModel& x, const LinkScenario& s) {
        const auto r = dual_stream_sinr(g, x, s);
        py::dict d;
        d["snr_h_db"] = r.snr_h_db;
        d["snr_v_db"] = r.snr_v_db;
        d["sinr_h_db"] = r.sinr_h_db;
        d["sinr_v_db"] = r.sinr_v_db;
        return d;
      },
      py::arg("gains") = StreamGains{}, py::arg("xpd") = XpdModel{}, py::arg("scenario") = dual_stream_scenario());

  py::class_<FrameConfig>(m, "FrameConfig")
      .def(py::init<>())
      .def_readwrite("slot_pattern", &FrameConfig::slot_pattern)
      .def_readwrite("s_dl", &FrameConfig::s_dl)
      .def_readwrite("s_guard", &FrameConfig::s_guard)
      .def_readwrite("s_ul", &FrameConfig::s_ul)
      .def_readwrite("cc_count", &FrameConfig::cc_count)
      .def_readwrite("layers", &FrameConfig::layers)
      .def_readwrite("modulation_order", &FrameConfig::modulation_order)
      .def_readwrite("overhead", &FrameConfig::overhead)
      .def_readwrite("prb_per_cc", &FrameConfig::prb_per_cc);
  m.def("prototype_frame", &prototype_frame);
  m.def("dl_duty", &dl_duty);
  m.def("peak_rate", &peak_rate_3gpp);
  m.def("power_saving", &power_saving, py::arg("candidate_w"), py::arg("baseline_w"));
}
