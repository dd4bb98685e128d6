#include <doctest.h>

#include <limits>

#include "rismimo/link.hpp"

using namespace rismimo;

TEST_CASE("free-space path loss") {
  CHECK(std::abs(path_loss_fspl(1.0, 26.0) - 60.74) < 0.01);
  CHECK(path_loss_fspl(8.0, 26.0) - path_loss_fspl(4.0, 26.0) == doctest::Approx(6.0206).epsilon(1e-5));
  const double lambda = kSpeedOfLight / 26e9;
  CHECK(path_loss_fspl(lambda / (4 * kPi), 26.0) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK_THROWS_AS(path_loss_fspl(0.0, 26.0), ConfigError);
}

TEST_CASE("link budget chain sum") {
  LinkScenario s;
  const double c = 299792458.0;
  const double fspl = 20 * std::log10(4 * kPi * s.distance_m * s.center_freq_ghz * 1e9 / c);
  const double noise = -174 + 10 * std::log10(s.bandwidth_mhz * 1e6) + s.noise_figure_db;
  const double ref = s.tx_power_dbm + s.tx_gain_dbi + s.rx_gain_dbi - fspl - noise;
  CHECK(link_budget(s) == doctest::Approx(ref).epsilon(1e-12));
  s.lna_gain_db = 60;
  CHECK(link_budget(s) == doctest::Approx(ref).epsilon(1e-12));
}

TEST_CASE("closed-form EVM") {
  CHECK(evm_closed_form(25.0, 0.0) == doctest::Approx(0.0562).epsilon(1e-3));
  CHECK(evm_closed_form(0.0, 0.0) == doctest::Approx(1.0));
  CHECK(evm_closed_form(std::numeric_limits<double>::infinity(), 0.03) == doctest::Approx(0.03));
  CHECK_THROWS_AS(evm_closed_form(std::nan(""), 0.03), ConfigError);
}

TEST_CASE("Monte Carlo EVM agrees with the closed form") {
  for (auto m : {Modulation::QPSK, Modulation::QAM64}) {
    const double sim = simulate_evm(25.0, 0.03, m, 1000000, 17);
    CHECK(sim == doctest::Approx(evm_closed_form(25.0, 0.03)).epsilon(0.02));
  }
  CHECK(simulate_evm(std::numeric_limits<double>::infinity(), 0.0, Modulation::QAM16, 1000, 1) == 0.0);
}

TEST_CASE("constellations have unit power") {
  for (auto m : {Modulation::QPSK, Modulation::QAM16, Modulation::QAM64, Modulation::QAM256}) {
    const auto c = constellation(m);
    CHECK(c.size() == (1u << bits_per_symbol(m)));
    double p = 0;
    for (auto v : c) p += std::norm(v);
    CHECK(p / c.size() == doctest::Approx(1.0));
    CHECK(modulation_from_string(to_string(m)) == m);
  }
}

TEST_CASE("EVM versus distance") {
  LinkScenario s;
  std::vector<double> d;
  for (double x = 1; x <= 20; x += 1) d.push_back(x);
  const auto rows = evm_vs_distance(s, d);
  REQUIRE(rows.size() == d.size());
  for (std::size_t i = 1; i < rows.size(); ++i) CHECK(rows[i].evm_percent >= rows[i - 1].evm_percent);
  CHECK(rows.back().evm_percent <= 8.0);
  CHECK(rows.back().pass);
  const auto csv = evm_to_csv(rows);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 21);
}

TEST_CASE("OFDM waveform") {
  OfdmParams p;
  const auto x = ofdm_waveform(p, 6, 3);
  double pw = 0;
  const std::size_t len = p.fft_size + p.cp_length;
  for (std::size_t i = p.rolloff; i < 6 * len; ++i) pw += std::norm(x[i]);
  CHECK(pw / (6 * len - p.rolloff) == doctest::Approx(1.0).epsilon(0.01));

  OfdmParams tone;
  tone.fft_size = 64;
  tone.occupied = 1;
  tone.cp_length = 0;
  tone.rolloff = 0;
  tone.modulation = Modulation::QPSK;
  for (auto v : ofdm_waveform(tone, 3, 1)) CHECK(std::abs(v) == doctest::Approx(1.0));

  const auto psd = welch_psd(x, p.sample_rate_hz());
  const double in = channel_power(psd, {0, 300e6}) / 300e6;
  const double guard = channel_power(psd, {700e6, 100e6}) / 100e6;
  CHECK(db10(in / guard) > 40.0);

  OfdmParams bad;
  bad.rolloff = bad.cp_length + 1;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("PA models") {
  const std::vector<cplx> x{{0.01, 0}, {0, 0.5}, {3, 4}, {100, 0}};
  const auto ideal = apply_pa(x, {PaKind::Ideal, 1.0, 2.0});
  for (std::size_t i = 0; i < x.size(); ++i) CHECK(ideal[i] == x[i]);
  const auto rapp = apply_pa(x, {PaKind::Rapp, 4.0, 2.0});
  CHECK(std::abs(rapp[0] - x[0]) < 1e-12);
  CHECK(std::abs(rapp[3]) == doctest::Approx(4.0).epsilon(1e-6));
  CHECK(std::abs(std::arg(rapp[2]) - std::arg(x[2])) < 1e-12);
  for (auto v : apply_pa(x, {PaKind::Rapp, 1.0, 100.0})) CHECK(std::abs(v) <= 1.0 + 1e-12);
  CHECK_THROWS_AS(apply_pa(x, {PaKind::Rapp, 0.0, 2.0}), ConfigError);
}

TEST_CASE("ACLR") {
  OfdmParams p;
  const auto x = ofdm_waveform(p, 8, 11);
  const double fs = p.sample_rate_hz();
  const Channel main{0, 400e6};
  const std::vector<Channel> adj{{-400e6, 400e6}, {400e6, 400e6}};
  const auto ideal = aclr(x, fs, main, adj);
  for (double v : ideal) CHECK(v < -40.0);
  const auto hard = aclr(apply_pa(x, {PaKind::Rapp, 0.5, 100.0}), fs, main, adj);
  CHECK(hard[0] > ideal[0]);
  CHECK(hard[0] > -28.0);
  CHECK(std::abs(hard[0] - hard[1]) < 0.5);
  CHECK(std::abs(ideal[0] - ideal[1]) < 0.5);
}

TEST_CASE("dual-polarized SINR") {
  const auto s = dual_stream_scenario();
  const StreamGains g;
  const auto none = dual_stream_sinr(g, {-300, -300}, s);
  CHECK(none.sinr_h_db == doctest::Approx(none.snr_h_db).epsilon(1e-9));
  CHECK(none.sinr_v_db == doctest::Approx(none.snr_v_db).epsilon(1e-9));

  LinkScenario loud = s;
  loud.tx_power_dbm = 200;
  const auto lim = dual_stream_sinr({22.0, 22.0}, XpdModel{}, loud);
  CHECK(lim.sinr_v_db == doctest::Approx(10.16).epsilon(1e-6));
  CHECK(lim.sinr_h_db == doctest::Approx(15.19).epsilon(1e-6));

  const auto r = dual_stream_sinr(g, XpdModel{}, s);
  const double fspl = path_loss_fspl(s.distance_m, s.center_freq_ghz);
  const double n = noise_power_dbm(s.bandwidth_mhz, s.noise_figure_db);
  const double sh = s.tx_power_dbm + g.h_dbi - fspl + s.rx_gain_dbi;
  const double sv = s.tx_power_dbm + g.v_dbi - fspl + s.rx_gain_dbi;
  const double ih = sv - 15.19;
  const double ref_h = sh - 10 * std::log10(std::pow(10, ih / 10) + std::pow(10, n / 10));
  CHECK(std::abs(r.sinr_h_db - ref_h) < 0.01);
  CHECK(r.sinr_v_db < r.sinr_h_db);
}

TEST_CASE("peak rate") {
  FrameConfig f;
  CHECK(dl_duty(f) == doctest::Approx(0.742857).epsilon(1e-6));
  f.s_dl = 0;
  f.s_guard = 12;
  CHECK(dl_duty(f) == doctest::Approx(0.6));

  FrameConfig z = prototype_frame();
  z.layers = 0;
  CHECK(peak_rate_3gpp(z) == 0.0);

  FrameConfig one = prototype_frame(), three = prototype_frame();
  one.cc_count = 1;
  three.cc_count = 3;
  CHECK(peak_rate_3gpp(three) == doctest::Approx(3 * peak_rate_3gpp(one)));

  CHECK(peak_rate_3gpp(prototype_frame()) == doctest::Approx(5.17e9).epsilon(0.03));
  const auto cal = calibrate_peak_rate(FrameConfig{}, 5.17e9);
  REQUIRE_FALSE(cal.empty());
  for (std::size_t i = 1; i < cal.size(); ++i) CHECK(std::abs(cal[i].rel_error) >= std::abs(cal[i - 1].rel_error));

  FrameConfig bad;
  bad.s_dl = 11;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("power saving") {
  CHECK(power_saving(15.8, 25.6) == doctest::Approx(0.3828).epsilon(1e-3));
  CHECK(power_saving(25.6, 25.6) == 0.0);
  CHECK(power_saving(0.0, 25.6) == 1.0);
  CHECK_THROWS_AS(power_saving(1.0, 0.0), ConfigError);
}
