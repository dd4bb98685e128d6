#include <doctest.h>

#include <random>

#include "rismimo/pattern.hpp"
#include "rismimo/synthesis.hpp"

using namespace rismimo;

namespace {

// Illumination re-derived from the feed model: cos^(q/2)(angle off the feed axis) / r, phase -k r,
// normalized to unit total power.
std::vector<cplx> oracle_illumination(const AntennaAssembly& a) {
  const double k = 2 * kPi * a.freq_ghz * 1e9 / kSpeedOfLight * 1e-3;
  const Vec3 f = a.feed.position_mm;
  const double fn = f.norm();
  std::vector<cplx> out;
  double p = 0;
  for (int row = 0; row < a.array.n_y; ++row) {
    for (int col = 0; col < a.array.n_x; ++col) {
      const double x = (col - (a.array.n_x - 1) / 2.0) * a.array.period_mm;
      const double y = (row - (a.array.n_y - 1) / 2.0) * a.array.period_mm;
      const double dx = x - f.x, dy = y - f.y, dz = -f.z;
      const double r = std::sqrt(dx * dx + dy * dy + dz * dz);
      const double cosang = (dx * -f.x + dy * -f.y + dz * -f.z) / (r * fn);
      const double mag = std::pow(cosang, a.feed.q / 2) / r;
      out.push_back(std::polar(mag, -k * r));
      p += mag * mag;
    }
  }
  for (auto& v : out) v /= std::sqrt(p);
  return out;
}

cplx brute_force_field(const AntennaAssembly& a, const std::vector<cplx>& w, const Direction& d) {
  const double k = 2 * kPi * a.freq_ghz * 1e9 / kSpeedOfLight * 1e-3;
  const double az = d.az_deg * kPi / 180, el = d.el_deg * kPi / 180;
  const double ux = std::sin(az) * std::cos(el), uy = std::sin(el), uz = std::cos(az) * std::cos(el);
  cplx e = 0;
  for (int row = 0; row < a.array.n_y; ++row) {
    for (int col = 0; col < a.array.n_x; ++col) {
      const double x = (col - (a.array.n_x - 1) / 2.0) * a.array.period_mm;
      const double y = (row - (a.array.n_y - 1) / 2.0) * a.array.period_mm;
      e += w[row * a.array.n_x + col] * std::exp(cplx(0, k * (x * ux + y * uy)));
    }
  }
  return e * std::pow(uz, a.element_q);
}

AntennaAssembly single_element() {
  AntennaAssembly a = prototype_assembly();
  a.array = RisArray::make(1, 1, 5.0, 1);
  a.feed.position_mm = {0, 0, 150};
  a.incidence.enabled = false;
  return a;
}

}  // namespace

TEST_CASE("illumination matches the feed formula") {
  const auto a = prototype_assembly();
  const auto got = illumination(a);
  const auto ref = oracle_illumination(a);
  REQUIRE(got.size() == ref.size());
  double p = 0;
  for (std::size_t n = 0; n < got.size(); ++n) {
    CHECK(std::abs(got[n] - ref[n]) <= 1e-9 * std::abs(ref[n]));
    p += std::norm(got[n]);
  }
  CHECK(p == doctest::Approx(1.0));
}

TEST_CASE("illumination limits") {
  AntennaAssembly far = prototype_assembly();
  far.feed.position_mm = {0, 0, 1e9};
  const auto w = illumination(far);
  for (std::size_t n = 1; n < w.size(); ++n) {
    CHECK(std::abs(w[n]) == doctest::Approx(std::abs(w[0])).epsilon(1e-9));
    CHECK(std::abs(std::arg(w[n] / w[0])) < 1e-4);
  }

  AntennaAssembly iso = prototype_assembly();
  iso.array = RisArray::make(3, 3, 5.0, 1);
  iso.feed.position_mm = {0, 0, 40};
  iso.feed.q = 0;
  const auto v = illumination(iso);
  const double r_center = 40.0, r_corner = std::sqrt(25.0 + 25.0 + 1600.0);
  CHECK(std::abs(v[0]) / std::abs(v[4]) == doctest::Approx(r_center / r_corner).epsilon(1e-12));
}

TEST_CASE("far field matches brute-force summation") {
  const auto a = prototype_assembly();
  const auto cw = synthesize_codeword(a, {0, 0}, SynthesisOptions{false, true});
  REQUIRE(cw.mask.is_continuous());
  auto w = oracle_illumination(a);
  const auto g = element_reflections(a, cw.mask);
  for (std::size_t n = 0; n < w.size(); ++n) w[n] *= g[n];
  const ApertureField ap(a, cw.mask);
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> ang(-80, 80);
  double worst = 0;
  for (int t = 0; t < 50; ++t) {
    const Direction d{ang(rng), ang(rng) / 2};
    const cplx ref = brute_force_field(a, w, d);
    worst = std::max(worst, std::abs(ap.field(d) - ref) / std::abs(ref));
  }
  CHECK(worst < 1e-9);
}

TEST_CASE("single element reproduces the element pattern") {
  const auto a = single_element();
  const ApertureField ap(a, PhaseMask::continuous({0.0}));
  const double e0 = std::abs(ap.field({0, 0}));
  for (Direction d : {Direction{30, 0}, Direction{0, 45}, Direction{-60, 20}}) {
    CHECK(std::abs(ap.field(d)) / e0 == doctest::Approx(std::pow(d.unit().z, a.element_q)).epsilon(1e-12));
  }
}

TEST_CASE("two in-phase elements quadruple boresight power") {
  AntennaAssembly one = single_element();
  AntennaAssembly two = one;
  two.array = RisArray::make(2, 1, 5.0, 1);
  const ApertureField a1(one, std::vector<cplx>{1.0});
  const ApertureField a2(two, std::vector<cplx>{1.0, 1.0});
  CHECK(a2.intensity({0, 0}) == doctest::Approx(4.0 * a1.intensity({0, 0})).epsilon(1e-12));
}

TEST_CASE("isotropic pattern has 0 dBi and no sidelobes") {
  FarFieldPattern p;
  const auto grid = AngularGrid::hemisphere(2.0);
  p.az_deg = grid.az();
  p.el_deg = grid.el();
  p.copol.assign(p.az_deg.size() * p.el_deg.size(), cplx(1, 0));
  p.total_power = 4 * kPi;
  const auto m = pattern_metrics(p);
  CHECK(m.peak_gain_dbi == doctest::Approx(0.0).epsilon(1e-12));
  CHECK_FALSE(m.sll_db.has_value());

  std::vector<double> ones(p.copol.size(), 1.0);
  CHECK(integrate_intensity(p.az_deg, p.el_deg, ones) == doctest::Approx(2 * kPi).epsilon(1e-3));
}

TEST_CASE("uniform 32-element line array sidelobe level") {
  AntennaAssembly a = single_element();
  a.array = RisArray::make(32, 1, 5.0, 1);
  a.element_q = 0;
  const ApertureField ap(a, std::vector<cplx>(32, 1.0));
  FarFieldPattern p;
  AngularGrid cut{-90, 90, 0.01, 0, 0, 1};
  p.az_deg = cut.az();
  p.el_deg = cut.el();
  p.copol = ap.grid_fields(cut);
  p.total_power = ap.total_power(0.5);
  const auto m = pattern_metrics(p);
  REQUIRE(m.sll_db.has_value());

  // brute force: first sidelobe of |sum e^{j k d n sin az}|^2 between the first and second nulls
  const double kd = 2 * kPi * 26e9 / kSpeedOfLight * 5e-3;
  double first_side = 0;
  for (double s = 1.0 / 32; s < 2.0 / 32; s += 1e-6) {
    const double psi = 2 * kPi * s;  // k d sin(az) = psi
    if (psi / kd > 1) break;
    const double af = std::sin(32 * psi / 2) / (32 * std::sin(psi / 2));
    first_side = std::max(first_side, af * af);
  }
  CHECK(*m.sll_db == doctest::Approx(db10(first_side)).epsilon(0.002));
  CHECK(*m.sll_db == doctest::Approx(-13.26).epsilon(0.01));
}

TEST_CASE("directivity upper bound") {
  const double lambda = kSpeedOfLight / 26e9;
  CHECK(directivity_upper_bound_dbi(lambda * lambda / (4 * kPi), 26) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(directivity_upper_bound_dbi(0.0256, 26) == doctest::Approx(33.8).epsilon(0.002));
  CHECK(directivity_upper_bound_dbi(0.0512, 26) - directivity_upper_bound_dbi(0.0256, 26) ==
        doctest::Approx(3.0103).epsilon(1e-4));
  CHECK_THROWS_AS(directivity_upper_bound_dbi(0, 26), ConfigError);
}

TEST_CASE("one-bit broadside assembly gain") {
  const auto a = prototype_assembly();
  const auto cw = synthesize_codeword(a, {0, 0});
  REQUIRE_FALSE(cw.mask.is_continuous());
  const auto b = evaluate_beam(a, cw.mask, {0, 0});
  CHECK(b.gain_dbi >= 19.2);
  CHECK(b.gain_dbi <= 25.2);
  CHECK(b.directivity_dbi <= directivity_upper_bound_dbi(a.array.aperture_area_m2(), a.freq_ghz));
  CHECK(angular_distance_deg(b.peak, {0, 0}) < 0.5);

  const auto eff = realized_efficiency(a, cw.mask);
  CHECK(eff > 0);
  CHECK(eff < 1);
}

TEST_CASE("grid metrics agree with the beam evaluator") {
  const auto a = prototype_assembly();
  const auto cw = synthesize_codeword(a, {0, 0});
  const AngularGrid g{-30, 30, 0.25, -30, 30, 0.25};
  const auto fp = far_field(a, cw.mask, g);
  CHECK(fp.warnings.empty());
  const auto m = pattern_metrics(fp);
  const auto b = evaluate_beam(a, cw.mask, {0, 0});
  CHECK(m.peak_gain_dbi == doctest::Approx(b.gain_dbi).epsilon(0.005));
  CHECK(m.cross_pol_db == doctest::Approx(a.cross_pol_db).epsilon(1e-9));
  REQUIRE(m.sll_db.has_value());
  CHECK(*m.sll_db <= -10.0);
  REQUIRE(m.hpbw_az_deg.has_value());
  CHECK(*m.hpbw_az_deg > 2.0);
  CHECK(*m.hpbw_az_deg < 6.0);
}

TEST_CASE("coarse grids warn and csv is well formed") {
  const auto a = prototype_assembly();
  const auto cw = synthesize_codeword(a, {0, 0});
  const auto coarse = far_field(a, cw.mask, AngularGrid{-90, 90, 5, -90, 90, 5});
  CHECK_FALSE(coarse.warnings.empty());
  const auto small = far_field(a, cw.mask, AngularGrid{-2, 2, 1, -1, 1, 1});
  const auto csv = pattern_to_csv(small);
  CHECK(csv.rfind("az_deg,el_deg,copol_dB,xpol_dB\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 5 * 3);
  CHECK_THROWS_AS(far_field(a, cw.mask, AngularGrid{-90, 90, 0, -90, 90, 1}), ConfigError);
  CHECK_THROWS_AS(element_reflections(a, PhaseMask::uniform(7)), ConfigError);
}
