#include <doctest.h>

#include "rismimo/feed.hpp"

using namespace rismimo;

namespace {

// Gauss-Legendre nodes/weights on [-1, 1] by Newton iteration on P_n.
void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  x.assign(n, 0);
  w.assign(n, 0);
  for (int i = 0; i < n; ++i) {
    double z = std::cos(kPi * (i + 0.75) / (n + 0.5)), dp = 0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1, p1 = z;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2 * k - 1) * z * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (z * p1 - p0) / (z * z - 1);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-15) break;
    }
    x[i] = z;
    w[i] = 2 / ((1 - z * z) * dp * dp);
  }
}

// Intercepted fraction of a cos^q feed pattern, integrated panel-wise with Gauss-Legendre.
double oracle_spillover(const AntennaAssembly& a) {
  std::vector<double> gx, gw;
  gauss_legendre(24, gx, gw);
  const Vec3 p = a.feed.position_mm, axis = a.feed.boresight();
  const double lx = a.array.n_x * a.array.period_mm, ly = a.array.n_y * a.array.period_mm;
  const int panels = 8;
  const double px = lx / panels, py = ly / panels;
  double sum = 0;
  for (int bi = 0; bi < panels; ++bi) {
    for (int bj = 0; bj < panels; ++bj) {
      for (int i = 0; i < 24; ++i) {
        for (int j = 0; j < 24; ++j) {
          const double x = -lx / 2 + (bi + 0.5) * px + gx[i] * px / 2;
          const double y = -ly / 2 + (bj + 0.5) * py + gx[j] * py / 2;
          const double dx = x - p.x, dy = y - p.y, dz = -p.z;
          const double r = std::sqrt(dx * dx + dy * dy + dz * dz);
          const double c = (dx * axis.x + dy * axis.y + dz * axis.z) / r;
          if (c <= 0) continue;
          sum += gw[i] * gw[j] * px * py / 4 * std::pow(c, a.feed.q) * p.z / (r * r * r);
        }
      }
    }
  }
  return sum / (2 * kPi / (a.feed.q + 1));
}

double oracle_taper(const AntennaAssembly& a) {
  const Vec3 p = a.feed.position_mm, axis = a.feed.boresight();
  double s = 0, s2 = 0;
  int n = 0;
  for (int row = 0; row < a.array.n_y; ++row) {
    for (int col = 0; col < a.array.n_x; ++col, ++n) {
      const double x = (col - (a.array.n_x - 1) / 2.0) * a.array.period_mm;
      const double y = (row - (a.array.n_y - 1) / 2.0) * a.array.period_mm;
      const double dx = x - p.x, dy = y - p.y, dz = -p.z;
      const double r = std::sqrt(dx * dx + dy * dy + dz * dz);
      const double c = (dx * axis.x + dy * axis.y + dz * axis.z) / r;
      const double m = std::pow(c, a.feed.q / 2) / r;
      s += m;
      s2 += m * m;
    }
  }
  return s * s / (n * s2);
}

AntennaAssembly at(const Vec3& p) {
  AntennaAssembly a = prototype_assembly();
  a.feed.position_mm = p;
  return a;
}

}  // namespace

TEST_CASE("efficiency terms match quadrature oracles") {
  for (Vec3 p : {Vec3{0, 0, 150}, Vec3{-82, 0, 150}, Vec3{20, -30, 90}}) {
    const auto a = at(p);
    CHECK(spillover_efficiency(a) == doctest::Approx(oracle_spillover(a)).epsilon(1e-4));
    CHECK(illumination_efficiency(a) == doctest::Approx(oracle_taper(a)).epsilon(1e-9));
  }
}

TEST_CASE("efficiency limits and trends") {
  const auto far = at({0, 0, 1e9});
  CHECK(illumination_efficiency(far) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(spillover_efficiency(far) < 1e-6);

  double prev_s = 0, prev_i = 2;
  for (double z = 250; z >= 60; z -= 10) {
    const auto a = at({0, 0, z});
    const double s = spillover_efficiency(a), i = illumination_efficiency(a);
    CHECK(s > prev_s);
    CHECK(i < prev_i);
    CHECK(s <= 1.0);
    prev_s = s;
    prev_i = i;
  }
}

TEST_CASE("predicted gain composition") {
  const auto a = at({0, 0, 150});
  const auto e = aperture_efficiency(a);
  CHECK(e.predicted_gain_dbi ==
        doctest::Approx(e.directivity_dbi + db10(e.spillover) + db10(e.illumination) + db10(a.loss_efficiency) +
                        a.blockage_db + kOneBitLossDb));
  CHECK(aperture_efficiency(a, false).predicted_gain_dbi - e.predicted_gain_dbi == doctest::Approx(-kOneBitLossDb));
  CHECK(kOneBitLossDb == doctest::Approx(db10(4 / (kPi * kPi))).epsilon(1e-4));
}

TEST_CASE("coarse grid picks the exhaustive argmax") {
  FeedSearchSpace s;
  s.x_min = -40;
  s.x_max = 20;
  s.y_min = -20;
  s.y_max = 20;
  s.z_min = 80;
  s.z_max = 160;
  s.resolution_mm = 20;
  const auto tmpl = prototype_assembly();
  const auto r = coarse_optimize_feed(s, tmpl);
  double best = -1e9;
  Vec3 arg{};
  for (double x = s.x_min; x <= s.x_max + 1e-9; x += 20)
    for (double y = s.y_min; y <= s.y_max + 1e-9; y += 20)
      for (double z = s.z_min; z <= s.z_max + 1e-9; z += 20) {
        const double g = aperture_efficiency(at({x, y, z})).predicted_gain_dbi;
        if (g > best) {
          best = g;
          arg = {x, y, z};
        }
      }
  CHECK(r.grid.size() == 4 * 3 * 5);
  CHECK(r.grid_best.x == arg.x);
  CHECK(r.grid_best.y == arg.y);
  CHECK(r.grid_best.z == arg.z);
  CHECK(r.eff.predicted_gain_dbi >= best - 1e-9);
  CHECK(s.contains(r.position));
}

TEST_CASE("symmetric search space gives a centered feed") {
  FeedSearchSpace s;
  s.x_min = -50;
  s.x_max = 50;
  s.y_min = -50;
  s.y_max = 50;
  s.z_min = 60;
  s.z_max = 200;
  const auto r = coarse_optimize_feed(s, prototype_assembly());
  CHECK(std::abs(r.position.y) < s.resolution_mm);
  CHECK(std::abs(r.position.x) < s.resolution_mm);
}

TEST_CASE("search space validation") {
  FeedSearchSpace s;
  s.x_max = s.x_min;
  CHECK_THROWS_AS(s.validate(), ConfigError);
  FeedSearchSpace z;
  z.z_min = 0;
  CHECK_THROWS_AS(z.validate(), ConfigError);
  FeedSearchSpace o;
  o.offsets = {{1, 0, 0}};
  CHECK_THROWS_AS(o.validate(), ConfigError);
  CHECK(FeedSearchSpace::default_offsets(5).size() == 27);
}

TEST_CASE("refinement") {
  const auto tmpl = prototype_assembly();
  const Vec3 c{0, 0, 120};
  const auto same = refine_feed(c, {{0, 0, 0}}, tmpl);
  CHECK(same.position.x == c.x);
  CHECK(same.position.z == c.z);
  CHECK(same.realized_gain_dbi == same.baseline_gain_dbi);

  const auto r = refine_feed(c, {{0, 0, 0}, {0, 0, 10}, {0, 0, -10}, {10, 0, 0}}, tmpl);
  CHECK(r.realized_gain_dbi >= r.baseline_gain_dbi);
  CHECK(r.samples.size() == 4);
  const auto skipped = refine_feed({0, 0, 5}, {{0, 0, 0}, {0, 0, -10}}, tmpl);
  CHECK(skipped.samples.size() == 1);

  const double predicted = aperture_efficiency(at(c)).predicted_gain_dbi;
  CHECK(std::abs(predicted - same.realized_gain_dbi) <= 3.0);
  const auto csv = feed_samples_to_csv(r.samples);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);
}
