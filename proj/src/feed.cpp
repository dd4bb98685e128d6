#include "rismimo/feed.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <gsl/gsl_multimin.h>
#include <sstream>

#include "rismimo/parallel.hpp"

namespace rismimo {

double spillover_efficiency(const AntennaAssembly& a, int samples) {
  require(samples >= 1, "spillover: samples must be >= 1");
  const Vec3 p = a.feed.position_mm;
  const Vec3 axis = a.feed.boresight();
  const double lx = a.array.n_x * a.array.period_mm;
  const double ly = a.array.n_y * a.array.period_mm;
  const double hx = lx / samples, hy = ly / samples;
  const double q = a.feed.q;
  double sum = 0.0;
  for (int i = 0; i < samples; ++i) {
    const double y = -ly / 2 + (i + 0.5) * hy;
    for (int j = 0; j < samples; ++j) {
      const Vec3 d = Vec3{-lx / 2 + (j + 0.5) * hx, y, 0.0} - p;
      const double r = d.norm();
      const double c = d.dot(axis) / r;
      if (c <= 0.0) continue;
      // cos^q(theta_feed) dOmega, dOmega = cos(theta_inc) dA / r^2
      sum += std::pow(c, q) * p.z / (r * r * r);
    }
  }
  const double total = 2.0 * kPi / (q + 1.0);
  return std::min(1.0, sum * hx * hy / total);
}

double illumination_efficiency(const AntennaAssembly& a) {
  const auto amp = illumination(a);
  double s = 0.0, s2 = 0.0;
  for (const auto& v : amp) {
    s += std::abs(v);
    s2 += std::norm(v);
  }
  return s * s / (static_cast<double>(amp.size()) * s2);
}

EfficiencyBreakdown aperture_efficiency(const AntennaAssembly& a, bool one_bit) {
  a.validate();
  EfficiencyBreakdown e;
  e.spillover = spillover_efficiency(a);
  e.illumination = illumination_efficiency(a);
  e.directivity_dbi = directivity_upper_bound_dbi(a.array.aperture_area_m2(), a.freq_ghz);
  e.predicted_gain_dbi = e.directivity_dbi + db10(e.spillover * e.illumination) + db10(a.loss_efficiency) +
                         a.blockage_db + (one_bit ? kOneBitLossDb : 0.0);
  return e;
}

std::vector<Vec3> FeedSearchSpace::default_offsets(double spacing) {
  std::vector<Vec3> o;
  o.push_back({0, 0, 0});
  for (int i = -1; i <= 1; ++i)
    for (int j = -1; j <= 1; ++j)
      for (int k = -1; k <= 1; ++k)
        if (i || j || k) o.push_back({i * spacing, j * spacing, k * spacing});
  return o;
}

void FeedSearchSpace::validate() const {
  require(x_max > x_min && y_max > y_min && z_max > z_min, "feed search: bounds must have positive volume");
  require(z_min > 0, "feed search: z lower bound must be > 0");
  require(resolution_mm > 0, "feed search: resolution must be > 0");
  require(!offsets.empty(), "feed search: refinement offsets must be nonempty");
  require(std::any_of(offsets.begin(), offsets.end(), [](const Vec3& v) { return v.x == 0 && v.y == 0 && v.z == 0; }),
          "feed search: refinement offsets must include the zero offset");
}

bool FeedSearchSpace::contains(const Vec3& p) const {
  return p.x >= x_min && p.x <= x_max && p.y >= y_min && p.y <= y_max && p.z >= z_min && p.z <= z_max;
}

namespace {

std::vector<double> axis_nodes(double lo, double hi, double step) {
  std::vector<double> v;
  const auto n = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
  for (std::size_t i = 0; i < n; ++i) v.push_back(lo + static_cast<double>(i) * step);
  return v;
}

struct PolishContext {
  const FeedSearchSpace* space;
  AntennaAssembly assembly;
  bool one_bit;
};

double polish_objective(const gsl_vector* x, void* params) {
  auto* ctx = static_cast<PolishContext*>(params);
  const Vec3 p{gsl_vector_get(x, 0), gsl_vector_get(x, 1), gsl_vector_get(x, 2)};
  if (!ctx->space->contains(p)) return 1e6;
  AntennaAssembly a = ctx->assembly;
  a.feed.position_mm = p;
  return -aperture_efficiency(a, ctx->one_bit).predicted_gain_dbi;
}

}  // namespace

CoarseResult coarse_optimize_feed(const FeedSearchSpace& space, const AntennaAssembly& tmpl, bool one_bit) {
  space.validate();
  const auto xs = axis_nodes(space.x_min, space.x_max, space.resolution_mm);
  const auto ys = axis_nodes(space.y_min, space.y_max, space.resolution_mm);
  const auto zs = axis_nodes(space.z_min, space.z_max, space.resolution_mm);
  CoarseResult res;
  res.grid.resize(xs.size() * ys.size() * zs.size());
  parallel_for(res.grid.size(), [&](std::size_t i) {
    const std::size_t iz = i % zs.size();
    const std::size_t iy = (i / zs.size()) % ys.size();
    const std::size_t ix = i / (zs.size() * ys.size());
    AntennaAssembly a = tmpl;
    a.feed.position_mm = {xs[ix], ys[iy], zs[iz]};
    res.grid[i] = {a.feed.position_mm, aperture_efficiency(a, one_bit)};
  });
  std::size_t best = 0;
  for (std::size_t i = 1; i < res.grid.size(); ++i) {
    if (res.grid[i].eff.predicted_gain_dbi > res.grid[best].eff.predicted_gain_dbi) best = i;
  }
  res.grid_best = res.grid[best].position;
  res.grid_best_eff = res.grid[best].eff;

  PolishContext ctx{&space, tmpl, one_bit};
  gsl_multimin_function fn{&polish_objective, 3, &ctx};
  gsl_vector* x = gsl_vector_alloc(3);
  gsl_vector* step = gsl_vector_alloc(3);
  gsl_vector_set(x, 0, res.grid_best.x);
  gsl_vector_set(x, 1, res.grid_best.y);
  gsl_vector_set(x, 2, res.grid_best.z);
  gsl_vector_set_all(step, space.resolution_mm / 2.0);
  gsl_multimin_fminimizer* s = gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, 3);
  gsl_multimin_fminimizer_set(s, &fn, x, step);
  for (int it = 0; it < 400; ++it) {
    if (gsl_multimin_fminimizer_iterate(s) != GSL_SUCCESS) break;
    if (gsl_multimin_test_size(gsl_multimin_fminimizer_size(s), 1e-3) == GSL_SUCCESS) break;
  }
  const gsl_vector* xm = gsl_multimin_fminimizer_x(s);
  Vec3 polished{gsl_vector_get(xm, 0), gsl_vector_get(xm, 1), gsl_vector_get(xm, 2)};
  gsl_multimin_fminimizer_free(s);
  gsl_vector_free(x);
  gsl_vector_free(step);

  AntennaAssembly a = tmpl;
  a.feed.position_mm = polished;
  const auto eff = aperture_efficiency(a, one_bit);
  if (space.contains(polished) && eff.predicted_gain_dbi >= res.grid_best_eff.predicted_gain_dbi) {
    res.position = polished;
    res.eff = eff;
  } else {
    res.position = res.grid_best;
    res.eff = res.grid_best_eff;
  }
  return res;
}

RefineResult refine_feed(const Vec3& candidate, const std::vector<Vec3>& offsets, const AntennaAssembly& tmpl,
                         const Direction& target, const SynthesisOptions& options, double step_deg) {
  require(!offsets.empty(), "refine_feed: offsets must be nonempty");
  require(std::any_of(offsets.begin(), offsets.end(), [](const Vec3& v) { return v.x == 0 && v.y == 0 && v.z == 0; }),
          "refine_feed: offsets must include the zero offset");
  RefineResult res;
  res.realized_gain_dbi = -std::numeric_limits<double>::infinity();
  for (const auto& o : offsets) {
    const Vec3 p = candidate + o;
    if (p.z <= 0) continue;
    AntennaAssembly a = tmpl;
    a.feed.position_mm = p;
    const auto cw = synthesize_codeword(a, target, options);
    FeedSample s{p, aperture_efficiency(a, !options.continuous)};
    s.realized_gain_dbi = evaluate_beam(a, cw.mask, target, step_deg).gain_dbi;
    if (o.x == 0 && o.y == 0 && o.z == 0) res.baseline_gain_dbi = s.realized_gain_dbi;
    if (s.realized_gain_dbi > res.realized_gain_dbi) {
      res.realized_gain_dbi = s.realized_gain_dbi;
      res.position = p;
    }
    res.samples.push_back(s);
  }
  return res;
}

std::string feed_samples_to_csv(const std::vector<FeedSample>& samples) {
  std::ostringstream os;
  os << "x,y,z,eta_s,eta_i,predicted_gain,realized_gain\n";
  for (const auto& s : samples) {
    os << fmt::format("{:.4f},{:.4f},{:.4f},{:.6f},{:.6f},{:.4f},", s.position.x, s.position.y, s.position.z,
                      s.eff.spillover, s.eff.illumination, s.eff.predicted_gain_dbi);
    if (!std::isnan(s.realized_gain_dbi)) os << fmt::format("{:.4f}", s.realized_gain_dbi);
    os << '\n';
  }
  return os.str();
}

}  // namespace rismimo
