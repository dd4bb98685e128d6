#include "rismimo/pattern.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <sstream>

#include "rismimo/feed.hpp"
#include "rismimo/parallel.hpp"

namespace rismimo {

std::string PhaseMask::bitstring() const {
  std::string s;
  s.reserve(states.size());
  for (auto b : states) s.push_back(b ? '1' : '0');
  return s;
}

std::vector<cplx> illumination(const AntennaAssembly& a) {
  const auto pos = element_positions(a.array);
  const Vec3 axis = a.feed.boresight();
  const double k = a.wavenumber();
  std::vector<cplx> amp(pos.size());
  double power = 0.0;
  for (std::size_t n = 0; n < pos.size(); ++n) {
    const Vec3 ray = pos[n] - a.feed.position_mm;
    const double r = ray.norm();
    const double c = std::max(0.0, ray.dot(axis) / r);
    const double mag = std::pow(c, a.feed.q / 2.0) / r;
    amp[n] = std::polar(mag, -k * r);
    power += mag * mag;
  }
  if (power > 0) {
    const double s = 1.0 / std::sqrt(power);
    for (auto& v : amp) v *= s;
  }
  return amp;
}

std::vector<cplx> element_reflections(const AntennaAssembly& a, const PhaseMask& mask) {
  const auto& grouping = a.array.grouping;
  require(mask.size() == static_cast<std::size_t>(grouping.group_count),
          fmt::format("phase mask has {} entries, assembly has {} groups", mask.size(),
                      grouping.group_count));
  const cplx g_off = reflection_coefficient(a.element, DiodeState::Off, a.freq_ghz).value();
  const cplx g_on = reflection_coefficient(a.element, DiodeState::On, a.freq_ghz).value();
  const auto pos = element_positions(a.array);
  std::vector<cplx> gamma(pos.size());
  for (std::size_t n = 0; n < pos.size(); ++n) {
    const int g = grouping.group_of[n];
    cplx base = mask.is_continuous() ? std::polar(1.0, deg2rad(mask.phases_deg[g]))
                                     : (mask.states[g] ? g_on : g_off);
    if (a.incidence.enabled) base *= a.incidence.factor(incidence_angle_deg(a.feed, pos[n]));
    gamma[n] = base;
  }
  return gamma;
}

std::vector<double> AngularGrid::az() const {
  std::vector<double> v;
  const auto n = static_cast<std::size_t>(std::floor((az_max - az_min) / az_step + 1e-9)) + 1;
  for (std::size_t i = 0; i < n; ++i) v.push_back(az_min + i * az_step);
  return v;
}

std::vector<double> AngularGrid::el() const {
  std::vector<double> v;
  const auto n = static_cast<std::size_t>(std::floor((el_max - el_min) / el_step + 1e-9)) + 1;
  for (std::size_t i = 0; i < n; ++i) v.push_back(el_min + i * el_step);
  return v;
}

bool AngularGrid::covers_hemisphere() const {
  return az_min <= -90.0 && el_min <= -90.0 && az().back() >= 90.0 - 1e-9 &&
         el().back() >= 90.0 - 1e-9;
}

void AngularGrid::validate() const {
  require(az_step > 0 && el_step > 0, "grid: steps must be > 0");
  require(az_max >= az_min && el_max >= el_min, "grid: ranges must be increasing");
  require(az_min >= -90 && az_max <= 90 && el_min >= -90 && el_max <= 90,
          "grid: angles must lie in [-90, 90]");
}

// ---------------------------------------------------------------------------

ApertureField::ApertureField(const AntennaAssembly& a, const PhaseMask& mask)
    : ApertureField(a, [&] {
        auto w = illumination(a);
        const auto g = element_reflections(a, mask);
        for (std::size_t n = 0; n < w.size(); ++n) w[n] *= g[n];
        return w;
      }()) {}

ApertureField::ApertureField(const AntennaAssembly& a, std::vector<cplx> weights)
    : n_x_(a.array.n_x),
      n_y_(a.array.n_y),
      period_mm_(a.array.period_mm),
      k_(a.wavenumber()),
      element_q_(a.element_q),
      weights_(std::move(weights)) {
  require(weights_.size() == static_cast<std::size_t>(n_x_) * n_y_,
          "aperture field: weight count must equal element count");
}

cplx ApertureField::field(const Direction& d) const {
  const Vec3 u = d.unit();
  if (u.z <= 0.0) return {0.0, 0.0};
  // Separable lattice sum: E = sum_row e^{jk y v} sum_col w e^{jk x u}.
  const double x0 = -(n_x_ - 1) / 2.0 * period_mm_;
  const double y0 = -(n_y_ - 1) / 2.0 * period_mm_;
  const cplx step_x = std::polar(1.0, k_ * period_mm_ * u.x);
  const cplx step_y = std::polar(1.0, k_ * period_mm_ * u.y);
  cplx ey = std::polar(1.0, k_ * y0 * u.y);
  const cplx ex0 = std::polar(1.0, k_ * x0 * u.x);
  cplx total{0.0, 0.0};
  for (int row = 0; row < n_y_; ++row) {
    const cplx* w = &weights_[static_cast<std::size_t>(row) * n_x_];
    double re = 0.0, im = 0.0;
    cplx ex = ex0;
    for (int col = 0; col < n_x_; ++col) {
      re += w[col].real() * ex.real() - w[col].imag() * ex.imag();
      im += w[col].real() * ex.imag() + w[col].imag() * ex.real();
      ex *= step_x;
    }
    total += cplx(re, im) * ey;
    ey *= step_y;
  }
  return total * std::pow(u.z, element_q_);
}

std::vector<cplx> ApertureField::grid_fields(const AngularGrid& grid) const {
  const auto az = grid.az();
  const auto el = grid.el();
  std::vector<cplx> out(az.size() * el.size());
  parallel_for(el.size(), [&](std::size_t i) {
    for (std::size_t j = 0; j < az.size(); ++j) out[i * az.size() + j] = field({az[j], el[i]});
  });
  return out;
}

double integrate_intensity(const std::vector<double>& az, const std::vector<double>& el,
                           const std::vector<double>& intensity) {
  auto trap_weights = [](const std::vector<double>& x) {
    std::vector<double> w(x.size(), 0.0);
    for (std::size_t i = 0; i + 1 < x.size(); ++i) {
      const double h = deg2rad(x[i + 1] - x[i]) / 2.0;
      w[i] += h;
      w[i + 1] += h;
    }
    return w;
  };
  const auto waz = trap_weights(az);
  const auto wel = trap_weights(el);
  double total = 0.0;
  for (std::size_t i = 0; i < el.size(); ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < az.size(); ++j) row += waz[j] * intensity[i * az.size() + j];
    total += row * wel[i] * std::cos(deg2rad(el[i]));
  }
  return total;
}

double ApertureField::total_power(double step_deg) const {
  const auto grid = AngularGrid::hemisphere(step_deg);
  const auto f = grid_fields(grid);
  std::vector<double> u(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) u[i] = std::norm(f[i]);
  return integrate_intensity(grid.az(), grid.el(), u);
}

// ---------------------------------------------------------------------------

double realized_efficiency(const AntennaAssembly& a, const PhaseMask& mask) {
  const auto amp = illumination(a);
  const auto gamma = element_reflections(a, mask);
  double inc = 0.0, refl = 0.0;
  for (std::size_t n = 0; n < amp.size(); ++n) {
    inc += std::norm(amp[n]);
    refl += std::norm(amp[n] * gamma[n]);
  }
  const double eta_refl = inc > 0 ? refl / inc : 0.0;
  return spillover_efficiency(a) * eta_refl * a.loss_efficiency * from_db10(a.blockage_db);
}

FarFieldPattern far_field(const AntennaAssembly& a, const PhaseMask& mask, const AngularGrid& grid) {
  a.validate();
  grid.validate();
  const ApertureField aperture(a, mask);
  FarFieldPattern p;
  p.az_deg = grid.az();
  p.el_deg = grid.el();
  p.copol = aperture.grid_fields(grid);
  const double xpol_scale = std::pow(10.0, a.cross_pol_db / 20.0);
  p.xpol.resize(p.copol.size());
  for (std::size_t i = 0; i < p.copol.size(); ++i) p.xpol[i] = p.copol[i] * xpol_scale;

  if (grid.covers_hemisphere()) {
    std::vector<double> u(p.copol.size());
    for (std::size_t i = 0; i < u.size(); ++i) u[i] = std::norm(p.copol[i]);
    p.total_power = integrate_intensity(p.az_deg, p.el_deg, u);
  } else {
    p.total_power = aperture.total_power(std::min({grid.az_step, grid.el_step, 0.5}));
  }
  p.efficiency = realized_efficiency(a, mask);

  const double aperture_mm = std::max(a.array.n_x, a.array.n_y) * a.array.period_mm;
  const double hpbw_est = rad2deg(0.886 * a.wavelength_mm() / aperture_mm);
  const double coarsest = std::max(grid.az_step, grid.el_step);
  if (coarsest > 2.0 && hpbw_est < 2.0 * coarsest) {
    p.warnings.push_back(fmt::format(
        "grid step {:.3g} deg undersamples the ~{:.2g} deg main lobe; use a step <= 2 deg", coarsest,
        hpbw_est));
  }
  return p;
}

namespace {

struct CutLobe {
  std::size_t left;   // first null (or edge) on the low side
  std::size_t right;  // first null (or edge) on the high side
  bool left_null;
  bool right_null;
};

CutLobe main_lobe(const std::vector<double>& v, std::size_t peak) {
  CutLobe c{peak, peak, false, false};
  while (c.left > 0 && v[c.left - 1] <= v[c.left]) --c.left;
  while (c.right + 1 < v.size() && v[c.right + 1] <= v[c.right]) ++c.right;
  c.left_null = c.left > 0;
  c.right_null = c.right + 1 < v.size();
  return c;
}

std::optional<double> highest_sidelobe(const std::vector<double>& v, const CutLobe& lobe) {
  std::optional<double> best;
  for (std::size_t i = 1; i + 1 < v.size(); ++i) {
    if (i >= lobe.left && i <= lobe.right) continue;
    if (v[i] >= v[i - 1] && v[i] >= v[i + 1] && v[i] > 0.0) {
      if (!best || v[i] > *best) best = v[i];
    }
  }
  return best;
}

std::optional<double> half_power_width(const std::vector<double>& x, const std::vector<double>& v,
                                       std::size_t peak) {
  const double half = v[peak] / 2.0;
  auto crossing = [&](std::size_t a, std::size_t b) {
    // Linear in dB between samples a (above) and b (below).
    const double da = db10(v[a]), db = db10(std::max(v[b], 1e-300)), dh = db10(half);
    const double t = (da - dh) / (da - db);
    return x[a] + t * (x[b] - x[a]);
  };
  std::optional<double> lo, hi;
  for (std::size_t i = peak; i > 0; --i) {
    if (v[i - 1] < half) {
      lo = crossing(i, i - 1);
      break;
    }
  }
  for (std::size_t i = peak; i + 1 < v.size(); ++i) {
    if (v[i + 1] < half) {
      hi = crossing(i, i + 1);
      break;
    }
  }
  if (!lo || !hi) return std::nullopt;
  return *hi - *lo;
}

double parabolic_offset(double ym, double y0, double yp) {
  const double den = ym - 2.0 * y0 + yp;
  if (den >= 0.0) return 0.0;
  return std::clamp(0.5 * (ym - yp) / den, -0.5, 0.5);
}

}  // namespace

PatternMetrics pattern_metrics(const FarFieldPattern& p) {
  const std::size_t naz = p.az_deg.size();
  const std::size_t nel = p.el_deg.size();
  require(naz > 0 && nel > 0 && p.copol.size() == naz * nel, "pattern_metrics: malformed pattern");
  require(p.total_power > 0, "pattern_metrics: pattern has no radiated power");

  std::size_t ipk = 0;
  double upk = -1.0, xpk = 0.0;
  for (std::size_t i = 0; i < p.copol.size(); ++i) {
    const double u = std::norm(p.copol[i]);
    if (u > upk) {
      upk = u;
      ipk = i;
    }
    if (!p.xpol.empty()) xpk = std::max(xpk, std::norm(p.xpol[i]));
  }
  const std::size_t iel = ipk / naz, iaz = ipk % naz;

  std::vector<double> az_cut(naz), el_cut(nel);
  for (std::size_t j = 0; j < naz; ++j) az_cut[j] = p.intensity(iel, j);
  for (std::size_t i = 0; i < nel; ++i) el_cut[i] = p.intensity(i, iaz);

  PatternMetrics m;
  const double d = 4.0 * kPi * upk / p.total_power;
  m.directivity_dbi = db10(d);
  m.peak_gain_dbi = db10(d * p.efficiency);
  m.cross_pol_db = p.xpol.empty() || xpk <= 0.0 ? -std::numeric_limits<double>::infinity()
                                                : db10(xpk / upk);

  double az_pk = p.az_deg[iaz], el_pk = p.el_deg[iel];
  if (iaz > 0 && iaz + 1 < naz) {
    az_pk += parabolic_offset(db10(std::max(az_cut[iaz - 1], 1e-300)), db10(upk),
                              db10(std::max(az_cut[iaz + 1], 1e-300))) * (p.az_deg[iaz + 1] - p.az_deg[iaz]);
  }
  if (iel > 0 && iel + 1 < nel) {
    el_pk += parabolic_offset(db10(std::max(el_cut[iel - 1], 1e-300)), db10(upk),
                              db10(std::max(el_cut[iel + 1], 1e-300))) * (p.el_deg[iel + 1] - p.el_deg[iel]);
  }
  m.peak_direction = {az_pk, el_pk};

  std::optional<double> side;
  const std::pair<const std::vector<double>*, std::size_t> cuts[] = {{&az_cut, iaz}, {&el_cut, iel}};
  for (const auto& [cut, pk] : cuts) {
    if (cut->size() < 3) continue;
    const auto lobe = main_lobe(*cut, pk);
    if (lobe.left_null && lobe.right_null && lobe.right - lobe.left <= 2) {
      throw ComputeError("pattern_metrics: no identifiable first null around the peak; use a finer grid");
    }
    if (auto s = highest_sidelobe(*cut, lobe); s && (!side || *s > *side)) side = s;
  }
  if (side) m.sll_db = db10(*side / upk);
  m.hpbw_az_deg = half_power_width(p.az_deg, az_cut, iaz);
  m.hpbw_el_deg = half_power_width(p.el_deg, el_cut, iel);
  return m;
}

double directivity_upper_bound_dbi(double area_m2, double freq_ghz) {
  require(area_m2 > 0, "directivity_upper_bound: area must be > 0");
  require(freq_ghz > 0, "directivity_upper_bound: frequency must be > 0");
  const double lambda = kSpeedOfLight / (freq_ghz * 1e9);
  return db10(4.0 * kPi * area_m2 / (lambda * lambda));
}

BeamEvaluation evaluate_beam(const AntennaAssembly& a, const PhaseMask& mask, const Direction& look,
                             double step_deg, double window_deg) {
  const ApertureField aperture(a, mask);
  const double total = aperture.total_power(step_deg);

  // Local grid around the look direction, then compass search down to 1e-4 deg.
  Direction best = look;
  double best_u = aperture.intensity(look);
  const double coarse = 0.25;
  for (double daz = -window_deg; daz <= window_deg + 1e-9; daz += coarse) {
    for (double del = -window_deg; del <= window_deg + 1e-9; del += coarse) {
      const Direction d{std::clamp(look.az_deg + daz, -90.0, 90.0), std::clamp(look.el_deg + del, -90.0, 90.0)};
      const double u = aperture.intensity(d);
      if (u > best_u) {
        best_u = u;
        best = d;
      }
    }
  }
  for (double h = coarse / 2.0; h > 1e-4; h /= 2.0) {
    bool moved = true;
    while (moved) {
      moved = false;
      const Direction trial[] = {{best.az_deg + h, best.el_deg}, {best.az_deg - h, best.el_deg},
                                 {best.az_deg, best.el_deg + h}, {best.az_deg, best.el_deg - h}};
      for (const auto& t : trial) {
        if (std::abs(t.az_deg) > 90.0 || std::abs(t.el_deg) > 90.0) continue;
        const double u = aperture.intensity(t);
        if (u > best_u) {
          best_u = u;
          best = t;
          moved = true;
        }
      }
    }
  }
  BeamEvaluation e;
  e.peak = best;
  const double d = 4.0 * kPi * best_u / total;
  e.directivity_dbi = db10(d);
  e.gain_dbi = db10(d * realized_efficiency(a, mask));
  return e;
}

std::string pattern_to_csv(const FarFieldPattern& p) {
  std::ostringstream os;
  os << "az_deg,el_deg,copol_dB,xpol_dB\n";
  double upk = 0.0;
  for (const auto& c : p.copol) upk = std::max(upk, std::norm(c));
  const double norm = upk > 0 ? upk : 1.0;
  for (std::size_t i = 0; i < p.el_deg.size(); ++i) {
    for (std::size_t j = 0; j < p.az_deg.size(); ++j) {
      const auto k = p.index(i, j);
      os << fmt::format("{:.4f},{:.4f},{:.4f},{:.4f}\n", p.az_deg[j], p.el_deg[i],
                        db10(std::max(std::norm(p.copol[k]) / norm, 1e-30)),
                        db10(std::max(std::norm(p.xpol[k]) / norm, 1e-30)));
    }
  }
  return os.str();
}

}  // namespace rismimo
