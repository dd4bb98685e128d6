#include "rismimo/synthesis.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <map>
#include <nlohmann/json.hpp>
#include <random>

#include "rismimo/parallel.hpp"

namespace rismimo {

double required_phase(const AntennaAssembly& a, int n, const Direction& target) {
  require(n >= 0 && n < a.array.element_count(), "required_phase: element index out of range");
  target.validate();
  const int row = n / a.array.n_x, col = n % a.array.n_x;
  const Vec3 r{a.array.x_of_col(col), a.array.y_of_row(row), 0.0};
  const double path = (a.feed.position_mm - r).norm() - r.dot(target.unit());
  return wrap_deg_360(rad2deg(a.wavenumber() * path));
}

std::uint8_t quantize_one_bit(double phase_deg) {
  const double p = wrap_deg_360(phase_deg);
  const double d0 = std::min(p, 360.0 - p);
  const double d180 = std::abs(p - 180.0);
  return d180 <= d0 ? 1 : 0;
}

void Sector::validate() const {
  require(az_max >= az_min && el_max >= el_min, "sector: bounds must be ordered");
  require(az_min >= -90 && az_max <= 90 && el_min >= -90 && el_max <= 90,
          "sector: bounds must lie in [-90, 90]");
}

std::vector<double> group_phases(const AntennaAssembly& a, const Direction& target, bool compensate) {
  const auto& g = a.array.grouping;
  const auto pos = element_positions(a.array);
  std::vector<cplx> acc(g.group_count, cplx(0.0, 0.0));
  for (int n = 0; n < a.array.element_count(); ++n) {
    double phi = required_phase(a, n, target);
    if (compensate) phi -= a.incidence.phase_offset_deg(incidence_angle_deg(a.feed, pos[n]));
    acc[g.group_of[n]] += std::polar(1.0, deg2rad(phi));
  }
  std::vector<double> out(g.group_count);
  for (int i = 0; i < g.group_count; ++i) {
    out[i] = std::abs(acc[i]) > 0 ? wrap_deg_360(rad2deg(std::arg(acc[i]))) : 0.0;
  }
  return out;
}

namespace {

PhaseMask mask_from_phases(const std::vector<double>& phases, bool continuous) {
  if (continuous) return PhaseMask::continuous(phases);
  std::vector<std::uint8_t> s(phases.size());
  std::transform(phases.begin(), phases.end(), s.begin(), quantize_one_bit);
  return PhaseMask::binary(std::move(s));
}

}  // namespace

Codeword synthesize_codeword(const AntennaAssembly& a, const Direction& target, const SynthesisOptions& o) {
  Codeword c;
  c.mask = mask_from_phases(group_phases(a, target, o.compensate_incidence), o.continuous);
  c.target = target;
  c.sector = {target.az_deg, target.az_deg, target.el_deg, target.el_deg};
  return c;
}

std::vector<ScanPoint> scan_evaluation(const AntennaAssembly& a, const std::vector<Direction>& dirs,
                                       const SynthesisOptions& o, double step_deg) {
  const Direction broadside{0.0, 0.0};
  const double g0 = evaluate_beam(a, synthesize_codeword(a, broadside, o).mask, broadside, step_deg).gain_dbi;
  std::vector<ScanPoint> out;
  for (const auto& d : dirs) {
    const auto e = evaluate_beam(a, synthesize_codeword(a, d, o).mask, d, step_deg);
    out.push_back({d, e.peak, angular_distance_deg(d, e.peak), e.gain_dbi, g0 - e.gain_dbi});
  }
  return out;
}

double narrow_beamwidth_deg(const AntennaAssembly& a, double az_deg) {
  const double aperture = a.array.n_x * a.array.period_mm;
  return rad2deg(0.886 * a.wavelength_mm() / (aperture * std::cos(deg2rad(az_deg))));
}

double sector_ripple_db(const AntennaAssembly& a, const PhaseMask& mask, const Sector& s, double step) {
  const ApertureField ap(a, mask);
  const double total = ap.total_power(step);
  const double eff = realized_efficiency(a, mask);
  std::vector<double> az;
  for (double v = s.az_min; v <= s.az_max + 1e-9; v += step) az.push_back(v);
  if (az.size() >= 3) az = std::vector<double>(az.begin() + 1, az.end() - 1);
  const double el = s.center().el_deg;
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (double v : az) {
    const double g = db10(4.0 * kPi * ap.intensity({v, el}) / total * eff);
    lo = std::min(lo, g);
    hi = std::max(hi, g);
  }
  return hi - lo;
}

WideBeam synthesize_wide_beam(const AntennaAssembly& a, const Sector& s, const SynthesisOptions& o,
                              int subapertures, bool phase_align) {
  s.validate();
  WideBeam w;
  const Direction c = s.center();
  const double bw = narrow_beamwidth_deg(a, c.az_deg);
  const bool narrow = s.az_width() <= bw * (1.0 + 1e-9);
  int k = subapertures;
  if (k <= 0) k = narrow ? 1 : static_cast<int>(std::ceil(s.az_width() / bw));
  k = std::min(k, a.array.n_x);
  if (k == 1) {
    w.codeword = synthesize_codeword(a, c, o);
    w.directions = {c};
    if (narrow) {
      w.note = fmt::format("sector width {:.3g} deg is within one narrow beam ({:.3g} deg); narrow codeword used",
                           s.az_width(), bw);
    }
  } else {
    const auto& g = a.array.grouping;
    const int nx = a.array.n_x;
    std::vector<int> block_of_group(g.group_count, -1);
    for (int n = a.array.element_count() - 1; n >= 0; --n) block_of_group[g.group_of[n]] = (n % nx) * k / nx;
    std::vector<double> phases(g.group_count);
    double offset = 0.0, prev_u = 0.0;
    const double kw = rad2deg(a.wavenumber());
    for (int b = 0; b < k; ++b) {
      const Direction d{s.az_min + (b + 0.5) * s.az_width() / k, c.el_deg};
      const double u = d.unit().x;
      if (phase_align && b > 0) {
        const int first_col = (b * nx + k - 1) / k;
        const double x_boundary = a.array.x_of_col(first_col) - a.array.period_mm / 2.0;
        offset += kw * x_boundary * (u - prev_u);
      }
      prev_u = u;
      w.directions.push_back(d);
      const auto p = group_phases(a, d, o.compensate_incidence);
      for (int i = 0; i < g.group_count; ++i) {
        if (block_of_group[i] == b) phases[i] = wrap_deg_360(p[i] + offset);
      }
    }
    w.codeword.mask = mask_from_phases(phases, o.continuous);
    w.codeword.target = c;
  }
  w.codeword.sector = s;
  w.subapertures = k;
  w.ripple_db = sector_ripple_db(a, w.codeword.mask, s);
  return w;
}

// ---------------------------------------------------------------------------

int Codebook::codeword_count() const {
  int n = 0;
  for (const auto& l : levels) n += static_cast<int>(l.size());
  return n;
}

int Codebook::id(int level, int index) const {
  int base = 0;
  for (int l = 0; l < level; ++l) base += static_cast<int>(levels[l].size());
  return base + index;
}

std::string Codebook::to_json() const {
  nlohmann::ordered_json j;
  j["branching"] = branching;
  j["scan"] = {{"az_min", scan.az_min}, {"az_max", scan.az_max}, {"el_min", scan.el_min}, {"el_max", scan.el_max}};
  auto& cws = j["codewords"] = nlohmann::ordered_json::array();
  for (const auto& level : levels) {
    for (const auto& c : level) {
      cws.push_back({{"level", c.level},
                     {"index", c.index},
                     {"sector", {c.sector.az_min, c.sector.az_max, c.sector.el_min, c.sector.el_max}},
                     {"target", {c.target.az_deg, c.target.el_deg}},
                     {"states", c.mask.bitstring()}});
    }
  }
  return j.dump(2);
}

Codebook build_codebook(const AntennaAssembly& a, const Sector& scan, int levels, int branching,
                        const SynthesisOptions& o) {
  scan.validate();
  require(levels >= 1, "codebook: levels must be >= 1");
  require(branching >= 2, "codebook: branching must be >= 2");
  Codebook cb;
  cb.branching = branching;
  cb.scan = scan;
  int count = 1;
  for (int l = 0; l < levels; ++l) {
    count *= branching;
    std::vector<Codeword> level(count);
    const double width = scan.az_width() / count;
    parallel_for(static_cast<std::size_t>(count), [&](std::size_t i) {
      const Sector s{scan.az_min + i * width, scan.az_min + (i + 1) * width, scan.el_min, scan.el_max};
      Codeword c = synthesize_wide_beam(a, s, o).codeword;
      c.sector = s;
      c.level = l;
      c.index = static_cast<int>(i);
      level[i] = std::move(c);
    });
    cb.levels.push_back(std::move(level));
  }
  return cb;
}

// ---------------------------------------------------------------------------

BeamTrainer::BeamTrainer(const AntennaAssembly& a, Codebook cb, double az_step, double el_step)
    : codebook_(std::move(cb)) {
  require(!codebook_.levels.empty(), "trainer: empty codebook");
  const AngularGrid grid{-90.0,
                         90.0,
                         az_step,
                         std::max(-90.0, codebook_.scan.el_min - 10.0),
                         std::min(90.0, codebook_.scan.el_max + 10.0),
                         el_step};
  grid.validate();
  az_ = grid.az();
  el_ = grid.el();
  std::vector<const Codeword*> flat;
  for (const auto& l : codebook_.levels)
    for (const auto& c : l) flat.push_back(&c);
  table_.resize(flat.size());
  for (std::size_t i = 0; i < flat.size(); ++i) {
    const ApertureField ap(a, flat[i]->mask);
    const double scale = 4.0 * kPi / ap.total_power(1.0) * realized_efficiency(a, flat[i]->mask);
    const auto f = ap.grid_fields(grid);
    table_[i].resize(f.size());
    for (std::size_t k = 0; k < f.size(); ++k) table_[i][k] = std::norm(f[k]) * scale;
  }
  double sum = 0.0;
  const auto& leaves = codebook_.leaves();
  for (const auto& c : leaves) sum += gain(c.level, c.index, c.target);
  mean_leaf_gain_ = sum / static_cast<double>(leaves.size());
}

double BeamTrainer::gain(int level, int index, const Direction& d) const {
  const auto& t = table_[codebook_.id(level, index)];
  auto locate = [](const std::vector<double>& x, double v, std::size_t& i, double& f) {
    if (x.size() == 1) {
      i = 0;
      f = 0.0;
      return;
    }
    const double step = x[1] - x[0];
    const double pos = std::clamp((v - x[0]) / step, 0.0, static_cast<double>(x.size() - 1));
    i = std::min(static_cast<std::size_t>(pos), x.size() - 2);
    f = pos - static_cast<double>(i);
  };
  std::size_t ia, ie;
  double fa, fe;
  locate(az_, d.az_deg, ia, fa);
  locate(el_, d.el_deg, ie, fe);
  const std::size_t naz = az_.size();
  auto at = [&](std::size_t e, std::size_t z) { return t[e * naz + z]; };
  if (el_.size() == 1) return (1 - fa) * at(0, ia) + fa * at(0, ia + 1);
  return (1 - fe) * ((1 - fa) * at(ie, ia) + fa * at(ie, ia + 1)) +
         fe * ((1 - fa) * at(ie + 1, ia) + fa * at(ie + 1, ia + 1));
}

double BeamTrainer::noise_variance(double snr_db) const { return mean_leaf_gain_ / from_db10(snr_db); }

TrainingResult BeamTrainer::train(const Direction& truth, const TrainingConfig& cfg, std::uint64_t seed) const {
  const double sigma = std::sqrt(noise_variance(cfg.snr_db) / 2.0);
  const int b = codebook_.branching;
  std::map<int, double> seen;
  TrainingResult r;
  auto measure = [&](int level, int index) {
    const int id = codebook_.id(level, index);
    if (auto it = seen.find(id); it != seen.end()) return it->second;
    double re = 0.0, im = 0.0;
    if (sigma > 0.0) {
      std::mt19937_64 rng(derive_seed(seed, static_cast<std::uint64_t>(id)));
      std::normal_distribution<double> n(0.0, sigma);
      re = n(rng);
      im = n(rng);
    }
    const double m = std::norm(cplx(std::sqrt(gain(level, index, truth)) + re, im));
    ++r.pilots_used;
    return seen[id] = m;
  };
  auto best_of = [&](int level, int first, int last) {
    int best = first;
    double best_m = measure(level, first);
    for (int i = first + 1; i < last; ++i) {
      const double m = measure(level, i);
      if (m > best_m) {
        best_m = m;
        best = i;
      }
    }
    return best;
  };

  int p = best_of(0, 0, static_cast<int>(codebook_.levels[0].size()));
  const double accept = from_db10(cfg.accept_threshold_db);
  for (int l = 1; l < static_cast<int>(codebook_.levels.size()); ++l) {
    const double parent_m = measure(l - 1, p);
    int c = best_of(l, p * b, (p + 1) * b);
    if (cfg.widening && measure(l, c) < parent_m * accept) {
      ++r.widenings_triggered;
      if (l == 1) {
        c = best_of(l, 0, static_cast<int>(codebook_.levels[l].size()));
      } else {
        const int gp = p / b;
        c = best_of(l, gp * b * b, (gp + 1) * b * b);
      }
    }
    p = c;
  }
  r.leaf_index = p;
  r.success = codebook_.leaves()[p].sector.contains(truth);
  return r;
}

int BeamTrainer::exhaustive_leaf(const Direction& truth) const {
  const int last = static_cast<int>(codebook_.levels.size()) - 1;
  int best = 0;
  double best_g = gain(last, 0, truth);
  for (int i = 1; i < static_cast<int>(codebook_.leaves().size()); ++i) {
    const double g = gain(last, i, truth);
    if (g > best_g) {
      best_g = g;
      best = i;
    }
  }
  return best;
}

MonteCarloSummary training_monte_carlo(const BeamTrainer& trainer, int trials, const TrainingConfig& cfg,
                                       std::uint64_t seed) {
  require(trials >= 1, "monte carlo: trials must be >= 1");
  struct Trial {
    TrainingResult with, without;
  };
  std::vector<Trial> res(trials);
  const Sector& scan = trainer.codebook().scan;
  parallel_for(static_cast<std::size_t>(trials), [&](std::size_t t) {
    const std::uint64_t ts = derive_seed(seed, t);
    std::mt19937_64 rng(ts);
    std::uniform_real_distribution<double> ua(scan.az_min, scan.az_max);
    std::uniform_real_distribution<double> ue(scan.el_min, scan.el_max);
    const Direction truth{ua(rng), scan.el_max > scan.el_min ? ue(rng) : scan.el_min};
    const std::uint64_t noise_seed = derive_seed(ts, 0xA5A5);
    TrainingConfig on = cfg, off = cfg;
    on.widening = true;
    off.widening = false;
    res[t] = {trainer.train(truth, on, noise_seed), trainer.train(truth, off, noise_seed)};
  });
  MonteCarloSummary s;
  s.trials = trials;
  double d2 = 0.0;
  for (const auto& r : res) {
    s.success_with += r.with.success;
    s.success_without += r.without.success;
    s.pilots_with += r.with.pilots_used;
    s.pilots_without += r.without.pilots_used;
    s.mean_widenings += r.with.widenings_triggered;
    const double d = static_cast<double>(r.with.success) - static_cast<double>(r.without.success);
    s.paired_diff_mean += d;
    d2 += d * d;
  }
  const double n = trials;
  s.success_with /= n;
  s.success_without /= n;
  s.pilots_with /= n;
  s.pilots_without /= n;
  s.mean_widenings /= n;
  s.paired_diff_mean /= n;
  if (trials > 1) {
    const double var = (d2 - n * s.paired_diff_mean * s.paired_diff_mean) / (n - 1);
    s.paired_diff_se = std::sqrt(std::max(var, 0.0) / n);
  }
  return s;
}

}  // namespace rismimo
