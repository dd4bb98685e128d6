#include "rismimo/link.hpp"

#include <algorithm>
#include <cmath>
#include <fftw3.h>
#include <fmt/format.h>
#include <memory>
#include <numeric>
#include <random>
#include <sstream>

#include "rismimo/parallel.hpp"

namespace rismimo {

std::string_view to_string(Modulation m) {
  switch (m) {
    case Modulation::QPSK: return "QPSK";
    case Modulation::QAM16: return "16QAM";
    case Modulation::QAM64: return "64QAM";
    case Modulation::QAM256: return "256QAM";
  }
  return "?";
}

Modulation modulation_from_string(std::string_view s) {
  for (auto m : {Modulation::QPSK, Modulation::QAM16, Modulation::QAM64, Modulation::QAM256}) {
    if (to_string(m) == s) return m;
  }
  throw ConfigError(fmt::format("unknown modulation '{}' (expected QPSK, 16QAM, 64QAM or 256QAM)", s));
}

int bits_per_symbol(Modulation m) {
  switch (m) {
    case Modulation::QPSK: return 2;
    case Modulation::QAM16: return 4;
    case Modulation::QAM64: return 6;
    case Modulation::QAM256: return 8;
  }
  return 0;
}

std::vector<cplx> constellation(Modulation m) {
  const int side = 1 << (bits_per_symbol(m) / 2);
  std::vector<cplx> pts;
  double power = 0.0;
  for (int i = 0; i < side; ++i) {
    for (int q = 0; q < side; ++q) {
      const cplx p(2.0 * i - (side - 1), 2.0 * q - (side - 1));
      pts.push_back(p);
      power += std::norm(p);
    }
  }
  const double s = 1.0 / std::sqrt(power / static_cast<double>(pts.size()));
  for (auto& p : pts) p *= s;
  return pts;
}

void LinkScenario::validate() const {
  require(distance_m > 0, "link: distance must be > 0");
  require(bandwidth_mhz > 0, "link: bandwidth must be > 0");
  require(center_freq_ghz > 0, "link: center frequency must be > 0");
  require(tx_evm_floor >= 0 && tx_evm_floor < 0.5, "link: tx EVM floor must be in [0, 0.5)");
  require(noise_figure_db >= 0, "link: noise figure must be >= 0");
}

double path_loss_fspl(double d, double f_ghz) {
  require(d > 0 && f_ghz > 0, "path loss: distance and frequency must be > 0");
  const double lambda = kSpeedOfLight / (f_ghz * 1e9);
  return 20.0 * std::log10(4.0 * kPi * d / lambda);
}

double noise_power_dbm(double bw_mhz, double nf_db) {
  return kThermalNoiseDbmPerHz + db10(bw_mhz * 1e6) + nf_db;
}

double link_budget(const LinkScenario& s) {
  s.validate();
  const double rx = s.tx_power_dbm + s.tx_gain_dbi - path_loss_fspl(s.distance_m, s.center_freq_ghz) + s.rx_gain_dbi;
  return rx - noise_power_dbm(s.bandwidth_mhz, s.noise_figure_db);
}

double evm_closed_form(double snr_db, double floor) {
  require(!std::isnan(snr_db), "evm: snr must be a number");
  return std::sqrt(floor * floor + 1.0 / from_db10(snr_db));
}

double simulate_evm(double snr_db, double floor, Modulation m, std::size_t n, std::uint64_t seed) {
  require(n >= 1, "evm: n_symbols must be >= 1");
  const auto pts = constellation(m);
  const double sigma_n = std::isinf(snr_db) ? 0.0 : std::sqrt(1.0 / from_db10(snr_db) / 2.0);
  const double sigma_t = floor / std::sqrt(2.0);
  constexpr std::size_t kBatch = 1 << 16;
  const std::size_t batches = (n + kBatch - 1) / kBatch;
  std::vector<double> err(batches, 0.0), ref(batches, 0.0);
  parallel_for(batches, [&](std::size_t b) {
    std::mt19937_64 rng(derive_seed(seed, b));
    std::uniform_int_distribution<std::size_t> pick(0, pts.size() - 1);
    std::normal_distribution<double> g(0.0, 1.0);
    const std::size_t count = std::min(kBatch, n - b * kBatch);
    for (std::size_t i = 0; i < count; ++i) {
      const cplx s = pts[pick(rng)];
      const cplx e(sigma_n * g(rng) + sigma_t * g(rng), sigma_n * g(rng) + sigma_t * g(rng));
      err[b] += std::norm(e);
      ref[b] += std::norm(s);
    }
  });
  const double e = std::accumulate(err.begin(), err.end(), 0.0);
  const double r = std::accumulate(ref.begin(), ref.end(), 0.0);
  return std::sqrt(e / r);
}

double simulate_evm(const LinkScenario& s, std::size_t n, std::uint64_t seed) {
  return simulate_evm(link_budget(s), s.tx_evm_floor, s.modulation, n, seed);
}

std::vector<EvmPoint> evm_vs_distance(const LinkScenario& s, const std::vector<double>& ds) {
  require(std::is_sorted(ds.begin(), ds.end()), "evm sweep: distances must be sorted ascending");
  std::vector<EvmPoint> out;
  for (double d : ds) {
    LinkScenario t = s;
    t.distance_m = d;
    const double snr = link_budget(t);
    const double evm = evm_closed_form(snr, s.tx_evm_floor);
    out.push_back({d, snr, 100.0 * evm, evm <= kEvmLimit64Qam});
  }
  return out;
}

std::string evm_to_csv(const std::vector<EvmPoint>& rows) {
  std::ostringstream os;
  os << "d_m,snr_db,evm_pct,pass_8pct\n";
  for (const auto& r : rows) {
    os << fmt::format("{:.4f},{:.4f},{:.4f},{}\n", r.distance_m, r.snr_db, r.evm_percent, r.pass ? 1 : 0);
  }
  return os.str();
}

// ---------------------------------------------------------------------------

void OfdmParams::validate() const {
  require(fft_size >= 2, "ofdm: fft size must be >= 2");
  require(occupied >= 1 && occupied < fft_size, "ofdm: occupied subcarriers must be in [1, fft size)");
  require(cp_length >= 0 && rolloff >= 0 && rolloff <= cp_length, "ofdm: need 0 <= rolloff <= cp length");
  require(scs_khz > 0, "ofdm: subcarrier spacing must be > 0");
}

namespace {

struct FftwPlanDeleter {
  void operator()(fftw_plan_s* p) const { fftw_destroy_plan(p); }
};
using FftwPlan = std::unique_ptr<fftw_plan_s, FftwPlanDeleter>;

struct FftwBuffer {
  explicit FftwBuffer(std::size_t n) : data(fftw_alloc_complex(n)), size(n) {}
  ~FftwBuffer() { fftw_free(data); }
  FftwBuffer(const FftwBuffer&) = delete;
  FftwBuffer& operator=(const FftwBuffer&) = delete;
  cplx& operator[](std::size_t i) { return reinterpret_cast<cplx*>(data)[i]; }
  fftw_complex* data;
  std::size_t size;
};

}  // namespace

std::vector<cplx> ofdm_waveform(const OfdmParams& p, int n_symbols, std::uint64_t seed) {
  p.validate();
  require(n_symbols >= 1, "ofdm: n_symbols must be >= 1");
  const auto pts = constellation(p.modulation);
  const std::size_t n = p.fft_size, cp = p.cp_length, ro = p.rolloff, len = n + cp;

  // Raised-cosine ramp; ramp[i] + ramp[ro - 1 - i] = 1.
  std::vector<double> ramp(ro);
  for (std::size_t i = 0; i < ro; ++i) ramp[i] = 0.5 * (1.0 - std::cos(kPi * (i + 0.5) / ro));

  FftwBuffer buf(n);
  FftwPlan plan(fftw_plan_dft_1d(static_cast<int>(n), buf.data, buf.data, FFTW_BACKWARD, FFTW_ESTIMATE));
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, pts.size() - 1);
  const double scale = 1.0 / std::sqrt(static_cast<double>(p.occupied));

  std::vector<cplx> out(static_cast<std::size_t>(n_symbols) * len + ro, cplx(0.0, 0.0));
  for (int s = 0; s < n_symbols; ++s) {
    std::fill_n(&buf[0], n, cplx(0.0, 0.0));
    const int lo = -p.occupied / 2;
    for (int k = 0; k < p.occupied; ++k) {
      int sc = lo + k;
      if (sc >= 0) ++sc;  // DC left empty
      buf[static_cast<std::size_t>((sc + static_cast<int>(n)) % static_cast<int>(n))] = pts[pick(rng)];
    }
    fftw_execute(plan.get());
    const std::size_t base = static_cast<std::size_t>(s) * len;
    for (std::size_t i = 0; i < len + ro; ++i) {
      // extended symbol: cyclic prefix, body, cyclic suffix
      const std::size_t src = (i + n - cp) % n;
      double w = 1.0;
      if (i < ro) w = ramp[i];
      else if (i >= len) w = ramp[ro - 1 - (i - len)];
      out[base + i] += buf[src] * (w * scale);
    }
  }
  return out;
}

void PaModel::validate() const {
  require(saturation > 0, "pa: saturation must be > 0");
  require(kind == PaKind::Ideal || smoothness > 0, "pa: Rapp smoothness must be > 0");
}

std::vector<cplx> apply_pa(const std::vector<cplx>& x, const PaModel& pa) {
  pa.validate();
  if (pa.kind == PaKind::Ideal) return x;
  const double two_p = 2.0 * pa.smoothness;
  std::vector<cplx> y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double g = std::abs(x[i]) / pa.saturation;
    if (g <= 1.0) {
      y[i] = x[i] / std::pow(1.0 + std::pow(g, two_p), 1.0 / two_p);
    } else {
      y[i] = x[i] / (g * std::pow(std::pow(g, -two_p) + 1.0, 1.0 / two_p));
    }
  }
  return y;
}

Psd welch_psd(const std::vector<cplx>& x, double fs, int segment) {
  require(segment >= 2, "psd: segment must be >= 2");
  require(x.size() >= static_cast<std::size_t>(segment), "psd: signal shorter than one segment");
  const std::size_t m = segment, hop = m / 2;
  std::vector<double> w(m);
  double w2 = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    w[i] = 0.5 * (1.0 - std::cos(2.0 * kPi * i / m));
    w2 += w[i] * w[i];
  }
  FftwBuffer buf(m);
  FftwPlan plan(fftw_plan_dft_1d(segment, buf.data, buf.data, FFTW_FORWARD, FFTW_ESTIMATE));
  std::vector<double> acc(m, 0.0);
  std::size_t count = 0;
  for (std::size_t start = 0; start + m <= x.size(); start += hop) {
    for (std::size_t i = 0; i < m; ++i) buf[i] = x[start + i] * w[i];
    fftw_execute(plan.get());
    for (std::size_t i = 0; i < m; ++i) acc[i] += std::norm(buf[i]);
    ++count;
  }
  Psd p;
  p.bin_hz = fs / static_cast<double>(m);
  p.freq_hz.resize(m);
  p.power.resize(m);
  // power per bin; sums to the mean sample power
  const double norm = 1.0 / (static_cast<double>(count) * w2 * static_cast<double>(m));
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t src = (i + m / 2) % m;
    p.freq_hz[i] = (static_cast<double>(i) - static_cast<double>(m / 2)) * p.bin_hz;
    p.power[i] = acc[src] * norm;
  }
  return p;
}

double channel_power(const Psd& psd, const Channel& ch) {
  const double nyq = psd.bin_hz * static_cast<double>(psd.freq_hz.size()) / 2.0;
  const double lo = ch.center_hz - ch.bandwidth_hz / 2.0, hi = ch.center_hz + ch.bandwidth_hz / 2.0;
  if (ch.bandwidth_hz <= 0 || lo < -nyq || hi > nyq) {
    throw ConfigError(fmt::format("channel at {:.1f} MHz with {:.1f} MHz bandwidth extends past Nyquist (+/-{:.1f} MHz)",
                                  ch.center_hz / 1e6, ch.bandwidth_hz / 1e6, nyq / 1e6));
  }
  double total = 0.0;
  for (std::size_t i = 0; i < psd.freq_hz.size(); ++i) {
    const double a = psd.freq_hz[i] - psd.bin_hz / 2.0, b = psd.freq_hz[i] + psd.bin_hz / 2.0;
    const double overlap = std::min(b, hi) - std::max(a, lo);
    if (overlap > 0) total += psd.power[i] * overlap / psd.bin_hz;
  }
  return total;
}

std::vector<double> aclr(const std::vector<cplx>& x, double fs, const Channel& designated,
                         const std::vector<Channel>& adjacent, int segment) {
  const auto psd = welch_psd(x, fs, segment);
  const double pd = channel_power(psd, designated);
  if (pd <= 0) throw ComputeError("aclr: no power in the designated channel");
  std::vector<double> out;
  for (const auto& ch : adjacent) out.push_back(db10(std::max(channel_power(psd, ch), 1e-300) / pd));
  return out;
}

// ---------------------------------------------------------------------------

void XpdModel::validate() const {
  require(h_leakage_db < 0 && v_leakage_db < 0, "xpd: leakage must be < 0 dB");
}

DualStreamResult dual_stream_sinr(const StreamGains& g, const XpdModel& xpd, const LinkScenario& s) {
  s.validate();
  xpd.validate();
  const double fspl = path_loss_fspl(s.distance_m, s.center_freq_ghz);
  const double n = from_db10(noise_power_dbm(s.bandwidth_mhz, s.noise_figure_db));
  const double sh = from_db10(s.tx_power_dbm + g.h_dbi - fspl + s.rx_gain_dbi);
  const double sv = from_db10(s.tx_power_dbm + g.v_dbi - fspl + s.rx_gain_dbi);
  DualStreamResult r;
  r.snr_h_db = db10(sh / n);
  r.snr_v_db = db10(sv / n);
  r.sinr_h_db = db10(sh / (sv * from_db10(xpd.h_leakage_db) + n));
  r.sinr_v_db = db10(sv / (sh * from_db10(xpd.v_leakage_db) + n));
  return r;
}

LinkScenario dual_stream_scenario() {
  LinkScenario s;
  s.distance_m = 3.0;
  s.center_freq_ghz = 26.6;
  s.bandwidth_mhz = 800.0;
  return s;
}

// ---------------------------------------------------------------------------

void FrameConfig::validate() const {
  require(!slot_pattern.empty(), "frame: slot pattern must be nonempty");
  require(slot_pattern.find_first_not_of("DSU") == std::string::npos, "frame: slot pattern must use only D, S, U");
  require(s_dl >= 0 && s_guard >= 0 && s_ul >= 0 && s_dl + s_guard + s_ul == 14,
          "frame: S-slot split must be non-negative and sum to 14");
  require(layers >= 0, "frame: layers must be >= 0");
  require(cc_count >= 0, "frame: cc count must be >= 0");
  require(overhead >= 0 && overhead < 1, "frame: overhead must be in [0, 1)");
  require(prb_per_cc >= 0, "frame: prb count must be >= 0");
  require(modulation_order >= 1, "frame: modulation order must be >= 1");
  require(max_code_rate > 0 && max_code_rate <= 1, "frame: max code rate must be in (0, 1]");
  const double mu = std::log2(scs_khz / 15.0);
  require(scs_khz > 0 && std::abs(mu - std::round(mu)) < 1e-9 && mu >= 0,
          "frame: subcarrier spacing must be 15 * 2^mu kHz");
}

double dl_duty(const FrameConfig& f) {
  f.validate();
  const auto d = std::count(f.slot_pattern.begin(), f.slot_pattern.end(), 'D');
  const auto s = std::count(f.slot_pattern.begin(), f.slot_pattern.end(), 'S');
  return static_cast<double>(14 * d + f.s_dl * s) / (14.0 * static_cast<double>(f.slot_pattern.size()));
}

double peak_rate_3gpp(const FrameConfig& f) {
  const double duty = dl_duty(f);
  const double mu = std::round(std::log2(f.scs_khz / 15.0));
  const double t_symbol = 1e-3 / (14.0 * std::pow(2.0, mu));
  const double per_cc = f.layers * f.modulation_order * f.scaling * f.max_code_rate *
                        (f.prb_per_cc * 12.0 / t_symbol) * (1.0 - f.overhead) * duty;
  return per_cc * f.cc_count;
}

std::vector<RateCalibration> calibrate_peak_rate(const FrameConfig& base, double target) {
  require(target > 0, "rate calibration: target must be > 0");
  std::vector<RateCalibration> out;
  for (double oh : {0.08, 0.10, 0.14, 0.18}) {
    FrameConfig f = base;
    f.overhead = oh;
    const double r = peak_rate_3gpp(f);
    out.push_back({oh, f.prb_per_cc, r, (r - target) / target});
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const auto& a, const auto& b) { return std::abs(a.rel_error) < std::abs(b.rel_error); });
  return out;
}

FrameConfig prototype_frame() {
  FrameConfig f;
  f.overhead = calibrate_peak_rate(f, kPrototypePeakRateBps).front().overhead;
  return f;
}

double power_saving(double cand, double base) {
  require(base > 0, "power saving: baseline power must be > 0");
  return (base - cand) / base;
}

}  // namespace rismimo
