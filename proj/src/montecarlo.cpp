#include "gz/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/special_functions/erf.hpp>
#include <boost/math/tools/minima.hpp>
#include <boost/random/sobol.hpp>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "gz/error.hpp"
#include "gz/geometry.hpp"
#include "gz/hiprec.hpp"
#include "gz/kernel.hpp"
#include "gz/rng.hpp"
#include "gz/sampler.hpp"

namespace gz {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

int resolve_threads(int t) { return t > 0 ? t : default_threads(); }

// Runs f(begin, end) over fixed blocks of kBlockSize indices. Results come back
// in block order whatever the thread count.
template <class R, class F>
std::vector<R> run_blocks(long n, int threads, F&& f) {
  const long nb = (n + kBlockSize - 1) / kBlockSize;
  std::vector<R> out(nb);
  if (threads <= 1 || nb <= 1) {
    for (long b = 0; b < nb; ++b) out[b] = f(b * kBlockSize, std::min(n, (b + 1) * kBlockSize));
    return out;
  }
  std::atomic<long> next{0};
  std::exception_ptr err;
  std::mutex err_mu;
  auto worker = [&] {
    for (;;) {
      long b = next.fetch_add(1);
      if (b >= nb) return;
      try {
        out[b] = f(b * kBlockSize, std::min(n, (b + 1) * kBlockSize));
      } catch (...) {
        std::lock_guard<std::mutex> lk(err_mu);
        if (!err) err = std::current_exception();
        next = nb;
      }
    }
  };
  std::vector<std::thread> pool;
  for (int t = 0; t < std::min<long>(threads, nb); ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (err) std::rethrow_exception(err);
  return out;
}

void require_a1(const SpectralMeasure1D& mu, const McOptions& opt) {
  if (!opt.check_a1) return;
  AssumptionReport a = check_assumption_a1(mu);
  if (!a.satisfied) fail(ErrorKind::AssumptionViolated, "density condition fails: " + a.reason);
}

// Per-path value producer on a uniform grid over [0, T].
class PathSource {
 public:
  PathSource(const SpectralMeasure1D& mu, double T, const McOptions& opt)
      : method_(opt.method), n_waves_(opt.n_waves) {
    grid_.dimension = 1;
    grid_.extent = T;
    grid_.points = opt.grid_points > 0 ? opt.grid_points : auto_grid_points(mu, T);
    if (method_ == TailMethod::GridExact) exact_.emplace(mu, grid_);
    else spectral_.emplace(mu, n_waves_, T);
  }
  const GridSpec& grid() const { return grid_; }
  void draw(std::uint64_t seed, std::uint64_t index, double* out) const {
    if (exact_) {
      exact_->draw(seed, index, out);
      return;
    }
    WaveSum1D w = spectral_->draw(seed, index);
    const int n = grid_.points;
    std::fill(out, out + n, 0.0);
    const double h = grid_.spacing();
    for (std::size_t j = 0; j < w.freq.size(); ++j) {
      // rotate (cos, sin) along the grid
      double c1 = std::cos(w.freq[j] * h), s1 = std::sin(w.freq[j] * h);
      double c = 1.0, s = 0.0;
      for (int i = 0; i < n; ++i) {
        if (i % 64 == 0) {
          c = std::cos(w.freq[j] * i * h);
          s = std::sin(w.freq[j] * i * h);
        }
        out[i] += w.a[j] * c + w.b[j] * s;
        double cn = c * c1 - s * s1;
        s = s * c1 + c * s1;
        c = cn;
      }
    }
  }
  std::string method_name() const { return to_string(method_); }

 private:
  TailMethod method_;
  int n_waves_;
  GridSpec grid_;
  std::optional<ExactPathSampler> exact_;
  std::optional<SpectralSampler1D> spectral_;
};

double path_sup(const double* v, int n) {
  double best = 0.0;
  int arg = 0;
  for (int i = 0; i < n; ++i)
    if (std::abs(v[i]) > best) {
      best = std::abs(v[i]);
      arg = i;
    }
  if (arg > 0 && arg + 1 < n) {
    double a = v[arg - 1], b = v[arg], c = v[arg + 1];
    double den = a - 2.0 * b + c;
    if (den != 0.0 && (den > 0.0) != (b > 0.0)) {
      double vertex = b - (c - a) * (c - a) / (8.0 * den);
      best = std::max(best, std::abs(vertex));
    }
  }
  return best;
}

struct KahanSum {
  double s = 0.0, c = 0.0;
  void add(double x) {
    double y = x - c;
    double t = s + y;
    c = (t - s) - y;
    s = t;
  }
};

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }
double normal_quantile(double p) { return -std::sqrt(2.0) * boost::math::erfc_inv(2.0 * p); }

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace

// ---------------------------------------------------------------------------

Interval95 wilson_interval(long hits, long n, double z) {
  if (n <= 0) return {0.0, 1.0};
  if (hits < 0 || hits > n) throw std::invalid_argument("hits outside [0, n]");
  const double nn = static_cast<double>(n);
  const double p = hits / nn;
  const double z2 = z * z;
  const double den = 1.0 + z2 / nn;
  const double center = (p + z2 / (2.0 * nn)) / den;
  const double half = z * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn)) / den;
  Interval95 r{std::max(0.0, center - half), std::min(1.0, center + half)};
  if (hits == 0) r.lo = 0.0;
  if (hits == n) r.hi = 1.0;
  r.lo = std::min(r.lo, p);
  r.hi = std::max(r.hi, p);
  return r;
}

double bonferroni_z(int comparisons, double alpha) {
  if (comparisons < 1 || !(alpha > 0.0 && alpha < 1.0))
    throw std::invalid_argument("bonferroni_z needs k >= 1 and alpha in (0,1)");
  boost::math::normal nd;
  return boost::math::quantile(nd, 1.0 - alpha / (2.0 * comparisons));
}

int default_threads() {
  if (const char* s = std::getenv("GZ_THREADS")) {
    int t = std::atoi(s);
    if (t > 0) return t;
  }
  return 1;
}

const char* to_string(TailMethod m) { return m == TailMethod::Direct ? "direct" : "grid_exact"; }

TailMethod parse_tail_method(const std::string& s) {
  if (s == "direct") return TailMethod::Direct;
  if (s == "grid_exact") return TailMethod::GridExact;
  fail(ErrorKind::ConfigError, "unknown method: " + s, "method");
}

TailEstimate make_estimate(std::string event, long hits, long n, std::uint64_t seed,
                           std::string method, double z) {
  TailEstimate e;
  e.event = std::move(event);
  e.n_samples = n;
  e.n_hits = hits;
  e.p_hat = n > 0 ? static_cast<double>(hits) / n : 0.0;
  Interval95 w = wilson_interval(hits, n, z);
  e.ci_lo = w.lo;
  e.ci_hi = w.hi;
  e.seed = seed;
  e.method = std::move(method);
  return e;
}

int auto_grid_points(const SpectralMeasure1D& mu, double T) {
  double R = mu.support_radius();
  if (!std::isfinite(R)) R = mu.effective_radius(1e-8);
  R = std::max(R, 1e-3);
  double pts = std::ceil(4.0 * R * T) + 1.0;
  return static_cast<int>(std::clamp(pts, 65.0, 4097.0));
}

std::vector<long> zero_count_histogram(const SpectralMeasure1D& mu, double T, long n_samples,
                                       std::uint64_t seed, const McOptions& opt) {
  if (!(T > 0.0)) throw std::invalid_argument("zero count needs T > 0");
  if (n_samples < 1) precondition_failed("n_samples_ge_1", "need at least one sample");
  require_a1(mu, opt);
  PathSource src(mu, T, opt);
  const int n = src.grid().points;
  const double h = src.grid().spacing();
  auto blocks = run_blocks<std::vector<long>>(n_samples, resolve_threads(opt.threads),
                                              [&](long b, long e) {
                                                std::vector<long> hist;
                                                std::vector<double> v(n);
                                                for (long i = b; i < e; ++i) {
                                                  src.draw(seed, i, v.data());
                                                  int k = count_grid_zeros(v.data(), n, h);
                                                  if (k >= static_cast<int>(hist.size())) hist.resize(k + 1, 0);
                                                  ++hist[k];
                                                }
                                                return hist;
                                              });
  std::vector<long> hist;
  for (const auto& bh : blocks) {
    if (bh.size() > hist.size()) hist.resize(bh.size(), 0);
    for (std::size_t k = 0; k < bh.size(); ++k) hist[k] += bh[k];
  }
  return hist;
}

TailEstimate tail_from_histogram(const std::vector<long>& hist, int n, double T, std::uint64_t seed,
                                 const std::string& method, double z) {
  long total = 0, hits = 0;
  for (std::size_t k = 0; k < hist.size(); ++k) {
    total += hist[k];
    if (static_cast<int>(k) >= n) hits += hist[k];
  }
  return make_estimate("zero_tail:n=" + std::to_string(n) + ":T=" + fmt(T), hits, total, seed, method, z);
}

TailEstimate estimate_zero_tail(const SpectralMeasure1D& mu, int n, double T, long n_samples,
                                std::uint64_t seed, const McOptions& opt) {
  if (n_samples < 1000) precondition_failed("n_samples_ge_1000", "zero tail estimates need >= 1000 samples");
  if (n < 0) throw std::invalid_argument("n must be >= 0");
  auto t0 = Clock::now();
  auto hist = zero_count_histogram(mu, T, n_samples, seed, opt);
  TailEstimate e = tail_from_histogram(hist, n, T, seed, to_string(opt.method), opt.z);
  e.runtime_s = seconds_since(t0);
  return e;
}

std::vector<TailEstimate> estimate_smallball(const SpectralMeasure1D& mu, double T,
                                             const std::vector<double>& etas, long n_samples,
                                             std::uint64_t seed, const McOptions& opt) {
  if (!(T > 0.0)) throw std::invalid_argument("small ball needs T > 0");
  if (n_samples < 1) precondition_failed("n_samples_ge_1", "need at least one sample");
  for (double eta : etas)
    if (!(eta >= 0.0)) throw std::invalid_argument("eta must be >= 0");
  require_a1(mu, opt);
  auto t0 = Clock::now();
  PathSource src(mu, T, opt);
  const int n = src.grid().points;
  const std::size_t k = etas.size();
  auto blocks = run_blocks<std::vector<long>>(n_samples, resolve_threads(opt.threads), [&](long b, long e) {
    std::vector<long> hits(k, 0);
    std::vector<double> v(n);
    for (long i = b; i < e; ++i) {
      src.draw(seed, i, v.data());
      double s = path_sup(v.data(), n);
      for (std::size_t j = 0; j < k; ++j)
        if (s <= etas[j]) ++hits[j];
    }
    return hits;
  });
  std::vector<TailEstimate> out;
  double rt = seconds_since(t0);
  for (std::size_t j = 0; j < k; ++j) {
    long h = 0;
    for (const auto& bh : blocks) h += bh[j];
    TailEstimate e = make_estimate("smallball:eta=" + fmt(etas[j]) + ":T=" + fmt(T), h, n_samples, seed,
                                   src.method_name(), opt.z);
    e.runtime_s = rt;
    out.push_back(e);
  }
  return out;
}

std::vector<double> sample_nodal_lengths(const SpectralMeasure2D& mu, double T, long n_samples,
                                         std::uint64_t seed, const McOptions& opt) {
  if (!(T > 0.0)) throw std::invalid_argument("nodal length needs T > 0");
  if (n_samples < 1) precondition_failed("n_samples_ge_1", "need at least one sample");
  if (opt.check_a1) {
    A2Report a2 = check_assumption_a2(mu);
    if (!a2.satisfied) fail(ErrorKind::AssumptionViolated, "marginal density condition fails");
  }
  SpectralSampler2D sampler(mu, opt.n_waves, T);
  GridSpec g;
  g.dimension = 2;
  g.extent = T;
  g.points = opt.resolution + 1;
  const double h = g.spacing();
  auto blocks = run_blocks<std::vector<double>>(n_samples, resolve_threads(opt.threads), [&](long b, long e) {
    std::vector<double> len;
    len.reserve(e - b);
    for (long i = b; i < e; ++i) {
      WaveSum2D w = sampler.draw(seed, i);
      std::vector<double> vals = w.on_grid(g);
      auto center = [&](double x, double y) { return w.eval(x, y); };
      len.push_back(nodal_length_grid(vals, g.points, h, center).length);
    }
    return len;
  });
  std::vector<double> out;
  out.reserve(n_samples);
  for (const auto& b : blocks) out.insert(out.end(), b.begin(), b.end());
  return out;
}

TailEstimate estimate_nodal_tail(const SpectralMeasure2D& mu, int n, double T, long n_samples,
                                 std::uint64_t seed, const McOptions& opt) {
  auto t0 = Clock::now();
  std::vector<double> len = sample_nodal_lengths(mu, T, n_samples, seed, opt);
  const double thr = 4.0 * n * T;
  long hits = std::count_if(len.begin(), len.end(), [&](double l) { return l > thr; });
  TailEstimate e = make_estimate("nodal_tail:n=" + std::to_string(n) + ":T=" + fmt(T), hits, n_samples,
                                 seed, "spectral", opt.z);
  e.runtime_s = seconds_since(t0);
  return e;
}

// ---------------------------------------------------------------------------

MomentEstimate summarize_moments(const std::vector<double>& values, double T, int m_max,
                                 std::uint64_t seed, int bootstrap) {
  if (values.empty()) throw std::invalid_argument("no values to summarize");
  if (m_max < 1) throw std::invalid_argument("m_max must be >= 1");
  MomentEstimate r;
  r.T = T;
  r.n_samples = static_cast<long>(values.size());
  r.seed = seed;
  r.bootstrap = bootstrap;
  const double nn = static_cast<double>(values.size());
  auto moments_of = [&](auto&& at) {
    std::vector<KahanSum> s(m_max + 1);
    for (std::size_t i = 0; i < values.size(); ++i) {
      double x = at(i), p = 1.0;
      for (int m = 0; m <= m_max; ++m) {
        s[m].add(p);
        p *= x;
      }
    }
    std::vector<double> out(m_max + 1);
    for (int m = 0; m <= m_max; ++m) out[m] = s[m].s / nn;
    return out;
  };
  r.moments = moments_of([&](std::size_t i) { return values[i]; });
  r.mean = r.moments[1];
  KahanSum ss;
  for (double x : values) ss.add((x - r.mean) * (x - r.mean));
  double var = values.size() > 1 ? ss.s / (nn - 1.0) : 0.0;
  r.mean_se = std::sqrt(var / nn);
  r.mean_ci = {r.mean - kZ95 * r.mean_se, r.mean + kZ95 * r.mean_se};

  std::vector<std::vector<double>> boot(m_max + 1, std::vector<double>(bootstrap));
  std::vector<std::size_t> idx(values.size());
  for (int b = 0; b < bootstrap; ++b) {
    Rng rng(seed, substream(Stream::Bootstrap, b));
    for (auto& j : idx) j = std::min(values.size() - 1, static_cast<std::size_t>(rng.uniform() * nn));
    auto mb = moments_of([&](std::size_t i) { return values[idx[i]]; });
    for (int m = 0; m <= m_max; ++m) boot[m][b] = mb[m];
  }
  r.moment_ci.resize(m_max + 1);
  for (int m = 0; m <= m_max; ++m) {
    auto& v = boot[m];
    std::sort(v.begin(), v.end());
    if (v.empty()) {
      r.moment_ci[m] = {r.moments[m], r.moments[m]};
      continue;
    }
    auto q = [&](double p) {
      double pos = p * (v.size() - 1);
      std::size_t i = static_cast<std::size_t>(pos);
      double f = pos - i;
      return i + 1 < v.size() ? v[i] * (1 - f) + v[i + 1] * f : v[i];
    };
    r.moment_ci[m] = {q(0.025), q(0.975)};
  }
  return r;
}

double kac_rice_mean(const SpectralMeasure1D& mu, double T) {
  MomentTable mt = moments_1d(mu, 1);
  return T / M_PI * std::sqrt(mt.C(2));
}

double nodal_density_oracle(const SpectralMeasure2D& mu) {
  if (!std::holds_alternative<Radial>(mu.family()))
    throw std::invalid_argument("nodal density oracle needs an isotropic measure");
  MomentTable mt = moments_2d(mu, 1);
  return 0.5 * std::sqrt(mt.C2(2, 0));
}

MomentEstimate estimate_expectation_and_moments(const SpectralMeasure1D& mu, double T, int m_max,
                                                long n_samples, std::uint64_t seed,
                                                const McOptions& opt) {
  auto hist = zero_count_histogram(mu, T, n_samples, seed, opt);
  std::vector<double> vals;
  vals.reserve(n_samples);
  for (std::size_t k = 0; k < hist.size(); ++k) vals.insert(vals.end(), hist[k], static_cast<double>(k));
  // histogram order is a fixed function of the counts, so the bootstrap stays deterministic
  MomentEstimate r = summarize_moments(vals, T, m_max, seed);
  r.oracle_mean = kac_rice_mean(mu, T);
  return r;
}

MomentEstimate estimate_expectation_and_moments(const SpectralMeasure2D& mu, double T, int m_max,
                                                long n_samples, std::uint64_t seed,
                                                const McOptions& opt) {
  std::vector<double> len = sample_nodal_lengths(mu, T, n_samples, seed, opt);
  MomentEstimate r = summarize_moments(len, T, m_max, seed);
  if (std::holds_alternative<Radial>(mu.family())) r.oracle_mean = nodal_density_oracle(mu) * T * T;
  return r;
}

LinearityCheck linearity_in_T(const SpectralMeasure1D& mu, double T, long n_samples,
                              std::uint64_t seed, const McOptions& opt) {
  auto a = estimate_expectation_and_moments(mu, T, 1, n_samples, substream("linearity", seed), opt);
  auto b = estimate_expectation_and_moments(mu, 2.0 * T, 1, n_samples, substream("linearity", seed + 1), opt);
  LinearityCheck r;
  r.mean_T = a.mean;
  r.mean_2T = b.mean;
  if (a.mean <= 0.0) fail(ErrorKind::NoConvergence, "no zeros observed at T");
  r.ratio = b.mean / a.mean;
  double rel = std::hypot(a.mean_se / a.mean, b.mean > 0 ? b.mean_se / b.mean : 0.0);
  r.ratio_ci = {r.ratio - kZ95 * r.ratio * rel, r.ratio + kZ95 * r.ratio * rel};
  r.holds = r.ratio_ci.lo <= 2.0 && 2.0 <= r.ratio_ci.hi;
  return r;
}

// ---------------------------------------------------------------------------

std::pair<double, double> orthant_probability(const Eigen::MatrixXd& cov, std::uint64_t seed,
                                              const OrthantOptions& oo) {
  const int d = static_cast<int>(cov.rows());
  if (d < 1 || cov.cols() != d) throw std::invalid_argument("orthant needs a square covariance");
  if (d > 11) precondition_failed("n_le_10", "orthant integration is limited to 11 dimensions");
  if (oo.shifts < 2 || oo.qmc_points < 1) throw std::invalid_argument("orthant needs >= 2 shifts");
  GaussianVectorSampler g(cov);
  const Eigen::MatrixXd& L = g.factor();
  const std::vector<int>& order = g.order();
  const int r = g.rank();
  std::vector<bool> pivot(d, false);
  for (int k = 0; k < r; ++k) pivot[order[k]] = true;

  std::vector<double> est(oo.shifts);
  std::vector<double> z(r);
  for (int s = 0; s < oo.shifts; ++s) {
    Rng rng(seed, substream(Stream::Shift, s));
    std::vector<std::uint64_t> shift(r);
    for (auto& x : shift) x = rng.next_u64();
    boost::random::sobol qrng(static_cast<std::size_t>(r));
    KahanSum acc;
    for (int p = 0; p < oo.qmc_points; ++p) {
      double f = 1.0;
      for (int k = 0; k < r; ++k) {
        std::uint64_t u = static_cast<std::uint64_t>(qrng()) ^ shift[k];
        double w = (static_cast<double>(u >> 11) + 0.5) * 0x1.0p-53;
        if (f == 0.0) continue;  // keep the sequence aligned
        const int comp = order[k];
        double mu_k = 0.0;
        for (int j = 0; j < k; ++j) mu_k += L(comp, j) * z[j];
        double e = normal_cdf(mu_k / L(comp, k));
        f *= e;
        if (e <= 0.0) {
          f = 0.0;
          continue;
        }
        z[k] = -normal_quantile(std::clamp(w * e, 1e-300, 1.0 - 1e-16));
      }
      if (f > 0.0) {
        for (int c = 0; c < d; ++c) {
          if (pivot[c]) continue;
          double y = 0.0;
          for (int j = 0; j < r; ++j) y += L(c, j) * z[j];
          if (!(y > 0.0)) {
            f = 0.0;
            break;
          }
        }
      }
      acc.add(f);
    }
    est[s] = acc.s / oo.qmc_points;
  }
  double mean = 0.0;
  for (double e : est) mean += e;
  mean /= oo.shifts;
  double var = 0.0;
  for (double e : est) var += (e - mean) * (e - mean);
  var /= (oo.shifts - 1);
  return {mean, std::sqrt(var / oo.shifts)};
}

TailEstimate alternating_sign_probability(const SpectralMeasure1D& mu, int n, double T,
                                          OrthantMethod method, long n_samples,
                                          std::uint64_t seed, const OrthantOptions& oo) {
  if (n < 1 || !(T > 0.0)) throw std::invalid_argument("alternating sign needs n >= 1 and T > 0");
  AssumptionReport a1 = check_assumption_a1(mu);
  if (!a1.satisfied) fail(ErrorKind::AssumptionViolated, "density condition fails: " + a1.reason);
  std::vector<double> pts(n + 1);
  for (int k = 0; k <= n; ++k) pts[k] = k * T / n;
  Eigen::MatrixXd cov = covariance_at(mu, pts);
  // Y_k = s_k X_{t_k} with s_0 = -1, alternating
  for (int i = 0; i <= n; ++i)
    for (int j = 0; j <= n; ++j)
      if ((i + j) % 2) cov(i, j) = -cov(i, j);
  const std::string event = "alternating:n=" + std::to_string(n) + ":T=" + fmt(T);
  auto t0 = Clock::now();
  if (method == OrthantMethod::OrthantGrid) {
    if (n > 10) precondition_failed("n_le_10", "orthant integration needs n <= 10");
    auto [p, se] = orthant_probability(cov, seed, oo);
    TailEstimate e;
    e.event = event;
    e.n_samples = static_cast<long>(oo.qmc_points) * oo.shifts;
    e.n_hits = std::llround(p * e.n_samples);
    e.p_hat = p;
    e.ci_lo = std::max(0.0, p - kZ95 * se);
    e.ci_hi = std::min(1.0, p + kZ95 * se);
    e.seed = seed;
    e.method = "orthant_grid";
    e.runtime_s = seconds_since(t0);
    return e;
  }
  if (n_samples < 1) precondition_failed("n_samples_ge_1", "need at least one sample");
  GaussianVectorSampler g(cov);
  auto blocks = run_blocks<long>(n_samples, default_threads(), [&](long b, long e) {
    long hits = 0;
    std::vector<double> y(n + 1);
    for (long i = b; i < e; ++i) {
      Rng rng(seed, substream(Stream::Path, i));
      g.draw(rng, y.data());
      bool all = true;
      for (double v : y)
        if (!(v > 0.0)) {
          all = false;
          break;
        }
      hits += all;
    }
    return hits;
  });
  long hits = 0;
  for (long h : blocks) hits += h;
  TailEstimate e = make_estimate(event, hits, n_samples, seed, "mc");
  e.runtime_s = seconds_since(t0);
  return e;
}

// ---------------------------------------------------------------------------

const CalibrationResult* Calibration::find(const std::string& name) const {
  for (const auto& r : results)
    if (r.name == name) return &r;
  return nullptr;
}

double smallball_log_C_needed(const SpectralMeasure1D& mu, int m, double T) {
  if (m < 1 || !(T > 0.0)) throw std::invalid_argument("needs m >= 1 and T > 0");
  double logdet;
  if (hiprec::supports(mu)) {
    hiprec::LogDetResult r = hiprec::log_det(mu, m, T, m);
    if (!r.positive) fail(ErrorKind::NotPSD, "Gram block is not resolvably positive definite");
    logdet = r.log_det;
  } else {
    std::vector<double> pts(m);
    for (int k = 0; k < m; ++k) pts[k] = k * T / m;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(covariance_at(mu, pts));
    logdet = 0.0;
    for (int k = 0; k < m; ++k) {
      double dk = ldlt.vectorD()(k);
      if (!(dk > 0.0)) fail(ErrorKind::NotPSD, "Gram block is not positive definite");
      logdet += std::log(dk);
    }
  }
  // P(sup <= eta) <= (2 eta)^m (2 pi)^(-m/2) det^(-1/2) <= (Cm/T)^(m^2) eta^m
  const double mm = m;
  double rhs = mm * std::log(2.0) - 0.5 * mm * std::log(2.0 * M_PI) - 0.5 * logdet;
  return rhs / (mm * mm) + std::log(T / mm);
}

Calibration calibrate_constants(const SpectralMeasure1D& mu, const CalibrationSweep& sw,
                                const McOptions& opt) {
  if (sw.m_min < 2 || sw.m_max < sw.m_min || sw.m_max > 64 || sw.t_steps < 1)
    throw std::invalid_argument("calibration sweep needs 2 <= m_min <= m_max <= 64");
  Calibration cal;
  AssumptionReport a1 = check_assumption_a1(mu);
  if (!a1.satisfied) fail(ErrorKind::AssumptionViolated, "density condition fails: " + a1.reason);
  cal.b_density = a1.b;
  const std::string mdom = "m in [" + std::to_string(sw.m_min) + ", " + std::to_string(sw.m_max) + "]";

  // b: largest fraction of pi / M0 at which every certificate at T = b m resolves
  double b = 0.0;
  for (double f : {1.0, 0.75, 0.5, 0.25}) {
    double bt = f * a1.b;
    CertificateOptions co;
    co.b = bt;
    bool ok = true;
    for (int m = sw.m_min; m <= sw.m_max && ok; ++m) ok = eigen_certificate(mu, m, bt * m, std::nullopt, co).resolved;
    if (ok) {
      b = bt;
      break;
    }
  }
  if (b == 0.0) fail(ErrorKind::InfeasibleCalibration, "no b keeps the eigenvalue certificates resolved");
  cal.results.push_back({"b", b, mdom + ", T = b m", a1.b - b});

  // c: smallest fitted c over the sweep
  double c = INFINITY;
  CertificateOptions co;
  co.b = b;
  for (int m = sw.m_min; m <= sw.m_max; ++m) {
    auto fitted = [&](double T) {
      EigenCertificate cert = eigen_certificate(mu, m, T, std::nullopt, co);
      if (!cert.resolved)
        fail(ErrorKind::InfeasibleCalibration,
             "eigenvalue not resolved at m=" + std::to_string(m) + ", T=" + fmt(T));
      return cert.c_fitted;
    };
    double cm = INFINITY;
    int jm = 1;
    for (int j = 1; j <= sw.t_steps; ++j) {
      double v = fitted(b * m * j / sw.t_steps);
      if (v < cm) cm = v, jm = j;
    }
    // the grid minimum overshoots the infimum over T; refine between neighbours
    double lo = b * m * std::max(jm - 1, 0) / sw.t_steps, hi = b * m * std::min(jm + 1, sw.t_steps) / sw.t_steps;
    auto best = boost::math::tools::brent_find_minima([&](double T) { return fitted(std::max(T, 1e-6 * hi)); },
                                                      lo, hi, 30);
    c = std::min({c, cm, best.second});
  }
  if (!(c > 0.0) || !std::isfinite(c)) fail(ErrorKind::InfeasibleCalibration, "no positive c fits the sweep");
  // the minimiser is itself a sweep point; without this its own check can fail by an ulp
  c *= 1.0 - 1e-12;
  cal.results.push_back({"c", c, mdom + ", 0 < T <= b m", 0.0});

  // C: density bound on the first m grid values
  double logC = -INFINITY;
  std::vector<std::pair<int, double>> sb;
  for (int m : sw.smallball_m)
    for (double T : sw.smallball_T)
      if (T <= b * m) {
        sb.emplace_back(m, smallball_log_C_needed(mu, m, T));
        logC = std::max(logC, sb.back().second);
      }
  if (sb.empty()) fail(ErrorKind::InfeasibleCalibration, "small-ball sweep has no point with T <= b m");
  double C = std::max(std::exp(logC), 1.0 + 1e-9);
  double worst = INFINITY;
  for (auto& [m, l] : sb) worst = std::min(worst, double(m) * m * (std::log(C) - l));
  cal.results.push_back({"C", C, "small-ball m sweep", worst});

  BoundConstants k;
  k.b = b;
  k.c = c;
  k.C = C;
  k.A = default_A(1);
  k.B = derived_B(k.A, C);
  k.provenance = "fitted";
  cal.results.push_back({"B", k.B, "(4 e A C)^-1", 0.0});

  if (sw.fit_lower) {
    double cl = 0.0, cl_margin = INFINITY;
    std::vector<std::pair<int, double>> good;
    std::vector<double> Ts;
    for (auto& pt : sw.lower_points)
      if (std::find(Ts.begin(), Ts.end(), pt.second) == Ts.end()) Ts.push_back(pt.second);
    std::vector<std::pair<std::pair<int, double>, double>> needed;
    for (std::size_t ti = 0; ti < Ts.size(); ++ti) {
      double T = Ts[ti];
      McOptions o = opt;
      auto hist = zero_count_histogram(mu, T, sw.lower_samples,
                                       substream(Stream::Calibration, sw.seed * 1000003ULL + ti), o);
      for (auto& pt : sw.lower_points) {
        if (pt.second != T) continue;
        int n = pt.first;
        if (T > b * n) {
          cal.unresolved_lower.push_back(pt);
          continue;
        }
        TailEstimate e = tail_from_histogram(hist, n, T, sw.seed, "grid_exact", sw.lower_z);
        if (!(e.ci_lo > 0.0)) {
          cal.unresolved_lower.push_back(pt);
          continue;
        }
        double need = (T / n) * std::exp(-std::log(e.ci_lo) / (double(n) * n));
        needed.push_back({pt, std::log(e.ci_lo)});
        cl = std::max(cl, need);
      }
    }
    if (needed.empty()) fail(ErrorKind::InfeasibleCalibration, "no lower-bound sweep point has a positive lower CI");
    for (auto& [pt, llo] : needed) {
      double n = pt.first;
      cl_margin = std::min(cl_margin, llo + n * n * std::log(cl * n / pt.second));
    }
    k.c_lower = cl;
    cal.results.push_back({"c_lower", cl, "lower-bound (n, T) sweep", cl_margin});
  }
  cal.constants = k;
  return cal;
}

// ---------------------------------------------------------------------------

std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

void Ledger::append(const TailEstimate& e, std::uint64_t config_hash) {
  rows_.push_back({e.event, config_hash, e.n_samples, e.n_hits, e.p_hat, e.ci_lo, e.ci_hi, e.seed, e.method,
                   e.runtime_s});
}

namespace {
const char* kLedgerHeader = "event,config_hash,n_samples,n_hits,p_hat,ci_lo,ci_hi,seed,method\n";

std::string hex64(std::uint64_t x) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(x));
  return buf;
}
}  // namespace

std::string Ledger::csv() const {
  std::ostringstream os;
  os << kLedgerHeader;
  for (const auto& r : rows_)
    os << r.event << ',' << hex64(r.config_hash) << ',' << r.n_samples << ',' << r.n_hits << ','
       << fmt(r.p_hat) << ',' << fmt(r.ci_lo) << ',' << fmt(r.ci_hi) << ',' << r.seed << ',' << r.method
       << '\n';
  return os.str();
}

std::string Ledger::runtime_csv() const {
  std::ostringstream os;
  os << "event,config_hash,runtime_s\n";
  for (const auto& r : rows_) os << r.event << ',' << hex64(r.config_hash) << ',' << fmt(r.runtime_s) << '\n';
  return os.str();
}

void Ledger::write(const std::string& path) const {
  auto append_body = [](const std::string& p, const std::string& text) {
    bool fresh = !std::filesystem::exists(p) || std::filesystem::file_size(p) == 0;
    std::ofstream f(p, std::ios::app);
    if (!f) fail(ErrorKind::ConfigError, "cannot open ledger " + p, "out");
    std::size_t nl = text.find('\n');
    f << (fresh ? text : text.substr(nl + 1));
  };
  append_body(path, csv());
  append_body(path + ".runtime.csv", runtime_csv());
}

}  // namespace gz
