#include "gz/kernel.hpp"

#include <algorithm>
#include <boost/math/quadrature/ooura_fourier_integrals.hpp>
#include <boost/math/special_functions/bessel.hpp>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "gz/error.hpp"
#include "gz/hiprec.hpp"
#include "gz/quad.hpp"

namespace gz {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();

double hermite_he(int n, double x) {
  double h0 = 1.0, h1 = x;
  if (n == 0) return h0;
  for (int k = 1; k < n; ++k) {
    double h2 = x * h1 - k * h0;
    h0 = h1;
    h1 = h2;
  }
  return h1;
}

// d^n/dt^n exp(-t^2 / (2 s2))
double gaussian_derivative(int n, double t, double s2) {
  double s = std::sqrt(s2);
  double u = t / s;
  double sign = (n % 2 == 0) ? 1.0 : -1.0;
  return sign * std::pow(s, -n) * hermite_he(n, u) * std::exp(-0.5 * u * u);
}

// Generic path: 2 * int_{s0}^{R} x^n cos(tx + n pi/2) f(x) dx.
double density_derivative(const SpectralMeasure1D& mu, int n, double t) {
  double s0 = mu.support_start();
  double R = mu.support_radius();
  auto lg = [&](double x) { return (n == 0 ? 0.0 : n * std::log(x)) + mu.log_density(x); };
  if (!std::isfinite(R)) {
    R = std::max(mu.effective_radius(1e-20), 2.0 * s0 + 1.0);
    double peak = -kInf;
    for (int i = 1; i <= 1024; ++i) peak = std::max(peak, lg(s0 + (R - s0) * i / 1024.0));
    while (lg(R) - peak > std::log(1e-18)) R *= 1.5;
  }
  double phase = 0.5 * kPi * (n % 4);
  if (!std::isfinite(mu.support_radius()) && t != 0.0) {
    // long oscillatory tail: cos(t (s0 + y) + phase) split into Fourier cos/sin
    // transforms of the shifted density, which stays smooth at y = 0
    thread_local boost::math::quadrature::ooura_fourier_cos<double> fc(1e-11, 10);
    thread_local boost::math::quadrature::ooura_fourier_sin<double> fs(1e-11, 10);
    auto g = [&](double y) { return std::exp(lg(s0 + y)); };
    double a = t * s0 + phase, w = std::abs(t);
    auto [vc, ec] = fc.integrate(g, w);
    auto [vs, es] = fs.integrate(g, w);
    double v = std::cos(a) * vc - std::sin(a) * (t < 0 ? -vs : vs);
    double err = std::abs(ec * vc) + std::abs(es * vs);
    if (std::isfinite(v) && err <= 1e-11) return 2.0 * v;
  }
  auto f = [&](double x) { return std::exp(lg(x)) * std::cos(t * x + phase); };
  double panel = (R - s0) / 16.0;
  if (t != 0.0) panel = std::min(panel, kPi / std::abs(t));
  if (auto* g = std::get_if<GridDensity>(&mu.family())) {
    double h = 2.0 * g->cutoff / static_cast<double>(g->values.size() - 1);
    panel = std::min(panel, h);
  }
  QuadResult r = integrate_panels(f, s0, R, panel, 1e-12, 1e-15);
  return 2.0 * r.value;
}

double closed_or_quadrature(const SpectralMeasure1D& mu, int n, double t) {
  const Family1D& fam = mu.family();
  if (auto* a = std::get_if<Atomic>(&fam)) {
    double phase = 0.5 * kPi * (n % 4);
    double s = 0.0;
    for (const Atom& at : a->atoms) s += at.weight * std::pow(at.freq, n) * std::cos(at.freq * t + phase);
    return s;
  }
  if (std::holds_alternative<StdNormal>(fam)) return gaussian_derivative(n, t, 1.0);
  if (auto* s = std::get_if<StretchedExp>(&fam)) {
    if (s->alpha == 0.5) return gaussian_derivative(n, t, 2.0);
    if (s->alpha == 1.0) {
      // 1/(1+t^2) = Re 1/(1 - it)
      std::complex<double> z(1.0, -t);
      std::complex<double> in = std::pow(std::complex<double>(0.0, 1.0), n);
      return std::tgamma(n + 1.0) * std::real(in * std::pow(z, -(n + 1)));
    }
  }
  if (auto* u = std::get_if<Uniform>(&fam); u && n == 0) {
    double x = u->q * t;
    return x == 0.0 ? 1.0 : std::sin(x) / x;
  }
  if (t == 0.0) {
    if (n % 2) return 0.0;
    double c = n == 0 ? 1.0 : std::exp(moments_1d(mu, n / 2).log_C(n));
    return (n / 2) % 2 ? -c : c;
  }
  return density_derivative(mu, n, t);
}

}  // namespace

double kernel_eval(const SpectralMeasure1D& mu, double t) {
  if (!std::isfinite(t)) throw std::invalid_argument("kernel evaluation point must be finite");
  return closed_or_quadrature(mu, 0, t);
}

std::vector<double> kernel_eval(const SpectralMeasure1D& mu, const std::vector<double>& ts) {
  std::vector<double> out(ts.size());
  for (std::size_t i = 0; i < ts.size(); ++i) out[i] = kernel_eval(mu, ts[i]);
  return out;
}

std::vector<double> kernel_derivative(const SpectralMeasure1D& mu, int order,
                                      const std::vector<double>& ts) {
  if (order < 0) throw std::invalid_argument("derivative order must be nonnegative");
  MomentTable mt = moments_1d(mu, (order + 1) / 2);
  double bound = std::exp(mt.log_C(order));
  std::vector<double> out(ts.size());
  for (std::size_t i = 0; i < ts.size(); ++i) {
    if (!std::isfinite(ts[i])) throw std::invalid_argument("kernel evaluation point must be finite");
    double v = closed_or_quadrature(mu, order, ts[i]);
    if (std::abs(v) > bound * (1.0 + 1e-9) + 1e-9)
      fail(ErrorKind::CertificateFalsified, "kernel derivative exceeds the moment bound");
    out[i] = v;
  }
  return out;
}

double kernel_derivative(const SpectralMeasure1D& mu, int order, double t) {
  return kernel_derivative(mu, order, std::vector<double>{t})[0];
}

double derivative_covariance(const SpectralMeasure1D& mu, int n, double t) {
  double sign = (n % 2 == 0) ? 1.0 : -1.0;
  return sign * kernel_derivative(mu, 2 * n, t);
}

double kernel_eval(const SpectralMeasure2D& mu, double x, double y) {
  const Family2D& fam = mu.family();
  if (auto* a = std::get_if<Atomic2D>(&fam)) {
    double s = 0.0;
    for (const Atom2D& at : a->atoms) s += at.weight * std::cos(at.x * x + at.y * y);
    return s;
  }
  if (auto* p = std::get_if<Product>(&fam)) return kernel_eval(p->mx, x) * kernel_eval(p->my, y);
  const RadialMeasure& prof = std::get<Radial>(fam).profile;
  double z = std::hypot(x, y);
  if (auto* ra = std::get_if<RadialAtoms>(&prof.family())) {
    double s = 0.0;
    for (const Atom& at : ra->atoms) s += at.weight * boost::math::cyl_bessel_j(0, at.freq * z);
    return s;
  }
  if (std::holds_alternative<Rayleigh>(prof.family())) return std::exp(-0.5 * z * z);
  if (z == 0.0) return 1.0;
  double R = prof.effective_radius(1e-18);
  double s0 = std::holds_alternative<RadialLogType>(prof.family()) ? 1.0 : 0.0;
  double panel = std::min((R - s0) / 16.0, kPi / z);
  auto f = [&](double r) { return prof.density(r) * boost::math::cyl_bessel_j(0, z * r); };
  return integrate_panels(f, s0, R, panel, 1e-12, 1e-15).value;
}

// ---------------------------------------------------------------------------

double GramMatrix::determinant() const {
  Eigen::LDLT<Eigen::MatrixXd> ldlt(sigma);
  return ldlt.vectorD().prod();
}

double GramMatrix::log_abs_determinant() const {
  Eigen::LDLT<Eigen::MatrixXd> ldlt(sigma);
  return ldlt.vectorD().array().abs().log().sum();
}

double GramMatrix::min_eigenvalue() const {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sigma, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

Eigen::MatrixXd covariance_at(const SpectralMeasure1D& mu, const std::vector<double>& pts) {
  const int n = static_cast<int>(pts.size());
  Eigen::MatrixXd S(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) S(i, j) = S(j, i) = kernel_eval(mu, pts[j] - pts[i]);
  return S;
}

GramMatrix gram_matrix(const SpectralMeasure1D& mu, int m, double T) {
  if (m < 1) throw std::invalid_argument("gram_matrix needs m >= 1");
  if (!(T > 0.0) || !std::isfinite(T)) throw std::invalid_argument("gram_matrix needs T > 0");
  GramMatrix g;
  g.m = m;
  g.T = T;
  // Toeplitz: one kernel value per lag
  std::vector<double> lag(m + 1);
  for (int j = 0; j <= m; ++j) lag[j] = kernel_eval(mu, j * T / m);
  g.sigma.resize(m + 1, m + 1);
  for (int i = 0; i <= m; ++i)
    for (int j = 0; j <= m; ++j) g.sigma(i, j) = lag[std::abs(i - j)];
  Eigen::LDLT<Eigen::MatrixXd> ldlt(g.sigma);
  if (ldlt.info() != Eigen::Success || ldlt.vectorD().minCoeff() < -1e-12) {
    // pivots of near-singular matrices round below zero; confirm with the eigensolver
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g.sigma, Eigen::EigenvaluesOnly);
    if (es.eigenvalues()(0) < -1e-12 * (m + 1))
      fail(ErrorKind::NotPSD, "Gram matrix failed the pivoted Cholesky check");
  }
  return g;
}

EigenCertificate eigen_certificate(const SpectralMeasure1D& mu, int m, double T,
                                   std::optional<double> c, const CertificateOptions& opt) {
  if (m < 1) throw std::invalid_argument("eigen_certificate needs m >= 1");
  if (m > 512) precondition_failed("m_le_512", "eigen certificates are limited to m <= 512");
  EigenCertificate cert;
  cert.m = m;
  cert.T = T;
  cert.c_supplied = c;
  if (opt.require_a1 || !opt.b) {
    AssumptionReport a1 = check_assumption_a1(mu);
    if (!a1.satisfied && opt.require_a1)
      fail(ErrorKind::AssumptionViolated, "density condition fails: " + a1.reason);
    cert.b = opt.b ? *opt.b : a1.b;
  } else {
    cert.b = *opt.b;
  }
  if (!(T > 0.0) || T > cert.b * m * (1.0 + 1e-12))
    precondition_failed("T_le_bm", "eigen certificate needs 0 < T <= b m");

  // the certificate concerns m consecutive samples (Y_1, ..., Y_m), not the
  // m + 1 points of gram_matrix; with m + 1 points lambda_min ~ (T/m)^(2m)
  if (hiprec::supports(mu)) {
    hiprec::EigenResult r = hiprec::min_eigenvalue(mu, m, T, m, opt.max_bits);
    cert.precision_bits = r.bits;
    cert.resolved = r.positive;
    cert.log_lambda_min = r.positive ? r.log_lambda_min : -kInf;
  } else {
    GramMatrix g = gram_matrix(mu, m, T);
    Eigen::MatrixXd block = g.sigma.topLeftCorner(m, m);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(block, Eigen::EigenvaluesOnly);
    double lam = es.eigenvalues()(0);
    cert.precision_bits = 53;
    cert.resolved = lam > 1e-9 * m;
    cert.log_lambda_min = lam > 0.0 ? std::log(lam) : -kInf;
  }
  cert.lambda_min = std::exp(cert.log_lambda_min);
  cert.c_fitted = m >= 2 && cert.resolved
                      ? (m / T) * std::exp(cert.log_lambda_min / (2.0 * (m - 1)))
                      : std::nan("");
  if (c) {
    cert.log_bound = 2.0 * (m - 1) * std::log(*c * T / m);
    cert.valid = cert.resolved && cert.log_lambda_min >= cert.log_bound;
  } else {
    cert.valid = cert.resolved;
  }
  return cert;
}

FoldedDensity folded_density(const SpectralMeasure1D& mu, int m, double T, int grid_points,
                             std::optional<double> b) {
  if (!mu.has_density()) fail(ErrorKind::AssumptionViolated, "folding needs a density part");
  if (grid_points < 3) throw std::invalid_argument("folded density grid too small");
  AssumptionReport a1 = check_assumption_a1(mu);
  double bb = b ? *b : a1.b;
  if (!(T > 0.0) || T > bb * m * (1.0 + 1e-12))
    precondition_failed("T_le_bm", "folded density needs 0 < T <= b m");
  FoldedDensity out;
  out.m = m;
  out.T = T;
  double scale = m / T;
  double R = std::isfinite(mu.support_radius()) ? mu.support_radius() : mu.effective_radius(1e-18);
  double h = 2.0 * kPi / (grid_points - 1);
  out.x.resize(grid_points);
  out.values.resize(grid_points);
  for (int i = 0; i < grid_points; ++i) {
    double x = -kPi + i * h;
    out.x[i] = x;
    long lo = static_cast<long>(std::ceil((-R / scale - x) / (2.0 * kPi)));
    long hi = static_cast<long>(std::floor((R / scale - x) / (2.0 * kPi)));
    double s = 0.0;
    for (long n = lo; n <= hi; ++n) s += scale * mu.density(scale * (x + 2.0 * kPi * n));
    out.values[i] = s;
  }
  for (int i = 1; i < grid_points; ++i) out.mass += 0.5 * h * (out.values[i - 1] + out.values[i]);
  out.threshold = m * a1.delta0 / T;
  int count = 0;
  for (double v : out.values)
    if (v >= out.threshold) ++count;
  out.level_measure = count * h;
  out.required = T * a1.delta0 / (2.0 * m);
  out.level_set_holds = out.level_measure >= out.required;
  return out;
}

// ---------------------------------------------------------------------------

namespace {

double abs_p(const std::vector<ExpTerm>& p, double t) {
  std::complex<double> s = 0.0;
  for (const ExpTerm& term : p) s += term.coeff * std::exp(std::complex<double>(0.0, term.freq * t));
  return std::abs(s);
}

double sup_on(const std::vector<ExpTerm>& p, Interval I) {
  const int n = 4096;
  double h = (I.b - I.a) / n;
  double best = 0.0;
  int arg = 0;
  for (int i = 0; i <= n; ++i) {
    double v = abs_p(p, I.a + i * h);
    if (v > best) {
      best = v;
      arg = i;
    }
  }
  // golden-section polish around the best node
  double lo = I.a + std::max(arg - 1, 0) * h, hi = I.a + std::min(arg + 1, n) * h;
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  for (int it = 0; it < 60; ++it) {
    double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
    if (abs_p(p, x1) > abs_p(p, x2)) hi = x2;
    else lo = x1;
  }
  return std::max(best, abs_p(p, 0.5 * (lo + hi)));
}

double lq_on(const std::vector<ExpTerm>& p, Interval I, double q) {
  double maxf = 0.0;
  for (const ExpTerm& t : p) maxf = std::max(maxf, std::abs(t.freq));
  double panel = maxf > 0.0 ? kPi / maxf : I.b - I.a;
  return integrate_panels([&](double t) { return std::pow(abs_p(p, t), q); }, I.a, I.b, panel,
                          1e-10, 1e-300)
      .value;
}

double total_length(const std::vector<Interval>& E) {
  double s = 0.0;
  for (const Interval& e : E) s += std::max(0.0, e.b - e.a);
  return s;
}

}  // namespace

double turan_ratio(const std::vector<ExpTerm>& p, Interval I, const std::vector<Interval>& E,
                   double q) {
  if (E.empty() || !(total_length(E) > 0.0)) fail(ErrorKind::EmptySubset, "subset E has zero length");
  if (!(I.b > I.a)) throw std::invalid_argument("interval I must have positive length");
  for (const Interval& e : E)
    if (e.a < I.a || e.b > I.b || e.b < e.a) precondition_failed("E_subset_I", "E must lie inside I");
  if (!(q > 0.0)) throw std::invalid_argument("norm exponent must be positive");
  if (std::isinf(q)) {
    double se = 0.0;
    for (const Interval& e : E)
      if (e.b > e.a) se = std::max(se, sup_on(p, e));
    return sup_on(p, I) / se;
  }
  double ie = 0.0;
  for (const Interval& e : E)
    if (e.b > e.a) ie += lq_on(p, e, q);
  return std::pow(lq_on(p, I, q) / ie, 1.0 / q);
}

double turan_bound(int n_terms, Interval I, const std::vector<Interval>& E, double A) {
  return std::pow(A * (I.b - I.a) / total_length(E), n_terms - 1);
}

}  // namespace gz
