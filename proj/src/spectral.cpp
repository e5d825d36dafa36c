#include "gz/spectral.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "gz/error.hpp"
#include "gz/quad.hpp"

namespace gz {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPi = std::numbers::pi;
constexpr int kMaxOrderLimit = 4096;

double logsumexp(const std::vector<double>& v) {
  double m = -kInf;
  for (double x : v) m = std::max(m, x);
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

double safe_log(double x) { return x > 0.0 ? std::log(x) : -kInf; }

// log of int_0^inf exp(s u - u^(1+g)) du
double log_logtype_integral(double s, double g) {
  auto expo = [&](double u) { return s * u - std::pow(u, 1.0 + g); };
  double ustar = s > 0.0 ? std::pow(s / (1.0 + g), 1.0 / g) : 0.0;
  double gstar = expo(ustar);
  double U = ustar + 1.0;
  while (expo(U) - gstar > -80.0) U = ustar + 2.0 * (U - ustar);
  QuadResult r = integrate_panels([&](double u) { return std::exp(expo(u) - gstar); }, 0.0, U,
                                  U / 64.0, 1e-13);
  return gstar + std::log(r.value);
}

double log_logtype_moment(double g, double k) {
  return log_logtype_integral(k + 1.0, g) - log_logtype_integral(1.0, g);
}

// log of int over [a, b] of x^n * linear-interpolated density, exact up to
// high polynomial degree, computed with the integrand scaled by b^n.
double log_segment_moment(double a, double b, double fa, double fb, int n) {
  if (b <= 0.0) return -kInf;
  double h = b - a;
  auto f = [&](double x) {
    double lin = fa + (fb - fa) * (x - a) / h;
    return n == 0 ? lin : std::pow(x / b, n) * lin;
  };
  double v = boost::math::quadrature::gauss<double, 30>::integrate(f, a, b);
  if (!(v > 0.0)) return -kInf;
  return n * std::log(b) + std::log(v);
}

void require(bool ok, const char* msg) {
  if (!ok) throw std::invalid_argument(msg);
}

}  // namespace

// ---------------------------------------------------------------------------

class PiecewiseLinearCdf {
 public:
  PiecewiseLinearCdf(double a, double b, std::vector<double> dens)
      : a_(a), h_((b - a) / static_cast<double>(dens.size() - 1)), d_(std::move(dens)) {
    cum_.resize(d_.size(), 0.0);
    for (std::size_t i = 1; i < d_.size(); ++i) cum_[i] = cum_[i - 1] + 0.5 * h_ * (d_[i - 1] + d_[i]);
  }

  double inverse(double u) const {
    double t = u * cum_.back();
    auto it = std::upper_bound(cum_.begin(), cum_.end(), t);
    std::size_t i = static_cast<std::size_t>(std::max<std::ptrdiff_t>(it - cum_.begin() - 1, 0));
    if (i >= d_.size() - 1) i = d_.size() - 2;
    double rem = t - cum_[i];
    double v0 = d_[i], slope = (d_[i + 1] - d_[i]) / h_;
    double disc = std::max(v0 * v0 + 2.0 * slope * rem, 0.0);
    double denom = v0 + std::sqrt(disc);
    double s = denom > 0.0 ? 2.0 * rem / denom : 0.0;
    return a_ + i * h_ + std::clamp(s, 0.0, h_);
  }

 private:
  double a_, h_;
  std::vector<double> d_;
  std::vector<double> cum_;
};

// ---------------------------------------------------------------------------
// SpectralMeasure1D

SpectralMeasure1D::SpectralMeasure1D(Family1D f) : fam_(std::move(f)) {
  if (auto* lt = std::get_if<LogType>(&fam_)) {
    // half-line normalization of exp(-(log x)^(1+g)) on [1, inf)
    log_norm_ = std::log(2.0) + log_logtype_integral(1.0, lt->gamma);
    double g = lt->gamma;
    double U = 1.0;
    double ustar = std::pow(1.0 / (1.0 + g), 1.0 / g);
    auto expo = [&](double u) { return u - std::pow(u, 1.0 + g); };
    while (expo(U) - expo(ustar) > -45.0) U *= 1.5;
    const int n = 8193;
    std::vector<double> d(n);
    for (int i = 0; i < n; ++i) d[i] = std::exp(expo(U * i / (n - 1)) - expo(ustar));
    cdf_ = std::make_shared<PiecewiseLinearCdf>(0.0, U, std::move(d));
  } else if (auto* gd = std::get_if<GridDensity>(&fam_)) {
    if (gd->with_cdf) cdf_ = std::make_shared<PiecewiseLinearCdf>(-gd->cutoff, gd->cutoff, gd->values);
  }
}

SpectralMeasure1D SpectralMeasure1D::atomic(std::vector<Atom> atoms) {
  require(!atoms.empty(), "atomic measure needs at least one atom");
  double total = 0.0;
  for (const Atom& a : atoms) {
    require(std::isfinite(a.freq) && std::isfinite(a.weight) && a.weight > 0.0,
            "atoms need finite frequency and positive weight");
    total += a.weight;
  }
  for (const Atom& a : atoms) {
    double mirror = 0.0, self = 0.0;
    for (const Atom& b : atoms) {
      if (std::abs(b.freq + a.freq) <= 1e-12 * (1.0 + std::abs(a.freq))) mirror += b.weight;
      if (std::abs(b.freq - a.freq) <= 1e-12 * (1.0 + std::abs(a.freq))) self += b.weight;
    }
    require(std::abs(mirror - self) <= 1e-12 * total, "atomic measure must be symmetric");
  }
  for (Atom& a : atoms) a.weight /= total;
  return SpectralMeasure1D(Atomic{std::move(atoms)});
}

SpectralMeasure1D SpectralMeasure1D::symmetric_atoms(const std::vector<Atom>& half) {
  std::vector<Atom> all;
  for (const Atom& a : half) {
    if (a.freq == 0.0) {
      all.push_back(a);
    } else {
      all.push_back({a.freq, 0.5 * a.weight});
      all.push_back({-a.freq, 0.5 * a.weight});
    }
  }
  return atomic(std::move(all));
}

SpectralMeasure1D SpectralMeasure1D::grid_density(double cutoff, std::vector<double> values,
                                                  bool compact_support, bool with_cdf) {
  require(cutoff > 0.0 && std::isfinite(cutoff), "grid cutoff must be positive");
  require(values.size() >= 3, "grid density needs at least 3 values");
  double vmax = 0.0;
  for (double v : values) {
    require(std::isfinite(v) && v >= 0.0, "grid density values must be finite and nonnegative");
    vmax = std::max(vmax, v);
  }
  require(vmax > 0.0, "grid density has zero mass");
  std::size_t n = values.size();
  for (std::size_t i = 0; i < n; ++i)
    require(std::abs(values[i] - values[n - 1 - i]) <= 1e-12 * vmax, "grid density must be symmetric");
  double h = 2.0 * cutoff / static_cast<double>(n - 1);
  double mass = 0.0;
  for (std::size_t i = 1; i < n; ++i) mass += 0.5 * h * (values[i - 1] + values[i]);
  for (double& v : values) v /= mass;
  return SpectralMeasure1D(GridDensity{cutoff, std::move(values), compact_support, with_cdf});
}

SpectralMeasure1D SpectralMeasure1D::uniform(double q) {
  require(q > 0.0 && std::isfinite(q), "uniform width must be positive");
  return SpectralMeasure1D(Uniform{q});
}

SpectralMeasure1D SpectralMeasure1D::std_normal() { return SpectralMeasure1D(StdNormal{}); }

SpectralMeasure1D SpectralMeasure1D::stretched_exp(double alpha) {
  require(alpha > 0.0 && std::isfinite(alpha), "stretched-exponential alpha must be positive");
  return SpectralMeasure1D(StretchedExp{alpha});
}

SpectralMeasure1D SpectralMeasure1D::log_type(double gamma) {
  require(gamma > 0.0 && std::isfinite(gamma), "log-type gamma must be positive");
  return SpectralMeasure1D(LogType{gamma});
}

std::string SpectralMeasure1D::label() const {
  std::ostringstream os;
  std::visit(
      [&](const auto& f) {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, Atomic>) os << "atomic(" << f.atoms.size() << ")";
        else if constexpr (std::is_same_v<T, GridDensity>) os << "grid(" << f.values.size() << ")";
        else if constexpr (std::is_same_v<T, Uniform>) os << "uniform(" << f.q << ")";
        else if constexpr (std::is_same_v<T, StdNormal>) os << "stdnormal";
        else if constexpr (std::is_same_v<T, StretchedExp>) os << "stretched_exp(" << f.alpha << ")";
        else os << "log_type(" << f.gamma << ")";
      },
      fam_);
  return os.str();
}

bool SpectralMeasure1D::has_density() const { return !std::holds_alternative<Atomic>(fam_); }

double SpectralMeasure1D::log_density(double x) const {
  double ax = std::abs(x);
  return std::visit(
      [&](const auto& f) -> double {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, Atomic>) {
          return -kInf;
        } else if constexpr (std::is_same_v<T, GridDensity>) {
          if (ax > f.cutoff) return -kInf;
          double h = 2.0 * f.cutoff / static_cast<double>(f.values.size() - 1);
          double pos = (x + f.cutoff) / h;
          std::size_t i = std::min(static_cast<std::size_t>(pos), f.values.size() - 2);
          double w = pos - static_cast<double>(i);
          return safe_log((1.0 - w) * f.values[i] + w * f.values[i + 1]);
        } else if constexpr (std::is_same_v<T, Uniform>) {
          return ax <= f.q ? -std::log(2.0 * f.q) : -kInf;
        } else if constexpr (std::is_same_v<T, StdNormal>) {
          return -0.5 * x * x - 0.5 * std::log(2.0 * kPi);
        } else if constexpr (std::is_same_v<T, StretchedExp>) {
          return -std::pow(ax, 1.0 / f.alpha) - std::log(2.0) - std::lgamma(1.0 + f.alpha);
        } else {
          if (ax < 1.0) return -kInf;
          return -std::pow(std::log(ax), 1.0 + f.gamma) - log_norm_;
        }
      },
      fam_);
}

double SpectralMeasure1D::density(double x) const { return std::exp(log_density(x)); }

double SpectralMeasure1D::support_radius() const {
  return std::visit(
      [&](const auto& f) -> double {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, Atomic>) {
          double r = 0.0;
          for (const Atom& a : f.atoms) r = std::max(r, std::abs(a.freq));
          return r;
        } else if constexpr (std::is_same_v<T, GridDensity>) {
          return f.cutoff;
        } else if constexpr (std::is_same_v<T, Uniform>) {
          return f.q;
        } else {
          return kInf;
        }
      },
      fam_);
}

double SpectralMeasure1D::effective_radius(double rel) const {
  double L = std::log(1.0 / rel);
  return std::visit(
      [&](const auto& f) -> double {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, StdNormal>) return std::sqrt(2.0 * L);
        else if constexpr (std::is_same_v<T, StretchedExp>) return std::pow(L, f.alpha);
        else if constexpr (std::is_same_v<T, LogType>) return std::exp(std::pow(L, 1.0 / (1.0 + f.gamma)));
        else return support_radius();
      },
      fam_);
}

double SpectralMeasure1D::support_start() const {
  return std::holds_alternative<LogType>(fam_) ? 1.0 : 0.0;
}

bool SpectralMeasure1D::is_point_mass_at_zero() const {
  auto* a = std::get_if<Atomic>(&fam_);
  if (!a) return false;
  for (const Atom& at : a->atoms)
    if (at.freq != 0.0) return false;
  return true;
}

double SpectralMeasure1D::sample(Rng& rng) const {
  return std::visit(
      [&](const auto& f) -> double {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, Atomic>) {
          double u = rng.uniform();
          double acc = 0.0;
          for (const Atom& a : f.atoms) {
            acc += a.weight;
            if (u < acc) return a.freq;
          }
          return f.atoms.back().freq;
        } else if constexpr (std::is_same_v<T, GridDensity>) {
          if (!cdf_) fail(ErrorKind::SamplingUnsupported, "grid density built without a CDF table");
          return cdf_->inverse(rng.uniform());
        } else if constexpr (std::is_same_v<T, Uniform>) {
          return f.q * (2.0 * rng.uniform() - 1.0);
        } else if constexpr (std::is_same_v<T, StdNormal>) {
          return rng.normal();
        } else if constexpr (std::is_same_v<T, StretchedExp>) {
          double g = boost::math::gamma_p_inv(f.alpha, rng.uniform());
          double r = std::pow(g, f.alpha);
          return rng.uniform() < 0.5 ? -r : r;
        } else {
          double r = std::exp(cdf_->inverse(rng.uniform()));
          return rng.uniform() < 0.5 ? -r : r;
        }
      },
      fam_);
}

// ---------------------------------------------------------------------------
// RadialMeasure

RadialMeasure::RadialMeasure(RadialFamily f) : fam_(std::move(f)) {
  if (auto* lt = std::get_if<RadialLogType>(&fam_)) {
    double g = lt->gamma;
    log_norm_ = log_logtype_integral(1.0, g);
    double U = 1.0;
    double ustar = std::pow(1.0 / (1.0 + g), 1.0 / g);
    auto expo = [&](double u) { return u - std::pow(u, 1.0 + g); };
    while (expo(U) - expo(ustar) > -45.0) U *= 1.5;
    const int n = 8193;
    std::vector<double> d(n);
    for (int i = 0; i < n; ++i) d[i] = std::exp(expo(U * i / (n - 1)) - expo(ustar));
    cdf_ = std::make_shared<PiecewiseLinearCdf>(0.0, U, std::move(d));
  } else if (auto* gr = std::get_if<RadialGrid>(&fam_)) {
    cdf_ = std::make_shared<PiecewiseLinearCdf>(0.0, gr->cutoff, gr->values);
  }
}

RadialMeasure RadialMeasure::atoms(std::vector<Atom> atoms) {
  require(!atoms.empty(), "radial atoms needed");
  double total = 0.0;
  for (const Atom& a : atoms) {
    require(a.freq >= 0.0 && std::isfinite(a.freq) && a.weight > 0.0, "radial atoms need r >= 0 and weight > 0");
    total += a.weight;
  }
  for (Atom& a : atoms) a.weight /= total;
  return RadialMeasure(RadialAtoms{std::move(atoms)});
}

RadialMeasure RadialMeasure::rayleigh() { return RadialMeasure(Rayleigh{}); }

RadialMeasure RadialMeasure::stretched_exp(double alpha) {
  require(alpha > 0.0, "alpha must be positive");
  return RadialMeasure(RadialStretchedExp{alpha});
}

RadialMeasure RadialMeasure::log_type(double gamma) {
  require(gamma > 0.0, "gamma must be positive");
  return RadialMeasure(RadialLogType{gamma});
}

RadialMeasure RadialMeasure::grid(double cutoff, std::vector<double> values) {
  require(cutoff > 0.0 && values.size() >= 3, "radial grid needs cutoff > 0 and 3+ values");
  double h = cutoff / static_cast<double>(values.size() - 1);
  double mass = 0.0;
  for (std::size_t i = 1; i < values.size(); ++i) mass += 0.5 * h * (values[i - 1] + values[i]);
  require(mass > 0.0, "radial grid has zero mass");
  for (double& v : values) {
    require(v >= 0.0, "radial density must be nonnegative");
    v /= mass;
  }
  return RadialMeasure(RadialGrid{cutoff, std::move(values)});
}

std::string RadialMeasure::label() const {
  std::ostringstream os;
  std::visit(
      [&](const auto& f) {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, RadialAtoms>) os << "radial_atoms(" << f.atoms.size() << ")";
        else if constexpr (std::is_same_v<T, Rayleigh>) os << "rayleigh";
        else if constexpr (std::is_same_v<T, RadialStretchedExp>) os << "radial_stretched_exp(" << f.alpha << ")";
        else if constexpr (std::is_same_v<T, RadialLogType>) os << "radial_log_type(" << f.gamma << ")";
        else os << "radial_grid(" << f.values.size() << ")";
      },
      fam_);
  return os.str();
}

bool RadialMeasure::has_density() const { return !std::holds_alternative<RadialAtoms>(fam_); }

double RadialMeasure::density(double r) const {
  if (r < 0.0) return 0.0;
  return std::visit(
      [&](const auto& f) -> double {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, RadialAtoms>) {
          return 0.0;
        } else if constexpr (std::is_same_v<T, Rayleigh>) {
          return r * std::exp(-0.5 * r * r);
        } else if constexpr (std::is_same_v<T, RadialStretchedExp>) {
          return std::exp(-std::pow(r, 1.0 / f.alpha) - std::lgamma(1.0 + f.alpha));
        } else if constexpr (std::is_same_v<T, RadialLogType>) {
          if (r < 1.0) return 0.0;
          return std::exp(-std::pow(std::log(r), 1.0 + f.gamma) - log_norm_);
        } else {
          if (r > f.cutoff) return 0.0;
          double h = f.cutoff / static_cast<double>(f.values.size() - 1);
          double pos = r / h;
          std::size_t i = std::min(static_cast<std::size_t>(pos), f.values.size() - 2);
          double w = pos - static_cast<double>(i);
          return (1.0 - w) * f.values[i] + w * f.values[i + 1];
        }
      },
      fam_);
}

double RadialMeasure::log_moment(double k) const {
  return std::visit(
      [&](const auto& f) -> double {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, RadialAtoms>) {
          std::vector<double> terms;
          for (const Atom& a : f.atoms) {
            if (a.freq == 0.0) {
              if (k == 0.0) terms.push_back(std::log(a.weight));
            } else {
              terms.push_back(std::log(a.weight) + k * std::log(a.freq));
            }
          }
          return logsumexp(terms);
        } else if constexpr (std::is_same_v<T, Rayleigh>) {
          return 0.5 * k * std::log(2.0) + std::lgamma(1.0 + 0.5 * k);
        } else if constexpr (std::is_same_v<T, RadialStretchedExp>) {
          return std::lgamma(f.alpha * (k + 1.0)) - std::lgamma(f.alpha);
        } else if constexpr (std::is_same_v<T, RadialLogType>) {
          return log_logtype_moment(f.gamma, k);
        } else {
          int n = static_cast<int>(k);
          double h = f.cutoff / static_cast<double>(f.values.size() - 1);
          std::vector<double> terms;
          for (std::size_t i = 0; i + 1 < f.values.size(); ++i)
            terms.push_back(log_segment_moment(i * h, (i + 1) * h, f.values[i], f.values[i + 1], n));
          return logsumexp(terms);
        }
      },
      fam_);
}

double RadialMeasure::effective_radius(double rel) const {
  double L = std::log(1.0 / rel);
  return std::visit(
      [&](const auto& f) -> double {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, RadialAtoms>) {
          double r = 0.0;
          for (const Atom& a : f.atoms) r = std::max(r, a.freq);
          return r;
        } else if constexpr (std::is_same_v<T, Rayleigh>) {
          return std::sqrt(2.0 * L) + 1.0;
        } else if constexpr (std::is_same_v<T, RadialStretchedExp>) {
          return std::pow(L, f.alpha);
        } else if constexpr (std::is_same_v<T, RadialLogType>) {
          return std::exp(std::pow(L, 1.0 / (1.0 + f.gamma)));
        } else {
          return f.cutoff;
        }
      },
      fam_);
}

bool RadialMeasure::is_point_mass_at_zero() const {
  auto* a = std::get_if<RadialAtoms>(&fam_);
  if (!a) return false;
  for (const Atom& at : a->atoms)
    if (at.freq != 0.0) return false;
  return true;
}

double RadialMeasure::sample(Rng& rng) const {
  return std::visit(
      [&](const auto& f) -> double {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, RadialAtoms>) {
          double u = rng.uniform();
          double acc = 0.0;
          for (const Atom& a : f.atoms) {
            acc += a.weight;
            if (u < acc) return a.freq;
          }
          return f.atoms.back().freq;
        } else if constexpr (std::is_same_v<T, Rayleigh>) {
          return std::sqrt(-2.0 * std::log(rng.uniform()));
        } else if constexpr (std::is_same_v<T, RadialStretchedExp>) {
          return std::pow(boost::math::gamma_p_inv(f.alpha, rng.uniform()), f.alpha);
        } else if constexpr (std::is_same_v<T, RadialLogType>) {
          return std::exp(cdf_->inverse(rng.uniform()));
        } else {
          return cdf_->inverse(rng.uniform());
        }
      },
      fam_);
}

// ---------------------------------------------------------------------------
// SpectralMeasure2D

SpectralMeasure2D SpectralMeasure2D::atomic(std::vector<Atom2D> atoms) {
  require(!atoms.empty(), "atomic measure needs at least one atom");
  double total = 0.0;
  for (const Atom2D& a : atoms) {
    require(std::isfinite(a.x) && std::isfinite(a.y) && a.weight > 0.0,
            "atoms need finite coordinates and positive weight");
    total += a.weight;
  }
  for (const Atom2D& a : atoms) {
    double mirror = 0.0, self = 0.0;
    double tol = 1e-12 * (1.0 + std::hypot(a.x, a.y));
    for (const Atom2D& b : atoms) {
      if (std::hypot(b.x + a.x, b.y + a.y) <= tol) mirror += b.weight;
      if (std::hypot(b.x - a.x, b.y - a.y) <= tol) self += b.weight;
    }
    require(std::abs(mirror - self) <= 1e-12 * total, "atomic measure must be symmetric");
  }
  for (Atom2D& a : atoms) a.weight /= total;
  return SpectralMeasure2D(Atomic2D{std::move(atoms)});
}

SpectralMeasure2D SpectralMeasure2D::symmetric_atoms(const std::vector<Atom2D>& half) {
  std::vector<Atom2D> all;
  for (const Atom2D& a : half) {
    if (a.x == 0.0 && a.y == 0.0) {
      all.push_back(a);
    } else {
      all.push_back({a.x, a.y, 0.5 * a.weight});
      all.push_back({-a.x, -a.y, 0.5 * a.weight});
    }
  }
  return atomic(std::move(all));
}

SpectralMeasure2D SpectralMeasure2D::product(SpectralMeasure1D mx, SpectralMeasure1D my) {
  return SpectralMeasure2D(Product{std::move(mx), std::move(my)});
}

SpectralMeasure2D SpectralMeasure2D::radial(RadialMeasure profile) {
  return SpectralMeasure2D(Radial{std::move(profile)});
}

SpectralMeasure2D SpectralMeasure2D::unit_circle_uniform() {
  return radial(RadialMeasure::atoms({{1.0, 1.0}}));
}

SpectralMeasure2D SpectralMeasure2D::std_normal_2d() { return radial(RadialMeasure::rayleigh()); }

SpectralMeasure2D SpectralMeasure2D::radial_stretched_exp(double alpha) {
  return radial(RadialMeasure::stretched_exp(alpha));
}

SpectralMeasure2D SpectralMeasure2D::radial_log_type(double gamma) {
  return radial(RadialMeasure::log_type(gamma));
}

std::string SpectralMeasure2D::label() const {
  if (auto* a = std::get_if<Atomic2D>(&fam_)) return "atomic2d(" + std::to_string(a->atoms.size()) + ")";
  if (auto* p = std::get_if<Product>(&fam_)) return "product(" + p->mx.label() + "," + p->my.label() + ")";
  const auto& r = std::get<Radial>(fam_);
  if (auto* ra = std::get_if<RadialAtoms>(&r.profile.family());
      ra && ra->atoms.size() == 1 && ra->atoms[0].freq == 1.0)
    return "unit_circle_uniform";
  if (std::holds_alternative<Rayleigh>(r.profile.family())) return "stdnormal2d";
  return "radial(" + r.profile.label() + ")";
}

bool SpectralMeasure2D::degenerate_line() const {
  if (auto* a = std::get_if<Atomic2D>(&fam_)) {
    double dx = 0.0, dy = 0.0;
    for (const Atom2D& at : a->atoms) {
      if (at.x != 0.0 || at.y != 0.0) {
        dx = at.x;
        dy = at.y;
        break;
      }
    }
    if (dx == 0.0 && dy == 0.0) return true;
    for (const Atom2D& at : a->atoms) {
      double cross = at.x * dy - at.y * dx;
      if (std::abs(cross) > 1e-12 * std::hypot(at.x, at.y) * std::hypot(dx, dy)) return false;
    }
    return true;
  }
  if (auto* p = std::get_if<Product>(&fam_)) return p->mx.is_point_mass_at_zero() || p->my.is_point_mass_at_zero();
  return std::get<Radial>(fam_).profile.is_point_mass_at_zero();
}

std::pair<double, double> SpectralMeasure2D::sample(Rng& rng) const {
  if (auto* a = std::get_if<Atomic2D>(&fam_)) {
    double u = rng.uniform();
    double acc = 0.0;
    for (const Atom2D& at : a->atoms) {
      acc += at.weight;
      if (u < acc) return {at.x, at.y};
    }
    return {a->atoms.back().x, a->atoms.back().y};
  }
  if (auto* p = std::get_if<Product>(&fam_)) {
    double x = p->mx.sample(rng);
    return {x, p->my.sample(rng)};
  }
  double r = std::get<Radial>(fam_).profile.sample(rng);
  double th = 2.0 * kPi * rng.uniform();
  return {r * std::cos(th), r * std::sin(th)};
}

// ---------------------------------------------------------------------------
// Moments

namespace {

double log_quadrature_moment(const SpectralMeasure1D& mu, int n) {
  double s0 = mu.support_start();
  auto lg = [&](double x) {
    double ld = mu.log_density(x);
    return n == 0 ? ld : n * std::log(x) + ld;
  };
  double R = mu.support_radius();
  bool bounded = std::isfinite(R);
  if (!bounded) R = std::max(mu.effective_radius(1e-20), 2.0 * s0 + 1.0);
  double peak = -kInf;
  auto scan = [&]() {
    for (int i = 1; i <= 4096; ++i) peak = std::max(peak, lg(s0 + (R - s0) * i / 4096.0));
  };
  scan();
  if (!bounded) {
    while (lg(R) - peak > -80.0) {
      R *= 1.5;
      scan();
    }
  }
  QuadResult r = integrate_panels([&](double x) { return std::exp(lg(x) - peak); }, s0, R,
                                  (R - s0) / 64.0, 1e-13);
  return std::log(2.0) + peak + std::log(r.value);
}

// where x^k f(x) has fallen e^-80 below its peak; returns the peak too
std::pair<double, double> moment_range(const SpectralMeasure1D& mu, int k) {
  double s0 = mu.support_start();
  auto lg = [&](double x) { return (k == 0 ? 0.0 : k * std::log(x)) + mu.log_density(x); };
  double R = mu.support_radius();
  bool bounded = std::isfinite(R);
  if (!bounded) R = std::max(mu.effective_radius(1e-20), 2.0 * s0 + 1.0);
  double peak = -kInf;
  auto scan = [&]() {
    for (int i = 1; i <= 4096; ++i) peak = std::max(peak, lg(s0 + (R - s0) * i / 4096.0));
  };
  scan();
  while (!bounded && lg(R) - peak > -80.0) {
    R *= 1.5;
    scan();
  }
  return {R, peak};
}

// log of int |z|^k f(x) g(y) dz, k = 0..K, for a product of two densities.
// The radial density 4r int f(r cos th) g(r sin th) dth is evaluated once on
// a composite Gauss-Legendre grid in r and reused for every k.
std::vector<double> log_product_radial_moments(const SpectralMeasure1D& mx, const SpectralMeasure1D& my, int K) {
  const double ax = mx.support_start(), ay = my.support_start();
  const double Rx = mx.support_radius(), Ry = my.support_radius();
  const double top = std::hypot(moment_range(mx, K).first, moment_range(my, K).first);
  const double width = 0.05 * std::sqrt(std::exp(moments_1d(mx, 1).log_C(2)) + std::exp(moments_1d(my, 1).log_C(2)));
  std::vector<double> brk{0.0, top};
  for (double b : {ax, ay, std::hypot(ax, ay), Rx, Ry, std::hypot(Rx, Ry)})
    if (b > 0.0 && b < top) brk.push_back(b);
  std::sort(brk.begin(), brk.end());
  brk.erase(std::unique(brk.begin(), brk.end()), brk.end());

  boost::math::quadrature::tanh_sinh<double> ts;
  auto rho = [&](double r) {
    auto f = [&](double th) { return mx.density(r * std::cos(th)) * my.density(r * std::sin(th)); };
    auto inside = [&](double th) {
      double x = r * std::cos(th), y = r * std::sin(th);
      return x >= ax && x <= Rx && y >= ay && y <= Ry;
    };
    // angles where the circle crosses a support edge of either marginal
    std::vector<double> cuts{0.0, 0.5 * kPi};
    for (double e : {Rx, ax})
      if (e > 0.0 && e < r) cuts.push_back(std::acos(e / r));
    for (double e : {Ry, ay})
      if (e > 0.0 && e < r) cuts.push_back(std::asin(e / r));
    std::sort(cuts.begin(), cuts.end());
    double q = 0.0;
    // support status is constant on each piece; skipping empty ones keeps
    // rounding at the cut from looking like a jump
    for (std::size_t c = 0; c + 1 < cuts.size(); ++c)
      if (cuts[c + 1] - cuts[c] > 1e-12 && inside(0.5 * (cuts[c] + cuts[c + 1])))
        q += ts.integrate(f, cuts[c], cuts[c + 1], 1e-12);
    return 4.0 * r * q;
  };

  using GL = boost::math::quadrature::gauss<double, 20>;
  std::vector<double> acc(K + 1, 0.0);
  auto panel = [&](double lo, double hi) {
    double c = 0.5 * (lo + hi), h = 0.5 * (hi - lo);
    // 20 points: abscissae are the positive half, no node at the centre
    for (std::size_t i = 0; i < GL::abscissa().size(); ++i) {
      double w = GL::weights()[i] * h;
      for (double r : {c - h * GL::abscissa()[i], c + h * GL::abscissa()[i]}) {
        double v = w * rho(r), p = 1.0;
        for (int k = 0; k <= K; ++k, p *= r) acc[k] += v * p;
      }
    }
  };
  // support edges give sqrt-type kinks in the radial density; panels next to
  // them are graded geometrically
  auto edge = [&](double b) { return b > 0.0 && (b < top || (std::isfinite(Rx) && std::isfinite(Ry))); };
  auto graded = [&](double lo, double hi, bool at_lo) {
    double len = hi - lo;
    for (int j = 0; j < 30; ++j) {
      double a = len * std::ldexp(1.0, -j - 1), b = len * std::ldexp(1.0, -j);
      at_lo ? panel(lo + a, lo + b) : panel(hi - b, hi - a);
    }
    at_lo ? panel(lo, lo + len * std::ldexp(1.0, -30)) : panel(hi - len * std::ldexp(1.0, -30), hi);
  };
  for (std::size_t b = 0; b + 1 < brk.size(); ++b) {
    std::vector<double> cut{brk[b]};
    while (cut.back() < brk[b + 1]) {
      double hi = std::min(brk[b + 1], cut.back() + std::max(0.1 * cut.back(), width));
      if (brk[b + 1] - hi < 1e-3 * width) hi = brk[b + 1];
      cut.push_back(hi);
    }
    std::size_t n = cut.size() - 1;
    for (std::size_t i = 0; i < n; ++i) {
      bool lo_edge = i == 0 && edge(cut[0]), hi_edge = i + 1 == n && edge(cut[n]);
      if (lo_edge && hi_edge) {
        double mid = 0.5 * (cut[i] + cut[i + 1]);
        graded(cut[i], mid, true);
        graded(mid, cut[i + 1], false);
      } else if (lo_edge || hi_edge) {
        graded(cut[i], cut[i + 1], lo_edge);
      } else {
        panel(cut[i], cut[i + 1]);
      }
    }
  }
  if (std::abs(acc[0] - 1.0) > 1e-8)
    fail(ErrorKind::QuadratureFailure, "radial density of the product does not integrate to one");
  std::vector<double> out(K + 1);
  for (int k = 0; k <= K; ++k) out[k] = std::log(acc[k]);
  return out;
}

std::vector<double> grid_log_moments(const GridDensity& g, int top, bool coarse) {
  std::size_t step = coarse ? 2 : 1;
  std::size_t n = g.values.size();
  std::size_t mid = (n - 1) / 2;  // index of 0 when n is odd
  double h = 2.0 * g.cutoff / static_cast<double>(n - 1);
  std::vector<double> out(top + 1);
  for (int k = 0; k <= top; ++k) {
    std::vector<double> terms;
    if (n % 2 == 1) {
      for (std::size_t i = mid; i + step < n; i += step) {
        double a = (static_cast<double>(i) - mid) * h, b = (static_cast<double>(i + step) - mid) * h;
        terms.push_back(log_segment_moment(a, b, g.values[i], g.values[i + step], k));
      }
    } else {
      // zero sits mid-cell; split that cell at the origin
      std::size_t i0 = n / 2;
      double f0 = 0.5 * (g.values[i0 - 1] + g.values[i0]);
      terms.push_back(log_segment_moment(0.0, 0.5 * h, f0, g.values[i0], k));
      for (std::size_t i = i0; i + 1 < n; ++i) {
        double a = (static_cast<double>(i) - (n - 1) / 2.0) * h;
        terms.push_back(log_segment_moment(a, a + h, g.values[i], g.values[i + 1], k));
      }
    }
    double lm = std::log(2.0) + logsumexp(terms);
    if (!g.compact_support && terms.size() > 1 && terms.back() - lm > std::log(1e-8))
      fail(ErrorKind::DivergentMoment, "moment of order " + std::to_string(k) +
                                           " is dominated by the grid edge; support looks unbounded");
    out[k] = lm;
  }
  return out;
}

std::vector<double> log_moments_1d(const SpectralMeasure1D& mu, int top, MomentMethod method,
                                   double* richardson) {
  std::vector<double> out(top + 1);
  const Family1D& fam = mu.family();
  if (auto* a = std::get_if<Atomic>(&fam)) {
    for (int k = 0; k <= top; ++k) {
      std::vector<double> terms;
      for (const Atom& at : a->atoms) {
        if (at.freq == 0.0) {
          if (k == 0) terms.push_back(std::log(at.weight));
        } else {
          terms.push_back(std::log(at.weight) + k * std::log(std::abs(at.freq)));
        }
      }
      out[k] = logsumexp(terms);
    }
    return out;
  }
  if (auto* g = std::get_if<GridDensity>(&fam)) {
    out = grid_log_moments(*g, top, false);
    if (g->values.size() % 2 == 1 && g->values.size() >= 5) {
      std::vector<double> coarse = grid_log_moments(*g, top, true);
      double worst = 0.0;
      for (int k = 0; k <= top; ++k) worst = std::max(worst, std::abs(std::expm1(coarse[k] - out[k])) / 3.0);
      if (richardson) *richardson = worst;
    }
    return out;
  }
  for (int k = 0; k <= top; ++k) {
    if (method == MomentMethod::Quadrature) {
      out[k] = log_quadrature_moment(mu, k);
      continue;
    }
    if (auto* u = std::get_if<Uniform>(&fam)) out[k] = k * std::log(u->q) - std::log(k + 1.0);
    else if (std::holds_alternative<StdNormal>(fam))
      out[k] = 0.5 * k * std::log(2.0) + std::lgamma(0.5 * (k + 1.0)) - 0.5 * std::log(kPi);
    else if (auto* s = std::get_if<StretchedExp>(&fam))
      out[k] = std::lgamma(s->alpha * (k + 1.0)) - std::lgamma(s->alpha);
    else out[k] = log_logtype_moment(std::get<LogType>(fam).gamma, k);
  }
  return out;
}

void check_order(int max_order) {
  if (max_order < 0) throw std::invalid_argument("max_order must be nonnegative");
  if (max_order > kMaxOrderLimit) fail(ErrorKind::OrderTooLarge, "max_order exceeds supported range");
}

void check_finite(const std::vector<double>& v) {
  for (double x : v)
    if (std::isnan(x) || x == kInf) fail(ErrorKind::OrderTooLarge, "moment outside floating range");
}

}  // namespace

double log_angular_factor(int m, int n) {
  return std::lgamma(0.5 * (m + 1)) + std::lgamma(0.5 * (n + 1)) - std::log(kPi) -
         std::lgamma(0.5 * (m + n + 2));
}

MomentTable moments_1d(const SpectralMeasure1D& mu, int max_order, MomentMethod method) {
  check_order(max_order);
  MomentTable t;
  t.dimension = 1;
  t.max_order = max_order;
  bool closed = method == MomentMethod::Auto &&
                !std::holds_alternative<GridDensity>(mu.family());
  t.method = closed ? "closed_form" : "quadrature";
  t.log_c = log_moments_1d(mu, 2 * max_order + 2, method, &t.richardson_error);
  check_finite(t.log_c);
  return t;
}

MomentTable moments_2d(const SpectralMeasure2D& mu, int max_order, MomentMethod method) {
  check_order(max_order);
  MomentTable t;
  t.dimension = 2;
  t.max_order = max_order;
  t.method = method == MomentMethod::Auto ? "closed_form" : "quadrature";
  const int K = 2 * max_order + 2;
  t.log_c2.assign(K + 1, {});
  for (int m = 0; m <= K; ++m) t.log_c2[m].assign(K - m + 1, -kInf);
  t.log_radial.assign(K + 1, -kInf);

  const Family2D& fam = mu.family();
  if (auto* a = std::get_if<Atomic2D>(&fam)) {
    auto lp = [](double v, int k) { return k == 0 ? 0.0 : (v == 0.0 ? -kInf : k * std::log(std::abs(v))); };
    for (int m = 0; m <= K; ++m)
      for (int n = 0; m + n <= K; ++n) {
        std::vector<double> terms;
        for (const Atom2D& at : a->atoms) terms.push_back(std::log(at.weight) + lp(at.x, m) + lp(at.y, n));
        t.log_c2[m][n] = logsumexp(terms);
      }
    for (int k = 0; k <= K; ++k) {
      std::vector<double> terms;
      for (const Atom2D& at : a->atoms) terms.push_back(std::log(at.weight) + lp(std::hypot(at.x, at.y), k));
      t.log_radial[k] = logsumexp(terms);
    }
  } else if (auto* p = std::get_if<Product>(&fam)) {
    MomentTable tx = moments_1d(p->mx, max_order, method);
    MomentTable ty = moments_1d(p->my, max_order, method);
    for (int m = 0; m <= K; ++m)
      for (int n = 0; m + n <= K; ++n) t.log_c2[m][n] = tx.log_c[m] + ty.log_c[n];
    // even radial moments by binomial expansion of (x^2 + y^2)^j
    for (int j = 0; 2 * j <= K; ++j) {
      std::vector<double> terms;
      for (int k = 0; k <= j; ++k) {
        double lb = std::lgamma(j + 1.0) - std::lgamma(k + 1.0) - std::lgamma(j - k + 1.0);
        terms.push_back(lb + tx.log_c[2 * k] + ty.log_c[2 * (j - k)]);
      }
      t.log_radial[2 * j] = logsumexp(terms);
    }
    if (K >= 1 && p->mx.has_density() && p->my.has_density()) {
      std::vector<double> lr = log_product_radial_moments(p->mx, p->my, K);
      for (int k = 1; k <= K; k += 2) t.log_radial[k] = lr[k];
    } else {
      for (int k = 1; k <= K; k += 2) t.log_radial[k] = std::nan("");
    }
  } else {
    const RadialMeasure& prof = std::get<Radial>(fam).profile;
    for (int k = 0; k <= K; ++k) {
      if (method == MomentMethod::Quadrature && prof.has_density()) {
        double R = prof.effective_radius(1e-40);
        double s0 = std::holds_alternative<RadialLogType>(prof.family()) ? 1.0 : 0.0;
        double peak = -kInf;
        auto lg = [&](double r) { return (k == 0 ? 0.0 : k * std::log(r)) + safe_log(prof.density(r)); };
        for (int i = 1; i <= 4096; ++i) peak = std::max(peak, lg(s0 + (R - s0) * i / 4096.0));
        while (lg(R) - peak > -80.0) R *= 1.5;
        QuadResult r = integrate_panels([&](double x) { return std::exp(lg(x) - peak); }, s0, R,
                                        (R - s0) / 64.0, 1e-13);
        t.log_radial[k] = peak + std::log(r.value);
      } else {
        t.log_radial[k] = prof.log_moment(k);
      }
    }
    for (int m = 0; m <= K; ++m)
      for (int n = 0; m + n <= K; ++n) {
        double la;
        if (method == MomentMethod::Quadrature) {
          QuadResult r = integrate(
              [&](double th) { return std::pow(std::cos(th), m) * std::pow(std::sin(th), n); }, 0.0,
              0.5 * kPi, 1e-14);
          la = std::log(r.value) + std::log(2.0 / kPi);
        } else {
          la = log_angular_factor(m, n);
        }
        t.log_c2[m][n] = la + t.log_radial[m + n];
      }
  }
  for (const auto& row : t.log_c2) check_finite(row);
  return t;
}

double MomentTable::log_C(int n) const {
  if (n < 0 || n >= static_cast<int>(log_c.size()))
    fail(ErrorKind::OrderTooLarge, "moment order " + std::to_string(n) + " outside the table");
  return log_c[n];
}

double MomentTable::C(int n) const {
  double l = log_C(n);
  if (l > 709.0) fail(ErrorKind::OrderTooLarge, "moment overflows double; use log_C");
  return std::exp(l);
}

double MomentTable::log_D(int n) const {
  return std::max({0.0, 0.5 * log_C(2 * n), 0.5 * log_C(2 * n + 2)});
}

double MomentTable::D(int n) const {
  double l = log_D(n);
  if (l > 709.0) fail(ErrorKind::OrderTooLarge, "D_n overflows double; use log_D");
  return std::exp(l);
}

double MomentTable::D_root(int n) const {
  if (n < 1) throw std::invalid_argument("D_root needs n >= 1");
  return std::exp(log_D(n) / n);
}

double MomentTable::log_C2(int m, int n) const {
  if (m < 0 || n < 0 || m >= static_cast<int>(log_c2.size()) ||
      n >= static_cast<int>(log_c2[m].size()))
    fail(ErrorKind::OrderTooLarge, "moment order outside the table");
  return log_c2[m][n];
}

double MomentTable::C2(int m, int n) const {
  double l = log_C2(m, n);
  if (l > 709.0) fail(ErrorKind::OrderTooLarge, "moment overflows double; use log_C2");
  return std::exp(l);
}

double MomentTable::log_R_tilde(int n) const {
  double best = -kInf;
  for (int k = 0; k <= 2 * n; ++k) best = std::max(best, 0.5 * log_C2(k, 2 * n - k));
  return best;
}

double MomentTable::log_R(int n) const {
  return std::max({0.0, log_R_tilde(1), log_R_tilde(n), log_R_tilde(n + 1)});
}

double MomentTable::R_root(int n) const {
  if (n < 1) throw std::invalid_argument("R_root needs n >= 1");
  return std::exp(log_R(n) / n);
}

double MomentTable::log_L_tilde(int n) const {
  if (n < 0 || 2 * n >= static_cast<int>(log_radial.size()))
    fail(ErrorKind::OrderTooLarge, "radial moment order outside the table");
  return 0.5 * log_radial[2 * n];
}

double MomentTable::log_L(int n) const {
  return std::max({0.0, log_L_tilde(1), log_L_tilde(n), log_L_tilde(n + 1)});
}

double MomentTable::L_root(int n) const {
  if (n < 1) throw std::invalid_argument("L_root needs n >= 1");
  return std::exp(log_L(n) / n);
}

// ---------------------------------------------------------------------------
// Density conditions

AssumptionReport level_set_report(const std::function<double(double)>& density, double radius,
                                  int n_cells) {
  AssumptionReport rep;
  double h = radius / n_cells;
  std::vector<double> vals(n_cells);
  for (int i = 0; i < n_cells; ++i) vals[i] = density((i + 0.5) * h);
  std::vector<double> sorted = vals;
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  // level set {f >= s_k} has measure 2h(k+1) on the symmetric grid
  double best = 0.0;
  for (int k = 0; k < n_cells; ++k) {
    if (!(sorted[k] > 0.0)) break;
    best = std::max(best, std::min(sorted[k], 2.0 * h * (k + 1)));
  }
  rep.delta0 = best;
  if (!(best > 0.0)) {
    rep.reason = "no positive density found";
    return rep;
  }
  double acc = 0.0;
  rep.M_min = radius;
  for (int i = 0; i < n_cells; ++i) {
    if (vals[i] >= best) acc += 2.0 * h;
    if (acc >= 0.5 * best) {
      rep.M_min = (i + 1) * h;
      break;
    }
  }
  rep.M0 = std::max(rep.M_min, kPi);
  rep.S_mass = 0.0;
  for (int i = 0; i < n_cells; ++i)
    if ((i + 1) * h <= rep.M0 && vals[i] >= best) rep.S_mass += 2.0 * h;
  rep.b = kPi / rep.M0;
  rep.satisfied = rep.S_mass >= 0.5 * best;
  if (!rep.satisfied) rep.reason = "level set too small inside (-M0, M0)";
  return rep;
}

AssumptionReport check_assumption_a1(const SpectralMeasure1D& mu) {
  if (!mu.has_density()) {
    AssumptionReport rep;
    rep.reason = "measure has no absolutely continuous part";
    return rep;
  }
  double R = mu.support_radius();
  if (!std::isfinite(R)) R = mu.effective_radius(1e-12);
  return level_set_report([&](double x) { return mu.density(x); }, R);
}

double marginal_density(const SpectralMeasure2D& mu, double angle, double x) {
  const Family2D& fam = mu.family();
  if (std::holds_alternative<Atomic2D>(fam)) return 0.0;
  if (auto* p = std::get_if<Product>(&fam)) {
    double q = angle / (0.5 * kPi);
    double r = std::round(q);
    if (std::abs(q - r) > 1e-12)
      throw std::invalid_argument("product marginals are only available along the axes");
    int k = static_cast<int>(r) & 1;
    return k == 0 ? p->mx.density(x) : p->my.density(x);
  }
  const RadialMeasure& prof = std::get<Radial>(fam).profile;
  double ax = std::abs(x);
  if (auto* ra = std::get_if<RadialAtoms>(&prof.family())) {
    double s = 0.0;
    for (const Atom& a : ra->atoms)
      if (ax < a.freq) s += a.weight / (kPi * std::sqrt(a.freq * a.freq - ax * ax));
    return s;
  }
  if (std::holds_alternative<Rayleigh>(prof.family()))
    return std::exp(-0.5 * x * x) / std::sqrt(2.0 * kPi);
  double R = prof.effective_radius(1e-16);
  if (ax >= R) return 0.0;
  double U = std::sqrt(R * R - ax * ax);
  auto f = [&](double u) {
    double r = std::hypot(ax, u);
    return r > 0.0 ? prof.density(r) / r : 0.0;
  };
  // the log-type profile starts at r = 1
  double u1 = ax < 1.0 ? std::sqrt(1.0 - ax * ax) : 0.0;
  double val = 0.0;
  if (std::holds_alternative<RadialLogType>(prof.family()) && u1 > 0.0) {
    val = integrate_panels(f, u1, U, (U - u1) / 16.0, 1e-10, 1e-14).value;
  } else {
    val = integrate_panels(f, 0.0, U, U / 16.0, 1e-10, 1e-14).value;
  }
  return val / kPi;
}

A2Report check_assumption_a2(const SpectralMeasure2D& mu, double angle) {
  A2Report rep;
  rep.angle = angle;
  const Family2D& fam = mu.family();
  if (std::holds_alternative<Atomic2D>(fam)) {
    rep.along.reason = rep.across.reason = "measure has no absolutely continuous part";
    return rep;
  }
  auto one = [&](double a) {
    double R;
    int cells = 1 << 16;
    if (auto* p = std::get_if<Product>(&fam)) {
      double q = std::round(a / (0.5 * kPi));
      const SpectralMeasure1D& m = (static_cast<int>(q) & 1) ? p->my : p->mx;
      if (!m.has_density()) {
        AssumptionReport r;
        r.reason = "marginal has no density";
        return r;
      }
      R = std::isfinite(m.support_radius()) ? m.support_radius() : m.effective_radius(1e-12);
    } else {
      const RadialMeasure& prof = std::get<Radial>(fam).profile;
      R = prof.effective_radius(1e-12);
      if (prof.has_density() && !std::holds_alternative<Rayleigh>(prof.family())) cells = 1 << 12;
    }
    return level_set_report([&](double x) { return marginal_density(mu, a, x); }, R, cells);
  };
  rep.along = one(angle);
  rep.across = one(angle + 0.5 * kPi);
  rep.satisfied = rep.along.satisfied && rep.across.satisfied;
  return rep;
}

RadialMeasure radial_pushforward(const SpectralMeasure2D& mu) {
  const Family2D& fam = mu.family();
  if (auto* r = std::get_if<Radial>(&fam)) return r->profile;
  if (auto* a = std::get_if<Atomic2D>(&fam)) {
    std::vector<Atom> out;
    for (const Atom2D& at : a->atoms) {
      double r = std::hypot(at.x, at.y);
      bool merged = false;
      for (Atom& o : out)
        if (std::abs(o.freq - r) <= 1e-12 * (1.0 + r)) {
          o.weight += at.weight;
          merged = true;
          break;
        }
      if (!merged) out.push_back({r, at.weight});
    }
    return RadialMeasure::atoms(std::move(out));
  }
  const Product& p = std::get<Product>(fam);
  if (std::holds_alternative<StdNormal>(p.mx.family()) && std::holds_alternative<StdNormal>(p.my.family()))
    return RadialMeasure::rayleigh();
  auto* ax = std::get_if<Atomic>(&p.mx.family());
  auto* ay = std::get_if<Atomic>(&p.my.family());
  if (ax && ay) {
    std::vector<Atom2D> atoms;
    for (const Atom& u : ax->atoms)
      for (const Atom& v : ay->atoms) atoms.push_back({u.freq, v.freq, u.weight * v.weight});
    return radial_pushforward(SpectralMeasure2D::atomic(std::move(atoms)));
  }
  if (ax || ay)
    throw std::invalid_argument("radial pushforward of an atom-by-density product is not supported");
  double Rx = std::isfinite(p.mx.support_radius()) ? p.mx.support_radius() : p.mx.effective_radius(1e-18);
  double Ry = std::isfinite(p.my.support_radius()) ? p.my.support_radius() : p.my.effective_radius(1e-18);
  double R = std::hypot(Rx, Ry);
  // absolute tolerance from the peak of the joint density, so far-tail radii
  // don't chase values far below anything that matters
  auto peak = [](const SpectralMeasure1D& m, double r) {
    double v = 0.0;
    for (int i = 0; i <= 256; ++i) v = std::max(v, m.density(r * i / 256.0));
    return v;
  };
  const double abs_tol = 1e-15 * peak(p.mx, Rx) * peak(p.my, Ry);
  const int n = 2049;
  std::vector<double> vals(n, 0.0);
  for (int i = 1; i < n; ++i) {
    double r = R * i / (n - 1);
    auto f = [&](double th) { return p.mx.density(r * std::cos(th)) * p.my.density(r * std::sin(th)); };
    // symmetric in both axes: integrate one quadrant, split where the circle
    // leaves a compact marginal support
    std::vector<double> cuts{0.0, 0.5 * kPi};
    if (std::isfinite(p.mx.support_radius()) && r > Rx) cuts.push_back(std::acos(Rx / r));
    if (std::isfinite(p.my.support_radius()) && r > Ry) cuts.push_back(std::asin(Ry / r));
    std::sort(cuts.begin(), cuts.end());
    double q = 0.0;
    for (std::size_t c = 0; c + 1 < cuts.size(); ++c)
      if (cuts[c + 1] - cuts[c] > 1e-12)
        q += integrate_panels(f, cuts[c], cuts[c + 1], kPi / 32.0, 1e-10, abs_tol).value;
    vals[i] = 4.0 * r * q;
  }
  return RadialMeasure::grid(R, std::move(vals));
}

}  // namespace gz
