#pragma once

#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "gz/rng.hpp"

namespace gz {

// ---------------------------------------------------------------------------
// One-dimensional spectral measures. All are symmetric probability measures.

struct Atom {
  double freq;
  double weight;
};

struct Atomic {
  std::vector<Atom> atoms;
};

// Piecewise-linear density sampled on a uniform grid over [-cutoff, cutoff].
struct GridDensity {
  double cutoff = 1.0;
  std::vector<double> values;
  bool compact_support = true;
  bool with_cdf = true;
};

struct Uniform {
  double q = 1.0;
};

struct StdNormal {};

// density proportional to exp(-|x|^(1/alpha))
struct StretchedExp {
  double alpha = 1.0;
};

// density proportional to exp(-(log|x|)^(1+gamma)) on |x| >= 1
struct LogType {
  double gamma = 1.0;
};

using Family1D = std::variant<Atomic, GridDensity, Uniform, StdNormal, StretchedExp, LogType>;

class PiecewiseLinearCdf;

class SpectralMeasure1D {
 public:
  static SpectralMeasure1D atomic(std::vector<Atom> atoms);
  // Adds the mirror image of every atom; weights are halved on each side.
  static SpectralMeasure1D symmetric_atoms(const std::vector<Atom>& half);
  static SpectralMeasure1D grid_density(double cutoff, std::vector<double> values,
                                        bool compact_support = true, bool with_cdf = true);
  static SpectralMeasure1D uniform(double q = 1.0);
  static SpectralMeasure1D std_normal();
  static SpectralMeasure1D stretched_exp(double alpha);
  static SpectralMeasure1D log_type(double gamma);

  const Family1D& family() const { return fam_; }
  std::string label() const;
  bool has_density() const;
  // Density of the absolutely continuous part (zero for atomic measures).
  double density(double x) const;
  double log_density(double x) const;
  // Radius outside which there is no mass; +inf for unbounded families.
  double support_radius() const;
  // Point beyond which density is below rel * max density (for scans).
  double effective_radius(double rel) const;
  // Left end of the support on the positive half line (1 for log-type).
  double support_start() const;
  bool is_point_mass_at_zero() const;

  double sample(Rng& rng) const;

 private:
  explicit SpectralMeasure1D(Family1D f);
  Family1D fam_;
  std::shared_ptr<const PiecewiseLinearCdf> cdf_;
  double log_norm_ = 0.0;
};

// ---------------------------------------------------------------------------
// Two-dimensional spectral measures.

struct Atom2D {
  double x;
  double y;
  double weight;
};

struct Atomic2D {
  std::vector<Atom2D> atoms;
};

struct Product {
  SpectralMeasure1D mx;
  SpectralMeasure1D my;
};

// Radial profiles live on [0, inf).
struct RadialAtoms {
  std::vector<Atom> atoms;  // freq is the radius
};
struct Rayleigh {};
struct RadialStretchedExp {
  double alpha = 1.0;
};
struct RadialLogType {
  double gamma = 1.0;
};
struct RadialGrid {
  double cutoff = 1.0;
  std::vector<double> values;  // density on a uniform grid over [0, cutoff]
};

using RadialFamily =
    std::variant<RadialAtoms, Rayleigh, RadialStretchedExp, RadialLogType, RadialGrid>;

class RadialMeasure {
 public:
  static RadialMeasure atoms(std::vector<Atom> atoms);
  static RadialMeasure rayleigh();
  static RadialMeasure stretched_exp(double alpha);
  static RadialMeasure log_type(double gamma);
  static RadialMeasure grid(double cutoff, std::vector<double> values);

  const RadialFamily& family() const { return fam_; }
  std::string label() const;
  bool has_density() const;
  double density(double r) const;
  // log of the integral of t^k against the profile
  double log_moment(double k) const;
  double effective_radius(double rel) const;
  bool is_point_mass_at_zero() const;
  double sample(Rng& rng) const;

 private:
  explicit RadialMeasure(RadialFamily f);
  RadialFamily fam_;
  std::shared_ptr<const PiecewiseLinearCdf> cdf_;
  double log_norm_ = 0.0;
};

struct Radial {
  RadialMeasure profile;
};

using Family2D = std::variant<Atomic2D, Product, Radial>;

class SpectralMeasure2D {
 public:
  static SpectralMeasure2D atomic(std::vector<Atom2D> atoms);
  static SpectralMeasure2D symmetric_atoms(const std::vector<Atom2D>& half);
  static SpectralMeasure2D product(SpectralMeasure1D mx, SpectralMeasure1D my);
  static SpectralMeasure2D radial(RadialMeasure profile);
  static SpectralMeasure2D unit_circle_uniform();
  static SpectralMeasure2D std_normal_2d();
  static SpectralMeasure2D radial_stretched_exp(double alpha);
  static SpectralMeasure2D radial_log_type(double gamma);

  const Family2D& family() const { return fam_; }
  std::string label() const;
  // Support contained in a line through the origin.
  bool degenerate_line() const;
  std::pair<double, double> sample(Rng& rng) const;

 private:
  explicit SpectralMeasure2D(Family2D f) : fam_(std::move(f)) {}
  Family2D fam_;
};

// ---------------------------------------------------------------------------
// Moments. Everything is stored as natural logs; -inf marks a zero moment.

enum class MomentMethod { Auto, Quadrature };

class MomentTable {
 public:
  int dimension = 1;
  int max_order = 0;
  std::string method;
  // Largest relative Richardson error estimate (grid densities only).
  double richardson_error = 0.0;

  // 1D: log C_n for n = 0..2*max_order+2
  std::vector<double> log_c;
  // 2D: log C_{m,n} for m+n <= 2*max_order+2, stored as log_c2[m][n]
  std::vector<std::vector<double>> log_c2;
  // 2D: log of the t^k moment of the radial pushforward, k = 0..2*max_order+2
  std::vector<double> log_radial;

  double log_C(int n) const;
  double C(int n) const;
  double log_D(int n) const;
  double D(int n) const;
  // D_n^(1/n)
  double D_root(int n) const;

  double log_C2(int m, int n) const;
  double C2(int m, int n) const;
  double log_R_tilde(int n) const;
  double log_R(int n) const;
  double R_root(int n) const;
  double log_L_tilde(int n) const;
  double log_L(int n) const;
  double L_root(int n) const;
};

MomentTable moments_1d(const SpectralMeasure1D& mu, int max_order,
                       MomentMethod method = MomentMethod::Auto);
MomentTable moments_2d(const SpectralMeasure2D& mu, int max_order,
                       MomentMethod method = MomentMethod::Auto);

// ---------------------------------------------------------------------------
// Density conditions.

struct AssumptionReport {
  bool satisfied = false;
  double delta0 = 0.0;
  double M_min = 0.0;  // smallest M with |{f >= delta0} n (-M, M)| >= delta0/2
  double M0 = 0.0;     // max(M_min, pi)
  double S_mass = 0.0;
  double b = 0.0;      // pi / M0
  std::string reason;
};

AssumptionReport check_assumption_a1(const SpectralMeasure1D& mu);

struct A2Report {
  bool satisfied = false;
  double angle = 0.0;
  AssumptionReport along;   // marginal along v1
  AssumptionReport across;  // marginal along v1 rotated by pi/2
};

// v1 = (cos angle, sin angle).
A2Report check_assumption_a2(const SpectralMeasure2D& mu, double angle = 0.0);

// Same level-set construction applied to an arbitrary symmetric density.
AssumptionReport level_set_report(const std::function<double(double)>& density, double radius,
                                  int n_cells = 1 << 16);

// Marginal density of the 2D measure along direction angle.
double marginal_density(const SpectralMeasure2D& mu, double angle, double x);

RadialMeasure radial_pushforward(const SpectralMeasure2D& mu);

// Area factor of the angular integral: mean of |cos|^m |sin|^n over the circle.
double log_angular_factor(int m, int n);

}  // namespace gz
