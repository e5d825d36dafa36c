#pragma once

#include <Eigen/Dense>
#include <complex>
#include <optional>
#include <vector>

#include "gz/spectral.hpp"

namespace gz {

double kernel_eval(const SpectralMeasure1D& mu, double t);
std::vector<double> kernel_eval(const SpectralMeasure1D& mu, const std::vector<double>& ts);
double kernel_eval(const SpectralMeasure2D& mu, double x, double y);

// n-th derivative of k(t) = int cos(tx) dmu(x).
double kernel_derivative(const SpectralMeasure1D& mu, int order, double t);
std::vector<double> kernel_derivative(const SpectralMeasure1D& mu, int order,
                                      const std::vector<double>& ts);
// Covariance of X^(n)(t) and X^(n)(0): (-1)^n k^(2n)(t).
double derivative_covariance(const SpectralMeasure1D& mu, int n, double t);

struct GramMatrix {
  int m = 0;
  double T = 0.0;
  Eigen::MatrixXd sigma;  // (m+1) x (m+1), entries k((j-i)T/m)

  double determinant() const;
  double log_abs_determinant() const;
  double min_eigenvalue() const;
};

GramMatrix gram_matrix(const SpectralMeasure1D& mu, int m, double T);
// Covariance of the process at arbitrary points.
Eigen::MatrixXd covariance_at(const SpectralMeasure1D& mu, const std::vector<double>& pts);

struct CertificateOptions {
  std::optional<double> b;  // defaults to pi / M0 from the density check
  int max_bits = 4096;
  bool require_a1 = true;
};

struct EigenCertificate {
  int m = 0;
  double T = 0.0;
  double b = 0.0;
  double log_lambda_min = 0.0;
  double lambda_min = 0.0;
  std::optional<double> c_supplied;
  double c_fitted = 0.0;   // NaN when m < 2
  double log_bound = 0.0;  // 2(m-1) log(cT/m) for the supplied c
  bool valid = false;
  bool resolved = false;   // lambda_min separated from rounding error
  int precision_bits = 53;
};

EigenCertificate eigen_certificate(const SpectralMeasure1D& mu, int m, double T,
                                   std::optional<double> c = std::nullopt,
                                   const CertificateOptions& opt = {});

struct FoldedDensity {
  int m = 0;
  double T = 0.0;
  std::vector<double> x;
  std::vector<double> values;
  double mass = 0.0;
  double threshold = 0.0;      // m delta0 / T
  double level_measure = 0.0;  // |{f_{m,T} >= threshold}|
  double required = 0.0;       // T delta0 / (2m)
  bool level_set_holds = false;
};

FoldedDensity folded_density(const SpectralMeasure1D& mu, int m, double T, int grid_points = 20001,
                             std::optional<double> b = std::nullopt);

struct ExpTerm {
  std::complex<double> coeff;
  double freq;
};

struct Interval {
  double a;
  double b;
};

// ||p||_{L^q(I)} / ||p||_{L^q(E)} for p(t) = sum c_k exp(i freq_k t). q = +inf gives sup norms.
double turan_ratio(const std::vector<ExpTerm>& p, Interval I, const std::vector<Interval>& E,
                   double q);
// (A |I| / |E|)^(n-1)
double turan_bound(int n_terms, Interval I, const std::vector<Interval>& E, double A = 14.0);

}  // namespace gz
