#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "gz/error.hpp"
#include "gz/kernel.hpp"
#include "gz/sampler.hpp"

using namespace gz;

namespace {

GridSpec grid1(double extent, int points) {
  GridSpec g;
  g.extent = extent;
  g.points = points;
  return g;
}

// two-sample Kolmogorov-Smirnov statistic
double ks_stat(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::size_t i = 0, j = 0;
  double d = 0;
  while (i < a.size() && j < b.size()) {
    double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(double(i) / a.size() - double(j) / b.size()));
  }
  return d;
}

}  // namespace

TEST_CASE("exact sampler moments") {
  auto mu = SpectralMeasure1D::uniform(1.0);
  GridSpec g = grid1(1.0, 3);  // points 0, 0.5, 1
  ExactPathSampler s(mu, g);
  const long N = 100000;
  double s0 = 0, s00 = 0, s02 = 0;
  std::vector<double> v(3);
  for (long i = 0; i < N; ++i) {
    s.draw(42, i, v.data());
    s0 += v[0];
    s00 += v[0] * v[0];
    s02 += v[0] * v[2];
  }
  double var = s00 / N;
  CHECK(std::abs(var - 1.0) <= 3 * std::sqrt(2.0 / N));
  CHECK(std::abs(s02 / N - std::sin(1.0)) <= 4 * std::sqrt((1 + std::sin(1.0) * std::sin(1.0)) / N));
  CHECK(std::abs(s0 / N) <= 4 / std::sqrt(double(N)));
}

TEST_CASE("determinism") {
  auto mu = SpectralMeasure1D::std_normal();
  GridSpec g = grid1(2.0, 33);
  auto a = sample_exact(mu, g, 9, 3), b = sample_exact(mu, g, 9, 3), c = sample_exact(mu, g, 10, 3);
  CHECK(a.values == b.values);
  CHECK(a.values != c.values);
  auto p = sample_spectral(mu, g, 9, 256, 1), q = sample_spectral(mu, g, 9, 256, 1);
  CHECK(p.values == q.values);
  GridSpec g2 = g;
  g2.dimension = 2;
  g2.points = 9;
  auto f1 = sample_spectral(SpectralMeasure2D::unit_circle_uniform(), g2, 5, 64);
  auto f2 = sample_spectral(SpectralMeasure2D::unit_circle_uniform(), g2, 5, 64);
  CHECK(f1.values == f2.values);
  CHECK(f1.values.size() == 81);
}

TEST_CASE("grid too large") {
  GridSpec g = grid1(1.0, 9000);
  CHECK_THROWS_AS(sample_exact(SpectralMeasure1D::uniform(1.0), g, 1), Error);
}

TEST_CASE("cosine process is exact") {
  auto mu = SpectralMeasure1D::symmetric_atoms({{1.0, 1.0}});
  SpectralSampler1D s(mu, 4096);
  for (int i = 0; i < 20; ++i) {
    WaveSum1D w = s.draw(3, i);
    // a cos t + b sin t: X(t)^2 + X'(t)^2 is constant
    double r0 = w.eval(0) * w.eval(0) + w.derivative(1, 0) * w.derivative(1, 0);
    for (double t : {0.7, 2.0, 5.5}) {
      CHECK(std::abs(w.eval(t) * w.eval(t) + w.derivative(1, t) * w.derivative(1, t) - r0) <= 1e-12 * (1 + r0));
      CHECK(std::abs(w.derivative(2, t) + w.eval(t)) <= 1e-12 * (1 + std::sqrt(r0)));
    }
  }
  auto paths = sample_derivative_paths(mu, grid1(6.0, 25), 8, {0, 2});
  for (std::size_t i = 0; i < paths[0].values.size(); ++i)
    CHECK(std::abs(paths[1].values[i] + paths[0].values[i]) <= 1e-12);
}

TEST_CASE("spectral sampler covariance") {
  auto circ = SpectralMeasure2D::unit_circle_uniform();
  SpectralSampler2D s(circ, 1024);
  const int N = 20000;
  double c = 0, v = 0;
  for (int i = 0; i < N; ++i) {
    WaveSum2D w = s.draw(17, i);
    double a = w.eval(0.1, 0.2), b = w.eval(0.1 + 2.404825557695773, 0.2);
    c += a * b;
    v += a * a;
  }
  CHECK(std::abs(c / N) <= 4 / std::sqrt(double(N)));
  CHECK(std::abs(v / N - 1.0) <= 4 * std::sqrt(2.0 / N));
}

TEST_CASE("derivative paths") {
  auto mu = SpectralMeasure1D::std_normal();
  GridSpec g = grid1(1.0, 201);
  for (int i = 0; i < 20; ++i) {
    auto p = sample_derivative_paths(mu, g, 4, {0, 1}, 512, i);
    auto plain = sample_spectral(mu, g, 4, 512, i);
    CHECK(plain.values == p[0].values);
    // central difference vs analytic derivative
    double h = g.spacing();
    for (int k = 1; k < 200; k += 37) {
      double fd = (p[0].values[k + 1] - p[0].values[k - 1]) / (2 * h);
      CHECK(std::abs(fd - p[1].values[k]) <= 20 * h * h);
    }
  }
  SpectralSampler1D s(mu, 512);
  const int N = 20000;
  double v1 = 0;
  for (int i = 0; i < N; ++i) {
    double d = s.draw(4, i).derivative(1, 0.25);
    v1 += d * d;
  }
  CHECK(std::abs(v1 / N - 1.0) <= 4 * std::sqrt(2.0 / N) + 2.0 / std::sqrt(512.0));
}

TEST_CASE("exact and spectral marginals agree") {
  auto mu = SpectralMeasure1D::uniform(1.0);
  GridSpec g = grid1(0.37, 2);
  ExactPathSampler ex(mu, g);
  SpectralSampler1D sp(mu, 4096);
  const int N = 10000;
  std::vector<double> a(N), b(N), v(2);
  for (int i = 0; i < N; ++i) {
    ex.draw(1, i, v.data());
    a[i] = v[1];
    b[i] = sp.draw(2, i).eval(0.37);
  }
  double crit = 1.9495 * std::sqrt(2.0 / N);  // alpha = 1e-3
  CHECK(ks_stat(a, b) < crit);
}

TEST_CASE("stationarity") {
  auto mu = SpectralMeasure1D::std_normal();
  GridSpec g = grid1(3.0, 7);
  ExactPathSampler ex(mu, g);
  const int N = 40000;
  std::vector<double> v(7);
  double c01 = 0, c23 = 0, c56 = 0;
  for (int i = 0; i < N; ++i) {
    ex.draw(6, i, v.data());
    c01 += v[0] * v[1];
    c23 += v[2] * v[3];
    c56 += v[5] * v[6];
  }
  double k = std::exp(-0.125);
  double tol = 4 * std::sqrt((1 + k * k) / N);
  CHECK(std::abs(c01 / N - k) <= tol);
  CHECK(std::abs(c23 / N - k) <= tol);
  CHECK(std::abs(c56 / N - k) <= tol);
}

TEST_CASE("grid covariance") {
  auto mu = SpectralMeasure1D::uniform(1.0);
  auto S = grid_covariance(mu, grid1(2.0, 5));
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) CHECK(std::abs(S(i, j) - kernel_eval(mu, 0.5 * std::abs(i - j))) <= 1e-12);
}
