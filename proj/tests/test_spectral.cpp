#include <doctest.h>

#include <cmath>
#include <functional>
#include <random>

#include "gz/error.hpp"
#include "gz/spectral.hpp"

using namespace gz;

namespace {

// Composite Simpson on [a, b] with n (even) panels.
double simpson(const std::function<double(double)>& f, double a, double b, int n = 20000) {
  double h = (b - a) / n, s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

double gaussian_moment(int n) {
  if (n % 2) return std::sqrt(2.0 / M_PI) * std::pow(2.0, (n - 1) / 2.0) * std::tgamma((n + 1) / 2.0);
  double p = 1.0;
  for (int k = n - 1; k > 0; k -= 2) p *= k;
  return p;
}

}  // namespace

TEST_CASE("uniform and gaussian moments match closed forms") {
  auto u = moments_1d(SpectralMeasure1D::uniform(1.0), 10, MomentMethod::Quadrature);
  CHECK(rel(u.C(2), 1.0 / 3.0) <= 1e-8);
  CHECK(rel(u.C(4), 1.0 / 5.0) <= 1e-8);
  auto g = moments_1d(SpectralMeasure1D::std_normal(), 10, MomentMethod::Quadrature);
  CHECK(rel(g.C(2), 1.0) <= 1e-8);
  CHECK(rel(g.C(4), 3.0) <= 1e-8);
  CHECK(rel(g.C(6), 15.0) <= 1e-8);
  auto ga = moments_1d(SpectralMeasure1D::std_normal(), 10);
  for (int n = 0; n <= 20; ++n) CHECK(rel(ga.C(n), gaussian_moment(n)) <= 1e-8);
  for (int n = 0; n <= 20; ++n) CHECK(rel(g.C(n), gaussian_moment(n)) <= 1e-8);
}

TEST_CASE("C_0 is one and D_n is at least one") {
  for (auto mu : {SpectralMeasure1D::uniform(0.3), SpectralMeasure1D::std_normal(),
                  SpectralMeasure1D::stretched_exp(0.7), SpectralMeasure1D::log_type(1.0),
                  SpectralMeasure1D::symmetric_atoms({{2.0, 1.0}})}) {
    auto t = moments_1d(mu, 6);
    CHECK(std::abs(t.C(0) - 1.0) <= 1e-10);
    for (int n = 0; n <= 6; ++n) {
      CHECK(t.D(n) >= 1.0);
      double want = std::max({1.0, std::sqrt(t.C(2 * n)), std::sqrt(t.C(2 * n + 2))});
      CHECK(rel(t.D(n), want) <= 1e-12);
    }
  }
}

TEST_CASE("stretched exponential moments against Simpson") {
  double alpha = 0.5;
  auto mu = SpectralMeasure1D::stretched_exp(alpha);
  auto t = moments_1d(mu, 4);
  auto w = [&](double x) { return std::exp(-std::pow(std::abs(x), 1.0 / alpha)); };
  double z = 2.0 * simpson(w, 0.0, 40.0);
  for (int n : {2, 4, 6}) {
    double m = 2.0 * simpson([&](double x) { return std::pow(x, n) * w(x); }, 0.0, 40.0) / z;
    CHECK(rel(t.C(n), m) <= 1e-7);
  }
  CHECK(std::abs(2.0 * simpson([&](double x) { return mu.density(x); }, 0.0, 40.0) - 1.0) <= 1e-9);
}

TEST_CASE("even moments are log convex") {
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  std::vector<SpectralMeasure1D> fams{SpectralMeasure1D::uniform(1.0), SpectralMeasure1D::std_normal(),
                                      SpectralMeasure1D::stretched_exp(1.0), SpectralMeasure1D::log_type(0.5)};
  for (int r = 0; r < 5; ++r) {
    std::vector<double> v(65);
    for (int i = 0; i <= 32; ++i) v[i] = v[64 - i] = 0.1 + U(gen);
    fams.push_back(SpectralMeasure1D::grid_density(1.0 + 3.0 * U(gen), v));
  }
  for (const auto& mu : fams) {
    auto t = moments_1d(mu, 8);
    for (int n = 1; n <= 8; ++n)
      CHECK(2.0 * t.log_C(2 * n) <= t.log_C(2 * n - 2) + t.log_C(2 * n + 2) + 1e-8);
  }
}

TEST_CASE("growth classes") {
  for (double q : {0.5, 1.0, 3.0}) {
    auto t = moments_1d(SpectralMeasure1D::uniform(q), 14);
    for (int n = 1; n <= 30; ++n) CHECK(t.log_C(n) <= n * std::log(q) + 1e-12);
  }
  auto g = moments_1d(SpectralMeasure1D::std_normal(), 14);
  for (int n = 1; n <= 30; ++n) CHECK(g.log_C(n) <= 0.5 * n * std::log(n) + 1e-12);
  double alpha = 1.5;
  auto s = moments_1d(SpectralMeasure1D::stretched_exp(alpha), 14);
  double worst = -INFINITY;
  for (int n = 1; n <= 5; ++n) worst = std::max(worst, s.log_C(n) - alpha * n * std::log(n));
  for (int n = 6; n <= 30; ++n) CHECK(s.log_C(n) - alpha * n * std::log(n) <= worst);
}

TEST_CASE("2D moments examples") {
  auto c = moments_2d(SpectralMeasure2D::unit_circle_uniform(), 6);
  for (int n = 1; n <= 6; ++n) CHECK(std::abs(c.log_L_tilde(n)) <= 1e-10);
  CHECK(rel(c.C2(2, 0), 0.5) <= 1e-8);
  double quad = simpson([](double th) { return std::pow(std::cos(th), 2) * std::pow(std::sin(th), 2); }, 0.0,
                        2 * M_PI) / (2 * M_PI);
  CHECK(rel(c.C2(2, 2), quad) <= 1e-8);
  auto g = moments_2d(SpectralMeasure2D::std_normal_2d(), 6);
  CHECK(rel(g.C2(2, 2), 1.0) <= 1e-8);
  CHECK(rel(g.C2(4, 2), 3.0) <= 1e-8);
  auto p = moments_2d(SpectralMeasure2D::product(SpectralMeasure1D::uniform(1.0), SpectralMeasure1D::std_normal()), 4);
  CHECK(rel(p.C2(2, 4), 3.0 / 3.0) <= 1e-8);
}

TEST_CASE("odd radial moments of products") {
  // two standard normals: |z| is Rayleigh, E|z|^k = 2^(k/2) Gamma(1 + k/2)
  auto n2 = moments_2d(SpectralMeasure2D::product(SpectralMeasure1D::std_normal(), SpectralMeasure1D::std_normal()), 6);
  for (int k : {1, 3, 5, 7, 13})
    CHECK(std::abs(n2.log_radial[k] - (0.5 * k * std::log(2.0) + std::lgamma(1.0 + 0.5 * k))) <= 1e-9);
  // uniform on the square [-1, 1]^2
  auto sq = moments_2d(SpectralMeasure2D::product(SpectralMeasure1D::uniform(1.0), SpectralMeasure1D::uniform(1.0)), 2);
  CHECK(rel(std::exp(sq.log_radial[1]), (std::sqrt(2.0) + std::asinh(1.0)) / 3.0) <= 1e-9);
  CHECK(rel(std::exp(sq.log_radial[3]), (7.0 * std::sqrt(2.0) + 3.0 * std::asinh(1.0)) / 20.0) <= 1e-9);
}

TEST_CASE("moment sandwich on random 2D measures") {
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (int r = 0; r < 30; ++r) {
    std::vector<Atom2D> half;
    int k = 1 + r % 4;
    for (int i = 0; i < k; ++i) half.push_back({4 * U(gen) - 2, 4 * U(gen) - 2, U(gen) + 0.1});
    double s = 0;
    for (auto& a : half) s += a.weight;
    for (auto& a : half) a.weight /= s;
    auto t = moments_2d(SpectralMeasure2D::symmetric_atoms(half), 12);
    for (int n = 1; n <= 12; ++n) {
      // per-order quantities
      CHECK(t.log_R_tilde(n) <= t.log_L_tilde(n) + 1e-8);
      CHECK(t.log_L_tilde(n) <= t.log_R_tilde(n) + 0.5 * n * std::log(2.0) + 1e-8);
      // the maxed quantities carry the order n+1 term, so the constant is 2^((n+1)/(2n))
      double lr = t.log_R(n) / n, ll = t.log_L(n) / n;
      CHECK(lr <= ll + 1e-8);
      CHECK(ll <= lr + 0.5 * (n + 1.0) / n * std::log(2.0) + 1e-8);
    }
  }
}

TEST_CASE("maxed sandwich with constant sqrt 2 fails on diagonal atoms") {
  // atoms at +-(a, a): R_n = a^(n+1), L_n = 2^((n+1)/2) a^(n+1)
  double a = 1.5;
  auto t = moments_2d(SpectralMeasure2D::symmetric_atoms({{a, a, 1.0}}), 6);
  for (int n = 1; n <= 6; ++n) {
    CHECK(std::abs(t.log_R(n) - (n + 1) * std::log(a)) <= 1e-10);
    CHECK(std::abs(t.log_L(n) - (n + 1) * (std::log(a) + 0.5 * std::log(2.0))) <= 1e-10);
    CHECK(t.log_L(n) / n > t.log_R(n) / n + 0.5 * std::log(2.0));
  }
}

TEST_CASE("assumption A1") {
  CHECK_FALSE(check_assumption_a1(SpectralMeasure1D::symmetric_atoms({{1.0, 1.0}})).satisfied);
  auto u = check_assumption_a1(SpectralMeasure1D::uniform(1.0));
  CHECK(u.satisfied);
  CHECK(u.delta0 >= 0.5 - 1e-9);
  auto g = check_assumption_a1(SpectralMeasure1D::std_normal());
  REQUIRE(g.satisfied);
  // level set {phi >= delta0} is [-x, x] with phi(x) = delta0
  double x = std::sqrt(-2.0 * std::log(g.delta0 * std::sqrt(2 * M_PI)));
  CHECK(2 * x >= g.delta0 * (1 - 1e-6));
  CHECK(g.S_mass >= g.delta0 / 2 - 1e-9);
  CHECK(g.M0 >= M_PI);
  CHECK(std::abs(g.b - M_PI / g.M0) <= 1e-12);
}

TEST_CASE("assumption A2 and degenerate supports") {
  CHECK(check_assumption_a2(SpectralMeasure2D::unit_circle_uniform()).satisfied);
  CHECK(check_assumption_a2(SpectralMeasure2D::product(SpectralMeasure1D::std_normal(), SpectralMeasure1D::std_normal()))
            .satisfied);
  CHECK(SpectralMeasure2D::symmetric_atoms({{1.0, 0.0, 1.0}}).degenerate_line());
  CHECK_FALSE(SpectralMeasure2D::symmetric_atoms({{1.0, 0.0, 0.5}, {0.0, 1.0, 0.5}}).degenerate_line());
  // marginal of the circle: 1 / (pi sqrt(1 - x^2))
  auto c = SpectralMeasure2D::unit_circle_uniform();
  for (double x : {0.0, 0.3, 0.7})
    CHECK(rel(marginal_density(c, 0.0, x), 1.0 / (M_PI * std::sqrt(1 - x * x))) <= 1e-6);
}

TEST_CASE("radial pushforward") {
  auto r = radial_pushforward(SpectralMeasure2D::symmetric_atoms({{3.0, 4.0, 1.0}}));
  CHECK(std::abs(std::exp(r.log_moment(2)) - 25.0) <= 1e-9);
  auto ray = radial_pushforward(SpectralMeasure2D::std_normal_2d());
  for (double t : {0.5, 1.0, 2.0}) CHECK(rel(ray.density(t), t * std::exp(-t * t / 2)) <= 1e-8);
  auto tab = moments_2d(SpectralMeasure2D::std_normal_2d(), 4);
  for (int n = 1; n <= 4; ++n) {
    double m = simpson([&](double t) { return std::pow(t, 2 * n) * t * std::exp(-t * t / 2); }, 0.0, 30.0);
    CHECK(rel(std::exp(2 * tab.log_L_tilde(n)), m) <= 1e-6);
  }
}

TEST_CASE("measure sampling and mass") {
  Rng rng(3, 1);
  auto mu = SpectralMeasure1D::uniform(2.0);
  double s2 = 0;
  int N = 20000;
  for (int i = 0; i < N; ++i) {
    double x = mu.sample(rng);
    CHECK(std::abs(x) <= 2.0);
    s2 += x * x;
  }
  CHECK(std::abs(s2 / N - 4.0 / 3.0) < 0.05);
  CHECK(std::abs(2 * simpson([&](double x) { return mu.density(x); }, 0.0, 2.0) - 1.0) <= 1e-10);
}
