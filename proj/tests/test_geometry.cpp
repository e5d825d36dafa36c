#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "gz/error.hpp"
#include "gz/geometry.hpp"
#include "gz/sampler.hpp"

using namespace gz;

namespace {

// c * prod (x - r_i) with derivatives by Horner on the expanded coefficients
struct Poly {
  std::vector<double> a;
  static Poly from_roots(double c, const std::vector<double>& roots) {
    Poly p{{c}};
    for (double r : roots) {
      std::vector<double> q(p.a.size() + 1, 0.0);
      for (std::size_t k = 0; k < p.a.size(); ++k) {
        q[k + 1] += p.a[k];
        q[k] -= r * p.a[k];
      }
      p.a = q;
    }
    return p;
  }
  double operator()(int order, double x) const {
    double s = 0;
    for (int k = int(a.size()) - 1; k >= order; --k) {
      double f = 1;
      for (int i = 0; i < order; ++i) f *= k - i;
      s = s * x + a[k] * f;
    }
    return s;
  }
};

double factorial(int n) { return std::tgamma(n + 1.0); }

}  // namespace

TEST_CASE("count_zeros examples") {
  auto s = count_zeros([](double x) { return std::sin(2 * M_PI * x); }, 0.0, 1.0);
  CHECK(s.count == 3);
  CHECK(count_zeros([](double x) { return x * x + 1; }, 0.0, 1.0).count == 0);
  auto r = count_zeros([](double x) { return (x - 0.3) * (x - 0.7); }, 0.0, 1.0);
  REQUIRE(r.count == 2);
  CHECK(std::abs(r.roots[0] - 0.3) <= 1e-12);
  CHECK(std::abs(r.roots[1] - 0.7) <= 1e-12);
  // tangency flagged, not counted
  auto t = count_zeros([](double x) { return (x - 0.4) * (x - 0.4); }, 0.0, 1.0);
  CHECK(t.count == 0);
  CHECK(t.tangencies.size() == 1);
  std::mt19937_64 gen(2);
  std::uniform_real_distribution<double> U(0, 2 * M_PI);
  for (int i = 0; i < 200; ++i) {
    double ph = U(gen);
    CHECK(count_zeros([&](double x) { return std::cos(x + ph); }, 0.0, 2 * M_PI).count == 2);
  }
}

TEST_CASE("count_zeros refinement stable") {
  auto f = [](double x) { return std::sin(7 * x) + 0.3 * std::cos(19 * x); };
  int a = count_zeros(f, 0.0, 3.0, 256).count, b = count_zeros(f, 0.0, 3.0, 512).count;
  CHECK(a == b);
}

TEST_CASE("grid zero counts") {
  const int n = 401;
  double h = 4.0 / (n - 1);
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i) v[i] = std::sin(3.3 * i * h + 0.2);
  auto exact = count_zeros([](double x) { return std::sin(3.3 * x + 0.2); }, 0.0, 4.0).count;
  CHECK(count_grid_zeros(v.data(), n, h) == exact);
  // pair hidden inside one coarse cell
  auto q = [](double x) { return (x - 0.45) * (x - 0.55) * 40.0; };
  std::vector<double> c(11);
  for (int i = 0; i < 11; ++i) c[i] = q(0.1 * i);
  CHECK(count_grid_zeros(c.data(), 11, 0.1) == 2);
}

TEST_CASE("nodal length examples") {
  auto l = nodal_length([](double x, double) { return x - 0.5; }, 1.0, 101);
  CHECK(std::abs(l.length - 1.0) <= 1e-10);
  auto q = nodal_length([](double x, double y) { return x * x + y * y - 0.25; }, 1.0, 256);
  CHECK(std::abs(q.length - M_PI / 4) <= 1e-3);
  auto s = nodal_length([](double x, double y) { return std::sin(M_PI * x) * std::sin(M_PI * y); }, 2.0, 255);
  CHECK(std::abs(s.length - 4.0) <= 1e-2);
  CHECK(nodal_length([](double, double) { return 1.0; }, 1.0, 16).length == 0.0);
  CHECK_THROWS_AS(nodal_length([](double, double) { return 0.0; }, 1.0, 8), Error);
}

TEST_CASE("quarter circle converges") {
  auto g = [](double x, double y) { return x * x + y * y - 0.25; };
  double prev = 0;
  for (int res : {32, 64, 128, 256}) {
    double e = std::abs(nodal_length(g, 1.0, res).length - M_PI / 4);
    if (prev > 0) CHECK(prev / e >= 2.0 * 0.8);
    prev = e;
  }
}

TEST_CASE("line intersection bound") {
  auto lb = line_intersection_bound([](double x, double) { return x - 0.5; }, 1.0, 101);
  CHECK(std::abs(lb.bound - std::sqrt(2.0)) <= 1e-9);
  CHECK(line_intersection_bound([](double, double) { return 2.0; }, 1.0, 32).bound == 0.0);
  auto g = [](double x, double y) { return x * x + y * y - 0.25; };
  CHECK(line_intersection_bound(g, 1.0, 128).bound >= nodal_length(g, 1.0, 128).length);
  // each horizontal line y < 0.5 crosses once: int N = 0.5 per direction
  auto b = line_intersection_bound(g, 1.0, 1000);
  CHECK(std::abs(b.int_n1 - 0.5) <= 2e-3);
  CHECK(std::abs(b.int_n2 - 0.5) <= 2e-3);
}

TEST_CASE("padded sup is conservative") {
  auto f = [](double x) { return std::sin(5 * x); };
  auto df = [](double x) { return 5 * std::cos(5 * x); };
  auto s = padded_sup(f, df, 0.0, 1.0, 16);
  CHECK(s.padded >= 1.0);
  CHECK(grid_sup(f, 0.0, 1.0, 16) <= 1.0 + 1e-12);
  CHECK(grid_sup(f, 0.0, 1.0, 16) >= 1.0 - 1e-9);
}

TEST_CASE("cascade examples") {
  Poly p = Poly::from_roots(1.0, {0.0, 0.1, 0.2});
  auto r = cascade_check([&](int o, double x) { return p(o, x); }, 3, 0.2, 6.0);
  CHECK(r.holds);
  REQUIRE(r.levels.size() == 4);
  CHECK(std::abs(r.levels[3].bound - 0.064) <= 1e-12);
  CHECK(std::abs(r.levels[3].measured - 0.024) <= 1e-9);
  auto z = cascade_check([](int, double) { return 0.0; }, 3, 1.0, 0.0);
  CHECK(z.holds);
  for (const auto& l : z.levels) CHECK(l.bound == 0.0);
  // too few roots
  CHECK_THROWS_AS(cascade_check([&](int o, double x) { return p(o, x); }, 3, 0.15, 6.0), Error);
  // derivative sup above M
  CHECK_THROWS_AS(cascade_check([&](int o, double x) { return p(o, x); }, 3, 0.2, 5.0), Error);
}

TEST_CASE("cascade corpus") {
  std::mt19937_64 gen(21);
  std::uniform_real_distribution<double> U(0, 1);
  int checked = 0;
  for (int i = 0; i < 1000; ++i) {
    int n = 1 + i % 6;
    double T = 0.1 + 2.0 * U(gen);
    std::vector<double> roots(n);
    for (int k = 0; k < n; ++k) roots[k] = T * (k + 0.05 + 0.9 * U(gen)) / n;
    double c = (U(gen) < 0.5 ? -1 : 1) * (0.1 + 5 * U(gen));
    Poly p = Poly::from_roots(c, roots);
    double M = std::abs(c) * factorial(n) * (1 + 1e-12);
    auto r = cascade_check([&](int o, double x) { return p(o, x); }, n, T, M);
    CHECK(r.holds);
    ++checked;
  }
  CHECK(checked == 1000);
}

TEST_CASE("few zeros examples") {
  auto r = no_more_than_n_zeros_check([](int o, double x) { return o == 0 ? 1 + x : (o == 1 ? 1.0 : 0.0); }, 2, 0.4, 5.0);
  CHECK(r.holds);
  CHECK(r.zeros == 0);
  auto c = no_more_than_n_zeros_check([](int o, double) { return o == 0 ? 3.0 : 0.0; }, 3, 1.0, 1.0);
  CHECK(c.holds);
  // n roots in [0, T]: the sup hypothesis must fail
  Poly p = Poly::from_roots(1.0, {0.1, 0.2, 0.3});
  CHECK_THROWS_AS(no_more_than_n_zeros_check([&](int o, double x) { return p(o, x); }, 3, 0.35, 6.0 * (1 + 1e-12)),
                  Error);
}

TEST_CASE("few zeros corpus") {
  std::mt19937_64 gen(23);
  std::uniform_real_distribution<double> U(0, 1);
  int valid = 0;
  for (int i = 0; i < 3000 && valid < 500; ++i) {
    int n = 2 + i % 5;
    double T = (0.05 + 0.4 * U(gen)) * n;
    int k = int(U(gen) * (n + 1));
    std::vector<double> roots;
    for (int j = 0; j < k; ++j) roots.push_back(-0.5 * T + 3.0 * T * U(gen));
    for (int j = k; j < n; ++j) roots.push_back(-2.0 * T - 3.0 * T * U(gen));
    Poly p = Poly::from_roots(1.0, roots);
    try {
      auto r = no_more_than_n_zeros_check([&](int o, double x) { return p(o, x); }, n, T,
                                          factorial(n) * (1 + 1e-12));
      CHECK(r.holds);
      ++valid;
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::PreconditionFailed);
    }
  }
  CHECK(valid >= 100);
}

TEST_CASE("nodal box examples") {
  auto one = nodal_box_certificate([](int ox, int oy, double, double) { return ox + oy == 0 ? 1.0 : 0.0; }, 4, 1.0, 1.0);
  CHECK(one.holds);
  CHECK(one.measured_length == 0.0);
  CHECK(one.implied_cap == 16.0);
  auto g = [](int ox, int oy, double x, double) {
    if (oy > 0) return 0.0;
    return ox == 0 ? std::cos(x) + 2.0 : std::cos(x + 0.5 * M_PI * ox);
  };
  auto r = nodal_box_certificate(g, 4, 1.0, 2.2);
  CHECK(r.holds);
  CHECK(r.measured_length == 0.0);
  // M too small for the derivative sups
  CHECK_THROWS_AS(nodal_box_certificate(g, 4, 1.0, 1.0), Error);
  // 2T > n
  CHECK_THROWS_AS(nodal_box_certificate(g, 2, 1.5, 2.2), Error);
}

TEST_CASE("nodal length below line bound on sampled fields") {
  auto mu = SpectralMeasure2D::unit_circle_uniform();
  SpectralSampler2D s(mu, 256);
  GridSpec g;
  g.dimension = 2;
  g.extent = 3.0;
  g.points = 97;
  for (int i = 0; i < 30; ++i) {
    WaveSum2D w = s.draw(31, i);
    auto v = w.on_grid(g);
    auto nl = nodal_length_grid(v, g.points, g.spacing(), [&](double x, double y) { return w.eval(x, y); });
    auto lb = line_intersection_bound_grid(v, g.points, g.spacing());
    CHECK(nl.length <= lb.bound + 3 * nl.richardson_error + 1e-9);
  }
}
