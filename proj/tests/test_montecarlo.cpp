#include <doctest.h>

#include <cmath>
#include <vector>

#include "gz/bounds.hpp"
#include "gz/error.hpp"
#include "gz/geometry.hpp"
#include "gz/kernel.hpp"
#include "gz/montecarlo.hpp"
#include "gz/sampler.hpp"

using namespace gz;

namespace {

// |p1 - p2| within z joint standard errors
bool agree(const TailEstimate& a, const TailEstimate& b, double z = 3.29) {
  double v = a.p_hat * (1 - a.p_hat) / a.n_samples + b.p_hat * (1 - b.p_hat) / b.n_samples;
  return std::abs(a.p_hat - b.p_hat) <= z * std::sqrt(v) + 1e-12;
}

}  // namespace

TEST_CASE("wilson interval") {
  auto w = wilson_interval(0, 100);
  double z2 = kZ95 * kZ95;
  CHECK(w.lo == 0.0);
  CHECK(std::abs(w.hi - z2 / (100 + z2)) <= 1e-12);
  auto f = wilson_interval(100, 100);
  CHECK(f.hi == 1.0);
  CHECK(std::abs(f.lo - 100 / (100 + z2)) <= 1e-12);
  // textbook form at p = 0.3
  double n = 1000, p = 0.3;
  double c = (p + z2 / (2 * n)) / (1 + z2 / n);
  double h = kZ95 / (1 + z2 / n) * std::sqrt(p * (1 - p) / n + z2 / (4 * n * n));
  auto m = wilson_interval(300, 1000);
  CHECK(std::abs(m.lo - (c - h)) <= 1e-12);
  CHECK(std::abs(m.hi - (c + h)) <= 1e-12);
  auto e = make_estimate("x", 37, 1000, 1, "direct");
  CHECK(e.ci_lo <= e.p_hat);
  CHECK(e.p_hat <= e.ci_hi);
  CHECK(e.p_hat == 0.037);
  CHECK(std::abs(bonferroni_z(1) - kZ95) <= 1e-9);
}

TEST_CASE("zero tail trivial and preconditions") {
  auto mu = SpectralMeasure1D::uniform(1.0);
  auto e = estimate_zero_tail(mu, 0, 1.0, 1000, 3);
  CHECK(e.p_hat == 1.0);
  CHECK_THROWS_AS(estimate_zero_tail(mu, 1, 1.0, 999, 3), Error);
  McOptions o;
  CHECK_THROWS_AS(estimate_zero_tail(SpectralMeasure1D::symmetric_atoms({{1.0, 1.0}}), 1, 1.0, 1000, 3, o), Error);
}

TEST_CASE("cosine process phase oracle") {
  auto mu = SpectralMeasure1D::symmetric_atoms({{1.0, 1.0}});
  McOptions o;
  o.check_a1 = false;
  // a generic window of one period holds exactly two zeros
  auto three = estimate_zero_tail(mu, 3, 2 * M_PI, 20000, 5, o);
  CHECK(three.n_hits == 0);
  auto two = estimate_zero_tail(mu, 2, 2 * M_PI, 20000, 5, o);
  CHECK(two.n_hits == 20000);
  // on [0, T] with pi < T < 2 pi two zeros occur for a phase set of measure (T - pi) / pi
  double T = M_PI + 1.0;
  auto e = estimate_zero_tail(mu, 2, T, 20000, 6, o);
  double p = (T - M_PI) / M_PI;
  CHECK(e.ci_lo <= p);
  CHECK(p <= e.ci_hi);
}

TEST_CASE("direct and grid exact estimators agree") {
  auto mu = SpectralMeasure1D::uniform(1.0);
  McOptions d;
  d.method = TailMethod::Direct;
  auto a = estimate_zero_tail(mu, 1, 10.0, 10000, 7, d);
  auto b = estimate_zero_tail(mu, 1, 10.0, 10000, 8);
  CHECK(a.method == "direct");
  CHECK(b.method == "grid_exact");
  CHECK(a.p_hat > 0.5);
  CHECK(agree(a, b));
  auto a3 = estimate_zero_tail(mu, 3, 10.0, 10000, 7, d);
  auto b3 = estimate_zero_tail(mu, 3, 10.0, 10000, 8);
  CHECK(agree(a3, b3));
}

TEST_CASE("small ball direction and bound") {
  auto mu = SpectralMeasure1D::std_normal();
  auto s = estimate_smallball(mu, 1.0, {0.0, 0.1, 0.5, 10.0}, 20000, 11);
  REQUIRE(s.size() == 4);
  CHECK(s[0].n_hits == 0);
  CHECK(s[3].p_hat == 1.0);
  CHECK(s[1].p_hat <= s[2].p_hat);
  CalibrationSweep sw;
  sw.m_max = 8;
  sw.t_steps = 4;
  sw.smallball_m = {1, 2, 3, 4, 5, 6, 7, 8};
  sw.fit_lower = false;
  auto cal = calibrate_constants(mu, sw);
  for (int m = 1; m <= 8; ++m) {
    auto r = smallball_bound(m, 1.0, 0.1, cal.constants.C, cal.constants.b);
    if (!r.valid()) continue;
    CHECK(s[1].ci_hi <= std::exp(*r.log_bound));
  }
}

TEST_CASE("kac rice mean") {
  auto u = SpectralMeasure1D::uniform(1.0);
  CHECK(std::abs(kac_rice_mean(u, M_PI) - std::sqrt(1.0 / 3.0)) <= 1e-9);
  auto a = estimate_expectation_and_moments(u, M_PI, 2, 40000, 13);
  CHECK(a.mean_ci.lo <= *a.oracle_mean);
  CHECK(*a.oracle_mean <= a.mean_ci.hi);
  auto g = SpectralMeasure1D::std_normal();
  auto b = estimate_expectation_and_moments(g, M_PI, 2, 40000, 14);
  CHECK(std::abs(*b.oracle_mean - 1.0) <= 1e-9);
  CHECK(b.mean_ci.lo <= 1.0);
  CHECK(1.0 <= b.mean_ci.hi);
  // first moment is the mean
  CHECK(b.moments[1] == b.mean);
  CHECK(b.moments[0] == 1.0);
  CHECK(b.moments[2] >= b.mean * b.mean);
  CHECK(b.moment_ci[2].lo <= b.moments[2]);
  CHECK(b.moments[2] <= b.moment_ci[2].hi);
}

TEST_CASE("mean linear in T") {
  auto r = linearity_in_T(SpectralMeasure1D::uniform(1.0), 2.0, 20000, 15);
  CHECK(r.holds);
  CHECK(r.ratio_ci.lo < r.ratio_ci.hi);
}

TEST_CASE("bivariate orthant closed form") {
  auto u = SpectralMeasure1D::uniform(1.0);
  for (double T : {0.5, 1.0, 2.5}) {
    auto e = alternating_sign_probability(u, 1, T, OrthantMethod::OrthantGrid, 0, 17);
    double p = 0.25 - std::asin(kernel_eval(u, T)) / (2 * M_PI);
    CHECK(std::abs(e.p_hat - p) <= 1e-4);
  }
  // nearly independent
  auto g = alternating_sign_probability(SpectralMeasure1D::std_normal(), 1, 12.0, OrthantMethod::OrthantGrid, 0, 18);
  CHECK(std::abs(g.p_hat - 0.25) <= 1e-4);
}

TEST_CASE("orthant methods agree and containment") {
  auto u = SpectralMeasure1D::uniform(1.0);
  auto q = alternating_sign_probability(u, 3, 1.0, OrthantMethod::OrthantGrid, 0, 19);
  auto m = alternating_sign_probability(u, 3, 1.0, OrthantMethod::Mc, 200000, 20);
  CHECK(m.ci_lo <= q.ci_hi);
  CHECK(q.ci_lo <= m.ci_hi);
  // alternating signs at the grid force n zeros
  auto hist = zero_count_histogram(u, 2.0, 100000, 21);
  for (int n = 1; n <= 4; ++n) {
    auto a = alternating_sign_probability(u, n, 2.0, OrthantMethod::OrthantGrid, 0, 22);
    auto z = tail_from_histogram(hist, n, 2.0, 21, "grid_exact");
    CHECK(a.ci_lo <= z.ci_hi);
  }
}

TEST_CASE("nodal tail and nodal mean") {
  auto c = SpectralMeasure2D::unit_circle_uniform();
  McOptions o;
  o.n_waves = 256;
  o.resolution = 48;
  auto e = estimate_nodal_tail(c, 100, 1.0, 50, 23, o);
  CHECK(e.n_hits == 0);
  CHECK(e.ci_hi > 0.0);
  // two resolutions on the same fields
  auto lo = sample_nodal_lengths(c, 3.0, 60, 24, o);
  o.resolution = 128;
  auto hi = sample_nodal_lengths(c, 3.0, 60, 24, o);
  double sl = 0, sh = 0;
  for (std::size_t i = 0; i < lo.size(); ++i) {
    sl += lo[i];
    sh += hi[i];
  }
  CHECK(std::abs(sl - sh) <= 0.02 * sh);
  // oracle sqrt(C_20) / 2 per unit area
  CHECK(std::abs(nodal_density_oracle(c) - 0.5 / std::sqrt(2.0)) <= 1e-9);
  auto mm = estimate_expectation_and_moments(c, 3.0, 1, 200, 25, o);
  CHECK(mm.mean_ci.lo - 0.02 * mm.mean <= *mm.oracle_mean);
  CHECK(*mm.oracle_mean <= mm.mean_ci.hi + 0.02 * mm.mean);
}

TEST_CASE("line supported field reduces to one dimension") {
  auto mu = SpectralMeasure2D::symmetric_atoms({{1.3, 0.0, 0.6}, {2.1, 0.0, 0.4}});
  SpectralSampler2D s(mu, 64);
  GridSpec g;
  g.dimension = 2;
  g.extent = 3.0;
  g.points = 129;
  for (int i = 0; i < 10; ++i) {
    WaveSum2D w = s.draw(26, i);
    auto v = w.on_grid(g);
    double len = nodal_length_grid(v, g.points, g.spacing(), [&](double x, double y) { return w.eval(x, y); }).length;
    int n = count_zeros([&](double x) { return w.eval(x, 0.0); }, 0.0, 3.0).count;
    CHECK(std::abs(len - 3.0 * n) <= 1e-6);
  }
}

TEST_CASE("calibration") {
  auto u = SpectralMeasure1D::uniform(1.0);
  CalibrationSweep sw;
  sw.m_max = 8;
  sw.t_steps = 5;
  sw.lower_samples = 100000;
  auto cal = calibrate_constants(u, sw);
  const auto& k = cal.constants;
  CHECK(k.B == derived_B(k.A, k.C));
  CHECK(std::abs(k.B - 1.0 / (4 * M_E * 192 * std::sqrt(M_PI) * k.C)) <= 1e-15);
  CHECK(k.c > 0.0);
  CHECK(k.c < 1.0);
  CHECK(k.b <= cal.b_density);
  REQUIRE(cal.find("C") != nullptr);
  CHECK(cal.find("C")->worst_margin >= 0.0);
  REQUIRE(cal.find("c_lower") != nullptr);
  CHECK(cal.find("c_lower")->worst_margin >= -1e-9);
  for (int m = 2; m <= 8; ++m) {
    auto e = eigen_certificate(u, m, k.b * m);
    CHECK(e.log_lambda_min >= 2.0 * (m - 1) * std::log(k.c * k.b) - 1e-9);
  }
  CHECK_THROWS_AS(calibrate_constants(SpectralMeasure1D::symmetric_atoms({{1.0, 1.0}}), sw), Error);
}

TEST_CASE("ledger determinism") {
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
  auto u = SpectralMeasure1D::uniform(1.0);
  auto run = [&](std::uint64_t seed) {
    Ledger l;
    l.append(estimate_zero_tail(u, 2, 3.0, 5000, seed), 42);
    for (const auto& e : estimate_smallball(u, 1.0, {0.2, 0.5}, 5000, seed)) l.append(e, 43);
    l.append(alternating_sign_probability(u, 2, 1.0, OrthantMethod::Mc, 5000, seed), 44);
    return l;
  };
  Ledger a = run(9), b = run(9), c = run(10);
  CHECK(a.csv() == b.csv());
  CHECK(a.hash() == b.hash());
  CHECK(a.hash() != c.hash());
  CHECK(a.rows().size() == 4);
  CHECK(a.csv().find("runtime") == std::string::npos);
  CHECK(a.runtime_csv().find("runtime") != std::string::npos);
}
