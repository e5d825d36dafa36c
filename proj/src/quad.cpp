#include "gz/quad.hpp"

#include <algorithm>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <utility>
#include <vector>

#include "gz/error.hpp"

namespace gz {

QuadResult integrate(const Fn1& f, double a, double b, double rel_tol, double abs_tol) {
  if (a == b) return {};
  double err = 0.0, l1 = 0.0;
  double v = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 18, rel_tol,
                                                                           &err, &l1);
  if (!std::isfinite(v)) fail(ErrorKind::QuadratureFailure, "non-finite integral");
  double allowed = std::max(abs_tol, 1e3 * rel_tol * l1);
  if (err > allowed) fail(ErrorKind::QuadratureFailure, "quadrature did not reach tolerance");
  return {v, err};
}

QuadResult integrate_panels(const Fn1& f, double a, double b, double panel, double rel_tol,
                            double abs_tol) {
  if (!(panel > 0.0) || !std::isfinite(panel)) return integrate(f, a, b, rel_tol, abs_tol);
  int pieces = static_cast<int>(std::ceil((b - a) / panel));
  pieces = std::max(pieces, 1);
  QuadResult out;
  double h = (b - a) / pieces;
  auto bounds = [&](int i) { return std::pair{a + i * h, (i + 1 == pieces) ? b : a + (i + 1) * h}; };
  // tolerances are relative to the whole integral, otherwise panels where f is
  // negligible chase rounding noise
  std::vector<double> l1(pieces);
  double total = 0.0;
  for (int i = 0; i < pieces; ++i) {
    auto [lo, hi] = bounds(i);
    double err = 0.0;
    boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, lo, hi, 0, rel_tol, &err, &l1[i]);
    total += l1[i];
  }
  for (int i = 0; i < pieces; ++i) {
    auto [lo, hi] = bounds(i);
    double tol = rel_tol;
    if (l1[i] > 0.0 && total > 0.0) tol = std::clamp(rel_tol * total / l1[i], rel_tol, 1e-3);
    QuadResult r = integrate(f, lo, hi, tol, std::max(abs_tol, rel_tol * total));
    out.value += r.value;
    out.error += r.error;
  }
  return out;
}

QuadResult integrate_to_inf(const Fn1& f, double a, double rel_tol) {
  boost::math::quadrature::exp_sinh<double> es;
  double err = 0.0, l1 = 0.0;
  double v = es.integrate([&](double x) { return f(a + x); }, 0.0,
                          std::numeric_limits<double>::infinity(), rel_tol, &err, &l1);
  if (!std::isfinite(v)) fail(ErrorKind::QuadratureFailure, "non-finite integral");
  return {v, err};
}

}  // namespace gz
