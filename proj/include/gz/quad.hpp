#pragma once

#include <functional>

namespace gz {

struct QuadResult {
  double value = 0.0;
  double error = 0.0;
};

using Fn1 = std::function<double(double)>;

// Adaptive Gauss-Kronrod on [a, b]. Throws QuadratureFailure when the error
// estimate exceeds max(abs_tol, rel_tol * L1 norm).
QuadResult integrate(const Fn1& f, double a, double b, double rel_tol = 1e-12,
                     double abs_tol = 1e-14);

// Splits [a, b] into panels no longer than `panel` and integrates each.
QuadResult integrate_panels(const Fn1& f, double a, double b, double panel,
                            double rel_tol = 1e-12, double abs_tol = 1e-14);

// Integral over [a, inf) for integrands with at least exponential decay.
QuadResult integrate_to_inf(const Fn1& f, double a, double rel_tol = 1e-12);

}  // namespace gz
