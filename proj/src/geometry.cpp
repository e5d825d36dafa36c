#include "gz/geometry.hpp"

#include <algorithm>
#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "gz/error.hpp"

namespace gz {

namespace {

int sign_of(double v, double tol) { return v > tol ? 1 : (v < -tol ? -1 : 0); }

ZeroCount count_once(const Fn1& f, double a, double b, int cells) {
  ZeroCount out;
  out.resolution = cells;
  const double h = (b - a) / cells;
  std::vector<double> v(cells + 1);
  double scale = 0.0;
  for (int i = 0; i <= cells; ++i) {
    v[i] = f(i == cells ? b : a + i * h);
    if (!std::isfinite(v[i])) throw std::invalid_argument("function value is not finite");
    scale = std::max(scale, std::abs(v[i]));
  }
  if (scale == 0.0) fail(ErrorKind::NoConvergence, "function vanishes on the whole grid");
  const double tol = 1e-12 * scale;
  std::vector<int> s(cells + 1);
  for (int i = 0; i <= cells; ++i) s[i] = sign_of(v[i], tol);
  auto x_at = [&](int i) { return i == cells ? b : a + i * h; };

  int i = 0;
  while (i <= cells) {
    if (s[i] == 0) {
      int j = i;
      while (j + 1 <= cells && s[j + 1] == 0) ++j;
      double loc = 0.5 * (x_at(i) + x_at(j));
      bool at_end = (i == 0 || j == cells);
      if (at_end || s[i - 1] != s[j + 1]) {
        out.roots.push_back(loc);
      } else {
        out.tangencies.push_back(loc);
      }
      i = j + 1;
      continue;
    }
    if (i < cells && s[i + 1] != 0 && s[i + 1] != s[i]) {
      std::uintmax_t iters = 200;
      auto r = boost::math::tools::toms748_solve(f, x_at(i), x_at(i + 1), v[i], v[i + 1],
                                                 boost::math::tools::eps_tolerance<double>(45), iters);
      out.roots.push_back(0.5 * (r.first + r.second));
    } else if (i > 0 && i < cells && s[i - 1] == s[i] && s[i + 1] == s[i] &&
               std::abs(v[i]) <= std::abs(v[i - 1]) && std::abs(v[i]) <= std::abs(v[i + 1]) &&
               std::abs(v[i]) < 1e-6 * scale) {
      out.tangencies.push_back(x_at(i));
    }
    ++i;
  }
  out.count = static_cast<int>(out.roots.size());
  return out;
}

}  // namespace

ZeroCount count_zeros(const Fn1& f, double a, double b, int resolution, int max_refinements) {
  if (!(b > a)) throw std::invalid_argument("count_zeros needs a < b");
  if (resolution < 2) throw std::invalid_argument("count_zeros needs resolution >= 2");
  ZeroCount prev2 = count_once(f, a, b, resolution);
  ZeroCount prev1 = count_once(f, a, b, 2 * resolution);
  int cells = 2 * resolution;
  for (int r = 0; r < max_refinements; ++r) {
    cells *= 2;
    ZeroCount cur = count_once(f, a, b, cells);
    if (cur.count == prev1.count && prev1.count == prev2.count) return cur;
    prev2 = std::move(prev1);
    prev1 = std::move(cur);
  }
  fail(ErrorKind::NoConvergence, "zero count did not stabilize under refinement");
}

int count_grid_zeros(const double* v, int n, double h) {
  int count = 0;
  auto deriv = [&](int i) {
    if (i == 0) return (v[1] - v[0]) / h;
    if (i == n - 1) return (v[n - 1] - v[n - 2]) / h;
    return (v[i + 1] - v[i - 1]) / (2.0 * h);
  };
  for (int i = 0; i + 1 < n; ++i) {
    bool p0 = v[i] > 0.0, p1 = v[i + 1] > 0.0;
    if (p0 != p1) {
      ++count;
      continue;
    }
    double d0 = deriv(i), d1 = deriv(i + 1);
    // cheap screen: a hidden pair needs the path to come close to zero
    if (std::min(std::abs(v[i]), std::abs(v[i + 1])) > h * std::max(std::abs(d0), std::abs(d1))) continue;
    if ((d0 > 0.0) == p0 && (d1 > 0.0) != p0) continue;  // moving away from zero at the left end
    for (int k = 1; k < 16; ++k) {
      double s = k / 16.0;
      double s2 = s * s, s3 = s2 * s;
      double p = (2 * s3 - 3 * s2 + 1) * v[i] + (s3 - 2 * s2 + s) * h * d0 +
                 (-2 * s3 + 3 * s2) * v[i + 1] + (s3 - s2) * h * d1;
      if ((p > 0.0) != p0) {
        count += 2;
        break;
      }
    }
  }
  return count;
}

// ---------------------------------------------------------------------------

namespace {

NodalLengthResult march(const std::vector<double>& V, int n, double h, const Fn2& center,
                        bool keep) {
  NodalLengthResult out;
  out.resolution = n - 1;
  double scale = 0.0;
  for (double x : V) scale = std::max(scale, std::abs(x));
  const double T = h * (n - 1);
  const double btol = 1e-12 * T;
  const double ztol = 1e-14 * std::max(scale, 1.0);
  auto on_same_boundary = [&](double xa, double ya, double xb, double yb) {
    return (std::abs(xa) <= btol && std::abs(xb) <= btol) ||
           (std::abs(xa - T) <= btol && std::abs(xb - T) <= btol) ||
           (std::abs(ya) <= btol && std::abs(yb) <= btol) ||
           (std::abs(ya - T) <= btol && std::abs(yb - T) <= btol);
  };
  for (int j = 0; j + 1 < n; ++j) {
    for (int i = 0; i + 1 < n; ++i) {
      double v00 = V[j * n + i], v10 = V[j * n + i + 1];
      double v01 = V[(j + 1) * n + i], v11 = V[(j + 1) * n + i + 1];
      if (std::abs(v00) <= ztol && std::abs(v10) <= ztol && std::abs(v01) <= ztol &&
          std::abs(v11) <= ztol)
        fail(ErrorKind::DegenerateCell, "grid cell with all corners at zero");
      bool p00 = v00 > 0.0, p10 = v10 > 0.0, p01 = v01 > 0.0, p11 = v11 > 0.0;
      double x = i * h, y = j * h;
      // crossing points on bottom, right, top, left edges
      double px[4], py[4];
      bool has[4] = {p00 != p10, p10 != p11, p01 != p11, p00 != p01};
      if (has[0]) { px[0] = x + h * v00 / (v00 - v10); py[0] = y; }
      if (has[1]) { px[1] = x + h; py[1] = y + h * v10 / (v10 - v11); }
      if (has[2]) { px[2] = x + h * v01 / (v01 - v11); py[2] = y + h; }
      if (has[3]) { px[3] = x; py[3] = y + h * v00 / (v00 - v01); }
      int cnt = has[0] + has[1] + has[2] + has[3];
      auto add = [&](int a, int b) {
        if (on_same_boundary(px[a], py[a], px[b], py[b])) return;
        out.length += std::hypot(px[a] - px[b], py[a] - py[b]);
        if (keep) out.segments.push_back({px[a], py[a], px[b], py[b]});
      };
      if (cnt == 2) {
        int e[2], k = 0;
        for (int q = 0; q < 4; ++q)
          if (has[q]) e[k++] = q;
        add(e[0], e[1]);
      } else if (cnt == 4) {
        double c = center ? center(x + 0.5 * h, y + 0.5 * h) : 0.25 * (v00 + v10 + v01 + v11);
        if ((c > 0.0) == p00) {
          add(0, 1);
          add(2, 3);
        } else {
          add(0, 3);
          add(1, 2);
        }
      }
    }
  }
  return out;
}

}  // namespace

NodalLengthResult nodal_length_grid(const std::vector<double>& values, int n, double h,
                                    const Fn2& center, bool keep_segments) {
  if (n < 2 || static_cast<long>(values.size()) != static_cast<long>(n) * n)
    throw std::invalid_argument("nodal_length_grid needs n x n values");
  NodalLengthResult out = march(values, n, h, center, keep_segments);
  if ((n - 1) % 2 == 0 && n >= 5) {
    int m = (n - 1) / 2 + 1;
    std::vector<double> coarse(static_cast<std::size_t>(m) * m);
    for (int j = 0; j < m; ++j)
      for (int i = 0; i < m; ++i) coarse[j * m + i] = values[(2 * j) * n + 2 * i];
    out.coarse_length = march(coarse, m, 2.0 * h, center, false).length;
    out.richardson_error = std::abs(out.length - out.coarse_length) / 3.0;
  }
  return out;
}

NodalLengthResult nodal_length(const Fn2& g, double T, int resolution, bool keep_segments) {
  if (!(T > 0.0) || resolution < 2) throw std::invalid_argument("nodal_length needs T > 0 and resolution >= 2");
  const int n = resolution + 1;
  const double h = T / resolution;
  std::vector<double> V(static_cast<std::size_t>(n) * n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) V[j * n + i] = g(i * h, j * h);
  return nodal_length_grid(V, n, h, g, keep_segments);
}

LineBound line_intersection_bound_grid(const std::vector<double>& values, int n, double h) {
  if (n < 2 || static_cast<long>(values.size()) != static_cast<long>(n) * n)
    throw std::invalid_argument("line_intersection_bound_grid needs n x n values");
  LineBound out;
  for (int i = 0; i < n; ++i) {
    double w = (i == 0 || i == n - 1) ? 0.5 * h : h;
    int c1 = 0, c2 = 0;
    for (int j = 0; j + 1 < n; ++j) {
      // vertical line x_i and horizontal line y_i
      if ((values[j * n + i] > 0.0) != (values[(j + 1) * n + i] > 0.0)) ++c1;
      if ((values[i * n + j] > 0.0) != (values[i * n + j + 1] > 0.0)) ++c2;
    }
    out.int_n1 += w * c1;
    out.int_n2 += w * c2;
  }
  out.bound = std::sqrt(2.0) * (out.int_n1 + out.int_n2);
  return out;
}

LineBound line_intersection_bound(const Fn2& g, double T, int resolution) {
  if (!(T > 0.0) || resolution < 2) throw std::invalid_argument("line bound needs T > 0 and resolution >= 2");
  const int n = resolution + 1;
  const double h = T / resolution;
  std::vector<double> V(static_cast<std::size_t>(n) * n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) V[j * n + i] = g(i * h, j * h);
  return line_intersection_bound_grid(V, n, h);
}

// ---------------------------------------------------------------------------

SupNorm padded_sup(const Fn1& f, const Fn1& df, double a, double b, int resolution) {
  SupNorm s;
  s.spacing = (b - a) / resolution;
  for (int i = 0; i <= resolution; ++i) {
    double x = a + i * s.spacing;
    s.grid_sup = std::max(s.grid_sup, std::abs(f(x)));
    s.lipschitz = std::max(s.lipschitz, std::abs(df(x)));
  }
  s.padded = s.grid_sup + 0.5 * s.lipschitz * s.spacing;
  return s;
}

double grid_sup(const Fn1& f, double a, double b, int resolution) {
  double h = (b - a) / resolution;
  double best = -1.0;
  int arg = 0;
  for (int i = 0; i <= resolution; ++i) {
    double v = std::abs(f(a + i * h));
    if (v > best) {
      best = v;
      arg = i;
    }
  }
  double lo = a + std::max(arg - 1, 0) * h, hi = a + std::min(arg + 1, resolution) * h;
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  for (int it = 0; it < 50; ++it) {
    double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
    if (std::abs(f(x1)) > std::abs(f(x2))) hi = x2;
    else lo = x1;
  }
  return std::max(best, std::abs(f(0.5 * (lo + hi))));
}

CascadeReport cascade_check(const Deriv1& f, int n, double T, double M, int sup_resolution) {
  if (n < 1 || !(T > 0.0) || !(M >= 0.0)) throw std::invalid_argument("cascade_check needs n >= 1, T > 0, M >= 0");
  CascadeReport rep;
  bool vanishes = true;
  for (int i = 0; i <= sup_resolution && vanishes; ++i) vanishes = f(0, T * i / sup_resolution) == 0.0;
  if (vanishes) {
    rep.roots_found = std::numeric_limits<int>::max();
  } else {
    rep.roots_found = count_zeros([&](double x) { return f(0, x); }, 0.0, T).count;
  }
  if (rep.roots_found < n) precondition_failed("n_roots_in_0_T", "fewer than n distinct roots in [0, T]");
  rep.derivative_sup = padded_sup([&](double x) { return f(n, x); }, [&](double x) { return f(n + 1, x); },
                                  0.0, 2.0 * T, sup_resolution);
  if (rep.derivative_sup.padded > M * (1.0 + 1e-12))
    precondition_failed("derivative_sup_le_M", "sup of the n-th derivative on [0, 2T] exceeds M");
  rep.holds = true;
  double logfact = 0.0;
  for (int k = 0; k <= n; ++k) {
    if (k > 0) logfact += std::log(static_cast<double>(k));
    CascadeLevel lv;
    lv.k = k;
    lv.bound = M * std::exp(k * std::log(2.0 * T) - logfact);
    lv.measured = grid_sup([&](double x) { return f(n - k, x); }, T, 2.0 * T, sup_resolution);
    lv.holds = lv.measured <= lv.bound * (1.0 + 1e-9);
    rep.holds = rep.holds && lv.holds;
    rep.levels.push_back(lv);
  }
  return rep;
}

FewZerosReport no_more_than_n_zeros_check(const Deriv1& f, int n, double T, double M,
                                          int sup_resolution) {
  if (n < 1 || !(T > 0.0) || !(M > 0.0)) throw std::invalid_argument("check needs n >= 1, T > 0, M > 0");
  FewZerosReport rep;
  if (!(2.0 * T < n)) precondition_failed("two_T_lt_n", "needs 2T < n");
  rep.derivative_sup = padded_sup([&](double x) { return f(n, x); }, [&](double x) { return f(n + 1, x); },
                                  0.0, static_cast<double>(n), sup_resolution);
  if (rep.derivative_sup.padded > M * (1.0 + 1e-12))
    precondition_failed("derivative_sup_le_M", "sup of the n-th derivative on [0, n] exceeds M");
  rep.threshold = M * std::exp(n * std::log(2.0 * T) - std::lgamma(n + 1.0));
  rep.sup_on_T_2T = grid_sup([&](double x) { return f(0, x); }, T, 2.0 * T, sup_resolution);
  if (!(rep.sup_on_T_2T > rep.threshold))
    precondition_failed("sup_exceeds_threshold", "sup of f on [T, 2T] does not exceed M (2T)^n / n!");
  ZeroCount zc = count_zeros([&](double x) { return f(0, x); }, 0.0, T);
  rep.zeros = zc.count;
  rep.holds = zc.count <= n - 1;
  return rep;
}

NodalBoxReport nodal_box_certificate(const Deriv2& g, int n, double T, double M,
                                     const NodalBoxOptions& opt) {
  if (n < 1 || !(T > 0.0) || !(M > 0.0)) throw std::invalid_argument("certificate needs n >= 1, T > 0, M > 0");
  if (n > 40) precondition_failed("n_le_40", "nodal box certificates are capped at n = 40");
  if (!(2.0 * T <= n)) precondition_failed("two_T_le_n", "needs 2T <= n");
  NodalBoxReport rep;
  rep.delta = std::exp(n * std::log(2.0 * T) - std::lgamma(n + 1.0));
  double nl = std::floor(T / rep.delta);
  if (nl > static_cast<double>(opt.max_lines))
    fail(ErrorKind::LineCountOverflow, "too many lines to check: " + std::to_string(nl));
  rep.lines = static_cast<long>(nl) + 1;

  const int R = opt.sup_resolution;
  const double h = static_cast<double>(n) / R;
  auto sup2 = [&](int ox, int oy) {
    double s = 0.0, L = 0.0;
    for (int j = 0; j <= R; ++j)
      for (int i = 0; i <= R; ++i) {
        double x = i * h, y = j * h;
        s = std::max(s, std::abs(g(ox, oy, x, y)));
        L = std::max(L, std::hypot(g(ox + 1, oy, x, y), g(ox, oy + 1, x, y)));
      }
    return s + L * h * std::sqrt(2.0) / 2.0;
  };
  const double half = 0.5 * M * (1.0 + 1e-12);
  const double level = M * rep.delta;
  // sup over [T, 2T] above level; stops at the first sample that shows it
  auto above = [&](const Fn1& f) {
    for (int i = 0; i <= opt.line_resolution; ++i)
      if (std::abs(f(T + T * i / opt.line_resolution)) > level) return true;
    return grid_sup(f, T, 2.0 * T, opt.line_resolution) > level;
  };
  if (sup2(0, 1) > half) precondition_failed("con1_dy_sup", "sup |d_y g| exceeds M/2");
  if (sup2(n, 0) > half) precondition_failed("con1_dxn_sup", "sup |d_x^n g| exceeds M/2");
  for (long r = 0; r < rep.lines; ++r) {
    double y = r * rep.delta;
    if (!above([&](double x) { return g(0, 0, x, y); }))
      precondition_failed("con1_line_sup", "g(., r delta) is too small on [T, 2T]");
  }
  if (sup2(1, 0) > half) precondition_failed("con2_dx_sup", "sup |d_x g| exceeds M/2");
  if (sup2(0, n) > half) precondition_failed("con2_dyn_sup", "sup |d_y^n g| exceeds M/2");
  for (long r = 0; r < rep.lines; ++r) {
    double x = r * rep.delta;
    if (!above([&](double y) { return g(0, 0, x, y); }))
      precondition_failed("con2_line_sup", "g(r delta, .) is too small on [T, 2T]");
  }
  NodalLengthResult nl_res =
      nodal_length([&](double x, double y) { return g(0, 0, x, y); }, T, opt.length_resolution);
  rep.measured_length = nl_res.length;
  rep.richardson_error = nl_res.richardson_error;
  rep.implied_cap = 4.0 * n * T;
  rep.holds = rep.measured_length <= rep.implied_cap;
  return rep;
}

}  // namespace gz
