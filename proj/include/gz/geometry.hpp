#pragma once

#include <functional>
#include <string>
#include <vector>

namespace gz {

using Fn1 = std::function<double(double)>;
using Fn2 = std::function<double(double, double)>;
// f(order, x): derivative of the given order
using Deriv1 = std::function<double(int, double)>;
// g(ox, oy, x, y): mixed partial derivative
using Deriv2 = std::function<double(int, int, double, double)>;

struct ZeroCount {
  int count = 0;
  std::vector<double> roots;
  std::vector<double> tangencies;  // flagged, not counted
  int resolution = 0;              // cells used for the final count
};

// Zeros of f on [a, b]. Sign changes are refined by bracketing; endpoint zeros
// count once. Resolution doubles until three consecutive counts agree.
ZeroCount count_zeros(const Fn1& f, double a, double b, int resolution = 256,
                      int max_refinements = 6);

// Zero count of a sampled path with node spacing h. Sign changes between
// nodes, plus pairs hidden inside a cell detected by cubic Hermite
// interpolation. Approximate: the path is only known at the nodes.
int count_grid_zeros(const double* v, int n, double h);

struct Segment {
  double x0, y0, x1, y1;
};

struct NodalLengthResult {
  double length = 0.0;
  double coarse_length = 0.0;     // same grid at half resolution
  double richardson_error = 0.0;  // |fine - coarse| / 3
  int resolution = 0;
  std::vector<Segment> segments;  // only when requested
};

// Marching squares on a (resolution+1)^2 grid over [0,T]^2. Saddle cells are
// resolved by the cell-center value. Segments lying on the outer boundary of
// the square are not counted.
NodalLengthResult nodal_length(const Fn2& g, double T, int resolution, bool keep_segments = false);
// values row-major, n x n nodes with spacing h, origin (0,0).
NodalLengthResult nodal_length_grid(const std::vector<double>& values, int n, double h,
                                    const Fn2& center = nullptr, bool keep_segments = false);

struct LineBound {
  double bound = 0.0;  // sqrt(2) * (int N1 + int N2)
  double int_n1 = 0.0;
  double int_n2 = 0.0;
};

// Slice counts taken on the grid lines of the same lattice used by nodal_length.
LineBound line_intersection_bound(const Fn2& g, double T, int resolution);
LineBound line_intersection_bound_grid(const std::vector<double>& values, int n, double h);

struct SupNorm {
  double grid_sup = 0.0;
  double lipschitz = 0.0;
  double spacing = 0.0;
  double padded = 0.0;  // grid_sup + lipschitz * spacing / 2
};

// Sup of |f| on [a, b] with Lipschitz padding taken from |df|.
SupNorm padded_sup(const Fn1& f, const Fn1& df, double a, double b, int resolution);
// Lower estimate of sup |f| on [a, b]: grid maximum polished by golden section.
double grid_sup(const Fn1& f, double a, double b, int resolution);

struct CascadeLevel {
  int k = 0;
  double measured = 0.0;  // sup |f^(n-k)| on [T, 2T]
  double bound = 0.0;     // M (2T)^k / k!
  bool holds = false;
};

struct CascadeReport {
  bool holds = false;
  int roots_found = 0;  // INT_MAX when f vanishes on the whole interval
  SupNorm derivative_sup;
  std::vector<CascadeLevel> levels;
};

CascadeReport cascade_check(const Deriv1& f, int n, double T, double M, int sup_resolution = 2048);

struct FewZerosReport {
  bool holds = false;
  int zeros = 0;
  double threshold = 0.0;  // M (2T)^n / n!
  double sup_on_T_2T = 0.0;
  SupNorm derivative_sup;
};

FewZerosReport no_more_than_n_zeros_check(const Deriv1& f, int n, double T, double M,
                                          int sup_resolution = 2048);

struct NodalBoxOptions {
  int sup_resolution = 96;      // per axis on [0, n]^2
  int line_resolution = 128;    // points per line on [T, 2T]
  int length_resolution = 128;  // marching squares cells on [0, T]^2
  long max_lines = 100000;
};

struct NodalBoxReport {
  bool holds = false;
  double delta = 0.0;
  long lines = 0;
  double implied_cap = 0.0;  // 4 n T
  double measured_length = 0.0;
  double richardson_error = 0.0;
};

NodalBoxReport nodal_box_certificate(const Deriv2& g, int n, double T, double M,
                                     const NodalBoxOptions& opt = {});

}  // namespace gz
