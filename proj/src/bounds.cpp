#include "gz/bounds.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "gz/error.hpp"

namespace gz {

namespace {

constexpr double kTol = 1e-12;

Precondition pre(const std::string& name, double margin, double tol = kTol) {
  return {name, margin >= -tol, margin};
}

void finish(BoundReport& r, double value) {
  for (const auto& p : r.preconditions)
    if (!p.satisfied) return;
  r.log_bound = value;
}

}  // namespace

double default_A(int dimension) { return (dimension == 2 ? 384.0 : 192.0) * std::sqrt(M_PI); }

double derived_B(double A, double C) { return 1.0 / (4.0 * M_E * A * C); }

BoundConstants BoundConstants::defaults(int dimension) { return BoundConstants{}.resolved(dimension); }

BoundConstants BoundConstants::resolved(int dimension) const {
  BoundConstants k = *this;
  if (k.A <= 0.0) k.A = default_A(dimension);
  if (k.B <= 0.0) k.B = derived_B(k.A, k.C);
  return k;
}

bool BoundConstants::in_standard_ranges() const { return b > 0 && b < 1 && B > 0 && B < 1 && C > 1; }

const Precondition* BoundReport::first_failed() const {
  for (const auto& p : preconditions)
    if (!p.satisfied) return &p;
  return nullptr;
}

const BoundReport& require(const BoundReport& r) {
  if (const Precondition* p = r.first_failed())
    precondition_failed(p->name, r.formula + ": precondition " + p->name + " fails (margin " +
                                     std::to_string(p->margin) + ")");
  return r;
}

long floor_eps_n(double eps, long n) {
  double x = eps * static_cast<double>(n);
  double f = std::floor(x);
  // eps n a hair below an integer only through rounding of eps
  if (f + 1.0 - x <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, x)) f += 1.0;
  return static_cast<long>(f);
}

namespace {

BoundReport upper_common(const char* formula, double eps, double eps_max, double exponent_coef,
                         double log_prefactor, long n, double T, double root,
                         const BoundConstants& k) {
  BoundReport r;
  r.formula = formula;
  r.eps = eps;
  r.n = n;
  r.T = T;
  r.constants = k;
  r.moment_root = root;
  r.m = floor_eps_n(eps, n);
  r.preconditions.push_back(pre(eps_max < 0.3 ? "eps_in_open_0_quarter" : "eps_in_open_0_half",
                                std::min(eps, eps_max - eps), 0.0));
  if (r.preconditions.back().margin <= 0.0) r.preconditions.back().satisfied = false;
  double inv = 1.0 / (eps * eps);
  r.preconditions.push_back(pre("n_ge_inv_eps_sq", static_cast<double>(n) - inv, kTol * inv));
  double hi = k.b * static_cast<double>(r.m);
  Precondition tp = pre("T_in_open_0_b_floor_eps_n", std::min(T, hi - T), 0.0);
  tp.satisfied = T > 0.0 && T < hi;
  r.preconditions.push_back(tp);
  r.log_argument = std::log(k.B) - std::log(root) +
                   (1.0 - exponent_coef * eps) * (std::log(static_cast<double>(n)) - std::log(T));
  r.preconditions.push_back(pre("argument_ge_e", r.log_argument - 1.0));
  double nn = static_cast<double>(n);
  finish(r, log_prefactor - 0.5 * eps * nn * nn * r.log_argument);
  return r;
}

}  // namespace

BoundReport theorem1_upper(double eps, long n, double T, double D_root, const BoundConstants& k) {
  return upper_common("theorem1_upper", eps, 0.5, 2.0, std::log(2.0), n, T, D_root, k);
}

BoundReport theorem1_upper(double eps, long n, double T, const MomentTable& D,
                           const BoundConstants& k) {
  return theorem1_upper(eps, n, T, D.D_root(static_cast<int>(n)), k);
}

BoundReport theorem2_upper(double eps, long n, double T, double L_root, const BoundConstants& k) {
  BoundReport r = upper_common("theorem2_upper", eps, 0.25, 4.0, std::log(6.0), n, T, L_root, k);
  r.threshold = 4.0 * static_cast<double>(n) * T;
  return r;
}

BoundReport theorem2_upper(double eps, long n, double T, const MomentTable& L,
                           const BoundConstants& k) {
  return theorem2_upper(eps, n, T, L.L_root(static_cast<int>(n)), k);
}

BoundReport theorem1_lower(long n, double T, double c, double b) {
  BoundReport r;
  r.formula = "theorem1_lower";
  r.n = n;
  r.T = T;
  r.constants.c_lower = c;
  r.constants.b = b;
  double nn = static_cast<double>(n);
  Precondition tp = pre("T_le_bn", b * nn - T);
  tp.satisfied = tp.satisfied && T > 0.0;
  r.preconditions.push_back(tp);
  r.log_argument = std::log(c) + std::log(nn) - std::log(T);
  r.preconditions.push_back(pre("cn_over_T_ge_1", r.log_argument));
  finish(r, -nn * nn * std::max(r.log_argument, 0.0));
  return r;
}

BoundReport smallball_bound(long m, double T, double eta, double C, double b) {
  BoundReport r;
  r.formula = "smallball";
  r.m = m;
  r.T = T;
  r.constants.C = C;
  r.constants.b = b;
  r.preconditions.push_back(pre("m_ge_1", static_cast<double>(m) - 1.0, 0.0));
  Precondition tp = pre("T_le_bm", b * static_cast<double>(m) - T);
  tp.satisfied = tp.satisfied && T > 0.0;
  r.preconditions.push_back(tp);
  Precondition ep{"eta_positive", eta > 0.0, eta};
  r.preconditions.push_back(ep);
  double mm = static_cast<double>(m);
  if (eta > 0.0) finish(r, mm * mm * std::log(C * mm / T) + mm * std::log(eta));
  return r;
}

LemsbpChain lemsbp_bound(double eps, long n, double T, double log_Dn, const BoundConstants& kin) {
  BoundConstants k = kin;
  if (k.A <= 0.0) k.A = default_A(1);
  LemsbpChain ch;
  BoundReport& r = ch.report;
  r.formula = "lemsbp";
  r.eps = eps;
  r.n = n;
  r.T = T;
  r.m = floor_eps_n(eps, n);
  ch.B = k.B > 0.0 ? k.B : derived_B(k.A, k.C);
  k.B = ch.B;
  r.constants = k;
  const double nn = static_cast<double>(n);
  const double mm = static_cast<double>(r.m);
  Precondition ep = pre("eps_in_open_0_half", std::min(eps, 0.5 - eps));
  ep.satisfied = eps > 0.0 && eps < 0.5;
  r.preconditions.push_back(ep);
  double inv = 1.0 / (eps * eps);
  r.preconditions.push_back(pre("n_ge_inv_eps_sq", nn - inv, kTol * inv));
  Precondition tp = pre("T_le_bm", k.b * mm - T);
  tp.satisfied = tp.satisfied && T > 0.0 && r.m >= 1;
  r.preconditions.push_back(tp);
  r.preconditions.push_back(pre("D_n_ge_1", log_Dn));
  r.preconditions.push_back(pre("A_gt_1", k.A - 1.0, 0.0));
  r.moment_root = std::exp(log_Dn / nn);
  ch.h = std::log(ch.B) - log_Dn / nn + (1.0 - 2.0 * eps) * (std::log(nn) - std::log(T));
  r.log_argument = ch.h;
  r.preconditions.push_back(pre("h_n_ge_1", ch.h - 1.0));

  ch.log_final = -0.5 * eps * nn * nn * ch.h;
  if (ch.h > 0.0) {
    ch.log_H = std::log(nn) + 0.5 * std::log(ch.h);
    ch.log_M = std::log(2.0 * k.A) + log_Dn + ch.log_H;
    ch.log_eta = ch.log_M + nn * std::log(2.0 * T) - std::lgamma(nn + 1.0);
    ch.log_W = mm * mm * std::log(k.C * mm / T) + mm * ch.log_eta;
    ch.log_lline = (mm * mm - nn * mm) * std::log(nn / T) +
                   mm * nn * (-std::log(ch.B) + log_Dn / nn) + mm * ch.log_H;
    ch.log_middle = -eps * nn * nn * ch.h + eps * nn * ch.log_H;
  }
  finish(r, ch.log_final);
  return ch;
}

double DudleyReport::tail(double x) const {
  if (x < 0.0) throw std::invalid_argument("tail needs x >= 0");
  return -x;
}

double DudleyReport::tail_at(double u) const {
  if (u <= expected_sup || sigma == 0.0) return 0.0;
  double d = (u - expected_sup) / sigma;
  return -0.5 * d * d;
}

DudleyReport dudley_sup_bound(const MomentTable& mt, int n, double T, double A) {
  if (n < 0 || !(T > 0.0)) throw std::invalid_argument("dudley_sup_bound needs n >= 0 and T > 0");
  DudleyReport d;
  d.n = n;
  d.T = T;
  d.A = A > 0.0 ? A : default_A(1);
  double l2n2 = mt.log_C(2 * n + 2);
  double l2n = mt.log_C(2 * n);
  if (!std::isfinite(l2n2) || !std::isfinite(l2n))
    fail(ErrorKind::DivergentMoment, "moment of order 2n+2 is not finite");
  double s2 = std::exp(0.5 * l2n2);
  d.sigma = std::exp(0.5 * l2n);
  d.beta = 4.0 * s2 * T;
  d.entropy_integral = std::sqrt(M_PI) * d.beta;
  d.expected_sup_one_sided = 12.0 * std::sqrt(M_PI) * d.beta;
  d.expected_abs_sup = d.sigma + 96.0 * std::sqrt(M_PI) * s2 * T;
  d.max_form = d.A * std::max(d.sigma, s2 * T);
  d.expected_sup = d.A * n * std::exp(mt.log_D(n));
  return d;
}

// ---------------------------------------------------------------------------

RegimeRow parse_regime_row(const std::string& s) {
  if (s == "compact") return RegimeRow::Compact;
  if (s == "subcritical") return RegimeRow::Subcritical;
  if (s == "supercritical") return RegimeRow::Supercritical;
  if (s == "logtype") return RegimeRow::LogType;
  fail(ErrorKind::UnknownRow, "unknown regime row: " + s, s);
}

const char* to_string(RegimeRow r) {
  switch (r) {
    case RegimeRow::Compact: return "compact";
    case RegimeRow::Subcritical: return "subcritical";
    case RegimeRow::Supercritical: return "supercritical";
    case RegimeRow::LogType: return "logtype";
  }
  return "?";
}

double union_bound(double pieces, double log_tail_piece) {
  if (!(pieces >= 1.0)) throw std::invalid_argument("union_bound needs at least one piece");
  return std::log(pieces) + log_tail_piece;
}

RegimeReport regime_table(RegimeRow row, int dimension, double n, double T, std::optional<int> m,
                          const RegimeParams& p) {
  if (dimension != 1 && dimension != 2) throw std::invalid_argument("dimension must be 1 or 2");
  if (!(n > 0.0) || !(T > 0.0)) throw std::invalid_argument("regime_table needs n > 0 and T > 0");
  RegimeReport r;
  r.row = row;
  r.dimension = dimension;
  r.n = n;
  r.T = T;
  r.m = m;
  const bool two = dimension == 2;
  const double mm = m ? static_cast<double>(*m) : 0.0;
  if (m && *m < 1) throw std::invalid_argument("moment order must be >= 1");
  auto check_T1 = [&] {
    r.constraint = "T = 1";
    r.constraint_ok = std::abs(T - 1.0) <= 1e-12;
  };

  switch (row) {
    case RegimeRow::Compact: {
      if (!two) {
        r.tail_form = "-c*n^2*log(n/T)";
        r.moment_form = "T v sqrt(m)";
        r.constraint = "T >= 1, n >= C*T";
        r.constraint_ok = T >= 1.0 && n >= p.C * T;
        r.log_tail = -p.c * n * n * std::log(n / T);
        if (m) r.log_moment_root = std::log(p.c_moment * std::max(T, std::sqrt(mm)));
      } else {
        r.tail_form = "-c*(l^2/T^2)*log(l/T^2)";
        r.moment_form = "T*(T v sqrt(m))";
        r.constraint = "T >= 1, l >= C*T^2";
        r.constraint_ok = T >= 1.0 && n >= p.C * T * T;
        r.log_tail = -p.c * (n * n / (T * T)) * std::log(n / (T * T));
        if (m) r.log_moment_root = std::log(p.c_moment * T * std::max(T, std::sqrt(mm)));
      }
      break;
    }
    case RegimeRow::Subcritical: {
      if (!(p.alpha > 0.0 && p.alpha < 1.0)) throw std::invalid_argument("subcritical row needs alpha in (0,1)");
      if (!(p.kappa > 0.0 && p.kappa < 1.0 - p.alpha))
        throw std::invalid_argument("subcritical row needs kappa in (0, 1-alpha)");
      double gap = 1.0 - p.alpha - p.kappa;
      double k1 = p.kappa1.value_or(p.kappa + gap / 3.0);
      double k2 = p.kappa2.value_or(p.kappa + 2.0 * gap / 3.0);
      if (!(p.kappa < k1 && k1 < k2 && k2 < 1.0 - p.alpha))
        throw std::invalid_argument("needs kappa < kappa' < kappa'' < 1 - alpha");
      r.eps = (1.0 - p.alpha - k2) / (2.0 * (1.0 - k2));
      r.c_kappa = r.eps * (1.0 - 2.0 * r.eps) * (k1 - p.kappa) / 2.0;
      if (!two) {
        r.tail_form = "-c*n^2*log(n)";
        r.moment_form = "T^(1/kappa) v sqrt(m)";
        r.constraint = "T >= 1, n >= T^(1/kappa)";
        r.constraint_ok = T >= 1.0 && n >= std::pow(T, 1.0 / p.kappa);
        r.log_tail = -r.c_kappa * n * n * std::log(n);
        if (m) r.log_moment_root = std::log(p.c_moment * std::max(std::pow(T, 1.0 / p.kappa), std::sqrt(mm)));
      } else {
        r.tail_form = "-c*(l^2/T^2)*log(l)";
        r.moment_form = "T*(T^(1/kappa) v sqrt(m))";
        r.constraint = "T >= 1, l >= T^((kappa+1)/kappa)";
        r.constraint_ok = T >= 1.0 && n >= std::pow(T, (p.kappa + 1.0) / p.kappa);
        r.log_tail = -r.c_kappa * (n * n / (T * T)) * std::log(n);
        if (m)
          r.log_moment_root =
              std::log(p.c_moment * T * std::max(std::pow(T, 1.0 / p.kappa), std::sqrt(mm)));
      }
      break;
    }
    case RegimeRow::Supercritical: {
      if (!(p.alpha >= 1.0)) throw std::invalid_argument("supercritical row needs alpha >= 1");
      if (!(p.kappa > 0.0)) throw std::invalid_argument("supercritical row needs kappa > 0");
      const double ak = p.alpha + p.kappa;
      r.tail_form = two ? "-c*l^(2/(alpha+kappa))" : "-c*n^(2/(alpha+kappa))";
      r.moment_form = "m^((alpha+kappa)/2)";
      check_T1();
      r.log_tail = -p.c * std::pow(n, 2.0 / ak);
      // each piece of length k^-(alpha-1+kappa) must carry k zeros when N_1 >= n
      double k = std::pow(n, 1.0 / ak);
      r.pieces = std::ceil(std::pow(k, p.alpha - 1.0 + p.kappa));
      r.log_union_bound = union_bound(*r.pieces, -p.c * k * k);
      if (m) r.log_moment_root = std::log(p.c_moment) + 0.5 * ak * std::log(mm);
      break;
    }
    case RegimeRow::LogType: {
      if (!(p.gamma > 0.5)) throw std::invalid_argument("log-type row needs gamma > 1/2");
      r.tail_form = two ? "-c*log(l)^(2*gamma)" : "-c*log(n)^(2*gamma)";
      r.moment_form = "exp(c*m^(1/(2*gamma-1)))";
      check_T1();
      double ln = std::log(n);
      r.log_tail = -p.c * std::pow(std::max(ln, 0.0), 2.0 * p.gamma);
      // k zeros per piece of length exp(-c_piece k^(1/gamma)); solve k * pieces = n
      if (ln > p.c_piece) {
        double lo = 1.0, hi = std::max(2.0, std::pow(ln / p.c_piece, p.gamma) + 1.0);
        for (int it = 0; it < 200; ++it) {
          double mid = 0.5 * (lo + hi);
          if (std::log(mid) + p.c_piece * std::pow(mid, 1.0 / p.gamma) > ln) hi = mid;
          else lo = mid;
        }
        double lp = p.c_piece * std::pow(lo, 1.0 / p.gamma);
        r.pieces = std::exp(lp);
        r.log_union_bound = lp - p.c * lo * lo;
      }
      if (m) r.log_moment_root = p.c_moment * std::pow(mm, 1.0 / (2.0 * p.gamma - 1.0));
      break;
    }
  }
  if (!r.constraint_ok)
    precondition_failed("regime_constraint", std::string(to_string(row)) + " row needs " + r.constraint);
  return r;
}

}  // namespace gz
