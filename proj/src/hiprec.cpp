#include "gz/hiprec.hpp"

#include <boost/multiprecision/mpfr.hpp>
#include <cmath>
#include <mutex>
#include <vector>

namespace gz::hiprec {

namespace {

using mp = boost::multiprecision::mpfr_float;

std::mutex g_precision_mutex;

class PrecisionScope {
 public:
  explicit PrecisionScope(int bits) : lock_(g_precision_mutex), saved_(mp::default_precision()) {
    mp::default_precision(static_cast<unsigned>(std::ceil(bits * 0.30103)) + 2);
  }
  ~PrecisionScope() { mp::default_precision(saved_); }

 private:
  std::lock_guard<std::mutex> lock_;
  unsigned saved_;
};

mp kernel_mp(const SpectralMeasure1D& mu, const mp& t) {
  const Family1D& f = mu.family();
  if (auto* u = std::get_if<Uniform>(&f)) {
    if (t == 0) return mp(1);
    mp qt = mp(u->q) * t;
    return sin(qt) / qt;
  }
  if (std::holds_alternative<StdNormal>(f)) return exp(-t * t / 2);
  if (auto* s = std::get_if<StretchedExp>(&f)) {
    if (s->alpha == 1.0) return 1 / (1 + t * t);
    return exp(-t * t / 4);
  }
  const auto& a = std::get<Atomic>(f);
  mp sum = 0;
  for (const Atom& at : a.atoms) sum += mp(at.weight) * cos(mp(at.freq) * t);
  return sum;
}

std::vector<mp> toeplitz_row(const SpectralMeasure1D& mu, int size, double T, int steps) {
  mp h = mp(T) / steps;
  std::vector<mp> row(size);
  for (int j = 0; j < size; ++j) row[j] = kernel_mp(mu, h * j);
  return row;
}

// Count of eigenvalues below x for the tridiagonal (d, e).
int sturm_count(const std::vector<mp>& d, const std::vector<mp>& e, const mp& x, const mp& tiny) {
  int count = 0;
  mp q = d[0] - x;
  for (std::size_t i = 0;; ++i) {
    if (q == 0) q = tiny;
    if (q < 0) ++count;
    if (i + 1 == d.size()) break;
    q = d[i + 1] - x - e[i] * e[i] / q;
  }
  return count;
}

void tridiagonalize(std::vector<std::vector<mp>>& A, std::vector<mp>& d, std::vector<mp>& e) {
  const int n = static_cast<int>(A.size());
  for (int k = 0; k + 2 < n; ++k) {
    int len = n - k - 1;
    std::vector<mp> v(len);
    mp norm2 = 0;
    for (int i = 0; i < len; ++i) {
      v[i] = A[k + 1 + i][k];
      norm2 += v[i] * v[i];
    }
    if (norm2 == 0) continue;
    mp alpha = sqrt(norm2);
    if (v[0] > 0) alpha = -alpha;
    v[0] -= alpha;
    mp vv = 0;
    for (const mp& x : v) vv += x * x;
    if (vv == 0) continue;
    std::vector<mp> p(len);
    for (int i = 0; i < len; ++i) {
      mp s = 0;
      for (int j = 0; j < len; ++j) s += A[k + 1 + i][k + 1 + j] * v[j];
      p[i] = 2 * s / vv;
    }
    mp vp = 0;
    for (int i = 0; i < len; ++i) vp += v[i] * p[i];
    mp K = vp / vv;
    for (int i = 0; i < len; ++i) p[i] -= K * v[i];
    for (int i = 0; i < len; ++i)
      for (int j = 0; j < len; ++j) A[k + 1 + i][k + 1 + j] -= v[i] * p[j] + p[i] * v[j];
    A[k + 1][k] = alpha;
    A[k][k + 1] = alpha;
    for (int i = 1; i < len; ++i) A[k + 1 + i][k] = A[k][k + 1 + i] = 0;
  }
  d.resize(n);
  e.resize(n > 0 ? n - 1 : 0);
  for (int i = 0; i < n; ++i) d[i] = A[i][i];
  for (int i = 0; i + 1 < n; ++i) e[i] = A[i + 1][i];
}

bool attempt_eigen(const SpectralMeasure1D& mu, int size, double T, int steps, int bits,
                   EigenResult& out) {
  PrecisionScope scope(bits);
  std::vector<mp> row = toeplitz_row(mu, size, T, steps);
  std::vector<std::vector<mp>> A(size, std::vector<mp>(size));
  for (int i = 0; i < size; ++i)
    for (int j = 0; j < size; ++j) A[i][j] = row[std::abs(i - j)];
  std::vector<mp> d, e;
  tridiagonalize(A, d, e);
  mp eps = pow(mp(2), -bits);
  mp floor_val = pow(mp(2), 20) * mp(size) * mp(size) * eps;
  mp tiny = eps * eps;
  out.bits = bits;
  if (size == 1) {
    out.positive = d[0] > floor_val;
    out.log_lambda_min = out.positive ? static_cast<double>(log(d[0])) : -INFINITY;
    return out.positive;
  }
  if (sturm_count(d, e, floor_val, tiny) > 0) {
    out.positive = false;
    return false;
  }
  // bisection on log(lambda) between the floor and the Gershgorin bound
  mp lo = log(floor_val);
  mp hi = log(mp(size) + 1);
  for (int it = 0; it < 80; ++it) {
    mp mid = (lo + hi) / 2;
    if (sturm_count(d, e, exp(mid), tiny) > 0) hi = mid;
    else lo = mid;
  }
  out.positive = true;
  out.log_lambda_min = static_cast<double>((lo + hi) / 2);
  return true;
}

}  // namespace

bool supports(const SpectralMeasure1D& mu) {
  const Family1D& f = mu.family();
  if (std::holds_alternative<Uniform>(f) || std::holds_alternative<StdNormal>(f) ||
      std::holds_alternative<Atomic>(f))
    return true;
  if (auto* s = std::get_if<StretchedExp>(&f)) return s->alpha == 1.0 || s->alpha == 0.5;
  return false;
}

EigenResult min_eigenvalue(const SpectralMeasure1D& mu, int size, double T, int steps,
                           int max_bits) {
  EigenResult out;
  for (int bits = 128; bits <= max_bits; bits *= 2)
    if (attempt_eigen(mu, size, T, steps, bits, out)) return out;
  return out;
}

LogDetResult log_det(const SpectralMeasure1D& mu, int size, double T, int steps, int max_bits) {
  LogDetResult out;
  EigenResult ev = min_eigenvalue(mu, size, T, steps, max_bits);
  if (!ev.positive) {
    out.bits = ev.bits;
    return out;
  }
  int bits = std::min(max_bits, ev.bits * 2);
  PrecisionScope scope(bits);
  std::vector<mp> row = toeplitz_row(mu, size, T, steps);
  std::vector<std::vector<mp>> L(size, std::vector<mp>(size, mp(0)));
  mp logdet = 0;
  for (int j = 0; j < size; ++j) {
    mp s = row[0];
    for (int k = 0; k < j; ++k) s -= L[j][k] * L[j][k];
    if (s <= 0) {
      out.bits = bits;
      return out;
    }
    logdet += log(s);
    L[j][j] = sqrt(s);
    for (int i = j + 1; i < size; ++i) {
      mp t = row[i - j];
      for (int k = 0; k < j; ++k) t -= L[i][k] * L[j][k];
      L[i][j] = t / L[j][j];
    }
  }
  out.log_det = static_cast<double>(logdet);
  out.positive = true;
  out.bits = bits;
  return out;
}

}  // namespace gz::hiprec
