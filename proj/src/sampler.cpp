#include "gz/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "gz/error.hpp"
#include "gz/kernel.hpp"

namespace gz {

namespace {

constexpr double kPi = std::numbers::pi;

void check_grid(const GridSpec& g, int dim) {
  if (g.dimension != dim) throw std::invalid_argument("grid dimension does not match the measure");
  if (g.points < 2 || !(g.extent > 0.0) || !std::isfinite(g.extent))
    throw std::invalid_argument("grid needs at least 2 points and a positive extent");
}

std::uint64_t attempt_stream(std::uint64_t index, int attempt) {
  return attempt == 0 ? substream(Stream::Path, index)
                      : substream("path-retry-" + std::to_string(attempt), index);
}

}  // namespace

double WaveSum1D::eval(double t) const {
  double s = 0.0;
  for (std::size_t j = 0; j < freq.size(); ++j) {
    double th = freq[j] * t;
    s += a[j] * std::cos(th) + b[j] * std::sin(th);
  }
  return s;
}

double WaveSum1D::derivative(int order, double t) const {
  if (order == 0) return eval(t);
  double phase = 0.5 * kPi * (order % 4);
  double s = 0.0;
  for (std::size_t j = 0; j < freq.size(); ++j) {
    double th = freq[j] * t + phase;
    s += std::pow(freq[j], order) * (a[j] * std::cos(th) + b[j] * std::sin(th));
  }
  return s;
}

double WaveSum2D::eval(double x, double y) const {
  double s = 0.0;
  for (std::size_t j = 0; j < kx.size(); ++j) {
    double th = kx[j] * x + ky[j] * y;
    s += a[j] * std::cos(th) + b[j] * std::sin(th);
  }
  return s;
}

double WaveSum2D::partial(int ox, int oy, double x, double y) const {
  double phase = 0.5 * kPi * ((ox + oy) % 4);
  double s = 0.0;
  for (std::size_t j = 0; j < kx.size(); ++j) {
    double th = kx[j] * x + ky[j] * y + phase;
    double f = (ox ? std::pow(kx[j], ox) : 1.0) * (oy ? std::pow(ky[j], oy) : 1.0);
    s += f * (a[j] * std::cos(th) + b[j] * std::sin(th));
  }
  return s;
}

std::vector<double> WaveSum2D::on_grid(const GridSpec& g, int ox, int oy) const {
  const int n = g.points;
  const int w = static_cast<int>(kx.size());
  double phase = 0.5 * kPi * ((ox + oy) % 4);
  double cp = std::cos(phase), sp = std::sin(phase);
  Eigen::MatrixXd P(n, w), Q(n, w), Cv(n, w), Sv(n, w);
  for (int k = 0; k < w; ++k) {
    double f = (ox ? std::pow(kx[k], ox) : 1.0) * (oy ? std::pow(ky[k], oy) : 1.0);
    double ap = f * (a[k] * cp + b[k] * sp);
    double bp = f * (b[k] * cp - a[k] * sp);
    for (int i = 0; i < n; ++i) {
      double u = kx[k] * g.coord_x(i);
      double cu = std::cos(u), su = std::sin(u);
      P(i, k) = ap * cu + bp * su;
      Q(i, k) = bp * cu - ap * su;
      double v = ky[k] * g.coord_y(i);
      Cv(i, k) = std::cos(v);
      Sv(i, k) = std::sin(v);
    }
  }
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> V =
      Cv * P.transpose() + Sv * Q.transpose();
  return std::vector<double>(V.data(), V.data() + V.size());
}

// ---------------------------------------------------------------------------

SpectralSampler1D::SpectralSampler1D(SpectralMeasure1D mu, int n_waves, double probe_extent)
    : mu_(std::move(mu)), n_waves_(n_waves) {
  if (n_waves < 1) throw std::invalid_argument("n_waves must be positive");
  exact_atomic_ = std::holds_alternative<Atomic>(mu_.family());
  if (!exact_atomic_) {
    for (int i = 1; i <= 16; ++i) probe_t_.push_back(probe_extent * i / 16.0);
    probe_k_ = kernel_eval(mu_, probe_t_);
  }
}

WaveSum1D SpectralSampler1D::draw(std::uint64_t seed, std::uint64_t index) const {
  WaveSum1D w;
  if (exact_atomic_) {
    Rng rng(seed, substream(Stream::Path, index));
    const auto& atoms = std::get<Atomic>(mu_.family()).atoms;
    std::vector<Atom> pos;
    for (const Atom& at : atoms) {
      double f = std::abs(at.freq);
      auto it = std::find_if(pos.begin(), pos.end(),
                             [&](const Atom& p) { return std::abs(p.freq - f) <= 1e-12 * (1.0 + f); });
      if (it == pos.end()) pos.push_back({f, at.weight});
      else it->weight += at.weight;
    }
    for (const Atom& p : pos) {
      double s = std::sqrt(p.weight);
      w.freq.push_back(p.freq);
      w.a.push_back(s * rng.normal());
      w.b.push_back(s * rng.normal());
    }
    return w;
  }
  int n = n_waves_;
  for (int attempt = 0;; ++attempt) {
    Rng rng(seed, attempt_stream(index, attempt));
    w.freq.resize(n);
    for (int j = 0; j < n; ++j) w.freq[j] = mu_.sample(rng);
    double misfit = 0.0;
    for (std::size_t p = 0; p < probe_t_.size(); ++p) {
      double s = 0.0;
      for (double f : w.freq) s += std::cos(f * probe_t_[p]);
      misfit = std::max(misfit, std::abs(s / n - probe_k_[p]));
    }
    if (misfit > 2.0 / std::sqrt(static_cast<double>(n)) && attempt < 4) {
      n *= 2;
      continue;
    }
    double amp = 1.0 / std::sqrt(static_cast<double>(n));
    w.a.resize(n);
    w.b.resize(n);
    for (int j = 0; j < n; ++j) {
      w.a[j] = amp * rng.normal();
      w.b[j] = amp * rng.normal();
    }
    return w;
  }
}

SpectralSampler2D::SpectralSampler2D(SpectralMeasure2D mu, int n_waves, double probe_extent)
    : mu_(std::move(mu)), n_waves_(n_waves) {
  if (n_waves < 1) throw std::invalid_argument("n_waves must be positive");
  exact_atomic_ = std::holds_alternative<Atomic2D>(mu_.family());
  if (!exact_atomic_) {
    for (int i = 1; i <= 8; ++i) {
      double t = probe_extent * i / 8.0;
      probe_x_.push_back(t);
      probe_k_.push_back(kernel_eval(mu_, t, 0.0));
    }
    for (int i = 1; i <= 8; ++i) {
      double t = probe_extent * i / 8.0 / std::sqrt(2.0);
      probe_x_.push_back(-t);  // negative marks a diagonal probe
      probe_k_.push_back(kernel_eval(mu_, t, t));
    }
  }
}

WaveSum2D SpectralSampler2D::draw(std::uint64_t seed, std::uint64_t index) const {
  WaveSum2D w;
  if (exact_atomic_) {
    Rng rng(seed, substream(Stream::Path, index));
    const auto& atoms = std::get<Atomic2D>(mu_.family()).atoms;
    std::vector<Atom2D> half;
    for (const Atom2D& at : atoms) {
      // keep one representative of each +-pair
      bool upper = at.y > 0.0 || (at.y == 0.0 && at.x >= 0.0);
      Atom2D rep = upper ? at : Atom2D{-at.x, -at.y, at.weight};
      auto it = std::find_if(half.begin(), half.end(), [&](const Atom2D& p) {
        return std::hypot(p.x - rep.x, p.y - rep.y) <= 1e-12 * (1.0 + std::hypot(rep.x, rep.y));
      });
      if (it == half.end()) half.push_back(rep);
      else it->weight += rep.weight;
    }
    for (const Atom2D& p : half) {
      double s = std::sqrt(p.weight);
      w.kx.push_back(p.x);
      w.ky.push_back(p.y);
      w.a.push_back(s * rng.normal());
      w.b.push_back(s * rng.normal());
    }
    return w;
  }
  int n = n_waves_;
  for (int attempt = 0;; ++attempt) {
    Rng rng(seed, attempt_stream(index, attempt));
    w.kx.resize(n);
    w.ky.resize(n);
    for (int j = 0; j < n; ++j) std::tie(w.kx[j], w.ky[j]) = mu_.sample(rng);
    double misfit = 0.0;
    for (std::size_t p = 0; p < probe_x_.size(); ++p) {
      double s = 0.0;
      double px = std::abs(probe_x_[p]), py = probe_x_[p] < 0.0 ? px : 0.0;
      for (int j = 0; j < n; ++j) s += std::cos(w.kx[j] * px + w.ky[j] * py);
      misfit = std::max(misfit, std::abs(s / n - probe_k_[p]));
    }
    if (misfit > 2.0 / std::sqrt(static_cast<double>(n)) && attempt < 4) {
      n *= 2;
      continue;
    }
    double amp = 1.0 / std::sqrt(static_cast<double>(n));
    w.a.resize(n);
    w.b.resize(n);
    for (int j = 0; j < n; ++j) {
      w.a[j] = amp * rng.normal();
      w.b[j] = amp * rng.normal();
    }
    return w;
  }
}

// ---------------------------------------------------------------------------

GaussianVectorSampler::GaussianVectorSampler(const Eigen::MatrixXd& cov, double ridge, double tol) {
  const int n = static_cast<int>(cov.rows());
  Eigen::VectorXd d = cov.diagonal().array() + ridge;
  std::vector<bool> chosen(n, false);
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(n, n);
  double scale = std::max(d.maxCoeff(), 1e-300);
  int k = 0;
  for (; k < n; ++k) {
    int piv = -1;
    double best = 0.0;
    for (int i = 0; i < n; ++i)
      if (!chosen[i] && d[i] > best) {
        best = d[i];
        piv = i;
      }
    if (piv < 0 || best <= tol * scale) break;
    chosen[piv] = true;
    order_.push_back(piv);
    double lkk = std::sqrt(best);
    L(piv, k) = lkk;
    for (int i = 0; i < n; ++i) {
      if (chosen[i]) continue;
      double s = cov(i, piv);
      for (int j = 0; j < k; ++j) s -= L(i, j) * L(piv, j);
      L(i, k) = s / lkk;
      d[i] -= L(i, k) * L(i, k);
    }
  }
  L_ = L.leftCols(k);
}

void GaussianVectorSampler::draw(Rng& rng, double* out) const {
  const int r = rank();
  Eigen::VectorXd z(r);
  for (int j = 0; j < r; ++j) z[j] = rng.normal();
  Eigen::Map<Eigen::VectorXd>(out, size()) = L_ * z;
}

Eigen::MatrixXd grid_covariance(const SpectralMeasure1D& mu, const GridSpec& grid) {
  const int n = grid.points;
  std::vector<double> lag(n);
  for (int j = 0; j < n; ++j) lag[j] = kernel_eval(mu, j * grid.spacing());
  Eigen::MatrixXd S(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) S(i, j) = lag[std::abs(i - j)];
  return S;
}

namespace {

Eigen::MatrixXd checked_covariance(const SpectralMeasure1D& mu, const GridSpec& grid) {
  check_grid(grid, 1);
  if (grid.total() > kExactGridLimit) fail(ErrorKind::GridTooLarge, "exact sampler grid too large");
  return grid_covariance(mu, grid);
}

}  // namespace

ExactPathSampler::ExactPathSampler(const SpectralMeasure1D& mu, const GridSpec& grid)
    : grid_(grid), g_(checked_covariance(mu, grid)) {}

void ExactPathSampler::draw(std::uint64_t seed, std::uint64_t index, double* out) const {
  Rng rng(seed, substream(Stream::Path, index));
  g_.draw(rng, out);
}

PathSample sample_exact(const SpectralMeasure1D& mu, const GridSpec& grid, std::uint64_t seed,
                        std::uint64_t index) {
  ExactPathSampler s(mu, grid);
  PathSample out;
  out.grid = grid;
  out.values.resize(grid.points);
  s.draw(seed, index, out.values.data());
  out.seed = seed;
  out.index = index;
  out.method = "exact";
  out.measure = mu.label();
  return out;
}

PathSample sample_exact(const SpectralMeasure2D& mu, const GridSpec& grid, std::uint64_t seed,
                        std::uint64_t index) {
  check_grid(grid, 2);
  if (grid.total() > kExactGridLimit) fail(ErrorKind::GridTooLarge, "exact sampler grid too large");
  const int n = grid.points;
  const double h = grid.spacing();
  // stationary: covariance depends on the lag only
  std::vector<double> lag((2 * n - 1) * n);
  for (int dj = 0; dj < n; ++dj)
    for (int di = -(n - 1); di <= n - 1; ++di) lag[dj * (2 * n - 1) + di + n - 1] = kernel_eval(mu, di * h, dj * h);
  const long N = grid.total();
  Eigen::MatrixXd S(N, N);
  for (long p = 0; p < N; ++p)
    for (long q = 0; q < N; ++q) {
      int di = static_cast<int>(q % n - p % n), dj = static_cast<int>(q / n - p / n);
      if (dj < 0) {
        dj = -dj;
        di = -di;
      }
      S(p, q) = lag[dj * (2 * n - 1) + di + n - 1];
    }
  GaussianVectorSampler g(S);
  PathSample out;
  out.grid = grid;
  out.values.resize(N);
  Rng rng(seed, substream(Stream::Path, index));
  g.draw(rng, out.values.data());
  out.seed = seed;
  out.index = index;
  out.method = "exact";
  out.measure = mu.label();
  return out;
}

PathSample sample_spectral(const SpectralMeasure1D& mu, const GridSpec& grid, std::uint64_t seed,
                           int n_waves, std::uint64_t index) {
  return sample_derivative_paths(mu, grid, seed, {0}, n_waves, index).front();
}

PathSample sample_spectral(const SpectralMeasure2D& mu, const GridSpec& grid, std::uint64_t seed,
                           int n_waves, std::uint64_t index) {
  check_grid(grid, 2);
  if (grid.total() > 4096L * 4096L) fail(ErrorKind::GridTooLarge, "field grid too large");
  SpectralSampler2D s(mu, n_waves, grid.extent);
  WaveSum2D w = s.draw(seed, index);
  PathSample out;
  out.grid = grid;
  out.values = w.on_grid(grid);
  out.seed = seed;
  out.index = index;
  out.method = "spectral";
  out.n_waves = static_cast<int>(w.kx.size());
  out.measure = mu.label();
  return out;
}

std::vector<PathSample> sample_derivative_paths(const SpectralMeasure1D& mu, const GridSpec& grid,
                                                std::uint64_t seed, const std::vector<int>& orders,
                                                int n_waves, std::uint64_t index) {
  check_grid(grid, 1);
  SpectralSampler1D s(mu, n_waves, grid.extent);
  WaveSum1D w = s.draw(seed, index);
  std::vector<PathSample> out;
  for (int ord : orders) {
    if (ord < 0) throw std::invalid_argument("derivative order must be nonnegative");
    PathSample p;
    p.grid = grid;
    p.values.resize(grid.points);
    for (int i = 0; i < grid.points; ++i) p.values[i] = w.derivative(ord, grid.coord_x(i));
    p.seed = seed;
    p.index = index;
    p.method = "spectral";
    p.n_waves = static_cast<int>(w.freq.size());
    p.order = ord;
    p.measure = mu.label();
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace gz
