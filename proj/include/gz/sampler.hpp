#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "gz/rng.hpp"
#include "gz/spectral.hpp"

namespace gz {

struct GridSpec {
  int dimension = 1;
  double x0 = 0.0;
  double y0 = 0.0;
  double extent = 1.0;  // side length
  int points = 101;     // per axis, endpoints included

  double spacing() const { return extent / (points - 1); }
  double coord_x(int i) const { return x0 + i * spacing(); }
  double coord_y(int j) const { return y0 + j * spacing(); }
  long total() const { return dimension == 1 ? points : static_cast<long>(points) * points; }
};

// values are row-major for 2D: values[j * points + i] at (x_i, y_j)
struct PathSample {
  GridSpec grid;
  std::vector<double> values;
  std::uint64_t seed = 0;
  std::uint64_t index = 0;
  std::string method;
  int n_waves = 0;
  int order = 0;
  std::string measure;
};

// X(t) = sum_j a_j cos(f_j t) + b_j sin(f_j t); amplitudes already scaled.
struct WaveSum1D {
  std::vector<double> freq, a, b;
  double eval(double t) const;
  double derivative(int order, double t) const;
};

struct WaveSum2D {
  std::vector<double> kx, ky, a, b;
  double eval(double x, double y) const;
  double partial(int ox, int oy, double x, double y) const;
  // Values of the (ox, oy) partial on a square grid, row-major.
  std::vector<double> on_grid(const GridSpec& g, int ox = 0, int oy = 0) const;
};

// Random-wave superposition. Atomic measures use the exact finite representation.
class SpectralSampler1D {
 public:
  SpectralSampler1D(SpectralMeasure1D mu, int n_waves = 4096, double probe_extent = 1.0);
  WaveSum1D draw(std::uint64_t seed, std::uint64_t index) const;
  int base_waves() const { return n_waves_; }

 private:
  SpectralMeasure1D mu_;
  int n_waves_;
  bool exact_atomic_ = false;
  std::vector<double> probe_t_, probe_k_;
};

class SpectralSampler2D {
 public:
  SpectralSampler2D(SpectralMeasure2D mu, int n_waves = 4096, double probe_extent = 1.0);
  WaveSum2D draw(std::uint64_t seed, std::uint64_t index) const;

 private:
  SpectralMeasure2D mu_;
  int n_waves_;
  bool exact_atomic_ = false;
  std::vector<double> probe_x_, probe_k_;
};

// Draws from N(0, cov) with a rank-revealing pivoted Cholesky factor.
class GaussianVectorSampler {
 public:
  explicit GaussianVectorSampler(const Eigen::MatrixXd& cov, double ridge = 1e-12,
                                 double tol = 1e-10);
  int size() const { return static_cast<int>(L_.rows()); }
  int rank() const { return static_cast<int>(order_.size()); }
  // Pivot order: component order()[k] depends only on the first k+1 normals.
  const std::vector<int>& order() const { return order_; }
  const Eigen::MatrixXd& factor() const { return L_; }
  void draw(Rng& rng, double* out) const;

 private:
  Eigen::MatrixXd L_;  // size x rank, row i = original component i
  std::vector<int> order_;
};

// Exact sampler for a 1D stationary process on a uniform grid.
class ExactPathSampler {
 public:
  ExactPathSampler(const SpectralMeasure1D& mu, const GridSpec& grid);
  const GaussianVectorSampler& vector_sampler() const { return g_; }
  const GridSpec& grid() const { return grid_; }
  void draw(std::uint64_t seed, std::uint64_t index, double* out) const;

 private:
  GridSpec grid_;
  GaussianVectorSampler g_;
};

constexpr long kExactGridLimit = 8192;

PathSample sample_exact(const SpectralMeasure1D& mu, const GridSpec& grid, std::uint64_t seed,
                        std::uint64_t index = 0);
PathSample sample_exact(const SpectralMeasure2D& mu, const GridSpec& grid, std::uint64_t seed,
                        std::uint64_t index = 0);
PathSample sample_spectral(const SpectralMeasure1D& mu, const GridSpec& grid, std::uint64_t seed,
                           int n_waves = 4096, std::uint64_t index = 0);
PathSample sample_spectral(const SpectralMeasure2D& mu, const GridSpec& grid, std::uint64_t seed,
                           int n_waves = 4096, std::uint64_t index = 0);
std::vector<PathSample> sample_derivative_paths(const SpectralMeasure1D& mu, const GridSpec& grid,
                                                std::uint64_t seed, const std::vector<int>& orders,
                                                int n_waves = 4096, std::uint64_t index = 0);

// Covariance of the process on a uniform 1D grid (Toeplitz shortcut).
Eigen::MatrixXd grid_covariance(const SpectralMeasure1D& mu, const GridSpec& grid);

}  // namespace gz
