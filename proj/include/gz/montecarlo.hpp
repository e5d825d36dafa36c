#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "gz/bounds.hpp"
#include "gz/spectral.hpp"

namespace gz {

constexpr long kBlockSize = 4096;
constexpr double kZ95 = 1.959963984540054;

struct Interval95 {
  double lo = 0.0;
  double hi = 1.0;
};

Interval95 wilson_interval(long hits, long n, double z = kZ95);
// Two-sided normal quantile for a family-wise level alpha over k comparisons.
double bonferroni_z(int comparisons, double alpha = 0.05);

// Worker count from GZ_THREADS, default 1.
int default_threads();

enum class TailMethod { Direct, GridExact };
const char* to_string(TailMethod m);
TailMethod parse_tail_method(const std::string& s);

struct McOptions {
  TailMethod method = TailMethod::GridExact;
  int grid_points = 0;  // 0 picks a grid from T and the spectral radius
  int n_waves = 1024;   // direct method only
  int threads = 0;      // 0 uses default_threads()
  double z = kZ95;
  bool check_a1 = true;
  int resolution = 96;  // marching squares cells per side (2D)
};

struct TailEstimate {
  std::string event;
  long n_samples = 0;
  long n_hits = 0;
  double p_hat = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 1.0;
  std::uint64_t seed = 0;
  std::string method;
  double runtime_s = 0.0;  // not part of the ledger
};

TailEstimate make_estimate(std::string event, long hits, long n, std::uint64_t seed,
                           std::string method, double z = kZ95);

// Grid used for a 1D path on [0, T].
int auto_grid_points(const SpectralMeasure1D& mu, double T);

// hist[k] = number of paths with exactly k zeros in [0, T]
std::vector<long> zero_count_histogram(const SpectralMeasure1D& mu, double T, long n_samples,
                                       std::uint64_t seed, const McOptions& opt = {});
TailEstimate tail_from_histogram(const std::vector<long>& hist, int n, double T, std::uint64_t seed,
                                 const std::string& method, double z = kZ95);

TailEstimate estimate_zero_tail(const SpectralMeasure1D& mu, int n, double T, long n_samples,
                                std::uint64_t seed, const McOptions& opt = {});

// One estimate per eta: P(sup_[0,T] |X| <= eta)
std::vector<TailEstimate> estimate_smallball(const SpectralMeasure1D& mu, double T,
                                             const std::vector<double>& etas, long n_samples,
                                             std::uint64_t seed, const McOptions& opt = {});

std::vector<double> sample_nodal_lengths(const SpectralMeasure2D& mu, double T, long n_samples,
                                         std::uint64_t seed, const McOptions& opt = {});
TailEstimate estimate_nodal_tail(const SpectralMeasure2D& mu, int n, double T, long n_samples,
                                 std::uint64_t seed, const McOptions& opt = {});

struct MomentEstimate {
  double T = 0.0;
  long n_samples = 0;
  std::uint64_t seed = 0;
  double mean = 0.0;
  double mean_se = 0.0;
  Interval95 mean_ci;
  std::optional<double> oracle_mean;  // Kac-Rice (1D) or isotropic nodal density (2D)
  std::vector<double> moments;        // moments[m] = E[N^m], m = 0..m_max
  std::vector<Interval95> moment_ci;  // bootstrap percentile intervals
  int bootstrap = 200;
};

MomentEstimate estimate_expectation_and_moments(const SpectralMeasure1D& mu, double T, int m_max,
                                                long n_samples, std::uint64_t seed,
                                                const McOptions& opt = {});
MomentEstimate estimate_expectation_and_moments(const SpectralMeasure2D& mu, double T, int m_max,
                                                long n_samples, std::uint64_t seed,
                                                const McOptions& opt = {});
// Same summaries for given per-path values.
MomentEstimate summarize_moments(const std::vector<double>& values, double T, int m_max,
                                 std::uint64_t seed, int bootstrap = 200);

// (T / pi) sqrt(C_2)
double kac_rice_mean(const SpectralMeasure1D& mu, double T);
// Expected nodal length per unit area for an isotropic field: sqrt(C_{2,0}) / 2
double nodal_density_oracle(const SpectralMeasure2D& mu);

struct LinearityCheck {
  double mean_T = 0.0;
  double mean_2T = 0.0;
  double ratio = 0.0;
  Interval95 ratio_ci;
  bool holds = false;  // 2 inside ratio_ci
};

LinearityCheck linearity_in_T(const SpectralMeasure1D& mu, double T, long n_samples,
                              std::uint64_t seed, const McOptions& opt = {});

enum class OrthantMethod { Mc, OrthantGrid };

struct OrthantOptions {
  int qmc_points = 1 << 14;
  int shifts = 16;
};

// P(X_{t_0} < 0, X_{t_1} > 0, ..., alternating) at t_k = kT/n.
TailEstimate alternating_sign_probability(const SpectralMeasure1D& mu, int n, double T,
                                          OrthantMethod method, long n_samples,
                                          std::uint64_t seed, const OrthantOptions& oo = {});
// Quasi-MC orthant probability P(Y_k > 0 for all k) for Y ~ N(0, cov).
std::pair<double, double> orthant_probability(const Eigen::MatrixXd& cov, std::uint64_t seed,
                                              const OrthantOptions& oo = {});

struct CalibrationSweep {
  int m_min = 2;
  int m_max = 32;
  int t_steps = 20;  // eigen sweep: T = b m j / t_steps, j = 1..t_steps
  std::vector<int> smallball_m{2, 4, 8};
  std::vector<double> smallball_T{1.0};
  std::vector<std::pair<int, double>> lower_points{{1, 1.0}, {2, 1.0}, {3, 1.0}};
  long lower_samples = 1000000;
  double lower_z = 3.2905267314919255;  // 99.9% two-sided
  bool fit_lower = true;
  std::uint64_t seed = 1;
};

struct CalibrationResult {
  std::string name;
  double value = 0.0;
  std::string domain;
  double worst_margin = 0.0;
};

struct Calibration {
  std::vector<CalibrationResult> results;
  BoundConstants constants;
  double b_density = 0.0;  // pi / M0
  std::vector<std::pair<int, double>> unresolved_lower;
  const CalibrationResult* find(const std::string& name) const;
};

Calibration calibrate_constants(const SpectralMeasure1D& mu, const CalibrationSweep& sweep = {},
                                const McOptions& opt = {});

// C needed by the density bound at (m, T); log scale.
double smallball_log_C_needed(const SpectralMeasure1D& mu, int m, double T);

std::uint64_t fnv1a64(std::string_view s);

struct LedgerRow {
  std::string event;
  std::uint64_t config_hash = 0;
  long n_samples = 0;
  long n_hits = 0;
  double p_hat = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  std::uint64_t seed = 0;
  std::string method;
  double runtime_s = 0.0;
};

class Ledger {
 public:
  void append(const TailEstimate& e, std::uint64_t config_hash);
  const std::vector<LedgerRow>& rows() const { return rows_; }
  // Runtime is left out so reruns hash equal.
  std::string csv() const;
  std::string runtime_csv() const;
  std::uint64_t hash() const { return fnv1a64(csv()); }
  // Appends rows to path (header when new) and runtimes to path + ".runtime.csv".
  void write(const std::string& path) const;

 private:
  std::vector<LedgerRow> rows_;
};

}  // namespace gz
