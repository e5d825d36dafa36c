#pragma once

#include "gz/spectral.hpp"

namespace gz::hiprec {

// Families whose kernel has a closed form we can evaluate at arbitrary precision.
bool supports(const SpectralMeasure1D& mu);

struct EigenResult {
  double log_lambda_min = 0.0;
  bool positive = false;  // false: lambda_min <= 0 or below the resolvable floor
  int bits = 0;
};

// Smallest eigenvalue of the size x size Toeplitz matrix k((j-i) * T / steps).
EigenResult min_eigenvalue(const SpectralMeasure1D& mu, int size, double T, int steps,
                           int max_bits = 4096);

struct LogDetResult {
  double log_det = 0.0;
  bool positive = false;
  int bits = 0;
};

LogDetResult log_det(const SpectralMeasure1D& mu, int size, double T, int steps,
                     int max_bits = 4096);

}  // namespace gz::hiprec
