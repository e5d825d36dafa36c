#pragma once

#include <optional>
#include <string>
#include <vector>

#include "gz/spectral.hpp"

namespace gz {

// 192 sqrt(pi) in one dimension, 384 sqrt(pi) in two.
double default_A(int dimension);

struct BoundConstants {
  double b = 0.5;
  double B = 0.0;  // filled as (4 e A C)^-1 when left at 0
  double c = 0.5;
  double C = 2.0;
  double A = 0.0;  // filled from default_A when left at 0
  double c_lower = 10.0;
  std::string provenance = "config";

  static BoundConstants defaults(int dimension);
  // Applies the two derived defaults above.
  BoundConstants resolved(int dimension) const;
  // b, B in (0,1) and C > 1
  bool in_standard_ranges() const;
};

double derived_B(double A, double C);

struct Precondition {
  std::string name;
  bool satisfied = false;
  double margin = 0.0;  // >= 0 when satisfied
};

struct BoundReport {
  std::string formula;
  double eps = 0.0;
  long n = 0;
  double T = 0.0;
  long m = 0;             // floor(eps n)
  double moment_root = 0.0;  // D_n^(1/n) or L_n^(1/n)
  double log_argument = 0.0;
  double threshold = 0.0;    // 4nT for the nodal length bound
  BoundConstants constants;
  std::vector<Precondition> preconditions;
  std::optional<double> log_bound;

  bool valid() const { return log_bound.has_value(); }
  const Precondition* first_failed() const;
};

// Throws PreconditionFailed naming the first failing precondition.
const BoundReport& require(const BoundReport& r);

// floor(eps * n) with a guard against representation error in eps.
long floor_eps_n(double eps, long n);

BoundReport theorem1_upper(double eps, long n, double T, double D_root, const BoundConstants& k);
BoundReport theorem1_upper(double eps, long n, double T, const MomentTable& D,
                           const BoundConstants& k);
BoundReport theorem1_lower(long n, double T, double c, double b);
BoundReport theorem2_upper(double eps, long n, double T, double L_root, const BoundConstants& k);
BoundReport theorem2_upper(double eps, long n, double T, const MomentTable& L,
                           const BoundConstants& k);
BoundReport smallball_bound(long m, double T, double eta, double C, double b);

struct LemsbpChain {
  BoundReport report;  // log_bound is the final exp(-eps n^2 h / 2)
  double B = 0.0;
  double h = 0.0;
  double log_H = 0.0;
  double log_M = 0.0;
  double log_eta = 0.0;
  // log W <= lline <= middle <= final
  double log_W = 0.0;
  double log_lline = 0.0;
  double log_middle = 0.0;
  double log_final = 0.0;
};

// log_Dn is log of the moment quantity D_n (not its n-th root).
LemsbpChain lemsbp_bound(double eps, long n, double T, double log_Dn, const BoundConstants& k);

struct DudleyReport {
  int n = 0;
  double T = 0.0;
  double beta = 0.0;              // 4 sqrt(C_{2n+2}) T
  double entropy_integral = 0.0;  // sqrt(pi) beta
  double expected_sup_one_sided = 0.0;  // 12 sqrt(pi) beta
  double expected_abs_sup = 0.0;        // sqrt(C_2n) + 96 sqrt(pi) sqrt(C_{2n+2}) T
  double max_form = 0.0;                // A max(sqrt(C_2n), sqrt(C_{2n+2}) T)
  double expected_sup = 0.0;            // A n D_n
  double sigma = 0.0;                   // sqrt(C_2n)
  double A = 0.0;

  // log P(Z - E Z >= sigma sqrt(2x)) <= -x
  double tail(double x) const;
  // log-probability bound for sup |X^(n)| >= u using expected_sup
  double tail_at(double u) const;
};

DudleyReport dudley_sup_bound(const MomentTable& moments, int n, double T, double A = 0.0);

enum class RegimeRow { Compact, Subcritical, Supercritical, LogType };

RegimeRow parse_regime_row(const std::string& s);
const char* to_string(RegimeRow r);

struct RegimeParams {
  double q = 1.0;
  double alpha = 0.5;
  double gamma = 1.0;
  double kappa = 0.1;
  std::optional<double> kappa1;  // kappa'
  std::optional<double> kappa2;  // kappa''
  double c = 0.5;    // constant in the tail form
  double C = 2.0;    // constant in the constraint
  double c_moment = 1.0;
  double c_piece = 1.0;  // log-type subdivision: pieces of length exp(-c_piece n^(1/gamma))
};

struct RegimeReport {
  RegimeRow row = RegimeRow::Compact;
  int dimension = 1;
  double n = 0.0;  // n in one dimension, ell in two
  double T = 0.0;
  std::string tail_form;
  std::string moment_form;
  std::string constraint;
  bool constraint_ok = false;
  double log_tail = 0.0;
  // subcritical row
  double eps = 0.0;
  double c_kappa = 0.0;
  // union bound subdivision (supercritical and log-type rows)
  std::optional<double> pieces;
  std::optional<double> log_union_bound;
  std::optional<int> m;
  std::optional<double> log_moment_root;  // log of the bound on (E N^m)^(1/m)
};

// Throws PreconditionFailed when the row constraint fails.
RegimeReport regime_table(RegimeRow row, int dimension, double n, double T,
                          std::optional<int> m = std::nullopt, const RegimeParams& p = {});

// log of sum_l P(N_piece >= k) with pieces of length 1/pieces: log(pieces) + log_tail_piece
double union_bound(double pieces, double log_tail_piece);

}  // namespace gz
