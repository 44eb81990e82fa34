#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "puflearn/pufsim.hpp"
#include "puflearn/types.hpp"

namespace puflearn {

/// Everything the closed-form sample-size bounds depend on.
struct BoundInputs {
  std::int64_t n = 1;   // feature dimension (constant term included)
  Index n_mask = 1;     // N
  Index n_detector = 1; // M
  double epsilon = 0.1;
  double delta = 0.1;
  double tau_e = 0;     // noise subgaussian parameter
  double xi = 1;        // smallest retained second-moment eigenvalue
  std::optional<double> eta;  // exponent; defaults to ln(2M/delta)
  int order = 0;        // nonlinear order d, 0 for linear (informational)
};

struct BoundReport {
  double m_eigen = 0;     // sample floor that keeps the Gram matrix invertible
  double m_error = 0;     // sample floor that pins the estimation error
  double m_required = 0;  // max of the two
  double eta = 0;         // exponent actually substituted
  double chernoff_fail = 0;  // failure bound n*exp(-m xi / 8n) at m_required
  double time_estimate = 0;  // n^2 m + n^3 operation count
};

/// Two-branch sample-size floor:
///   m >= max{ (8n/xi) ln(2Mn/delta), (4 n^2 tau^2 / (eps^2 xi)) ln(4Mn/delta) },
/// equivalently the eta-form branches with eta = ln(2M/delta) substituted.
/// Monotone: nondecreasing in n, tau_e, M, 1/eps, 1/delta; nonincreasing in xi.
BoundReport sample_bound(const BoundInputs& inputs);

/// Explicit-exponent branch floors: (8n/xi)(eta + ln n) and
/// (4 n^2 tau^2 / (eps^2 xi))(eta + ln 2n).
double m_min_eigen_floor(std::int64_t n, double xi, double eta);
double m_min_error_floor(std::int64_t n, double xi, double eta, double tau_e, double epsilon);

/// min(1, n exp(-m xi / 8n)): chance that the whitened Gram matrix ends up
/// with minimum eigenvalue at or below m*xi/2.
double chernoff_failure(double m, std::int64_t n, double xi);

/// exp(-t^2 / (2 tau^2)) for a tau-subgaussian scalar.
double subgaussian_tail(double tau, double t);

/// min(1, 2n exp(-t^2 / (2 tau^2 n))) for a tau-subgaussian vector in R^n.
double subgaussian_vector_tail(double tau, std::int64_t n, double t);

/// Combined parameter of sum mu_i X_i: sqrt(sum mu_i^2 tau_i^2).
double linear_combination_tau(const std::vector<double>& taus, const std::vector<double>& mus);

/// Parameter of A*x for tau-subgaussian x: tau * opnorm(A^T).
double matrix_transform_tau(double tau, const Matd& a);

struct ChernoffSpec {
  ChallengeDist dist;
  Index n_mask = 4;
  int degree = 2;
};

struct ChernoffResult {
  Index trials = 0;
  Index failures = 0;          // lambda_min <= m*xi/2 events
  double empirical_rate = 0;
  double bound = 0;            // chernoff_failure(m, n, xi)
  double xi = 0;               // true xi from the analytic second moment
  Index kept_dim = 0;
  std::int64_t n = 0;          // full feature dimension
};

/// Draws `trials` challenge matrices of m rows from the spec's distribution,
/// projects onto the analytically-whitened coordinates, and counts how often
/// the Gram matrix minimum eigenvalue falls at or below m*xi/2. Trials run on
/// the work pool with per-trial derived streams.
ChernoffResult chernoff_validate(const ChernoffSpec& spec, Index m, Index trials,
                                 std::uint64_t seed);

}  // namespace puflearn
