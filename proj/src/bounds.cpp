#include "puflearn/bounds.hpp"

#include <atomic>
#include <cmath>

#include "puflearn/errors.hpp"
#include "puflearn/learner.hpp"
#include "puflearn/linalg.hpp"
#include "puflearn/parallel.hpp"

namespace puflearn {

namespace {

void check_prob(double v, const char* name) {
  if (!(v > 0.0 && v < 1.0))
    throw InvalidArgument(std::string("bounds: ") + name + " must lie in (0,1)");
}

}  // namespace

double m_min_eigen_floor(std::int64_t n, double xi, double eta) {
  if (n < 1 || xi <= 0 || eta < 0) throw InvalidArgument("m_min_eigen_floor: bad inputs");
  const double nd = static_cast<double>(n);
  return 8.0 * nd / xi * (eta + std::log(nd));
}

double m_min_error_floor(std::int64_t n, double xi, double eta, double tau_e, double epsilon) {
  if (n < 1 || xi <= 0 || eta < 0 || tau_e < 0 || epsilon <= 0)
    throw InvalidArgument("m_min_error_floor: bad inputs");
  const double nd = static_cast<double>(n);
  return 4.0 * nd * nd * tau_e * tau_e / (epsilon * epsilon * xi) * (eta + std::log(2.0 * nd));
}

BoundReport sample_bound(const BoundInputs& in) {
  if (in.n < 1 || in.n_mask < 1 || in.n_detector < 1)
    throw InvalidArgument("sample_bound: n, N, M must be >= 1");
  check_prob(in.epsilon, "epsilon");
  check_prob(in.delta, "delta");
  if (in.tau_e < 0) throw InvalidArgument("sample_bound: tau_e must be >= 0");
  if (in.xi <= 0) throw InvalidArgument("sample_bound: xi must be > 0");

  BoundReport report;
  report.eta = in.eta.value_or(std::log(2.0 * static_cast<double>(in.n_detector) / in.delta));
  report.m_eigen = m_min_eigen_floor(in.n, in.xi, report.eta);
  report.m_error = m_min_error_floor(in.n, in.xi, report.eta, in.tau_e, in.epsilon);
  report.m_required = std::max(report.m_eigen, report.m_error);
  report.chernoff_fail = chernoff_failure(report.m_required, in.n, in.xi);
  const double nd = static_cast<double>(in.n);
  report.time_estimate = nd * nd * report.m_required + nd * nd * nd;
  return report;
}

double chernoff_failure(double m, std::int64_t n, double xi) {
  if (m < 0 || n < 1 || xi <= 0) throw InvalidArgument("chernoff_failure: bad inputs");
  const double nd = static_cast<double>(n);
  return std::min(1.0, nd * std::exp(-m * xi / (8.0 * nd)));
}

double subgaussian_tail(double tau, double t) {
  if (tau <= 0) throw InvalidArgument("subgaussian_tail: tau must be > 0");
  if (t < 0) throw InvalidArgument("subgaussian_tail: t must be >= 0");
  return std::exp(-t * t / (2.0 * tau * tau));
}

double subgaussian_vector_tail(double tau, std::int64_t n, double t) {
  if (tau <= 0 || n < 1 || t < 0) throw InvalidArgument("subgaussian_vector_tail: bad inputs");
  const double nd = static_cast<double>(n);
  return std::min(1.0, 2.0 * nd * std::exp(-t * t / (2.0 * tau * tau * nd)));
}

double linear_combination_tau(const std::vector<double>& taus, const std::vector<double>& mus) {
  if (taus.size() != mus.size())
    throw DimensionMismatch("linear_combination_tau: length mismatch");
  double sum = 0;
  for (std::size_t i = 0; i < taus.size(); ++i) sum += mus[i] * mus[i] * taus[i] * taus[i];
  return std::sqrt(sum);
}

double matrix_transform_tau(double tau, const Matd& a) {
  if (tau <= 0) throw InvalidArgument("matrix_transform_tau: tau must be > 0");
  return tau * operator_norm<double>(a.transpose());
}

ChernoffResult chernoff_validate(const ChernoffSpec& spec, Index m, Index trials,
                                 std::uint64_t seed) {
  if (m < 1 || trials < 1) throw InvalidArgument("chernoff_validate: m, trials must be >= 1");
  const MonomialBasis basis(static_cast<int>(spec.n_mask), spec.degree);
  // Whitening from the exact second moment; xi here is the true minimum
  // retained eigenvalue, not a pilot estimate.
  const auto whitening = whiten(analytic_second_moment(basis, spec.dist));

  const Index n = basis.size();
  const Index r = whitening.kept_dim();
  Matd p_kept(n, r);
  for (Index k = 0; k < r; ++k)
    p_kept.col(k) = whitening.P.col(whitening.kept[static_cast<std::size_t>(k)]);

  const double threshold = static_cast<double>(m) * whitening.xi_hat / 2.0;
  std::atomic<Index> failures{0};
  parallel_for(static_cast<std::size_t>(trials), [&](std::size_t trial) {
    Rng rng = derive_stream(seed, trial);
    Matd gram = Matd::Zero(r, r);
    Vecd b(spec.n_mask), c(n), ct(r);
    for (Index i = 0; i < m; ++i) {
      b = sample_challenge(spec.dist, spec.n_mask, rng);
      c(0) = 1.0;
      for (Index t = 1; t < n; ++t) c(t) = b(basis.var(t)) * c(basis.parent(t));
      ct.noalias() = p_kept.transpose() * c;
      gram.selfadjointView<Eigen::Lower>().rankUpdate(ct);
    }
    const auto eig = sym_eig(SymMatrixd(Matd(gram.selfadjointView<Eigen::Lower>())));
    if (eig.lambda_min() <= threshold) failures.fetch_add(1);
  });

  ChernoffResult result;
  result.trials = trials;
  result.failures = failures.load();
  result.empirical_rate = static_cast<double>(result.failures) / static_cast<double>(trials);
  result.bound = chernoff_failure(static_cast<double>(m), n, whitening.xi_hat);
  result.xi = whitening.xi_hat;
  result.kept_dim = r;
  result.n = n;
  return result;
}

}  // namespace puflearn
