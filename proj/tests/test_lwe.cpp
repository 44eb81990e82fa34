#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "puflearn/lwe.hpp"
#include "puflearn/errors.hpp"

using namespace puflearn;

namespace {

// Discretized-Gaussian variance by direct pmf summation:
// p(k) = Phi(k + 1/2) - Phi(k - 1/2) for the rounded N(0, sigma) draw.
double rounded_gaussian_variance(double sigma) {
  const auto cdf = [&](double x) { return 0.5 * (1.0 + std::erf(x / (sigma * std::sqrt(2.0)))); };
  double var = 0;
  for (int k = -50; k <= 50; ++k) {
    const double p = cdf(k + 0.5) - cdf(k - 0.5);
    var += static_cast<double>(k) * k * p;
  }
  return var;
}

}  // namespace

TEST_CASE("mod_reduce: range and period") {
  Rng rng(1);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto x = static_cast<std::int64_t>(rng.uniform_int(200000)) - 100000;
    const auto k = static_cast<std::int64_t>(rng.uniform_int(20)) - 10;
    CHECK(mod_reduce(x, 97) == mod_reduce(x + k * 97, 97));
    CHECK(mod_reduce(x, 97) >= 0);
    CHECK(mod_reduce(x, 97) < 97);
  }
}

TEST_CASE("gen_lwe: exact equations when sigma = 0") {
  LweParams params{8, 97, 40, 0.0, false};
  const LweSampleSet set = gen_lwe(params, 5);
  for (Index i = 0; i < 40; ++i) {
    std::int64_t dot = 0;
    for (int j = 0; j < 8; ++j) dot += set.A(i, j) * set.s_true(j);
    CHECK(set.b(i) == dot);
  }

  params.modular = true;
  const LweSampleSet reduced = gen_lwe(params, 5);
  for (Index i = 0; i < 40; ++i) {
    std::int64_t dot = 0;
    for (int j = 0; j < 8; ++j) dot += reduced.A(i, j) * reduced.s_true(j);
    CHECK(reduced.b(i) == mod_reduce(dot, 97));
    CHECK(reduced.b(i) >= 0);
    CHECK(reduced.b(i) < 97);
  }

  // Same seed, same instance.
  const LweSampleSet again = gen_lwe(params, 5);
  CHECK(again.A == reduced.A);
  CHECK(again.b == reduced.b);
  CHECK(again.s_true == reduced.s_true);
}

TEST_CASE("gen_lwe: rounded-Gaussian error variance matches the pmf sum") {
  // Recover the error terms from a non-modular instance with known secret.
  LweParams params{4, 1000003, 100000, 1.0, false};
  const LweSampleSet set = gen_lwe(params, 6);
  double sum = 0, sum_sq = 0;
  for (Index i = 0; i < set.A.rows(); ++i) {
    std::int64_t dot = 0;
    for (int j = 0; j < 4; ++j) dot += set.A(i, j) * set.s_true(j);
    const double e = static_cast<double>(set.b(i) - dot);
    sum += e;
    sum_sq += e * e;
  }
  const double n = static_cast<double>(set.A.rows());
  const double mean = sum / n;
  const double var = sum_sq / n - mean * mean;
  CHECK(std::abs(var - rounded_gaussian_variance(1.0)) <= 0.05 * rounded_gaussian_variance(1.0));
}

TEST_CASE("ls_attack_lwe: exact recovery without reduction and sigma = 0") {
  // Any m >= n with an invertible Gram matrix recovers the secret exactly.
  LweParams params{5, 31, 6, 0.0, false};
  const LweSampleSet set = gen_lwe(params, 7);
  const LweAttackResult result = ls_attack_lwe(set, 0.0);
  CHECK(result.recovered);
  CHECK(result.s_hat == set.s_true);
  CHECK(result.heldout_count == 0);
}

TEST_CASE("ls_attack_lwe: non-modular noisy instances are solvable") {
  LweParams params{32, 97, 1600, 2.0, false};
  int recovered = 0;
  for (int seed = 0; seed < 10; ++seed) {
    const auto result = ls_attack_lwe(gen_lwe(params, derive_seed(100, seed)));
    if (result.recovered) ++recovered;
    CHECK(result.median_centered_residual <= 5.0);
  }
  CHECK(recovered == 10);
}

TEST_CASE("ls_attack_lwe: modular reduction defeats least squares") {
  LweParams params{32, 97, 1600, 2.0, true};
  int recovered = 0;
  std::vector<std::int64_t> pooled;
  for (int seed = 0; seed < 10; ++seed) {
    const auto result = ls_attack_lwe(gen_lwe(params, derive_seed(200, seed)));
    if (result.recovered) ++recovered;
    pooled.insert(pooled.end(), result.heldout_residuals.begin(),
                  result.heldout_residuals.end());
  }
  CHECK(recovered == 0);

  // Held-out residuals mod p look uniform: chi-square over the p buckets at
  // the 5% level (dof 96, critical value 119.871).
  std::vector<double> buckets(97, 0.0);
  for (const auto r : pooled) buckets[static_cast<std::size_t>(r)] += 1.0;
  const double expected = static_cast<double>(pooled.size()) / 97.0;
  double chi_sq = 0;
  for (const double obs : buckets) chi_sq += (obs - expected) * (obs - expected) / expected;
  CHECK(chi_sq <= 119.871);
}

TEST_CASE("ls_attack_lwe: parameter validation") {
  LweParams params{8, 97, 10, 0.0, false};
  const LweSampleSet set = gen_lwe(params, 8);
  CHECK_THROWS_AS(ls_attack_lwe(set, 0.9), InvalidArgument);  // train set would shrink below n
  CHECK_THROWS_AS(ls_attack_lwe(set, -0.1), InvalidArgument);
  CHECK_THROWS_AS(gen_lwe(LweParams{0, 97, 10, 0.0, false}, 1), InvalidArgument);
  CHECK_THROWS_AS(gen_lwe(LweParams{4, 1, 10, 0.0, false}, 1), InvalidArgument);
  CHECK_THROWS_AS(gen_lwe(LweParams{4, 97, 10, -1.0, false}, 1), InvalidArgument);
}
