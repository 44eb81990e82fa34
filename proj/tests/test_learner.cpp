#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "puflearn/experiments.hpp"
#include "puflearn/learner.hpp"

using namespace puflearn;

TEST_CASE("estimate_second_moment: small exact cases") {
  const MonomialBasis basis(2, 2);

  Matd single(1, 2);
  single << 0.5, 0.25;
  const Vecd c = expand(basis, Vecd(single.row(0).transpose()));
  const SymMatrixd moment = estimate_second_moment(single, basis);
  CHECK((moment.matrix() - c * c.transpose()).cwiseAbs().maxCoeff() <= 1e-15);

  const SymMatrixd zero_moment = estimate_second_moment(Matd(Matd::Zero(5, 2)), basis);
  CHECK(zero_moment(0, 0) == 1.0);
  CHECK(zero_moment.matrix().cwiseAbs().sum() == 1.0);

  CHECK_THROWS_AS(estimate_second_moment(Matd(Matd::Zero(0, 2)), basis), InvalidArgument);
  CHECK_THROWS_AS(estimate_second_moment(Matd(Matd::Zero(3, 4)), basis), DimensionMismatch);
}

TEST_CASE("estimate_second_moment: uniform moments match closed forms") {
  const MonomialBasis basis(2, 2);
  Rng rng(101);
  const Index m = 1000000;
  const Matd challenges = sample_challenges(ChallengeDist::uniform(), 2, m, rng);
  const SymMatrixd moment = estimate_second_moment(challenges, basis);

  const Index i_b1 = *basis.index_of({1, 0});
  const Index i_b1sq = *basis.index_of({2, 0});
  const Index i_b2sq = *basis.index_of({0, 2});

  // E[b^k] = 1/(k+1); three Monte Carlo standard errors of slack.
  const auto near = [&](double got, double expect, double var) {
    return std::abs(got - expect) <= 3.0 * std::sqrt(var / static_cast<double>(m));
  };
  // Var(b) = 1/12; Var(b^2) = 1/5 - 1/9; Var(b^3) = 1/7 - 1/16; Var(b1^2 b2^2) = 1/25 - 1/81.
  CHECK(near(moment(0, i_b1), 0.5, 1.0 / 12));
  CHECK(near(moment(0, i_b1sq), 1.0 / 3, 1.0 / 5 - 1.0 / 9));
  CHECK(near(moment(i_b1, i_b1sq), 0.25, 1.0 / 7 - 1.0 / 16));
  CHECK(near(moment(i_b1sq, i_b2sq), 1.0 / 9, 1.0 / 25 - 1.0 / 81));

  // Analytic second moment agrees entrywise within the same margins.
  const SymMatrixd closed = analytic_second_moment(basis, ChallengeDist::uniform());
  CHECK((moment.matrix() - closed.matrix()).cwiseAbs().maxCoeff() <= 3e-3);

  // Positive semidefinite to working precision.
  const auto eig = sym_eig(moment);
  CHECK(eig.lambda_min() >= -1e-12 * eig.lambda_max());
}

TEST_CASE("analytic_second_moment: binary and Bernoulli closed forms") {
  const MonomialBasis basis(2, 2);
  const SymMatrixd bin = analytic_second_moment(basis, ChallengeDist::binary());
  // E[b1^a b2^c] = 0.5^#{nonzero exponents} on {0,1}^2.
  CHECK(bin(0, 0) == 1.0);
  CHECK(bin(*basis.index_of({1, 0}), *basis.index_of({2, 0})) == 0.5);   // E[b1^3]
  CHECK(bin(*basis.index_of({1, 0}), *basis.index_of({0, 1})) == 0.25);  // E[b1 b2]

  const SymMatrixd bern = analytic_second_moment(basis, ChallengeDist::bernoulli(0.3));
  CHECK(bern(*basis.index_of({1, 0}), *basis.index_of({1, 0})) == doctest::Approx(0.3));
  CHECK(bern(*basis.index_of({1, 0}), *basis.index_of({0, 1})) == doctest::Approx(0.09));
}

TEST_CASE("whiten: identity, dead pixel, degenerate input") {
  const Index n = 6;
  const auto id_map = whiten(SymMatrixd(Matd::Identity(n, n)));
  CHECK(id_map.kept_dim() == n);
  CHECK(id_map.xi_hat == doctest::Approx(1.0).epsilon(1e-12));

  // Mask pixel 2 dead: every monomial touching it drops out (b2, b1 b2, b2^2).
  Rng rng(111);
  const MonomialBasis basis(2, 2);
  Matd challenges(500, 2);
  for (Index i = 0; i < 500; ++i) {
    challenges(i, 0) = rng.uniform();
    challenges(i, 1) = 0.0;
  }
  const auto dead = whiten(estimate_second_moment(challenges, basis));
  CHECK(dead.kept_dim() == 3);
  CHECK(dead.xi_hat > 0.0);

  CHECK_THROWS_AS(whiten(SymMatrixd(Matd::Zero(4, 4))), NumericalError);
}

TEST_CASE("whiten: binary challenges drop exactly N collinear directions") {
  const MonomialBasis basis(4, 2);
  CHECK(basis.size() == 15);

  // Exact reduction of the analytic moment matrix gives rank 11.
  const SymMatrixd closed = analytic_second_moment(basis, ChallengeDist::binary());
  CHECK(oracles::row_reduction_rank(closed.matrix(), 1e-12) == 11);

  const auto map_closed = whiten(closed);
  CHECK(map_closed.kept_dim() == 11);

  Rng rng(112);
  const Matd challenges = sample_challenges(ChallengeDist::binary(), 4, 4000, rng);
  const auto map_empirical = whiten(estimate_second_moment(challenges, basis));
  CHECK(map_empirical.kept_dim() == 11);
  CHECK(map_empirical.xi_hat > 0.0);
}

TEST_CASE("fit: noiseless interpolation recovers the exact secret") {
  const Index n_mask = 3, n_pix = 2;
  const LinearPuf puf = new_linear_puf(n_mask, n_pix, 200);
  const MonomialBasis basis(3, 2);
  Rng rng(201);
  const Index m = basis.size();  // exact interpolation
  const Matd challenges = sample_challenges(ChallengeDist::uniform(), n_mask, m, rng);
  Matd responses(m, n_pix);
  for (Index i = 0; i < m; ++i)
    responses.row(i) = respond_clean(puf, Vecd(challenges.row(i).transpose())).transpose();

  const auto whitening = whiten(estimate_second_moment(challenges, basis), 1e-14);
  const LearnedModel model = fit({challenges, responses, "none"}, basis, whitening);

  for (Index pix = 0; pix < n_pix; ++pix) {
    Vecd estimated = model.s_hat.col(pix);
    estimated(0) = model.s0(pix);
    const Vecd truth = secret_of(puf, pix, basis);
    CHECK((estimated - truth).cwiseAbs().maxCoeff() <= 1e-6);
  }
}

TEST_CASE("fit: zero responses give a zero model") {
  const MonomialBasis basis(2, 2);
  Rng rng(202);
  const Matd challenges = sample_challenges(ChallengeDist::uniform(), 2, 50, rng);
  const auto whitening = whiten(estimate_second_moment(challenges, basis));
  const LearnedModel model = fit({challenges, Matd(Matd::Zero(50, 1)), "none"}, basis, whitening);
  CHECK(model.s_hat.cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(std::abs(model.s0(0)) <= 1e-12);
}

TEST_CASE("fit: singular whitened Gram fails with a sample-count suggestion") {
  const MonomialBasis basis(2, 2);
  Rng rng(203);
  const Matd pilot = sample_challenges(ChallengeDist::uniform(), 2, 500, rng);
  const auto whitening = whiten(estimate_second_moment(pilot, basis));
  const Matd challenges = sample_challenges(ChallengeDist::uniform(), 2, 4, rng);  // m < n
  try {
    fit({challenges, Matd(Matd::Zero(4, 1)), "none"}, basis, whitening);
    FAIL("expected NotPositiveDefinite");
  } catch (const NotPositiveDefinite& e) {
    CHECK(std::string(e.what()).find("suggest m >=") != std::string::npos);
  }
}

TEST_CASE("fit: bounded noise keeps fresh prediction error small (Monte Carlo)") {
  // a = 0.05, N = 4, M = 1, m = 50 * 15; the worst error over 10^4 fresh
  // challenges stays under the noise half-width in at least 95 of 100 runs.
  const MonomialBasis basis(4, 2);
  int good = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::uint64_t seed = derive_seed(300, trial);
    const LinearPuf puf = new_linear_puf(4, 1, derive_seed(seed, 0));
    Rng rng = derive_stream(seed, 1);
    const Index m = 50 * basis.size();
    const Matd challenges = sample_challenges(ChallengeDist::uniform(), 4, m, rng);
    const NoiseModel noise = NoiseModel::bounded_uniform(0.05);
    Matd responses(m, 1);
    for (Index i = 0; i < m; ++i)
      responses(i, 0) =
          respond_clean(puf, Vecd(challenges.row(i).transpose()))(0) + sample_noise(noise, rng);
    const auto whitening = whiten(estimate_second_moment(challenges, basis));
    const LearnedModel model = fit({challenges, responses, noise.describe()}, basis, whitening);

    double worst = 0;
    for (int k = 0; k < 10000; ++k) {
      const Vecd b = sample_challenge(ChallengeDist::uniform(), 4, rng);
      worst = std::max(worst,
                       std::abs(predict(model, b)(0) - respond_clean(puf, b)(0)));
    }
    if (worst < 0.05) ++good;
  }
  CHECK(good >= 95);
}

TEST_CASE("predict: ground-truth coefficients reproduce the clean response") {
  const LinearPuf puf = new_linear_puf(4, 2, 400);
  const MonomialBasis basis(4, 2);
  LearnedModel model;
  model.basis = basis;
  model.s_hat.resize(basis.size(), 2);
  for (Index pix = 0; pix < 2; ++pix) model.s_hat.col(pix) = secret_of(puf, pix, basis);
  model.s0 = Vecd::Zero(2);

  Rng rng(401);
  for (int trial = 0; trial < 50; ++trial) {
    const Vecd b = sample_challenge(ChallengeDist::uniform(), 4, rng);
    CHECK((predict(model, b) - respond_clean(puf, b)).cwiseAbs().maxCoeff() <= 1e-12);
  }

  // b = 0 exposes the constant offset.
  model.s0 << 0.25, -0.5;
  const Vecd at_zero = predict(model, Vecd(Vecd::Zero(4)));
  CHECK(at_zero(0) == 0.25);
  CHECK(at_zero(1) == -0.5);
  CHECK(predict(model, Vecd(Vecd::Zero(4)), false)(0) == 0.0);

  CHECK_THROWS_AS(predict(model, Vecd(Vecd::Zero(3))), DimensionMismatch);
}

TEST_CASE("predict agrees with the pow()-based monomial oracle") {
  const MonomialBasis basis(3, 2);
  Rng rng(402);
  LearnedModel model;
  model.basis = basis;
  model.s_hat.resize(basis.size(), 1);
  for (Index i = 0; i < basis.size(); ++i) model.s_hat(i, 0) = rng.normal();
  model.s_hat(0, 0) = 0.0;
  model.s0 = Vecd::Zero(1);
  for (int trial = 0; trial < 30; ++trial) {
    const Vecd b = sample_challenge(ChallengeDist::uniform(), 3, rng);
    const double reference = oracles::eval_monomial_sum(basis, model.s_hat.col(0), b);
    CHECK(std::abs(predict(model, b)(0) - reference) <= 1e-12);
  }
}

TEST_CASE("pac_evaluate: exact model passes; corner perturbation is caught") {
  const LinearPuf puf = new_linear_puf(3, 2, 500);
  const AnyPuf any = puf;
  const MonomialBasis basis(3, 2);
  LearnedModel model;
  model.basis = basis;
  model.s_hat.resize(basis.size(), 2);
  for (Index pix = 0; pix < 2; ++pix) model.s_hat.col(pix) = secret_of(puf, pix, basis);
  model.s0 = Vecd::Zero(2);

  Rng rng(501);
  const PacReport exact = pac_evaluate(model, any, ChallengeDist::uniform(), 500, 1e-9, rng);
  CHECK(exact.max_err <= 1e-10);
  CHECK(exact.pass);
  CHECK(exact.challenges_evaluated == 502);

  // Bump the b1*b2 coefficient: the all-ones corner sees the full epsilon.
  const double eps = 0.03;
  LearnedModel bumped = model;
  bumped.s_hat(*basis.index_of({1, 1, 0}), 0) += eps;
  Rng rng2(502);
  const PacReport report = pac_evaluate(bumped, any, ChallengeDist::uniform(), 500, eps / 2, rng2);
  CHECK(report.max_err >= eps * (1 - 1e-9));
  CHECK_FALSE(report.pass);
}

TEST_CASE("pac_evaluate: analytic certificate bounds the observed error") {
  const AttackSetup setup{.n_mask = 4,
                          .n_detector = 2,
                          .degree = 2,
                          .dist = ChallengeDist::uniform(),
                          .noise = NoiseModel::bounded_uniform(0.02),
                          .m = 4000,
                          .pilot = 4000,
                          .pac_samples = 500};
  const AttackOutcome outcome = run_attack(setup, 77);
  REQUIRE(outcome.pac.certificate.has_value());
  for (Index pix = 0; pix < 2; ++pix)
    CHECK(outcome.pac.per_pixel_max(pix) <= (*outcome.pac.certificate)(pix) + 1e-12);
}

TEST_CASE("estimator error identity: fit difference equals the noise image") {
  // In whitened coordinates s_hat - s_true must equal (C~^T C~)^-1 C~^T e
  // recomputed directly from the injected noise.
  Rng rng(601);
  for (int instance = 0; instance < 5; ++instance) {
    const LinearPuf puf = new_linear_puf(3, 2, derive_seed(600, instance));
    const MonomialBasis basis(3, 2);
    const Index n = basis.size(), m = 500;
    const Matd challenges = sample_challenges(ChallengeDist::uniform(), 3, m, rng);
    const NoiseModel noise = NoiseModel::bounded_uniform(0.05);

    Matd clean(m, 2), noise_draws(m, 2);
    for (Index i = 0; i < m; ++i) {
      clean.row(i) = respond_clean(puf, Vecd(challenges.row(i).transpose())).transpose();
      for (Index pix = 0; pix < 2; ++pix) noise_draws(i, pix) = sample_noise(noise, rng);
    }
    const Matd responses = clean + noise_draws;

    const auto whitening = whiten(estimate_second_moment(challenges, basis));
    const LearnedModel model = fit({challenges, responses, noise.describe()}, basis, whitening);

    // Dense whitened challenge matrix, built independently of fit's streaming.
    const Index r = whitening.kept_dim();
    Matd c_tilde(m, r);
    for (Index i = 0; i < m; ++i) {
      const Vecd c = expand(basis, Vecd(challenges.row(i).transpose()));
      for (Index k = 0; k < r; ++k)
        c_tilde(i, k) = whitening.P.col(whitening.kept[static_cast<std::size_t>(k)]).dot(c);
    }
    const Matd direct = oracles::gauss_solve(Matd(c_tilde.transpose() * c_tilde),
                                             Matd(c_tilde.transpose() * noise_draws));

    for (Index pix = 0; pix < 2; ++pix) {
      Vecd s_hat_full = model.s_hat.col(pix);
      s_hat_full(0) = model.s0(pix);
      const Vecd diff_full = s_hat_full - secret_of(puf, pix, basis);
      const Vecd diff_tilde = whitening.P.transpose() * diff_full;
      for (Index k = 0; k < r; ++k)
        CHECK(std::abs(diff_tilde(whitening.kept[static_cast<std::size_t>(k)]) - direct(k, pix)) <=
              1e-8);
    }
  }
}

TEST_CASE("whitening invariance: re-embedded constant does not change predictions") {
  const LinearPuf puf = new_linear_puf(4, 1, 700);
  const MonomialBasis basis(4, 2);
  Rng rng(701);
  const Index m = 2000;
  const Matd challenges = sample_challenges(ChallengeDist::binary(), 4, m, rng);
  Matd responses(m, 1);
  for (Index i = 0; i < m; ++i)
    responses(i, 0) = respond_clean(puf, Vecd(challenges.row(i).transpose()))(0);
  const CrpSet crps{challenges, responses, "none"};
  const auto whitening = whiten(estimate_second_moment(challenges, basis));
  REQUIRE(whitening.kept_dim() == 11);

  const LearnedModel zero = fit(crps, basis, whitening, {.reembed_value = 0.0});
  const LearnedModel one = fit(crps, basis, whitening, {.reembed_value = 1.0});
  for (int trial = 0; trial < 200; ++trial) {
    const Vecd b = sample_challenge(ChallengeDist::binary(), 4, rng);
    CHECK(std::abs(predict(zero, b)(0) - predict(one, b)(0)) <= 1e-10);
  }
}

TEST_CASE("rotation consistency: <c, s> = <P^T c, P^T s>") {
  Rng rng(801);
  const MonomialBasis basis(3, 2);
  const auto whitening = whiten(analytic_second_moment(basis, ChallengeDist::uniform()));
  for (int trial = 0; trial < 50; ++trial) {
    Vecd c(basis.size()), s(basis.size());
    for (Index i = 0; i < basis.size(); ++i) {
      c(i) = rng.normal();
      s(i) = rng.normal();
    }
    const double plain = c.dot(s);
    const double rotated = (whitening.P.transpose() * c).dot(whitening.P.transpose() * s);
    CHECK(std::abs(plain - rotated) <= 1e-10 * std::max(1.0, std::abs(plain)));
  }
}

TEST_CASE("learning curve: median worst error decays as m doubles") {
  const std::vector<double> grid{100, 200, 400, 800, 1600};
  AttackSetup base{.n_mask = 3,
                   .n_detector = 1,
                   .degree = 2,
                   .dist = ChallengeDist::uniform(),
                   .noise = NoiseModel::bounded_uniform(0.05),
                   .pilot = 3000,
                   .pac_samples = 500};
  const auto points = run_sweep(base, SweepParam::SampleCount, grid, 20, 900);
  REQUIRE(points.size() == 5);
  for (std::size_t i = 0; i + 1 < points.size(); ++i)
    CHECK(points[i + 1].median_max_err <= points[i].median_max_err);
}

TEST_CASE("noiseless exactness on fresh challenges (linear and nonlinear)") {
  // Linear, degree 2.
  {
    const AttackSetup setup{.n_mask = 4,
                            .n_detector = 2,
                            .degree = 2,
                            .dist = ChallengeDist::uniform(),
                            .noise = NoiseModel::none(),
                            .m = 100,
                            .pilot = 2000,
                            .pac_samples = 10000};
    const AttackOutcome outcome = run_attack(setup, 1000);
    CHECK(outcome.pac.max_err <= 1e-8);
  }
  // Nonlinear, degree 4d+2 = 6, with a small whitening threshold so the
  // ill-conditioned high-degree directions are retained.
  {
    const AttackSetup setup{.n_mask = 2,
                            .n_detector = 1,
                            .degree = 6,
                            .dist = ChallengeDist::uniform(),
                            .noise = NoiseModel::none(),
                            .m = 500,
                            .pilot = 5000,
                            .pac_samples = 10000,
                            .threshold_scale = 1e-15,
                            .eta = {0.05}};
    const AttackOutcome outcome = run_attack(setup, 1001);
    CHECK(outcome.pac.max_err <= 1e-8);
  }
}

TEST_CASE("model JSON round-trip preserves predictions bit-for-bit") {
  const AttackSetup setup{.n_mask = 3,
                          .n_detector = 2,
                          .degree = 2,
                          .dist = ChallengeDist::uniform(),
                          .noise = NoiseModel::bounded_uniform(0.05),
                          .m = 1000,
                          .pilot = 2000,
                          .pac_samples = 100};
  const AttackOutcome outcome = run_attack(setup, 1100);
  const LearnedModel reloaded = model_from_json(model_to_json(outcome.model));
  CHECK(reloaded.s_hat == outcome.model.s_hat);
  CHECK(reloaded.s0 == outcome.model.s0);
  CHECK(reloaded.whitening.kept == outcome.model.whitening.kept);
  CHECK_FALSE(reloaded.whitening.has_projection());

  Rng rng(1101);
  for (int trial = 0; trial < 20; ++trial) {
    const Vecd b = sample_challenge(ChallengeDist::uniform(), 3, rng);
    CHECK(predict(reloaded, b) == predict(outcome.model, b));
  }
}
