#pragma once

#include <cstdint>
#include <vector>

#include "puflearn/bounds.hpp"
#include "puflearn/learner.hpp"
#include "puflearn/pufsim.hpp"

namespace puflearn {

/// One full attack run against a freshly generated token. Derived streams
/// off the root seed: 0 = token, 1 = pilot challenges, 2 = training CRPs,
/// 3 = accuracy probes.
struct AttackSetup {
  Index n_mask = 8;
  Index n_detector = 4;
  int degree = 2;
  ChallengeDist dist = ChallengeDist::uniform();
  NoiseModel noise = NoiseModel::none();
  double epsilon = 0.1;
  double delta = 0.1;
  Index m = 0;            // 0: take ceil(m_required) from the sample bound
  Index pilot = 0;        // 0: max(10n, 10000)
  Index pac_samples = 1000;
  double threshold_scale = 1e-10;
  std::vector<double> eta;  // nonempty: nonlinear token of this order
};

struct AttackOutcome {
  LearnedModel model;
  PacReport pac;
  double xi_hat = 0;          // pilot estimate used for whitening
  double xi_analytic = 0;     // from the closed-form second moment
  Index m_used = 0;
  Index pilot_used = 0;
  BoundReport bound;          // evaluated at xi_hat
  double wall_ms = 0;
};

AttackOutcome run_attack(const AttackSetup& setup, std::uint64_t seed);

/// Learning-curve sweep: for each value of the varied parameter, T trials
/// with independent derived seeds; reports the empirical pass rate of the
/// accuracy check and the median worst error.
struct SweepPoint {
  double value = 0;
  Index trials = 0;
  double success_rate = 0;
  double median_max_err = 0;
  double m_bound = 0;  // m_required predicted at this point's inputs
};

enum class SweepParam { SampleCount, MaskPixels, NoiseTau };

std::vector<SweepPoint> run_sweep(const AttackSetup& base, SweepParam param,
                                  const std::vector<double>& grid, Index trials,
                                  std::uint64_t seed);

}  // namespace puflearn
