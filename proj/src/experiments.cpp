#include "puflearn/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "puflearn/errors.hpp"
#include "puflearn/parallel.hpp"

namespace puflearn {

AttackOutcome run_attack(const AttackSetup& setup, std::uint64_t seed) {
  const auto t0 = std::chrono::steady_clock::now();

  AnyPuf puf;
  if (setup.eta.empty())
    puf = new_linear_puf(setup.n_mask, setup.n_detector, derive_seed(seed, 0));
  else
    puf = new_nonlinear_puf(setup.n_mask, setup.n_detector, setup.eta, derive_seed(seed, 0));

  const MonomialBasis basis(static_cast<int>(setup.n_mask), setup.degree);
  const Index n = basis.size();

  AttackOutcome outcome;
  outcome.pilot_used = setup.pilot > 0 ? setup.pilot : std::max<Index>(10 * n, 10000);

  Rng pilot_rng = derive_stream(seed, 1);
  const Matd pilot = sample_challenges(setup.dist, setup.n_mask, outcome.pilot_used, pilot_rng);
  const WhiteningMap whitening = whiten(estimate_second_moment(pilot, basis), setup.threshold_scale);
  outcome.xi_hat = whitening.xi_hat;
  outcome.xi_analytic = whiten(analytic_second_moment(basis, setup.dist), setup.threshold_scale).xi_hat;

  BoundInputs inputs;
  inputs.n = n;
  inputs.n_mask = setup.n_mask;
  inputs.n_detector = setup.n_detector;
  inputs.epsilon = setup.epsilon;
  inputs.delta = setup.delta;
  inputs.tau_e = setup.noise.tau();
  inputs.xi = whitening.xi_hat;
  inputs.order = static_cast<int>(setup.eta.size());
  outcome.bound = sample_bound(inputs);

  outcome.m_used = setup.m > 0 ? setup.m : static_cast<Index>(std::ceil(outcome.bound.m_required));

  Rng crp_rng = derive_stream(seed, 2);
  const CrpSet crps = collect_crps(puf, setup.dist, outcome.m_used, setup.noise, crp_rng);
  outcome.model = fit(crps, basis, whitening);

  Rng pac_rng = derive_stream(seed, 3);
  outcome.pac =
      pac_evaluate(outcome.model, puf, setup.dist, setup.pac_samples, setup.epsilon, pac_rng);

  outcome.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return outcome;
}

std::vector<SweepPoint> run_sweep(const AttackSetup& base, SweepParam param,
                                  const std::vector<double>& grid, Index trials,
                                  std::uint64_t seed) {
  if (grid.empty() || trials < 1) throw InvalidArgument("run_sweep: empty grid or trials < 1");

  struct Cell {
    bool pass = false;
    double max_err = 0;
  };
  std::vector<Cell> cells(grid.size() * static_cast<std::size_t>(trials));

  parallel_for(cells.size(), [&](std::size_t flat) {
    const std::size_t point = flat / static_cast<std::size_t>(trials);
    const std::size_t trial = flat % static_cast<std::size_t>(trials);
    AttackSetup setup = base;
    switch (param) {
      case SweepParam::SampleCount:
        setup.m = static_cast<Index>(grid[point]);
        break;
      case SweepParam::MaskPixels:
        setup.n_mask = static_cast<Index>(grid[point]);
        break;
      case SweepParam::NoiseTau:
        setup.noise = NoiseModel::bounded_uniform(grid[point]);
        break;
    }
    const auto outcome = run_attack(setup, derive_seed(derive_seed(seed, point), trial));
    cells[flat] = {outcome.pac.pass, outcome.pac.max_err};
  });

  std::vector<SweepPoint> points(grid.size());
  for (std::size_t point = 0; point < grid.size(); ++point) {
    SweepPoint& sp = points[point];
    sp.value = grid[point];
    sp.trials = trials;
    std::vector<double> errs;
    Index passes = 0;
    for (Index trial = 0; trial < trials; ++trial) {
      const Cell& c = cells[point * static_cast<std::size_t>(trials) + static_cast<std::size_t>(trial)];
      errs.push_back(c.max_err);
      if (c.pass) ++passes;
    }
    std::sort(errs.begin(), errs.end());
    const std::size_t mid = errs.size() / 2;
    sp.median_max_err = errs.size() % 2 ? errs[mid] : 0.5 * (errs[mid - 1] + errs[mid]);
    sp.success_rate = static_cast<double>(passes) / static_cast<double>(trials);

    // Bound prediction at this point's effective inputs (xi from the
    // analytic second moment so the column does not wobble across trials).
    AttackSetup setup = base;
    if (param == SweepParam::MaskPixels) setup.n_mask = static_cast<Index>(grid[point]);
    if (param == SweepParam::NoiseTau) setup.noise = NoiseModel::bounded_uniform(grid[point]);
    const MonomialBasis basis(static_cast<int>(setup.n_mask), setup.degree);
    BoundInputs inputs;
    inputs.n = basis.size();
    inputs.n_mask = setup.n_mask;
    inputs.n_detector = setup.n_detector;
    inputs.epsilon = setup.epsilon;
    inputs.delta = setup.delta;
    inputs.tau_e = setup.noise.tau();
    inputs.xi = whiten(analytic_second_moment(basis, setup.dist), setup.threshold_scale).xi_hat;
    sp.m_bound = sample_bound(inputs).m_required;
  }
  return points;
}

}  // namespace puflearn
