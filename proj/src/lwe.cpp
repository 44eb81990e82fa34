#include "puflearn/lwe.hpp"

#include <algorithm>
#include <cmath>

#include "puflearn/errors.hpp"
#include "puflearn/linalg.hpp"

namespace puflearn {

std::int64_t mod_reduce(std::int64_t x, std::int64_t p) { return ((x % p) + p) % p; }

LweSampleSet gen_lwe(const LweParams& params, std::uint64_t seed) {
  if (params.n < 1 || params.m < 1) throw InvalidArgument("gen_lwe: n, m must be >= 1");
  if (params.p < 2) throw InvalidArgument("gen_lwe: p must be >= 2");
  if (params.sigma < 0) throw InvalidArgument("gen_lwe: sigma must be >= 0");

  Rng rng = derive_stream(seed, 0);
  LweSampleSet set;
  set.params = params;
  set.s_true.resize(params.n);
  for (int j = 0; j < params.n; ++j)
    set.s_true(j) = static_cast<std::int64_t>(rng.uniform_int(static_cast<std::uint64_t>(params.p)));

  set.A.resize(params.m, params.n);
  set.b.resize(params.m);
  for (Index i = 0; i < params.m; ++i) {
    std::int64_t dot = 0;
    for (int j = 0; j < params.n; ++j) {
      const auto a = static_cast<std::int64_t>(rng.uniform_int(static_cast<std::uint64_t>(params.p)));
      set.A(i, j) = a;
      dot += a * set.s_true(j);
    }
    const auto e = static_cast<std::int64_t>(std::llround(rng.normal(0.0, params.sigma)));
    const std::int64_t raw = dot + e;
    set.b(i) = params.modular ? mod_reduce(raw, params.p) : raw;
  }
  return set;
}

LweAttackResult ls_attack_lwe(const LweSampleSet& samples, double heldout_fraction) {
  const Index m = samples.A.rows();
  const int n = samples.params.n;
  if (heldout_fraction < 0 || heldout_fraction >= 1)
    throw InvalidArgument("ls_attack_lwe: heldout_fraction must be in [0,1)");
  Index held = static_cast<Index>(std::floor(static_cast<double>(m) * heldout_fraction));
  if (m - held < n) throw InvalidArgument("ls_attack_lwe: not enough training samples");

  const Index m_train = m - held;
  const Matd a_train = samples.A.topRows(m_train).cast<double>();
  const Vecd b_train = samples.b.head(m_train).cast<double>();

  // Same normal-equations path as the PUF fit: Cholesky on A^T A.
  const SymMatrixd gram{Matd(a_train.transpose() * a_train)};
  const Matd x = SpdSolverd(gram).solve(a_train.transpose() * b_train);

  LweAttackResult result;
  result.s_hat.resize(n);
  for (int j = 0; j < n; ++j)
    result.s_hat(j) = mod_reduce(std::llround(x(j, 0)), samples.params.p);
  result.recovered = (result.s_hat == samples.s_true);

  result.heldout_count = held;
  result.heldout_residuals.reserve(static_cast<std::size_t>(held));
  std::vector<double> centered;
  centered.reserve(static_cast<std::size_t>(held));
  const std::int64_t p = samples.params.p;
  for (Index i = m_train; i < m; ++i) {
    std::int64_t dot = 0;
    for (int j = 0; j < n; ++j) dot += samples.A(i, j) * result.s_hat(j);
    const std::int64_t r = mod_reduce(samples.b(i) - dot, p);
    result.heldout_residuals.push_back(r);
    centered.push_back(static_cast<double>(std::min(r, p - r)));
  }
  if (!centered.empty()) {
    std::sort(centered.begin(), centered.end());
    const std::size_t mid = centered.size() / 2;
    result.median_centered_residual =
        centered.size() % 2 ? centered[mid] : 0.5 * (centered[mid - 1] + centered[mid]);
  }
  return result;
}

}  // namespace puflearn
