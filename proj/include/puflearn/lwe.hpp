#pragma once

#include <cstdint>
#include <vector>

#include "puflearn/rng.hpp"
#include "puflearn/types.hpp"

namespace puflearn {

using MatI64 = Mat<std::int64_t>;
using VecI64 = Vec<std::int64_t>;

struct LweParams {
  int n = 32;               // secret dimension
  std::int64_t p = 97;      // modulus
  Index m = 1600;           // sample count
  double sigma = 2.0;       // error width before rounding
  bool modular = true;      // reduce b mod p
};

/// Samples (A, b) with b = A*s + e over the integers, reduced mod p only
/// when params.modular is set. The hidden secret is retained for evaluation.
struct LweSampleSet {
  MatI64 A;        // m x n, entries in [0, p)
  VecI64 b;        // m
  VecI64 s_true;   // n, entries in [0, p)
  LweParams params;
};

/// x mod p mapped into [0, p).
std::int64_t mod_reduce(std::int64_t x, std::int64_t p);

/// Error terms are rounded centered Gaussians of width sigma (sigma = 0
/// gives exact equations). Deterministic in the seed.
LweSampleSet gen_lwe(const LweParams& params, std::uint64_t seed);

struct LweAttackResult {
  VecI64 s_hat;                 // rounded least-squares estimate in [0, p)
  bool recovered = false;       // s_hat == s_true
  Index heldout_count = 0;
  std::vector<std::int64_t> heldout_residuals;  // (b - <a, s_hat>) mod p, in [0, p)
  double median_centered_residual = 0;          // median of min(r, p - r)
};

/// Real-valued least squares on (A, b) ignoring any modulus — the same
/// normal-equations kernel the PUF learner uses — followed by rounding into
/// [0, p). The trailing heldout_fraction of the samples is excluded from the
/// fit and used to score residuals mod p.
LweAttackResult ls_attack_lwe(const LweSampleSet& samples, double heldout_fraction = 0.2);

}  // namespace puflearn
