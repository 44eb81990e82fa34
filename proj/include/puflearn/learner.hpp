#pragma once

#include <optional>
#include <string>
#include <vector>

#include "puflearn/features.hpp"
#include "puflearn/linalg.hpp"
#include "puflearn/pufsim.hpp"
#include "puflearn/rng.hpp"
#include "puflearn/types.hpp"

namespace puflearn {

/// Orthogonal diagonalization of the challenge second moment with the
/// near-null directions removed. kept holds the retained eigenvalue indices
/// (eigenvalues are sorted descending, so it is a prefix); xi_hat is the
/// smallest retained eigenvalue. P is dropped by serialization; prediction
/// does not need it.
struct WhiteningMap {
  Matd P;             // n x n orthogonal, columns ordered like eigenvalues
  Vecd eigenvalues;   // descending
  std::vector<Index> kept;
  double xi_hat = 0;

  Index full_dim() const { return eigenvalues.size(); }
  Index kept_dim() const { return static_cast<Index>(kept.size()); }
  bool has_projection() const { return P.size() > 0; }
};

/// Empirical second moment (1/m) sum_i c_i c_i^T of the expanded challenges.
SymMatrixd estimate_second_moment(const Matd& challenges, const MonomialBasis& basis);

/// Closed-form second moment for the built-in challenge distributions
/// (uniform: E[b^k] = 1/(k+1); binary/Bernoulli: E[prod b^e] = q^#support).
SymMatrixd analytic_second_moment(const MonomialBasis& basis, const ChallengeDist& dist);

/// Spectral whitening: keep eigendirections with
///   lambda > threshold_scale * n * lambda_max,
/// drop the rest. Throws NumericalError if nothing survives.
WhiteningMap whiten(const SymMatrixd& second_moment, double threshold_scale = 1e-10);

struct FitOptions {
  /// Value written into the dropped whitened coordinates before rotating
  /// back. Any constant gives the same predictions on challenges from the
  /// training distribution; 0 keeps coefficients small.
  double reembed_value = 0.0;
};

/// Per-pixel least-squares estimate in the original monomial basis. The
/// constant coefficient is split off into s0 (one per pixel) and the
/// corresponding row of s_hat is zero.
struct LearnedModel {
  MonomialBasis basis;
  WhiteningMap whitening;
  Matd s_hat;  // n_features x M
  Vecd s0;     // M

  Index n_pixels() const { return s0.size(); }
};

/// Normal-equations fit in whitened coordinates, one shared factorization
/// for all detector pixels. Throws NotPositiveDefinite when the whitened
/// Gram matrix is numerically singular (message suggests a sample count).
LearnedModel fit(const CrpSet& crps, const MonomialBasis& basis, const WhiteningMap& whitening,
                 const FitOptions& options = {});

/// Model response <expand(b), s_hat> per pixel, plus the recovered constant
/// offset unless include_offset is false.
Vecd predict(const LearnedModel& model, const Vecd& b, bool include_offset = true);

struct PacReport {
  double max_err = 0;        // worst |predict - clean| over pixels and probes
  Vecd per_pixel_max;        // same, per pixel
  std::optional<Vecd> certificate;  // sqrt(n) * ||s_tilde diff|| per pixel
  double epsilon = 0;
  bool pass = false;
  Index challenges_evaluated = 0;
};

/// Empirical accuracy check: n_samples challenges from dist plus the
/// all-zeros and all-ones corners; pass iff the worst error over all pixels
/// stays within epsilon. When the ground truth secret is available (linear
/// token, degree-2 basis, projection present) the analytic upper bound
/// sqrt(n)*||s_tilde - s_tilde_hat|| is reported per pixel.
PacReport pac_evaluate(const LearnedModel& model, const AnyPuf& puf, const ChallengeDist& dist,
                       Index n_samples, double epsilon, Rng& rng);

/// JSON: {basis, kept_indices, eigenvalues, s_hat, s0, ...extras}.
std::string model_to_json(const LearnedModel& model,
                          const std::vector<std::pair<std::string, std::string>>& extras = {});
LearnedModel model_from_json(const std::string& text);

}  // namespace puflearn
