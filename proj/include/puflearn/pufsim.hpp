#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "puflearn/features.hpp"
#include "puflearn/rng.hpp"
#include "puflearn/types.hpp"

namespace puflearn {

/// Simulated scattering token behind an N-pixel mask, observed by an M-pixel
/// detector. T(i,j) is the complex gain from mask pixel j to detector pixel i;
/// the field amplitude at the detector is T*b and the measured intensity is
/// |T*b|^2 per pixel.
struct LinearPuf {
  Index n_mask;      // N
  Index n_detector;  // M
  CMatd T;           // M x N transmission coefficients
};

/// Weakly nonlinear token: the detector-plane field picks up correction terms
/// driven by powers of the linear field,
///   psi_i(b) = (T b)_i + sum_k eta_k (U_k b)_i |(T b)_i|^{2k},
/// so the intensity |psi|^2 is an exact polynomial of degree 4d+2 in b.
struct NonlinearPuf {
  LinearPuf base;
  int order = 1;                // d
  std::vector<double> eta;      // d strengths
  std::vector<CMatd> coupling;  // d matrices U_k, each M x N
};

using AnyPuf = std::variant<LinearPuf, NonlinearPuf>;

/// Additive per-pixel measurement noise.
struct NoiseModel {
  enum class Kind { None, BoundedUniform, TruncatedGaussian };
  Kind kind = Kind::None;
  double half_width = 0;  // BoundedUniform: support [-a, a]
  double sigma = 0;       // TruncatedGaussian: width before truncation
  double alpha = 0;       // TruncatedGaussian: accepted band |e| <= alpha

  static NoiseModel none() { return {}; }
  static NoiseModel bounded_uniform(double a);
  static NoiseModel truncated_gaussian(double sigma, double alpha);

  /// Subgaussian parameter tau_e: a bounded zero-mean variable on [-a,a]
  /// is a-subgaussian, so BoundedUniform gives a and TruncatedGaussian alpha.
  double tau() const;
  /// Exactly zero for all kinds (both supports are symmetric around 0).
  double mean() const { return 0.0; }
  std::string describe() const;
};

double sample_noise(const NoiseModel& model, Rng& rng);

/// Challenge distributions over [0,1]^N.
struct ChallengeDist {
  enum class Kind { UniformContinuous, UniformBinary, Bernoulli };
  Kind kind = Kind::UniformContinuous;
  double q = 0.5;  // Bernoulli only

  static ChallengeDist uniform() { return {Kind::UniformContinuous, 0.5}; }
  static ChallengeDist binary() { return {Kind::UniformBinary, 0.5}; }
  static ChallengeDist bernoulli(double q);
  std::string describe() const;
};

Vecd sample_challenge(const ChallengeDist& dist, Index n_mask, Rng& rng);
Matd sample_challenges(const ChallengeDist& dist, Index n_mask, Index count, Rng& rng);

/// Fresh token with i.i.d. circularly symmetric complex Gaussian coefficients
/// of per-entry variance 1/N, so clean intensities stay O(1) in the mask size.
/// Deterministic in the seed.
LinearPuf new_linear_puf(Index n_mask, Index n_detector, std::uint64_t seed);

/// Nonlinear token of the given order; coupling matrices are sampled like T.
NonlinearPuf new_nonlinear_puf(Index n_mask, Index n_detector, const std::vector<double>& eta,
                               std::uint64_t seed);

/// Detector-plane field amplitude T*b (linear tokens only).
CVecd respond_amplitude(const LinearPuf& puf, const Vecd& b);

/// Noise-free intensity response, per detector pixel.
Vecd respond_clean(const LinearPuf& puf, const Vecd& b);
Vecd respond_clean(const NonlinearPuf& puf, const Vecd& b);
Vecd respond_clean(const AnyPuf& puf, const Vecd& b);

/// Intensity response plus i.i.d. per-pixel noise.
Vecd respond(const AnyPuf& puf, const Vecd& b, const NoiseModel& noise, Rng& rng);

/// Ground-truth coefficient vector for one detector pixel in a degree-2
/// monomial basis: constant and degree-1 terms are zero, the b_j^2 term
/// carries |T(p,j)|^2 and the b_j*b_k cross term 2*Re(T(p,j) * conj(T(p,k))).
Vecd secret_of(const LinearPuf& puf, Index pixel, const MonomialBasis& basis);

Index n_mask(const AnyPuf& puf);
Index n_detector(const AnyPuf& puf);

/// Laser pose lattice for a token without a fixed source: positions on
/// [0,L]^2 at spacing 2*ell, angles on [0,pi]^2 at spacing 2*alpha.
struct OrientationGrid {
  double side;         // L
  double pos_err;      // ell
  double ang_err;      // alpha
};

/// Closed-form cap on distinguishable poses: pi^2 L^2 / (16 alpha^2 ell^2).
double orientation_bound(const OrientationGrid& grid);

struct OrientationCounts {
  std::int64_t per_axis_position;
  std::int64_t per_axis_angle;
  std::int64_t total;  // position^2 * angle^2
};
OrientationCounts orientation_lattice_counts(const OrientationGrid& grid);

/// Materialized pose lattice (x, y, theta, phi); desk-scale sizes only.
std::vector<std::array<double, 4>> enumerate_orientations(const OrientationGrid& grid);

/// Challenge/response table plus a description of the noise it was
/// collected under. Rows of challenges pair with rows of responses.
struct CrpSet {
  Matd challenges;  // m x N
  Matd responses;   // m x M
  std::string noise_desc;
};

CrpSet collect_crps(const AnyPuf& puf, const ChallengeDist& dist, Index count,
                    const NoiseModel& noise, Rng& rng);

/// PUF serialization (round-trips both kinds).
std::string puf_to_json(const AnyPuf& puf);
AnyPuf puf_from_json(const std::string& text);

}  // namespace puflearn
