#include "puflearn/pufsim.hpp"

#include <cmath>
#include <complex>
#include <numbers>

#include <json.hpp>

#include "puflearn/errors.hpp"

namespace puflearn {

NoiseModel NoiseModel::bounded_uniform(double a) {
  if (a < 0) throw InvalidArgument("NoiseModel: half width must be >= 0");
  NoiseModel m;
  m.kind = Kind::BoundedUniform;
  m.half_width = a;
  return m;
}

NoiseModel NoiseModel::truncated_gaussian(double sigma, double alpha) {
  if (sigma < 0) throw InvalidArgument("NoiseModel: sigma must be >= 0");
  if (alpha <= 0) throw InvalidArgument("NoiseModel: truncation alpha must be > 0");
  NoiseModel m;
  m.kind = Kind::TruncatedGaussian;
  m.sigma = sigma;
  m.alpha = alpha;
  return m;
}

double NoiseModel::tau() const {
  switch (kind) {
    case Kind::None: return 0.0;
    case Kind::BoundedUniform: return half_width;
    case Kind::TruncatedGaussian: return alpha;
  }
  return 0.0;
}

std::string NoiseModel::describe() const {
  switch (kind) {
    case Kind::None: return "none";
    case Kind::BoundedUniform: return "uniform(a=" + std::to_string(half_width) + ")";
    case Kind::TruncatedGaussian:
      return "tgauss(sigma=" + std::to_string(sigma) + ",alpha=" + std::to_string(alpha) + ")";
  }
  return "?";
}

double sample_noise(const NoiseModel& model, Rng& rng) {
  switch (model.kind) {
    case NoiseModel::Kind::None: return 0.0;
    case NoiseModel::Kind::BoundedUniform:
      return rng.uniform(-model.half_width, model.half_width);
    case NoiseModel::Kind::TruncatedGaussian: {
      // Oracle-side rejection: resample until the draw lands in the band.
      double e;
      do {
        e = rng.normal(0.0, model.sigma);
      } while (std::abs(e) > model.alpha);
      return e;
    }
  }
  return 0.0;
}

ChallengeDist ChallengeDist::bernoulli(double q) {
  if (q < 0 || q > 1) throw InvalidArgument("ChallengeDist: q must be in [0,1]");
  return {Kind::Bernoulli, q};
}

std::string ChallengeDist::describe() const {
  switch (kind) {
    case Kind::UniformContinuous: return "uniform";
    case Kind::UniformBinary: return "binary";
    case Kind::Bernoulli: return "bernoulli(q=" + std::to_string(q) + ")";
  }
  return "?";
}

Vecd sample_challenge(const ChallengeDist& dist, Index n_mask, Rng& rng) {
  Vecd b(n_mask);
  switch (dist.kind) {
    case ChallengeDist::Kind::UniformContinuous:
      for (Index j = 0; j < n_mask; ++j) b(j) = rng.uniform();
      break;
    case ChallengeDist::Kind::UniformBinary:
      for (Index j = 0; j < n_mask; ++j) b(j) = (rng.next_u64() >> 63) ? 1.0 : 0.0;
      break;
    case ChallengeDist::Kind::Bernoulli:
      for (Index j = 0; j < n_mask; ++j) b(j) = rng.uniform() < dist.q ? 1.0 : 0.0;
      break;
  }
  return b;
}

Matd sample_challenges(const ChallengeDist& dist, Index n_mask, Index count, Rng& rng) {
  Matd out(count, n_mask);
  for (Index i = 0; i < count; ++i) out.row(i) = sample_challenge(dist, n_mask, rng).transpose();
  return out;
}

namespace {

CMatd random_transmission(Index rows, Index cols, Rng& rng) {
  // Circularly symmetric complex Gaussian, per-entry variance 1/cols.
  const double comp_sd = std::sqrt(1.0 / (2.0 * static_cast<double>(cols)));
  CMatd t(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j)
      t(i, j) = std::complex<double>(rng.normal(0.0, comp_sd), rng.normal(0.0, comp_sd));
  return t;
}

void check_challenge(Index expected, const Vecd& b) {
  if (b.size() != expected)
    throw DimensionMismatch("challenge has " + std::to_string(b.size()) + " pixels, PUF mask has " +
                            std::to_string(expected));
}

}  // namespace

LinearPuf new_linear_puf(Index n_mask, Index n_detector, std::uint64_t seed) {
  if (n_mask < 1 || n_detector < 1) throw InvalidArgument("new_linear_puf: need N, M >= 1");
  Rng rng = derive_stream(seed, 0);
  return {n_mask, n_detector, random_transmission(n_detector, n_mask, rng)};
}

NonlinearPuf new_nonlinear_puf(Index n_mask, Index n_detector, const std::vector<double>& eta,
                               std::uint64_t seed) {
  if (eta.empty()) throw InvalidArgument("new_nonlinear_puf: need at least one eta");
  NonlinearPuf puf;
  puf.base = new_linear_puf(n_mask, n_detector, seed);
  puf.order = static_cast<int>(eta.size());
  puf.eta = eta;
  puf.coupling.reserve(eta.size());
  for (std::size_t k = 0; k < eta.size(); ++k) {
    Rng rng = derive_stream(seed, k + 1);
    puf.coupling.push_back(random_transmission(n_detector, n_mask, rng));
  }
  return puf;
}

CVecd respond_amplitude(const LinearPuf& puf, const Vecd& b) {
  check_challenge(puf.n_mask, b);
  return puf.T * b.cast<std::complex<double>>();
}

Vecd respond_clean(const LinearPuf& puf, const Vecd& b) {
  return respond_amplitude(puf, b).cwiseAbs2();
}

Vecd respond_clean(const NonlinearPuf& puf, const Vecd& b) {
  check_challenge(puf.base.n_mask, b);
  const CVecd bc = b.cast<std::complex<double>>();
  const CVecd linear = puf.base.T * bc;
  CVecd psi = linear;
  for (int k = 1; k <= puf.order; ++k) {
    const CVecd driven = puf.coupling[static_cast<std::size_t>(k - 1)] * bc;
    psi += puf.eta[static_cast<std::size_t>(k - 1)] *
           driven.cwiseProduct(linear.cwiseAbs2().array().pow(k).matrix().cast<std::complex<double>>());
  }
  return psi.cwiseAbs2();
}

Vecd respond_clean(const AnyPuf& puf, const Vecd& b) {
  return std::visit([&](const auto& p) { return respond_clean(p, b); }, puf);
}

Vecd respond(const AnyPuf& puf, const Vecd& b, const NoiseModel& noise, Rng& rng) {
  Vecd r = respond_clean(puf, b);
  for (Index i = 0; i < r.size(); ++i) r(i) += sample_noise(noise, rng);
  return r;
}

Vecd secret_of(const LinearPuf& puf, Index pixel, const MonomialBasis& basis) {
  if (basis.max_degree() != 2) throw InvalidArgument("secret_of: basis degree must be 2");
  if (basis.n_vars() != puf.n_mask) throw DimensionMismatch("secret_of: basis/mask size mismatch");
  if (pixel < 0 || pixel >= puf.n_detector) throw InvalidArgument("secret_of: pixel out of range");
  // |sum_j b_j t_j|^2 = sum_j |t_j|^2 b_j^2 + sum_{j<k} 2 Re(t_j t_k^*) b_j b_k
  Vecd s = Vecd::Zero(basis.size());
  std::vector<int> exp(static_cast<std::size_t>(puf.n_mask), 0);
  for (Index j = 0; j < puf.n_mask; ++j) {
    exp[static_cast<std::size_t>(j)] = 2;
    s(*basis.index_of(exp)) = std::norm(puf.T(pixel, j));
    exp[static_cast<std::size_t>(j)] = 1;
    for (Index k = j + 1; k < puf.n_mask; ++k) {
      exp[static_cast<std::size_t>(k)] = 1;
      s(*basis.index_of(exp)) = 2.0 * std::real(puf.T(pixel, j) * std::conj(puf.T(pixel, k)));
      exp[static_cast<std::size_t>(k)] = 0;
    }
    exp[static_cast<std::size_t>(j)] = 0;
  }
  return s;
}

Index n_mask(const AnyPuf& puf) {
  return std::visit(
      [](const auto& p) {
        if constexpr (std::is_same_v<std::decay_t<decltype(p)>, LinearPuf>)
          return p.n_mask;
        else
          return p.base.n_mask;
      },
      puf);
}

Index n_detector(const AnyPuf& puf) {
  return std::visit(
      [](const auto& p) {
        if constexpr (std::is_same_v<std::decay_t<decltype(p)>, LinearPuf>)
          return p.n_detector;
        else
          return p.base.n_detector;
      },
      puf);
}

double orientation_bound(const OrientationGrid& grid) {
  if (grid.side <= 0 || grid.pos_err <= 0 || grid.ang_err <= 0)
    throw InvalidArgument("orientation_bound: L, ell, alpha must be > 0");
  const double pi2 = std::numbers::pi * std::numbers::pi;
  return pi2 * grid.side * grid.side /
         (16.0 * grid.ang_err * grid.ang_err * grid.pos_err * grid.pos_err);
}

namespace {

std::int64_t axis_count(double extent, double spacing) {
  // Lattice points 0, spacing, 2*spacing, ... within [0, extent]; the guard
  // keeps exact multiples (extent == k*spacing) from flooring down.
  const double ratio = extent / spacing;
  return static_cast<std::int64_t>(std::floor(ratio * (1.0 + 4e-16))) + 1;
}

}  // namespace

OrientationCounts orientation_lattice_counts(const OrientationGrid& grid) {
  if (grid.side <= 0 || grid.pos_err <= 0 || grid.ang_err <= 0)
    throw InvalidArgument("orientation lattice: L, ell, alpha must be > 0");
  OrientationCounts c{};
  c.per_axis_position = axis_count(grid.side, 2.0 * grid.pos_err);
  c.per_axis_angle = axis_count(std::numbers::pi, 2.0 * grid.ang_err);
  c.total = c.per_axis_position * c.per_axis_position * c.per_axis_angle * c.per_axis_angle;
  return c;
}

std::vector<std::array<double, 4>> enumerate_orientations(const OrientationGrid& grid) {
  const auto counts = orientation_lattice_counts(grid);
  std::vector<std::array<double, 4>> poses;
  poses.reserve(static_cast<std::size_t>(counts.total));
  const double ds = 2.0 * grid.pos_err;
  const double da = 2.0 * grid.ang_err;
  for (std::int64_t ix = 0; ix < counts.per_axis_position; ++ix)
    for (std::int64_t iy = 0; iy < counts.per_axis_position; ++iy)
      for (std::int64_t it = 0; it < counts.per_axis_angle; ++it)
        for (std::int64_t ip = 0; ip < counts.per_axis_angle; ++ip)
          poses.push_back({static_cast<double>(ix) * ds, static_cast<double>(iy) * ds,
                           static_cast<double>(it) * da, static_cast<double>(ip) * da});
  return poses;
}

CrpSet collect_crps(const AnyPuf& puf, const ChallengeDist& dist, Index count,
                    const NoiseModel& noise, Rng& rng) {
  if (count < 1) throw InvalidArgument("collect_crps: need count >= 1");
  CrpSet set;
  set.challenges.resize(count, n_mask(puf));
  set.responses.resize(count, n_detector(puf));
  for (Index i = 0; i < count; ++i) {
    const Vecd b = sample_challenge(dist, n_mask(puf), rng);
    set.challenges.row(i) = b.transpose();
    set.responses.row(i) = respond(puf, b, noise, rng).transpose();
  }
  set.noise_desc = noise.describe();
  return set;
}

namespace {

nlohmann::json matrix_parts(const CMatd& m, bool real_part) {
  nlohmann::json arr = nlohmann::json::array();
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j)
      arr.push_back(real_part ? m(i, j).real() : m(i, j).imag());
  return arr;
}

CMatd matrix_from_parts(const nlohmann::json& re, const nlohmann::json& im, Index rows,
                        Index cols) {
  if (static_cast<Index>(re.size()) != rows * cols || static_cast<Index>(im.size()) != rows * cols)
    throw InvalidArgument("puf_from_json: matrix size mismatch");
  CMatd m(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) {
      const auto k = static_cast<std::size_t>(i * cols + j);
      m(i, j) = std::complex<double>(re[k].get<double>(), im[k].get<double>());
    }
  return m;
}

}  // namespace

std::string puf_to_json(const AnyPuf& puf) {
  nlohmann::json j;
  const LinearPuf* base = nullptr;
  if (std::holds_alternative<LinearPuf>(puf)) {
    base = &std::get<LinearPuf>(puf);
  } else {
    const auto& nl = std::get<NonlinearPuf>(puf);
    base = &nl.base;
    j["d"] = nl.order;
    j["eta"] = nl.eta;
    nlohmann::json ure = nlohmann::json::array(), uim = nlohmann::json::array();
    for (const auto& u : nl.coupling) {
      ure.push_back(matrix_parts(u, true));
      uim.push_back(matrix_parts(u, false));
    }
    j["U_real"] = std::move(ure);
    j["U_imag"] = std::move(uim);
  }
  j["N"] = base->n_mask;
  j["M"] = base->n_detector;
  j["T_real"] = matrix_parts(base->T, true);
  j["T_imag"] = matrix_parts(base->T, false);
  return j.dump();
}

AnyPuf puf_from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  const Index n = j.at("N").get<Index>();
  const Index m = j.at("M").get<Index>();
  LinearPuf base{n, m, matrix_from_parts(j.at("T_real"), j.at("T_imag"), m, n)};
  if (!j.contains("d")) return base;
  NonlinearPuf nl;
  nl.base = std::move(base);
  nl.order = j.at("d").get<int>();
  nl.eta = j.at("eta").get<std::vector<double>>();
  const auto& ure = j.at("U_real");
  const auto& uim = j.at("U_imag");
  if (static_cast<int>(ure.size()) != nl.order || static_cast<int>(nl.eta.size()) != nl.order)
    throw InvalidArgument("puf_from_json: nonlinear order mismatch");
  for (int k = 0; k < nl.order; ++k)
    nl.coupling.push_back(matrix_from_parts(ure[static_cast<std::size_t>(k)],
                                            uim[static_cast<std::size_t>(k)], m, n));
  return nl;
}

}  // namespace puflearn
