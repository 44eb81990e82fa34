#include "puflearn/learner.hpp"

#include <cmath>

#include <json.hpp>

#include "puflearn/errors.hpp"

namespace puflearn {

namespace {

void expand_into(const MonomialBasis& basis, const Eigen::Ref<const Vecd>& b, Vecd& c) {
  c(0) = 1.0;
  for (Index i = 1; i < basis.size(); ++i) c(i) = b(basis.var(i)) * c(basis.parent(i));
}

}  // namespace

SymMatrixd estimate_second_moment(const Matd& challenges, const MonomialBasis& basis) {
  const Index m = challenges.rows();
  if (m < 1) throw InvalidArgument("estimate_second_moment: empty challenge set");
  if (challenges.cols() != basis.n_vars())
    throw DimensionMismatch("estimate_second_moment: challenge width " +
                            std::to_string(challenges.cols()) + " vs basis " +
                            std::to_string(basis.n_vars()));
  const Index n = basis.size();
  Matd acc = Matd::Zero(n, n);
  Vecd c(n);
  for (Index i = 0; i < m; ++i) {
    expand_into(basis, challenges.row(i).transpose(), c);
    acc.selfadjointView<Eigen::Lower>().rankUpdate(c);
  }
  acc /= static_cast<double>(m);
  return SymMatrixd(Matd(acc.selfadjointView<Eigen::Lower>()));
}

SymMatrixd analytic_second_moment(const MonomialBasis& basis, const ChallengeDist& dist) {
  const Index n = basis.size();
  const auto& exps = basis.exponents();
  Matd mom(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = i; j < n; ++j) {
      double v = 1.0;
      switch (dist.kind) {
        case ChallengeDist::Kind::UniformContinuous:
          for (int k = 0; k < basis.n_vars(); ++k) v /= 1.0 + exps(i, k) + exps(j, k);
          break;
        case ChallengeDist::Kind::UniformBinary:
          for (int k = 0; k < basis.n_vars(); ++k)
            if (exps(i, k) + exps(j, k) > 0) v *= 0.5;
          break;
        case ChallengeDist::Kind::Bernoulli:
          for (int k = 0; k < basis.n_vars(); ++k)
            if (exps(i, k) + exps(j, k) > 0) v *= dist.q;
          break;
      }
      mom(i, j) = mom(j, i) = v;
    }
  }
  return SymMatrixd(mom);
}

WhiteningMap whiten(const SymMatrixd& second_moment, double threshold_scale) {
  const auto eig = sym_eig(second_moment);
  const Index n = second_moment.dim();
  const double lam_max = std::max(eig.lambda_max(), 0.0);
  const double threshold = threshold_scale * static_cast<double>(n) * lam_max;

  WhiteningMap map;
  map.P = eig.vectors;
  map.eigenvalues = eig.eigenvalues;
  for (Index j = 0; j < n; ++j)
    if (eig.eigenvalues(j) > threshold) map.kept.push_back(j);
  if (map.kept.empty())
    throw NumericalError("whiten: degenerate challenge distribution (no eigenvalue above " +
                         std::to_string(threshold) + ")");
  map.xi_hat = eig.eigenvalues(map.kept.back());
  return map;
}

LearnedModel fit(const CrpSet& crps, const MonomialBasis& basis, const WhiteningMap& whitening,
                 const FitOptions& options) {
  const Index m = crps.challenges.rows();
  const Index n_pix = crps.responses.cols();
  if (m < 1) throw InvalidArgument("fit: empty CRP set");
  if (crps.responses.rows() != m) throw DimensionMismatch("fit: challenge/response row mismatch");
  if (crps.challenges.cols() != basis.n_vars())
    throw DimensionMismatch("fit: challenge width vs basis mismatch");
  if (!whitening.has_projection()) throw InvalidArgument("fit: whitening lacks projection matrix");
  if (whitening.full_dim() != basis.size())
    throw DimensionMismatch("fit: whitening dimension vs basis mismatch");

  const Index n = basis.size();
  const Index r = whitening.kept_dim();
  Matd p_kept(n, r);
  for (Index k = 0; k < r; ++k) p_kept.col(k) = whitening.P.col(whitening.kept[static_cast<std::size_t>(k)]);

  Matd gram = Matd::Zero(r, r);
  Matd rhs = Matd::Zero(r, n_pix);
  Vecd c(n);
  Vecd ct(r);
  for (Index i = 0; i < m; ++i) {
    expand_into(basis, crps.challenges.row(i).transpose(), c);
    ct.noalias() = p_kept.transpose() * c;
    gram.selfadjointView<Eigen::Lower>().rankUpdate(ct);
    rhs.noalias() += ct * crps.responses.row(i);
  }

  Matd sol;
  try {
    const SpdSolverd solver{SymMatrixd(Matd(gram.selfadjointView<Eigen::Lower>()))};
    sol = solver.solve(rhs);
  } catch (const NotPositiveDefinite& e) {
    // Advise the caller on a sample count that makes this overwhelmingly
    // unlikely: m >= (8n/xi)(eta + ln n) at eta = 3.
    const double suggestion =
        8.0 * static_cast<double>(n) / whitening.xi_hat * (3.0 + std::log(static_cast<double>(n)));
    throw NotPositiveDefinite(std::string(e.what()) + "; whitened Gram matrix is singular with m = " +
                                  std::to_string(m) + ", suggest m >= " +
                                  std::to_string(static_cast<long long>(std::ceil(suggestion))),
                              e.lambda_min_estimate);
  }

  Matd embedded = Matd::Constant(n, n_pix, options.reembed_value);
  for (Index k = 0; k < r; ++k)
    embedded.row(whitening.kept[static_cast<std::size_t>(k)]) = sol.row(k);

  LearnedModel model{basis, whitening, Matd(), Vecd()};
  model.s_hat.noalias() = whitening.P * embedded;
  model.s0 = model.s_hat.row(0).transpose();
  model.s_hat.row(0).setZero();
  return model;
}

Vecd predict(const LearnedModel& model, const Vecd& b, bool include_offset) {
  if (b.size() != model.basis.n_vars())
    throw DimensionMismatch("predict: challenge has " + std::to_string(b.size()) +
                            " pixels, model expects " + std::to_string(model.basis.n_vars()));
  const Vecd c = expand(model.basis, b);
  Vecd out = model.s_hat.transpose() * c;
  if (include_offset) out += model.s0;
  return out;
}

PacReport pac_evaluate(const LearnedModel& model, const AnyPuf& puf, const ChallengeDist& dist,
                       Index n_samples, double epsilon, Rng& rng) {
  const Index n_pix = model.n_pixels();
  const Index width = n_mask(puf);
  if (width != model.basis.n_vars() || n_detector(puf) != n_pix)
    throw DimensionMismatch("pac_evaluate: model and PUF sizes differ");

  PacReport report;
  report.epsilon = epsilon;
  report.per_pixel_max = Vecd::Zero(n_pix);

  const auto probe = [&](const Vecd& b) {
    const Vecd err = (predict(model, b) - respond_clean(puf, b)).cwiseAbs();
    report.per_pixel_max = report.per_pixel_max.cwiseMax(err);
    ++report.challenges_evaluated;
  };
  probe(Vecd::Zero(width));
  probe(Vecd::Ones(width));
  for (Index i = 0; i < n_samples; ++i) probe(sample_challenge(dist, width, rng));

  report.max_err = report.per_pixel_max.maxCoeff();
  report.pass = report.max_err <= epsilon;

  if (std::holds_alternative<LinearPuf>(puf) && model.basis.max_degree() == 2 &&
      model.whitening.has_projection()) {
    const auto& lin = std::get<LinearPuf>(puf);
    Vecd cert(n_pix);
    const double root_n = std::sqrt(static_cast<double>(model.basis.size()));
    for (Index pix = 0; pix < n_pix; ++pix) {
      Vecd s_hat_full = model.s_hat.col(pix);
      s_hat_full(0) = model.s0(pix);
      const Vecd diff_tilde = model.whitening.P.transpose() * (secret_of(lin, pix, model.basis) - s_hat_full);
      double norm_sq = 0;
      for (const Index j : model.whitening.kept) norm_sq += diff_tilde(j) * diff_tilde(j);
      cert(pix) = root_n * std::sqrt(norm_sq);
    }
    report.certificate = std::move(cert);
  }
  return report;
}

std::string model_to_json(const LearnedModel& model,
                          const std::vector<std::pair<std::string, std::string>>& extras) {
  nlohmann::json j;
  j["basis"] = nlohmann::json::parse(model.basis.to_json());
  j["kept_indices"] = model.whitening.kept;
  j["eigenvalues"] = std::vector<double>(model.whitening.eigenvalues.data(),
                                         model.whitening.eigenvalues.data() +
                                             model.whitening.eigenvalues.size());
  nlohmann::json s_hat = nlohmann::json::array();
  for (Index pix = 0; pix < model.n_pixels(); ++pix) {
    nlohmann::json col = nlohmann::json::array();
    for (Index i = 0; i < model.s_hat.rows(); ++i) col.push_back(model.s_hat(i, pix));
    s_hat.push_back(std::move(col));
  }
  j["s_hat"] = std::move(s_hat);
  j["s0"] = std::vector<double>(model.s0.data(), model.s0.data() + model.s0.size());
  for (const auto& [key, value] : extras) j[key] = value;
  return j.dump();
}

LearnedModel model_from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  MonomialBasis basis = MonomialBasis::from_json(j.at("basis").dump());

  WhiteningMap map;
  map.kept = j.at("kept_indices").get<std::vector<Index>>();
  const auto eig = j.at("eigenvalues").get<std::vector<double>>();
  map.eigenvalues = Eigen::Map<const Vecd>(eig.data(), static_cast<Index>(eig.size()));
  if (map.kept.empty()) throw InvalidArgument("model_from_json: no kept indices");
  map.xi_hat = map.eigenvalues(map.kept.back());

  const auto& s_hat = j.at("s_hat");
  const auto s0 = j.at("s0").get<std::vector<double>>();
  if (s_hat.size() != s0.size()) throw InvalidArgument("model_from_json: s_hat/s0 size mismatch");
  const Index n_pix = static_cast<Index>(s0.size());

  LearnedModel model{std::move(basis), std::move(map), Matd(), Vecd()};
  model.s_hat.resize(model.basis.size(), n_pix);
  for (Index pix = 0; pix < n_pix; ++pix) {
    const auto col = s_hat[static_cast<std::size_t>(pix)].get<std::vector<double>>();
    if (static_cast<Index>(col.size()) != model.basis.size())
      throw InvalidArgument("model_from_json: s_hat column length mismatch");
    model.s_hat.col(pix) = Eigen::Map<const Vecd>(col.data(), model.basis.size());
  }
  model.s0 = Eigen::Map<const Vecd>(s0.data(), n_pix);
  return model;
}

}  // namespace puflearn
