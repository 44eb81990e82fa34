#include "puflearn/features.hpp"

#include <algorithm>
#include <functional>

#include <json.hpp>

namespace puflearn {

std::int64_t feature_dim(int n_vars, int max_degree) {
  if (n_vars < 1 || max_degree < 1)
    throw InvalidArgument("feature_dim: need n_vars >= 1 and max_degree >= 1");
  std::int64_t r = 1;
  for (int i = 1; i <= max_degree; ++i) {
    if (__builtin_mul_overflow(r, static_cast<std::int64_t>(n_vars) + i, &r))
      throw OverflowError("feature_dim: binomial(" + std::to_string(n_vars + max_degree) + "," +
                          std::to_string(max_degree) + ") overflows int64");
    r /= i;  // exact: r held binomial(n_vars+i-1, i-1) before the multiply
  }
  return r;
}

MonomialBasis::MonomialBasis(int n_vars, int max_degree)
    : n_vars_(n_vars), max_degree_(max_degree) {
  const std::int64_t count = feature_dim(n_vars, max_degree);
  exponents_.resize(count, n_vars);
  degrees_.reserve(static_cast<std::size_t>(count));
  parents_.reserve(static_cast<std::size_t>(count));
  vars_.reserve(static_cast<std::size_t>(count));

  Index row = 0;
  std::vector<int> exp(static_cast<std::size_t>(n_vars), 0);
  const auto emit = [&](int degree, Index parent, int var) {
    for (int j = 0; j < n_vars; ++j) exponents_(row, j) = exp[static_cast<std::size_t>(j)];
    degrees_.push_back(degree);
    parents_.push_back(parent);
    vars_.push_back(var);
    lookup_.emplace(exp, row);
    ++row;
  };

  emit(0, -1, -1);
  // Degree d terms are sorted variable tuples (j1 <= ... <= jd); dropping j1
  // gives the parent tuple of degree d-1, which was already emitted.
  std::vector<int> combo;
  const std::function<void(int, int, int)> recurse = [&](int first, int remaining, int degree) {
    if (remaining == 0) {
      std::vector<int> parent_exp = exp;
      parent_exp[static_cast<std::size_t>(combo.front())] -= 1;
      emit(degree, lookup_.at(parent_exp), combo.front());
      return;
    }
    for (int j = first; j < n_vars; ++j) {
      combo.push_back(j);
      exp[static_cast<std::size_t>(j)] += 1;
      recurse(j, remaining - 1, degree);
      exp[static_cast<std::size_t>(j)] -= 1;
      combo.pop_back();
    }
  };
  for (int d = 1; d <= max_degree; ++d) recurse(0, d, d);
}

std::optional<Index> MonomialBasis::index_of(const std::vector<int>& exponent) const {
  const auto it = lookup_.find(exponent);
  if (it == lookup_.end()) return std::nullopt;
  return it->second;
}

std::string MonomialBasis::to_json() const {
  nlohmann::json arr = nlohmann::json::array();
  for (Index i = 0; i < size(); ++i) {
    nlohmann::json term = nlohmann::json::array();
    for (int j = 0; j < n_vars_; ++j) term.push_back(exponents_(i, j));
    arr.push_back(std::move(term));
  }
  return arr.dump();
}

MonomialBasis MonomialBasis::from_json(const std::string& text) {
  const auto arr = nlohmann::json::parse(text);
  if (!arr.is_array() || arr.empty() || !arr.front().is_array())
    throw InvalidArgument("MonomialBasis::from_json: expected an array of exponent arrays");
  const int n_vars = static_cast<int>(arr.front().size());
  int max_degree = 0;
  for (const auto& term : arr) {
    int d = 0;
    for (const auto& e : term) d += e.get<int>();
    max_degree = std::max(max_degree, d);
  }
  MonomialBasis basis(n_vars, max_degree);
  if (basis.size() != static_cast<Index>(arr.size()))
    throw InvalidArgument("MonomialBasis::from_json: term count does not match canonical basis");
  for (Index i = 0; i < basis.size(); ++i)
    for (int j = 0; j < n_vars; ++j)
      if (basis.exponents_(i, j) != arr[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)].get<int>())
        throw InvalidArgument("MonomialBasis::from_json: exponents are not in canonical order");
  return basis;
}

}  // namespace puflearn
