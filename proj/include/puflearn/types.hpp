#pragma once

#include <Eigen/Dense>

namespace puflearn {

static constexpr auto Dyn = Eigen::Dynamic;

template <typename T>
using Mat = Eigen::Matrix<T, Dyn, Dyn>;
template <typename T>
using Vec = Eigen::Matrix<T, Dyn, 1>;

using Matd = Mat<double>;
using Vecd = Vec<double>;
using CMatd = Eigen::MatrixXcd;
using CVecd = Eigen::VectorXcd;
using Index = Eigen::Index;

}  // namespace puflearn
