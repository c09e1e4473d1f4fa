#pragma once

#include <vector>

#include "barrier/potential.hpp"

namespace models {

/// V = e^{−(x₁²+4x₂²)/2}(½ + 0.1x₁²x₂), with λ = (2^{−1/2}, 2^{1/2}) so that λ₂ = 2λ₁.
inline barrier::PotentialModel cubic() {
  Eigen::MatrixXd Q(2, 2);
  Q << 1, 0, 0, 4;
  return barrier::PotentialModel::gaussian_plus_cubic(0.5, Q, {{barrier::MultiIndex{2, 1}, 0.1}});
}

/// One or more representatives of every potential kind with a barrier top.
inline std::vector<barrier::PotentialModel> builtin() {
  using barrier::MultiIndex;
  using barrier::PotentialModel;
  Eigen::MatrixXd A(2, 2);
  A << 1, 0.3, 0.3, 2;
  Eigen::MatrixXd Q(2, 2);
  Q << 1, 0, 0, 4;
  return {PotentialModel::gaussian(0.5, 1),
          PotentialModel::gaussian(0.5, 2),
          PotentialModel::gaussian(0.5, 3),
          PotentialModel::anisotropic_gaussian(0.5, A),
          PotentialModel::anisotropic_gaussian(0.5, Q),
          cubic(),
          PotentialModel::gaussian_plus_cubic(0.5, A, {{MultiIndex{2, 1}, 0.1}, {MultiIndex{0, 3}, -0.05}}),
          PotentialModel::quadratic_local(0.5, {1.0, 2.0}),
          PotentialModel::user_tabulated(0.5, 2, {{MultiIndex{2, 0}, -1.0}, {MultiIndex{0, 2}, -4.0},
                                                  {MultiIndex{2, 1}, 0.3}, {MultiIndex{1, 2}, -0.2},
                                                  {MultiIndex{4, 0}, 1.1}, {MultiIndex{2, 2}, 0.4}})};
}

}  // namespace models
