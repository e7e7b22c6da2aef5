#pragma once

#include <Eigen/Core>
#include <optional>
#include <vector>

#include "copmix/copula.hpp"

namespace copmix {

/// n co-occurring observations; columns 0..p-1 hold view X, the rest view Y.
struct Dataset {
  ViewLayout layout;
  Eigen::MatrixXd rows;
  std::optional<std::vector<int>> true_labels;

  Eigen::Index size() const { return rows.rows(); }
};

}  // namespace copmix
