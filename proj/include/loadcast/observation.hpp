// Multi-task observation matrix: ℓ slots × m tasks with a binary mask.
#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "loadcast/common.hpp"

namespace loadcast {

using MaskMatrix = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic>;

// Y(i, j) = reading of task j in slot i; mask(i, j) = 1 where observed.
// Unobserved cells carry no meaning and are conventionally 0.
struct ObservationMatrix {
  Eigen::MatrixXd values;
  MaskMatrix mask;

  Eigen::Index slots() const { return values.rows(); }
  Eigen::Index tasks() const { return values.cols(); }

  static ObservationMatrix fully_observed(Eigen::MatrixXd y) {
    MaskMatrix m = MaskMatrix::Ones(y.rows(), y.cols());
    return ObservationMatrix{std::move(y), std::move(m)};
  }

  std::vector<int> observed_rows(Eigen::Index task) const {
    std::vector<int> rows;
    for (Eigen::Index i = 0; i < values.rows(); ++i) {
      if (mask(i, task)) rows.push_back(static_cast<int>(i));
    }
    return rows;
  }

  void require_shape_consistent() const {
    if (values.rows() != mask.rows() || values.cols() != mask.cols()) {
      throw std::invalid_argument("ObservationMatrix: values are " + std::to_string(values.rows()) +
                                  "x" + std::to_string(values.cols()) + " but mask is " +
                                  std::to_string(mask.rows()) + "x" + std::to_string(mask.cols()));
    }
  }

  // Observed readings must be finite everywhere a model consumes them.
  void require_finite() const {
    require_shape_consistent();
    for (Eigen::Index j = 0; j < values.cols(); ++j) {
      for (Eigen::Index i = 0; i < values.rows(); ++i) {
        if (mask(i, j) && !std::isfinite(values(i, j))) {
          throw std::invalid_argument("non-finite reading for task " + std::to_string(j) +
                                      " at slot " + std::to_string(i));
        }
      }
    }
  }

  // Demand data is non-negative; enforced at the data boundary only, since
  // the solvers themselves are sign-agnostic.
  void require_nonnegative() const {
    for (Eigen::Index j = 0; j < values.cols(); ++j) {
      for (Eigen::Index i = 0; i < values.rows(); ++i) {
        if (mask(i, j) && values(i, j) < 0.0) {
          throw DataError("negative reading " + detail::format_double(values(i, j)) +
                          " for task " + std::to_string(j) + " at slot " + std::to_string(i));
        }
      }
    }
  }
};

}  // namespace loadcast
