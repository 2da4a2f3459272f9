// Independent per-task kernel ridge regression over a shared slot list.
//
// Task j with observed slot set Ω_j gets coefficients c_j solving
// (K[Ω_j,Ω_j] + lam·I) c_j = y_j; predictions are K(query, Ω_j) · c_j.
// Missing data is handled purely by restriction to observed rows.
#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "loadcast/kernels.hpp"
#include "loadcast/numlin.hpp"
#include "loadcast/observation.hpp"

namespace loadcast {

struct KrrModel {
  KernelPtr kernel;
  double lam = 0.0;
  std::vector<CalendarPoint> train_points;   // shared slot list
  std::vector<std::vector<int>> observed;    // Ω_j per task, ascending slot indices
  std::vector<Eigen::VectorXd> coeffs;       // c_j, len(c_j) = |Ω_j|
  std::vector<int> empty_tasks;              // tasks with nothing observed; predict 0

  Eigen::Index tasks() const { return static_cast<Eigen::Index>(coeffs.size()); }

  std::size_t coefficient_count() const {
    std::size_t n = 0;
    for (const auto& c : coeffs) n += static_cast<std::size_t>(c.size());
    return n;
  }
};

// Variant taking the precomputed symmetric Gram matrix of `slots`, so a
// hyperparameter sweep pays for the kernel evaluation once.
inline KrrModel fit_krr_with_gram(KernelPtr kernel, const std::vector<CalendarPoint>& slots,
                                  const Eigen::MatrixXd& k, const ObservationMatrix& y,
                                  double lam) {
  if (!(lam > 0.0)) {
    throw std::invalid_argument("fit_krr: lam must be positive, got " +
                                detail::format_double(lam));
  }
  if (k.rows() != static_cast<Eigen::Index>(slots.size()) || k.rows() != k.cols()) {
    throw std::invalid_argument("fit_krr: Gram matrix does not match the slot list");
  }
  if (y.values.rows() != k.rows()) {
    throw std::invalid_argument("fit_krr: observations have " + std::to_string(y.values.rows()) +
                                " slots but the slot list has " + std::to_string(k.rows()));
  }
  y.require_finite();

  KrrModel model;
  model.kernel = std::move(kernel);
  model.lam = lam;
  model.train_points = slots;
  model.observed.resize(static_cast<std::size_t>(y.tasks()));
  model.coeffs.resize(static_cast<std::size_t>(y.tasks()));

  // Tasks sharing an observation pattern share one factorization.
  std::map<std::vector<int>, std::vector<int>> by_pattern;
  for (Eigen::Index j = 0; j < y.tasks(); ++j) {
    auto rows = y.observed_rows(j);
    model.observed[static_cast<std::size_t>(j)] = rows;
    if (rows.empty()) {
      model.empty_tasks.push_back(static_cast<int>(j));
      model.coeffs[static_cast<std::size_t>(j)] = Eigen::VectorXd();
      continue;
    }
    by_pattern[std::move(rows)].push_back(static_cast<int>(j));
  }

  for (const auto& [rows, tasks] : by_pattern) {
    const auto n = static_cast<Eigen::Index>(rows.size());
    Eigen::MatrixXd ksub(n, n);
    for (Eigen::Index a = 0; a < n; ++a) {
      for (Eigen::Index b = 0; b < n; ++b) {
        ksub(a, b) = k(rows[static_cast<std::size_t>(a)], rows[static_cast<std::size_t>(b)]);
      }
    }
    Eigen::MatrixXd sys = ksub;
    sys.diagonal().array() += lam;
    Eigen::LLT<Eigen::MatrixXd> llt(sys);
    if (llt.info() != Eigen::Success) {
      throw NumericError("fit_krr: Cholesky factorization failed at lam=" +
                         detail::format_double(lam));
    }

    Eigen::MatrixXd rhs(n, static_cast<Eigen::Index>(tasks.size()));
    for (std::size_t t = 0; t < tasks.size(); ++t) {
      for (Eigen::Index a = 0; a < n; ++a) {
        rhs(a, static_cast<Eigen::Index>(t)) = y.values(rows[static_cast<std::size_t>(a)], tasks[t]);
      }
    }
    Eigen::MatrixXd c = llt.solve(rhs);
    c += llt.solve(rhs - sys * c);  // one refinement pass tightens the residual
    for (std::size_t t = 0; t < tasks.size(); ++t) {
      model.coeffs[static_cast<std::size_t>(tasks[t])] = c.col(static_cast<Eigen::Index>(t));
    }
  }
  return model;
}

inline KrrModel fit_krr(const KernelPtr& kernel, const std::vector<CalendarPoint>& slots,
                        const ObservationMatrix& y, double lam) {
  return fit_krr_with_gram(kernel, slots, gram(kernel, slots), y, lam);
}

// Prediction from a precomputed rectangular Gram matrix K(query, slots).
inline Eigen::MatrixXd predict_krr_with_gram(const KrrModel& model, const Eigen::MatrixXd& kq) {
  if (kq.cols() != static_cast<Eigen::Index>(model.train_points.size())) {
    throw std::invalid_argument("predict_krr: Gram matrix does not match the training slots");
  }
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(kq.rows(), model.tasks());
  for (Eigen::Index j = 0; j < model.tasks(); ++j) {
    const auto& rows = model.observed[static_cast<std::size_t>(j)];
    if (rows.empty()) continue;
    const auto& c = model.coeffs[static_cast<std::size_t>(j)];
    for (std::size_t a = 0; a < rows.size(); ++a) {
      out.col(j) += kq.col(rows[a]) * c[static_cast<Eigen::Index>(a)];
    }
  }
  return out;
}

inline Eigen::MatrixXd predict_krr(const KrrModel& model, const std::vector<CalendarPoint>& query) {
  return predict_krr_with_gram(model, gram(model.kernel, query, model.train_points));
}

}  // namespace loadcast
