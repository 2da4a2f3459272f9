// Low-rank multi-task kernel learning with a learned task-similarity matrix.
//
// The model is F = K·A·Bᵀ with A (ℓ×p) latent-function coefficients and
// B (m×p) per-task mixing weights; the induced task kernel is L = BBᵀ,
// positive semidefinite of rank ≤ p. Fitting minimizes
//   J = Σ_{observed}(Y − F)² + lam·tr(AᵀKA) + lam·tr(BᵀB)
// by alternating exact block updates; unobserved cells are imputed from the
// current fit, which majorizes the masked objective, so J never increases.
#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "loadcast/kernels.hpp"
#include "loadcast/numlin.hpp"
#include "loadcast/observation.hpp"
#include "loadcast/rng.hpp"

namespace loadcast {

// Internals exposed to the per-sweep observer, valid only during the call.
struct OklSweepView {
  int sweep;                             // 1-based
  const Eigen::MatrixXd& imputed;        // Ỹ used by this sweep
  const Eigen::MatrixXd& mixing_before;  // B entering the latent update
  const Eigen::MatrixXd& latent;         // A after its update
  const Eigen::MatrixXd& mixing_after;   // B after its update
  double objective;                      // on the true mask, end of sweep
};

struct OklOptions {
  int max_iters = 100;
  double rel_tol = 1e-6;
  std::uint64_t seed = 0;
  bool identity_mixing_init = false;  // start B = I (requires rank == tasks)
  bool freeze_mixing = false;         // skip the B update entirely
  std::function<void(const OklSweepView&)> observer;
};

struct OklModel {
  KernelPtr kernel;
  double lam = 0.0;
  int rank = 0;
  std::vector<CalendarPoint> train_points;
  Eigen::MatrixXd latent_coeffs;  // A: ℓ×p
  Eigen::MatrixXd mixing;         // B: m×p
  std::vector<double> trace;      // objective at init, then after each sweep
  bool converged = false;
  int sweeps = 0;

  Eigen::Index tasks() const { return mixing.rows(); }

  std::size_t coefficient_count() const {
    return static_cast<std::size_t>(latent_coeffs.size() + mixing.size());
  }
};

inline double okl_objective(const Eigen::MatrixXd& latent, const Eigen::MatrixXd& mixing,
                            const Eigen::MatrixXd& k, const ObservationMatrix& y, double lam) {
  if (!(lam > 0.0)) {
    throw std::invalid_argument("okl_objective: lam must be positive, got " +
                                detail::format_double(lam));
  }
  if (k.rows() != y.values.rows() || k.cols() != latent.rows() ||
      mixing.rows() != y.values.cols() || mixing.cols() != latent.cols()) {
    throw std::invalid_argument("okl_objective: dimension mismatch");
  }
  Eigen::MatrixXd ka = k * latent;
  Eigen::MatrixXd fit = ka * mixing.transpose();
  double loss = 0.0;
  for (Eigen::Index j = 0; j < y.values.cols(); ++j) {
    for (Eigen::Index i = 0; i < y.values.rows(); ++i) {
      if (y.mask(i, j)) {
        double r = y.values(i, j) - fit(i, j);
        loss += r * r;
      }
    }
  }
  double value = loss + lam * (latent.array() * ka.array()).sum() + lam * mixing.squaredNorm();
  if (!std::isfinite(value)) {
    throw NumericError("okl_objective: non-finite value");
  }
  return value;
}

// Core fit against a precomputed Gram matrix and its eigendecomposition, so a
// hyperparameter sweep pays the O(ℓ³) factorization once.
inline OklModel fit_okl_with_eig(KernelPtr kernel, const std::vector<CalendarPoint>& slots,
                                 const Eigen::MatrixXd& k, const SymEig& keig,
                                 const ObservationMatrix& y, double lam, int rank_p,
                                 const OklOptions& opts = {}) {
  const auto ell = static_cast<Eigen::Index>(slots.size());
  const Eigen::Index m = y.values.cols();
  if (!(lam > 0.0)) {
    throw std::invalid_argument("fit_okl: lam must be positive, got " +
                                detail::format_double(lam));
  }
  if (rank_p < 1 || rank_p > m) {
    throw std::invalid_argument("fit_okl: rank " + std::to_string(rank_p) +
                                " outside [1, " + std::to_string(m) + "]");
  }
  if (k.rows() != ell || k.cols() != ell || y.values.rows() != ell) {
    throw std::invalid_argument("fit_okl: Gram/observation shapes do not match the slot list");
  }
  if (opts.max_iters < 1) {
    throw std::invalid_argument("fit_okl: max_iters must be at least 1");
  }
  if (opts.identity_mixing_init && rank_p != m) {
    throw std::invalid_argument("fit_okl: identity mixing init requires rank == number of tasks");
  }
  y.require_finite();
  const Eigen::Index p = rank_p;

  OklModel model;
  model.kernel = std::move(kernel);
  model.lam = lam;
  model.rank = rank_p;
  model.train_points = slots;
  model.latent_coeffs = Eigen::MatrixXd::Zero(ell, p);

  if (opts.identity_mixing_init) {
    model.mixing = Eigen::MatrixXd::Identity(m, p);
  } else {
    model.mixing.resize(m, p);
    Rng rng(opts.seed);
    const double scale = 1.0 / std::sqrt(static_cast<double>(p));
    for (Eigen::Index j = 0; j < m; ++j) {
      for (Eigen::Index q = 0; q < p; ++q) {
        model.mixing(j, q) = rng.normal() * scale;
      }
    }
  }

  std::vector<std::vector<int>> observed(static_cast<std::size_t>(m));
  for (Eigen::Index j = 0; j < m; ++j) observed[static_cast<std::size_t>(j)] = y.observed_rows(j);

  // Objective at the initial iterate: A = 0, so the fit is identically zero.
  double masked_sq = 0.0;
  for (Eigen::Index j = 0; j < m; ++j) {
    for (int i : observed[static_cast<std::size_t>(j)]) {
      masked_sq += y.values(i, j) * y.values(i, j);
    }
  }
  model.trace.push_back(masked_sq + lam * model.mixing.squaredNorm());

  Eigen::MatrixXd fit = Eigen::MatrixXd::Zero(ell, m);  // K·A·Bᵀ at the current iterate
  Eigen::MatrixXd ytilde(ell, m);
  Eigen::MatrixXd mixing_before;

  for (int sweep = 1; sweep <= opts.max_iters; ++sweep) {
    // Impute unobserved cells from the current fit.
    for (Eigen::Index j = 0; j < m; ++j) {
      for (Eigen::Index i = 0; i < ell; ++i) {
        ytilde(i, j) = y.mask(i, j) ? y.values(i, j) : fit(i, j);
      }
    }

    // Latent update: stationary point of the imputed objective in A.
    Eigen::MatrixXd s = model.mixing.transpose() * model.mixing;
    s = ((s + s.transpose()) * 0.5).eval();
    SymEig seig = sym_eig(s);
    model.latent_coeffs =
        solve_sylvester_ridge(keig, seig, lam, ytilde * model.mixing);

    if (opts.observer) mixing_before = model.mixing;

    // Mixing update: exact masked ridge per task against G = K·A.
    Eigen::MatrixXd g = k * model.latent_coeffs;
    if (!opts.freeze_mixing) {
      for (Eigen::Index j = 0; j < m; ++j) {
        const auto& rows = observed[static_cast<std::size_t>(j)];
        const auto n = static_cast<Eigen::Index>(rows.size());
        Eigen::MatrixXd gsub(n, p);
        Eigen::VectorXd ysub(n);
        for (Eigen::Index a = 0; a < n; ++a) {
          gsub.row(a) = g.row(rows[static_cast<std::size_t>(a)]);
          ysub[a] = y.values(rows[static_cast<std::size_t>(a)], j);
        }
        model.mixing.row(j) = ridge_solve(gsub, ysub, lam).transpose();
      }
    }

    fit.noalias() = g * model.mixing.transpose();
    double loss = 0.0;
    for (Eigen::Index j = 0; j < m; ++j) {
      for (int i : observed[static_cast<std::size_t>(j)]) {
        double r = y.values(i, j) - fit(i, j);
        loss += r * r;
      }
    }
    double objective = loss + lam * (model.latent_coeffs.array() * g.array()).sum() +
                       lam * model.mixing.squaredNorm();
    if (!std::isfinite(objective)) {
      throw NumericError("fit_okl: non-finite objective at sweep " + std::to_string(sweep));
    }

    const double prev = model.trace.back();
    if (objective > prev + 1e-8 * std::abs(prev)) {
      throw NumericError("fit_okl: objective increased from " + detail::format_double(prev) +
                         " to " + detail::format_double(objective) + " at sweep " +
                         std::to_string(sweep));
    }
    model.trace.push_back(objective);
    model.sweeps = sweep;

    if (opts.observer) {
      opts.observer(OklSweepView{sweep, ytilde, mixing_before, model.latent_coeffs, model.mixing,
                                 objective});
    }

    if (prev - objective < opts.rel_tol * std::max(std::abs(prev), 1e-300)) {
      model.converged = true;
      break;
    }
  }
  return model;
}

inline OklModel fit_okl(const KernelPtr& kernel, const std::vector<CalendarPoint>& slots,
                        const ObservationMatrix& y, double lam, int rank_p,
                        const OklOptions& opts = {}) {
  Eigen::MatrixXd k = gram(kernel, slots);
  return fit_okl_with_eig(kernel, slots, k, sym_eig(k), y, lam, rank_p, opts);
}

// Values of the shared latent functions at the query points: K(query, slots)·A.
inline Eigen::MatrixXd latent_profiles(const OklModel& model,
                                       const std::vector<CalendarPoint>& query) {
  return gram(model.kernel, query, model.train_points) * model.latent_coeffs;
}

inline Eigen::MatrixXd predict_okl_with_gram(const OklModel& model, const Eigen::MatrixXd& kq) {
  if (kq.cols() != static_cast<Eigen::Index>(model.train_points.size())) {
    throw std::invalid_argument("predict_okl: Gram matrix does not match the training slots");
  }
  return (kq * model.latent_coeffs) * model.mixing.transpose();
}

inline Eigen::MatrixXd predict_okl(const OklModel& model,
                                   const std::vector<CalendarPoint>& query) {
  return (latent_profiles(model, query) * model.mixing.transpose()).eval();
}

// Learned task-similarity matrix L = BBᵀ.
inline Eigen::MatrixXd output_kernel(const OklModel& model) {
  return model.mixing * model.mixing.transpose();
}

}  // namespace loadcast
