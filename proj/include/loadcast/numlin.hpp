// Dense symmetric linear algebra used by the solvers: eigendecomposition,
// ridge systems, and the Sylvester-type equation K·A·S + lam·A = R.
#pragma once

#include <string>

#include <Eigen/Dense>

#include "loadcast/common.hpp"

#ifdef LOADCAST_USE_LAPACKE
#include <lapacke.h>
#endif

namespace loadcast {

// Eigendecomposition S = Q diag(values) Qᵀ, eigenvalues ascending.
struct SymEig {
  Eigen::MatrixXd vectors;  // orthogonal, columns are eigenvectors
  Eigen::VectorXd values;   // ascending
};

inline SymEig sym_eig(const Eigen::MatrixXd& s) {
  if (s.rows() != s.cols()) {
    throw std::invalid_argument("sym_eig: matrix is " + std::to_string(s.rows()) + "x" +
                                std::to_string(s.cols()) + ", expected square");
  }
  const double scale = s.cwiseAbs().maxCoeff();
  const double asym = (s - s.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-12 * std::max(scale, 1.0)) {
    throw std::invalid_argument("sym_eig: matrix is not symmetric (max asymmetry " +
                                detail::format_double(asym) + ")");
  }
#ifdef LOADCAST_USE_LAPACKE
  SymEig out;
  out.vectors = (s + s.transpose()) * 0.5;
  out.values.resize(s.rows());
  lapack_int info = LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'V', 'L', static_cast<lapack_int>(s.rows()),
                                   out.vectors.data(), static_cast<lapack_int>(s.rows()),
                                   out.values.data());
  if (info != 0) {
    throw NumericError("sym_eig: eigensolver failed to converge (info=" + std::to_string(info) +
                       ")");
  }
  return out;
#else
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s);
  if (es.info() != Eigen::Success) {
    throw NumericError("sym_eig: eigensolver failed to converge");
  }
  return SymEig{es.eigenvectors(), es.eigenvalues()};
#endif
}

// Minimizes ‖y − G b‖² + lam‖b‖² via the normal equations (GᵀG + lam I) b = Gᵀy,
// with one step of iterative refinement to tighten the residual.
inline Eigen::VectorXd ridge_solve(const Eigen::MatrixXd& g, const Eigen::VectorXd& y, double lam) {
  if (!(lam > 0.0)) {
    throw std::invalid_argument("ridge_solve: lam must be positive, got " +
                                detail::format_double(lam));
  }
  if (g.rows() != y.size()) {
    throw std::invalid_argument("ridge_solve: G has " + std::to_string(g.rows()) +
                                " rows but y has " + std::to_string(y.size()) + " entries");
  }
  const Eigen::Index p = g.cols();
  if (g.rows() == 0) return Eigen::VectorXd::Zero(p);

  Eigen::MatrixXd normal = g.transpose() * g;
  normal.diagonal().array() += lam;
  Eigen::VectorXd rhs = g.transpose() * y;
  Eigen::LLT<Eigen::MatrixXd> llt(normal);
  if (llt.info() != Eigen::Success) {
    throw NumericError("ridge_solve: Cholesky factorization failed");
  }
  Eigen::VectorXd b = llt.solve(rhs);
  b += llt.solve(rhs - normal * b);
  return b;
}

// Solves K·A·S + lam·A = R given eigendecompositions of PSD K and S:
//   A = Q_K [ (Q_Kᵀ R Q_S)_{ij} / (lam + mu_i nu_j) ] Q_Sᵀ.
// Slightly negative eigenvalues from round-off are clamped to 0; genuinely
// negative ones are rejected, so every denominator is at least lam.
inline Eigen::MatrixXd solve_sylvester_ridge(const SymEig& keig, const SymEig& seig, double lam,
                                             const Eigen::MatrixXd& r) {
  if (!(lam > 0.0)) {
    throw std::invalid_argument("solve_sylvester_ridge: lam must be positive, got " +
                                detail::format_double(lam));
  }
  if (keig.vectors.rows() != r.rows() || seig.vectors.rows() != r.cols()) {
    throw std::invalid_argument("solve_sylvester_ridge: R is " + std::to_string(r.rows()) + "x" +
                                std::to_string(r.cols()) + " but K is " +
                                std::to_string(keig.vectors.rows()) + "-dim and S is " +
                                std::to_string(seig.vectors.rows()) + "-dim");
  }

  auto clamped = [](const Eigen::VectorXd& v, const char* what) {
    Eigen::VectorXd out = v;
    const double top = v.size() ? v.maxCoeff() : 0.0;
    const double tol = 1e-10 * std::max(top, 0.0);
    for (Eigen::Index i = 0; i < out.size(); ++i) {
      if (out[i] < -tol) {
        throw std::invalid_argument(std::string("solve_sylvester_ridge: ") + what +
                                    " has negative eigenvalue " + detail::format_double(out[i]));
      }
      if (out[i] < 0.0) out[i] = 0.0;
    }
    return out;
  };
  const Eigen::VectorXd mu = clamped(keig.values, "K");
  const Eigen::VectorXd nu = clamped(seig.values, "S");

  Eigen::MatrixXd core = keig.vectors.transpose() * r * seig.vectors;
  for (Eigen::Index j = 0; j < core.cols(); ++j) {
    for (Eigen::Index i = 0; i < core.rows(); ++i) {
      core(i, j) /= lam + mu[i] * nu[j];
    }
  }
  return keig.vectors * core * seig.vectors.transpose();
}

}  // namespace loadcast
