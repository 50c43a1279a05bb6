// Sparse recovery from quadratic measurements y_u = a^H M_u a.
//
// The unknown is lifted to X = a a^H. Each outer iteration minimizes the
// log-det surrogate Tr((X_k + delta I)^-1 X) over the convex constraint set,
// then removes the rows/columns of the weakest diagonal entries from the
// support. Once the support cannot shrink further without losing
// feasibility, the last feasible support is kept and the log-det iterations
// continue until X is numerically rank one. The object is read off the
// leading eigenpair.
#pragma once

#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "qcs/conic.hpp"
#include "qcs/optics.hpp"

namespace qcs {

struct SolverParams {
  double delta = 1e-3;
  /// Mixed-norm bound; infinity removes the constraint.
  double zeta = std::numeric_limits<double>::infinity();
  double epsilon = 0.0;
  double threshold = 0.1;
  double threshold_step = 0.01;
  /// Disables support thresholding (the non-sparse baseline).
  bool thresholding = true;
  int max_outer_iters = 50;
  double rank_ratio_threshold = 1e3;
  double tol_feas = 1e-6;
  int max_inner_iters = 20000;
  int patience = 500;

  void validate() const;
};

/// Parameters of the non-sparse baseline: no thresholding, no mixed-norm bound.
SolverParams without_sparsity(SolverParams params);

/// W = (X + delta I)^-1 through the eigendecomposition of X.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> logdet_weight(
    const Eigen::MatrixBase<Derived>& X, typename Derived::RealScalar delta) {
  using Matrix = Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Real = typename Derived::RealScalar;
  if (!(delta > Real(0))) throw std::invalid_argument("delta must be positive");
  if (X.rows() != X.cols()) throw std::invalid_argument("logdet_weight needs a square matrix");
  const Real scale = X.cwiseAbs().maxCoeff();
  if ((X - X.adjoint()).cwiseAbs().maxCoeff() > Real(1e-9) * std::max(scale, Real(1)))
    throw std::invalid_argument("logdet_weight needs a symmetric matrix");
  Eigen::SelfAdjointEigenSolver<Matrix> es(X.derived());
  if (es.info() != Eigen::Success) throw std::runtime_error("eigendecomposition failed");
  const auto shifted = (es.eigenvalues().array() + delta).eval();
  if ((shifted <= Real(0)).any()) throw std::invalid_argument("X + delta I is not positive definite");
  const auto& V = es.eigenvectors();
  return V * shifted.inverse().matrix().asDiagonal() * V.adjoint();
}

struct ThresholdOutcome {
  std::vector<Index> off_support;  // sorted
  double threshold = 0.0;
  int increments = 0;
  bool saturated = false;
};

/// Adds every index with diag(i) < T * max|diag| to the off-support. When
/// nothing qualifies, T is raised in steps of dT until something does. If the
/// support cannot shrink without emptying it, the outcome is saturated and
/// nothing changes.
ThresholdOutcome threshold_support(const Eigen::VectorXd& diag, std::span<const Index> off_support,
                                   double threshold, double threshold_step);

struct RankOneFactor {
  Eigen::VectorXcd a;
  Eigen::VectorXd singular_values;  // descending
  double rank_ratio = 0.0;          // s1 / s2, infinite when s2 = 0
};

/// Best rank-one approximation X ~ a a^H, with a = u1 * sqrt(s1).
RankOneFactor extract_rank1(const Eigen::MatrixXcd& X);

inline bool rank_ratio_converged(double rank_ratio, double threshold) {
  return rank_ratio > threshold;
}
inline bool rank_ratio_converged(const RankOneFactor& r, double threshold) {
  return rank_ratio_converged(r.rank_ratio, threshold);
}

enum class ReconstructionStatus { converged, iteration_cap, stalled, infeasible };

const char* to_string(ReconstructionStatus s);

struct OuterIteration {
  std::size_t off_support_size = 0;
  SubproblemStatus status = SubproblemStatus::optimal;
  bool accepted = false;
  bool thresholding = false;    // true while the support was still shrinking
  double objective = 0.0;       // Tr(W_k X_{k+1})
  double previous_objective = 0.0;  // Tr(W_k X_k)
  double max_residual = 0.0;
  double rank_ratio = 0.0;
  int inner_iterations = 0;
};

struct ReconstructionResult {
  Eigen::VectorXcd a;
  Eigen::MatrixXcd X;
  Eigen::VectorXd singular_values;
  double rank_ratio = 0.0;
  int outer_iterations = 0;
  ReconstructionStatus status = ReconstructionStatus::stalled;
  std::vector<Index> off_support;
  std::vector<OuterIteration> history;
};

ReconstructionResult solve_qcs(const Measurements& y, std::span<const TransferMatrix> transfer,
                               const SolverParams& params);

/// Mixed-norm bound and consistency band computed from a known object the way
/// the evaluation protocol does: zeta = 1.1 * mixed(a a^H), eps = max|y_noisy - y_clean|.
SolverParams oracle_parameters(const Eigen::VectorXcd& a_true, const Measurements& clean,
                               const Measurements& noisy, SolverParams base = {});

}  // namespace qcs
