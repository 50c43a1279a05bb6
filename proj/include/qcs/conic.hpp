// Convex subproblem of one log-det iteration:
//
//   minimize    Tr(W X)
//   subject to  X >= 0 (PSD)
//               |Tr(M_u X) - y_u| <= eps       for every measurement u
//               Tr(X) >= trace_floor
//               sum_a ||X_a,:||_2 <= zeta      (mixed l1,2 norm over rows)
//               X_ij = 0 whenever i or j is off-support
//
// solved by column generation over X = V S V^T: small dense interior-point
// solves on span(V), with V grown from the full-space dual slack (or Farkas
// ray) until optimality or infeasibility is certified. Complex Hermitian data
// is handled through the real 2n x 2n embedding (see LiftedOperator).
#pragma once

#include <algorithm>
#include <limits>
#include <memory>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "qcs/optics.hpp"

namespace qcs {

/// Projection onto the PSD cone: eigenvalues clipped at zero.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> project_psd(
    const Eigen::MatrixBase<Derived>& X) {
  using Matrix = Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  if (X.rows() != X.cols()) throw std::invalid_argument("project_psd needs a square matrix");
  if (X.size() == 0) return Matrix(X.rows(), X.cols());
  Eigen::SelfAdjointEigenSolver<Matrix> es(X.derived());
  if (es.info() != Eigen::Success) throw std::runtime_error("eigendecomposition failed");
  const auto& V = es.eigenvectors();
  const auto lambda = es.eigenvalues().cwiseMax(0).eval();
  return V * lambda.asDiagonal() * V.adjoint();
}

/// Projects a nonnegative vector onto {v >= 0 : sum v <= radius}; returns the
/// soft threshold theta so that the projection is max(v - theta, 0).
template <typename Derived>
typename Derived::Scalar simplex_threshold(const Eigen::MatrixBase<Derived>& v,
                                           typename Derived::Scalar radius) {
  using Scalar = typename Derived::Scalar;
  if (v.sum() <= radius) return Scalar(0);
  std::vector<Scalar> sorted(v.derived().data(), v.derived().data() + v.size());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  Scalar cumulative = 0;
  Scalar theta = 0;
  for (std::size_t k = 0; k < sorted.size(); ++k) {
    cumulative += sorted[k];
    const Scalar candidate = (cumulative - radius) / static_cast<Scalar>(k + 1);
    if (sorted[k] > candidate) theta = candidate;
  }
  return theta;
}

/// Sum of row l2 norms.
template <typename Derived>
typename Derived::RealScalar mixed_norm(const Eigen::MatrixBase<Derived>& X) {
  return X.rowwise().norm().sum();
}

/// Euclidean projection onto {X : sum_a ||X_a,:||_2 <= zeta}. Each row keeps
/// its direction and is shrunk by a common soft threshold on the row norms.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> project_l12_ball(
    const Eigen::MatrixBase<Derived>& X, typename Derived::RealScalar zeta) {
  using Real = typename Derived::RealScalar;
  if (!(zeta > Real(0))) throw std::invalid_argument("mixed-norm bound must be positive");
  Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> out = X;
  const Eigen::Matrix<Real, Eigen::Dynamic, 1> norms = X.rowwise().norm();
  const Real theta = simplex_threshold(norms, zeta);
  if (theta == Real(0)) return out;
  for (Index a = 0; a < out.rows(); ++a) {
    const Real r = norms(a);
    out.row(a) *= r > theta ? (r - theta) / r : Real(0);
  }
  return out;
}

// ---------------------------------------------------------------------------

/// Measurement functionals acting on the real representation of the lifted
/// variable. Real symmetric data act on n x n matrices directly. Complex
/// Hermitian data act on the 2n x 2n embedding X_R = [[Re X, -Im X], [Im X, Re X]]
/// through (1/2) Tr(M_R X_R) = Tr(M X), so every value stays in physical units.
class LiftedOperator {
 public:
  static LiftedOperator from_transfer(std::span<const TransferMatrix> transfer,
                                      bool force_embedding = false);

  Index size() const { return n_; }
  Index dim() const { return embedded_ ? 2 * n_ : n_; }
  bool embedded() const { return embedded_; }
  Index count() const { return rows_.rows(); }
  /// Row k is the column-major vectorization of the k-th (embedded) operator.
  const Eigen::MatrixXd& rows() const { return rows_; }

  /// Real-representation indices belonging to complex indices `support`.
  std::vector<Index> real_indices(std::span<const Index> support) const;

  /// Tr(M_u X) for every u, X in real representation.
  Eigen::VectorXd apply(const Eigen::MatrixXd& X) const;

  /// Real embedding of a Hermitian matrix (identity when not embedded).
  Eigen::MatrixXd embed(const Eigen::MatrixXcd& X) const;
  /// Inverse of embed, averaging the redundant blocks.
  Eigen::MatrixXcd restore(const Eigen::MatrixXd& X) const;

  /// Tr(X) in physical units.
  double trace(const Eigen::MatrixXd& X) const;
  /// Mixed l1,2 norm of the complex matrix represented by X.
  double mixed_norm(const Eigen::MatrixXd& X) const;
  /// Diagonal of the complex matrix represented by X.
  Eigen::VectorXd diagonal(const Eigen::MatrixXd& X) const;

 private:
  Index n_ = 0;
  bool embedded_ = false;
  Eigen::MatrixXd rows_;
};

struct SubproblemSpec {
  std::shared_ptr<const LiftedOperator> op;
  Eigen::MatrixXd weight;  // W, symmetric, op->dim() square
  Eigen::VectorXd measurements;
  double consistency = 0.0;  // eps
  double trace_floor = 0.0;
  double mixed_norm_bound = std::numeric_limits<double>::infinity();  // zeta
  std::vector<Index> off_support;  // complex indices forced to zero

  void validate() const;
  /// Complement of off_support, sorted.
  std::vector<Index> support() const;
};

/// Worst violation of each constraint family. `absolute` is in the family's
/// own units; `relative` is normalized by max|y|, trace_floor, zeta, ||X||.
struct FeasibilityReport {
  struct Residual {
    double absolute = 0.0;
    double relative = 0.0;
  };
  Residual measurement;
  Residual trace;
  Residual mixed_norm;
  Residual psd;
  Residual support;

  double max_relative() const;
  bool feasible(double tol) const { return max_relative() <= tol; }
  /// Number of families with a nonzero violation above `tol` (relative).
  int violated_families(double tol = 0.0) const;
};

FeasibilityReport check_feasibility(const Eigen::MatrixXd& X, const SubproblemSpec& spec);

enum class SubproblemStatus { optimal, infeasible, max_iterations };

struct SubproblemSolution {
  Eigen::MatrixXd X;  // real representation, full dimension, PSD
  SubproblemStatus status = SubproblemStatus::max_iterations;
  FeasibilityReport residuals;
  double objective = 0.0;  // Tr(W X)
  int iterations = 0;
};

struct SubproblemOptions {
  double tol_feas = 1e-6;
  /// Relative objective gap accepted when pricing new directions.
  double tol_opt = 1e-6;
  /// Budget of interior-point iterations over all restricted solves.
  int max_inner_iters = 20000;
  /// Maximum number of column-generation rounds.
  int patience = 500;
  /// Previous iterate in real representation; restricted to the support.
  const Eigen::MatrixXd* warm_start = nullptr;
};

SubproblemSolution solve_subproblem(const SubproblemSpec& spec, const SubproblemOptions& options = {});

}  // namespace qcs
