// Dense conic program with linear inequalities and one PSD block:
//
//   minimize    c . x
//   subject to  G x <= h
//               smat(x) PSD
//
// solved by a primal-dual interior-point method on the homogeneous
// self-dual embedding with Nesterov-Todd scaling and a Mehrotra corrector.
// Sizes are meant to be small (a few hundred unknowns).
#pragma once

#include <Eigen/Dense>

namespace qcs {

struct ConeProgram {
  Eigen::VectorXd c;  // packed objective, length q(q+1)/2
  Eigen::MatrixXd G;  // rows are packed constraint functionals
  Eigen::VectorXd h;
};

struct ConeOptions {
  double feastol = 1e-8;
  double abstol = 1e-9;
  double reltol = 1e-8;
  int max_iterations = 100;
};

enum class ConeStatus { optimal, primal_infeasible, dual_infeasible, stalled };

struct ConeSolution {
  ConeStatus status = ConeStatus::stalled;
  /// Optimal: primal point. Dual infeasible: improving ray. Stalled: best
  /// iterate seen.
  Eigen::VectorXd x;
  /// Multipliers of the linear rows (>= 0). Optimal: dual point with
  /// smat(c + G^T z) PSD. Primal infeasible: Farkas ray normalized to
  /// h . z = -1 with smat(G^T z) PSD.
  Eigen::VectorXd z;
  double primal_objective = 0.0;
  double dual_objective = 0.0;
  int iterations = 0;
};

ConeSolution solve_cone_program(const ConeProgram& program, const ConeOptions& options = {});

}  // namespace qcs
