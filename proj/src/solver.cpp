#include "qcs/solver.hpp"

#include <algorithm>
#include <memory>
#include <string>

namespace qcs {

void SolverParams::validate() const {
  if (!(delta > 0.0)) throw std::invalid_argument("delta must be positive");
  if (!(zeta > 0.0)) throw std::invalid_argument("zeta must be positive");
  if (!(epsilon >= 0.0) || std::isinf(epsilon)) throw std::invalid_argument("epsilon must be nonnegative");
  if (!(threshold > 0.0 && threshold < 1.0)) throw std::invalid_argument("threshold must lie in (0, 1)");
  if (!(threshold_step > 0.0)) throw std::invalid_argument("threshold_step must be positive");
  if (!(rank_ratio_threshold > 1.0)) throw std::invalid_argument("rank_ratio_threshold must exceed 1");
  if (max_outer_iters < 1) throw std::invalid_argument("max_outer_iters must be at least 1");
  if (!(tol_feas > 0.0)) throw std::invalid_argument("tol_feas must be positive");
  if (max_inner_iters < 1) throw std::invalid_argument("max_inner_iters must be at least 1");
  if (patience < 1) throw std::invalid_argument("patience must be at least 1");
}

SolverParams without_sparsity(SolverParams params) {
  params.thresholding = false;
  params.zeta = std::numeric_limits<double>::infinity();
  return params;
}

ThresholdOutcome threshold_support(const Eigen::VectorXd& diag, std::span<const Index> off_support,
                                   double threshold, double threshold_step) {
  const Index n = diag.size();
  std::vector<bool> off(static_cast<std::size_t>(n), false);
  for (Index i : off_support) {
    if (i < 0 || i >= n) throw std::invalid_argument("off-support index out of range");
    off[static_cast<std::size_t>(i)] = true;
  }
  std::vector<Index> remaining;
  for (Index i = 0; i < n; ++i)
    if (!off[static_cast<std::size_t>(i)]) remaining.push_back(i);

  ThresholdOutcome out;
  out.off_support.assign(off_support.begin(), off_support.end());
  std::sort(out.off_support.begin(), out.off_support.end());
  out.threshold = threshold;
  if (remaining.size() <= 1) {
    out.saturated = true;
    return out;
  }

  const double peak = diag.cwiseAbs().maxCoeff();
  for (int k = 0;; ++k) {
    // T_k = T + k dT, not accumulated, so the escalation count is exact.
    const double t = threshold + static_cast<double>(k) * threshold_step;
    if (t >= 1.0) break;
    std::vector<Index> removed;
    for (Index i : remaining)
      if (diag(i) < t * peak) removed.push_back(i);
    if (removed.empty()) continue;
    if (removed.size() == remaining.size()) break;
    out.off_support.insert(out.off_support.end(), removed.begin(), removed.end());
    std::sort(out.off_support.begin(), out.off_support.end());
    out.threshold = t;
    out.increments = k;
    return out;
  }
  out.saturated = true;
  return out;
}

RankOneFactor extract_rank1(const Eigen::MatrixXcd& X) {
  if (X.rows() != X.cols()) throw std::invalid_argument("extract_rank1 needs a square matrix");
  RankOneFactor r;
  const Index n = X.rows();
  if (n == 0) return r;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(X);
  if (es.info() != Eigen::Success) throw std::runtime_error("eigendecomposition failed");

  // For a Hermitian matrix the singular values are |lambda|.
  std::vector<Index> order(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
  const auto& lambda = es.eigenvalues();
  std::stable_sort(order.begin(), order.end(),
                   [&](Index p, Index q) { return std::abs(lambda(p)) > std::abs(lambda(q)); });
  r.singular_values.resize(n);
  for (Index i = 0; i < n; ++i) r.singular_values(i) = std::abs(lambda(order[static_cast<std::size_t>(i)]));

  const Index top = order.front();
  const double s1 = r.singular_values(0);
  r.a = es.eigenvectors().col(top) * std::sqrt(s1);
  // Fix the arbitrary eigenvector phase: largest entry real and positive.
  Index k = 0;
  r.a.cwiseAbs().maxCoeff(&k);
  if (std::abs(r.a(k)) > 0.0) r.a *= std::conj(r.a(k)) / std::abs(r.a(k));

  const double s2 = n > 1 ? r.singular_values(1) : 0.0;
  r.rank_ratio = s2 > 0.0 ? s1 / s2 : std::numeric_limits<double>::infinity();
  return r;
}

const char* to_string(ReconstructionStatus s) {
  switch (s) {
    case ReconstructionStatus::converged: return "converged";
    case ReconstructionStatus::iteration_cap: return "iteration-cap";
    case ReconstructionStatus::stalled: return "stalled";
    case ReconstructionStatus::infeasible: return "infeasible";
  }
  return "unknown";
}

// ---------------------------------------------------------------------------

namespace {

bool accepted(const SubproblemSolution& sol, double tol) {
  if (sol.status == SubproblemStatus::infeasible) return false;
  return sol.residuals.feasible(tol);
}

}  // namespace

ReconstructionResult solve_qcs(const Measurements& y, std::span<const TransferMatrix> transfer,
                               const SolverParams& params) {
  params.validate();
  if (transfer.empty()) throw std::invalid_argument("no transfer matrices");
  if (static_cast<Index>(transfer.size()) != y.size())
    throw std::invalid_argument("measurement count does not match the transfer matrices");
  if (!y.values.allFinite()) throw std::invalid_argument("measurements are not finite");

  auto op = std::make_shared<const LiftedOperator>(LiftedOperator::from_transfer(transfer));
  const Index D = op->dim();

  SubproblemSpec spec;
  spec.op = op;
  spec.measurements = y.values;
  spec.consistency = params.epsilon;
  spec.trace_floor = y.values.squaredNorm();
  spec.mixed_norm_bound = params.zeta;

  SubproblemOptions options;
  options.tol_feas = params.tol_feas;
  options.max_inner_iters = params.max_inner_iters;
  options.patience = params.patience;

  ReconstructionResult result;
  Eigen::MatrixXd X = Eigen::MatrixXd::Identity(D, D);
  std::vector<Index> off;

  bool have_success = false;
  Eigen::MatrixXd last_X;
  std::vector<Index> last_off;
  bool shrinking = params.thresholding;
  ReconstructionStatus status = ReconstructionStatus::iteration_cap;

  auto rank_ratio_of = [&](const Eigen::MatrixXd& Z) { return extract_rank1(op->restore(Z)).rank_ratio; };

  int k = 0;
  while (k < params.max_outer_iters) {
    ++k;
    spec.weight = logdet_weight(X, params.delta);
    spec.off_support = off;
    options.warm_start = have_success ? &last_X : nullptr;
    const SubproblemSolution sol = solve_subproblem(spec, options);

    OuterIteration record;
    record.off_support_size = off.size();
    record.status = sol.status;
    record.thresholding = shrinking;
    record.objective = sol.objective;
    record.previous_objective = spec.weight.cwiseProduct(X).sum();
    record.max_residual = sol.residuals.max_relative();
    record.inner_iterations = sol.iterations;
    record.accepted = accepted(sol, params.tol_feas);

    if (record.accepted) {
      X = sol.X;
      last_X = X;
      last_off = off;
      have_success = true;
      record.rank_ratio = rank_ratio_of(X);
      result.history.push_back(record);

      if (shrinking) {
        // Escalation of T only lasts for the step that needed it; every
        // iteration starts again from the configured T.
        const ThresholdOutcome t =
            threshold_support(op->diagonal(X), off, params.threshold, params.threshold_step);
        if (t.saturated) {
          status = rank_ratio_converged(record.rank_ratio, params.rank_ratio_threshold)
                       ? ReconstructionStatus::converged
                       : ReconstructionStatus::stalled;
          break;
        }
        off = t.off_support;
      } else if (rank_ratio_converged(record.rank_ratio, params.rank_ratio_threshold)) {
        status = ReconstructionStatus::converged;
        break;
      }
      continue;
    }

    result.history.push_back(record);
    if (!have_success) {
      status = ReconstructionStatus::infeasible;
      break;
    }
    if (!shrinking) {
      status = ReconstructionStatus::stalled;
      break;
    }
    // The support became too small: return to the last feasible one and keep
    // iterating there.
    shrinking = false;
    off = last_off;
    X = last_X;
    if (rank_ratio_converged(rank_ratio_of(X), params.rank_ratio_threshold)) {
      status = ReconstructionStatus::converged;
      break;
    }
  }

  result.outer_iterations = k;
  result.status = status;
  result.off_support = have_success ? last_off : off;
  const Eigen::MatrixXd final_X = have_success ? last_X : Eigen::MatrixXd::Zero(D, D);
  result.X = op->restore(final_X);
  const RankOneFactor r1 = extract_rank1(result.X);
  result.a = r1.a;
  // The eigenvector carries rounding noise where X is exactly zero.
  for (Index i : result.off_support) result.a(i) = 0.0;
  result.singular_values = r1.singular_values;
  result.rank_ratio = r1.rank_ratio;
  return result;
}

SolverParams oracle_parameters(const Eigen::VectorXcd& a_true, const Measurements& clean,
                               const Measurements& noisy, SolverParams base) {
  if (clean.size() != noisy.size()) throw std::invalid_argument("measurement sets differ in size");
  const Eigen::MatrixXcd X = a_true * a_true.adjoint();
  const double mixed = X.rowwise().norm().sum();
  base.zeta = mixed > 0.0 ? 1.1 * mixed : std::numeric_limits<double>::infinity();
  base.epsilon = clean.size() ? (noisy.values - clean.values).cwiseAbs().maxCoeff() : 0.0;
  return base;
}

}  // namespace qcs
