#include "qcs/conic.hpp"

#include <cmath>
#include <numbers>

#include "qcs/cone_program.hpp"
#include "qcs/packing.hpp"

namespace qcs {

namespace {

Eigen::MatrixXd embed_hermitian(const Eigen::MatrixXcd& M) {
  const Index n = M.rows();
  Eigen::MatrixXd R(2 * n, 2 * n);
  R.topLeftCorner(n, n) = M.real();
  R.topRightCorner(n, n) = -M.imag();
  R.bottomLeftCorner(n, n) = M.imag();
  R.bottomRightCorner(n, n) = M.real();
  return R;
}

// Row groups of the real representation: row i alone, or rows {g, g + d/2}
// for the complex embedding. Returns the group norms.
Eigen::VectorXd group_norms(const Eigen::MatrixXd& X, bool embedded) {
  const Eigen::VectorXd rows = X.rowwise().squaredNorm();
  if (!embedded) return rows.cwiseSqrt();
  const Index h = X.rows() / 2;
  return (rows.head(h) + rows.tail(h)).cwiseSqrt();
}

double relative_to(double value, double scale) { return scale > 0.0 ? value / scale : value; }

}  // namespace

// ---------------------------------------------------------------------------

LiftedOperator LiftedOperator::from_transfer(std::span<const TransferMatrix> transfer,
                                             bool force_embedding) {
  if (transfer.empty()) throw std::invalid_argument("no transfer matrices");
  LiftedOperator op;
  op.n_ = transfer.front().matrix.rows();
  bool complex_data = force_embedding;
  for (const auto& t : transfer) {
    if (t.matrix.rows() != op.n_ || t.matrix.cols() != op.n_)
      throw std::invalid_argument("transfer matrices have inconsistent dimensions");
    if (!t.matrix.allFinite()) throw std::invalid_argument("transfer matrix is not finite");
    const double scale = t.matrix.cwiseAbs().maxCoeff();
    if (t.matrix.imag().cwiseAbs().maxCoeff() > 1e-14 * scale) complex_data = true;
  }
  op.embedded_ = complex_data;
  const Index d = op.dim();
  op.rows_.resize(static_cast<Index>(transfer.size()), d * d);
  for (std::size_t k = 0; k < transfer.size(); ++k) {
    const Eigen::MatrixXd M =
        complex_data ? Eigen::MatrixXd(0.5 * embed_hermitian(transfer[k].matrix))
                     : Eigen::MatrixXd(transfer[k].matrix.real());
    op.rows_.row(static_cast<Index>(k)) = M.reshaped().transpose();
  }
  return op;
}

std::vector<Index> LiftedOperator::real_indices(std::span<const Index> support) const {
  std::vector<Index> r(support.begin(), support.end());
  if (embedded_)
    for (Index i : support) r.push_back(i + n_);
  return r;
}

Eigen::VectorXd LiftedOperator::apply(const Eigen::MatrixXd& X) const {
  if (X.rows() != dim() || X.cols() != dim())
    throw std::invalid_argument("lifted variable has the wrong dimension");
  return rows_ * X.reshaped();
}

Eigen::MatrixXd LiftedOperator::embed(const Eigen::MatrixXcd& X) const {
  if (X.rows() != n_ || X.cols() != n_) throw std::invalid_argument("matrix has the wrong dimension");
  return embedded_ ? embed_hermitian(X) : Eigen::MatrixXd(X.real());
}

Eigen::MatrixXcd LiftedOperator::restore(const Eigen::MatrixXd& X) const {
  if (X.rows() != dim() || X.cols() != dim())
    throw std::invalid_argument("lifted variable has the wrong dimension");
  if (!embedded_) return X.cast<Complex>();
  const Index n = n_;
  const Eigen::MatrixXd re = 0.5 * (X.topLeftCorner(n, n) + X.bottomRightCorner(n, n));
  const Eigen::MatrixXd im = 0.5 * (X.bottomLeftCorner(n, n) - X.topRightCorner(n, n));
  Eigen::MatrixXcd out(n, n);
  out.real() = re;
  out.imag() = im;
  return out;
}

double LiftedOperator::trace(const Eigen::MatrixXd& X) const {
  return embedded_ ? 0.5 * X.trace() : X.trace();
}

double LiftedOperator::mixed_norm(const Eigen::MatrixXd& X) const {
  const double s = group_norms(X, embedded_).sum();
  return embedded_ ? s / std::numbers::sqrt2 : s;
}

Eigen::VectorXd LiftedOperator::diagonal(const Eigen::MatrixXd& X) const {
  if (!embedded_) return X.diagonal();
  return 0.5 * (X.diagonal().head(n_) + X.diagonal().tail(n_));
}

// ---------------------------------------------------------------------------

void SubproblemSpec::validate() const {
  if (!op) throw std::invalid_argument("subproblem has no measurement operator");
  const Index d = op->dim();
  if (weight.rows() != d || weight.cols() != d)
    throw std::invalid_argument("weight matrix has the wrong dimension");
  if (!weight.allFinite()) throw std::invalid_argument("weight matrix is not finite");
  if ((weight - weight.transpose()).cwiseAbs().maxCoeff() > 1e-9 * weight.cwiseAbs().maxCoeff())
    throw std::invalid_argument("weight matrix is not symmetric");
  if (measurements.size() != op->count())
    throw std::invalid_argument("measurement count does not match the operator");
  if (!measurements.allFinite()) throw std::invalid_argument("measurements are not finite");
  if (!(consistency >= 0.0)) throw std::invalid_argument("consistency band must be nonnegative");
  if (!(mixed_norm_bound > 0.0)) throw std::invalid_argument("mixed-norm bound must be positive");
  if (!std::isfinite(trace_floor)) throw std::invalid_argument("trace floor must be finite");
  for (Index i : off_support)
    if (i < 0 || i >= op->size()) throw std::invalid_argument("off-support index out of range");
}

std::vector<Index> SubproblemSpec::support() const {
  std::vector<bool> off(static_cast<std::size_t>(op->size()), false);
  for (Index i : off_support) off[static_cast<std::size_t>(i)] = true;
  std::vector<Index> s;
  for (Index i = 0; i < op->size(); ++i)
    if (!off[static_cast<std::size_t>(i)]) s.push_back(i);
  return s;
}

double FeasibilityReport::max_relative() const {
  return std::max({measurement.relative, trace.relative, mixed_norm.relative, psd.relative,
                   support.relative});
}

int FeasibilityReport::violated_families(double tol) const {
  int count = 0;
  for (const auto* r : {&measurement, &trace, &mixed_norm, &psd, &support})
    if (r->relative > tol) ++count;
  return count;
}

FeasibilityReport check_feasibility(const Eigen::MatrixXd& X, const SubproblemSpec& spec) {
  const auto& op = *spec.op;
  if (X.rows() != op.dim() || X.cols() != op.dim())
    throw std::invalid_argument("lifted variable has the wrong dimension");

  FeasibilityReport r;
  const double y_scale = spec.measurements.size() ? spec.measurements.cwiseAbs().maxCoeff() : 0.0;
  const Eigen::VectorXd values = op.apply(X);
  const double band =
      ((values - spec.measurements).cwiseAbs().array() - spec.consistency).maxCoeff();
  r.measurement.absolute = std::max(0.0, band);
  r.measurement.relative = relative_to(r.measurement.absolute, y_scale);

  r.trace.absolute = std::max(0.0, spec.trace_floor - op.trace(X));
  r.trace.relative = relative_to(r.trace.absolute, spec.trace_floor);

  if (std::isfinite(spec.mixed_norm_bound)) {
    r.mixed_norm.absolute = std::max(0.0, op.mixed_norm(X) - spec.mixed_norm_bound);
    r.mixed_norm.relative = r.mixed_norm.absolute / spec.mixed_norm_bound;
  }

  const double norm = X.norm();
  if (X.size() > 0) {
    const Eigen::MatrixXd S = 0.5 * (X + X.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S, Eigen::EigenvaluesOnly);
    r.psd.absolute = std::max(0.0, -es.eigenvalues()(0));
    r.psd.relative = relative_to(r.psd.absolute, norm);
  }

  double off = 0.0;
  for (Index i : op.real_indices(spec.off_support)) {
    off = std::max(off, X.row(i).cwiseAbs().maxCoeff());
    off = std::max(off, X.col(i).cwiseAbs().maxCoeff());
  }
  r.support.absolute = off;
  r.support.relative = relative_to(off, X.cwiseAbs().maxCoeff());
  return r;
}

// ---------------------------------------------------------------------------

namespace {

// Linear functional <B, X> <= bound on the support block, with B = coef * base
// where base is a measurement matrix, the identity or a stored cut.
struct Row {
  enum class Kind { measurement, trace, cut } kind;
  Index index = 0;
  double coef = 1.0;
  double bound = 0.0;
};

// Column generation over X = V S V^T. Each restricted problem is a small dense
// cone program; its multipliers give the full-space dual slack W + sum z_r B_r
// (or the Farkas matrix sum z_r B_r), whose negative eigenvectors are the
// directions V lacks. The mixed-norm ball enters through linear cuts, which
// are valid because sum_a ||X_a|| >= sum_a <X_a, Xh_a> / ||Xh_a||.
class SubspaceSolver {
 public:
  SubspaceSolver(const SubproblemSpec& spec, const SubproblemOptions& options);
  SubproblemSolution run();

 private:
  Eigen::MatrixXd base(const Row& r) const;
  ConeProgram restricted_program(const Eigen::MatrixXd& V) const;
  Eigen::MatrixXd combine(const Eigen::VectorXd& z) const;
  Eigen::MatrixXd lift(const Eigen::MatrixXd& V, const Eigen::VectorXd& x) const;
  Eigen::MatrixXd initial_basis() const;
  bool add_cut(const Eigen::MatrixXd& Xs);
  SubproblemSolution finish(const Eigen::MatrixXd& Xs, SubproblemStatus status, int iterations) const;

  const SubproblemSpec& spec_;
  const SubproblemOptions& options_;
  std::vector<Index> idx_;  // support in real representation
  Index m_ = 0;
  std::vector<Eigen::MatrixXd> M_;  // measurement matrices on the support
  std::vector<Eigen::MatrixXd> cuts_;
  std::vector<Row> rows_;
  Eigen::MatrixXd W_;  // weight on the support, unit max entry
  double scale_ = 1.0;  // X = scale * Xs
  double trace_coef_ = 1.0;
  int max_basis_ = 40;
  bool trivially_infeasible_ = false;
};

SubspaceSolver::SubspaceSolver(const SubproblemSpec& spec, const SubproblemOptions& options)
    : spec_(spec), options_(options) {
  const auto& op = *spec.op;
  const Index d = op.dim();
  const auto support = spec.support();
  idx_ = op.real_indices(support);
  std::sort(idx_.begin(), idx_.end());
  m_ = static_cast<Index>(idx_.size());
  trace_coef_ = op.embedded() ? 0.5 : 1.0;
  max_basis_ = static_cast<int>(std::min<Index>(m_, 40));

  W_ = spec.weight(idx_, idx_);
  W_ = 0.5 * (W_ + W_.transpose()).eval();
  const double w_max = W_.size() ? W_.cwiseAbs().maxCoeff() : 0.0;
  if (w_max > 0.0) W_ /= w_max;

  const Index K = op.count();
  M_.reserve(static_cast<std::size_t>(K));
  double y_sum = 0.0, tr_sum = 0.0;
  for (Index k = 0; k < K; ++k) {
    const Eigen::MatrixXd full = op.rows().row(k).reshaped(d, d);
    M_.push_back(full(idx_, idx_));
    y_sum += std::abs(spec.measurements(k));
    tr_sum += std::abs(M_.back().trace());
  }
  // X ~ a I reproduces the measurements on average; scale_ is that trace.
  double estimate = tr_sum > 0.0 ? static_cast<double>(m_) * y_sum / tr_sum : 0.0;
  estimate = std::max(estimate, spec.trace_floor / trace_coef_);
  scale_ = estimate > 0.0 ? estimate : 1.0;

  // Half of the feasibility tolerance widens every constraint, which gives the
  // restricted programs an interior even when eps = 0.
  const double y_max = spec.measurements.size() ? spec.measurements.cwiseAbs().maxCoeff() : 0.0;
  const double slack = 0.5 * options.tol_feas * y_max;
  double norm_max = 0.0;
  for (const auto& M : M_) norm_max = std::max(norm_max, M.norm());
  for (Index k = 0; k < K; ++k) {
    const double norm = M_[static_cast<std::size_t>(k)].norm();
    const double y = spec.measurements(k);
    const double band = spec.consistency + slack;
    // A functional that vanishes on the support is a constant 0.
    if (!(norm > 1e-12 * norm_max)) {
      if (std::abs(y) > band) trivially_infeasible_ = true;
      continue;
    }
    const double s = 1.0 / norm;
    rows_.push_back({Row::Kind::measurement, k, s, s * (y + band) / scale_});
    rows_.push_back({Row::Kind::measurement, k, -s, -s * (y - band) / scale_});
  }
  if (spec.trace_floor > 0.0)
    rows_.push_back({Row::Kind::trace, 0, -1.0,
                     -(1.0 - 0.5 * options.tol_feas) * spec.trace_floor / trace_coef_ / scale_});
}

Eigen::MatrixXd SubspaceSolver::base(const Row& r) const {
  switch (r.kind) {
    case Row::Kind::measurement:
      return M_[static_cast<std::size_t>(r.index)];
    case Row::Kind::trace:
      return Eigen::MatrixXd::Identity(m_, m_);
    case Row::Kind::cut:
      return cuts_[static_cast<std::size_t>(r.index)];
  }
  return {};
}

ConeProgram SubspaceSolver::restricted_program(const Eigen::MatrixXd& V) const {
  const Index q = V.cols();
  ConeProgram p;
  // Unit objective so the IPM tolerances are relative to the weight actually
  // seen on span(V), which can be orders of magnitude below max|W|.
  p.c = svec(V.transpose() * W_ * V);
  const double c_norm = p.c.norm();
  if (c_norm > 0.0) p.c /= c_norm;
  p.G.resize(static_cast<Index>(rows_.size()), svec_length(q));
  p.h.resize(static_cast<Index>(rows_.size()));
  // Consecutive rows often share a base matrix; project it once.
  Index last_index = -1;
  Row::Kind last_kind = Row::Kind::trace;
  Eigen::VectorXd packed;
  for (std::size_t r = 0; r < rows_.size(); ++r) {
    const Row& row = rows_[r];
    if (row.kind != last_kind || row.index != last_index || packed.size() == 0) {
      const Eigen::MatrixXd B = base(row);
      packed = svec(V.transpose() * B * V);
      last_kind = row.kind;
      last_index = row.index;
    }
    p.G.row(static_cast<Index>(r)) = row.coef * packed.transpose();
    p.h(static_cast<Index>(r)) = row.bound;
  }
  return p;
}

// sum_r z_r B_r on the support.
Eigen::MatrixXd SubspaceSolver::combine(const Eigen::VectorXd& z) const {
  Eigen::MatrixXd Y = Eigen::MatrixXd::Zero(m_, m_);
  for (std::size_t r = 0; r < rows_.size(); ++r) {
    const double w = z(static_cast<Index>(r)) * rows_[r].coef;
    if (w == 0.0) continue;
    if (rows_[r].kind == Row::Kind::trace) Y.diagonal().array() += w;
    else Y += w * base(rows_[r]);
  }
  return 0.5 * (Y + Y.transpose());
}

// V S V^T with S clipped to the PSD cone.
Eigen::MatrixXd SubspaceSolver::lift(const Eigen::MatrixXd& V, const Eigen::VectorXd& x) const {
  const Eigen::MatrixXd S = project_psd(smat(x));
  return V * S * V.transpose();
}

Eigen::MatrixXd SubspaceSolver::initial_basis() const {
  // Range of the previous iterate when it is low rank, otherwise the leading
  // eigenvectors of sum_u y_u M_u.
  if (options_.warm_start) {
    const Eigen::MatrixXd& Xw = *options_.warm_start;
    if (Xw.rows() == spec_.op->dim() && Xw.cols() == spec_.op->dim() && Xw.allFinite()) {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (Xw(idx_, idx_) + Xw(idx_, idx_).transpose()));
      const auto& lambda = es.eigenvalues();
      const double top = lambda.size() ? lambda(lambda.size() - 1) : 0.0;
      Index rank = 0;
      while (rank < lambda.size() && lambda(lambda.size() - 1 - rank) > 1e-9 * top) ++rank;
      if (top > 0.0 && rank <= max_basis_ / 2) return es.eigenvectors().rightCols(std::max<Index>(rank, 1));
    }
  }
  Eigen::MatrixXd Y = Eigen::MatrixXd::Zero(m_, m_);
  for (std::size_t k = 0; k < M_.size(); ++k) Y += spec_.measurements(static_cast<Index>(k)) * M_[k];
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (Y + Y.transpose()));
  return es.eigenvectors().rightCols(std::min<Index>(m_, 4));
}

// Appends the directions of `candidates` not already spanned by V.
int extend_basis(Eigen::MatrixXd& V, const Eigen::MatrixXd& candidates, Index limit) {
  int added = 0;
  for (Index j = 0; j < candidates.cols() && V.cols() < limit; ++j) {
    Eigen::VectorXd v = candidates.col(j);
    for (int pass = 0; pass < 2; ++pass) v -= V * (V.transpose() * v);
    const double norm = v.norm();
    if (norm < 1e-6) continue;
    V.conservativeResize(Eigen::NoChange, V.cols() + 1);
    V.col(V.cols() - 1) = v / norm;
    ++added;
  }
  return added;
}

// Eigenvectors of S with eigenvalue below -threshold, most negative first.
Eigen::MatrixXd negative_directions(const Eigen::MatrixXd& S, double threshold, Index count, double* lowest) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S);
  if (es.info() != Eigen::Success) throw std::runtime_error("eigendecomposition failed");
  const auto& lambda = es.eigenvalues();
  *lowest = lambda.size() ? lambda(0) : 0.0;
  Index k = 0;
  while (k < lambda.size() && k < count && lambda(k) < -threshold) ++k;
  return es.eigenvectors().leftCols(k);
}

bool SubspaceSolver::add_cut(const Eigen::MatrixXd& Xs) {
  const bool embedded = spec_.op->embedded();
  const Eigen::VectorXd norms = Xs.rowwise().norm();
  Eigen::VectorXd inv(m_);
  if (embedded) {
    // Support indices come in pairs (g, g + n); group them by position.
    const Index h = m_ / 2;
    for (Index g = 0; g < h; ++g) {
      const double r = std::hypot(norms(g), norms(g + h));
      inv(g) = inv(g + h) = r > 0.0 ? 1.0 / r : 0.0;
    }
  } else {
    for (Index a = 0; a < m_; ++a) inv(a) = norms(a) > 0.0 ? 1.0 / norms(a) : 0.0;
  }
  Eigen::MatrixXd B = inv.asDiagonal() * Xs;
  B = 0.5 * (B + B.transpose()).eval();
  if (embedded) B /= std::numbers::sqrt2;
  const double norm = B.norm();
  if (!(norm > 0.0)) return false;
  cuts_.push_back(B);
  rows_.push_back({Row::Kind::cut, static_cast<Index>(cuts_.size() - 1), 1.0 / norm,
                   (1.0 + 0.5 * options_.tol_feas) * spec_.mixed_norm_bound / scale_ / norm});
  return true;
}

SubproblemSolution SubspaceSolver::finish(const Eigen::MatrixXd& Xs, SubproblemStatus status,
                                          int iterations) const {
  SubproblemSolution sol;
  const Index d = spec_.op->dim();
  sol.X = Eigen::MatrixXd::Zero(d, d);
  sol.X(idx_, idx_) = scale_ * Xs;
  sol.X = 0.5 * (sol.X + sol.X.transpose()).eval();
  if (!sol.X.allFinite()) throw std::runtime_error("subproblem iterate is not finite");
  sol.residuals = check_feasibility(sol.X, spec_);
  sol.objective = (spec_.weight.cwiseProduct(sol.X)).sum();
  sol.iterations = iterations;
  sol.status = status;
  if (status == SubproblemStatus::optimal && !sol.residuals.feasible(options_.tol_feas))
    sol.status = SubproblemStatus::max_iterations;
  return sol;
}

SubproblemSolution SubspaceSolver::run() {
  if (trivially_infeasible_) return finish(Eigen::MatrixXd::Zero(m_, m_), SubproblemStatus::infeasible, 0);
  if (m_ == 0) {
    // Everything is forced to zero: feasible only if zero fits every band.
    const bool zero_fits =
        (spec_.measurements.cwiseAbs().array() <= spec_.consistency).all() && spec_.trace_floor <= 0.0;
    return finish(Eigen::MatrixXd::Zero(0, 0),
                  zero_fits ? SubproblemStatus::optimal : SubproblemStatus::infeasible, 0);
  }

  Eigen::MatrixXd V = initial_basis();
  ConeOptions cone;
  int iterations = 0;
  Eigen::MatrixXd best;  // last restricted optimum
  // Feasible points satisfy Tr(X) <= sum_a ||X_a|| <= zeta (twice that for
  // the real embedding); without a ball, traces beyond 1e6 times the
  // working scale are treated as unattainable.
  const double trace_cap = std::isfinite(spec_.mixed_norm_bound)
                               ? spec_.mixed_norm_bound / (trace_coef_ * scale_)
                               : 1e6;

  for (int round = 0; round < options_.patience; ++round) {
    if (iterations >= options_.max_inner_iters) break;
    cone.max_iterations = std::min(100, options_.max_inner_iters - iterations);
    const ConeSolution s = solve_cone_program(restricted_program(V), cone);
    iterations += s.iterations;
    double lowest = 0.0;

    if (s.status == ConeStatus::primal_infeasible) {
      // Farkas matrix Y with <Y, X> <= -1 on the restricted set; it proves
      // infeasibility of the full problem once Y >= -1/trace_cap.
      const Eigen::MatrixXd Y = combine(s.z);
      const Eigen::MatrixXd dirs = negative_directions(Y, 1.0 / trace_cap, 4, &lowest);
      if (lowest >= -1.0 / trace_cap)
        return finish(Eigen::MatrixXd::Zero(m_, m_), SubproblemStatus::infeasible, iterations);
      if (extend_basis(V, dirs, max_basis_) == 0) break;
      continue;
    }
    if (s.status == ConeStatus::dual_infeasible || !s.x.allFinite()) break;

    const Eigen::MatrixXd Xs = lift(V, s.x);
    best = Xs;
    // Pricing: the restricted optimum is optimal for the full problem when
    // W + sum z_r B_r is PSD; a negative eigenvalue -e bounds the possible
    // decrease by e Tr(X).
    const double c_norm = svec(V.transpose() * W_ * V).norm();
    const double w_scale = c_norm > 0.0 ? 1.0 / c_norm : 1.0;
    const double objective = w_scale * (W_.cwiseProduct(Xs)).sum();
    const double trace = std::max(Xs.trace(), std::numeric_limits<double>::min());
    const double noise = 10.0 * cone.feastol;
    const double threshold = std::max(options_.tol_opt * objective / trace, noise);
    const Eigen::MatrixXd dirs = negative_directions(w_scale * W_ + combine(s.z), threshold, 4, &lowest);
    if (lowest < -threshold && s.status == ConeStatus::optimal) {
      if (extend_basis(V, dirs, max_basis_) > 0) continue;
    }
    if (std::isfinite(spec_.mixed_norm_bound) &&
        spec_.op->mixed_norm(scale_ * Xs) > (1.0 + 0.5 * options_.tol_feas) * spec_.mixed_norm_bound) {
      if (add_cut(Xs)) continue;
    }
    if (s.status != ConeStatus::optimal) {
      // Nearly infeasible restricted problem: the multipliers of the stalled
      // iterate approximate a Farkas ray, or failing that a dual point.
      const SubproblemSolution candidate = finish(Xs, SubproblemStatus::optimal, iterations);
      if (candidate.status == SubproblemStatus::optimal && lowest >= -threshold) return candidate;
      const Eigen::MatrixXd Y = combine(s.z);
      double y_lowest = 0.0;
      const Eigen::MatrixXd ray = negative_directions(Y, 1e-9 * Y.norm(), 4, &y_lowest);
      if (extend_basis(V, ray, max_basis_) + extend_basis(V, dirs, max_basis_) > 0) continue;
      return candidate;
    }
    return finish(Xs, SubproblemStatus::optimal, iterations);
  }
  if (best.size() == 0) best = Eigen::MatrixXd::Zero(m_, m_);
  return finish(best, SubproblemStatus::max_iterations, iterations);
}

}  // namespace

SubproblemSolution solve_subproblem(const SubproblemSpec& spec, const SubproblemOptions& options) {
  spec.validate();
  if (!(options.tol_feas > 0.0)) throw std::invalid_argument("tol_feas must be positive");
  if (options.max_inner_iters <= 0) throw std::invalid_argument("max_inner_iters must be positive");
  if (options.patience <= 0) throw std::invalid_argument("patience must be positive");
  return SubspaceSolver(spec, options).run();
}

}  // namespace qcs
