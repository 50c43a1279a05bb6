#include "qcs/cone_program.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "qcs/packing.hpp"

namespace qcs {

Eigen::Index svec_order(Eigen::Index length) {
  const auto q = static_cast<Eigen::Index>(std::llround((std::sqrt(8.0 * static_cast<double>(length) + 1.0) - 1.0) / 2.0));
  if (svec_length(q) != length) throw std::invalid_argument("length is not a packed symmetric size");
  return q;
}

namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr double kInf = std::numeric_limits<double>::infinity();

// Iterate of the embedding. Linear and PSD parts of s and z are kept apart;
// the PSD parts are full symmetric matrices.
struct Point {
  VectorXd x;
  VectorXd sl, zl;
  MatrixXd S, Z;
  double tau = 1.0;
  double kappa = 1.0;
};

struct Direction {
  VectorXd x;
  VectorXd sl, zl;
  MatrixXd S, Z;
  double tau = 0.0;
  double kappa = 0.0;
};

// Nesterov-Todd scaling. Linear block: w = sqrt(s / z), lambda = sqrt(s z).
// PSD block: R with R^T Z R = R^-1 S R^-T = diag(lambda).
struct Scaling {
  VectorXd w, lam_l;
  MatrixXd R, Rinv;
  VectorXd lam;
  MatrixXd P;  // (R R^T)^-1

  // W(Z) and W^-T(S) for the PSD block.
  MatrixXd scale_z(const MatrixXd& Z) const { return R.transpose() * Z * R; }
  MatrixXd scale_s(const MatrixXd& S) const { return Rinv * S * Rinv.transpose(); }
  MatrixXd scale_t(const MatrixXd& Y) const { return R * Y * R.transpose(); }  // W^T
};

bool compute_scaling(const Point& p, Scaling& w) {
  w.w = (p.sl.array() / p.zl.array()).sqrt();
  w.lam_l = (p.sl.array() * p.zl.array()).sqrt();
  Eigen::LLT<MatrixXd> ls(p.S), lz(p.Z);
  if (ls.info() != Eigen::Success || lz.info() != Eigen::Success) return false;
  const MatrixXd Ls = ls.matrixL();
  const MatrixXd Lz = lz.matrixL();
  Eigen::JacobiSVD<MatrixXd> svd(Lz.transpose() * Ls, Eigen::ComputeFullU | Eigen::ComputeFullV);
  w.lam = svd.singularValues();
  if (w.lam.size() && !(w.lam.minCoeff() > 0.0)) return false;
  const VectorXd isq = w.lam.cwiseSqrt().cwiseInverse();
  w.R = Ls * svd.matrixV() * isq.asDiagonal();
  // R^-1 = Lambda^-1/2 U^T Lz^T since Lz^T Ls V = U Lambda.
  w.Rinv = isq.asDiagonal() * svd.matrixU().transpose() * Lz.transpose();
  w.P = w.Rinv.transpose() * w.Rinv;
  return true;
}

// Inverse of the Jordan product with lambda: solves lambda o u = v.
VectorXd jordan_div(const VectorXd& lam, const VectorXd& v) { return v.cwiseQuotient(lam); }

MatrixXd jordan_div(const VectorXd& lam, const MatrixXd& V) {
  MatrixXd U(V.rows(), V.cols());
  for (Index j = 0; j < V.cols(); ++j)
    for (Index i = 0; i < V.rows(); ++i) U(i, j) = 2.0 * V(i, j) / (lam(i) + lam(j));
  return U;
}

MatrixXd jordan(const MatrixXd& A, const MatrixXd& B) { return 0.5 * (A * B + B * A); }

// Largest step t with lambda + t * u in the cone (inf when unbounded).
double max_step(const VectorXd& lam, const VectorXd& u) {
  double t = kInf;
  for (Index i = 0; i < u.size(); ++i)
    if (u(i) < 0.0) t = std::min(t, -lam(i) / u(i));
  return t;
}

double max_step(const VectorXd& lam, const MatrixXd& U) {
  if (U.size() == 0) return kInf;
  const VectorXd isq = lam.cwiseSqrt().cwiseInverse();
  const MatrixXd T = isq.asDiagonal() * U * isq.asDiagonal();
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(0.5 * (T + T.transpose()), Eigen::EigenvaluesOnly);
  const double m = es.eigenvalues()(0);
  return m < 0.0 ? -1.0 / m : kInf;
}

double min_eig(const MatrixXd& S) {
  if (S.size() == 0) return kInf;
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(S, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

class Solver {
 public:
  Solver(const ConeProgram& prog, const ConeOptions& opt) : prog_(prog), opt_(opt) {
    n_ = prog.c.size();
    q_ = svec_order(n_);
    m_ = prog.G.rows();
    if (prog.G.cols() != n_ || prog.h.size() != m_)
      throw std::invalid_argument("cone program has inconsistent dimensions");
    if (!prog.c.allFinite() || !prog.G.allFinite() || !prog.h.allFinite())
      throw std::invalid_argument("cone program data are not finite");
    degree_ = static_cast<double>(m_ + q_);
  }

  ConeSolution run() {
    initialize();
    ConeSolution out;
    Point best = pt_;
    double best_merit = kInf, best_pcost = 0.0, best_dcost = 0.0;
    const double resx0 = std::max(1.0, prog_.c.norm());
    const double resz0 = std::max(1.0, prog_.h.norm());
    for (int it = 0;; ++it) {
      out.iterations = it;
      // Residuals of the embedding.
      const VectorXd Gtz = Gt(pt_.zl, pt_.Z);
      const VectorXd rx = Gtz + pt_.tau * prog_.c;
      const VectorXd Gx_l = prog_.G * pt_.x;
      const VectorXd rzl = pt_.sl + Gx_l - pt_.tau * prog_.h;
      const MatrixXd rZ = pt_.S - smat(pt_.x);
      const double cx = prog_.c.dot(pt_.x);
      const double hz = prog_.h.dot(pt_.zl);
      const double rt = pt_.kappa + cx + hz;
      const double sz = pt_.sl.dot(pt_.zl) + (pt_.S.cwiseProduct(pt_.Z)).sum();
      const double mu = (sz + pt_.tau * pt_.kappa) / (degree_ + 1.0);

      const double pres = std::sqrt(rzl.squaredNorm() + rZ.squaredNorm()) / pt_.tau / resz0;
      const double dres = rx.norm() / pt_.tau / resx0;
      const double pcost = cx / pt_.tau;
      const double dcost = -hz / pt_.tau;
      const double gap = sz / (pt_.tau * pt_.tau);
      double relgap = kInf;
      if (pcost < 0.0) relgap = gap / -pcost;
      else if (dcost > 0.0) relgap = gap / dcost;

      if (pres <= opt_.feastol && dres <= opt_.feastol && (gap <= opt_.abstol || relgap <= opt_.reltol)) {
        out.status = ConeStatus::optimal;
        out.x = pt_.x / pt_.tau;
        out.z = pt_.zl / pt_.tau;
        out.primal_objective = pcost;
        out.dual_objective = dcost;
        return out;
      }
      if (hz < 0.0) {
        const double pinf = Gtz.norm() / resx0 / -hz;
        if (pinf <= opt_.feastol) {
          out.status = ConeStatus::primal_infeasible;
          out.z = pt_.zl / -hz;
          out.x = pt_.x / pt_.tau;
          return out;
        }
      }
      if (cx < 0.0) {
        const double dinf = std::sqrt((Gx_l + pt_.sl).squaredNorm() + (pt_.S - smat(pt_.x)).squaredNorm()) /
                            resz0 / -cx;
        if (dinf <= opt_.feastol) {
          out.status = ConeStatus::dual_infeasible;
          out.x = pt_.x / -cx;
          out.z = pt_.zl / pt_.tau;
          return out;
        }
      }
      // Past the attainable accuracy the scaling degrades and the iterates
      // drift away; keep the best point seen and stop once that happens.
      // Far from tolerance a blow-up is the tau -> 0 trend of an infeasible
      // problem, so let the certificate checks above catch it instead.
      const double merit = std::max({pres / opt_.feastol, dres / opt_.feastol,
                                     std::min(gap / opt_.abstol, relgap / opt_.reltol)});
      if (merit < best_merit) {
        best_merit = merit;
        best = pt_;
        best_pcost = pcost;
        best_dcost = dcost;
      } else if (best_merit < 1e4 && merit > 1e3 * best_merit) {
        break;
      }
      if (it >= opt_.max_iterations) break;

      if (!compute_scaling(pt_, sc_) || !factor()) break;

      // Predictor.
      Direction aff;
      const VectorXd lam2_l = sc_.lam_l.cwiseAbs2();
      const MatrixXd lam2 = sc_.lam.cwiseAbs2().asDiagonal();
      if (!newton(rx, rzl, rZ, rt, -lam2_l, -lam2, -pt_.tau * pt_.kappa, 1.0, aff)) break;
      const double a_aff = step_length(aff);
      const double sigma = std::pow(1.0 - std::min(1.0, a_aff), 3);

      // Corrector with the second-order term.
      const VectorXd dsl = sc_.w.cwiseInverse().cwiseProduct(aff.sl);
      const VectorXd dzl = sc_.w.cwiseProduct(aff.zl);
      const MatrixXd dS = sc_.scale_s(aff.S);
      const MatrixXd dZ = sc_.scale_z(aff.Z);
      const VectorXd rhs_l = -lam2_l - dsl.cwiseProduct(dzl) + VectorXd::Constant(m_, sigma * mu);
      const MatrixXd rhs_s =
          -lam2 - jordan(dS, dZ) + sigma * mu * MatrixXd::Identity(q_, q_);
      const double rhs_k = -pt_.tau * pt_.kappa + sigma * mu - aff.tau * aff.kappa;
      Direction d;
      if (!newton(rx, rzl, rZ, rt, rhs_l, rhs_s, rhs_k, 1.0 - sigma, d)) break;
      const double alpha = std::min(1.0, 0.99 * step_length(d));
      if (!(alpha > 0.0)) break;

      pt_.x += alpha * d.x;
      pt_.sl += alpha * d.sl;
      pt_.zl += alpha * d.zl;
      pt_.S += alpha * d.S;
      pt_.Z += alpha * d.Z;
      pt_.S = 0.5 * (pt_.S + pt_.S.transpose()).eval();
      pt_.Z = 0.5 * (pt_.Z + pt_.Z.transpose()).eval();
      pt_.tau += alpha * d.tau;
      pt_.kappa += alpha * d.kappa;
    }
    out.status = ConeStatus::stalled;
    out.x = best.x / best.tau;
    out.z = best.zl / best.tau;
    out.primal_objective = best_pcost;
    out.dual_objective = best_dcost;
    return out;
  }

 private:
  // G^T z for the stacked operator [G; -svec].
  VectorXd Gt(const VectorXd& zl, const MatrixXd& Z) const {
    return prog_.G.transpose() * zl - svec(Z);
  }

  void initialize() {
    // Least-squares starting points with identity scaling, shifted into the cone.
    MatrixXd GtG = prog_.G.transpose() * prog_.G;
    GtG.diagonal().array() += 1.0;
    Eigen::LLT<MatrixXd> llt(GtG);
    const VectorXd x = llt.solve(prog_.G.transpose() * prog_.h);
    pt_.x = x;
    pt_.sl = prog_.h - prog_.G * x;
    pt_.S = smat(x);
    const VectorXd v = llt.solve(prog_.c);
    pt_.zl = -(prog_.G * v);
    pt_.Z = smat(v);  // G_psd = -svec, so z_psd = -(-v)
    shift(pt_.sl, pt_.S);
    shift(pt_.zl, pt_.Z);
    pt_.tau = 1.0;
    pt_.kappa = 1.0;
  }

  static void shift(VectorXd& l, MatrixXd& S) {
    double lo = kInf;
    if (l.size()) lo = l.minCoeff();
    lo = std::min(lo, min_eig(S));
    const double a = -lo;
    if (a >= 0.0) {
      l.array() += 1.0 + a;
      S.diagonal().array() += 1.0 + a;
    }
  }

  // Normal matrix G^T (W^T W)^-1 G for the stacked operator.
  bool factor() {
    const Index q = q_;
    MatrixXd H(n_, n_);
    // PSD block: column j is svec(P E_j P).
    const MatrixXd& P = sc_.P;
    Index j = 0;
    for (Index i = 0; i < q; ++i, ++j) H.col(j) = svec(P.col(i) * P.col(i).transpose());
    for (Index b = 1; b < q; ++b)
      for (Index a = 0; a < b; ++a, ++j) {
        const MatrixXd E = P.col(a) * P.col(b).transpose();
        H.col(j) = svec((E + E.transpose()) / std::numbers::sqrt2);
      }
    const MatrixXd Gs = sc_.w.cwiseInverse().asDiagonal() * prog_.G;
    H.noalias() += Gs.transpose() * Gs;
    H = 0.5 * (H + H.transpose()).eval();
    llt_.compute(H);
    if (llt_.info() == Eigen::Success) return true;
    const double reg = 1e-14 * std::max(1.0, H.diagonal().maxCoeff());
    H.diagonal().array() += reg;
    llt_.compute(H);
    return llt_.info() == Eigen::Success;
  }

  // Solves [0 G^T; G -W^T W] [dx; dz] = [bx; bz].
  // Only dx and the linear part of dz are returned.
  void kkt(const VectorXd& bx, const VectorXd& bzl, const MatrixXd& bZ, VectorXd& dx, VectorXd& dzl) const {
    const VectorXd iw2 = sc_.w.cwiseAbs2().cwiseInverse();
    const VectorXd rhs = bx + prog_.G.transpose() * iw2.cwiseProduct(bzl) - svec(sc_.P * bZ * sc_.P);
    dx = llt_.solve(rhs);
    // One step of iterative refinement against the same factorization.
    const VectorXd r = rhs - apply_h(dx);
    dx += llt_.solve(r);
    dzl = iw2.cwiseProduct(prog_.G * dx - bzl);
  }

  VectorXd apply_h(const VectorXd& v) const {
    const VectorXd iw2 = sc_.w.cwiseAbs2().cwiseInverse();
    return prog_.G.transpose() * iw2.cwiseProduct(prog_.G * v) + svec(sc_.P * smat(v) * sc_.P);
  }

  // Newton system of the embedding with linear residuals scaled by -eta and
  // complementarity right-hand sides (ds_l, ds, dk) in lambda coordinates.
  bool newton(const VectorXd& rx, const VectorXd& rzl, const MatrixXd& rZ, double rt, const VectorXd& ds_l,
              const MatrixXd& ds, double dk, double eta, Direction& d) const {
    const VectorXd dx = -eta * rx;
    const VectorXd dzl = -eta * rzl;
    const MatrixXd dZ = -eta * rZ;
    const double dt = -eta * rt;

    const VectorXd ul = jordan_div(sc_.lam_l, ds_l);
    const MatrixXd U = jordan_div(sc_.lam, ds);
    VectorXd x1, z1l, x2, z2l;
    kkt(-prog_.c, prog_.h, MatrixXd::Zero(q_, q_), x1, z1l);
    kkt(dx, dzl - sc_.w.cwiseProduct(ul), dZ - sc_.scale_t(U), x2, z2l);

    const double denom = prog_.c.dot(x1) + prog_.h.dot(z1l) - pt_.kappa / pt_.tau;
    if (!std::isfinite(denom) || denom == 0.0) return false;
    d.tau = (dt - dk / pt_.tau - prog_.c.dot(x2) - prog_.h.dot(z2l)) / denom;
    d.x = x2 + d.tau * x1;
    d.zl = z2l + d.tau * z1l;
    // The PSD block of G is -I, so the dual equation fixes dZ exactly.
    d.Z = smat(VectorXd(prog_.G.transpose() * d.zl + d.tau * prog_.c - dx));
    d.kappa = (dk - pt_.kappa * d.tau) / pt_.tau;
    // Same for ds: both linear equations hold exactly and rounding errors land
    // in the complementarity, which the centering corrects.
    d.sl = dzl - prog_.G * d.x + d.tau * prog_.h;
    d.S = dZ + smat(d.x);
    return d.x.allFinite() && d.S.allFinite() && d.Z.allFinite() && std::isfinite(d.tau);
  }

  double step_length(const Direction& d) const {
    double t = kInf;
    t = std::min(t, max_step(sc_.lam_l, VectorXd(sc_.w.cwiseInverse().cwiseProduct(d.sl))));
    t = std::min(t, max_step(sc_.lam_l, VectorXd(sc_.w.cwiseProduct(d.zl))));
    t = std::min(t, max_step(sc_.lam, sc_.scale_s(d.S)));
    t = std::min(t, max_step(sc_.lam, sc_.scale_z(d.Z)));
    if (d.tau < 0.0) t = std::min(t, -pt_.tau / d.tau);
    if (d.kappa < 0.0) t = std::min(t, -pt_.kappa / d.kappa);
    return t;
  }

  const ConeProgram& prog_;
  ConeOptions opt_;
  Index n_ = 0, q_ = 0, m_ = 0;
  double degree_ = 0.0;
  Point pt_;
  Scaling sc_;
  Eigen::LLT<MatrixXd> llt_;
};

}  // namespace

ConeSolution solve_cone_program(const ConeProgram& program, const ConeOptions& options) {
  return Solver(program, options).run();
}

}  // namespace qcs
