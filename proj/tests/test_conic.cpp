#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "qcs/cone_program.hpp"
#include "qcs/conic.hpp"
#include "qcs/packing.hpp"
#include "qcs/solver.hpp"

using namespace qcs;

namespace {

Eigen::MatrixXd random_symmetric(Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Eigen::MatrixXd A(n, n);
  for (Index i = 0; i < n * n; ++i) A.data()[i] = g(rng);
  return 0.5 * (A + A.transpose());
}

double min_eig(const Eigen::MatrixXd& X) {
  return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(X, Eigen::EigenvaluesOnly).eigenvalues()(0);
}

// Projection onto the mixed-norm ball by bisection on the multiplier of
// sum ||Y_a|| <= zeta, Y_a = X_a max(0, 1 - lambda / ||X_a||).
Eigen::MatrixXd ball_projection_bisection(const Eigen::MatrixXd& X, double zeta) {
  const Eigen::VectorXd r = X.rowwise().norm();
  if (r.sum() <= zeta) return X;
  auto total = [&](double lambda) { return (r.array() - lambda).max(0.0).sum(); };
  double lo = 0.0, hi = r.maxCoeff();
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (total(mid) > zeta ? lo : hi) = mid;
  }
  const double lambda = 0.5 * (lo + hi);
  Eigen::MatrixXd Y = X;
  for (Index a = 0; a < X.rows(); ++a) Y.row(a) *= r(a) > lambda ? (r(a) - lambda) / r(a) : 0.0;
  return Y;
}

struct SmallProblem {
  Grid grid{0.1, 16, -0.75};
  std::vector<TransferMatrix> transfer;
  Eigen::VectorXd a_true = Eigen::VectorXd::Zero(16);
  Measurements y;

  SmallProblem() {
    const auto B = build_mutual_intensity(CoherenceKernel::gaussian(0.55), grid);
    const auto h = build_impulse_response(OpticalConfig::ideal(1.0), grid);
    transfer = build_transfer_matrices(h, B, equally_spaced_positions(31, 1.5));
    a_true(5) = 10.0;
    a_true(9) = -9.0;
    y = forward_intensity(ObjectField(a_true.cast<Complex>(), grid), transfer);
  }

  SubproblemSpec spec(double eps_fraction) const {
    SubproblemSpec s;
    s.op = std::make_shared<const LiftedOperator>(LiftedOperator::from_transfer(transfer));
    s.weight = Eigen::MatrixXd::Identity(16, 16);
    s.measurements = y.values;
    s.consistency = eps_fraction * y.values.cwiseAbs().maxCoeff();
    s.trace_floor = y.values.squaredNorm();
    return s;
  }
};

}  // namespace

TEST_CASE("symmetric packing") {
  std::mt19937_64 rng(1);
  const Eigen::MatrixXd A = random_symmetric(5, rng), B = random_symmetric(5, rng);
  CHECK(svec(A).size() == 15);
  CHECK(svec(A).dot(svec(B)) == doctest::Approx(A.cwiseProduct(B).sum()).epsilon(1e-14));
  CHECK((smat(svec(A)) - A).norm() < 1e-14);
  CHECK(svec_order(15) == 5);
  CHECK_THROWS(svec_order(14));
}

TEST_CASE("PSD projection") {
  Eigen::Matrix2d X;
  X << 1, 2, 2, 1;  // eigenvalues 3 and -1
  const Eigen::MatrixXd P = project_psd(X);
  CHECK((P - Eigen::Matrix2d::Constant(1.5)).norm() < 1e-14);

  CHECK((project_psd(Eigen::Matrix2d(Eigen::Vector2d(2, 3).asDiagonal())) -
         Eigen::Matrix2d(Eigen::Vector2d(2, 3).asDiagonal())).norm() < 1e-14);
  CHECK(project_psd(Eigen::Matrix2d(-Eigen::Matrix2d::Identity())).norm() == 0.0);

  std::mt19937_64 rng(2);
  const Eigen::MatrixXd R = random_symmetric(6, rng);
  const Eigen::MatrixXd Q = project_psd(R);
  CHECK(min_eig(Q) >= -1e-12);
  CHECK((project_psd(Q) - Q).norm() < 1e-12);
  // Moreau: R - P(R) is the negative part, orthogonal to P(R).
  CHECK(std::abs((R - Q).cwiseProduct(Q).sum()) < 1e-10);
}

TEST_CASE("mixed-norm ball projection") {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> g;
  for (int t = 0; t < 20; ++t) {
    Eigen::MatrixXd X(5, 5);
    for (Index i = 0; i < 25; ++i) X.data()[i] = g(rng) * (t % 3 + 1);
    const double zeta = 0.3 * mixed_norm(X) * (t % 4 + 1);
    const Eigen::MatrixXd P = project_l12_ball(X, zeta);
    CHECK((P - ball_projection_bisection(X, zeta)).norm() <= 1e-9 * X.norm());
    CHECK(mixed_norm(P) <= zeta * (1 + 1e-12));
    // Variational inequality <X - P, Z - P> <= 0 for points Z of the ball.
    for (int k = 0; k < 10; ++k) {
      Eigen::MatrixXd Z(5, 5);
      for (Index i = 0; i < 25; ++i) Z.data()[i] = g(rng);
      Z *= zeta / mixed_norm(Z) * std::uniform_real_distribution<double>(0, 1)(rng);
      CHECK((X - P).cwiseProduct(Z - P).sum() <= 1e-9 * X.squaredNorm());
    }
  }
  Eigen::MatrixXd inside = Eigen::MatrixXd::Identity(3, 3);
  CHECK(project_l12_ball(inside, 5.0) == inside);
  CHECK_THROWS_AS(project_l12_ball(inside, 0.0), std::invalid_argument);
}

TEST_CASE("cone program: smallest eigenvalue") {
  std::mt19937_64 rng(7);
  for (int t = 0; t < 5; ++t) {
    const Eigen::MatrixXd C = random_symmetric(4, rng);
    ConeProgram p;
    p.c = svec(C);
    const Eigen::VectorXd I = svec(Eigen::MatrixXd::Identity(4, 4));
    p.G.resize(2, I.size());
    p.G.row(0) = I.transpose();
    p.G.row(1) = -I.transpose();
    p.h = Eigen::Vector2d(1, -1);
    const ConeSolution s = solve_cone_program(p);
    REQUIRE(s.status == ConeStatus::optimal);
    CHECK(s.primal_objective == doctest::Approx(min_eig(C)).epsilon(1e-7));
    CHECK(s.dual_objective == doctest::Approx(min_eig(C)).epsilon(1e-7));
    CHECK(min_eig(smat(s.x)) >= -1e-9);
    CHECK((s.z.array() >= 0).all());
    CHECK(min_eig(smat(Eigen::VectorXd(p.c + p.G.transpose() * s.z))) >= -1e-7);
  }
}

TEST_CASE("cone program: infeasibility certificates") {
  const Eigen::VectorXd I = svec(Eigen::MatrixXd::Identity(3, 3));
  SUBCASE("primal infeasible") {
    ConeProgram p;
    p.c = I;
    p.G = I.transpose();
    p.h = Eigen::VectorXd::Constant(1, -1.0);  // Tr X <= -1
    const ConeSolution s = solve_cone_program(p);
    REQUIRE(s.status == ConeStatus::primal_infeasible);
    CHECK(p.h.dot(s.z) == doctest::Approx(-1.0));
    CHECK((s.z.array() >= 0).all());
    CHECK(min_eig(smat(Eigen::VectorXd(p.G.transpose() * s.z))) >= -1e-8);
  }
  SUBCASE("dual infeasible") {
    ConeProgram p;
    Eigen::MatrixXd E = Eigen::MatrixXd::Zero(3, 3);
    E(0, 0) = -1.0;
    p.c = svec(E);  // minimize -X_00
    Eigen::MatrixXd F = Eigen::MatrixXd::Zero(3, 3);
    F(1, 1) = 1.0;
    p.G = svec(F).transpose();
    p.h = Eigen::VectorXd::Ones(1);
    const ConeSolution s = solve_cone_program(p);
    REQUIRE(s.status == ConeStatus::dual_infeasible);
    CHECK(p.c.dot(s.x) < 0);
    CHECK((p.G * s.x)(0) <= 1e-8 * s.x.norm());
    CHECK(min_eig(smat(s.x)) >= -1e-8 * s.x.norm());
  }
}

TEST_CASE("lifted operator in physical units") {
  SmallProblem p;
  const auto op = LiftedOperator::from_transfer(p.transfer);
  CHECK_FALSE(op.embedded());
  const Eigen::MatrixXd X = p.a_true * p.a_true.transpose();
  CHECK((op.apply(X) - p.y.values).norm() < 1e-12 * p.y.values.norm());

  const auto emb = LiftedOperator::from_transfer(p.transfer, true);
  REQUIRE(emb.embedded());
  const Eigen::MatrixXcd Xc = p.a_true.cast<Complex>() * p.a_true.cast<Complex>().adjoint();
  const Eigen::MatrixXd XR = emb.embed(Xc);
  CHECK((emb.apply(XR) - p.y.values).norm() < 1e-12 * p.y.values.norm());
  CHECK(emb.trace(XR) == doctest::Approx(Xc.trace().real()));
  CHECK((emb.restore(XR) - Xc).norm() < 1e-12);
  CHECK(emb.mixed_norm(XR) == doctest::Approx(mixed_norm(Xc)));
}

TEST_CASE("feasibility report") {
  SmallProblem p;
  SubproblemSpec spec = p.spec(1e-3);
  spec.mixed_norm_bound = 1.1 * mixed_norm(Eigen::MatrixXd(p.a_true * p.a_true.transpose()));
  const Eigen::MatrixXd X = p.a_true * p.a_true.transpose();
  CHECK(check_feasibility(X, spec).max_relative() < 1e-12);

  spec.off_support = {5};
  const auto r = check_feasibility(X, spec);
  CHECK(r.support.absolute == doctest::Approx(100.0));
  CHECK(r.violated_families(1e-9) == 1);

  spec.off_support.clear();
  const auto scaled = check_feasibility(Eigen::MatrixXd(2.0 * X), spec);
  CHECK(scaled.measurement.relative > 0.5);
  CHECK(scaled.mixed_norm.relative > 0.5);
}

TEST_CASE("subproblem returns a feasible minimizer") {
  SmallProblem p;
  SubproblemSpec spec = p.spec(1e-3);
  const Eigen::MatrixXd X_true = p.a_true * p.a_true.transpose();
  spec.mixed_norm_bound = 1.1 * mixed_norm(X_true);
  const SubproblemSolution s = solve_subproblem(spec);
  REQUIRE(s.status == SubproblemStatus::optimal);
  CHECK(s.residuals.max_relative() <= 1e-6);
  CHECK(check_feasibility(s.X, spec).max_relative() <= 1e-6);
  CHECK(min_eig(s.X) >= -1e-9 * s.X.norm());
  // X_true is feasible, so the minimum cannot exceed its objective.
  CHECK(s.objective <= X_true.trace() * (1 + 1e-6));
  CHECK(s.objective == doctest::Approx(s.X.trace()).epsilon(1e-9));

  SUBCASE("support restriction") {
    spec.off_support = {0, 1, 2, 3, 12, 13, 14, 15};
    spec.weight = logdet_weight(s.X, 1e-3);
    const SubproblemSolution r = solve_subproblem(spec);
    REQUIRE(r.status == SubproblemStatus::optimal);
    CHECK(r.residuals.max_relative() <= 1e-6);
    for (Index i : spec.off_support) CHECK(r.X.row(i).norm() == 0.0);
  }
  SUBCASE("infeasible support") {
    spec.off_support = {4, 5, 6, 8, 9, 10};
    const SubproblemSolution r = solve_subproblem(spec);
    CHECK(r.status == SubproblemStatus::infeasible);
  }
}

TEST_CASE("subproblem with zero data") {
  SmallProblem p;
  SubproblemSpec spec = p.spec(0.0);
  spec.measurements.setZero();
  spec.trace_floor = 0.0;
  const SubproblemSolution s = solve_subproblem(spec);
  REQUIRE(s.status == SubproblemStatus::optimal);
  CHECK(s.X.norm() <= 1e-8);
}

TEST_CASE("subproblem input validation") {
  SmallProblem p;
  SubproblemSpec spec = p.spec(1e-3);
  spec.weight = Eigen::MatrixXd::Identity(3, 3);
  CHECK_THROWS_AS(solve_subproblem(spec), std::invalid_argument);
  spec = p.spec(1e-3);
  spec.consistency = -1.0;
  CHECK_THROWS_AS(solve_subproblem(spec), std::invalid_argument);
  spec = p.spec(1e-3);
  SubproblemOptions o;
  o.tol_feas = 0.0;
  CHECK_THROWS_AS(solve_subproblem(spec, o), std::invalid_argument);
}
