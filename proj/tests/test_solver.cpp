#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "qcs/solver.hpp"

using namespace qcs;

namespace {

struct Instance {
  Grid grid{0.1, 16, -0.75};
  std::vector<TransferMatrix> transfer;

  Instance() {
    const auto B = build_mutual_intensity(CoherenceKernel::gaussian(0.55), grid);
    const auto h = build_impulse_response(OpticalConfig::ideal(1.0), grid);
    transfer = build_transfer_matrices(h, B, equally_spaced_positions(31, 1.5));
  }

  Measurements measure(const Eigen::VectorXcd& a) const { return forward_intensity(ObjectField(a, grid), transfer); }
};

}  // namespace

TEST_CASE("log-det weight") {
  CHECK((logdet_weight(Eigen::MatrixXd::Zero(4, 4), 1e-3) - 1e3 * Eigen::MatrixXd::Identity(4, 4)).norm() < 1e-9);
  CHECK((logdet_weight(Eigen::MatrixXd::Identity(3, 3), 1e-3) -
         Eigen::MatrixXd::Identity(3, 3) / (1 + 1e-3)).norm() < 1e-14);

  std::mt19937_64 rng(9);
  std::normal_distribution<double> g;
  for (int t = 0; t < 5; ++t) {
    Eigen::MatrixXd A(6, 3);
    for (Index i = 0; i < A.size(); ++i) A.data()[i] = g(rng);
    const Eigen::MatrixXd X = A * A.transpose();  // PSD, rank 3
    const Eigen::MatrixXd W = logdet_weight(X, 1e-3);
    CHECK((W * (X + 1e-3 * Eigen::MatrixXd::Identity(6, 6)) - Eigen::MatrixXd::Identity(6, 6)).norm() < 1e-10);
    CHECK((W - W.transpose()).norm() < 1e-12 * W.norm());
  }

  Eigen::Matrix2d N;
  N << 1, 2, 0, 1;
  CHECK_THROWS_AS(logdet_weight(N, 1e-3), std::invalid_argument);
  CHECK_THROWS_AS(logdet_weight(Eigen::Matrix2d::Identity(), 0.0), std::invalid_argument);
}

TEST_CASE("threshold rule") {
  std::vector<Index> none;
  SUBCASE("direct removal") {
    const auto t = threshold_support(Eigen::Vector3d(10, 9, 0.5), none, 0.1, 0.01);
    CHECK(t.off_support == std::vector<Index>{2});
    CHECK(t.increments == 0);
    CHECK_FALSE(t.saturated);
  }
  SUBCASE("escalation") {
    const auto t = threshold_support(Eigen::Vector3d(10, 9, 8), none, 0.1, 0.01);
    CHECK(t.off_support == std::vector<Index>{2});
    CHECK(t.increments == 71);
    CHECK(t.threshold == doctest::Approx(0.81));
  }
  SUBCASE("ties survive") {
    const auto t = threshold_support(Eigen::Vector3d(10, 1, 5), none, 0.1, 0.01);
    CHECK(t.increments > 0);  // 1 < 0.1 * 10 is false
    CHECK(t.off_support == std::vector<Index>{1});
  }
  SUBCASE("saturation") {
    const std::vector<Index> off{0, 1};
    const auto t = threshold_support(Eigen::Vector3d(0, 0, 4), off, 0.1, 0.01);
    CHECK(t.saturated);
    CHECK(t.off_support == off);
  }
  SUBCASE("removed indices stay removed") {
    const std::vector<Index> off{1};
    const auto t = threshold_support(Eigen::Vector4d(10, 50, 0.1, 9), off, 0.1, 0.01);
    CHECK(t.off_support == std::vector<Index>{1, 2});
  }
}

TEST_CASE("rank-one extraction") {
  Eigen::VectorXcd v(3);
  v << Complex(1, 2), Complex(-0.5, 0), Complex(0, 1);
  const auto r = extract_rank1(v * v.adjoint());
  CHECK(oracle::aligned_distance(r.a, v) < 1e-12);
  CHECK(std::isinf(r.rank_ratio));
  CHECK(r.singular_values(0) == doctest::Approx(v.squaredNorm()));

  Eigen::MatrixXcd D = Eigen::MatrixXcd::Zero(2, 2);
  D(0, 0) = 4;
  D(1, 1) = 1;
  const auto d = extract_rank1(D);
  CHECK(d.rank_ratio == doctest::Approx(4.0));
  CHECK(std::abs(std::abs(d.a(0)) - 2.0) < 1e-14);
  CHECK(std::abs(d.a(1)) < 1e-14);

  std::mt19937_64 rng(12);
  const Eigen::VectorXcd a = oracle::random_complex(8, rng);
  Eigen::MatrixXcd P = oracle::random_complex(8, rng) * oracle::random_complex(8, rng).adjoint();
  P = 0.5 * (P + P.adjoint()).eval();
  const auto p = extract_rank1(a * a.adjoint() + 1e-6 * P);
  CHECK(oracle::aligned_distance(p.a, a) < 1e-5);
  CHECK(rank_ratio_converged(p, 1e3));
}

TEST_CASE("rank-ratio predicate") {
  CHECK(rank_ratio_converged(1e3 + 1, 1e3));
  CHECK_FALSE(rank_ratio_converged(1e3, 1e3));
  CHECK(rank_ratio_converged(std::numeric_limits<double>::infinity(), 1e3));
}

TEST_CASE("single noiseless spike") {
  const Instance inst;
  for (Index pos : {3, 8, 12}) {
    Eigen::VectorXcd a = Eigen::VectorXcd::Zero(16);
    a(pos) = 9.5;
    const auto y = inst.measure(a);
    const auto params = oracle_parameters(a, y, y);
    const auto r = solve_qcs(y, inst.transfer, params);
    CHECK(r.status == ReconstructionStatus::converged);
    Index peak = 0;
    r.a.cwiseAbs().maxCoeff(&peak);
    CHECK(peak == pos);
    CHECK(std::abs(r.a(pos)) == doctest::Approx(9.5).epsilon(0.01));
    CHECK(r.a.norm() == doctest::Approx(std::abs(r.a(pos))).epsilon(1e-6));
  }
}

TEST_CASE("zero data") {
  const Instance inst;
  const Eigen::VectorXcd a = Eigen::VectorXcd::Zero(16);
  const auto y = inst.measure(a);
  SolverParams params;
  const auto r = solve_qcs(y, inst.transfer, params);
  CHECK(r.a.norm() <= 1e-6);
  REQUIRE_FALSE(r.history.empty());
  CHECK(r.history.front().accepted);
}

TEST_CASE("iteration invariants") {
  const Instance inst;
  Eigen::VectorXcd a = Eigen::VectorXcd::Zero(16);
  a(5) = 10.0;
  a(8) = -9.0;
  a(11) = 11.0;
  Measurements y = add_noise(inst.measure(a), 40.0, 3);
  const auto params = oracle_parameters(a, inst.measure(a), y);
  const auto r = solve_qcs(y, inst.transfer, params);

  // Off-support never shrinks, except for one back-off to the last success.
  int backoffs = 0;
  for (std::size_t k = 1; k < r.history.size(); ++k)
    if (r.history[k].off_support_size < r.history[k - 1].off_support_size) ++backoffs;
  CHECK(backoffs <= 1);

  for (std::size_t k = 0; k < r.history.size(); ++k) {
    const auto& h = r.history[k];
    if (h.accepted) CHECK(h.max_residual <= params.tol_feas);
    // Surrogate descent while the constraints are unchanged.
    if (k > 0 && h.accepted && r.history[k - 1].accepted &&
        h.off_support_size == r.history[k - 1].off_support_size && !r.history[k - 1].thresholding)
      CHECK(h.objective <= h.previous_objective * (1 + 1e-6) + 1e-9);
  }

  for (Index i : r.off_support) CHECK(std::abs(r.a(i)) == 0.0);
}

TEST_CASE("global phase of a complex object") {
  const Instance inst;
  Eigen::VectorXcd a = Eigen::VectorXcd::Zero(16);
  a(6) = std::polar(10.0, 0.4);
  a(9) = std::polar(9.0, 2.1);
  const Complex phase = std::polar(1.0, 1.3);
  const auto y1 = inst.measure(a);
  const auto y2 = inst.measure(phase * a);
  CHECK((y1.values - y2.values).norm() <= 1e-13 * y1.values.norm());

  const auto r1 = solve_qcs(y1, inst.transfer, oracle_parameters(a, y1, y1));
  const auto r2 = solve_qcs(y2, inst.transfer, oracle_parameters(phase * a, y2, y2));
  CHECK(oracle::aligned_distance(r1.a, r2.a) < 1e-6);
}

TEST_CASE("baseline variant drops sparsity") {
  SolverParams p;
  p.zeta = 5.0;
  const SolverParams b = without_sparsity(p);
  CHECK_FALSE(b.thresholding);
  CHECK(std::isinf(b.zeta));
  CHECK(b.delta == p.delta);
}

TEST_CASE("oracle parameters") {
  const Instance inst;
  Eigen::VectorXcd a = Eigen::VectorXcd::Zero(16);
  a(2) = 3.0;
  a(7) = Complex(0, -4.0);
  const auto clean = inst.measure(a);
  const auto noisy = add_noise(clean, 30.0, 1);
  const auto p = oracle_parameters(a, clean, noisy);
  CHECK(p.zeta == doctest::Approx(1.1 * (3.0 * 5.0 + 4.0 * 5.0)));
  CHECK(p.epsilon == doctest::Approx((noisy.values - clean.values).cwiseAbs().maxCoeff()));
}

TEST_CASE("parameter validation") {
  SolverParams p;
  p.threshold = 1.0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = SolverParams{};
  p.delta = 0.0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = SolverParams{};
  p.epsilon = -1e-3;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
}
