#include <doctest.h>

#include <algorithm>
#include <set>

#include "qcs/csv.hpp"
#include "qcs/evaluation.hpp"

using namespace qcs;

namespace {

Eigen::VectorXcd spike(Index n, Index at, Complex value = 1.0) {
  Eigen::VectorXcd a = Eigen::VectorXcd::Zero(n);
  a(at) = value;
  return a;
}

// Small, fast scenario for sweep plumbing.
Scenario small_scenario() {
  Scenario s;
  s.grid_spacing = 0.1;
  s.window = 2.0;
  s.object.peaks = 2;
  s.object.spacing = 0.5;
  return s;
}

}  // namespace

TEST_CASE("recovery error") {
  Eigen::VectorXcd a = Eigen::VectorXcd::Zero(121);
  a(40) = 10.0;
  a(50) = -9.0;
  a(60) = Complex(0, 11.0);
  CHECK(recovery_error(a, a, 0.05, 0.1) == 0.0);
  CHECK(recovery_error(-a, a, 0.05, 0.1) < 1e-15);
  CHECK(recovery_error(a * std::polar(1.0, 2.3), a, 0.05, 0.1) < 1e-14);
  CHECK(recovery_error(a * std::polar(1.0, 0.7), a * std::polar(1.0, 0.7), 0.05, 0.1) < 1e-14);
  CHECK(recovery_error(Eigen::VectorXcd::Zero(121), a, 0.05, 0.1) == doctest::Approx(1.0));
  CHECK_THROWS_AS(recovery_error(a, Eigen::VectorXcd::Zero(121), 0.05, 0.1), std::invalid_argument);
  CHECK_THROWS_AS(recovery_error(a, a.head(10), 0.05, 0.1), std::invalid_argument);

  // Single spike: error grows with the shift.
  double previous = -1.0;
  for (Index shift = 0; shift <= 5; ++shift) {
    const double e = recovery_error(spike(121, 60 + shift), spike(121, 60), 0.05, 0.1);
    CHECK(e > previous);
    previous = e;
  }
  const double one = recovery_error(spike(121, 61), spike(121, 60), 0.05, 0.1);
  CHECK(one > 0.0);
  CHECK(one < recovery_error(spike(121, 65), spike(121, 60), 0.05, 0.1));
}

TEST_CASE("smoothing kernel") {
  const Eigen::VectorXd k = smoothing_kernel(0.05, 0.1);
  CHECK(k.sum() == doctest::Approx(1.0));
  CHECK(k.size() % 2 == 1);
  const Index c = k.size() / 2;
  // FWHM of 2 cells: the kernel at +-1 cell is half its peak.
  CHECK(k(c + 1) / k(c) == doctest::Approx(0.5));
  CHECK(k(c - 1) == k(c + 1));
  CHECK(smoothing_kernel(1.0, 0.01).size() >= 3);
}

TEST_CASE("spike objects") {
  const Grid grid = Grid::centered(0.05, 6.0);
  SUBCASE("single spike") {
    SpikeObjectSpec spec;
    spec.peaks = 1;
    const auto obj = random_spike_object(spec, grid, 4);
    CHECK((obj.amplitudes.array() != Complex(0.0)).count() == 1);
    CHECK(std::abs(obj.amplitudes(60)) == doctest::Approx(10.0).epsilon(0.5));
  }
  SUBCASE("three spikes 0.35 apart") {
    SpikeObjectSpec spec;
    spec.peaks = 3;
    spec.spacing = 0.35;
    const auto idx = spike_indices(spec, grid);
    REQUIRE(idx.size() == 3);
    CHECK(idx[1] - idx[0] == 7);
    CHECK(idx[2] - idx[1] == 7);
    CHECK(grid.position(idx[2]) - grid.position(idx[0]) == doctest::Approx(0.7));
  }
  SUBCASE("six spikes in 1.3") {
    const auto spec = SpikeObjectSpec::spanning(6, 1.3);
    CHECK(spec.spacing == doctest::Approx(0.26));
    const auto idx = spike_indices(spec, grid);
    CHECK(idx.size() == 6);
    CHECK(grid.position(idx.back()) - grid.position(idx.front()) <= 1.3 + 0.05);
  }
  SUBCASE("signs and determinism") {
    SpikeObjectSpec spec;
    spec.peaks = 4;
    spec.spacing = 0.5;
    const auto a = random_spike_object(spec, grid, 77);
    const auto b = random_spike_object(spec, grid, 77);
    const auto c = random_spike_object(spec, grid, 78);
    CHECK(a.amplitudes == b.amplitudes);
    CHECK(a.amplitudes != c.amplitudes);
    for (Index i : spike_indices(spec, grid)) CHECK(std::abs(a.amplitudes(i).imag()) < 1e-14 * 20);
  }
  SUBCASE("invalid specs") {
    SpikeObjectSpec spec;
    spec.peaks = 2;
    spec.spacing = 0.01;
    CHECK_THROWS_AS(spike_indices(spec, grid), std::invalid_argument);
    spec.spacing = 7.0;
    CHECK_THROWS_AS(spike_indices(spec, grid), std::invalid_argument);
    spec.peaks = 0;
    CHECK_THROWS_AS(spike_indices(spec, grid), std::invalid_argument);
  }
}

TEST_CASE("seed streams") {
  std::set<std::uint64_t> seen;
  for (std::uint64_t i = 0; i < 20; ++i)
    for (std::uint64_t s = 0; s < 3; ++s) seen.insert(trial_seed(1, i, s));
  CHECK(seen.size() == 60);
  CHECK(trial_seed(5, 3, 1) == trial_seed(5, 3, 1));
}

TEST_CASE("sample layout") {
  const auto p = equally_spaced_positions(25, 6.0);
  CHECK(p.front() == doctest::Approx(-3.0));
  CHECK(p[1] - p[0] == doctest::Approx(0.25));
  Scenario s = Scenario::reconstruction_demo();
  CHECK(s.positions().size() == 121);
  s.samples = 9;
  CHECK(s.positions().size() == 9);
}

TEST_CASE("single trial") {
  const Scenario s = small_scenario();
  const auto r = run_trial(s, 3, Variant::sparse);
  CHECK_FALSE(r.failed);
  CHECK(r.error >= 0.0);
  CHECK(r.peaks == 2);
  CHECK(r.samples == 21);
  const auto again = run_trial(s, 3, Variant::sparse);
  CHECK(again.error == r.error);

  const Variant both[] = {Variant::sparse, Variant::baseline};
  const auto pair = run_trial_pair(s, 3, both);
  REQUIRE(pair.size() == 2);
  CHECK(pair[0].error == r.error);
  CHECK(pair[1].variant == Variant::baseline);
}

TEST_CASE("sweeps are reproducible") {
  const Scenario s = small_scenario();
  SweepOptions o;
  o.trials = 1;
  o.seed = 9;
  o.threads = 2;
  const double snr[] = {30.0, 50.0};
  const auto a = sweep_noise(snr, s, o);
  o.threads = 1;
  const auto b = sweep_noise(snr, s, o);
  CHECK(a.to_csv() == b.to_csv());
  CHECK(a.points.size() == 4);  // both series
  CHECK(a.find(30.0, Variant::baseline) != nullptr);
  CHECK(a.find(40.0, Variant::sparse) == nullptr);

  const Index counts[] = {9, 21};
  const auto c = sweep_samples(counts, s, o);
  CHECK(c.points.size() == 2);
  CHECK(c.parameter == "samples");

  const std::string text = c.to_csv();
  CHECK(text.substr(0, text.find('\n')) == "samples,series,mean_error,std_error,trials,failures");
  CHECK(std::count(text.begin(), text.end(), '\n') == 3);

  o.trials = 0;
  CHECK_THROWS_AS(sweep_samples(counts, s, o), std::invalid_argument);
}

TEST_CASE("csv helpers") {
  CHECK(csv::format(0.1) == "0.10000000000000001");
  CHECK(std::stod(csv::format(1.0 / 3.0)) == 1.0 / 3.0);
  const auto t = csv::parse("a,b\n1,2\n3,4.5\n");
  CHECK(t.rows.size() == 2);
  CHECK(t.rows[1][t.column("b")] == 4.5);
  CHECK_THROWS_WITH(csv::parse("a,b\n1,2\n3,x\n", "data.csv"), doctest::Contains("data.csv:3"));
  CHECK_THROWS(csv::parse("a,b\n1\n"));
  CHECK_THROWS(t.column("c"));
}
