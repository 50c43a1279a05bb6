// Reconstruction-quality protocol: smoothed, phase-aligned relative error,
// seeded random spike objects, and the noise / peak-count / sample-count
// sweeps.
#pragma once

#include <cstdint>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qcs/optics.hpp"
#include "qcs/solver.hpp"

namespace qcs {

/// Relative l2 error after convolving both signals with a unit-sum Gaussian
/// of the given FWHM and aligning the global phase of `recovered`.
double recovery_error(const Eigen::VectorXcd& recovered, const Eigen::VectorXcd& truth,
                      double grid_spacing, double smoothing_fwhm);

/// Unit-sum discrete Gaussian, truncated at 4 sigma (at least one tap).
Eigen::VectorXd smoothing_kernel(double grid_spacing, double fwhm);

/// Zero-padded "same" convolution.
Eigen::VectorXcd convolve_same(const Eigen::VectorXcd& signal, const Eigen::VectorXd& kernel);

/// Global phase that best aligns `recovered` to `truth`, as a unit phasor.
Complex optimal_phase(const Eigen::VectorXcd& recovered, const Eigen::VectorXcd& truth);

struct SpikeObjectSpec {
  int peaks = 3;
  double spacing = 0.35;
  double amplitude_mean = 10.0;
  double amplitude_std = 1.0;
  /// Candidate phases in radians, drawn uniformly per spike. {0, pi} is a random sign.
  std::vector<double> phases{0.0, std::numbers::pi};
  /// Center of the spike train.
  double center = 0.0;

  /// k spikes equally spaced so that the train spans `range`.
  static SpikeObjectSpec spanning(int peaks, double range);
  void validate() const;
};

/// Grid indices of the spikes after snapping the spacing to whole cells.
std::vector<Index> spike_indices(const SpikeObjectSpec& spec, const Grid& grid);

ObjectField random_spike_object(const SpikeObjectSpec& spec, const Grid& grid, std::uint64_t seed);

/// One simulated experiment: imaging system, object family, sampling, noise
/// and solver settings.
struct Scenario {
  OpticalConfig optics = OpticalConfig::ideal(1.0);
  CoherenceKernel kernel = CoherenceKernel::gaussian(0.55);
  double grid_spacing = 0.05;
  double window = 6.0;
  SpikeObjectSpec object;
  /// Number of equally spaced measurements over the window; 0 uses the grid points.
  Index samples = 0;
  std::optional<double> snr_db = 40.0;
  SolverParams solver;
  double smoothing_fwhm = 0.1;

  /// Four spikes 0.5 wavelengths apart at 40 dB.
  static Scenario reconstruction_demo();
  /// Three spikes 0.35 wavelengths apart at 40 dB.
  static Scenario noise_study();

  Grid grid() const;
  std::vector<double> positions() const;
};

enum class Variant { sparse, baseline };
const char* to_string(Variant v);

struct EvaluationRecord {
  double error = 0.0;
  Variant variant = Variant::sparse;
  int peaks = 0;
  double spacing = 0.0;
  std::optional<double> snr_db;
  Index samples = 0;
  std::uint64_t seed = 0;
  double runtime_seconds = 0.0;
  ReconstructionStatus status = ReconstructionStatus::stalled;
  double rank_ratio = 0.0;
  bool failed = false;
  std::string failure;
};

/// Seed of trial `index` under `master`; object and noise use separate streams.
std::uint64_t trial_seed(std::uint64_t master, std::uint64_t index, std::uint64_t stream);

struct TrialData {
  ObjectField object;
  std::vector<TransferMatrix> transfer;
  Measurements clean;
  Measurements noisy;
};

TrialData simulate_trial(const Scenario& scenario, std::uint64_t seed);

/// Simulates and reconstructs one trial with oracle zeta/eps.
EvaluationRecord run_trial(const Scenario& scenario, std::uint64_t seed, Variant variant);

/// Runs both variants on the same simulated data.
std::vector<EvaluationRecord> run_trial_pair(const Scenario& scenario, std::uint64_t seed,
                                             std::span<const Variant> variants);

struct SweepPoint {
  double value = 0.0;
  Variant variant = Variant::sparse;
  double mean = 0.0;
  double stddev = 0.0;
  int trials = 0;
  int failures = 0;
  std::vector<double> errors;

  double standard_error() const;
};

struct SweepTable {
  std::string parameter;  // snr_db | peaks | samples
  std::vector<SweepPoint> points;

  const SweepPoint* find(double value, Variant variant) const;
  std::string to_csv() const;
};

struct SweepOptions {
  int trials = 20;
  std::uint64_t seed = 1;
  /// Worker threads; 0 picks the hardware concurrency.
  unsigned threads = 0;
  bool include_baseline = false;
};

SweepTable sweep_noise(std::span<const double> snr_db, const Scenario& base, SweepOptions options);
SweepTable sweep_peaks(std::span<const int> peaks, double range, const Scenario& base,
                       SweepOptions options);
SweepTable sweep_samples(std::span<const Index> counts, const Scenario& base, SweepOptions options);

}  // namespace qcs
