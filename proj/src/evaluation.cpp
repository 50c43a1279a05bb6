#include "qcs/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <functional>
#include <random>
#include <stdexcept>
#include <thread>

#include "qcs/csv.hpp"

namespace qcs {

Eigen::VectorXd smoothing_kernel(double grid_spacing, double fwhm) {
  if (!(grid_spacing > 0.0)) throw std::invalid_argument("grid spacing must be positive");
  if (!(fwhm > 0.0)) throw std::invalid_argument("smoothing FWHM must be positive");
  const double sigma = CoherenceKernel::gaussian(fwhm).sigma() / grid_spacing;  // in cells
  const auto half = std::max<Index>(1, static_cast<Index>(std::ceil(4.0 * sigma)));
  Eigen::VectorXd k(2 * half + 1);
  for (Index i = -half; i <= half; ++i)
    k(i + half) = std::exp(-0.5 * static_cast<double>(i * i) / (sigma * sigma));
  return k / k.sum();
}

Eigen::VectorXcd convolve_same(const Eigen::VectorXcd& signal, const Eigen::VectorXd& kernel) {
  const Index n = signal.size();
  const Index half = kernel.size() / 2;
  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(n);
  for (Index i = 0; i < n; ++i)
    for (Index k = -half; k <= half; ++k) {
      const Index j = i - k;
      if (j >= 0 && j < n) out(i) += kernel(k + half) * signal(j);
    }
  return out;
}

Complex optimal_phase(const Eigen::VectorXcd& recovered, const Eigen::VectorXcd& truth) {
  const Complex inner = recovered.dot(truth);  // sum conj(r_i) t_i
  const double mag = std::abs(inner);
  return mag > 0.0 ? inner / mag : Complex(1.0);
}

double recovery_error(const Eigen::VectorXcd& recovered, const Eigen::VectorXcd& truth,
                      double grid_spacing, double smoothing_fwhm) {
  if (recovered.size() != truth.size()) throw std::invalid_argument("signals differ in length");
  const Eigen::VectorXd k = smoothing_kernel(grid_spacing, smoothing_fwhm);
  const Eigen::VectorXcd r = convolve_same(recovered, k);
  const Eigen::VectorXcd t = convolve_same(truth, k);
  const double norm = t.norm();
  if (norm == 0.0) throw std::invalid_argument("true signal is zero");
  return (r * optimal_phase(r, t) - t).norm() / norm;
}

// ---------------------------------------------------------------------------

SpikeObjectSpec SpikeObjectSpec::spanning(int peaks, double range) {
  SpikeObjectSpec s;
  s.peaks = peaks;
  s.spacing = peaks > 1 ? range / static_cast<double>(peaks - 1) : range;
  return s;
}

void SpikeObjectSpec::validate() const {
  if (peaks < 1) throw std::invalid_argument("need at least one peak");
  if (!(spacing > 0.0)) throw std::invalid_argument("peak spacing must be positive");
  if (phases.empty()) throw std::invalid_argument("phase set is empty");
  if (!(amplitude_std >= 0.0)) throw std::invalid_argument("amplitude spread must be nonnegative");
}

std::vector<Index> spike_indices(const SpikeObjectSpec& spec, const Grid& grid) {
  spec.validate();
  const auto cells = static_cast<Index>(std::llround(spec.spacing / grid.spacing()));
  if (spec.peaks > 1 && cells < 1) throw std::invalid_argument("peak spacing is below the grid spacing");
  const Index center = static_cast<Index>(std::llround((spec.center - grid.origin()) / grid.spacing()));
  const Index first = center - cells * (spec.peaks - 1) / 2;
  std::vector<Index> idx;
  for (int p = 0; p < spec.peaks; ++p) {
    const Index i = first + p * cells;
    if (i < 0 || i >= grid.size()) throw std::invalid_argument("spikes do not fit on the grid");
    idx.push_back(i);
  }
  return idx;
}

ObjectField random_spike_object(const SpikeObjectSpec& spec, const Grid& grid, std::uint64_t seed) {
  const auto idx = spike_indices(spec, grid);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::uniform_int_distribution<std::size_t> pick(0, spec.phases.size() - 1);
  ObjectField obj = ObjectField::zeros(grid);
  for (Index i : idx) {
    const double amplitude = spec.amplitude_mean + spec.amplitude_std * normal(rng);
    obj.amplitudes(i) = std::polar(amplitude, spec.phases[pick(rng)]);
  }
  return obj;
}

// ---------------------------------------------------------------------------

Scenario Scenario::reconstruction_demo() {
  Scenario s;
  s.object.peaks = 4;
  s.object.spacing = 0.5;
  return s;
}

Scenario Scenario::noise_study() {
  Scenario s;
  s.object.peaks = 3;
  s.object.spacing = 0.35;
  return s;
}

Grid Scenario::grid() const { return Grid::centered(grid_spacing, window); }

std::vector<double> Scenario::positions() const {
  return samples == 0 ? grid().positions() : equally_spaced_positions(samples, window);
}

const char* to_string(Variant v) { return v == Variant::sparse ? "sparse" : "baseline"; }

std::uint64_t trial_seed(std::uint64_t master, std::uint64_t index, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(master), static_cast<std::uint32_t>(master >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
                    static_cast<std::uint32_t>(stream)};
  std::uint64_t out[1];
  std::uint32_t words[2];
  seq.generate(words, words + 2);
  out[0] = (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
  return out[0];
}

TrialData simulate_trial(const Scenario& scenario, std::uint64_t seed) {
  const Grid grid = scenario.grid();
  const auto B = build_mutual_intensity(scenario.kernel, grid);
  const auto h = build_impulse_response(scenario.optics, grid);
  const auto positions = scenario.positions();
  TrialData data{random_spike_object(scenario.object, grid, trial_seed(seed, 0, 0)),
                 build_transfer_matrices(h, B, positions), {}, {}};
  data.clean = forward_intensity(data.object, data.transfer);
  data.noisy = add_noise(data.clean, scenario.snr_db, trial_seed(seed, 0, 1));
  return data;
}

namespace {

EvaluationRecord reconstruct(const Scenario& scenario, const TrialData& data, std::uint64_t seed,
                             Variant variant) {
  EvaluationRecord rec;
  rec.variant = variant;
  rec.peaks = scenario.object.peaks;
  rec.spacing = scenario.object.spacing;
  rec.snr_db = scenario.snr_db;
  rec.samples = static_cast<Index>(data.transfer.size());
  rec.seed = seed;
  const auto start = std::chrono::steady_clock::now();
  try {
    SolverParams params = oracle_parameters(data.object.amplitudes, data.clean, data.noisy, scenario.solver);
    if (variant == Variant::baseline) params = without_sparsity(params);
    const auto result = solve_qcs(data.noisy, data.transfer, params);
    rec.status = result.status;
    rec.rank_ratio = result.rank_ratio;
    rec.error = recovery_error(result.a, data.object.amplitudes, scenario.grid_spacing,
                               scenario.smoothing_fwhm);
  } catch (const std::exception& e) {
    rec.failed = true;
    rec.failure = e.what();
  }
  rec.runtime_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rec;
}

void parallel_for(int count, unsigned threads, const std::function<void(int)>& body) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(std::max(count, 1)));
  if (threads <= 1) {
    for (int i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t)
    pool.emplace_back([&] {
      for (int i = next++; i < count; i = next++) body(i);
    });
  for (auto& th : pool) th.join();
}

struct PointJob {
  double value;
  Scenario scenario;
};

SweepTable run_sweep(std::string parameter, const std::vector<PointJob>& jobs,
                     std::span<const Variant> variants, const SweepOptions& options) {
  if (options.trials < 1) throw std::invalid_argument("trials must be at least 1");
  const int per_point = options.trials;
  const int total = static_cast<int>(jobs.size()) * per_point;
  std::vector<std::vector<EvaluationRecord>> records(static_cast<std::size_t>(total));

  parallel_for(total, options.threads, [&](int task) {
    const auto& job = jobs[static_cast<std::size_t>(task / per_point)];
    const auto trial = static_cast<std::uint64_t>(task % per_point);
    records[static_cast<std::size_t>(task)] =
        run_trial_pair(job.scenario, trial_seed(options.seed, trial, 7), variants);
  });

  SweepTable table;
  table.parameter = std::move(parameter);
  for (std::size_t j = 0; j < jobs.size(); ++j)
    for (std::size_t v = 0; v < variants.size(); ++v) {
      SweepPoint point;
      point.value = jobs[j].value;
      point.variant = variants[v];
      for (int t = 0; t < per_point; ++t) {
        const auto& rec = records[j * static_cast<std::size_t>(per_point) + static_cast<std::size_t>(t)][v];
        if (rec.failed) {
          ++point.failures;
          continue;
        }
        point.errors.push_back(rec.error);
      }
      point.trials = static_cast<int>(point.errors.size());
      if (point.trials > 0) {
        const Eigen::Map<const Eigen::VectorXd> e(point.errors.data(), point.trials);
        point.mean = e.mean();
        point.stddev = point.trials > 1
                           ? std::sqrt((e.array() - point.mean).square().sum() / (point.trials - 1))
                           : 0.0;
      } else {
        point.mean = std::numeric_limits<double>::quiet_NaN();
      }
      table.points.push_back(std::move(point));
    }
  return table;
}

std::vector<Variant> variants_for(bool baseline) {
  if (baseline) return {Variant::sparse, Variant::baseline};
  return {Variant::sparse};
}

}  // namespace

EvaluationRecord run_trial(const Scenario& scenario, std::uint64_t seed, Variant variant) {
  const TrialData data = simulate_trial(scenario, seed);
  return reconstruct(scenario, data, seed, variant);
}

std::vector<EvaluationRecord> run_trial_pair(const Scenario& scenario, std::uint64_t seed,
                                             std::span<const Variant> variants) {
  std::vector<EvaluationRecord> out;
  try {
    const TrialData data = simulate_trial(scenario, seed);
    for (Variant v : variants) out.push_back(reconstruct(scenario, data, seed, v));
  } catch (const std::exception& e) {
    for (Variant v : variants) {
      EvaluationRecord rec;
      rec.variant = v;
      rec.seed = seed;
      rec.failed = true;
      rec.failure = e.what();
      out.push_back(rec);
    }
  }
  return out;
}

double SweepPoint::standard_error() const {
  return trials > 0 ? stddev / std::sqrt(static_cast<double>(trials)) : 0.0;
}

const SweepPoint* SweepTable::find(double value, Variant variant) const {
  for (const auto& p : points)
    if (p.variant == variant && (p.value == value || std::abs(p.value - value) <= 1e-12 * std::abs(value)))
      return &p;
  return nullptr;
}

std::string SweepTable::to_csv() const {
  std::string out = parameter + ",series,mean_error,std_error,trials,failures\n";
  for (const auto& p : points) {
    out += csv::format(p.value) + ',' + to_string(p.variant) + ',' + csv::format(p.mean) + ',' +
           csv::format(p.stddev) + ',' + std::to_string(p.trials) + ',' + std::to_string(p.failures) + '\n';
  }
  return out;
}

SweepTable sweep_noise(std::span<const double> snr_db, const Scenario& base, SweepOptions options) {
  std::vector<PointJob> jobs;
  for (double snr : snr_db) {
    Scenario s = base;
    s.snr_db = std::isinf(snr) ? std::nullopt : std::optional<double>(snr);
    jobs.push_back({snr, s});
  }
  return run_sweep("snr_db", jobs, variants_for(true), options);
}

SweepTable sweep_peaks(std::span<const int> peaks, double range, const Scenario& base,
                       SweepOptions options) {
  std::vector<PointJob> jobs;
  for (int k : peaks) {
    Scenario s = base;
    const auto spec = SpikeObjectSpec::spanning(k, range);
    s.object.peaks = spec.peaks;
    s.object.spacing = spec.spacing;
    jobs.push_back({static_cast<double>(k), s});
  }
  return run_sweep("peaks", jobs, variants_for(options.include_baseline), options);
}

SweepTable sweep_samples(std::span<const Index> counts, const Scenario& base, SweepOptions options) {
  std::vector<PointJob> jobs;
  for (Index c : counts) {
    Scenario s = base;
    s.samples = c;
    jobs.push_back({static_cast<double>(c), s});
  }
  return run_sweep("samples", jobs, variants_for(options.include_baseline), options);
}

}  // namespace qcs
