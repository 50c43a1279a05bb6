#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "experiment_config.hpp"
#include "qcs/csv.hpp"
#include "qcs/evaluation.hpp"
#include "svg_plot.hpp"

namespace qcs::app {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

/// Measurement or object file that cannot be used.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

[[noreturn]] void rethrow_for(const fs::path& path, const std::runtime_error& e) {
  const std::string what = e.what();
  if (what.rfind(path.string(), 0) == 0) throw InputError(what);
  throw InputError(path.string() + ": " + what);
}

struct CommonOptions {
  std::string config;
  std::string out = "out";
  std::optional<std::uint64_t> seed;
  bool quiet = false;
};

ExperimentConfig load_config(const CommonOptions& common) {
  ExperimentConfig cfg = common.config.empty() ? ExperimentConfig{} : ExperimentConfig::load(common.config);
  if (common.seed) cfg.seed = *common.seed;
  return cfg;
}

void write_file(const fs::path& path, const std::string& contents) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  csv::write_atomic(path, contents);
}

json json_number(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

std::string measurements_csv(const Measurements& y) {
  std::vector<std::vector<double>> rows;
  for (Index k = 0; k < y.size(); ++k) rows.push_back({y.positions[static_cast<std::size_t>(k)], y.values(k)});
  return csv::render({"u", "y"}, rows);
}

std::string field_csv(const Eigen::VectorXcd& a, const Grid& grid) {
  std::vector<std::vector<double>> rows;
  for (Index i = 0; i < a.size(); ++i) rows.push_back({grid.position(i), a(i).real(), a(i).imag()});
  return csv::render({"eta", "re_a", "im_a"}, rows);
}

Measurements read_measurements(const fs::path& path) {
  csv::Table t;
  try {
    t = csv::read(path);
    Measurements y;
    const auto cu = t.column("u"), cy = t.column("y");
    y.values.resize(static_cast<Index>(t.rows.size()));
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
      y.positions.push_back(t.rows[r][cu]);
      y.values(static_cast<Index>(r)) = t.rows[r][cy];
    }
    if (y.size() == 0) throw std::runtime_error("no measurements");
    return y;
  } catch (const std::runtime_error& e) {
    rethrow_for(path, e);
  }
}

Eigen::VectorXcd read_field(const fs::path& path, const Grid& grid) {
  try {
    const csv::Table t = csv::read(path);
    const auto ce = t.column("eta"), cr = t.column("re_a"), ci = t.column("im_a");
    if (static_cast<Index>(t.rows.size()) != grid.size())
      throw std::runtime_error("expected " + std::to_string(grid.size()) + " rows for the configured grid, found " +
                               std::to_string(t.rows.size()));
    Eigen::VectorXcd a(grid.size());
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
      const auto i = static_cast<Index>(r);
      if (std::abs(t.rows[r][ce] - grid.position(i)) > 1e-9 * std::max(1.0, std::abs(grid.position(i))))
        throw std::runtime_error("row " + std::to_string(r + 2) + ": eta does not match the configured grid");
      a(i) = Complex(t.rows[r][cr], t.rows[r][ci]);
    }
    return a;
  } catch (const std::runtime_error& e) {
    rethrow_for(path, e);
  }
}

std::vector<TransferMatrix> transfer_for(const Scenario& sc, const std::vector<double>& positions) {
  const Grid grid = sc.grid();
  return build_transfer_matrices(build_impulse_response(sc.optics, grid), build_mutual_intensity(sc.kernel, grid),
                                 positions);
}

// ---------------------------------------------------------------------------

int cmd_simulate(const CommonOptions& common, std::ostream& out) {
  const ExperimentConfig cfg = load_config(common);
  const Scenario& sc = cfg.scenario;
  const Grid grid = sc.grid();
  const ObjectField object = cfg.object();
  const auto transfer = transfer_for(sc, cfg.positions());
  const Measurements clean = forward_intensity(object, transfer);
  const std::uint64_t noise_seed = trial_seed(cfg.seed, 0, 1);
  const Measurements noisy = add_noise(clean, sc.snr_db, noise_seed);

  const fs::path dir(common.out);
  write_file(dir / "measurements.csv", measurements_csv(noisy));
  write_file(dir / "truth.csv", field_csv(object.amplitudes, grid));
  json meta = {{"command", "simulate"},
               {"config", cfg.to_json()},
               {"object_seed", cfg.spikes ? json(nullptr) : json(trial_seed(cfg.seed, 0, 0))},
               {"noise_seed", sc.snr_db ? json(noise_seed) : json(nullptr)},
               {"grid_points", grid.size()},
               {"measurements", noisy.size()},
               {"noise_max_abs", (noisy.values - clean.values).cwiseAbs().maxCoeff()}};
  write_file(dir / "simulate.json", meta.dump(2) + "\n");

  if (cfg.plots) {
    Plot plot{"Simulated measurements", "u / wavelength", "intensity", {}};
    plot.series.push_back({"y", noisy.positions, std::vector<double>(noisy.values.begin(), noisy.values.end())});
    write_file(dir / "measurements.svg", render_svg(plot));
  }
  if (!common.quiet)
    out << "simulate: " << noisy.size() << " measurements, " << grid.size() << " grid points -> " << dir.string()
        << "\n";
  return kSuccess;
}

// ---------------------------------------------------------------------------

struct ReconstructOptions {
  std::string measurements;
  std::string truth;
  bool no_sparsity = false;
};

int cmd_reconstruct(const CommonOptions& common, const ReconstructOptions& opts, std::ostream& out,
                    std::ostream& err) {
  const ExperimentConfig cfg = load_config(common);
  const Scenario& sc = cfg.scenario;
  const Grid grid = sc.grid();

  Measurements y;
  std::optional<Eigen::VectorXcd> truth;
  if (opts.measurements.empty()) {
    if (!opts.truth.empty()) throw InputError("--truth needs --measurements");
    const ObjectField object = cfg.object();
    y = add_noise(forward_intensity(object, transfer_for(sc, cfg.positions())), sc.snr_db, trial_seed(cfg.seed, 0, 1));
    truth = object.amplitudes;
  } else {
    y = read_measurements(opts.measurements);
    if (!opts.truth.empty()) truth = read_field(opts.truth, grid);
  }
  const auto transfer = transfer_for(sc, y.positions);

  SolverParams params = sc.solver;
  std::optional<Measurements> clean;
  if (truth) clean = forward_intensity(ObjectField(*truth, grid), transfer);
  if ((cfg.zeta.oracle || cfg.epsilon.oracle) && !truth)
    throw ConfigError(std::string(cfg.zeta.oracle ? "solver.zeta" : "solver.epsilon") +
                      ": oracle mode needs the true object (pass --truth or simulate from the config)");
  if (truth) params = oracle_parameters(*truth, *clean, y, params);
  if (!cfg.zeta.oracle) params.zeta = cfg.zeta.value.value_or(std::numeric_limits<double>::infinity());
  if (!cfg.epsilon.oracle) params.epsilon = *cfg.epsilon.value;
  if (opts.no_sparsity) params = without_sparsity(params);

  const ReconstructionResult result = solve_qcs(y, transfer, params);

  const fs::path dir(common.out);
  write_file(dir / "reconstruction.csv", field_csv(result.a, grid));

  std::vector<Index> support;
  for (Index i = 0; i < grid.size(); ++i)
    if (!std::binary_search(result.off_support.begin(), result.off_support.end(), i)) support.push_back(i);
  json history = json::array();
  for (const auto& h : result.history)
    history.push_back({{"off_support", h.off_support_size},
                       {"accepted", h.accepted},
                       {"thresholding", h.thresholding},
                       {"objective", json_number(h.objective)},
                       {"max_residual", json_number(h.max_residual)},
                       {"rank_ratio", json_number(h.rank_ratio)},
                       {"inner_iterations", h.inner_iterations}});
  json sv = json::array();
  for (Index i = 0; i < std::min<Index>(5, result.singular_values.size()); ++i)
    sv.push_back(json_number(result.singular_values(i)));
  json diag = {{"command", "reconstruct"},
               {"variant", opts.no_sparsity ? "baseline" : "sparse"},
               {"status", to_string(result.status)},
               {"rank_ratio", json_number(result.rank_ratio)},
               {"rank_ratio_converged", rank_ratio_converged(result.rank_ratio, params.rank_ratio_threshold)},
               {"outer_iterations", result.outer_iterations},
               {"singular_values", sv},
               {"support", support},
               {"zeta", json_number(params.zeta)},
               {"epsilon", json_number(params.epsilon)},
               {"history", history},
               {"config", cfg.to_json()}};
  std::optional<double> error;
  if (truth && truth->norm() > 0) {
    error = recovery_error(result.a, *truth, sc.grid_spacing, sc.smoothing_fwhm);
    diag["error"] = *error;
  }
  write_file(dir / "diagnostics.json", diag.dump(2) + "\n");

  if (cfg.plots) {
    Plot plot{"Reconstruction", "eta / wavelength", "amplitude", {}};
    const auto xs = grid.positions();
    auto magnitude = [](const Eigen::VectorXcd& v) {
      std::vector<double> m(static_cast<std::size_t>(v.size()));
      for (Index i = 0; i < v.size(); ++i) m[static_cast<std::size_t>(i)] = std::abs(v(i));
      return m;
    };
    if (truth) plot.series.push_back({"|a| true", xs, magnitude(*truth)});
    plot.series.push_back({"|a| recovered", xs, magnitude(result.a)});
    // Intensities are on another scale; draw them normalized to the peak amplitude.
    const double amax = std::max(truth ? truth->cwiseAbs().maxCoeff() : 0.0, result.a.cwiseAbs().maxCoeff());
    const double ymax = y.values.cwiseAbs().maxCoeff();
    std::vector<double> scaled(y.values.begin(), y.values.end());
    if (ymax > 0 && amax > 0)
      for (double& v : scaled) v *= amax / ymax;
    plot.series.push_back({"y (scaled)", y.positions, scaled});
    write_file(dir / "reconstruction.svg", render_svg(plot));
  }

  if (!common.quiet) {
    out << "reconstruct: status " << to_string(result.status) << ", rank ratio " << result.rank_ratio << ", "
        << result.outer_iterations << " outer iterations";
    if (error) out << ", error " << *error;
    out << "\n";
  }
  switch (result.status) {
    case ReconstructionStatus::converged: return kSuccess;
    case ReconstructionStatus::infeasible:
      err << "reconstruct: constraints are infeasible from the first iteration\n";
      return kInfeasible;
    case ReconstructionStatus::iteration_cap:
    case ReconstructionStatus::stalled:
      err << "reconstruct: solver did not reach the rank-one criterion (" << to_string(result.status) << ")\n";
      return kStalled;
  }
  return kFailure;
}

// ---------------------------------------------------------------------------

struct SweepCommand {
  std::string kind;
  std::optional<int> trials;
};

int cmd_sweep(const CommonOptions& common, const SweepCommand& opts, std::ostream& out) {
  const auto kind = parse_sweep_kind(opts.kind);
  if (!kind) throw ConfigError("kind: unknown sweep kind '" + opts.kind + "' (noise, peaks or samples)");
  ExperimentConfig cfg = load_config(common);
  if (opts.trials) {
    if (*opts.trials < 1) throw ConfigError("--trials: must be at least 1");
    cfg.sweep.trials = *opts.trials;
  }
  if (!cfg.zeta.oracle || !cfg.epsilon.oracle)
    throw ConfigError("solver.zeta: sweeps use the oracle bounds of the evaluation protocol");
  if (cfg.spikes) throw ConfigError("object.spikes: sweeps draw random spike objects");

  SweepOptions options;
  options.trials = cfg.sweep.trials;
  options.seed = cfg.seed;
  options.threads = cfg.sweep.threads;
  options.include_baseline = cfg.sweep.baseline;

  const auto values = cfg.sweep_values(*kind);
  auto as_int = [&](double v) {
    if (v != std::round(v) || v < 1) throw ConfigError("sweep.values: must be positive integers for this kind");
    return static_cast<long long>(v);
  };

  SweepTable table;
  std::string x_label;
  switch (*kind) {
    case SweepKind::noise:
      table = sweep_noise(values, cfg.scenario, options);
      x_label = "SNR (dB)";
      break;
    case SweepKind::peaks: {
      std::vector<int> peaks;
      for (double v : values) peaks.push_back(static_cast<int>(as_int(v)));
      table = sweep_peaks(peaks, cfg.sweep.range, cfg.scenario, options);
      x_label = "number of peaks";
      break;
    }
    case SweepKind::samples: {
      std::vector<Index> counts;
      for (double v : values) {
        if (as_int(v) < 2) throw ConfigError("sweep.values: sample counts must be at least 2");
        counts.push_back(static_cast<Index>(as_int(v)));
      }
      table = sweep_samples(counts, cfg.scenario, options);
      x_label = "number of samples";
      break;
    }
  }

  const fs::path dir(common.out);
  const std::string stem = std::string("sweep_") + to_string(*kind);
  write_file(dir / (stem + ".csv"), table.to_csv());
  json meta = {{"command", "sweep"}, {"kind", to_string(*kind)}, {"values", values}, {"config", cfg.to_json()}};
  write_file(dir / (stem + ".json"), meta.dump(2) + "\n");

  if (cfg.plots) {
    Plot plot{std::string("Reconstruction error vs ") + x_label, x_label, "mean error", {}};
    for (Variant v : {Variant::sparse, Variant::baseline}) {
      Series s{v == Variant::sparse ? "sparsity-based" : "without sparsity", {}, {}, true};
      for (const auto& p : table.points)
        if (p.variant == v) {
          s.x.push_back(p.value);
          s.y.push_back(p.mean);
        }
      if (!s.x.empty()) plot.series.push_back(std::move(s));
    }
    write_file(dir / (stem + ".svg"), render_svg(plot));
  }

  if (!common.quiet) out << table.to_csv();
  int failures = 0;
  for (const auto& p : table.points) failures += p.failures;
  if (failures > 0 && !common.quiet) out << "sweep: " << failures << " trials failed\n";
  return kSuccess;
}

void add_common(CLI::App* cmd, CommonOptions& common) {
  cmd->add_option("--config", common.config, "JSON experiment configuration")->check(CLI::ExistingFile);
  cmd->add_option("--out", common.out, "output directory")->capture_default_str();
  cmd->add_option("--seed", common.seed, "master seed, overrides the configuration");
  cmd->add_flag("--quiet", common.quiet, "suppress the summary on stdout");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Sparse reconstruction from partially coherent intensity measurements", "qcs"};
  app.require_subcommand(1);

  CommonOptions common;
  ReconstructOptions recon;
  SweepCommand sweep;

  auto* simulate = app.add_subcommand("simulate", "simulate measurements of an object");
  add_common(simulate, common);

  auto* reconstruct = app.add_subcommand("reconstruct", "recover the object from measurements");
  add_common(reconstruct, common);
  reconstruct->add_option("--measurements", recon.measurements, "measurement CSV (u,y); simulated if absent")
      ->check(CLI::ExistingFile);
  reconstruct->add_option("--truth", recon.truth, "true object CSV (eta,re_a,im_a) for oracle bounds and error")
      ->check(CLI::ExistingFile);
  reconstruct->add_flag("--no-sparsity", recon.no_sparsity, "run without thresholding and mixed-norm bound");

  auto* sweep_cmd = app.add_subcommand("sweep", "run an error sweep (noise, peaks or samples)");
  add_common(sweep_cmd, common);
  sweep_cmd->add_option("kind", sweep.kind, "noise | peaks | samples")->required();
  sweep_cmd->add_option("--trials", sweep.trials, "trials per point, overrides the configuration");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kSuccess : kConfigError;
  }

  try {
    if (simulate->parsed()) return cmd_simulate(common, out);
    if (reconstruct->parsed()) return cmd_reconstruct(common, recon, out, err);
    return cmd_sweep(common, sweep, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const InputError& e) {
    err << "input error: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kFailure;
  }
}

}  // namespace qcs::app
