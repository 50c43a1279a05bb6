#include "experiment_config.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace qcs::app {

using nlohmann::json;

namespace {

/// Reads one JSON object and remembers which keys were consumed, so that
/// leftovers can be reported as unknown.
class Section {
 public:
  Section(const json& node, std::string path) : node_(node), path_(std::move(path)) {
    if (!node_.is_object()) fail(path_.empty() ? "configuration" : path_, "must be an object");
  }

  /// Rejects every key that was never looked up.
  void finish() const {
    for (const auto& [key, value] : node_.items())
      if (!used_.count(key)) fail(key_path(key), "unknown key");
  }

  std::string key_path(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  [[noreturn]] static void fail(const std::string& path, const std::string& what) {
    throw ConfigError(path + ": " + what);
  }

  const json* find(const std::string& key) {
    used_.insert(key);
    const auto it = node_.find(key);
    return it == node_.end() ? nullptr : &*it;
  }

  Section section(const std::string& key) {
    static const json empty = json::object();
    const json* v = find(key);
    return Section(v ? *v : empty, key_path(key));
  }

  double number(const std::string& key, double fallback) {
    const json* v = find(key);
    if (!v) return fallback;
    if (!v->is_number()) fail(key_path(key), "must be a number");
    return v->get<double>();
  }

  std::optional<double> optional_number(const std::string& key, std::optional<double> fallback) {
    const json* v = find(key);
    if (!v) return fallback;
    if (v->is_null()) return std::nullopt;
    if (!v->is_number()) fail(key_path(key), "must be a number or null");
    return v->get<double>();
  }

  long long integer(const std::string& key, long long fallback) {
    const json* v = find(key);
    if (!v) return fallback;
    if (!v->is_number_integer()) fail(key_path(key), "must be an integer");
    return v->get<long long>();
  }

  bool boolean(const std::string& key, bool fallback) {
    const json* v = find(key);
    if (!v) return fallback;
    if (!v->is_boolean()) fail(key_path(key), "must be true or false");
    return v->get<bool>();
  }

  std::string string(const std::string& key, const std::string& fallback) {
    const json* v = find(key);
    if (!v) return fallback;
    if (!v->is_string()) fail(key_path(key), "must be a string");
    return v->get<std::string>();
  }

  std::vector<double> numbers(const std::string& key, std::vector<double> fallback) {
    const json* v = find(key);
    if (!v) return fallback;
    if (!v->is_array()) fail(key_path(key), "must be an array of numbers");
    std::vector<double> out;
    for (const auto& item : *v) {
      if (!item.is_number()) fail(key_path(key), "must be an array of numbers");
      out.push_back(item.get<double>());
    }
    return out;
  }

  BoundSetting bound(const std::string& key, BoundSetting fallback, bool allow_null) {
    const json* v = find(key);
    if (!v) return fallback;
    if (v->is_string()) {
      if (v->get<std::string>() != "oracle") fail(key_path(key), "must be \"oracle\" or a number");
      return {true, std::nullopt};
    }
    if (v->is_null() && allow_null) return {false, std::nullopt};
    if (!v->is_number()) fail(key_path(key), allow_null ? "must be \"oracle\", a number or null"
                                                        : "must be \"oracle\" or a number");
    return {false, v->get<double>()};
  }

 private:
  const json& node_;
  std::string path_;
  std::set<std::string> used_;
};

void require(bool ok, const std::string& path, const std::string& what) {
  if (!ok) Section::fail(path, what);
}

bool finite_positive(double v) { return std::isfinite(v) && v > 0.0; }

json number_or_null(std::optional<double> v) { return v ? json(*v) : json(nullptr); }

json bound_json(const BoundSetting& b) {
  if (b.oracle) return "oracle";
  return number_or_null(b.value);
}

}  // namespace

std::optional<SweepKind> parse_sweep_kind(std::string_view name) {
  if (name == "noise") return SweepKind::noise;
  if (name == "peaks") return SweepKind::peaks;
  if (name == "samples") return SweepKind::samples;
  return std::nullopt;
}

const char* to_string(SweepKind kind) {
  switch (kind) {
    case SweepKind::noise: return "noise";
    case SweepKind::peaks: return "peaks";
    case SweepKind::samples: return "samples";
  }
  return "unknown";
}

ExperimentConfig ExperimentConfig::from_json(const json& doc) {
  ExperimentConfig cfg;
  Scenario& sc = cfg.scenario;
  Section root(doc, "");

  {
    Section optics = root.section("optics");
    sc.optics.wavelength = optics.number("wavelength", sc.optics.wavelength);
    require(finite_positive(sc.optics.wavelength), "optics.wavelength", "must be positive");
    sc.optics.cutoff_frequency = optics.number("cutoff_frequency", 1.0 / sc.optics.wavelength);
    require(finite_positive(sc.optics.cutoff_frequency), "optics.cutoff_frequency", "must be positive");

    Section kernel = optics.section("kernel");
    const std::string type = kernel.string("type", "gaussian");
    const double fwhm = kernel.number("fwhm", sc.kernel.fwhm);
    if (type == "gaussian") {
      require(finite_positive(fwhm), "optics.kernel.fwhm", "must be positive");
      sc.kernel = CoherenceKernel::gaussian(fwhm);
    } else if (type == "coherent") {
      sc.kernel = CoherenceKernel::coherent();
    } else if (type == "incoherent") {
      sc.kernel = CoherenceKernel::incoherent();
    } else {
      Section::fail("optics.kernel.type", "must be gaussian, coherent or incoherent");
    }
    kernel.finish();
    optics.finish();
  }

  {
    Section grid = root.section("grid");
    sc.grid_spacing = grid.number("spacing", sc.grid_spacing);
    require(finite_positive(sc.grid_spacing), "grid.spacing", "must be positive");
    sc.window = grid.number("window", sc.window);
    require(finite_positive(sc.window), "grid.window", "must be positive");
    require(sc.window >= sc.grid_spacing, "grid.window", "must be at least one grid spacing");
    grid.finish();
  }

  {
    Section object = root.section("object");
    SpikeObjectSpec& spec = sc.object;
    spec.peaks = static_cast<int>(object.integer("peaks", spec.peaks));
    require(spec.peaks >= 1, "object.peaks", "must be at least 1");
    spec.spacing = object.number("spacing", spec.spacing);
    require(finite_positive(spec.spacing), "object.spacing", "must be positive");
    require(spec.spacing >= sc.grid_spacing * (1 - 1e-9), "object.spacing", "must be at least the grid spacing");
    spec.amplitude_mean = object.number("amplitude_mean", spec.amplitude_mean);
    require(std::isfinite(spec.amplitude_mean), "object.amplitude_mean", "must be finite");
    spec.amplitude_std = object.number("amplitude_std", spec.amplitude_std);
    require(std::isfinite(spec.amplitude_std) && spec.amplitude_std >= 0, "object.amplitude_std",
            "must be nonnegative");
    spec.phases = object.numbers("phases", spec.phases);
    require(!spec.phases.empty(), "object.phases", "must not be empty");
    spec.center = object.number("center", spec.center);
    const double extent = spec.spacing * (spec.peaks - 1);
    require(std::abs(spec.center) + extent / 2 <= sc.window / 2 + 1e-9, "object.spacing",
            "spike train does not fit inside grid.window");

    if (const json* list = object.find("spikes")) {
      if (!list->is_array()) Section::fail("object.spikes", "must be an array");
      std::vector<Spike> spikes;
      for (std::size_t i = 0; i < list->size(); ++i) {
        Section s((*list)[i], "object.spikes[" + std::to_string(i) + "]");
        Spike spike;
        spike.position = s.number("position", 0.0);
        require(std::isfinite(spike.position) && std::abs(spike.position) <= sc.window / 2 + 1e-9,
                s.key_path("position"), "must lie inside grid.window");
        spike.amplitude = s.number("amplitude", 0.0);
        require(std::isfinite(spike.amplitude), s.key_path("amplitude"), "must be finite");
        spike.phase = s.number("phase", 0.0);
        require(std::isfinite(spike.phase), s.key_path("phase"), "must be finite");
        s.finish();
        spikes.push_back(spike);
      }
      cfg.spikes = std::move(spikes);
    }
    object.finish();
  }

  {
    Section m = root.section("measurements");
    const long long count = m.integer("count", sc.samples);
    require(count >= 0, "measurements.count", "must be nonnegative (0 uses the grid points)");
    sc.samples = static_cast<Index>(count);
    cfg.measurement_window = m.optional_number("window", std::nullopt);
    if (cfg.measurement_window)
      require(finite_positive(*cfg.measurement_window), "measurements.window", "must be positive");
    require(!(cfg.measurement_window && sc.samples == 0), "measurements.window",
            "needs measurements.count > 0");
    require(sc.samples != 1, "measurements.count", "must be 0 or at least 2");
    m.finish();
  }

  {
    Section noise = root.section("noise");
    sc.snr_db = noise.optional_number("snr_db", sc.snr_db);
    if (sc.snr_db) require(!std::isnan(*sc.snr_db), "noise.snr_db", "must be a number or null");
    noise.finish();
  }

  const long long seed = root.integer("seed", static_cast<long long>(cfg.seed));
  require(seed >= 0, "seed", "must be nonnegative");
  cfg.seed = static_cast<std::uint64_t>(seed);

  {
    Section s = root.section("solver");
    SolverParams& p = sc.solver;
    p.delta = s.number("delta", p.delta);
    require(finite_positive(p.delta), "solver.delta", "must be positive");
    cfg.zeta = s.bound("zeta", cfg.zeta, true);
    if (!cfg.zeta.oracle && cfg.zeta.value)
      require(finite_positive(*cfg.zeta.value), "solver.zeta", "must be positive");
    cfg.epsilon = s.bound("epsilon", cfg.epsilon, false);
    if (!cfg.epsilon.oracle)
      require(std::isfinite(*cfg.epsilon.value) && *cfg.epsilon.value >= 0, "solver.epsilon",
              "must be nonnegative");
    p.threshold = s.number("threshold", p.threshold);
    require(p.threshold > 0 && p.threshold < 1, "solver.threshold", "must lie in (0, 1)");
    p.threshold_step = s.number("threshold_step", p.threshold_step);
    require(p.threshold_step > 0 && p.threshold_step < 1, "solver.threshold_step", "must lie in (0, 1)");
    p.thresholding = s.boolean("thresholding", p.thresholding);
    p.max_outer_iters = static_cast<int>(s.integer("max_outer_iters", p.max_outer_iters));
    require(p.max_outer_iters >= 1, "solver.max_outer_iters", "must be at least 1");
    p.rank_ratio_threshold = s.number("rank_ratio_threshold", p.rank_ratio_threshold);
    require(p.rank_ratio_threshold > 1, "solver.rank_ratio_threshold", "must exceed 1");
    p.tol_feas = s.number("tol_feas", p.tol_feas);
    require(finite_positive(p.tol_feas), "solver.tol_feas", "must be positive");
    p.max_inner_iters = static_cast<int>(s.integer("max_inner_iters", p.max_inner_iters));
    require(p.max_inner_iters >= 1, "solver.max_inner_iters", "must be at least 1");
    p.patience = static_cast<int>(s.integer("patience", p.patience));
    require(p.patience >= 1, "solver.patience", "must be at least 1");
    s.finish();
  }

  {
    Section e = root.section("evaluation");
    sc.smoothing_fwhm = e.number("smoothing_fwhm", sc.smoothing_fwhm);
    require(finite_positive(sc.smoothing_fwhm), "evaluation.smoothing_fwhm", "must be positive");
    e.finish();
  }

  {
    Section s = root.section("sweep");
    cfg.sweep.values = s.numbers("values", cfg.sweep.values);
    const long long trials = s.integer("trials", cfg.sweep.trials);
    require(trials >= 1, "sweep.trials", "must be at least 1");
    cfg.sweep.trials = static_cast<int>(trials);
    cfg.sweep.range = s.number("range", cfg.sweep.range);
    require(finite_positive(cfg.sweep.range), "sweep.range", "must be positive");
    const long long threads = s.integer("threads", cfg.sweep.threads);
    require(threads >= 0, "sweep.threads", "must be nonnegative");
    cfg.sweep.threads = static_cast<unsigned>(threads);
    cfg.sweep.baseline = s.boolean("baseline", cfg.sweep.baseline);
    s.finish();
  }

  {
    Section out = root.section("output");
    cfg.plots = out.boolean("plots", cfg.plots);
    out.finish();
  }
  root.finish();
  return cfg;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string() + ": cannot open configuration file");
  json doc;
  try {
    doc = json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return from_json(doc);
}

json ExperimentConfig::to_json() const {
  const Scenario& sc = scenario;
  json kernel;
  switch (sc.kernel.kind) {
    case CoherenceKernel::Kind::gaussian: kernel = {{"type", "gaussian"}, {"fwhm", sc.kernel.fwhm}}; break;
    case CoherenceKernel::Kind::coherent: kernel = {{"type", "coherent"}}; break;
    case CoherenceKernel::Kind::incoherent: kernel = {{"type", "incoherent"}}; break;
  }
  json object = {{"peaks", sc.object.peaks},
                 {"spacing", sc.object.spacing},
                 {"amplitude_mean", sc.object.amplitude_mean},
                 {"amplitude_std", sc.object.amplitude_std},
                 {"phases", sc.object.phases},
                 {"center", sc.object.center}};
  if (spikes) {
    json list = json::array();
    for (const auto& s : *spikes)
      list.push_back({{"position", s.position}, {"amplitude", s.amplitude}, {"phase", s.phase}});
    object["spikes"] = list;
  }
  json measurements = {{"count", sc.samples}};
  if (measurement_window) measurements["window"] = *measurement_window;
  const SolverParams& p = sc.solver;
  return {
      {"optics", {{"wavelength", sc.optics.wavelength}, {"cutoff_frequency", sc.optics.cutoff_frequency},
                  {"kernel", kernel}}},
      {"grid", {{"spacing", sc.grid_spacing}, {"window", sc.window}}},
      {"object", object},
      {"measurements", measurements},
      {"noise", {{"snr_db", number_or_null(sc.snr_db)}}},
      {"seed", seed},
      {"solver", {{"delta", p.delta},
                  {"zeta", bound_json(zeta)},
                  {"epsilon", bound_json(epsilon)},
                  {"threshold", p.threshold},
                  {"threshold_step", p.threshold_step},
                  {"thresholding", p.thresholding},
                  {"max_outer_iters", p.max_outer_iters},
                  {"rank_ratio_threshold", p.rank_ratio_threshold},
                  {"tol_feas", p.tol_feas},
                  {"max_inner_iters", p.max_inner_iters},
                  {"patience", p.patience}}},
      {"evaluation", {{"smoothing_fwhm", sc.smoothing_fwhm}}},
      {"sweep", {{"values", sweep.values},
                 {"trials", sweep.trials},
                 {"range", sweep.range},
                 {"threads", sweep.threads},
                 {"baseline", sweep.baseline}}},
      {"output", {{"plots", plots}}},
  };
}

std::vector<double> ExperimentConfig::positions() const {
  if (scenario.samples == 0) return scenario.grid().positions();
  return equally_spaced_positions(scenario.samples, measurement_window.value_or(scenario.window));
}

ObjectField ExperimentConfig::object() const {
  const Grid grid = scenario.grid();
  if (!spikes) return random_spike_object(scenario.object, grid, trial_seed(seed, 0, 0));
  ObjectField obj = ObjectField::zeros(grid);
  for (const auto& s : *spikes) obj.amplitudes(grid.nearest(s.position)) += std::polar(s.amplitude, s.phase);
  return obj;
}

std::vector<double> ExperimentConfig::sweep_values(SweepKind kind) const {
  if (!sweep.values.empty()) return sweep.values;
  switch (kind) {
    case SweepKind::noise: return {20, 30, 40, 50, 60};
    case SweepKind::peaks: return {2, 3, 4, 5, 6};
    case SweepKind::samples: return {9, 25, 49, 81, 121};
  }
  return {};
}

}  // namespace qcs::app
