#include "qcs/optics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>

#include <unsupported/Eigen/FFT>

namespace qcs {

namespace {

double sinc_lowpass(double x, double cutoff) {
  if (x == 0.0) return 1.0;
  const double arg = 2.0 * std::numbers::pi * cutoff * x;
  return std::sin(arg) / arg;
}

}  // namespace

OpticalConfig OpticalConfig::ideal(double wavelength) {
  OpticalConfig c{wavelength, 1.0 / wavelength};
  c.validate();
  return c;
}

void OpticalConfig::validate() const {
  if (!(wavelength > 0.0) || !std::isfinite(wavelength))
    throw std::invalid_argument("wavelength must be positive");
  if (!(cutoff_frequency > 0.0) || !std::isfinite(cutoff_frequency))
    throw std::invalid_argument("cutoff_frequency must be positive");
}

// ---------------------------------------------------------------------------

Grid::Grid(double spacing, Index count, double origin)
    : spacing_(spacing), count_(count), origin_(origin) {
  if (!(spacing > 0.0) || !std::isfinite(spacing))
    throw std::invalid_argument("grid spacing must be positive");
  if (count < 2) throw std::invalid_argument("grid needs at least two points");
  if (!std::isfinite(origin)) throw std::invalid_argument("grid origin must be finite");
}

Grid Grid::centered(double spacing, double window) {
  if (!(spacing > 0.0)) throw std::invalid_argument("grid spacing must be positive");
  if (!(window > 0.0)) throw std::invalid_argument("grid window must be positive");
  const auto cells = static_cast<Index>(std::llround(window / spacing));
  return Grid(spacing, cells + 1, -0.5 * static_cast<double>(cells) * spacing);
}

std::vector<double> Grid::positions() const {
  std::vector<double> p(static_cast<std::size_t>(count_));
  for (Index i = 0; i < count_; ++i) p[static_cast<std::size_t>(i)] = position(i);
  return p;
}

Index Grid::nearest(double position) const {
  const auto i = static_cast<Index>(std::llround((position - origin_) / spacing_));
  return std::clamp<Index>(i, 0, count_ - 1);
}

ObjectField::ObjectField(Eigen::VectorXcd a, Grid g) : amplitudes(std::move(a)), grid(g) {
  if (amplitudes.size() != grid.size())
    throw std::invalid_argument("object length " + std::to_string(amplitudes.size()) +
                                " does not match grid size " + std::to_string(grid.size()));
}

ObjectField ObjectField::zeros(const Grid& g) {
  return ObjectField(Eigen::VectorXcd::Zero(g.size()), g);
}

// ---------------------------------------------------------------------------

CoherenceKernel CoherenceKernel::gaussian(double fwhm) {
  CoherenceKernel k{Kind::gaussian, fwhm};
  k.validate();
  return k;
}

double CoherenceKernel::sigma() const {
  return fwhm / (2.0 * std::sqrt(2.0 * std::numbers::ln2));
}

double CoherenceKernel::operator()(double separation) const {
  switch (kind) {
    case Kind::coherent:
      return 1.0;
    case Kind::incoherent:
      return separation == 0.0 ? 1.0 : 0.0;
    case Kind::gaussian: {
      const double s = sigma();
      return std::exp(-separation * separation / (2.0 * s * s));
    }
  }
  return 0.0;
}

void CoherenceKernel::validate() const {
  if (kind == Kind::gaussian && (!(fwhm > 0.0) || !std::isfinite(fwhm)))
    throw std::invalid_argument("gaussian coherence FWHM must be positive");
}

MutualIntensity build_mutual_intensity(const CoherenceKernel& kernel, const Grid& grid) {
  kernel.validate();
  const Index n = grid.size();
  // Toeplitz: one kernel evaluation per lag.
  Eigen::VectorXd lag(n);
  for (Index k = 0; k < n; ++k) lag(k) = kernel(static_cast<double>(k) * grid.spacing());
  if (kernel.kind == CoherenceKernel::Kind::incoherent) lag.tail(n - 1).setZero();

  Eigen::MatrixXd B(n, n);
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < n; ++i) B(i, j) = lag(std::abs(i - j));
  return {std::move(B), kernel, grid};
}

// ---------------------------------------------------------------------------

ImpulseResponse::ImpulseResponse(Eigen::VectorXcd samples, double spacing,
                                 std::optional<double> cutoff)
    : samples_(std::move(samples)), spacing_(spacing), cutoff_(cutoff) {
  if (!(spacing_ > 0.0)) throw std::invalid_argument("impulse response spacing must be positive");
  if (samples_.size() % 2 != 1)
    throw std::invalid_argument("impulse response needs an odd, symmetric sample count");
  if (!samples_.allFinite()) throw std::invalid_argument("impulse response samples must be finite");
  half_width_ = samples_.size() / 2;
}

ImpulseResponse ImpulseResponse::ideal(const OpticalConfig& config, double spacing,
                                       Index half_width) {
  config.validate();
  Eigen::VectorXcd s(2 * half_width + 1);
  for (Index k = -half_width; k <= half_width; ++k)
    s(k + half_width) = sinc_lowpass(static_cast<double>(k) * spacing, config.cutoff_frequency);
  return ImpulseResponse(std::move(s), spacing, config.cutoff_frequency);
}

ImpulseResponse ImpulseResponse::sampled(Eigen::VectorXcd samples, double spacing) {
  if (samples.size() % 2 != 1)
    throw std::invalid_argument("impulse response needs an odd, symmetric sample count");
  const Complex peak = samples(samples.size() / 2);
  if (std::abs(peak) == 0.0) throw std::invalid_argument("impulse response vanishes at x = 0");
  samples /= peak;
  return ImpulseResponse(std::move(samples), spacing, std::nullopt);
}

Complex ImpulseResponse::operator()(double x) const {
  if (cutoff_) return sinc_lowpass(x, *cutoff_);
  const double t = x / spacing_ + static_cast<double>(half_width_);
  const double lo = std::floor(t);
  const auto k = static_cast<Index>(lo);
  if (k < 0 || k > 2 * half_width_) return 0.0;
  const double frac = t - lo;
  if (k == 2 * half_width_) return frac == 0.0 ? samples_(k) : Complex(0.0);
  return (1.0 - frac) * samples_(k) + frac * samples_(k + 1);
}

ImpulseResponse build_impulse_response(const OpticalConfig& config, const Grid& grid) {
  return ImpulseResponse::ideal(config, grid.spacing(), grid.size() - 1);
}

Eigen::VectorXcd shifted_response(const ImpulseResponse& h, const Grid& grid, double u) {
  Eigen::VectorXcd hu(grid.size());
  for (Index i = 0; i < grid.size(); ++i) hu(i) = h(u - grid.position(i)) * grid.spacing();
  return hu;
}

namespace {

void check_compatible(const ImpulseResponse& h, const MutualIntensity& B) {
  const double ds = std::abs(h.spacing() - B.grid.spacing());
  if (ds > 1e-12 * B.grid.spacing())
    throw std::invalid_argument("impulse response and mutual intensity use different grid spacings");
  if (B.matrix.rows() != B.grid.size() || B.matrix.cols() != B.grid.size())
    throw std::invalid_argument("mutual intensity matrix does not match its grid");
}

double quadratic_form_real(const Complex& value, double scale) {
  const double re = value.real();
  const double im = value.imag();
  if (std::abs(im) > 1e-10 * std::abs(re) + 1e-14 * std::max(1.0, scale))
    throw std::runtime_error("quadratic form has a non-negligible imaginary part");
  return re;
}

}  // namespace

std::vector<TransferMatrix> build_transfer_matrices(const ImpulseResponse& h,
                                                    const MutualIntensity& B,
                                                    std::span<const double> positions) {
  check_compatible(h, B);
  std::vector<TransferMatrix> out;
  out.reserve(positions.size());
  for (double u : positions) {
    const Eigen::VectorXcd hu = shifted_response(h, B.grid, u);
    out.push_back({u, (hu * hu.adjoint()).cwiseProduct(B.matrix.cast<Complex>())});
  }
  return out;
}

Measurements forward_intensity(const ObjectField& a, std::span<const TransferMatrix> transfer) {
  Measurements y;
  y.positions.reserve(transfer.size());
  y.values.resize(static_cast<Index>(transfer.size()));
  const double energy = a.amplitudes.squaredNorm();
  for (std::size_t k = 0; k < transfer.size(); ++k) {
    const auto& M = transfer[k].matrix;
    if (M.rows() != a.amplitudes.size() || M.cols() != a.amplitudes.size())
      throw std::invalid_argument("transfer matrix dimension does not match the object");
    const Complex q = a.amplitudes.dot(M * a.amplitudes);  // conjugates the left side
    y.positions.push_back(transfer[k].position);
    y.values(static_cast<Index>(k)) = quadratic_form_real(q, energy * M.cwiseAbs().maxCoeff());
  }
  return y;
}

Measurements forward_intensity_direct(const ObjectField& a, const ImpulseResponse& h,
                                      const MutualIntensity& B,
                                      std::span<const double> positions) {
  check_compatible(h, B);
  if (!(a.grid == B.grid)) throw std::invalid_argument("object and mutual intensity grids differ");
  const Index n = a.grid.size();
  Measurements y;
  y.positions.assign(positions.begin(), positions.end());
  y.values.resize(static_cast<Index>(positions.size()));
  for (std::size_t k = 0; k < positions.size(); ++k) {
    const double u = positions[k];
    Complex sum = 0.0;
    double scale = 0.0;
    for (Index i = 0; i < n; ++i) {
      const Complex hi = h(u - a.grid.position(i)) * a.grid.spacing();
      for (Index j = 0; j < n; ++j) {
        const Complex hj = h(u - a.grid.position(j)) * a.grid.spacing();
        const Complex term = hi * std::conj(hj) * B.matrix(i, j) * a.amplitudes(i) *
                             std::conj(a.amplitudes(j));
        sum += term;
        scale += std::abs(term);
      }
    }
    y.values(static_cast<Index>(k)) = quadratic_form_real(sum, scale);
  }
  return y;
}

// ---------------------------------------------------------------------------

std::optional<double> Measurements::uniform_spacing(double rel_tol) const {
  if (positions.size() < 2) return std::nullopt;
  const double step = (positions.back() - positions.front()) /
                      static_cast<double>(positions.size() - 1);
  if (!(step > 0.0)) return std::nullopt;
  for (std::size_t k = 1; k < positions.size(); ++k)
    if (std::abs(positions[k] - positions[k - 1] - step) > rel_tol * step) return std::nullopt;
  return step;
}

Measurements add_noise(const Measurements& y, std::optional<double> snr_db, std::uint64_t seed) {
  if (!snr_db || std::isinf(*snr_db)) return y;
  if (std::isnan(*snr_db)) throw std::invalid_argument("snr_db must not be NaN");
  const double signal = y.values.norm();
  if (signal == 0.0) throw std::invalid_argument("cannot scale noise to an all-zero measurement");

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Eigen::VectorXd noise(y.size());
  for (Index k = 0; k < noise.size(); ++k) noise(k) = normal(rng);
  noise *= std::pow(10.0, -*snr_db / 20.0) * signal / noise.norm();

  Measurements out = y;
  out.values += noise;
  out.snr_db = snr_db;
  return out;
}

double spectrum_bandlimit(const Measurements& y, double relative_threshold) {
  const auto step = y.uniform_spacing();
  if (!step) throw std::invalid_argument("spectrum analysis needs uniformly spaced positions");
  const Index N = y.size();

  std::vector<double> samples(y.values.data(), y.values.data() + N);
  std::vector<Complex> spectrum;
  Eigen::FFT<double> fft;
  fft.fwd(spectrum, samples);

  double peak = 0.0;
  for (Index k = 0; k <= N / 2; ++k) peak = std::max(peak, std::abs(spectrum[static_cast<std::size_t>(k)]));
  if (peak == 0.0) return 0.0;

  Index last = 0;
  for (Index k = 0; k <= N / 2; ++k)
    if (std::abs(spectrum[static_cast<std::size_t>(k)]) > relative_threshold * peak) last = k;
  return static_cast<double>(last) / (static_cast<double>(N) * *step);
}

std::vector<double> equally_spaced_positions(Index count, double window) {
  if (count < 2) throw std::invalid_argument("need at least two measurement positions");
  std::vector<double> p(static_cast<std::size_t>(count));
  for (Index k = 0; k < count; ++k)
    p[static_cast<std::size_t>(k)] =
        -0.5 * window + window * static_cast<double>(k) / static_cast<double>(count - 1);
  return p;
}

}  // namespace qcs
