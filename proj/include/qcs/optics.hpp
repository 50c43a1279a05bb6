// Discretized 1D imaging model under partially coherent illumination.
//
// An object with complex transmittance a(eta) is lit by quasi-monochromatic
// light whose mutual intensity depends only on |eta1 - eta2|. The intensity
// at image position u is
//
//   y_u = sum_ij h_u(eta_i) conj(h_u(eta_j)) B(eta_i - eta_j) a_i conj(a_j)
//       = a^H M_u a,      h_u(eta) = h(u - eta) * d_eta.
//
// All lengths share the unit of the wavelength.
#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace qcs {

using Complex = std::complex<double>;
using Index = Eigen::Index;

struct OpticalConfig {
  double wavelength = 1.0;
  /// Coherent cutoff in cycles per length unit; 1/wavelength for an ideal system.
  double cutoff_frequency = 1.0;

  static OpticalConfig ideal(double wavelength);
  void validate() const;
};

/// Uniform sampling lattice eta_i = origin + i * spacing.
class Grid {
 public:
  Grid(double spacing, Index count, double origin);

  /// Grid spanning [-window/2, window/2] with both ends included.
  static Grid centered(double spacing, double window);

  double spacing() const { return spacing_; }
  Index size() const { return count_; }
  double origin() const { return origin_; }
  double position(Index i) const { return origin_ + static_cast<double>(i) * spacing_; }
  std::vector<double> positions() const;

  /// Nearest grid index to a position, clamped to the grid.
  Index nearest(double position) const;

  bool operator==(const Grid&) const = default;

 private:
  double spacing_;
  Index count_;
  double origin_;
};

struct ObjectField {
  Eigen::VectorXcd amplitudes;
  Grid grid;

  ObjectField(Eigen::VectorXcd a, Grid g);
  static ObjectField zeros(const Grid& g);
};

/// Coherence kernel B(|d|) of the illumination, normalized so B(0) = 1.
struct CoherenceKernel {
  enum class Kind { gaussian, coherent, incoherent };

  Kind kind = Kind::gaussian;
  double fwhm = 0.0;  // only used by gaussian

  static CoherenceKernel gaussian(double fwhm);
  static CoherenceKernel coherent() { return {Kind::coherent, 0.0}; }
  static CoherenceKernel incoherent() { return {Kind::incoherent, 0.0}; }

  /// sigma = fwhm / (2 sqrt(2 ln 2)).
  double sigma() const;
  double operator()(double separation) const;
  void validate() const;
};

struct MutualIntensity {
  Eigen::MatrixXd matrix;
  CoherenceKernel kernel;
  Grid grid;
};

/// Coherent amplitude impulse response h(x), sampled at x_k = k * spacing for
/// k in [-half_width, half_width] and normalized to h(0) = 1.
///
/// The ideal low-pass response sin(2 pi nu_c x) / (2 pi nu_c x) is evaluated
/// analytically at any offset. A measured response given only as samples is
/// linearly interpolated between lattice points and is zero beyond them.
class ImpulseResponse {
 public:
  static ImpulseResponse ideal(const OpticalConfig& config, double spacing, Index half_width);
  static ImpulseResponse sampled(Eigen::VectorXcd samples, double spacing);

  Complex operator()(double x) const;
  double spacing() const { return spacing_; }
  Index half_width() const { return half_width_; }
  const Eigen::VectorXcd& samples() const { return samples_; }
  bool analytic() const { return cutoff_.has_value(); }

 private:
  ImpulseResponse(Eigen::VectorXcd samples, double spacing, std::optional<double> cutoff);

  Eigen::VectorXcd samples_;
  double spacing_;
  Index half_width_;
  std::optional<double> cutoff_;
};

struct TransferMatrix {
  double position;
  Eigen::MatrixXcd matrix;
};

struct Measurements {
  std::vector<double> positions;
  Eigen::VectorXd values;
  /// Noise level the values carry; empty for noiseless data.
  std::optional<double> snr_db;

  Index size() const { return values.size(); }
  /// Uniform spacing of the positions, or nullopt if not uniform.
  std::optional<double> uniform_spacing(double rel_tol = 1e-9) const;
};

// ---------------------------------------------------------------------------

MutualIntensity build_mutual_intensity(const CoherenceKernel& kernel, const Grid& grid);

/// Ideal response sampled over every offset realizable on `grid`.
ImpulseResponse build_impulse_response(const OpticalConfig& config, const Grid& grid);

/// h_u(eta_i) = h(u - eta_i) * d_eta for every grid point.
Eigen::VectorXcd shifted_response(const ImpulseResponse& h, const Grid& grid, double u);

/// M_u = (h_u h_u^H) .* B for each position.
std::vector<TransferMatrix> build_transfer_matrices(const ImpulseResponse& h,
                                                    const MutualIntensity& B,
                                                    std::span<const double> positions);

/// y_k = a^H M_k a.
Measurements forward_intensity(const ObjectField& a, std::span<const TransferMatrix> transfer);

/// Explicit double sum over grid pairs, without assembling M_u.
Measurements forward_intensity_direct(const ObjectField& a, const ImpulseResponse& h,
                                      const MutualIntensity& B,
                                      std::span<const double> positions);

/// Adds Gaussian noise rescaled so that ||noise|| / ||y|| = 10^(-snr_db/20)
/// exactly. An infinite or absent snr_db returns y unchanged.
Measurements add_noise(const Measurements& y, std::optional<double> snr_db, std::uint64_t seed);

/// Largest DFT frequency of y whose magnitude exceeds `relative_threshold`
/// times the spectral peak. Positions must be uniformly spaced.
double spectrum_bandlimit(const Measurements& y, double relative_threshold = 1e-3);

/// Measurement positions equally spaced over [-window/2, window/2].
std::vector<double> equally_spaced_positions(Index count, double window);

}  // namespace qcs
