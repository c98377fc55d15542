#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "circlechaos/grid.hpp"
#include "circlechaos/kernels.hpp"
#include "circlechaos/rng.hpp"

namespace circlechaos {

// One realization of an approximating Gaussian field on a grid, together with
// its exact per-point variance profile E[X(x_i)^2] and seed provenance.
// `beta_prescaled` marks fields whose covariance matrix already carries beta^2
// (the Cholesky path); build_measure refuses a second beta application there.
struct FieldSample {
    GridDomain grid;
    std::vector<double> values;
    std::vector<double> variance;
    CovarianceSpec spec;
    std::uint64_t master_seed = 0;
    std::uint64_t replica = 0;
    bool beta_prescaled = false;
    std::string note;
};

// Gaussian amplitudes of the random Fourier series: constant mode G plus
// (A_k, B_k) for k = 1..N multiplying cos(2 pi k x) and sin(2 pi k x).
struct SpectralCoefficients {
    double constant = 0.0;
    std::vector<double> cos_amp, sin_amp;

    int modes() const { return static_cast<int>(cos_amp.size()); }
    SpectralCoefficients truncated(int n) const;
};

// Draw order: G first, then (A_k, B_k) pairs for k = 1..n_modes.
SpectralCoefficients draw_spectral_coefficients(int n_modes, RngStream& rng);

// Deterministic synthesis of the level-n partial sum from given coefficients
// (coefficients beyond n are ignored).
FieldSample fourier_field_from_coeffs(int n, const SpectralCoefficients& coeffs,
                                      const GridDomain& grid);

// X_{2,n}: draws conv_freq_cutoff(n) coefficient pairs (so the same draw can
// feed the coupled convolution field), uses the first n undamped.
std::pair<FieldSample, SpectralCoefficients> sample_fourier_field(int n, const GridDomain& grid,
                                                                  RngStream& rng);

// X_{3,n} from shared coefficients: every supplied mode k is damped by
// conv_multiplier(mol, eps, k). Caller contract: the coefficient draw should
// extend to the cutoff 4/eps when the field is meant to represent level 1/eps.
FieldSample sample_convolution_field(const SpectralCoefficients& coeffs, Mollifier mol,
                                     double eps, const GridDomain& grid);

// Reusable factorization of build_cov_matrix(spec, grid); safe for concurrent
// sample() calls with per-replica streams.
class CholeskySampler {
  public:
    CholeskySampler(const CovarianceSpec& spec, const GridDomain& grid);

    FieldSample sample(RngStream& rng) const;
    const CovMatrix& cov() const { return cov_; }
    const GridDomain& grid() const { return grid_; }

  private:
    GridDomain grid_;
    CovarianceSpec spec_;
    CovMatrix cov_;
    Eigen::MatrixXd chol_;
};

// One-shot convenience wrapper (factorizes on every call).
FieldSample sample_cholesky_field(const CovarianceSpec& spec, const GridDomain& grid,
                                  RngStream& rng);

// X_{4,n}: Haar vaguelet field. Draw order: G, then A_{j,k} with j ascending
// and k ascending inside each level.
class VagueletSampler {
  public:
    VagueletSampler(int n, const GridDomain& grid);

    FieldSample sample(RngStream& rng) const;
    const VagueletBasis& basis() const { return basis_; }

  private:
    int n_;
    GridDomain grid_;
    VagueletBasis basis_;
};

FieldSample sample_vaguelet_field(int n, const GridDomain& grid, RngStream& rng);

// Joint draw of the white-noise cone field at several cut levels t_1 < ... < t_L,
// with cross-covariance h_{min(t,s)} so increments across levels are
// independent. A single level reduces bit-identically to sample_cholesky_field.
std::vector<FieldSample> sample_nested_whitenoise(const std::vector<double>& levels,
                                                  const GridDomain& grid, RngStream& rng,
                                                  double beta = 1.0);

}  // namespace circlechaos
