#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

#include "circlechaos/grid.hpp"

namespace circlechaos {

// Approximation schemes for the log-correlated field on the circle (and the
// exactly scale-invariant cone construction on the unit interval).
enum class Scheme {
    LimitCircle,         // 4 ln 2 + 2 ln 1/(2 sin pi d); singular on the diagonal
    FourierPartial,      // partial sums of the random Fourier series, level n
    WhiteNoiseCone,      // periodic hyperbolic white noise cut at e^{-t}, level t
    ConvolutionSpectral, // mollified field, eps = 1/n, level n
    Vaguelet,            // Haar vaguelet expansion, levels 0..n
    ExactConeInterval,   // cone field on [0,1], level t
};

enum class Mollifier { Gaussian, Poisson };

// Identifies one analytic covariance family: scheme + truncation level +
// inverse temperature beta. `level` is the integer n for the discrete schemes
// and the real t for the cone schemes.
struct CovarianceSpec {
    Scheme scheme = Scheme::FourierPartial;
    double level = 1.0;
    Mollifier mollifier = Mollifier::Gaussian;
    double beta = 1.0;

    void validate() const;  // throws std::invalid_argument on a bad combination
    int level_int() const;  // checked integer level for the discrete schemes
};

const char* scheme_name(Scheme s);
const char* mollifier_name(Mollifier m);

// --- closed-form kernels ----------------------------------------------------

// Limit covariance on the circle, d = arc distance in (0, 1/2].
// Throws std::domain_error at d = 0 (the diagonal is +infinity).
double log_kernel_circle(double d);

double harmonic_number(int n);

// f_n(d) = 4 ln 2 + 2 sum_{k<=n} cos(2 pi k d)/k. Finite everywhere.
double fourier_cov(int n, double d);

// Branch point x_t = (2/pi) arctan((pi/2) e^{-t}) of the white-noise covariance.
double whitenoise_branch_point(double t);

// Two-branch covariance h_t(d) of the truncated periodic white-noise field.
double whitenoise_cov(double t, double d);

// Field-level Fourier multiplier of the mollifier at mode k.
// Gaussian: exp(-2 pi^2 k^2 eps^2); Poisson: exp(-eps |k|).
// k = 0 always maps to 1, and eps = 0 is the identity mollifier.
double conv_multiplier(Mollifier mol, double eps, long k);

// Frequency cutoff policy for the spectral convolution at level n.
long conv_freq_cutoff(int n);

// Covariance of the mollified field at eps = 1/n, summed to conv_freq_cutoff(n).
double convolution_cov(Mollifier mol, int n, double d);

// Covariance of the cone field sqrt(2) W(A_t(.)) on [0,1]:
//   u = |x-y|;  u >= 1 -> 0;  u >= e^{-t} -> 2 ln(1/u);  u < e^{-t} -> 2(t + 1 - u e^t).
double exact_cone_cov_interval(double t, double x, double y);

// Localization radius 1/2 - arctan(pi/2)/pi (~0.18) below which the periodic
// cone geometry coincides with the interval cone geometry.
double localization_delta0();

// --- vaguelets ---------------------------------------------------------------

// Fourier transform of the Haar profile (1 on [0,1/2), -1 on [1/2,1)),
// convention psi_hat(xi) = int psi(x) e^{-2 pi i xi x} dx.
std::complex<double> haar_wavelet_ft(double xi);

// Fourier coefficient nu_hat_{j,k}(freq) = psi_hat_{j,k}(freq)/sqrt(2 pi |freq|)
// of the periodized Haar vaguelet; freq = 0 maps to 0.
std::complex<double> haar_vaguelet_coeff(int j, int k, long freq);

// Frequency cutoff policy for vaguelet synthesis at top level n: 2^{n+6}.
long vaguelet_freq_cutoff(int n);

// C_n(x,y) = 4 ln 2 + 2 pi sum_{j<=n} sum_k nu_{j,k}(x) nu_{j,k}(y) for
// arbitrary points. Direct synthesis; meant for probes and small n.
double vaguelet_cov(int n, double x, double y);

// Grid-sampled vaguelet system. Profiles live on internal grids of length
// max(m, 2^j) so levels finer than the field grid stay exact; requires a
// circle grid with m a power of two.
class VagueletBasis {
  public:
    VagueletBasis(int n_levels, const GridDomain& grid);

    int levels() const { return levels_; }
    const GridDomain& grid() const { return grid_; }

    // nu_{j,k} evaluated at grid point i.
    double value(int j, int k, int i) const {
        const auto& p = profiles_[j];
        long idx = (static_cast<long>(i) * grid_stride_[j] -
                    static_cast<long>(k) * shift_stride_[j]) % static_cast<long>(p.size());
        if (idx < 0) idx += static_cast<long>(p.size());
        return p[idx];
    }

    double cov(int i1, int i2) const;        // C_n(x_{i1}, x_{i2})
    double variance(int i) const { return variance_[i]; }
    double mean_variance() const;

    // raw level-j profile plus its index strides, for tight sampling loops
    const std::vector<double>& profile(int j) const { return profiles_[j]; }
    int grid_stride(int j) const { return grid_stride_[j]; }
    int shift_stride(int j) const { return shift_stride_[j]; }

  private:
    int levels_;
    GridDomain grid_;
    std::vector<std::vector<double>> profiles_;  // per level j, length max(m, 2^j)
    std::vector<int> grid_stride_, shift_stride_;
    std::vector<double> variance_;
};

// Level whose mean grid variance best matches fourier_cov(n, 0); used when
// comparing the vaguelet chaos against level-n circle schemes.
int matched_vaguelet_level(int n, const GridDomain& grid);

// --- grid covariance matrices -------------------------------------------------

struct CovMatrix {
    Eigen::MatrixXd entries;  // beta^2-scaled kernel, jitter already on the diagonal
    double jitter = 0.0;      // absolute amount added to every diagonal entry
};

// entries(i,j) = beta^2 * kernel(x_i, x_j), with diagonal jitter escalated
// from 1e-12 by factors of 10 until an LLT succeeds (cap 1e-6 * max diagonal).
CovMatrix build_cov_matrix(const CovarianceSpec& spec, const GridDomain& grid);

// Translation-invariant schemes only: kernel value at arc/interval distance d
// (no beta scaling). Throws for Vaguelet, which is not translation invariant.
double scheme_kernel(const CovarianceSpec& spec, double d);

}  // namespace circlechaos
