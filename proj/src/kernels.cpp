#include "circlechaos/kernels.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "synth.hpp"

namespace circlechaos {

namespace {

constexpr double k_pi = std::numbers::pi;
constexpr double k_ln2 = std::numbers::ln2;

bool is_pow2(int m) { return m >= 1 && (m & (m - 1)) == 0; }

void check_circle_distance(double d) {
    if (!(d >= 0.0) || d > 0.5 + 1e-12)
        throw std::invalid_argument("circle distance must lie in [0, 1/2]");
}

}  // namespace

const char* scheme_name(Scheme s) {
    switch (s) {
        case Scheme::LimitCircle: return "LimitCircle";
        case Scheme::FourierPartial: return "FourierPartial";
        case Scheme::WhiteNoiseCone: return "WhiteNoiseCone";
        case Scheme::ConvolutionSpectral: return "ConvolutionSpectral";
        case Scheme::Vaguelet: return "Vaguelet";
        case Scheme::ExactConeInterval: return "ExactConeInterval";
    }
    return "?";
}

const char* mollifier_name(Mollifier m) {
    return m == Mollifier::Gaussian ? "Gaussian" : "Poisson";
}

void CovarianceSpec::validate() const {
    if (!(beta > 0.0) || beta > 1.0)
        throw std::invalid_argument("CovarianceSpec: beta must lie in (0, 1]");
    switch (scheme) {
        case Scheme::LimitCircle:
            break;
        case Scheme::FourierPartial:
        case Scheme::ConvolutionSpectral:
            if (level_int() < 1)
                throw std::invalid_argument("CovarianceSpec: level must be >= 1");
            break;
        case Scheme::Vaguelet:
            if (level_int() < 0)
                throw std::invalid_argument("CovarianceSpec: vaguelet level must be >= 0");
            break;
        case Scheme::WhiteNoiseCone:
        case Scheme::ExactConeInterval:
            if (!(level > 0.0))
                throw std::invalid_argument("CovarianceSpec: t must be > 0");
            break;
    }
}

int CovarianceSpec::level_int() const {
    double r = std::round(level);
    if (std::fabs(level - r) > 1e-9)
        throw std::invalid_argument("CovarianceSpec: integer level expected for this scheme");
    return static_cast<int>(r);
}

double log_kernel_circle(double d) {
    check_circle_distance(d);
    if (d == 0.0)
        throw std::domain_error("log_kernel_circle: singular at d = 0");
    return 4.0 * k_ln2 + 2.0 * std::log(1.0 / (2.0 * std::sin(k_pi * d)));
}

double harmonic_number(int n) {
    double h = 0.0;
    for (int k = 1; k <= n; ++k) h += 1.0 / k;
    return h;
}

double fourier_cov(int n, double d) {
    if (n < 1) throw std::invalid_argument("fourier_cov: n must be >= 1");
    check_circle_distance(d);
    double s = 0.0;
    for (int k = 1; k <= n; ++k) s += std::cos(2.0 * k_pi * k * d) / k;
    return 4.0 * k_ln2 + 2.0 * s;
}

double whitenoise_branch_point(double t) {
    return (2.0 / k_pi) * std::atan((k_pi / 2.0) * std::exp(-t));
}

double whitenoise_cov(double t, double d) {
    if (!(t > 0.0)) throw std::invalid_argument("whitenoise_cov: invalid level t <= 0");
    check_circle_distance(d);
    double z = (k_pi / 2.0) * std::exp(-t);
    if (d > whitenoise_branch_point(t))
        return 4.0 * k_ln2 + 2.0 * std::log(1.0 / (2.0 * std::sin(k_pi * d)));
    return -2.0 * d * std::exp(t) + 2.0 * t - 2.0 * std::log(std::cos((k_pi / 2.0) * d)) +
           std::log(k_pi * k_pi * std::exp(-2.0 * t) + 4.0) + 2.0 * std::atan(z) / z -
           2.0 * std::log(k_pi);
}

double conv_multiplier(Mollifier mol, double eps, long k) {
    if (eps < 0.0) throw std::invalid_argument("conv_multiplier: eps must be >= 0");
    if (k == 0 || eps == 0.0) return 1.0;
    double ak = std::fabs(static_cast<double>(k));
    if (mol == Mollifier::Gaussian)
        return std::exp(-2.0 * k_pi * k_pi * ak * ak * eps * eps);
    return std::exp(-eps * ak);
}

long conv_freq_cutoff(int n) { return 4L * n; }

namespace {
// 2 sum_{k<=K} mult(k)^2 cos(2 pi k d)/k; shared by the kernel and the
// sampler variance so both truncate identically.
double conv_cov_sum(Mollifier mol, double eps, long K, double d) {
    double s = 0.0;
    for (long k = 1; k <= K; ++k) {
        double mlt = conv_multiplier(mol, eps, k);
        s += mlt * mlt * std::cos(2.0 * k_pi * k * d) / k;
    }
    return 2.0 * s;
}
}  // namespace

double convolution_cov(Mollifier mol, int n, double d) {
    if (n < 1) throw std::invalid_argument("convolution_cov: n must be >= 1");
    check_circle_distance(d);
    return 4.0 * k_ln2 + conv_cov_sum(mol, 1.0 / n, conv_freq_cutoff(n), d);
}

double exact_cone_cov_interval(double t, double x, double y) {
    if (!(t > 0.0)) throw std::invalid_argument("exact_cone_cov_interval: t must be > 0");
    if (x < -1e-12 || x > 1.0 + 1e-12 || y < -1e-12 || y > 1.0 + 1e-12)
        throw std::invalid_argument("exact_cone_cov_interval: points must lie in [0, 1]");
    double u = std::fabs(x - y);
    if (u >= 1.0) return 0.0;
    double et = std::exp(-t);
    if (u >= et) return 2.0 * std::log(1.0 / u);
    return 2.0 * (t + 1.0 - u * std::exp(t));
}

double localization_delta0() { return 0.5 - std::atan(k_pi / 2.0) / k_pi; }

// --- vaguelets ----------------------------------------------------------------

std::complex<double> haar_wavelet_ft(double xi) {
    if (xi == 0.0) return {0.0, 0.0};
    double h = k_pi * xi / 2.0;
    double s = std::sin(h);
    std::complex<double> phase = std::exp(std::complex<double>(0.0, -k_pi * xi));
    return std::complex<double>(0.0, 1.0) * phase * (s * s / h);
}

std::complex<double> haar_vaguelet_coeff(int j, int k, long freq) {
    if (j < 0 || k < 0 || k >= (1L << j))
        throw std::invalid_argument("haar_vaguelet_coeff: need 0 <= k <= 2^j - 1");
    if (freq == 0) return {0.0, 0.0};
    double fd = static_cast<double>(freq);
    std::complex<double> psi = std::pow(2.0, -0.5 * j) * haar_wavelet_ft(fd * std::ldexp(1.0, -j));
    std::complex<double> shift = std::exp(std::complex<double>(0.0, -2.0 * k_pi * fd * k * std::ldexp(1.0, -j)));
    return psi * shift / std::sqrt(2.0 * k_pi * std::fabs(fd));
}

long vaguelet_freq_cutoff(int n) {
    if (n < 0 || n > 16) throw std::invalid_argument("vaguelet_freq_cutoff: level out of range");
    return 1L << (n + 6);
}

namespace {

// e^{2 pi i q x} for q = 1..Q via rotation, refreshed periodically to stop
// drift over long runs.
class UnitRotor {
  public:
    explicit UnitRotor(double x) : x_(x), w_(std::polar(1.0, 2.0 * k_pi * x)) { refresh(1); }
    std::complex<double> value() const { return cur_; }
    void advance() {
        ++q_;
        if ((q_ & 4095) == 0)
            refresh(q_);
        else
            cur_ *= w_;
    }

  private:
    void refresh(long q) {
        q_ = q;
        double frac = std::fmod(static_cast<double>(q) * x_, 1.0);
        cur_ = std::polar(1.0, 2.0 * k_pi * frac);
    }
    double x_;
    std::complex<double> w_, cur_;
    long q_ = 1;
};

// sum_k nu_{j,k}(x) nu_{j,k}(y) at arbitrary points: fold the spectrum of
// nu_j modulo 2^j (the shifts k/2^j only see q mod 2^j), then run the small
// DFT over shifts.
double vaguelet_level_product_sum(int j, long Q, double x, double y) {
    const long K = 1L << j;
    std::vector<std::complex<double>> fx(K, 0.0), fy(K, 0.0);
    UnitRotor rx(x), ry(y);
    for (long q = 1; q <= Q; ++q) {
        std::complex<double> c = haar_vaguelet_coeff(j, 0, q);
        long r = q % K;
        fx[r] += c * rx.value();
        fy[r] += c * ry.value();
        rx.advance();
        ry.advance();
    }
    double total = 0.0;
    for (long kk = 0; kk < K; ++kk) {
        std::complex<double> sx = 0.0, sy = 0.0;
        for (long r = 0; r < K; ++r) {
            double th = -2.0 * k_pi * static_cast<double>(r * kk % K) / K;
            std::complex<double> e = std::polar(1.0, th);
            sx += fx[r] * e;
            sy += fy[r] * e;
        }
        total += (2.0 * sx.real()) * (2.0 * sy.real());
    }
    return total;
}

}  // namespace

double vaguelet_cov(int n, double x, double y) {
    if (n < 0 || n > 14) throw std::invalid_argument("vaguelet_cov: level out of range");
    long Q = vaguelet_freq_cutoff(n);
    double total = 4.0 * k_ln2;
    for (int j = 0; j <= n; ++j)
        total += 2.0 * k_pi * vaguelet_level_product_sum(j, Q, x, y);
    return total;
}

VagueletBasis::VagueletBasis(int n_levels, const GridDomain& grid)
    : levels_(n_levels), grid_(grid) {
    if (grid.kind != DomainKind::Circle)
        throw std::invalid_argument("VagueletBasis: circle grid required");
    if (!is_pow2(grid.m))
        throw std::invalid_argument("VagueletBasis: grid size must be a power of two");
    if (n_levels < 0 || n_levels > 14)
        throw std::invalid_argument("VagueletBasis: level out of range");

    const long Q = vaguelet_freq_cutoff(n_levels);
    profiles_.resize(n_levels + 1);
    grid_stride_.resize(n_levels + 1);
    shift_stride_.resize(n_levels + 1);
    for (int j = 0; j <= n_levels; ++j) {
        const int K = 1 << j;
        const int M = std::max(grid.m, K);
        grid_stride_[j] = M / grid.m;
        shift_stride_[j] = M / K;
        std::vector<std::complex<double>> coef(Q);
        for (long q = 1; q <= Q; ++q) coef[q - 1] = haar_vaguelet_coeff(j, 0, q);
        detail::TrigTable table(M);
        detail::synth_onesided(table, coef, profiles_[j]);
    }

    variance_.resize(grid.m);
    for (int i = 0; i < grid.m; ++i) {
        double s = 0.0;
        for (int j = 0; j <= n_levels; ++j)
            for (int k = 0; k < (1 << j); ++k) {
                double v = value(j, k, i);
                s += v * v;
            }
        variance_[i] = 4.0 * k_ln2 + 2.0 * k_pi * s;
    }
}

double VagueletBasis::cov(int i1, int i2) const {
    if (i1 == i2) return variance_[i1];
    double s = 0.0;
    for (int j = 0; j <= levels_; ++j)
        for (int k = 0; k < (1 << j); ++k) s += value(j, k, i1) * value(j, k, i2);
    return 4.0 * k_ln2 + 2.0 * k_pi * s;
}

double VagueletBasis::mean_variance() const {
    double s = 0.0;
    for (double v : variance_) s += v;
    return s / variance_.size();
}

int matched_vaguelet_level(int n, const GridDomain& grid) {
    double target = fourier_cov(n, 0.0);
    int guess = static_cast<int>(std::lround(harmonic_number(n) / k_ln2));
    int best = -1;
    double best_err = 0.0;
    for (int cand = std::max(0, guess - 2); cand <= guess + 2; ++cand) {
        VagueletBasis basis(cand, grid);
        double err = std::fabs(basis.mean_variance() - target);
        if (best < 0 || err < best_err) {
            best = cand;
            best_err = err;
        }
    }
    return best;
}

// --- grid covariance matrices ---------------------------------------------------

double scheme_kernel(const CovarianceSpec& spec, double d) {
    spec.validate();
    switch (spec.scheme) {
        case Scheme::LimitCircle: return log_kernel_circle(d);
        case Scheme::FourierPartial: return fourier_cov(spec.level_int(), d);
        case Scheme::WhiteNoiseCone: return whitenoise_cov(spec.level, d);
        case Scheme::ConvolutionSpectral:
            return convolution_cov(spec.mollifier, spec.level_int(), d);
        case Scheme::ExactConeInterval: return exact_cone_cov_interval(spec.level, 0.0, d);
        case Scheme::Vaguelet:
            throw std::invalid_argument("scheme_kernel: vaguelet covariance is not translation invariant");
    }
    throw std::logic_error("scheme_kernel: unreachable");
}

namespace {

Eigen::MatrixXd raw_cov_matrix(const CovarianceSpec& spec, const GridDomain& grid) {
    const int m = grid.m;
    Eigen::MatrixXd c(m, m);
    if (spec.scheme == Scheme::LimitCircle)
        throw std::domain_error("build_cov_matrix: LimitCircle kernel is singular on the diagonal");
    if (spec.scheme == Scheme::Vaguelet) {
        VagueletBasis basis(spec.level_int(), grid);
        for (int i = 0; i < m; ++i)
            for (int j = i; j < m; ++j) c(i, j) = c(j, i) = basis.cov(i, j);
        return c;
    }
    if (spec.scheme == Scheme::ExactConeInterval && grid.kind != DomainKind::Interval)
        throw std::invalid_argument("build_cov_matrix: ExactConeInterval requires an interval grid");
    if (spec.scheme != Scheme::ExactConeInterval && grid.kind != DomainKind::Circle)
        throw std::invalid_argument("build_cov_matrix: circle schemes require a circle grid");
    std::vector<double> lag(m);
    for (int l = 0; l < m; ++l) lag[l] = scheme_kernel(spec, grid.distance(0, l));
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) c(i, j) = lag[std::abs(i - j)];
    return c;
}

}  // namespace

CovMatrix build_cov_matrix(const CovarianceSpec& spec, const GridDomain& grid) {
    spec.validate();
    Eigen::MatrixXd c = raw_cov_matrix(spec, grid);
    c *= spec.beta * spec.beta;

    double max_diag = c.diagonal().maxCoeff();
    double cap = 1e-6 * max_diag;
    double jitter = 0.0;
    for (;;) {
        Eigen::MatrixXd trial = c;
        trial.diagonal().array() += jitter;
        Eigen::LLT<Eigen::MatrixXd> llt(trial);
        if (llt.info() == Eigen::Success) return CovMatrix{std::move(trial), jitter};
        double next = jitter == 0.0 ? 1e-12 : jitter * 10.0;
        if (next > cap)
            throw std::runtime_error("build_cov_matrix: factorization failed at jitter cap " +
                                     std::to_string(cap));
        jitter = next;
    }
}

}  // namespace circlechaos
