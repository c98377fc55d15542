#include "circlechaos/samplers.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "synth.hpp"

namespace circlechaos {

namespace {
constexpr double k_pi = std::numbers::pi;
constexpr double k_ln2 = std::numbers::ln2;

// 2 sum_{k<=K} mult(k)^2 / k, matching the sampler's actual mode content.
double damped_diag_sum(const SpectralCoefficients& coeffs, Mollifier mol, double eps) {
    double s = 0.0;
    for (int k = 1; k <= coeffs.modes(); ++k) {
        double mlt = conv_multiplier(mol, eps, k);
        s += mlt * mlt / k;
    }
    return 2.0 * s;
}
}  // namespace

SpectralCoefficients SpectralCoefficients::truncated(int n) const {
    if (n > modes()) throw std::invalid_argument("SpectralCoefficients: cannot extend by truncation");
    SpectralCoefficients out;
    out.constant = constant;
    out.cos_amp.assign(cos_amp.begin(), cos_amp.begin() + n);
    out.sin_amp.assign(sin_amp.begin(), sin_amp.begin() + n);
    return out;
}

SpectralCoefficients draw_spectral_coefficients(int n_modes, RngStream& rng) {
    if (n_modes < 0) throw std::invalid_argument("draw_spectral_coefficients: n_modes < 0");
    SpectralCoefficients c;
    c.constant = rng.normal();
    c.cos_amp.resize(n_modes);
    c.sin_amp.resize(n_modes);
    for (int k = 0; k < n_modes; ++k) {
        c.cos_amp[k] = rng.normal();
        c.sin_amp[k] = rng.normal();
    }
    return c;
}

namespace {

// Shared synthesis path: values[i] = 2 sqrt(ln 2) G + sum_k a_k cos + b_k sin,
// where a_k = sqrt(2/k) A_k mult_k (identically for b). Both the Fourier and
// the convolution fields go through here, so an identity multiplier reproduces
// the Fourier field bit for bit.
FieldSample synth_spectral(const SpectralCoefficients& coeffs, int n_use,
                           const std::vector<double>& mult, const GridDomain& grid) {
    std::vector<double> a(n_use), b(n_use);
    for (int k = 1; k <= n_use; ++k) {
        double amp = std::sqrt(2.0) / std::sqrt(static_cast<double>(k)) * mult[k - 1];
        a[k - 1] = amp * coeffs.cos_amp[k - 1];
        b[k - 1] = amp * coeffs.sin_amp[k - 1];
    }
    std::vector<double> abar, bbar;
    detail::fold_modes(a, b, grid.m, abar, bbar);
    detail::TrigTable table(grid.m);
    FieldSample f;
    f.grid = grid;
    detail::synth_folded(table, 2.0 * std::sqrt(k_ln2) * coeffs.constant, abar, bbar, f.values);
    return f;
}

}  // namespace

FieldSample fourier_field_from_coeffs(int n, const SpectralCoefficients& coeffs,
                                      const GridDomain& grid) {
    if (n < 1) throw std::invalid_argument("fourier_field_from_coeffs: n must be >= 1");
    if (coeffs.modes() < n)
        throw std::invalid_argument("fourier_field_from_coeffs: not enough coefficient modes");
    FieldSample f = synth_spectral(coeffs, n, std::vector<double>(n, 1.0), grid);
    f.spec = CovarianceSpec{Scheme::FourierPartial, static_cast<double>(n)};
    f.variance.assign(grid.m, fourier_cov(n, 0.0));
    return f;
}

std::pair<FieldSample, SpectralCoefficients> sample_fourier_field(int n, const GridDomain& grid,
                                                                  RngStream& rng) {
    SpectralCoefficients coeffs = draw_spectral_coefficients(static_cast<int>(conv_freq_cutoff(n)), rng);
    FieldSample f = fourier_field_from_coeffs(n, coeffs, grid);
    return {std::move(f), std::move(coeffs)};
}

FieldSample sample_convolution_field(const SpectralCoefficients& coeffs, Mollifier mol,
                                     double eps, const GridDomain& grid) {
    if (eps < 0.0) throw std::invalid_argument("sample_convolution_field: eps must be >= 0");
    const int N = coeffs.modes();
    std::vector<double> mult(N);
    for (int k = 1; k <= N; ++k) mult[k - 1] = conv_multiplier(mol, eps, k);
    FieldSample f = synth_spectral(coeffs, N, mult, grid);
    f.spec = CovarianceSpec{Scheme::ConvolutionSpectral,
                            eps > 0.0 ? 1.0 / eps : static_cast<double>(N), mol};
    f.variance.assign(grid.m, 4.0 * k_ln2 + damped_diag_sum(coeffs, mol, eps));
    return f;
}

CholeskySampler::CholeskySampler(const CovarianceSpec& spec, const GridDomain& grid)
    : grid_(grid), spec_(spec), cov_(build_cov_matrix(spec, grid)) {
    Eigen::LLT<Eigen::MatrixXd> llt(cov_.entries);
    if (llt.info() != Eigen::Success)
        throw std::runtime_error("CholeskySampler: factorization failed");
    chol_ = llt.matrixL();
}

FieldSample CholeskySampler::sample(RngStream& rng) const {
    const int m = grid_.m;
    Eigen::VectorXd z(m);
    for (int i = 0; i < m; ++i) z(i) = rng.normal();
    Eigen::VectorXd v = chol_ * z;
    FieldSample f;
    f.grid = grid_;
    f.spec = spec_;
    f.beta_prescaled = true;
    f.values.assign(v.data(), v.data() + m);
    f.variance.resize(m);
    for (int i = 0; i < m; ++i) f.variance[i] = cov_.entries(i, i);
    return f;
}

FieldSample sample_cholesky_field(const CovarianceSpec& spec, const GridDomain& grid,
                                  RngStream& rng) {
    return CholeskySampler(spec, grid).sample(rng);
}

VagueletSampler::VagueletSampler(int n, const GridDomain& grid)
    : n_(n), grid_(grid), basis_(n, grid) {}

FieldSample VagueletSampler::sample(RngStream& rng) const {
    const int m = grid_.m;
    FieldSample f;
    f.grid = grid_;
    f.spec = CovarianceSpec{Scheme::Vaguelet, static_cast<double>(n_)};
    f.values.assign(m, 2.0 * std::sqrt(k_ln2) * rng.normal());
    const double scale = std::sqrt(2.0 * k_pi);
    for (int j = 0; j <= n_; ++j) {
        const std::vector<double>& prof = basis_.profile(j);
        const int M = static_cast<int>(prof.size());
        const int gs = basis_.grid_stride(j), ss = basis_.shift_stride(j);
        for (int k = 0; k < (1 << j); ++k) {
            double a = scale * rng.normal();
            int idx = static_cast<int>(((static_cast<long>(-k) * ss) % M + M) % M);
            for (int i = 0; i < m; ++i) {
                f.values[i] += a * prof[idx];
                idx += gs;
                if (idx >= M) idx -= M;
            }
        }
    }
    f.variance.resize(m);
    for (int i = 0; i < m; ++i) f.variance[i] = basis_.variance(i);
    return f;
}

FieldSample sample_vaguelet_field(int n, const GridDomain& grid, RngStream& rng) {
    return VagueletSampler(n, grid).sample(rng);
}

std::vector<FieldSample> sample_nested_whitenoise(const std::vector<double>& levels,
                                                  const GridDomain& grid, RngStream& rng,
                                                  double beta) {
    const int L = static_cast<int>(levels.size());
    if (L == 0) throw std::invalid_argument("sample_nested_whitenoise: no levels");
    for (int l = 0; l < L; ++l) {
        if (!(levels[l] > 0.0)) throw std::invalid_argument("sample_nested_whitenoise: t must be > 0");
        if (l > 0 && !(levels[l] > levels[l - 1]))
            throw std::invalid_argument("sample_nested_whitenoise: levels must be strictly increasing");
    }
    if (L == 1)
        return {sample_cholesky_field(CovarianceSpec{Scheme::WhiteNoiseCone, levels[0],
                                                     Mollifier::Gaussian, beta},
                                      grid, rng)};

    const int m = grid.m;
    // joint kernel over (x, t): C((x,t),(y,s)) = beta^2 h_{min(t,s)}(dist(x,y));
    // the cones at the smaller cut are contained in the larger ones.
    Eigen::MatrixXd joint(m * L, m * L);
    for (int a = 0; a < L; ++a)
        for (int b = a; b < L; ++b) {
            double t = levels[std::min(a, b)];
            std::vector<double> lag(m);
            for (int l = 0; l < m; ++l) lag[l] = beta * beta * whitenoise_cov(t, grid.distance(0, l));
            for (int i = 0; i < m; ++i)
                for (int j = 0; j < m; ++j) {
                    double v = lag[std::abs(i - j)];
                    joint(a * m + i, b * m + j) = v;
                    joint(b * m + j, a * m + i) = v;
                }
        }

    double cap = 1e-6 * joint.diagonal().maxCoeff();
    double jitter = 0.0;
    Eigen::MatrixXd chol;
    for (;;) {
        Eigen::MatrixXd trial = joint;
        trial.diagonal().array() += jitter;
        Eigen::LLT<Eigen::MatrixXd> llt(trial);
        if (llt.info() == Eigen::Success) {
            chol = llt.matrixL();
            break;
        }
        double next = jitter == 0.0 ? 1e-12 : jitter * 10.0;
        if (next > cap) throw std::runtime_error("sample_nested_whitenoise: factorization failed");
        jitter = next;
    }

    Eigen::VectorXd z(m * L);
    for (int i = 0; i < m * L; ++i) z(i) = rng.normal();
    Eigen::VectorXd v = chol * z;

    std::vector<FieldSample> out(L);
    for (int l = 0; l < L; ++l) {
        FieldSample& f = out[l];
        f.grid = grid;
        f.spec = CovarianceSpec{Scheme::WhiteNoiseCone, levels[l], Mollifier::Gaussian, beta};
        f.beta_prescaled = true;
        f.values.assign(v.data() + l * m, v.data() + (l + 1) * m);
        f.variance.resize(m);
        for (int i = 0; i < m; ++i) f.variance[i] = joint(l * m + i, l * m + i) + jitter;
    }
    return out;
}

}  // namespace circlechaos
