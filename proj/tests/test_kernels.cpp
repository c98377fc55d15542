#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <cmath>
#include <complex>
#include <numbers>

#include "circlechaos/kernels.hpp"

using namespace circlechaos;

namespace {
constexpr double ln2 = std::numbers::ln2;
constexpr double pi = std::numbers::pi;

// independent oracle: Simpson quadrature of int_0^1 psi(x) e^{-2 pi i xi x} dx
// for the Haar profile
std::complex<double> haar_ft_quadrature(double xi) {
    auto simpson = [xi](double a, double b, double sign, int panels) {
        std::complex<double> acc = 0.0;
        double h = (b - a) / panels;
        for (int p = 0; p < panels; ++p) {
            double x0 = a + p * h, x1 = x0 + h / 2, x2 = x0 + h;
            auto f = [&](double x) {
                return sign * std::exp(std::complex<double>(0.0, -2.0 * pi * xi * x));
            };
            acc += (h / 6.0) * (f(x0) + 4.0 * f(x1) + f(x2));
        }
        return acc;
    };
    return simpson(0.0, 0.5, 1.0, 512) + simpson(0.5, 1.0, -1.0, 512);
}

// independent oracle: 1-D quadrature of the hyperbolic area of A_t(x) n A_t(y)
// straight from the region definition (the y'-integral is exact: 1/y_low)
double cone_cov_quadrature(double t, double x, double y) {
    double lo = std::max(x, y) - 0.5, hi = std::min(x, y) + 0.5;
    if (hi <= lo) return 0.0;
    const int n = 200000;
    double h = (hi - lo) / n, acc = 0.0;
    for (int i = 0; i < n; ++i) {
        double xp = lo + (i + 0.5) * h;
        double ylow = std::max({std::exp(-t), 2.0 * std::fabs(xp - x), 2.0 * std::fabs(xp - y)});
        acc += h / ylow;
    }
    return 2.0 * acc;
}
}  // namespace

TEST_CASE("log kernel closed-form values") {
    CHECK(log_kernel_circle(0.5) == doctest::Approx(2.0 * ln2).epsilon(1e-14));
    CHECK(log_kernel_circle(0.25) == doctest::Approx(3.0 * ln2).epsilon(1e-14));
    CHECK(std::fabs(log_kernel_circle(0.5) - log_kernel_circle(0.5 - 1e-9)) < 1e-6);
    CHECK_THROWS_AS(log_kernel_circle(0.0), std::domain_error);
    CHECK_THROWS_AS(log_kernel_circle(0.7), std::invalid_argument);
}

TEST_CASE("fourier covariance") {
    for (int n : {1, 7, 64})
        CHECK(fourier_cov(n, 0.0) == doctest::Approx(4 * ln2 + 2 * harmonic_number(n)).epsilon(1e-13));
    CHECK(fourier_cov(1, 0.5) == doctest::Approx(4 * ln2 - 2.0).epsilon(1e-14));

    double prev = 1e9;
    for (int n : {256, 1024, 4096}) {
        double gap = std::fabs(fourier_cov(n, 0.1) - log_kernel_circle(0.1));
        CHECK(gap < prev);
        prev = gap;
    }
    CHECK(prev < 1e-3);
}

TEST_CASE("white-noise covariance branches") {
    for (double t : {0.5, 2.0, std::log(64.0), std::log(4096.0), 12.0}) {
        double xt = whitenoise_branch_point(t);
        double below = whitenoise_cov(t, xt);
        double above = whitenoise_cov(t, xt * (1 + 1e-13));
        CHECK(std::fabs(below - above) < 1e-10);
        // beyond the branch point the kernel equals the limit kernel exactly
        double d = std::min(0.5, 2 * xt + 0.1);
        CHECK(whitenoise_cov(t, d) == log_kernel_circle(d));
    }

    // h_t(0) = 2t + O(1), constant -> 2 + 2 ln(2/pi)
    double c_limit = 2.0 + 2.0 * std::log(2.0 / pi);
    CHECK(std::fabs(whitenoise_cov(std::log(1e6), 0.0) - 2 * std::log(1e6) - c_limit) < 1e-3);
    CHECK(std::fabs(whitenoise_cov(std::log(64.0), 0.0) - 2 * std::log(64.0) - c_limit) < 0.05);

    CHECK_THROWS_AS(whitenoise_cov(0.0, 0.1), std::invalid_argument);
    CHECK_THROWS_AS(whitenoise_cov(-1.0, 0.1), std::invalid_argument);
}

TEST_CASE("mollifier multipliers") {
    CHECK(conv_multiplier(Mollifier::Gaussian, 0.37, 0) == 1.0);
    CHECK(conv_multiplier(Mollifier::Poisson, 0.37, 0) == 1.0);

    // gaussian: squared multiplier matches e^{-4 pi^2 k^2 / n^2} at eps = 1/n
    int n = 32;
    for (long k : {1L, 5L, 31L}) {
        double m = conv_multiplier(Mollifier::Gaussian, 1.0 / n, k);
        CHECK(m * m == doctest::Approx(std::exp(-4 * pi * pi * k * k / double(n * n))).epsilon(1e-13));
    }
    // poisson: harmonic extension at radius r when eps = ln(1/r)
    double r = 0.9;
    for (long k : {1L, 3L, 10L})
        CHECK(conv_multiplier(Mollifier::Poisson, std::log(1.0 / r), k) ==
              doctest::Approx(std::pow(r, double(k))).epsilon(1e-13));

    // even in k, in (0,1], decreasing in |k| (k kept below double underflow)
    for (Mollifier mol : {Mollifier::Gaussian, Mollifier::Poisson}) {
        double prev = 1.0;
        for (long k = 1; k <= 40; k += 3) {
            double m = conv_multiplier(mol, 0.05, k);
            CHECK(m == conv_multiplier(mol, 0.05, -k));
            CHECK(m > 0.0);
            CHECK(m <= prev);
            prev = m;
        }
    }
}

TEST_CASE("convolution covariance stays a bounded distance from the fourier kernel") {
    double tail = 2e-17;  // 2 int_1^inf e^{-4 pi^2 s^2}/s ds is ~3e-19
    double bound = 16 * pi * pi + tail;
    for (int n : {64, 256}) {
        double sup = 0.0;
        for (int l = 0; l <= 512; ++l) {
            double d = 0.5 * l / 512.0;
            sup = std::max(sup, std::fabs(convolution_cov(Mollifier::Gaussian, n, d) -
                                          fourier_cov(n, d)));
        }
        CHECK(sup < bound);
        CHECK(sup > 1.0);  // the gap is genuinely O(1), not vanishing
    }
    // on-diagonal growth 2 ln n + O(1), via the bounded gap to f_n(0)
    for (int n : {64, 256, 1024})
        CHECK(std::fabs(convolution_cov(Mollifier::Gaussian, n, 0.0) - fourier_cov(n, 0.0)) < 5.0);
}

TEST_CASE("haar wavelet transform against quadrature oracle") {
    CHECK(haar_wavelet_ft(0.0) == std::complex<double>(0.0, 0.0));
    for (double xi : {0.5, 1.0, 1.5, 2.0, 3.7}) {
        auto expect = haar_ft_quadrature(xi);
        auto got = haar_wavelet_ft(xi);
        CHECK(std::abs(got - expect) < 1e-9);
    }
    // the stated closed form i e^{-i pi xi} sin^2(pi xi/2)/(pi xi/2)
    double xi = 1.3;
    std::complex<double> manual = std::complex<double>(0, 1) *
                                  std::exp(std::complex<double>(0, -pi * xi)) *
                                  (std::pow(std::sin(pi * xi / 2), 2) / (pi * xi / 2));
    CHECK(std::abs(haar_wavelet_ft(xi) - manual) < 1e-14);
}

TEST_CASE("vaguelet coefficients") {
    CHECK(haar_vaguelet_coeff(3, 2, 0) == std::complex<double>(0.0, 0.0));
    for (long q : {1L, 5L, 17L})
        for (int k = 0; k < 8; ++k)
            CHECK(std::abs(haar_vaguelet_coeff(3, k, q)) ==
                  doctest::Approx(std::abs(haar_vaguelet_coeff(3, 0, q))).epsilon(1e-12));
    CHECK_THROWS_AS(haar_vaguelet_coeff(2, 4, 1), std::invalid_argument);
}

TEST_CASE("vaguelet covariance: symmetry, near-diagonal level, off-diagonal convergence") {
    CHECK(vaguelet_cov(4, 0.2, 0.45) == vaguelet_cov(4, 0.45, 0.2));

    // |C_n(x,y) - 2n ln 2| near the diagonal stays bounded by a fixed constant
    for (int n : {4, 6}) {
        GridDomain grid = GridDomain::circle(1 << (n + 1));
        VagueletBasis basis(n, grid);
        double f_const = 0.0;
        int lagmax = std::max(1, grid.m >> n);
        for (int i = 0; i < grid.m; ++i)
            for (int lag = 0; lag <= lagmax; ++lag)
                f_const = std::max(f_const,
                                   std::fabs(basis.cov(i, (i + lag) % grid.m) - 2.0 * n * ln2));
        MESSAGE("near-diagonal constant at n=", n, ": ", f_const);
        CHECK(f_const < 10.0);
    }

    // values at dist 0.1 converge toward the limit kernel as n grows
    double limit = log_kernel_circle(0.1);
    double prev = 1e9;
    for (int n : {6, 8, 10}) {
        double gap = std::fabs(vaguelet_cov(n, 0.0, 0.1) - limit);
        CHECK(gap < prev);
        prev = gap;
    }
    CHECK(prev < 1e-3);
}

TEST_CASE("vaguelet basis agrees with the direct synthesis path") {
    GridDomain grid = GridDomain::circle(64);
    VagueletBasis basis(5, grid);
    for (auto [i, j] : {std::pair{0, 0}, {3, 17}, {10, 42}, {31, 32}}) {
        double direct = vaguelet_cov(5, grid.point(i), grid.point(j));
        CHECK(basis.cov(i, j) == doctest::Approx(direct).epsilon(1e-8));
    }
}

TEST_CASE("exact cone covariance") {
    for (double t : {0.5, 1.0, 3.0})
        CHECK(exact_cone_cov_interval(t, 0.3, 0.3) == doctest::Approx(2 * (t + 1)).epsilon(1e-14));
    CHECK(exact_cone_cov_interval(2.0, 0.0, 1.0) == 0.0);

    // closed form vs the quadrature oracle over the region definition
    for (auto [t, u] : {std::pair{3.0, std::exp(-3.0)}, {3.0, 0.3}, {1.0, 0.05}, {0.5, 0.9}}) {
        double x = 0.5 - u / 2, y = 0.5 + u / 2;
        double cf = exact_cone_cov_interval(t, x, y);
        CHECK(cf == doctest::Approx(cone_cov_quadrature(t, x, y)).epsilon(1e-3));
    }

    // non-decreasing in t; depends on (x,y) only through |x-y|
    double prev = 0.0;
    for (double t : {0.2, 0.5, 1.0, 2.0, 4.0, 8.0}) {
        double v = exact_cone_cov_interval(t, 0.1, 0.35);
        CHECK(v >= prev);
        prev = v;
    }
    CHECK(exact_cone_cov_interval(1.5, 0.1, 0.4) == exact_cone_cov_interval(1.5, 0.55, 0.25));

    CHECK_THROWS_AS(exact_cone_cov_interval(-1.0, 0.1, 0.2), std::invalid_argument);
}

TEST_CASE("localization constant") {
    CHECK(localization_delta0() == doctest::Approx(0.5 - std::atan(pi / 2) / pi).epsilon(1e-15));
    CHECK(std::fabs(localization_delta0() - 0.18) < 0.005);
}

TEST_CASE("covariance matrices: diagonal, beta scaling, jitter budget") {
    GridDomain grid = GridDomain::circle(8);
    CovMatrix c1 = build_cov_matrix({Scheme::FourierPartial, 4.0}, grid);
    double expect = 4 * ln2 + 2 * harmonic_number(4);
    for (int i = 0; i < 8; ++i)
        CHECK(c1.entries(i, i) == doctest::Approx(expect + c1.jitter).epsilon(1e-13));

    CovMatrix c_half = build_cov_matrix({Scheme::FourierPartial, 4.0, Mollifier::Gaussian, 0.5}, grid);
    CHECK(c_half.entries(0, 3) == doctest::Approx(0.25 * c1.entries(0, 3)).epsilon(1e-12));

    GridDomain g128 = GridDomain::circle(128);
    GridDomain i128 = GridDomain::interval(128);
    std::vector<CovarianceSpec> specs = {
        {Scheme::FourierPartial, 64.0},
        {Scheme::WhiteNoiseCone, std::log(64.0)},
        {Scheme::ConvolutionSpectral, 64.0},
        {Scheme::Vaguelet, 6.0},
    };
    for (const auto& s : specs) {
        CovMatrix c = build_cov_matrix(s, g128);
        CHECK(c.jitter <= 1e-8 * c.entries.diagonal().maxCoeff());
    }
    CovMatrix cone = build_cov_matrix({Scheme::ExactConeInterval, 3.0}, i128);
    CHECK(cone.jitter <= 1e-8 * cone.entries.diagonal().maxCoeff());

    CovMatrix big = build_cov_matrix({Scheme::WhiteNoiseCone, std::log(512.0)},
                                     GridDomain::circle(512));
    CHECK(big.jitter <= 1e-8 * big.entries.diagonal().maxCoeff());

    CHECK_THROWS_AS(build_cov_matrix({Scheme::LimitCircle, 1.0}, grid), std::domain_error);
    CHECK_THROWS_AS(build_cov_matrix({Scheme::ExactConeInterval, 3.0}, grid), std::invalid_argument);
}

TEST_CASE("grid kernels are PSD up to the stated slack before jitter") {
    GridDomain grid = GridDomain::circle(64);
    GridDomain igrid = GridDomain::interval(48);
    std::vector<std::pair<CovarianceSpec, GridDomain>> cases = {
        {{Scheme::FourierPartial, 16.0}, grid},
        {{Scheme::WhiteNoiseCone, 2.5}, grid},
        {{Scheme::ConvolutionSpectral, 16.0}, grid},
        {{Scheme::ConvolutionSpectral, 16.0, Mollifier::Poisson}, grid},
        {{Scheme::Vaguelet, 4.0}, grid},
        {{Scheme::ExactConeInterval, 2.0}, igrid},
    };
    for (const auto& [spec, g] : cases) {
        CovMatrix c = build_cov_matrix(spec, g);
        Eigen::MatrixXd raw = c.entries;
        raw.diagonal().array() -= c.jitter;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(raw);
        CHECK(es.eigenvalues().minCoeff() >= -1e-9 * raw.diagonal().maxCoeff());
    }
}

TEST_CASE("spec validation") {
    CHECK_THROWS_AS(CovarianceSpec({Scheme::FourierPartial, 0.0}).validate(), std::invalid_argument);
    CHECK_THROWS_AS(CovarianceSpec({Scheme::WhiteNoiseCone, -2.0}).validate(), std::invalid_argument);
    CHECK_THROWS_AS(CovarianceSpec({Scheme::FourierPartial, 4.0, Mollifier::Gaussian, 1.5}).validate(),
                    std::invalid_argument);
    CHECK_THROWS_AS(CovarianceSpec({Scheme::FourierPartial, 4.3}).validate(), std::invalid_argument);
    CHECK_NOTHROW(CovarianceSpec({Scheme::Vaguelet, 0.0}).validate());
}
