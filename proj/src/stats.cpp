#include "circlechaos/stats.hpp"

#include <algorithm>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "parallel.hpp"

namespace circlechaos {

double kolmogorov_survival(double lambda) {
    if (lambda <= 1e-8) return 1.0;
    double s = 0.0;
    for (int j = 1; j <= 100; ++j) {
        double term = 2.0 * std::exp(-2.0 * j * j * lambda * lambda);
        s += (j % 2 == 1) ? term : -term;
        if (term < 1e-16) break;
    }
    return std::clamp(s, 0.0, 1.0);
}

KsResult ks_two_sample(std::span<const double> xs, std::span<const double> ys) {
    if (xs.empty() || ys.empty()) throw std::invalid_argument("ks_two_sample: empty input");
    std::vector<double> x(xs.begin(), xs.end()), y(ys.begin(), ys.end());
    std::sort(x.begin(), x.end());
    std::sort(y.begin(), y.end());
    const std::size_t n1 = x.size(), n2 = y.size();
    double d = 0.0;
    std::size_t i = 0, j = 0;
    while (i < n1 && j < n2) {
        double v = std::min(x[i], y[j]);
        while (i < n1 && x[i] <= v) ++i;
        while (j < n2 && y[j] <= v) ++j;
        d = std::max(d, std::fabs(static_cast<double>(i) / n1 - static_cast<double>(j) / n2));
    }
    double ne = std::sqrt(static_cast<double>(n1) * n2 / (n1 + n2));
    double p = kolmogorov_survival((ne + 0.12 + 0.11 / ne) * d);
    return KsResult{d, p};
}

MomentReport empirical_moment(std::span<const double> samples, double q) {
    if (samples.empty()) throw std::invalid_argument("empirical_moment: empty input");
    if (q < 0.0) throw std::invalid_argument("empirical_moment: q must be >= 0");
    bool fractional = std::fabs(q - std::round(q)) > 1e-12;
    const std::size_t n = samples.size();
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (samples[i] < 0.0 && fractional)
            throw std::domain_error("empirical_moment: negative sample with fractional q");
        y[i] = q == 0.0 ? 1.0 : std::pow(samples[i], q);
    }
    double sum = 0.0;
    for (double v : y) sum += v;
    double mean = sum / n;
    if (n == 1) return MomentReport{q, mean, 0.0, n};
    // jackknife over leave-one-out means
    double acc = 0.0;
    for (double v : y) {
        double loo = (sum - v) / (n - 1);
        acc += (loo - mean) * (loo - mean);
    }
    double se = std::sqrt(acc * static_cast<double>(n - 1) / n);
    return MomentReport{q, mean, se, n};
}

double second_moment_quadrature(double beta, const CovarianceSpec& spec, double rel_tol) {
    if (beta == 0.0) return 1.0;
    CovarianceSpec s = spec;
    s.beta = 1.0;  // beta enters through the integrand below
    s.validate();
    if (s.scheme == Scheme::Vaguelet || s.scheme == Scheme::ExactConeInterval)
        throw std::invalid_argument("second_moment_quadrature: circle translation-invariant schemes only");
    if (s.scheme == Scheme::LimitCircle && !(beta * beta < 0.5))
        throw std::domain_error("second_moment_quadrature: limit kernel needs beta^2 < 1/2");

    const double b2 = beta * beta;
    auto f = [&](double u) {
        double dist = u > 0.5 ? 1.0 - u : u;
        return std::exp(b2 * scheme_kernel(s, dist));
    };
    boost::math::quadrature::tanh_sinh<double> integrator;
    return integrator.integrate(f, 0.0, 1.0, rel_tol);
}

double analytic_mass_variance(const CovarianceSpec& spec, const GridDomain& grid, double beta) {
    CovarianceSpec s = spec;
    s.beta = 1.0;
    s.validate();
    const int m = grid.m;
    const double b2 = beta * beta;
    double acc = 0.0;
    if (spec.scheme == Scheme::Vaguelet) {
        VagueletBasis basis(s.level_int(), grid);
        for (int i = 0; i < m; ++i) {
            acc += std::exp(b2 * basis.variance(i));
            for (int j = i + 1; j < m; ++j) acc += 2.0 * std::exp(b2 * basis.cov(i, j));
        }
        return acc / (double(m) * m) - 1.0;
    }
    std::vector<double> lag(m);
    for (int l = 0; l < m; ++l)
        lag[l] = spec.scheme == Scheme::ExactConeInterval
                     ? exact_cone_cov_interval(s.level, 0.0, double(l) / m)
                     : scheme_kernel(s, grid.distance(0, l));
    if (grid.kind == DomainKind::Circle) {
        for (int l = 0; l < m; ++l) acc += std::exp(b2 * lag[l]);
        return acc / m - 1.0;
    }
    for (int l = 0; l < m; ++l) {
        double mult = l == 0 ? double(m) : 2.0 * (m - l);
        acc += mult * std::exp(b2 * lag[l]);
    }
    return acc / (double(m) * m) - 1.0;
}

double kr_distance(const ChaosMeasure& a, const ChaosMeasure& b) {
    if (a.grid != b.grid) throw std::invalid_argument("kr_distance: grid mismatch");
    const int m = a.grid.m;
    double ma = total_mass(a), mb = total_mass(b);
    if (!(ma >= 0.0) || !(mb >= 0.0)) throw std::invalid_argument("kr_distance: invalid masses");
    double common = std::min(ma, mb);
    double sa = ma > 0.0 ? common / ma : 0.0;
    double sb = mb > 0.0 ? common / mb : 0.0;

    std::vector<double> cum(m);
    double run = 0.0;
    for (int i = 0; i < m; ++i) {
        run += sa * a.weights[i] - sb * b.weights[i];
        cum[i] = run;
    }
    double w1 = 0.0;
    const double cell = a.grid.cell_width();
    if (a.grid.kind == DomainKind::Circle) {
        // min_c sum |cum - c| is attained at the median of the cumulative gaps
        std::vector<double> sorted = cum;
        std::sort(sorted.begin(), sorted.end());
        double c = sorted[(m - 1) / 2];
        for (double v : cum) w1 += std::fabs(v - c);
    } else {
        for (double v : cum) w1 += std::fabs(v);
    }
    w1 *= cell;

    double pad = (a.grid.kind == DomainKind::Circle ? 0.5 : 1.0) * std::fabs(ma - mb);
    return w1 + pad;
}

GapCurve sup_cov_gap(CovarianceSpec spec_a, CovarianceSpec spec_b, const GridDomain& grid,
                     std::span<const double> levels, const std::function<double(double)>& level_map,
                     std::vector<double> deltas) {
    GapCurve curve;
    curve.deltas = std::move(deltas);
    const int m = grid.m;
    for (std::size_t i = 1; i < levels.size(); ++i)
        if (!(levels[i] > levels[i - 1]))
            throw std::invalid_argument("sup_cov_gap: levels must be strictly increasing");
    for (double lv : levels) {
        spec_a.level = lv;
        spec_b.level = level_map(lv);
        GapCurve::Row row;
        row.level = lv;
        row.level_b = spec_b.level;
        row.sup_offdiag.assign(curve.deltas.size(), 0.0);
        double ba2 = spec_a.beta * spec_a.beta, bb2 = spec_b.beta * spec_b.beta;
        for (int l = 0; l < m; ++l) {
            double d = grid.distance(0, l);
            double gap = std::fabs(ba2 * scheme_kernel(spec_a, d) - bb2 * scheme_kernel(spec_b, d));
            row.sup_full = std::max(row.sup_full, gap);
            for (std::size_t k = 0; k < curve.deltas.size(); ++k)
                if (d > curve.deltas[k]) row.sup_offdiag[k] = std::max(row.sup_offdiag[k], gap);
        }
        curve.rows.push_back(std::move(row));
    }
    return curve;
}

std::vector<ProbePair> default_probe_pairs(int m) {
    auto at = [m](int i) { return ((i % m) + m) % m; };
    std::vector<ProbePair> p;
    // variance probes
    for (int i : {0, m / 8, m / 4, m / 2, 3 * m / 4}) p.push_back({at(i), at(i)});
    // covariance probes at spread lags and base points
    p.push_back({0, at(1)});
    p.push_back({0, at(2)});
    p.push_back({0, at(4)});
    p.push_back({0, at(8)});
    p.push_back({0, at(m / 16)});
    p.push_back({0, at(m / 8)});
    p.push_back({0, at(m / 4)});
    p.push_back({0, at(3 * m / 8)});
    p.push_back({0, at(m / 2)});
    p.push_back({at(m / 8), at(m / 8 + 1)});
    p.push_back({at(m / 8), at(m / 8 + m / 16)});
    p.push_back({at(m / 4), at(m / 4 + 3)});
    p.push_back({at(m / 4), at(m / 2)});
    p.push_back({at(m / 3), at(m / 3 + m / 4)});
    p.push_back({at(2 * m / 3), at(2 * m / 3 + m / 8)});
    return p;
}

namespace {

// Analytic covariance at a probe pair for the scheme being validated.
double analytic_cov(const CovarianceSpec& spec, const GridDomain& grid, const VagueletBasis* basis,
                    int i, int j) {
    if (spec.scheme == Scheme::Vaguelet) return basis->cov(i, j);
    if (spec.scheme == Scheme::ExactConeInterval)
        return exact_cone_cov_interval(spec.level, grid.point(i), grid.point(j));
    return scheme_kernel(spec, grid.distance(i, j));
}

}  // namespace

CovCheckReport mc_covariance_check(const CovarianceSpec& spec, const GridDomain& grid,
                                   std::span<const ProbePair> pairs, int replicas,
                                   std::uint64_t master_seed) {
    CovarianceSpec s = spec;
    s.beta = 1.0;
    s.validate();
    if (replicas < 1000) throw std::invalid_argument("mc_covariance_check: need replicas >= 1000");

    // shared per-scheme machinery, safe for concurrent readers
    std::unique_ptr<CholeskySampler> chol;
    std::unique_ptr<VagueletSampler> vag;
    std::uint64_t tag = purpose::harness;
    switch (s.scheme) {
        case Scheme::WhiteNoiseCone:
        case Scheme::ExactConeInterval:
            chol = std::make_unique<CholeskySampler>(s, grid);
            tag = purpose::cholesky_field;
            break;
        case Scheme::Vaguelet:
            vag = std::make_unique<VagueletSampler>(s.level_int(), grid);
            tag = purpose::vaguelet_field;
            break;
        case Scheme::FourierPartial:
            tag = purpose::fourier_field;
            break;
        case Scheme::ConvolutionSpectral:
            tag = purpose::convolution_field;
            break;
        case Scheme::LimitCircle:
            throw std::invalid_argument("mc_covariance_check: LimitCircle has no sampler");
    }

    const std::size_t np = pairs.size();
    const std::int64_t chunk = 256;
    const std::int64_t n_chunks = (replicas + chunk - 1) / chunk;
    std::vector<std::vector<double>> sum(n_chunks, std::vector<double>(np, 0.0));
    std::vector<std::vector<double>> sumsq(n_chunks, std::vector<double>(np, 0.0));

    detail::parallel_for_chunks(replicas, chunk, [&](std::int64_t c, std::int64_t lo, std::int64_t hi) {
        for (std::int64_t r = lo; r < hi; ++r) {
            RngStream rng(master_seed, static_cast<std::uint64_t>(r), tag);
            FieldSample f;
            switch (s.scheme) {
                case Scheme::FourierPartial:
                    f = sample_fourier_field(s.level_int(), grid, rng).first;
                    break;
                case Scheme::ConvolutionSpectral: {
                    int n = s.level_int();
                    auto coeffs =
                        draw_spectral_coefficients(static_cast<int>(conv_freq_cutoff(n)), rng);
                    f = sample_convolution_field(coeffs, s.mollifier, 1.0 / n, grid);
                    break;
                }
                case Scheme::WhiteNoiseCone:
                case Scheme::ExactConeInterval:
                    f = chol->sample(rng);
                    break;
                case Scheme::Vaguelet:
                    f = vag->sample(rng);
                    break;
                default:
                    break;
            }
            for (std::size_t p = 0; p < np; ++p) {
                double z = f.values[pairs[p].i] * f.values[pairs[p].j];
                sum[c][p] += z;
                sumsq[c][p] += z * z;
            }
        }
    });

    CovCheckReport rep;
    rep.replicas = replicas;
    for (std::size_t p = 0; p < np; ++p) {
        double total = 0.0, total_sq = 0.0;
        for (std::int64_t c = 0; c < n_chunks; ++c) {
            total += sum[c][p];
            total_sq += sumsq[c][p];
        }
        double mean = total / replicas;
        double var = std::max(0.0, total_sq / replicas - mean * mean);
        double se = std::sqrt(var / replicas);
        CovCheckRow row;
        row.i = pairs[p].i;
        row.j = pairs[p].j;
        row.dist = grid.distance(row.i, row.j);
        row.analytic = analytic_cov(s, grid, vag ? &vag->basis() : nullptr, row.i, row.j);
        row.empirical = mean;
        row.stderr_ = se;
        double dev = std::fabs(mean - row.analytic);
        row.normalized_dev = se > 0.0 ? dev / se : (dev == 0.0 ? 0.0 : INFINITY);
        rep.max_abs_dev = std::max(rep.max_abs_dev, dev);
        rep.max_normalized_dev = std::max(rep.max_normalized_dev, row.normalized_dev);
        rep.rows.push_back(row);
    }
    return rep;
}

}  // namespace circlechaos
