#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "circlechaos/chaos.hpp"
#include "circlechaos/kernels.hpp"

namespace circlechaos {

struct KsResult {
    double statistic = 0.0;  // sup |F_x - F_y|
    double p_value = 1.0;    // asymptotic two-sample p-value
};

KsResult ks_two_sample(std::span<const double> xs, std::span<const double> ys);

// Survival function of the Kolmogorov distribution, Q(lambda) = 2 sum (-1)^{j-1} e^{-2 j^2 lambda^2}.
double kolmogorov_survival(double lambda);

struct MomentReport {
    double order = 0.0;
    double estimate = 0.0;
    double stderr_ = 0.0;
    std::size_t replicas = 0;
};

// Mean of x^q with jackknife standard error.
MomentReport empirical_moment(std::span<const double> samples, double q);

// int_0^1 exp(beta^2 * kernel(u)) du for the translation-invariant circle
// kernels; the limit kernel needs beta^2 < 1/2. Fubini identity for the
// second moment of the total mass.
double second_moment_quadrature(double beta, const CovarianceSpec& spec, double rel_tol = 1e-10);

// Exact variance of the Lebesgue-rule total mass of one replica:
// (1/m^2) sum_ij exp(beta^2 C(x_i, x_j)) - 1. Mean-one checks use this in
// place of the jackknife error, which collapses on heavy-tailed masses.
double analytic_mass_variance(const CovarianceSpec& spec, const GridDomain& grid, double beta);

// Discrete Kantorovich-Rubinstein distance between measures on the same grid:
// exact 1-D (interval) / circular transport between the measures rescaled to
// the common mass, plus (diameter/2) * |mass gap|.
double kr_distance(const ChaosMeasure& a, const ChaosMeasure& b);

struct GapCurve {
    std::vector<double> deltas;  // off-diagonal thresholds
    struct Row {
        double level = 0.0;                // scheme A level n
        double level_b = 0.0;              // mapped scheme B level
        double sup_full = 0.0;             // sup over all grid lags (incl. diagonal)
        std::vector<double> sup_offdiag;   // per delta, sup over dist > delta
    };
    std::vector<Row> rows;
};

// Covariance-gap curves between two translation-invariant schemes. level_map
// sends scheme A's level to scheme B's (e.g. n -> ln n for the white-noise
// partner); both kernels carry their spec's beta^2.
GapCurve sup_cov_gap(CovarianceSpec spec_a, CovarianceSpec spec_b, const GridDomain& grid,
                     std::span<const double> levels, const std::function<double(double)>& level_map,
                     std::vector<double> deltas = {0.05, 0.1, 0.2});

struct ProbePair {
    int i = 0, j = 0;
};

// 5 variance probes plus 15 spread covariance probes; deterministic in m.
std::vector<ProbePair> default_probe_pairs(int m);

struct CovCheckRow {
    int i = 0, j = 0;
    double dist = 0.0;
    double analytic = 0.0;
    double empirical = 0.0;
    double stderr_ = 0.0;
    double normalized_dev = 0.0;  // |empirical - analytic| / stderr
};

struct CovCheckReport {
    std::vector<CovCheckRow> rows;
    double max_normalized_dev = 0.0;
    double max_abs_dev = 0.0;
    int replicas = 0;
};

// Monte Carlo validation of a scheme's covariance at probe pairs. Fields are
// sampled at beta = 1 (the kernels scale exactly by beta^2, so nothing is
// lost); the estimator uses the known zero mean.
CovCheckReport mc_covariance_check(const CovarianceSpec& spec, const GridDomain& grid,
                                   std::span<const ProbePair> pairs, int replicas,
                                   std::uint64_t master_seed);

}  // namespace circlechaos
