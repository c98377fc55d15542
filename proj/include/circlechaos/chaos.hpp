#pragma once

#include <span>
#include <vector>

#include "circlechaos/samplers.hpp"

namespace circlechaos {

// Deterministic reference-measure factor multiplying Lebesgue:
//   Lebesgue -> 1, SqrtLogN -> sqrt(ln n), SqrtNLog2 -> sqrt(n ln 2), SqrtT -> sqrt(t).
enum class NormKind { Lebesgue, SqrtLogN, SqrtNLog2, SqrtT };

struct NormalizationRule {
    NormKind kind = NormKind::Lebesgue;
    double parameter = 0.0;  // n or t, depending on kind
};

double normalization_factor(const NormalizationRule& rule);
const char* norm_kind_name(NormKind k);

// Discrete chaos measure: nonnegative mass per left-endpoint Riemann cell.
struct ChaosMeasure {
    GridDomain grid;
    std::vector<double> weights;
    double beta = 1.0;
    NormalizationRule rule;
};

// weights[i] = factor * cell_width * exp(beta v_i - beta^2 variance_i / 2).
// Fields sampled through a beta-scaled covariance matrix (beta_prescaled)
// must be passed with beta = 1; beta enters exactly once end to end.
ChaosMeasure build_measure(const FieldSample& field, double beta, const NormalizationRule& rule);

double total_mass(const ChaosMeasure& measure);

// sum_i f(x_i) * weights[i].
double integrate(const ChaosMeasure& measure, std::span<const double> f);

// Regular-field perturbation: weights'[i] = weights[i] *
// exp(z_i - var_z_i/2 - cross_cov_i), with cross_cov_i the covariance between
// Z(x_i) and the exponent field of `measure` (beta-scaled where applicable).
ChaosMeasure perturb_measure(const ChaosMeasure& measure, const FieldSample& z_field,
                             std::span<const double> cross_cov);

}  // namespace circlechaos
