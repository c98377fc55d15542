#include "circlechaos/chaos.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace circlechaos {

const char* norm_kind_name(NormKind k) {
    switch (k) {
        case NormKind::Lebesgue: return "Lebesgue";
        case NormKind::SqrtLogN: return "SqrtLogN";
        case NormKind::SqrtNLog2: return "SqrtNLog2";
        case NormKind::SqrtT: return "SqrtT";
    }
    return "?";
}

double normalization_factor(const NormalizationRule& rule) {
    switch (rule.kind) {
        case NormKind::Lebesgue:
            return 1.0;
        case NormKind::SqrtLogN:
            if (!(rule.parameter > 1.0))
                throw std::invalid_argument("normalization_factor: SqrtLogN needs n > 1");
            return std::sqrt(std::log(rule.parameter));
        case NormKind::SqrtNLog2:
            if (!(rule.parameter > 0.0))
                throw std::invalid_argument("normalization_factor: SqrtNLog2 needs n > 0");
            return std::sqrt(rule.parameter * std::numbers::ln2);
        case NormKind::SqrtT:
            if (!(rule.parameter > 0.0))
                throw std::invalid_argument("normalization_factor: SqrtT needs t > 0");
            return std::sqrt(rule.parameter);
    }
    throw std::logic_error("normalization_factor: unreachable");
}

ChaosMeasure build_measure(const FieldSample& field, double beta, const NormalizationRule& rule) {
    if (!(beta > 0.0) || beta > 1.0)
        throw std::invalid_argument("build_measure: beta must lie in (0, 1]");
    if (field.beta_prescaled && beta != 1.0)
        throw std::invalid_argument(
            "build_measure: field already carries beta in its covariance; pass beta = 1");
    if (field.values.size() != field.variance.size() ||
        field.values.size() != static_cast<std::size_t>(field.grid.m))
        throw std::invalid_argument("build_measure: values/variance length mismatch");

    const double factor = normalization_factor(rule);
    const double cell = field.grid.cell_width();
    ChaosMeasure mu;
    mu.grid = field.grid;
    mu.beta = beta;
    mu.rule = rule;
    mu.weights.resize(field.values.size());
    for (std::size_t i = 0; i < field.values.size(); ++i) {
        double v = field.values[i], s2 = field.variance[i];
        if (!std::isfinite(v) || !std::isfinite(s2))
            throw std::invalid_argument("build_measure: non-finite field input");
        mu.weights[i] = factor * cell * std::exp(beta * v - 0.5 * beta * beta * s2);
    }
    return mu;
}

double total_mass(const ChaosMeasure& measure) {
    double s = 0.0;
    for (double w : measure.weights) s += w;
    return s;
}

double integrate(const ChaosMeasure& measure, std::span<const double> f) {
    if (f.size() != measure.weights.size())
        throw std::invalid_argument("integrate: test function length mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
        if (!std::isfinite(f[i])) throw std::invalid_argument("integrate: non-finite test function");
        s += f[i] * measure.weights[i];
    }
    return s;
}

ChaosMeasure perturb_measure(const ChaosMeasure& measure, const FieldSample& z_field,
                             std::span<const double> cross_cov) {
    if (z_field.grid != measure.grid)
        throw std::invalid_argument("perturb_measure: grid mismatch");
    if (cross_cov.size() != measure.weights.size() ||
        z_field.values.size() != measure.weights.size())
        throw std::invalid_argument("perturb_measure: length mismatch");
    ChaosMeasure out = measure;
    for (std::size_t i = 0; i < out.weights.size(); ++i)
        out.weights[i] *= std::exp(z_field.values[i] - 0.5 * z_field.variance[i] - cross_cov[i]);
    return out;
}

}  // namespace circlechaos
