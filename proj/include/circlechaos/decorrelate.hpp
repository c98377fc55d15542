#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "circlechaos/grid.hpp"
#include "circlechaos/kernels.hpp"
#include "circlechaos/rng.hpp"
#include "circlechaos/samplers.hpp"

namespace circlechaos {

// Lipschitz partition of unity subordinate to the radius-eps balls around a
// maximal eps/2-separated center set on the circle. Tents are renormalized so
// they sum to one at every grid point; supports stay inside the eps-balls.
struct PartitionOfUnity {
    double eps = 0.0;
    GridDomain grid;
    std::vector<double> centers;              // center positions a_i
    std::vector<std::vector<double>> tents;   // p_i sampled on the grid
};

// Greedy left-to-right maximal eps/2-separated centers; requires eps >= 2/m.
PartitionOfUnity build_partition(double eps, const GridDomain& grid);

// C_eps(x_i, x_j) = sum_c sqrt(p_c(x_i) p_c(x_j)); equals 1 on the diagonal
// and vanishes whenever dist >= 2 eps.
double zeps_cov(const PartitionOfUnity& part, int i, int j);

// Z_eps(x) = sum_c A_c sqrt(p_c(x)); unit variance everywhere.
FieldSample sample_zeps(const PartitionOfUnity& part, RngStream& rng);

enum class ConcaveFn { Sqrt, Log1p, Min1 };
double concave_apply(ConcaveFn f, double x);
const char* concave_name(ConcaveFn f);

struct KahaneGapResult {
    double delta = 0.0;    // E f(mass_A) - E f(mass_B), common-random-number estimate
    double stderr_ = 0.0;
    int replicas = 0;
};

// Monte Carlo probe of Kahane's convexity inequality: if cov_a >= cov_b
// pointwise then delta <= 0 up to noise, for every concave f. Matrices are the
// ready (beta-scaled) grid covariances; masses use the Lebesgue rule.
KahaneGapResult kahane_gap(ConcaveFn f, const Eigen::MatrixXd& cov_a,
                           const Eigen::MatrixXd& cov_b, const GridDomain& grid, int replicas,
                           std::uint64_t master_seed, std::uint64_t purpose_tag = purpose::kahane);

KahaneGapResult kahane_gap(ConcaveFn f, const CovarianceSpec& spec_a, const CovarianceSpec& spec_b,
                           const GridDomain& grid, int replicas, std::uint64_t master_seed);

// Entrywise-nonnegative PSD perturbation: a low-rank Gram matrix of smooth
// nonnegative bump vectors. Adding it to any covariance gives a pointwise
// dominating covariance.
Eigen::MatrixXd make_gram_perturbation(const GridDomain& grid, RngStream& rng, int rank = 3);

}  // namespace circlechaos
