#include "circlechaos/decorrelate.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <stdexcept>

#include "parallel.hpp"

namespace circlechaos {

PartitionOfUnity build_partition(double eps, const GridDomain& grid) {
    if (grid.kind != DomainKind::Circle)
        throw std::invalid_argument("build_partition: circle grid required");
    if (!(eps > 0.0) || eps > 0.5)
        throw std::invalid_argument("build_partition: eps must lie in (0, 1/2]");
    if (eps < 2.0 / grid.m)
        throw std::invalid_argument("build_partition: eps too small for grid");

    PartitionOfUnity part;
    part.eps = eps;
    part.grid = grid;
    for (int i = 0; i < grid.m; ++i) {
        double x = grid.point(i);
        bool ok = true;
        for (double a : part.centers)
            if (circle_distance(x, a) < eps / 2.0) {
                ok = false;
                break;
            }
        if (ok) part.centers.push_back(x);
    }

    const int nc = static_cast<int>(part.centers.size());
    part.tents.assign(nc, std::vector<double>(grid.m, 0.0));
    for (int c = 0; c < nc; ++c)
        for (int i = 0; i < grid.m; ++i) {
            double d = circle_distance(grid.point(i), part.centers[c]);
            part.tents[c][i] = std::max(0.0, std::min(2.0 * (eps - d) / eps, 1.0));
        }
    // maximality guarantees the raw tents cover; renormalize to a partition of
    // unity without growing any support
    for (int i = 0; i < grid.m; ++i) {
        double s = 0.0;
        for (int c = 0; c < nc; ++c) s += part.tents[c][i];
        if (!(s > 0.0)) throw std::logic_error("build_partition: uncovered grid point");
        for (int c = 0; c < nc; ++c) part.tents[c][i] /= s;
    }
    return part;
}

double zeps_cov(const PartitionOfUnity& part, int i, int j) {
    double s = 0.0;
    for (const auto& p : part.tents) s += std::sqrt(p[i] * p[j]);
    return s;
}

FieldSample sample_zeps(const PartitionOfUnity& part, RngStream& rng) {
    const int m = part.grid.m;
    FieldSample f;
    f.grid = part.grid;
    f.note = "zeps";
    f.values.assign(m, 0.0);
    f.variance.assign(m, 0.0);
    for (const auto& p : part.tents) {
        double a = rng.normal();
        for (int i = 0; i < m; ++i) {
            f.values[i] += a * std::sqrt(p[i]);
            f.variance[i] += p[i];
        }
    }
    return f;
}

double concave_apply(ConcaveFn f, double x) {
    switch (f) {
        case ConcaveFn::Sqrt: return std::sqrt(x);
        case ConcaveFn::Log1p: return std::log1p(x);
        case ConcaveFn::Min1: return std::min(1.0, x);
    }
    throw std::logic_error("concave_apply: unreachable");
}

const char* concave_name(ConcaveFn f) {
    switch (f) {
        case ConcaveFn::Sqrt: return "sqrt";
        case ConcaveFn::Log1p: return "log1p";
        case ConcaveFn::Min1: return "min1";
    }
    return "?";
}

namespace {

Eigen::MatrixXd factor_or_throw(const Eigen::MatrixXd& cov, const char* who) {
    double cap = 1e-6 * cov.diagonal().maxCoeff();
    double jitter = 0.0;
    for (;;) {
        Eigen::MatrixXd trial = cov;
        trial.diagonal().array() += jitter;
        Eigen::LLT<Eigen::MatrixXd> llt(trial);
        if (llt.info() == Eigen::Success) return llt.matrixL();
        double next = jitter == 0.0 ? 1e-12 : jitter * 10.0;
        if (next > cap) throw std::runtime_error(std::string(who) + ": factorization failed");
        jitter = next;
    }
}

}  // namespace

KahaneGapResult kahane_gap(ConcaveFn f, const Eigen::MatrixXd& cov_a,
                           const Eigen::MatrixXd& cov_b, const GridDomain& grid, int replicas,
                           std::uint64_t master_seed, std::uint64_t purpose_tag) {
    const int m = grid.m;
    if (cov_a.rows() != m || cov_b.rows() != m || cov_a.cols() != m || cov_b.cols() != m)
        throw std::invalid_argument("kahane_gap: covariance size mismatch");
    Eigen::MatrixXd la = factor_or_throw(cov_a, "kahane_gap(A)");
    Eigen::MatrixXd lb = factor_or_throw(cov_b, "kahane_gap(B)");
    Eigen::VectorXd da = cov_a.diagonal(), db = cov_b.diagonal();
    const double cell = grid.cell_width();

    // common random numbers: both masses from the same z, replica-keyed streams
    std::vector<double> diff(replicas);
    detail::parallel_for_chunks(replicas, 64, [&](std::int64_t, std::int64_t lo, std::int64_t hi) {
        Eigen::VectorXd z(m);
        for (std::int64_t r = lo; r < hi; ++r) {
            RngStream rng(master_seed, static_cast<std::uint64_t>(r), purpose_tag);
            for (int i = 0; i < m; ++i) z(i) = rng.normal();
            Eigen::VectorXd xa = la * z, xb = lb * z;
            double ma = 0.0, mb = 0.0;
            for (int i = 0; i < m; ++i) {
                ma += std::exp(xa(i) - 0.5 * da(i));
                mb += std::exp(xb(i) - 0.5 * db(i));
            }
            diff[r] = concave_apply(f, cell * ma) - concave_apply(f, cell * mb);
        }
    });

    double mean = 0.0;
    for (double d : diff) mean += d;
    mean /= replicas;
    double var = 0.0;
    for (double d : diff) var += (d - mean) * (d - mean);
    var = replicas > 1 ? var / (replicas - 1) : 0.0;
    return KahaneGapResult{mean, std::sqrt(var / replicas), replicas};
}

KahaneGapResult kahane_gap(ConcaveFn f, const CovarianceSpec& spec_a, const CovarianceSpec& spec_b,
                           const GridDomain& grid, int replicas, std::uint64_t master_seed) {
    return kahane_gap(f, build_cov_matrix(spec_a, grid).entries,
                      build_cov_matrix(spec_b, grid).entries, grid, replicas, master_seed);
}

Eigen::MatrixXd make_gram_perturbation(const GridDomain& grid, RngStream& rng, int rank) {
    const int m = grid.m;
    Eigen::MatrixXd q = Eigen::MatrixXd::Zero(m, m);
    for (int r = 0; r < rank; ++r) {
        double center = rng.uniform();
        double width = 0.05 + 0.15 * rng.uniform();
        double amp = 0.3 + 0.7 * rng.uniform();
        Eigen::VectorXd v(m);
        for (int i = 0; i < m; ++i) {
            double d = circle_distance(grid.point(i), center);
            v(i) = amp * std::exp(-d * d / (2.0 * width * width));
        }
        q += v * v.transpose();
    }
    return q;
}

}  // namespace circlechaos
