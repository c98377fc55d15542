// Acceptance suite: runs every acceptance criterion at its stated size and
// tolerance, one pass/fail line per criterion. Exit code = number of failures.
//
// Usage: acceptance [criterion numbers...]   (default: all)

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "circlechaos/chaos.hpp"
#include "circlechaos/experiment.hpp"
#include "circlechaos/samplers.hpp"
#include "circlechaos/stats.hpp"

using namespace circlechaos;
namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t k_seed = 20250809;
int g_failures = 0;

void report(int crit, bool pass, const std::string& detail) {
    std::printf("[%s] criterion %2d: %s\n", pass ? "PASS" : "FAIL", crit, detail.c_str());
    std::fflush(stdout);
    if (!pass) ++g_failures;
}

fs::path out_dir(const std::string& tag) {
    fs::path p = fs::path("acceptance_out") / tag;
    fs::create_directories(p);
    return p;
}

ExperimentReport run(nlohmann::json j, const std::string& tag) {
    j["out"] = out_dir(tag).string();
    if (!j.contains("seed")) j["seed"] = k_seed;
    return run_experiment(parse_config_json(j));
}

const CheckResult* find_check(const ExperimentReport& rep, const std::string& name) {
    for (const auto& c : rep.checks)
        if (c.name == name) return &c;
    return nullptr;
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4g", v);
    return buf;
}

// ---- criteria -------------------------------------------------------------------

void criterion_1() {
    struct Case {
        const char* label;
        nlohmann::json cfg;
    };
    std::vector<Case> cases = {
        {"FourierPartial n=64",
         {{"kind", "CovarianceValidation"}, {"scheme", "FourierPartial"}, {"n", 64}}},
        {"WhiteNoiseCone t=ln64",
         {{"kind", "CovarianceValidation"}, {"scheme", "WhiteNoiseCone"}, {"t", std::log(64.0)}}},
        {"ConvolutionSpectral(Gaussian) n=64",
         {{"kind", "CovarianceValidation"}, {"scheme", "ConvolutionSpectral"},
          {"mollifier", "Gaussian"}, {"n", 64}}},
        {"Vaguelet n=6", {{"kind", "CovarianceValidation"}, {"scheme", "Vaguelet"}, {"n", 6}}},
    };
    bool all = true;
    std::string detail = "covariance exactness (m=128, 1e5 replicas, 20 probes, 4 stderr):";
    int idx = 0;
    for (auto& cs : cases) {
        cs.cfg["m"] = 128;
        cs.cfg["replicas"] = 100000;
        ExperimentReport rep = run(cs.cfg, "c1_" + std::to_string(idx++));
        const CheckResult* chk = find_check(rep, "max_normalized_cov_dev");
        bool ok = chk && chk->pass && !rep.error;
        all = all && ok;
        detail += std::string(" [") + cs.label + ": " + (chk ? fmt(chk->value) : "err") + " se, " +
                  fmt(rep.elapsed_seconds) + "s]";
    }
    report(1, all, detail);
}

void criterion_2() {
    ExperimentReport rep = run({{"kind", "GapCurves"},
                                {"scheme_a", "FourierPartial"},
                                {"scheme_b", "WhiteNoiseCone"}},
                               "c2");
    const CheckResult* ratio = find_check(rep, "full_gap_ratio");
    const CheckResult* decay = find_check(rep, "delta01_decay");
    bool ok = !rep.error && ratio && ratio->pass && decay && decay->pass;
    report(2, ok,
           "uniqueness-theorem hypothesis witness: full-grid gap ratio " +
               (ratio ? fmt(ratio->value) : "err") + " <= 1.2, delta=0.1 column decay " +
               (decay ? fmt(decay->value) : "err") + " <= 0.5 over n in {2^6..2^12}");
}

void criterion_3() {
    ExperimentReport rep = run({{"kind", "GapCurves"},
                                {"scheme_a", "FourierPartial"},
                                {"scheme_b", "ConvolutionSpectral"},
                                {"mollifier", "Gaussian"}},
                               "c3");
    const CheckResult* bound = find_check(rep, "conv_gap_bound");
    bool ok = !rep.error && bound && bound->pass;
    report(3, ok,
           "fourier-vs-gaussian-convolution gap " + (bound ? fmt(bound->value) : "err") +
               " <= 16 pi^2 + tail = " + (bound ? fmt(bound->tolerance) : "?") +
               " for every n in {2^6..2^12}");
}

void criterion_4() {
    struct Case {
        const char* label;
        CovarianceSpec spec;
    };
    std::vector<Case> cases = {
        {"Fourier", {Scheme::FourierPartial, 64.0}},
        {"WhiteNoise", {Scheme::WhiteNoiseCone, std::log(64.0)}},
        {"ConvGaussian", {Scheme::ConvolutionSpectral, 64.0, Mollifier::Gaussian}},
        {"Vaguelet", {Scheme::Vaguelet, 6.0}},
        {"ExactCone", {Scheme::ExactConeInterval, 3.0}},
    };
    const int reps = 10000;
    bool all = true;
    std::string detail = "mean-one normalization, every scheme (1e4 replicas):";
    std::uint64_t scheme_tag = purpose::harness;
    for (const auto& cs : cases) {
        ++scheme_tag;
        for (double beta : {0.5, 1.0}) {
            GridDomain grid = cs.spec.scheme == Scheme::ExactConeInterval
                                  ? GridDomain::interval(256)
                                  : GridDomain::circle(256);
            CovarianceSpec spec = cs.spec;
            spec.beta = beta;
            std::unique_ptr<CholeskySampler> chol;
            std::unique_ptr<VagueletSampler> vag;
            if (spec.scheme == Scheme::WhiteNoiseCone || spec.scheme == Scheme::ExactConeInterval)
                chol = std::make_unique<CholeskySampler>(spec, grid);
            else if (spec.scheme == Scheme::Vaguelet)
                vag = std::make_unique<VagueletSampler>(spec.level_int(), grid);

            std::vector<double> masses(reps);
            for (int r = 0; r < reps; ++r) {
                RngStream rng(k_seed, r, scheme_tag);
                FieldSample f;
                if (chol)
                    f = chol->sample(rng);
                else if (vag)
                    f = vag->sample(rng);
                else if (spec.scheme == Scheme::FourierPartial)
                    f = sample_fourier_field(spec.level_int(), grid, rng).first;
                else {
                    auto coeffs = draw_spectral_coefficients(
                        static_cast<int>(conv_freq_cutoff(spec.level_int())), rng);
                    f = sample_convolution_field(coeffs, spec.mollifier, 1.0 / spec.level_int(),
                                                 grid);
                }
                masses[r] = total_mass(build_measure(f, f.beta_prescaled ? 1.0 : beta,
                                                     {NormKind::Lebesgue, 0.0}));
            }
            MomentReport m1 = empirical_moment(masses, 1.0);
            double se = std::sqrt(analytic_mass_variance(cs.spec, grid, beta) / reps);
            double dev = std::fabs(m1.estimate - 1.0) / se;
            bool ok = dev <= 4.0;
            all = all && ok;
            if (!ok || beta == 1.0)
                detail += std::string(" [") + cs.label + " b=" + fmt(beta) + ": " + fmt(dev) + "]";
        }
    }
    report(4, all, detail);
}

void criterion_5() {
    ExperimentReport rep = run({{"kind", "SecondMomentCheck"},
                                {"scheme", "FourierPartial"},
                                {"n", 256},
                                {"m", 512},
                                {"beta", 0.5},
                                {"replicas", 10000}},
                               "c5");
    const CheckResult* mean = find_check(rep, "mean_mass_normalized_dev");
    const CheckResult* second = find_check(rep, "second_moment_normalized_dev");

    double target = 2.0 * std::tgamma(0.5) / std::pow(std::tgamma(0.75), 2);
    double quad_limit = second_moment_quadrature(0.5, {Scheme::LimitCircle, 1.0});
    bool gamma_ok = std::fabs(quad_limit - target) <= 1e-6;

    bool ok = !rep.error && mean && mean->pass && second && second->pass && gamma_ok;
    report(5, ok,
           "second moment (Fourier n=256, beta=0.5): |E M^2 - quadrature| = " +
               (second ? fmt(second->value) : "err") + " se <= 4; limit-kernel quadrature vs " +
               "2G(1/2)/G(3/4)^2 differs by " + fmt(std::fabs(quad_limit - target)) + " <= 1e-6");
}

void criterion_6() {
    ExperimentReport rep = run({{"kind", "CrossSchemeKS"}}, "c6");
    const CheckResult* chk = find_check(rep, "ks_seed_pass_count");
    bool ok = !rep.error && chk && chk->pass;
    report(6, ok,
           "cross-scheme law agreement (beta=0.5, n=2^10, m=2^10, 2e3 replicas): " +
               std::string(chk ? fmt(chk->value) : "err") +
               "/10 seeds with both KS p-values > 0.01 (need >= 8)");
}

void criterion_7() {
    ExperimentReport rep = run({{"kind", "CoupledConvergence"}}, "c7");
    const CheckResult* chk = find_check(rep, "coupled_diff_max_normalized_increase");
    bool ok = !rep.error && chk && chk->pass;
    report(7, ok,
           "coupled fourier-vs-convolution L1 difference decreases across n in "
           "{2^6,2^8,2^10,2^12}: max normalized increase " +
               std::string(chk ? fmt(chk->value) : "err") + " <= 2");
}

void criterion_8() {
    ExperimentReport rep = run({{"kind", "CriticalMassTrend"}}, "c8");
    const CheckResult* lo = find_check(rep, "critical_median_min");
    const CheckResult* hi = find_check(rep, "critical_median_max");
    const CheckResult* decay = find_check(rep, "lebesgue_median_decay");
    bool ok = !rep.error && lo && lo->pass && hi && hi->pass && decay && decay->pass;
    report(8, ok,
           "critical normalization non-degeneracy: sqrt(log n) medians in [" + fmt(0.08) + ", " +
               fmt(0.40) + "] (got [" + (lo ? fmt(lo->value) : "err") + ", " +
               (hi ? fmt(hi->value) : "err") + "]), lebesgue median decay " +
               (decay ? fmt(decay->value) : "err") + " <= 0.5");
}

void criterion_9() {
    ExperimentReport rep = run({{"kind", "ZepsBounds"}, {"replicas", 10000}}, "c9");
    bool ok = !rep.error && rep.all_pass();
    std::string detail = "decorrelating-field bounds, eps in {1/8,1/16,1/32}:";
    for (const auto& c : rep.checks)
        if (c.name.rfind("zeps_l2_bound", 0) == 0)
            detail += " [" + c.name.substr(14) + ": " + fmt(c.value) + " <= " + fmt(c.tolerance) + "]";
    report(9, ok, detail);
}

void criterion_10() {
    ExperimentReport rep = run({{"kind", "KahaneDirection"}}, "c10");
    const CheckResult* dom = find_check(rep, "kahane_max_normalized_delta");
    const CheckResult* eq = find_check(rep, "kahane_equality_max_abs_normalized");
    bool ok = !rep.error && dom && dom->pass && eq && eq->pass;
    report(10, ok,
           "convexity-inequality direction over 20 dominating pairs x 3 concave functions: "
           "max delta/se = " +
               std::string(dom ? fmt(dom->value) : "err") + " <= 2; equality cells " +
               (eq ? fmt(eq->value) : "err") + " <= 2");
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void criterion_11() {
    bool ok = true;
    std::string detail = "determinism: byte-identical CSV bodies on rerun:";
    std::vector<std::pair<std::string, nlohmann::json>> cases = {
        {"covariancevalidation",
         {{"kind", "CovarianceValidation"}, {"scheme", "FourierPartial"}, {"n", 16}, {"m", 64},
          {"replicas", 2000}}},
        {"perturbationcheck",
         {{"kind", "PerturbationCheck"}, {"n", 16}, {"m", 64}, {"replicas", 500}}},
    };
    for (auto& [label, cfg] : cases) {
        ExperimentReport r1 = run(cfg, "c11_" + label + "_a");
        ExperimentReport r2 = run(cfg, "c11_" + label + "_b");
        ok = ok && !r1.error && !r2.error;
        int compared = 0;
        for (const auto& entry : fs::directory_iterator(out_dir("c11_" + label + "_a"))) {
            if (entry.path().extension() != ".csv") continue;
            fs::path twin = out_dir("c11_" + label + "_b") / entry.path().filename();
            bool same = fs::exists(twin) && slurp(entry.path()) == slurp(twin);
            ok = ok && same;
            ++compared;
        }
        ok = ok && compared > 0;
        detail += " [" + label + ": " + std::to_string(compared) + " files]";
    }
    report(11, ok, detail);
}

}  // namespace

int main(int argc, char** argv) {
    std::set<int> wanted;
    for (int i = 1; i < argc; ++i) wanted.insert(std::atoi(argv[i]));
    auto active = [&](int c) { return wanted.empty() || wanted.count(c) > 0; };

    auto t0 = std::chrono::steady_clock::now();
    if (active(1)) criterion_1();
    if (active(2)) criterion_2();
    if (active(3)) criterion_3();
    if (active(4)) criterion_4();
    if (active(5)) criterion_5();
    if (active(6)) criterion_6();
    if (active(7)) criterion_7();
    if (active(8)) criterion_8();
    if (active(9)) criterion_9();
    if (active(10)) criterion_10();
    if (active(11)) criterion_11();
    double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    std::printf("acceptance: %s (%d failure%s, %.1fs)\n", g_failures == 0 ? "PASS" : "FAIL",
                g_failures, g_failures == 1 ? "" : "s", elapsed);
    return g_failures;
}
