// Python bindings for the main operations: kernels, samplers, chaos measures,
// statistics and the experiment runner.

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "circlechaos/chaos.hpp"
#include "circlechaos/decorrelate.hpp"
#include "circlechaos/experiment.hpp"
#include "circlechaos/samplers.hpp"
#include "circlechaos/stats.hpp"

namespace py = pybind11;
using namespace circlechaos;

namespace {

py::array_t<double> to_array(const std::vector<double>& v) {
    py::array_t<double> out(static_cast<py::ssize_t>(v.size()));
    std::copy(v.begin(), v.end(), out.mutable_data());
    return out;
}

std::vector<double> to_vector(py::array_t<double, py::array::c_style | py::array::forcecast> a) {
    return {a.data(), a.data() + a.size()};
}

py::array_t<double> matrix_to_array(const Eigen::MatrixXd& m) {
    py::array_t<double> out({static_cast<py::ssize_t>(m.rows()), static_cast<py::ssize_t>(m.cols())});
    auto buf = out.mutable_unchecked<2>();
    for (py::ssize_t i = 0; i < m.rows(); ++i)
        for (py::ssize_t j = 0; j < m.cols(); ++j) buf(i, j) = m(i, j);
    return out;
}

}  // namespace

PYBIND11_MODULE(circlechaos, m) {
    m.doc() = "approximation schemes for log-correlated Gaussian chaos on the circle";

    py::enum_<Scheme>(m, "Scheme")
        .value("LimitCircle", Scheme::LimitCircle)
        .value("FourierPartial", Scheme::FourierPartial)
        .value("WhiteNoiseCone", Scheme::WhiteNoiseCone)
        .value("ConvolutionSpectral", Scheme::ConvolutionSpectral)
        .value("Vaguelet", Scheme::Vaguelet)
        .value("ExactConeInterval", Scheme::ExactConeInterval);

    py::enum_<Mollifier>(m, "Mollifier")
        .value("Gaussian", Mollifier::Gaussian)
        .value("Poisson", Mollifier::Poisson);

    py::class_<GridDomain>(m, "GridDomain")
        .def_static("circle", &GridDomain::circle, py::arg("m"))
        .def_static("interval", &GridDomain::interval, py::arg("m"))
        .def_readonly("m", &GridDomain::m)
        .def("point", &GridDomain::point)
        .def("distance", &GridDomain::distance)
        .def_property_readonly("cell_width", &GridDomain::cell_width);

    py::class_<CovarianceSpec>(m, "CovarianceSpec")
        .def(py::init([](Scheme scheme, double level, Mollifier mol, double beta) {
                 CovarianceSpec s{scheme, level, mol, beta};
                 s.validate();
                 return s;
             }),
             py::arg("scheme"), py::arg("level"), py::arg("mollifier") = Mollifier::Gaussian,
             py::arg("beta") = 1.0)
        .def_readonly("scheme", &CovarianceSpec::scheme)
        .def_readonly("level", &CovarianceSpec::level)
        .def_readonly("beta", &CovarianceSpec::beta);

    // kernels
    m.def("log_kernel_circle", &log_kernel_circle, py::arg("d"));
    m.def("fourier_cov", &fourier_cov, py::arg("n"), py::arg("d"));
    m.def("whitenoise_cov", &whitenoise_cov, py::arg("t"), py::arg("d"));
    m.def("whitenoise_branch_point", &whitenoise_branch_point, py::arg("t"));
    m.def("conv_multiplier", &conv_multiplier, py::arg("mollifier"), py::arg("eps"), py::arg("k"));
    m.def("convolution_cov", &convolution_cov, py::arg("mollifier"), py::arg("n"), py::arg("d"));
    m.def("vaguelet_cov", &vaguelet_cov, py::arg("n"), py::arg("x"), py::arg("y"));
    m.def("haar_vaguelet_coeff", &haar_vaguelet_coeff, py::arg("j"), py::arg("k"), py::arg("freq"));
    m.def("exact_cone_cov_interval", &exact_cone_cov_interval, py::arg("t"), py::arg("x"),
          py::arg("y"));
    m.def("localization_delta0", &localization_delta0);
    m.def(
        "build_cov_matrix",
        [](const CovarianceSpec& spec, const GridDomain& grid) {
            CovMatrix c = build_cov_matrix(spec, grid);
            return py::make_tuple(matrix_to_array(c.entries), c.jitter);
        },
        py::arg("spec"), py::arg("grid"), "returns (matrix, jitter)");

    // samplers
    py::class_<FieldSample>(m, "FieldSample")
        .def_property_readonly("values", [](const FieldSample& f) { return to_array(f.values); })
        .def_property_readonly("variance", [](const FieldSample& f) { return to_array(f.variance); })
        .def_readonly("beta_prescaled", &FieldSample::beta_prescaled);

    m.def(
        "sample_field",
        [](const CovarianceSpec& spec, const GridDomain& grid, std::uint64_t seed,
           std::uint64_t replica) {
            spec.validate();
            switch (spec.scheme) {
                case Scheme::FourierPartial: {
                    RngStream rng(seed, replica, purpose::fourier_field);
                    return sample_fourier_field(spec.level_int(), grid, rng).first;
                }
                case Scheme::ConvolutionSpectral: {
                    RngStream rng(seed, replica, purpose::convolution_field);
                    auto coeffs = draw_spectral_coefficients(
                        static_cast<int>(conv_freq_cutoff(spec.level_int())), rng);
                    return sample_convolution_field(coeffs, spec.mollifier,
                                                    1.0 / spec.level_int(), grid);
                }
                case Scheme::Vaguelet: {
                    RngStream rng(seed, replica, purpose::vaguelet_field);
                    return sample_vaguelet_field(spec.level_int(), grid, rng);
                }
                case Scheme::WhiteNoiseCone:
                case Scheme::ExactConeInterval: {
                    RngStream rng(seed, replica, purpose::cholesky_field);
                    return sample_cholesky_field(spec, grid, rng);
                }
                default:
                    throw std::invalid_argument("sample_field: no sampler for this scheme");
            }
        },
        py::arg("spec"), py::arg("grid"), py::arg("seed"), py::arg("replica") = 0,
        "one reproducible realization of the approximating field");

    // chaos measures
    py::enum_<NormKind>(m, "NormKind")
        .value("Lebesgue", NormKind::Lebesgue)
        .value("SqrtLogN", NormKind::SqrtLogN)
        .value("SqrtNLog2", NormKind::SqrtNLog2)
        .value("SqrtT", NormKind::SqrtT);

    py::class_<ChaosMeasure>(m, "ChaosMeasure")
        .def_property_readonly("weights", [](const ChaosMeasure& c) { return to_array(c.weights); })
        .def_property_readonly("total_mass", [](const ChaosMeasure& c) { return total_mass(c); });

    m.def(
        "build_measure",
        [](const FieldSample& f, double beta, NormKind kind, double parameter) {
            return build_measure(f, beta, NormalizationRule{kind, parameter});
        },
        py::arg("field"), py::arg("beta") = 1.0, py::arg("norm") = NormKind::Lebesgue,
        py::arg("parameter") = 0.0);
    m.def("normalization_factor", [](NormKind kind, double parameter) {
        return normalization_factor(NormalizationRule{kind, parameter});
    });
    m.def(
        "integrate",
        [](const ChaosMeasure& mu, py::array_t<double, py::array::c_style | py::array::forcecast> f) {
            auto v = to_vector(f);
            return integrate(mu, v);
        },
        py::arg("measure"), py::arg("f"));

    // statistics
    m.def(
        "ks_two_sample",
        [](py::array_t<double, py::array::c_style | py::array::forcecast> xs,
           py::array_t<double, py::array::c_style | py::array::forcecast> ys) {
            auto x = to_vector(xs);
            auto y = to_vector(ys);
            KsResult r = ks_two_sample(x, y);
            return py::make_tuple(r.statistic, r.p_value);
        },
        py::arg("xs"), py::arg("ys"), "returns (D, p_value)");
    m.def(
        "second_moment_quadrature",
        [](double beta, const CovarianceSpec& spec) { return second_moment_quadrature(beta, spec); },
        py::arg("beta"), py::arg("spec"));
    m.def("kr_distance", &kr_distance, py::arg("a"), py::arg("b"));
    m.def("analytic_mass_variance", &analytic_mass_variance, py::arg("spec"), py::arg("grid"),
          py::arg("beta"));
    m.def("matched_vaguelet_level", &matched_vaguelet_level, py::arg("n"), py::arg("grid"));

    // experiment runner
    m.def(
        "run_experiment",
        [](const std::string& config_json) {
            ExperimentConfig cfg = parse_config_json(nlohmann::json::parse(config_json));
            ExperimentReport rep = run_experiment(cfg);
            return rep.to_json().dump();
        },
        py::arg("config_json"),
        "run an experiment from a JSON string; returns the report as JSON");
    m.def("list_experiments", [] {
        std::vector<std::string> out;
        for (ExperimentKind k : all_experiment_kinds()) out.emplace_back(experiment_kind_name(k));
        return out;
    });
}
