#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "qrisk/ae.hpp"
#include "qrisk/finance.hpp"
#include "qrisk/risk.hpp"

namespace py = pybind11;
using namespace qrisk;

PYBIND11_MODULE(qrisk, mod) {
    mod.doc() = "Amplitude-estimation risk toolkit on a statevector simulator";

    py::class_<circuits::DiscreteDistribution>(mod, "DiscreteDistribution")
        .def(py::init<std::vector<double>, double, double>(), py::arg("probs"), py::arg("slope") = 1.0,
             py::arg("offset") = 0.0)
        .def_static("with_values", &circuits::DiscreteDistribution::with_values, py::arg("probs"), py::arg("values"))
        .def_static("product", &circuits::DiscreteDistribution::product, py::arg("low"), py::arg("high"),
                    py::arg("values") = std::nullopt)
        .def_property_readonly("num_qubits", &circuits::DiscreteDistribution::num_qubits)
        .def_property_readonly("probs", &circuits::DiscreteDistribution::probs)
        .def("values", &circuits::DiscreteDistribution::values)
        .def("value", &circuits::DiscreteDistribution::value)
        .def("sorted_by_value", [](const circuits::DiscreteDistribution& d) {
            std::vector<std::size_t> order;
            auto s = d.sorted_by_value(&order);
            return py::make_tuple(s, order);
        })
        .def("__len__", &circuits::DiscreteDistribution::size);

    py::class_<circuits::BitPolynomial>(mod, "BitPolynomial")
        .def_static("affine", &circuits::BitPolynomial::affine, py::arg("c0"), py::arg("weights"))
        .def_static("from_table", &circuits::BitPolynomial::from_table, py::arg("values"))
        .def("table", &circuits::BitPolynomial::table)
        .def("__call__", [](const circuits::BitPolynomial& f, std::uint64_t i) { return f(i); });

    py::class_<approx::ApproxParams>(mod, "ApproxParams")
        .def(py::init([](double c, int u, int s) { return approx::ApproxParams{c, u, s}; }), py::arg("c") = 1.0,
             py::arg("u") = 0, py::arg("s") = 1)
        .def_readwrite("c", &approx::ApproxParams::c)
        .def_readwrite("u", &approx::ApproxParams::u)
        .def_readwrite("s", &approx::ApproxParams::s);
    mod.def("approx_error_bound", &approx::approx_error_bound);
    mod.def("optimal_scaling", [](double eps, int u) { return approx::optimal_scaling(eps, u).c; });

    py::class_<risk::AESettings>(mod, "AESettings")
        .def(py::init([](int m, std::uint64_t shots, std::uint64_t seed) { return risk::AESettings{m, shots, seed}; }),
             py::arg("m") = 5, py::arg("shots") = 8192, py::arg("seed") = 0)
        .def_readwrite("m", &risk::AESettings::m)
        .def_readwrite("shots", &risk::AESettings::shots)
        .def_readwrite("seed", &risk::AESettings::seed);

    py::class_<ae::AEResult>(mod, "AEResult")
        .def_readonly("m", &ae::AEResult::m)
        .def_readonly("M", &ae::AEResult::M)
        .def_readonly("modal_y", &ae::AEResult::modal_y)
        .def_readonly("estimate", &ae::AEResult::estimate)
        .def_readonly("half_width", &ae::AEResult::half_width)
        .def_readonly("probabilities", &ae::AEResult::probabilities)
        .def_property_readonly("interval", [](const ae::AEResult& r) { return py::make_tuple(r.interval.low, r.interval.high); })
        .def_property_readonly("counts", [](const ae::AEResult& r) { return r.counts.counts; });
    mod.def("estimate_of", &ae::estimate_of, py::arg("y"), py::arg("m"));
    mod.def("standard_bound", &ae::standard_bound, py::arg("m"));
    mod.def(
        "estimate_expectation",
        [](const circuits::DiscreteDistribution& d, const circuits::BitPolynomial& f, const approx::ApproxParams& p,
           const risk::AESettings& s) {
            const auto e = risk::estimate_expectation(d, f, p, s);
            return py::make_tuple(e.value, e.bound, e.ae);
        },
        py::arg("dist"), py::arg("f"), py::arg("params"), py::arg("settings"),
        "Returns (value, bound, AEResult).");

    py::class_<risk::RiskReport>(mod, "RiskReport")
        .def_property_readonly("method", [](const risk::RiskReport& r) { return risk::method_name(r.method); })
        .def_readonly("alpha", &risk::RiskReport::alpha)
        .def_readonly("expectation", &risk::RiskReport::expectation)
        .def_readonly("variance", &risk::RiskReport::variance)
        .def_readonly("var_index", &risk::RiskReport::var_index)
        .def_readonly("var_value", &risk::RiskReport::var_value)
        .def_readonly("var_probability", &risk::RiskReport::var_probability)
        .def_readonly("cvar", &risk::RiskReport::cvar)
        .def_readonly("cvar_index", &risk::RiskReport::cvar_index)
        .def_readonly("low_confidence", &risk::RiskReport::low_confidence)
        .def_property_readonly("bounds", [](const risk::RiskReport& r) {
            py::dict d;
            d["expectation"] = r.bounds.expectation;
            d["variance"] = r.bounds.variance;
            d["var"] = r.bounds.var;
            d["cvar"] = r.bounds.cvar;
            return d;
        });
    mod.def("classical_oracle", &risk::classical_oracle, py::arg("dist"), py::arg("f"), py::arg("alpha"));
    mod.def("quantum_risk", &risk::quantum_risk, py::arg("dist"), py::arg("f"), py::arg("alpha"), py::arg("params"),
            py::arg("settings"));
    mod.def("monte_carlo_risk", &risk::monte_carlo_risk, py::arg("dist"), py::arg("f"), py::arg("alpha"),
            py::arg("samples"), py::arg("seed"));
    mod.def("cvar_error_bound", &risk::cvar_error_bound);

    auto fin = mod.def_submodule("finance", "Rates, PCA and the bond models");
    py::class_<finance::RateSeries>(fin, "RateSeries")
        .def_readonly("dates", &finance::RateSeries::dates)
        .def_readonly("tenors", &finance::RateSeries::tenors)
        .def_readonly("rates", &finance::RateSeries::rates)
        .def("rows", &finance::RateSeries::rows);
    fin.def("load_cmt", &finance::load_cmt, py::arg("path"));
    fin.def("synthetic_cmt", &finance::synthetic_cmt, py::arg("rows") = 5200, py::arg("seed") = 2019);
    fin.def("daily_differences", &finance::daily_differences);
    py::class_<finance::PCAResult>(fin, "PCAResult")
        .def_readonly("components", &finance::PCAResult::components)
        .def_readonly("eigenvalues", &finance::PCAResult::eigenvalues)
        .def_readonly("explained", &finance::PCAResult::explained)
        .def_readonly("scores", &finance::PCAResult::scores);
    fin.def("pca", &finance::pca, py::arg("data"));
    fin.def("tbill_value", [](double p, double r, double dr, double face) {
        const auto v = finance::tbill_value(p, r, dr, face);
        return py::make_tuple(v.value, v.low, v.high, v.mapped);
    });
    fin.def("portfolio_value", [](double r1, double r2) { return finance::portfolio_value(r1, r2, {}); });
    py::class_<finance::Linearization>(fin, "Linearization")
        .def_readonly("a0", &finance::Linearization::a0)
        .def_readonly("ax", &finance::Linearization::ax)
        .def_readonly("ay", &finance::Linearization::ay)
        .def_readonly("value_at_mid", &finance::Linearization::value_at_mid)
        .def_readonly("b0", &finance::Linearization::b0)
        .def_readonly("bx", &finance::Linearization::bx)
        .def_readonly("by", &finance::Linearization::by)
        .def("to_usd", &finance::Linearization::to_usd);
    fin.def(
        "linearize_portfolio",
        [](double rate_scale) {
            return finance::linearize_portfolio({}, finance::reference_loadings(), finance::shift_grid(),
                                                finance::twist_grid(), 3, 2, rate_scale);
        },
        py::arg("rate_scale") = 1.0, "Default portfolio with the reference loadings and grids.");
    py::class_<finance::TwoAssetModel>(fin, "TwoAssetModel")
        .def_readonly("w", &finance::TwoAssetModel::w)
        .def_readonly("joint", &finance::TwoAssetModel::joint)
        .def_readonly("sorted", &finance::TwoAssetModel::sorted)
        .def_readonly("order", &finance::TwoAssetModel::order)
        .def_readonly("f", &finance::TwoAssetModel::f)
        .def_readonly("lin", &finance::TwoAssetModel::lin)
        .def_readonly("shift_twist_correlation", &finance::TwoAssetModel::shift_twist_correlation);
    fin.def(
        "build_two_asset_model",
        [](const finance::RateSeries& s, double rate_scale) {
            finance::TwoAssetConfig cfg;
            cfg.rate_scale = rate_scale;
            return finance::build_two_asset_model(s, cfg);
        },
        py::arg("series"), py::arg("rate_scale") = 1.0);
}
