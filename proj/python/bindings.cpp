#include "mtikh/experiment.hpp"
#include "mtikh/problems.hpp"
#include "mtikh/selection.hpp"
#include "mtikh/solvers.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace mtikh;

namespace {

RegParams to_params(std::pair<double, double> eta)
{
    return {eta.first, eta.second};
}

py::tuple as_tuple(const RegParams& eta)
{
    return py::make_tuple(eta.eta1(), eta.eta2());
}

PenaltyModel model_from(const Problem& p, const std::string& name)
{
    return parse_model(name, p.grid().h, p.shape());
}

SelectionOptions selection_options(double gamma, double c_m, std::optional<std::pair<double, double>> eta0,
                                   std::optional<double> tol, std::optional<int> max_iter)
{
    SelectionOptions o;
    o.gamma = gamma;
    o.c_m = c_m;
    if (eta0) {
        o.eta0 = to_params(*eta0);
    }
    o.outer_tol = tol;
    o.outer_max_iter = max_iter;
    return o;
}

}  // namespace

PYBIND11_MODULE(_mtikh, m)
{
    m.doc() = "Two-parameter Tikhonov regularization with balanced discrepancy selection";

    auto error = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<InvalidArgument>(m, "InvalidArgument", PyExc_ValueError);
    py::register_exception<SingularSystem>(m, "SingularSystem", error.ptr());
    py::register_exception<DegenerateValue>(m, "DegenerateValue", error.ptr());
    py::register_exception<PenaltyDegenerate>(m, "PenaltyDegenerate", error.ptr());
    py::register_exception<MissingTruth>(m, "MissingTruth", error.ptr());
    py::register_exception<SelectionFailure>(m, "SelectionFailure", error.ptr());

    py::class_<Problem>(m, "Problem")
        .def(py::init([](Matrix K, Vector g_obs, double delta, std::optional<Vector> u_true, double a, double b,
                         std::optional<std::pair<int, int>> shape) {
                 const Eigen::Index n = K.cols();
                 Shape s = shape ? Shape{shape->first, shape->second} : Shape{int(n), 1};
                 Grid grid{a, b, (b - a) / double(s.is_image() ? s.rows : n)};
                 return Problem(std::move(K), std::move(g_obs), delta, grid, s, std::move(u_true));
             }),
             py::arg("K"), py::arg("g_obs"), py::arg("delta"), py::arg("u_true") = py::none(), py::arg("a") = 0.0,
             py::arg("b") = 1.0, py::arg("shape") = py::none())
        .def_property_readonly("K", &Problem::K)
        .def_property_readonly("g_obs", &Problem::g_obs)
        .def_property_readonly("delta", &Problem::delta)
        .def_property_readonly("u_true", &Problem::u_true)
        .def_property_readonly("g_true", &Problem::g_true)
        .def_property_readonly("h", [](const Problem& p) { return p.grid().h; })
        .def_property_readonly("shape", [](const Problem& p) { return py::make_tuple(p.shape().rows, p.shape().cols); })
        .def_property_readonly("m", &Problem::m)
        .def_property_readonly("n", &Problem::n);

    py::class_<TikhonovSolution>(m, "Solution")
        .def_readonly("u", &TikhonovSolution::u)
        .def_readonly("phi", &TikhonovSolution::phi)
        .def_property_readonly("psi", [](const TikhonovSolution& s) { return py::make_tuple(s.psi[0], s.psi[1]); })
        .def_readonly("iterations", &TikhonovSolution::iterations)
        .def_readonly("converged", &TikhonovSolution::converged);

    py::class_<TraceEntry>(m, "TraceEntry")
        .def_readonly("iter", &TraceEntry::iter)
        .def_readonly("eta1", &TraceEntry::eta1)
        .def_readonly("eta2", &TraceEntry::eta2)
        .def_readonly("phi", &TraceEntry::phi)
        .def_readonly("psi1", &TraceEntry::psi1)
        .def_readonly("psi2", &TraceEntry::psi2)
        .def_readonly("residual_norm", &TraceEntry::residual_norm);

    py::class_<SelectionResult>(m, "SelectionResult")
        .def_property_readonly("eta", [](const SelectionResult& r) { return as_tuple(r.eta_star); })
        .def_readonly("solution", &SelectionResult::solution)
        .def_readonly("trace", &SelectionResult::trace)
        .def_readonly("weight_t", &SelectionResult::weight_t)
        .def_readonly("converged", &SelectionResult::converged)
        .def_readonly("iterations", &SelectionResult::iterations);

    m.def(
        "make_test_problem",
        [](const std::string& example, double eps, std::uint64_t seed, int n) {
            return make_test_problem(parse_example(example), n, eps, seed);
        },
        py::arg("example"), py::arg("eps"), py::arg("seed") = 1, py::arg("n") = 0,
        "Benchmark problem 'ex41', 'ex42' or 'ex43' at relative noise level eps.");

    m.def("default_model", [](const std::string& example, const Problem& p) {
        return to_string(model_for(parse_example(example), p).id);
    });

    m.def(
        "solve",
        [](const Problem& p, const std::string& model, std::pair<double, double> eta) {
            return solve_tikhonov(p, model_from(p, model), to_params(eta));
        },
        py::arg("problem"), py::arg("model"), py::arg("eta"),
        "Minimize 1/2|Ku - g|^2 + eta1 psi1 + eta2 psi2; model is 'h1-tv', 'elastic-net' or 'quad-quad'.");

    m.def(
        "value_function",
        [](const Problem& p, const std::string& model, std::pair<double, double> eta) {
            return value_function(p, model_from(p, model), to_params(eta));
        },
        py::arg("problem"), py::arg("model"), py::arg("eta"));

    m.def(
        "residual_bdp",
        [](const Problem& p, const std::string& model, std::pair<double, double> eta, double c_m) {
            return residual_bdp(p, model_from(p, model), to_params(eta), p.delta(), c_m);
        },
        py::arg("problem"), py::arg("model"), py::arg("eta"), py::arg("c_m") = 1.0);

    m.def(
        "select_broyden",
        [](const Problem& p, const std::string& model, double c_m, std::optional<std::pair<double, double>> eta0,
           std::optional<double> tol, std::optional<int> max_iter) {
            py::gil_scoped_release release;
            return select_broyden(p, model_from(p, model), p.delta(),
                                  selection_options(1.0, c_m, eta0, tol, max_iter));
        },
        py::arg("problem"), py::arg("model"), py::arg("c_m") = 1.0, py::arg("eta0") = py::none(),
        py::arg("tol") = py::none(), py::arg("max_iter") = py::none());

    m.def(
        "select_fixed_point",
        [](const Problem& p, const std::string& model, double gamma, std::optional<std::pair<double, double>> eta0,
           std::optional<double> tol, std::optional<int> max_iter) {
            py::gil_scoped_release release;
            return select_fixed_point(p, model_from(p, model), gamma,
                                      selection_options(gamma, 1.0, eta0, tol, max_iter));
        },
        py::arg("problem"), py::arg("model"), py::arg("gamma") = 1.0, py::arg("eta0") = py::none(),
        py::arg("tol") = py::none(), py::arg("max_iter") = py::none());

    m.def(
        "oracle_grid",
        [](const Problem& p, const std::string& model, double lo, double hi, int count) {
            const OracleResult r = [&] {
                py::gil_scoped_release release;
                return oracle_grid(p, model_from(p, model), GridSpec::square(lo, hi, count));
            }();
            return py::make_tuple(as_tuple(r.eta), r.error);
        },
        py::arg("problem"), py::arg("model"), py::arg("lo") = 1e-10, py::arg("hi") = 1.0, py::arg("count") = 25,
        "Returns ((eta1, eta2), relative error) of the best grid point.");

    m.def("relative_error", &relative_error, py::arg("u"), py::arg("u_true"));
}
