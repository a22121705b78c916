// Python bindings. Matrices cross the boundary as complex128 NumPy arrays;
// real inputs are promoted.

#include <algorithm>
#include <optional>

#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "balsel/balancing.hpp"
#include "balsel/evaluation.hpp"
#include "balsel/gramian.hpp"
#include "balsel/models.hpp"
#include "balsel/selection.hpp"
#include "balsel/statespace.hpp"

namespace py = pybind11;
using namespace balsel;

namespace {

TimeDomain domain_of(bool discrete) { return discrete ? TimeDomain::discrete : TimeDomain::continuous; }

StateSpaceModel model_of(const Matrix& a, const Matrix& b, const Matrix& c, bool discrete) {
    return StateSpaceModel(a, b, c, domain_of(discrete));
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Balanced-mode sensor and actuator selection";

    auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<DimensionError>(m, "DimensionError", base.ptr());
    py::register_exception<SingularityError>(m, "SingularityError", base.ptr());
    py::register_exception<DomainError>(m, "DomainError", base.ptr());
    py::register_exception<NumericError>(m, "NumericError", base.ptr());
    py::register_exception<RankError>(m, "RankError", base.ptr());
    py::register_exception<FeasibilityError>(m, "FeasibilityError", base.ptr());
    py::register_exception<SynthesisError>(m, "SynthesisError", base.ptr());
    py::register_exception<SizeError>(m, "SizeError", base.ptr());
    py::register_exception<HorizonError>(m, "HorizonError", base.ptr());

    m.def("solve_lyapunov", &solve_lyapunov_continuous, py::arg("a"), py::arg("m"),
          "W with A W + W A* + M = 0.");
    m.def("solve_stein", &solve_stein, py::arg("a"), py::arg("m"), "W with A W A* - W + M = 0.");
    m.def("solve_care", &solve_care, py::arg("a"), py::arg("b"), py::arg("q"), py::arg("r"),
          "Stabilizing solution of A*X + XA - XBR^-1B*X + Q = 0.");

    m.def(
        "gramians",
        [](const Matrix& a, const Matrix& b, const Matrix& c, bool discrete) {
            const GramianPair w = compute_gramians(model_of(a, b, c, discrete));
            return py::make_tuple(w.w_c, w.w_o);
        },
        py::arg("a"), py::arg("b"), py::arg("c"), py::arg("discrete") = false,
        "Controllability and observability gramians (W_c, W_o).");

    m.def(
        "h2_norm",
        [](const Matrix& a, const Matrix& b, const Matrix& c, bool discrete) {
            const StateSpaceModel s = model_of(a, b, c, discrete);
            return h2_norm_gramian(s, compute_gramians(s));
        },
        py::arg("a"), py::arg("b"), py::arg("c"), py::arg("discrete") = false);

    m.def(
        "pivoted_qr",
        [](const Matrix& v) {
            const PivotedQR f = pivoted_qr(v);
            return py::make_tuple(f.pivot_order, f.r_diagonal);
        },
        py::arg("v"), "Column pivot order and |R_ii| of the Businger-Golub factorization.");

    m.def(
        "balance",
        [](const Matrix& wc, const Matrix& wo, Index r) {
            GramianPair w;
            w.w_c = wc;
            w.w_o = wo;
            const BalancedRealization bal = balance(w, r);
            return py::make_tuple(bal.psi_r, bal.phi_r, bal.hankel);
        },
        py::arg("wc"), py::arg("wo"), py::arg("r"), "(psi_r, phi_r, hankel values).");

    m.def(
        "select",
        [](const Matrix& a, const Matrix& b, const Matrix& c, Index r, bool discrete, bool no_collocate) {
            const StateSpaceModel s = model_of(a, b, c, discrete);
            const BalancedRealization bal = balance(compute_gramians(s), r);
            const SelectionResult sel = no_collocate ? select_noncollocated(s.c(), s.b(), bal.psi_r, bal.phi_r)
                                                     : select_collocated(s.c(), s.b(), bal.psi_r, bal.phi_r);
            return py::make_tuple(sel.gamma, sel.beta);
        },
        py::arg("a"), py::arg("b"), py::arg("c"), py::arg("r"), py::arg("discrete") = false,
        py::arg("no_collocate") = false, "Sensor rows and actuator columns in pivot order.");

    m.def(
        "random_system",
        [](Index n, Index p, Index q, std::uint64_t seed, bool discrete) {
            const StateSpaceModel s = random_stable_system(n, p, q, seed, domain_of(discrete));
            return py::make_tuple(s.a(), s.b(), s.c());
        },
        py::arg("n"), py::arg("p"), py::arg("q"), py::arg("seed"), py::arg("discrete") = false);

    m.def(
        "brute_force",
        [](const Matrix& gram, Index budget, std::optional<std::uint64_t> cap) {
            const BruteForceResult bf = brute_force(gram, budget, cap.value_or(enumeration_cap()));
            return py::make_tuple(bf.best_indices, bf.best_value, bf.values);
        },
        py::arg("gram"), py::arg("budget"), py::arg("cap") = py::none(),
        "(best subset, best log-det, all values in lexicographic order).");

    m.def(
        "logdet",
        [](const Matrix& gram, std::vector<Index> indices) {
            std::sort(indices.begin(), indices.end());
            return cholesky_logdet(gram, indices);
        },
        py::arg("gram"), py::arg("indices"));

    m.def(
        "gl_place",
        [](Index r, bool no_collocate) {
            const GLPipeline pipe = gl_prepare(GinzburgLandauParams{});
            const GLPlacement pl = gl_place(pipe, r, no_collocate);
            py::dict out;
            out["sensors"] = pl.sensors;
            out["actuators"] = pl.actuators;
            out["sensor_coords"] = pl.sensor_coords;
            out["actuator_coords"] = pl.actuator_coords;
            out["h2"] = pl.h2;
            out["full_h2"] = pipe.full_h2;
            out["stable"] = pl.stable;
            return out;
        },
        py::arg("r") = 5, py::arg("no_collocate") = false,
        "Balanced-controller placement on the default Ginzburg-Landau model.");
}
