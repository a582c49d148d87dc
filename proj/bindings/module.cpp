#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <random>

#include "anosov/conjugacy.hpp"
#include "anosov/livsic.hpp"
#include "anosov/shadowing.hpp"
#include "anosov/srb.hpp"

namespace py = pybind11;
using namespace anosov;

namespace {

std::pair<double, double> to_pair(const TorusPoint& p) { return {p.x, p.y}; }

TorusPoint from_pair(const std::pair<double, double>& p) { return {p.first, p.second}; }

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Anosov endomorphism laboratory: toral models, hyperbolic bundles, "
              "periodic data, Livsic solves, SRB densities and conjugacies";

    py::register_exception<AnosovError>(m, "AnosovError");

    py::class_<ToralEndomorphism>(m, "ToralEndomorphism")
        .def_static("from_json", &ToralEndomorphism::from_json, py::arg("text"))
        .def_static("load", &ToralEndomorphism::load_file, py::arg("path"))
        .def("to_json", &ToralEndomorphism::to_json)
        .def_property_readonly("degree", &ToralEndomorphism::degree)
        .def_property_readonly("name", &ToralEndomorphism::name)
        .def_property_readonly("lambda_u",
                               [](const ToralEndomorphism& f) { return f.eigen().lambda_u(); })
        .def_property_readonly("lambda_s",
                               [](const ToralEndomorphism& f) { return f.eigen().lambda_s(); })
        .def("apply",
             [](const ToralEndomorphism& f, std::pair<double, double> p) {
                 return to_pair(f.apply(from_pair(p)));
             })
        .def("jacobian",
             [](const ToralEndomorphism& f, std::pair<double, double> p) {
                 Mat2 j = f.jacobian(from_pair(p));
                 return std::vector<std::vector<double>>{{j.a, j.b}, {j.c, j.d}};
             })
        .def("preimages", [](const ToralEndomorphism& f, std::pair<double, double> p) {
            std::vector<std::pair<double, double>> out;
            for (const auto& q : f.preimages(from_pair(p))) out.push_back(to_pair(q));
            return out;
        });

    m.def(
        "certify_cones",
        [](const ToralEndomorphism& f, double half_u, double half_s, double lambda, int grid) {
            ConeCertificate c = certify_cones(f, ConeParams{half_u, half_s, lambda, 1.0}, grid);
            py::dict d;
            d["passed"] = c.passed;
            d["min_growth_u"] = c.min_growth_u;
            d["min_growth_s_inv"] = c.min_growth_s_inv;
            d["margin_u"] = c.margin_u;
            d["margin_s"] = c.margin_s;
            return d;
        },
        py::arg("f"), py::arg("half_angle_u") = 0.3, py::arg("half_angle_s") = 0.3,
        py::arg("lambda_required") = 1.0, py::arg("grid") = 128);

    m.def(
        "find_periodic",
        [](const ToralEndomorphism& f, int n) {
            py::list out;
            for (const auto& o : find_periodic(f, n)) {
                py::dict d;
                d["period"] = o.period;
                std::vector<std::pair<double, double>> pts;
                for (const auto& p : o.points) pts.push_back(to_pair(p));
                d["points"] = pts;
                d["lambda_u"] = o.lambda_u;
                d["lambda_s"] = o.lambda_s;
                out.append(d);
            }
            return out;
        },
        py::arg("f"), py::arg("n"));

    m.def(
        "specialness_spread",
        [](const ToralEndomorphism& f, std::pair<double, double> p, int depth, int trials,
           std::uint64_t seed) {
            std::mt19937_64 rng(seed);
            return specialness_spread(f, from_pair(p), depth, trials, rng);
        },
        py::arg("f"), py::arg("p"), py::arg("depth") = 30, py::arg("trials") = 6,
        py::arg("seed") = 7);

    m.def(
        "entropy_report",
        [](const ToralEndomorphism& f, std::uint64_t seed, int orbit_length, int sep_grid) {
            auto r = entropy_report(f, seed, orbit_length, 100, 12, sep_grid);
            py::dict d;
            d["lambda_u"] = r.lambda_u;
            d["lambda_s"] = r.lambda_s;
            d["log_k"] = r.log_k;
            d["h_plus"] = r.h_plus;
            d["h_minus"] = r.h_minus;
            d["sum_defect"] = r.sum_defect;
            d["separated_set_entropy"] = r.sep_entropy;
            return d;
        },
        py::arg("f"), py::arg("seed") = 7, py::arg("orbit_length") = 10000,
        py::arg("sep_grid") = 1024);

    m.def(
        "solve_livsic",
        [](const ToralEndomorphism& f, int N, int F) {
            auto du = DirectionField::compute(f, DirectionField::Flag::Unstable, N, 30);
            auto obs = observable_log_unstable(f, du, N);
            auto sol = solve_cohomology(f, obs.psi, F);
            py::dict d;
            d["lambda_u"] = obs.lambda_u;
            d["max_periodic_mean"] = obs.max_periodic_mean;
            d["sup_residual"] = sol.sup_residual;
            d["iterations"] = sol.iterations;
            return d;
        },
        py::arg("f"), py::arg("N") = 128, py::arg("F") = 16);

    m.def(
        "base_conjugacy",
        [](const ToralEndomorphism& f, int N) {
            ConjugacyOptions o;
            o.N = N;
            o.residual_grid = 128;
            auto h = base_conjugacy(f, o);
            py::dict d;
            d["residual"] = h.residual();
            d["sweeps"] = h.sweeps();
            d["displacement_sup"] = h.displacement_sup();
            return d;
        },
        py::arg("f"), py::arg("N") = 129);

    m.def(
        "spectrum_diagnostics",
        [](const std::vector<std::vector<std::int64_t>>& matrix) {
            auto r = spectrum_diagnostics(matrix);
            py::dict d;
            d["dim"] = r.dim;
            d["hyperbolic"] = r.hyperbolic;
            d["n_expanding"] = r.n_expanding;
            d["n_contracting"] = r.n_contracting;
            d["sum_log_expanding"] = r.sum_log_expanding;
            d["moduli_sorted"] = r.moduli;
            return d;
        },
        py::arg("matrix"));
}
