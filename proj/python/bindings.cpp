#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "dln/adaptive.hpp"
#include "dln/coefficients.hpp"
#include "dln/experiments.hpp"
#include "dln/model.hpp"

namespace py = pybind11;
using namespace dln;

namespace {

ExperimentConfig config_from_kwargs(const std::string& problem, const std::string& scheme,
                                    double theta, double epsilon, int mesh_n, double t_final,
                                    const std::string& policy, double k, std::uint64_t seed,
                                    double tol, double kappa, double k_min, double k_max,
                                    double k0, double fp_tol, double sav_c0,
                                    std::uint64_t ic_seed, const std::string& out_dir) {
    ExperimentConfig cfg;
    cfg.problem = problem_from_string(problem);
    cfg.scheme = scheme_from_string(scheme);
    cfg.theta = theta;
    cfg.epsilon = epsilon;
    cfg.mesh_n = mesh_n;
    cfg.t_final = t_final;
    cfg.policy.kind = policy_from_string(policy);
    cfg.policy.k_ref = k;
    cfg.policy.seed = seed;
    cfg.policy.adapt = AdaptConfig{tol, k_min, k_max, kappa, k0};
    cfg.fp_tol = fp_tol;
    cfg.sav_c0 = sav_c0;
    cfg.ic_seed = ic_seed;
    cfg.out_dir = out_dir;
    cfg.resolve();
    return cfg;
}

constexpr auto kConfigArgs = R"(problem/scheme/theta select the model; policy is
constant | random | alternating | adaptive; remaining knobs mirror the CLI.)";

}  // namespace

PYBIND11_MODULE(dlnac, m) {
    m.doc() = "Variable time-stepping solvers for the Allen-Cahn equation";
    m.attr("__version__") = "0.1.0";

    py::class_<DlnCoefficients>(m, "Coefficients")
        .def_readonly("alpha", &DlnCoefficients::alpha)
        .def_readonly("beta", &DlnCoefficients::beta)
        .def_readonly("gamma", &DlnCoefficients::gamma)
        .def_readonly("eps_n", &DlnCoefficients::eps_n)
        .def_readonly("k_hat", &DlnCoefficients::k_hat);

    m.def(
        "coefficients",
        [](double theta, double k, double k_prev) {
            return dln_coefficients(theta, {k, k_prev});
        },
        py::arg("theta"), py::arg("k"), py::arg("k_prev"),
        "Per-step alpha/beta/gamma bundle of the two-step theta family");

    m.def(
        "step_variability",
        [](double k, double k_prev) { return step_variability({k, k_prev}); }, py::arg("k"),
        py::arg("k_prev"));

    py::class_<RefactorCoefficients>(m, "RefactorCoefficients")
        .def_readonly("a1", &RefactorCoefficients::a1)
        .def_readonly("a0", &RefactorCoefficients::a0)
        .def_readonly("b", &RefactorCoefficients::b)
        .def_readonly("c2", &RefactorCoefficients::c2)
        .def_readonly("c1", &RefactorCoefficients::c1)
        .def_readonly("c0", &RefactorCoefficients::c0);

    m.def(
        "refactor_coefficients",
        [](double theta, double k, double k_prev) {
            return refactor_coefficients(dln_coefficients(theta, {k, k_prev}));
        },
        py::arg("theta"), py::arg("k"), py::arg("k_prev"),
        "Pre/backward-Euler/post coefficients of one step");

    m.def("f_tilde", &f_tilde, py::arg("a"), py::arg("b"),
          "Secant quotient of the double-well potential");
    m.def("f_hat_css", &f_hat_css, py::arg("u_impl"), py::arg("u_expl"), py::arg("u_old"),
          "Convex-splitting quotient");
    m.def("potential", &potential, py::arg("u"));

    py::class_<LteCoefficients>(m, "LteCoefficients")
        .def_readonly("g", &LteCoefficients::g)
        .def_readonly("r", &LteCoefficients::r);

    m.def("lte_coefficients", &lte_coefficients, py::arg("tau_n"), py::arg("tau_nm1"),
          py::arg("tau_nm2"), py::arg("theta"),
          "Coefficients in front of the scheme and predictor truncation errors");

    m.def(
        "controller_next_step",
        [](double k, double t_hat, double tol, double kappa, double k_min, double k_max) {
            return controller_next_step(k, t_hat, AdaptConfig{tol, k_min, k_max, kappa, k});
        },
        py::arg("k"), py::arg("t_hat"), py::arg("tol"), py::arg("kappa") = 0.8,
        py::arg("k_min") = 1e-5, py::arg("k_max") = 0.1);

    py::class_<NormTriple>(m, "NormTriple")
        .def_readonly("linf_l2", &NormTriple::linf_l2)
        .def_readonly("l2_l2", &NormTriple::l2_l2)
        .def_readonly("l2_h1", &NormTriple::l2_h1);

    py::class_<RunResult>(m, "RunResult")
        .def_readonly("errors", &RunResult::errors)
        .def_readonly("steps", &RunResult::steps)
        .def_readonly("rejections", &RunResult::rejections)
        .def_readonly("k_max_seen", &RunResult::k_max_seen)
        .def_readonly("k_min_seen", &RunResult::k_min_seen)
        .def_readonly("energy_trace", &RunResult::energy_trace)
        .def_readonly("max_energy_rise", &RunResult::max_energy_rise)
        .def_readonly("final_min", &RunResult::final_min)
        .def_readonly("final_max", &RunResult::final_max);

    py::class_<RateRow>(m, "RateRow")
        .def_readonly("k_ref", &RateRow::k_ref)
        .def_readonly("k_max", &RateRow::k_max)
        .def_readonly("err", &RateRow::err)
        .def_readonly("rate", &RateRow::rate)
        .def_readonly("steps", &RateRow::steps)
        .def_readonly("rejections", &RateRow::rejections);

    m.def(
        "run",
        [](const std::string& problem, const std::string& scheme, double theta, double epsilon,
           int mesh_n, double t_final, const std::string& policy, double k, std::uint64_t seed,
           double tol, double kappa, double k_min, double k_max, double k0, double fp_tol,
           double sav_c0, std::uint64_t ic_seed, const std::string& out_dir) {
            return run_experiment(config_from_kwargs(problem, scheme, theta, epsilon, mesh_n,
                                                     t_final, policy, k, seed, tol, kappa, k_min,
                                                     k_max, k0, fp_tol, sav_c0, ic_seed, out_dir));
        },
        py::arg("problem"), py::arg("scheme") = "modified", py::arg("theta") = 2.0 / 3.0,
        py::arg("epsilon") = 0.0, py::arg("mesh_n") = 0, py::arg("t_final") = 0.0,
        py::arg("policy") = "constant", py::arg("k") = 0.01, py::arg("seed") = 1,
        py::arg("tol") = 1e-6, py::arg("kappa") = 0.8, py::arg("k_min") = 1e-5,
        py::arg("k_max") = 0.1, py::arg("k0") = 1e-3, py::arg("fp_tol") = 1e-8,
        py::arg("sav_c0") = 0.0, py::arg("ic_seed") = 1, py::arg("out_dir") = "", kConfigArgs);

    m.def(
        "convergence_time",
        [](const std::vector<double>& ks, const std::string& problem, const std::string& scheme,
           double theta, double epsilon, int mesh_n, double t_final, const std::string& policy,
           std::uint64_t seed, double fp_tol, double sav_c0, const std::string& out_dir) {
            return convergence_time(
                config_from_kwargs(problem, scheme, theta, epsilon, mesh_n, t_final, policy,
                                   ks.empty() ? 0.01 : ks.front(), seed, 1e-6, 0.8, 1e-5, 0.1,
                                   1e-3, fp_tol, sav_c0, 1, out_dir),
                ks);
        },
        py::arg("ks"), py::arg("problem") = "wave1d", py::arg("scheme") = "modified",
        py::arg("theta") = 2.0 / 3.0, py::arg("epsilon") = 0.0, py::arg("mesh_n") = 0,
        py::arg("t_final") = 0.0, py::arg("policy") = "constant", py::arg("seed") = 1,
        py::arg("fp_tol") = 1e-8, py::arg("sav_c0") = 0.0, py::arg("out_dir") = "",
        "Temporal convergence ladder; wave1d couples h = k^2");

    m.def(
        "convergence_space",
        [](const std::vector<double>& hs, const std::string& scheme, double theta,
           double t_final, double fp_tol, const std::string& out_dir) {
            return convergence_space(
                config_from_kwargs("wave1d", scheme, theta, 0.0, 0, t_final, "constant", 0.01, 1,
                                   1e-6, 0.8, 1e-5, 0.1, 1e-3, fp_tol, 0.0, 1, out_dir),
                hs);
        },
        py::arg("hs"), py::arg("scheme") = "modified", py::arg("theta") = 2.0 / 3.0,
        py::arg("t_final") = 0.0, py::arg("fp_tol") = 1e-8, py::arg("out_dir") = "",
        "Spatial convergence ladder for wave1d with k = h^2");
}
