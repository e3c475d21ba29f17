#include <CLI11.hpp>

#include <cstdio>

#include "dln/experiments.hpp"
#include "dln/io.hpp"

namespace {

struct CliOptions {
    std::string problem = "wave1d";
    std::string scheme = "modified";
    std::string policy = "constant";
    double theta = 2.0 / 3.0;
    double epsilon = 0.0;
    int mesh_n = 0;
    double t_final = 0.0;
    double k = 0.01;
    std::vector<double> ladder;
    std::uint64_t seed = 1;
    std::uint64_t ic_seed = 1;
    double fp_tol = 1e-8;
    double sav_c0 = 0.0;
    // adaptive controls
    double tol = 1e-6;
    double kappa = 0.8;
    double k_min = 1e-5;
    double k_max = 0.1;
    double k0 = 1e-3;
    std::string estimator = "absolute";
    double k_grid = 0.0;
    std::vector<double> snap_times;
    std::string out;
};

void add_common(CLI::App* cmd, CliOptions& o) {
    cmd->add_option("--problem", o.problem, "wave1d | manufactured2d | random2d");
    cmd->add_option("--scheme", o.scheme, "modified | css | sav");
    cmd->add_option("--theta", o.theta, "scheme parameter in [0,1]")->check(CLI::Range(0.0, 1.0));
    cmd->add_option("--epsilon", o.epsilon, "interfacial parameter (0 = problem default)");
    cmd->add_option("--mesh-n", o.mesh_n, "cells per side (0 = problem default / derived)");
    cmd->add_option("--t-final", o.t_final, "final time (0 = problem default)");
    cmd->add_option("--seed", o.seed, "seed for randomized step sequences");
    cmd->add_option("--ic-seed", o.ic_seed, "seed for the random2d initial data");
    cmd->add_option("--fp-tol", o.fp_tol, "fixed-point increment tolerance");
    cmd->add_option("--sav-c0", o.sav_c0, "energy shift inside the auxiliary scalar");
    cmd->add_option("--out", o.out, "output directory (tables, traces, manifest)");
    cmd->set_config("--config", "", "key = value configuration file");
}

void add_adaptive(CLI::App* cmd, CliOptions& o) {
    cmd->add_option("--tol", o.tol, "LTE tolerance");
    cmd->add_option("--kappa", o.kappa, "controller safety factor");
    cmd->add_option("--k-min", o.k_min, "smallest admissible step");
    cmd->add_option("--k-max", o.k_max, "largest admissible step");
    cmd->add_option("--k0", o.k0, "warm-up step size");
    cmd->add_option("--estimator", o.estimator, "absolute | relative");
    cmd->add_option("--k-grid", o.k_grid,
                    "snap accepted steps to a geometric grid for factorization reuse (0 = off)");
}

dln::ExperimentConfig to_config(const CliOptions& o, dln::StepPolicyKind kind) {
    dln::ExperimentConfig cfg;
    cfg.problem = dln::problem_from_string(o.problem);
    cfg.scheme = dln::scheme_from_string(o.scheme);
    cfg.theta = o.theta;
    cfg.epsilon = o.epsilon;
    cfg.mesh_n = o.mesh_n;
    cfg.t_final = o.t_final;
    cfg.policy.kind = kind;
    cfg.policy.k_ref = o.k;
    cfg.policy.seed = o.seed;
    cfg.policy.adapt.tol = o.tol;
    cfg.policy.adapt.kappa = o.kappa;
    cfg.policy.adapt.k_min = o.k_min;
    cfg.policy.adapt.k_max = o.k_max;
    cfg.policy.adapt.k0 = o.k0;
    cfg.policy.adapt.estimator = o.estimator == "relative" ? dln::EstimatorKind::Relative
                                                           : dln::EstimatorKind::Absolute;
    cfg.policy.adapt.k_grid = o.k_grid;
    cfg.fp_tol = o.fp_tol;
    cfg.sav_c0 = o.sav_c0;
    cfg.ic_seed = o.ic_seed;
    cfg.snapshot_times = o.snap_times;
    cfg.out_dir = o.out;
    cfg.resolve();
    return cfg;
}

void print_rows(const std::vector<dln::RateRow>& rows, const char* label) {
    std::printf("%8s %10s %12s %7s %12s %7s %12s %7s %6s %5s\n", label, "k_max", "linf(L2)",
                "rate", "l2(L2)", "rate", "l2(H1)", "rate", "steps", "rej");
    for (const auto& r : rows) {
        auto fr = [](double v) { return std::isnan(v) ? 0.0 : v; };
        std::printf("%8.5f %10.6f %12.4e %7.3f %12.4e %7.3f %12.4e %7.3f %6d %5d\n", r.k_ref,
                    r.k_max, r.err.linf_l2, fr(r.rate.linf_l2), r.err.l2_l2, fr(r.rate.l2_l2),
                    r.err.l2_h1, fr(r.rate.l2_h1), r.steps, r.rejections);
    }
}

void print_run(const dln::RunResult& r) {
    std::printf("steps           %d\n", r.steps);
    std::printf("rejections      %d\n", r.rejections);
    std::printf("k range         [%.3e, %.3e]\n", r.k_min_seen, r.k_max_seen);
    if (r.errors.linf_l2 > 0.0) {
        std::printf("linf(L2) error  %.4e\n", r.errors.linf_l2);
        std::printf("l2(L2) error    %.4e\n", r.errors.l2_l2);
        std::printf("l2(H1) error    %.4e\n", r.errors.l2_h1);
    }
    std::printf("max energy rise %.3e\n", r.max_energy_rise);
    std::printf("final field     [%.4f, %.4f]\n", r.final_min, r.final_max);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Variable time-stepping solvers for the Allen-Cahn equation"};
    app.require_subcommand(1);

    CliOptions o;

    auto* ct = app.add_subcommand("converge-time", "temporal convergence ladder");
    add_common(ct, o);
    add_adaptive(ct, o);
    ct->add_option("--k", o.ladder, "step ladder, descending")->delimiter(',');
    ct->add_option("--policy", o.policy, "constant | random | alternating");

    auto* cs = app.add_subcommand("converge-space", "spatial convergence ladder (wave1d, k = h^2)");
    cs->set_help_flag("--help", "print help");  // frees -h for the mesh ladder
    add_common(cs, o);
    cs->add_option("--h", o.ladder, "mesh-size ladder, descending")->delimiter(',');

    auto* ad = app.add_subcommand("adapt", "adaptive run with the LTE controller");
    add_common(ad, o);
    add_adaptive(ad, o);

    auto* sim = app.add_subcommand("simulate", "single trajectory (constant or adaptive steps)");
    add_common(sim, o);
    add_adaptive(sim, o);
    sim->add_option("--k", o.k, "constant step size");
    sim->add_option("--policy", o.policy, "constant | random | alternating | adaptive");
    sim->add_option("--snap-times", o.snap_times, "VTK snapshot times (2D)")->delimiter(',');

    CLI11_PARSE(app, argc, argv);

    try {
        if (ct->parsed()) {
            if (o.ladder.empty()) throw std::invalid_argument("converge-time needs --k ladder");
            auto cfg = to_config(o, dln::policy_from_string(o.policy));
            const auto rows = dln::convergence_time(cfg, o.ladder);
            print_rows(rows, "k");
        } else if (cs->parsed()) {
            if (o.ladder.empty()) throw std::invalid_argument("converge-space needs --h ladder");
            auto cfg = to_config(o, dln::StepPolicyKind::Constant);
            const auto rows = dln::convergence_space(cfg, o.ladder);
            print_rows(rows, "h");
        } else if (ad->parsed()) {
            auto cfg = to_config(o, dln::StepPolicyKind::Adaptive);
            const auto result = dln::run_experiment(cfg);
            print_run(result);
        } else if (sim->parsed()) {
            auto cfg = to_config(o, dln::policy_from_string(o.policy));
            const auto result = dln::run_experiment(cfg);
            print_run(result);
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
