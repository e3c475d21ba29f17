#include "dln/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <random>
#include <stdexcept>

#include "dln/io.hpp"

namespace dln {

std::string to_string(SchemeKind s) {
    switch (s) {
        case SchemeKind::Modified: return "modified";
        case SchemeKind::ConvexSplit: return "css";
        case SchemeKind::Sav: return "sav";
    }
    return "?";
}

std::string to_string(ProblemKind p) {
    switch (p) {
        case ProblemKind::Wave1D: return "wave1d";
        case ProblemKind::Manufactured2D: return "manufactured2d";
        case ProblemKind::Random2D: return "random2d";
    }
    return "?";
}

std::string to_string(StepPolicyKind p) {
    switch (p) {
        case StepPolicyKind::Constant: return "constant";
        case StepPolicyKind::Random: return "random";
        case StepPolicyKind::Alternating: return "alternating";
        case StepPolicyKind::Adaptive: return "adaptive";
    }
    return "?";
}

SchemeKind scheme_from_string(const std::string& s) {
    if (s == "modified") return SchemeKind::Modified;
    if (s == "css") return SchemeKind::ConvexSplit;
    if (s == "sav") return SchemeKind::Sav;
    throw std::invalid_argument("unknown scheme '" + s + "' (modified|css|sav)");
}

ProblemKind problem_from_string(const std::string& s) {
    if (s == "wave1d") return ProblemKind::Wave1D;
    if (s == "manufactured2d") return ProblemKind::Manufactured2D;
    if (s == "random2d") return ProblemKind::Random2D;
    throw std::invalid_argument("unknown problem '" + s + "'");
}

StepPolicyKind policy_from_string(const std::string& s) {
    if (s == "constant") return StepPolicyKind::Constant;
    if (s == "random") return StepPolicyKind::Random;
    if (s == "alternating") return StepPolicyKind::Alternating;
    if (s == "adaptive") return StepPolicyKind::Adaptive;
    throw std::invalid_argument("unknown step policy '" + s + "'");
}

void ExperimentConfig::resolve() {
    switch (problem) {
        case ProblemKind::Wave1D:
            if (epsilon == 0.0) epsilon = 0.01;
            if (t_final == 0.0) t_final = 2.0;
            break;
        case ProblemKind::Manufactured2D:
            if (epsilon == 0.0) epsilon = 0.01;
            if (t_final == 0.0) t_final = 4.0;
            if (mesh_n == 0) mesh_n = 64;
            break;
        case ProblemKind::Random2D:
            if (epsilon == 0.0) epsilon = 0.1;
            if (t_final == 0.0) t_final = 320.0;
            if (mesh_n == 0) mesh_n = 100;
            break;
    }
}

namespace {

struct ProblemSetup {
    Domain domain;
    BoundaryKind bc = BoundaryKind::Natural;
    bool has_exact = false;
    std::function<double(Point, double)> exact;
    std::function<Point(Point, double)> exact_grad;
    std::optional<std::function<double(Point, double)>> forcing;
};

ProblemSetup make_setup(ProblemKind kind, double epsilon) {
    ProblemSetup s;
    switch (kind) {
        case ProblemKind::Wave1D: {
            const double speed = 3.0 * epsilon / std::sqrt(2.0);
            const double width = 2.0 * std::sqrt(2.0) * epsilon;
            s.domain = Domain::interval(-2.0, 4.0);
            s.bc = BoundaryKind::Dirichlet;
            s.has_exact = true;
            s.exact = [speed, width](Point p, double t) {
                return 0.5 * (1.0 - std::tanh((p.x - speed * t) / width));
            };
            s.exact_grad = [speed, width](Point p, double t) {
                const double c = std::cosh((p.x - speed * t) / width);
                return Point{-0.5 / (width * c * c), 0.0};
            };
            break;
        }
        case ProblemKind::Manufactured2D: {
            s.domain = Domain::rectangle({0.0, 0.0}, {2.0 * M_PI, 2.0 * M_PI});
            s.bc = BoundaryKind::Dirichlet;
            s.has_exact = true;
            s.exact = [](Point p, double t) {
                return 0.05 * std::exp(-0.1 * t) * std::sin(p.x) * std::sin(p.y);
            };
            s.exact_grad = [](Point p, double t) {
                const double a = 0.05 * std::exp(-0.1 * t);
                return Point{a * std::cos(p.x) * std::sin(p.y), a * std::sin(p.x) * std::cos(p.y)};
            };
            const double eps2 = epsilon * epsilon;
            s.forcing = [eps2](Point p, double t) {
                const double u = 0.05 * std::exp(-0.1 * t) * std::sin(p.x) * std::sin(p.y);
                return (2.0 * eps2 - 1.1) * u + u * u * u;
            };
            break;
        }
        case ProblemKind::Random2D: {
            s.domain = Domain::rectangle({0.0, 0.0}, {2.0 * M_PI, 2.0 * M_PI});
            s.bc = BoundaryKind::Periodic;
            s.has_exact = false;
            break;
        }
    }
    return s;
}

int wave1d_mesh_n(double h) {
    const double length = 6.0;
    const int n = static_cast<int>(std::llround(length / h));
    return std::max(n, 2);
}

/// Per-node error collection plus time-aggregated norms.
struct ErrorRecorder {
    const FeSpace* space = nullptr;
    const ProblemSetup* setup = nullptr;
    bool enabled = false;
    std::vector<double> times, err_l2, err_h1;

    void record(const FieldVector& u, double t) {
        if (!enabled) return;
        const auto exact_t = [&](Point p) { return setup->exact(p, t); };
        const auto grad_t = [&](Point p) { return setup->exact_grad(p, t); };
        times.push_back(t);
        err_l2.push_back(error_norm(*space, u, exact_t, NormKind::L2));
        err_h1.push_back(error_norm(*space, u, exact_t, NormKind::H1, grad_t));
    }

    NormTriple norms() const {
        NormTriple out;
        if (!enabled || times.size() < 2) return out;
        std::vector<double> dt(times.size() - 1);
        for (std::size_t i = 0; i + 1 < times.size(); ++i) dt[i] = times[i + 1] - times[i];
        const std::vector<double> l2_tail(err_l2.begin() + 1, err_l2.end());
        const std::vector<double> h1_tail(err_h1.begin() + 1, err_h1.end());
        out.linf_l2 = discrete_time_norm(err_l2, {}, TimeNormKind::LInf);
        out.l2_l2 = discrete_time_norm(l2_tail, dt, TimeNormKind::L2);
        out.l2_h1 = discrete_time_norm(h1_tail, dt, TimeNormKind::L2);
        return out;
    }
};

struct SnapshotWriter {
    const FeSpace* space = nullptr;
    std::string dir;
    std::vector<double> pending;  // ascending

    void maybe_write(const FieldVector& u, double t) {
        while (!pending.empty() && t >= pending.front() - 1e-12) {
            char name[64];
            std::snprintf(name, sizeof(name), "snapshot_t%08.2f.vtk", pending.front());
            write_vtk_2d(dir + "/" + name, *space, u);
            pending.erase(pending.begin());
        }
    }
};

template <class Stepper>
void finalize_result(const Stepper& stepper, const typename Stepper::State& state,
                     double last_step, RunResult& out) {
    out.final_min = *std::min_element(state.u_curr.begin(), state.u_curr.end());
    out.final_max = *std::max_element(state.u_curr.begin(), state.u_curr.end());
    if (last_step > 0.0) {
        out.steady_rate =
            stepper.l2_norm(lin2(1.0, state.u_curr, -1.0, state.u_prev)) / last_step;
    }
    out.final_field = state.u_curr;
}

// The auxiliary scalar is only an approximation of sqrt(E(u)+c0) away from
// t = 0; its drift is reported but not bounded.
template <class Stepper>
void track_r_drift(const Stepper& stepper, const typename Stepper::State& state,
                   RunResult& out) {
    if constexpr (requires { state.r_curr; }) {
        out.max_r_drift =
            std::max(out.max_r_drift, std::abs(state.r_curr - stepper.initial_r(state.u_curr)));
    } else {
        (void)stepper;
        (void)state;
        (void)out;
    }
}

template <class Stepper>
RunResult run_fixed_sequence(Stepper& stepper, typename Stepper::State state,
                             const std::vector<double>& steps, ErrorRecorder& recorder,
                             bool measure_dissipation, SnapshotWriter* snaps) {
    RunResult out;
    out.k_min_seen = std::numeric_limits<double>::infinity();
    double prev_energy = stepper.energy(state);
    out.energy_trace.push_back({state.t_curr, prev_energy});

    for (std::size_t i = 1; i < steps.size(); ++i) {
        const double k = steps[i];
        auto next = stepper.step(state, k);
        if (measure_dissipation) {
            out.max_dissipation_residual =
                std::max(out.max_dissipation_residual,
                         std::abs(stepper.dissipation_residual(state, next, k)));
        }
        state = std::move(next);
        recorder.record(state.u_curr, state.t_curr);
        track_r_drift(stepper, state, out);
        const double energy = stepper.energy(state);
        out.energy_trace.push_back({state.t_curr, energy});
        out.max_energy_rise = std::max(out.max_energy_rise, energy - prev_energy);
        prev_energy = energy;
        ++out.steps;
        out.k_max_seen = std::max(out.k_max_seen, k);
        out.k_min_seen = std::min(out.k_min_seen, k);
        if (snaps) snaps->maybe_write(state.u_curr, state.t_curr);
    }
    out.errors = recorder.norms();
    finalize_result(stepper, state, steps.empty() ? 0.0 : steps.back(), out);
    return out;
}

template <class Stepper>
RunResult run_adaptive_driver(Stepper& stepper, typename Stepper::State state,
                              const AdaptConfig& acfg, double t_final, ErrorRecorder& recorder,
                              SnapshotWriter* snaps, const std::string& out_dir) {
    RunResult out;
    double prev_energy = stepper.energy(state);
    out.energy_trace.push_back({state.t_curr, prev_energy});

    auto result = adaptive_loop<Stepper>(
        stepper, std::move(state), acfg, t_final,
        [&](const typename Stepper::State& s, const StepRecord& rec) {
            recorder.record(s.u_curr, s.t_curr);
            track_r_drift(stepper, s, out);
            out.energy_trace.push_back({s.t_curr, rec.energy});
            out.max_energy_rise = std::max(out.max_energy_rise, rec.energy - prev_energy);
            prev_energy = rec.energy;
            if (snaps) snaps->maybe_write(s.u_curr, s.t_curr);
        });

    out.steps = result.stats.accepted;
    out.rejections = result.stats.rejected;
    out.guard_fallbacks = result.stats.guard_fallbacks;
    out.k_max_seen = result.stats.k_largest;
    out.k_min_seen = result.stats.k_smallest;
    out.errors = recorder.norms();
    const double last_step = result.records.empty() ? 0.0 : result.records.back().k;
    finalize_result(stepper, result.final_state, last_step, out);
    if (!out_dir.empty()) write_step_trace(out_dir + "/adapt_trace.csv", result.records);
    return out;
}

void write_energy_trace(const std::string& path,
                        const std::vector<std::array<double, 2>>& trace) {
    std::vector<std::vector<std::string>> rows;
    rows.reserve(trace.size());
    for (const auto& e : trace) rows.push_back({format_sci(e[0]), format_sci(e[1])});
    write_csv(path, {"t", "energy"}, rows);
}

RunResult run_problem(const ExperimentConfig& raw) {
    ExperimentConfig cfg = raw;
    cfg.resolve();
    const ProblemSetup setup = make_setup(cfg.problem, cfg.epsilon);

    int mesh_n = cfg.mesh_n;
    const bool adaptive = cfg.policy.kind == StepPolicyKind::Adaptive;
    if (cfg.problem == ProblemKind::Wave1D && mesh_n == 0) {
        const double k = adaptive ? 1e-3 : cfg.policy.k_ref;
        mesh_n = wave1d_mesh_n(k * k);
    }

    const Mesh mesh = build_mesh(setup.domain, mesh_n);
    auto space = std::make_shared<const FeSpace>(mesh, setup.bc);

    if (!cfg.out_dir.empty()) {
        std::filesystem::create_directories(cfg.out_dir);
        ExperimentConfig stamped = cfg;
        stamped.mesh_n = mesh_n;
        write_manifest(cfg.out_dir + "/manifest.txt", manifest_entries(stamped));
    }

    BoundaryValueFn dirichlet;
    if (setup.bc == BoundaryKind::Dirichlet) {
        dirichlet = [&setup](Point p, double t) { return setup.exact(p, t); };
    }

    // initial data and the second starting level
    FieldVector u0, u1;
    double t1 = 0.0;
    std::vector<double> steps;
    if (adaptive) {
        t1 = cfg.policy.adapt.k0;
    } else {
        steps = step_sequence(cfg.policy.kind, cfg.policy.k_ref, cfg.t_final, cfg.policy.seed);
        if (steps.size() < 2) throw std::invalid_argument("run: step sequence too short");
        t1 = steps[0];
    }

    const FixedPointConfig fp{cfg.fp_tol, cfg.fp_max_iter};
    if (setup.has_exact) {
        u0 = interpolate(*space, [&](Point p) { return setup.exact(p, 0.0); });
        u1 = interpolate(*space, [&](Point p) { return setup.exact(p, t1); });
    } else {
        std::mt19937_64 rng(cfg.ic_seed);
        std::uniform_real_distribution<double> uni(0.0, 1.0);
        u0.resize(space->dof_count());
        for (double& v : u0) v = 0.1 * uni(rng) - 0.05;
        ModelParams mp{cfg.epsilon, setup.forcing};
        u1 = midpoint_bootstrap_step(space, mp, fp, dirichlet, u0, 0.0, t1);
    }

    ErrorRecorder recorder{space.get(), &setup, setup.has_exact, {}, {}, {}};
    recorder.record(u0, 0.0);
    recorder.record(u1, t1);

    SnapshotWriter snaps;
    SnapshotWriter* snaps_ptr = nullptr;
    if (!cfg.out_dir.empty() && mesh.dimension == 2 && !cfg.snapshot_times.empty()) {
        snaps.space = space.get();
        snaps.dir = cfg.out_dir;
        snaps.pending = cfg.snapshot_times;
        std::sort(snaps.pending.begin(), snaps.pending.end());
        snaps_ptr = &snaps;
        snaps.maybe_write(u0, 0.0);
    }

    RunResult out;
    if (cfg.scheme == SchemeKind::Sav) {
        SavParams sp{cfg.epsilon, cfg.sav_c0, setup.forcing};
        SavStepper stepper(space, cfg.theta, sp, dirichlet);
        SavState state{u0, u1, stepper.initial_r(u0), stepper.initial_r(u1), 0.0, t1};
        out = adaptive
                  ? run_adaptive_driver(stepper, std::move(state), cfg.policy.adapt, cfg.t_final,
                                        recorder, snaps_ptr, cfg.out_dir)
                  : run_fixed_sequence(stepper, std::move(state), steps, recorder,
                                       cfg.measure_dissipation, snaps_ptr);
    } else {
        const NonlinearVariant variant = cfg.scheme == SchemeKind::ConvexSplit
                                             ? NonlinearVariant::ConvexSplit
                                             : NonlinearVariant::Secant;
        ModelParams mp{cfg.epsilon, setup.forcing};
        ModifiedStepper stepper(space, cfg.theta, mp, fp, variant, dirichlet);
        SchemeState state{u0, u1, 0.0, t1};
        out = adaptive
                  ? run_adaptive_driver(stepper, std::move(state), cfg.policy.adapt, cfg.t_final,
                                        recorder, snaps_ptr, cfg.out_dir)
                  : run_fixed_sequence(stepper, std::move(state), steps, recorder,
                                       cfg.measure_dissipation, snaps_ptr);
    }

    if (!cfg.out_dir.empty()) {
        write_energy_trace(cfg.out_dir + "/energy.csv", out.energy_trace);
        if (mesh.dimension == 1) {
            write_profile_csv(cfg.out_dir + "/final_profile.csv", *space, out.final_field);
        } else {
            write_vtk_2d(cfg.out_dir + "/final_field.vtk", *space, out.final_field);
        }
    }
    return out;
}

}  // namespace

std::vector<double> step_sequence(StepPolicyKind kind, double k_ref, double t_final,
                                  std::uint64_t seed) {
    if (!(k_ref > 0.0 && t_final > 0.0)) {
        throw std::invalid_argument("step_sequence: k and t_final must be positive");
    }
    if (kind == StepPolicyKind::Adaptive) {
        throw std::invalid_argument("step_sequence: adaptive policy has no fixed sequence");
    }
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(0.0, 1.0);

    std::vector<double> steps;
    double t = 0.0;
    std::size_t index = 0;
    while (t < t_final * (1.0 - 1e-14)) {
        double k = k_ref;
        if (kind == StepPolicyKind::Random) {
            k = k_ref + k_ref * uni(rng);
        } else if (kind == StepPolicyKind::Alternating) {
            k = (index % 2 == 0) ? k_ref : 2.0 * k_ref;
        }
        const double remaining = t_final - t;
        if (remaining <= k * (1.0 + 1e-9)) {
            k = remaining;
        } else if (remaining <= 2.0 * k) {
            k = 0.5 * remaining;
        }
        steps.push_back(k);
        t += k;
        ++index;
    }
    return steps;
}

std::vector<RateRow> attach_rates(std::vector<RateRow> rows) {
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (i == 0) {
            rows[i].rate = {std::nan(""), std::nan(""), std::nan("")};
            continue;
        }
        if (!(rows[i].k_max < rows[i - 1].k_max)) {
            throw std::invalid_argument("attach_rates: ladder must have decreasing k_max");
        }
        const double dk = std::log(rows[i - 1].k_max / rows[i].k_max);
        rows[i].rate.linf_l2 = std::log(rows[i - 1].err.linf_l2 / rows[i].err.linf_l2) / dk;
        rows[i].rate.l2_l2 = std::log(rows[i - 1].err.l2_l2 / rows[i].err.l2_l2) / dk;
        rows[i].rate.l2_h1 = std::log(rows[i - 1].err.l2_h1 / rows[i].err.l2_h1) / dk;
    }
    return rows;
}

RunResult run_wave1d(const ExperimentConfig& cfg) {
    if (cfg.problem != ProblemKind::Wave1D) throw std::invalid_argument("run_wave1d: wrong problem");
    return run_problem(cfg);
}

RunResult run_manufactured2d(const ExperimentConfig& cfg) {
    if (cfg.problem != ProblemKind::Manufactured2D) {
        throw std::invalid_argument("run_manufactured2d: wrong problem");
    }
    return run_problem(cfg);
}

RunResult run_random2d(const ExperimentConfig& cfg) {
    if (cfg.problem != ProblemKind::Random2D) throw std::invalid_argument("run_random2d: wrong problem");
    return run_problem(cfg);
}

RunResult run_experiment(const ExperimentConfig& cfg) { return run_problem(cfg); }

std::vector<RateRow> convergence_time(ExperimentConfig cfg, const std::vector<double>& ks) {
    cfg.resolve();
    std::vector<RateRow> rows;
    for (double k : ks) {
        ExperimentConfig point = cfg;
        point.policy.k_ref = k;
        point.out_dir.clear();
        if (cfg.problem == ProblemKind::Wave1D) point.mesh_n = wave1d_mesh_n(k * k);
        const RunResult r = run_problem(point);
        rows.push_back({k, r.k_max_seen, r.errors, {}, r.steps, r.rejections});
    }
    rows = attach_rates(std::move(rows));
    if (!cfg.out_dir.empty()) {
        std::filesystem::create_directories(cfg.out_dir);
        write_rate_table(cfg.out_dir + "/convergence_time.csv", cfg, rows);
    }
    return rows;
}

std::vector<RateRow> convergence_space(ExperimentConfig cfg, const std::vector<double>& hs) {
    cfg.resolve();
    if (cfg.problem != ProblemKind::Wave1D) {
        throw std::invalid_argument("convergence_space: only the 1D problem couples k = h^2");
    }
    std::vector<RateRow> rows;
    for (double h : hs) {
        ExperimentConfig point = cfg;
        point.mesh_n = wave1d_mesh_n(h);
        point.policy.kind = StepPolicyKind::Constant;
        point.policy.k_ref = h * h;
        point.out_dir.clear();
        const RunResult r = run_problem(point);
        rows.push_back({h, h, r.errors, {}, r.steps, r.rejections});
    }
    rows = attach_rates(std::move(rows));
    if (!cfg.out_dir.empty()) {
        std::filesystem::create_directories(cfg.out_dir);
        write_rate_table(cfg.out_dir + "/convergence_space.csv", cfg, rows);
    }
    return rows;
}

void write_rate_table(const std::string& path, const ExperimentConfig& cfg,
                      const std::vector<RateRow>& rows) {
    std::vector<std::vector<std::string>> cells;
    for (const auto& r : rows) {
        auto rate_str = [](double v) { return std::isnan(v) ? std::string("-") : format_sci(v, 4); };
        cells.push_back({to_string(cfg.scheme), format_sci(cfg.theta, 6), format_sci(r.k_ref, 6),
                         format_sci(r.k_max, 6), format_sci(r.err.linf_l2, 6),
                         format_sci(r.err.l2_l2, 6), format_sci(r.err.l2_h1, 6),
                         rate_str(r.rate.linf_l2), rate_str(r.rate.l2_l2), rate_str(r.rate.l2_h1),
                         std::to_string(r.steps), std::to_string(r.rejections)});
    }
    write_csv(path,
              {"scheme", "theta", "k", "k_max", "err_linf_l2", "err_l2_l2", "err_l2_h1",
               "rate_linf_l2", "rate_l2_l2", "rate_l2_h1", "steps", "rejections"},
              cells);
}

void write_step_trace(const std::string& path, const std::vector<StepRecord>& records) {
    std::vector<std::vector<std::string>> rows;
    rows.reserve(records.size());
    for (const auto& r : records) {
        rows.push_back({std::to_string(r.index), format_sci(r.t), format_sci(r.k),
                        format_sci(r.t_hat), "1", std::to_string(r.rejections),
                        format_sci(r.energy)});
    }
    write_csv(path, {"n", "t", "k", "t_hat", "accepted", "rejections", "energy"}, rows);
}

std::vector<std::pair<std::string, std::string>> manifest_entries(const ExperimentConfig& cfg) {
    std::vector<std::pair<std::string, std::string>> e;
    e.emplace_back("problem", to_string(cfg.problem));
    e.emplace_back("scheme", to_string(cfg.scheme));
    e.emplace_back("theta", format_sci(cfg.theta, 6));
    e.emplace_back("epsilon", format_sci(cfg.epsilon, 6));
    e.emplace_back("mesh_n", std::to_string(cfg.mesh_n));
    e.emplace_back("t_final", format_sci(cfg.t_final, 6));
    e.emplace_back("policy", to_string(cfg.policy.kind));
    e.emplace_back("k", format_sci(cfg.policy.k_ref, 6));
    e.emplace_back("seed", std::to_string(cfg.policy.seed));
    e.emplace_back("fp_tol", format_sci(cfg.fp_tol, 3));
    e.emplace_back("sav_c0", format_sci(cfg.sav_c0, 3));
    if (cfg.policy.kind == StepPolicyKind::Adaptive) {
        e.emplace_back("tol", format_sci(cfg.policy.adapt.tol, 3));
        e.emplace_back("kappa", format_sci(cfg.policy.adapt.kappa, 3));
        e.emplace_back("k_min", format_sci(cfg.policy.adapt.k_min, 3));
        e.emplace_back("k_max", format_sci(cfg.policy.adapt.k_max, 3));
        e.emplace_back("k0", format_sci(cfg.policy.adapt.k0, 3));
        e.emplace_back("estimator", cfg.policy.adapt.estimator == EstimatorKind::Absolute
                                        ? "absolute"
                                        : "relative");
        if (cfg.policy.adapt.k_grid > 1.0) {
            e.emplace_back("k_grid", format_sci(cfg.policy.adapt.k_grid, 3));
        }
    }
    if (cfg.problem == ProblemKind::Random2D) {
        e.emplace_back("ic_seed", std::to_string(cfg.ic_seed));
    }
    return e;
}

}  // namespace dln
