#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dln/adaptive.hpp"
#include "dln/modified_scheme.hpp"
#include "dln/sav_scheme.hpp"

namespace dln {

enum class SchemeKind { Modified, ConvexSplit, Sav };
enum class ProblemKind { Wave1D, Manufactured2D, Random2D };
enum class StepPolicyKind { Constant, Random, Alternating, Adaptive };

std::string to_string(SchemeKind s);
std::string to_string(ProblemKind p);
std::string to_string(StepPolicyKind p);
SchemeKind scheme_from_string(const std::string& s);
ProblemKind problem_from_string(const std::string& s);
StepPolicyKind policy_from_string(const std::string& s);

struct StepPolicy {
    StepPolicyKind kind = StepPolicyKind::Constant;
    double k_ref = 0.01;
    std::uint64_t seed = 1;
    AdaptConfig adapt;  ///< used when kind == Adaptive
};

/// One resolved experiment. Defaults that depend on the problem (epsilon,
/// final time, boundary handling) are filled by resolve().
struct ExperimentConfig {
    ProblemKind problem = ProblemKind::Wave1D;
    SchemeKind scheme = SchemeKind::Modified;
    double theta = 2.0 / 3.0;
    double epsilon = 0.0;  ///< 0 = problem default
    int mesh_n = 0;        ///< 0 = derived (wave1d couples h = k^2)
    double t_final = 0.0;  ///< 0 = problem default
    StepPolicy policy;
    double fp_tol = 1e-8;
    int fp_max_iter = 100;
    double sav_c0 = 0.0;
    std::uint64_t ic_seed = 1;            ///< random2d initial data
    std::vector<double> snapshot_times;   ///< random2d VTK output
    std::string out_dir;                  ///< empty = no files written
    bool measure_dissipation = false;     ///< track the per-step energy identity

    void resolve();
};

struct NormTriple {
    double linf_l2 = 0.0;
    double l2_l2 = 0.0;
    double l2_h1 = 0.0;
};

/// Outcome of one trajectory.
struct RunResult {
    NormTriple errors;  ///< vs the exact solution, when one exists
    int steps = 0;      ///< accepted steps (bootstrap excluded)
    int rejections = 0;
    int guard_fallbacks = 0;
    double k_max_seen = 0.0;
    double k_min_seen = 0.0;
    std::vector<std::array<double, 2>> energy_trace;  ///< (t, E) per accepted step
    double max_energy_rise = 0.0;  ///< max of E_{n+1} - E_n over the trace
    double max_dissipation_residual = 0.0;  ///< only filled when requested
    double max_r_drift = 0.0;  ///< sav runs: max |r_n - sqrt(E(u_n)+c0)|, diagnostic only
    double final_min = 0.0, final_max = 0.0;
    double steady_rate = 0.0;  ///< |u_N - u_{N-1}|_L2 / k_N at the end
    FieldVector final_field;
};

struct RateRow {
    double k_ref = 0.0;  ///< nominal k (or h for spatial studies)
    double k_max = 0.0;  ///< max realized step, used in the rate formula
    NormTriple err;
    NormTriple rate;  ///< vs previous row; NaN in the first row
    int steps = 0;
    int rejections = 0;
};

/// Deterministic step sequences covering [0, t_final]: constant k, uniform
/// draws from [k, 2k], or alternating k, 2k. The tail is shortened (or split)
/// to land exactly on t_final.
std::vector<double> step_sequence(StepPolicyKind kind, double k_ref, double t_final,
                                  std::uint64_t seed);

/// Fill the rate columns of a ladder using
/// rate = ln(err_1/err_2) / ln(kmax_1/kmax_2); rows must come in strictly
/// decreasing k_max order.
std::vector<RateRow> attach_rates(std::vector<RateRow> rows);

RunResult run_wave1d(const ExperimentConfig& cfg);
RunResult run_manufactured2d(const ExperimentConfig& cfg);
RunResult run_random2d(const ExperimentConfig& cfg);
RunResult run_experiment(const ExperimentConfig& cfg);

/// Temporal ladder: one run per k, mesh coupled per problem (wave1d: h = k^2,
/// 2D: fixed mesh_n), rates from realized k_max.
std::vector<RateRow> convergence_time(ExperimentConfig cfg, const std::vector<double>& ks);

/// Spatial ladder for wave1d: one run per h with k = h^2.
std::vector<RateRow> convergence_space(ExperimentConfig cfg, const std::vector<double>& hs);

/// Write a ladder as CSV with the fixed column schema.
void write_rate_table(const std::string& path, const ExperimentConfig& cfg,
                      const std::vector<RateRow>& rows);

/// Write the per-step adaptive trace (n, t, k, T_hat, accepted, rejections, energy).
void write_step_trace(const std::string& path, const std::vector<StepRecord>& records);

std::vector<std::pair<std::string, std::string>> manifest_entries(const ExperimentConfig& cfg);

}  // namespace dln
