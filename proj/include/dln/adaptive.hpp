#pragma once

#include <cmath>
#include <deque>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "dln/coefficients.hpp"
#include "dln/field.hpp"
#include "dln/modified_scheme.hpp"

namespace dln {

enum class EstimatorKind { Absolute, Relative };

struct AdaptConfig {
    double tol = 1e-6;
    double k_min = 1e-5;
    double k_max = 0.1;
    double kappa = 0.8;  ///< safety factor in (0, 1]
    double k0 = 1e-3;    ///< warm-up step, used until the history is 4 deep
    EstimatorKind estimator = EstimatorKind::Absolute;
    int max_rejections = 60;
    /// When > 1, controller outputs snap down to the geometric grid
    /// k_max / k_grid^m so repeated step sizes reuse cached factorizations.
    /// Snapping only shrinks, so the tolerance logic is untouched.
    double k_grid = 0.0;

    void validate() const {
        if (!(tol > 0.0)) throw std::invalid_argument("AdaptConfig: tol must be positive");
        if (!(k_min > 0.0 && k_min < k_max)) {
            throw std::invalid_argument("AdaptConfig: need 0 < k_min < k_max");
        }
        if (!(kappa > 0.0 && kappa <= 1.0)) {
            throw std::invalid_argument("AdaptConfig: kappa must lie in (0,1]");
        }
        if (max_rejections < 1) throw std::invalid_argument("AdaptConfig: max_rejections >= 1");
        if (k_grid != 0.0 && !(k_grid > 1.0 && k_grid <= 1.5)) {
            throw std::invalid_argument("AdaptConfig: k_grid must lie in (1, 1.5] or be 0");
        }
    }

    double snap(double k) const {
        if (k_grid <= 1.0 || !(k < k_max)) return std::min(k, k_max);
        const int m = static_cast<int>(std::ceil(std::log(k_max / k) / std::log(k_grid) - 1e-12));
        return k_max / std::pow(k_grid, m);
    }
};

/// Coefficients in front of the local truncation errors of the implicit
/// scheme (G) and the explicit two-slope predictor (R), as functions of the
/// three trailing step ratios.
struct LteCoefficients {
    double g;
    double r;
};

LteCoefficients lte_coefficients(double tau_n, double tau_nm1, double tau_nm2, double theta);

struct LteEstimate {
    double value = 0.0;
    bool guard_triggered = false;  ///< |G+R| was numerically zero; raw difference used
};

/// T_hat = |G|/|G+R| * diff_norm, optionally divided by the solution norm.
/// When |G+R| < 1e-8 * max(|G|,|R|,1) the prefactor is dropped and the event
/// flagged; this happens on exactly uniform ratios at theta = 1.
LteEstimate estimate_lte(double diff_norm, double solution_norm, const LteCoefficients& c,
                         EstimatorKind kind);

/// Step multiplier min{1.5, max{0.2, kappa (tol/T)^{1/3}}}; T = 0 maps to 1.5.
double controller_factor(double t_hat, double tol, double kappa);

/// Next step size: k_n * factor, clamped to [k_min, k_max].
double controller_next_step(double k_n, double t_hat, const AdaptConfig& cfg);

/// Trailing window for the solver-free predictor: four solutions, their
/// times, and the two cached scheme slopes g = u_alpha / k_hat at the two
/// previous beta points. Advances only on accepted steps.
class AdaptHistory {
public:
    explicit AdaptHistory(double theta) : theta_(theta) {}

    void push(double t, FieldVector u);
    bool ready() const { return entries_.size() >= 4; }
    int depth() const { return static_cast<int>(entries_.size()); }

    /// Drop all but the newest `keep` entries (recovery re-warm-up).
    void truncate(int keep) {
        while (static_cast<int>(entries_.size()) > keep) entries_.pop_back();
    }

    double time(int age) const { return entries_[age].t; }                  ///< age 0 = newest
    const FieldVector& solution(int age) const { return entries_[age].u; }  ///< age 0 = newest

    const FieldVector& slope_recent() const { return slope_recent_; }
    const FieldVector& slope_older() const { return slope_older_; }
    double t_beta_recent() const { return t_beta_recent_; }
    double t_beta_older() const { return t_beta_older_; }

    /// Explicit prediction of u(t_next): a linear combination of the four
    /// stored solutions, no solve involved.
    FieldVector predict(double t_next) const;

private:
    struct Entry {
        double t;
        FieldVector u;
    };
    double theta_;
    std::deque<Entry> entries_;  // newest first, at most 4
    FieldVector slope_recent_, slope_older_;
    double t_beta_recent_ = 0.0, t_beta_older_ = 0.0;
};

struct StepRecord {
    int index = 0;
    double t = 0.0;
    double k = 0.0;
    double t_hat = 0.0;
    int rejections = 0;
    double energy = 0.0;
    bool forced = false;  ///< warm-up or recovery step, no estimator certificate
};

struct AdaptStats {
    int accepted = 0;
    int rejected = 0;
    int solver_failures = 0;
    int guard_fallbacks = 0;
    int recoveries = 0;  ///< stagnated rejection cascades resolved by re-warm-up
    double k_smallest = std::numeric_limits<double>::infinity();
    double k_largest = 0.0;
};

template <class Scheme>
struct AdaptiveResult {
    typename Scheme::State final_state;
    AdaptStats stats;
    std::vector<StepRecord> records;  ///< one per accepted step
};

/// Accept/reject loop: propose a step, compare the implicit solution with the
/// explicit prediction, accept when the estimate clears the tolerance and
/// retry with a shrunken step otherwise. The first steps run at the constant
/// warm-up size until four solutions exist. The final step is shortened (or
/// split in two) to land exactly on t_final.
///
/// For theta < 1 the two-step scheme keeps a consistency error of order
/// k_prev^2 even as the trial step shrinks, so after an oversized committed
/// step the estimate can floor above the tolerance and no retry helps. Such
/// stagnating cascades are resolved by re-entering warm-up at a small step
/// (forced acceptance, flagged in the record) and capping further growth
/// below the step size that poisoned the history.
template <class Scheme>
AdaptiveResult<Scheme> adaptive_loop(Scheme& scheme, typename Scheme::State state,
                                     const AdaptConfig& cfg, double t_final,
                                     const std::function<void(const typename Scheme::State&,
                                                              const StepRecord&)>& on_accept = {}) {
    cfg.validate();
    if (!(t_final > state.t_curr)) throw std::invalid_argument("adaptive_loop: t_final in the past");

    AdaptiveResult<Scheme> out{state, {}, {}};
    AdaptHistory history(scheme.theta());
    history.push(state.t_prev, state.u_prev);
    history.push(state.t_curr, state.u_curr);

    double k_next = cfg.k0;
    double warm_k = cfg.k0;
    double k_cap = cfg.k_max;
    int index = 0;
    const double t_tiny = 1e-12 * std::max(1.0, std::abs(t_final));
    while (t_final - state.t_curr > t_tiny) {
        const bool estimated = history.ready();
        double k = estimated
                       ? std::max(cfg.snap(std::min({std::max(k_next, cfg.k_min), cfg.k_max, k_cap})),
                                  cfg.k_min)
                       : warm_k;
        // Land exactly on t_final without creating a sliver step.
        const double remaining = t_final - state.t_curr;
        if (remaining <= k * (1.0 + 1e-9)) {
            k = remaining;
        } else if (remaining <= 2.0 * k) {
            k = 0.5 * remaining;
        }

        int rejections = 0;
        int stagnant = 0;
        double t_hat_prev = std::numeric_limits<double>::infinity();
        bool recovered = false;
        for (;;) {
            bool solver_failed = false;
            typename Scheme::State candidate;
            try {
                candidate = scheme.step(state, k);
            } catch (const FixedPointError&) {
                solver_failed = true;
                ++out.stats.solver_failures;
            }

            double t_hat = 0.0;
            bool accept = !solver_failed;
            if (!solver_failed && estimated) {
                const FieldVector prediction = history.predict(state.t_curr + k);
                const double diff =
                    scheme.l2_norm(lin2(1.0, candidate.u_curr, -1.0, prediction));
                const double tau_n = k / (history.time(0) - history.time(1));
                const double tau_nm1 =
                    (history.time(0) - history.time(1)) / (history.time(1) - history.time(2));
                const double tau_nm2 =
                    (history.time(1) - history.time(2)) / (history.time(2) - history.time(3));
                const LteCoefficients lc =
                    lte_coefficients(tau_n, tau_nm1, tau_nm2, scheme.theta());
                const LteEstimate est = estimate_lte(diff, scheme.l2_norm(candidate.u_curr), lc,
                                                     cfg.estimator);
                if (est.guard_triggered) ++out.stats.guard_fallbacks;
                t_hat = est.value;
                accept = t_hat < cfg.tol;
            }

            if (accept) {
                state = std::move(candidate);
                history.push(state.t_curr, state.u_curr);
                ++out.stats.accepted;
                out.stats.k_smallest = std::min(out.stats.k_smallest, k);
                out.stats.k_largest = std::max(out.stats.k_largest, k);
                StepRecord rec{index++,    state.t_curr, k, t_hat, rejections,
                               scheme.energy(state), !estimated};
                out.records.push_back(rec);
                if (on_accept) on_accept(state, rec);
                k_next = estimated ? controller_next_step(k, t_hat, cfg) : warm_k;
                break;
            }

            ++rejections;
            ++out.stats.rejected;
            if (rejections > cfg.max_rejections) {
                throw std::runtime_error("adaptive_loop: step at t = " +
                                         std::to_string(state.t_curr) + " rejected " +
                                         std::to_string(rejections) + " times");
            }

            if (!solver_failed && estimated) {
                stagnant = (t_hat >= 0.9 * t_hat_prev) ? stagnant + 1 : 0;
                t_hat_prev = t_hat;
                if (stagnant >= 2 && !recovered) {
                    // Shrinking no longer reduces the estimate: the committed
                    // history dominates. Restart warm-up at a small step.
                    const double k_prev = state.k_prev();
                    if (k_prev <= cfg.k_min * (1.0 + 1e-12)) {
                        throw std::runtime_error(
                            "adaptive_loop: step floor reached at t = " +
                            std::to_string(state.t_curr) +
                            " (history already at k_min, tolerance unattainable)");
                    }
                    ++out.stats.recoveries;
                    recovered = true;
                    k_cap = std::min(k_cap, std::max(0.5 * k_prev, 4.0 * cfg.k_min));
                    warm_k = std::max(cfg.k_min, 0.05 * k_prev);
                    history.truncate(2);
                    break;  // outer loop re-enters in warm-up mode
                }
            }

            const double factor =
                solver_failed ? 0.2 : controller_factor(t_hat, cfg.tol, cfg.kappa);
            k = cfg.snap(k * factor);
            if (k < cfg.k_min) {
                throw std::runtime_error(
                    "adaptive_loop: step floor reached at t = " + std::to_string(state.t_curr) +
                    " (k = " + std::to_string(k) + " < k_min = " + std::to_string(cfg.k_min) + ")");
            }
        }
    }

    out.final_state = std::move(state);
    return out;
}

}  // namespace dln
