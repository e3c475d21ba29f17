#include "dln/adaptive.hpp"

#include <cmath>

namespace dln {

LteCoefficients lte_coefficients(double tau_n, double tau_nm1, double tau_nm2, double theta) {
    validate_theta(theta);
    if (!(tau_n > 0.0 && tau_nm1 > 0.0 && tau_nm2 > 0.0)) {
        throw std::invalid_argument("lte_coefficients: ratios must be positive");
    }
    // Reconstruct the beta coefficients of the three trailing steps from the
    // ratios alone: eps_m = (tau_m - 1)/(tau_m + 1).
    const auto beta_of = [&](double tau) {
        return dln_coefficients(theta, StepPair{tau, 1.0}).beta;
    };
    const auto bn = beta_of(tau_n);
    const auto bn1 = beta_of(tau_nm1);
    const auto bn2 = beta_of(tau_nm2);

    const double alpha2 = 0.5 * (theta + 1.0);
    const double alpha0 = 0.5 * (theta - 1.0);
    const double inv_tn = 1.0 / tau_n;
    const double inv_tn1 = 1.0 / tau_nm1;
    const double inv_tn2 = 1.0 / tau_nm2;

    LteCoefficients out{};
    {
        const double lead = 0.5 - alpha0 / (2.0 * alpha2) * inv_tn;
        const double mid = bn[2] - bn[0] * inv_tn;
        out.g = lead * mid * mid + alpha0 / (6.0 * alpha2) * inv_tn * inv_tn * inv_tn - 1.0 / 6.0;
    }
    {
        const double p1 = 1.0 - bn2[2] * inv_tn1 + bn2[0] * inv_tn2 * inv_tn1;
        const double p2 = 1.0 - bn1[2] * inv_tn + bn1[0] * inv_tn1 * inv_tn;
        const double q1 =
            1.0 + inv_tn - bn2[2] * inv_tn1 * inv_tn + bn2[0] * inv_tn2 * inv_tn1 * inv_tn;
        const double q2 = -bn1[2] + bn1[0] * inv_tn1;
        out.r = (2.0 + 3.0 * inv_tn * p1 * p2 + 3.0 * inv_tn * q1 * q2) / 12.0;
    }
    return out;
}

LteEstimate estimate_lte(double diff_norm, double solution_norm, const LteCoefficients& c,
                         EstimatorKind kind) {
    LteEstimate est{};
    const double sum = c.g + c.r;
    const double scale = std::max({std::abs(c.g), std::abs(c.r), 1.0});
    if (std::abs(sum) < 1e-8 * scale) {
        est.guard_triggered = true;
        est.value = diff_norm;
    } else {
        est.value = std::abs(c.g) / std::abs(sum) * diff_norm;
    }
    if (kind == EstimatorKind::Relative) {
        est.value = solution_norm > 0.0 ? est.value / solution_norm : est.value;
    }
    return est;
}

double controller_factor(double t_hat, double tol, double kappa) {
    if (t_hat < 0.0) throw std::invalid_argument("controller_factor: estimate must be nonnegative");
    if (t_hat == 0.0) return 1.5;
    return std::min(1.5, std::max(0.2, kappa * std::cbrt(tol / t_hat)));
}

double controller_next_step(double k_n, double t_hat, const AdaptConfig& cfg) {
    const double k = k_n * controller_factor(t_hat, cfg.tol, cfg.kappa);
    return std::min(std::max(k, cfg.k_min), cfg.k_max);
}

void AdaptHistory::push(double t, FieldVector u) {
    entries_.push_front(Entry{t, std::move(u)});
    if (entries_.size() > 4) entries_.pop_back();

    if (entries_.size() >= 3) {
        if (entries_.size() >= 4) {
            slope_older_ = slope_recent_;
            t_beta_older_ = t_beta_recent_;
        }
        const double k1 = entries_[0].t - entries_[1].t;  // newest realized step
        const double k2 = entries_[1].t - entries_[2].t;
        const DlnCoefficients c = dln_coefficients(theta_, StepPair{k1, k2});
        slope_recent_ = lin3(c.alpha[0] / c.k_hat, entries_[2].u, c.alpha[1] / c.k_hat,
                             entries_[1].u, c.alpha[2] / c.k_hat, entries_[0].u);
        t_beta_recent_ =
            c.beta[0] * entries_[2].t + c.beta[1] * entries_[1].t + c.beta[2] * entries_[0].t;
    }
}

FieldVector AdaptHistory::predict(double t_next) const {
    if (!ready()) throw std::logic_error("AdaptHistory::predict: history not ready");
    const double t_n = entries_[0].t;
    const double spread = t_beta_recent_ - t_beta_older_;
    const double lead = (t_next - t_n) / (2.0 * spread);
    const double c_recent = lead * (t_next + t_n - 2.0 * t_beta_older_);
    const double c_older = lead * (t_next + t_n - 2.0 * t_beta_recent_);

    FieldVector y = entries_[0].u;
    axpy(c_recent, slope_recent_, y);
    axpy(-c_older, slope_older_, y);
    return y;
}

}  // namespace dln
