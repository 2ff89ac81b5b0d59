/**
 * @file timescale.hpp
 * @brief Map between the dilated time τ and the original time t, blow-up
 *        interval detection, lifespan estimate and the generalized solution.
 */
#pragma once

#include "nnlif/solver_tau.hpp"

#include <string>
#include <vector>

namespace nnlif {

struct TimeMap {
    std::vector<double> taus; // strictly increasing
    std::vector<double> ts;   // nondecreasing, ts[0] = 0

    /// Piecewise-linear map given by its nodes; checks monotonicity.
    static TimeMap from_samples(std::vector<double> taus, std::vector<double> ts);
    /// t at an arbitrary τ by linear interpolation.
    double t_at(double tau) const;
};

/// Cumulative trapezoid of a sampled Ñ.
TimeMap forward_time(const std::vector<double>& tau, const std::vector<double>& tilde_n, double c);
TimeMap forward_time(const TauTrajectory& traj, double c);

/// sup{τ : t(τ) = t}, the right end of the preimage.
double inverse_time(const TimeMap& map, double t);

enum class LifespanStatus { FiniteConverged, GrowingUndetermined };
std::string to_string(LifespanStatus s);

struct Lifespan {
    double T_star = 0.0;
    LifespanStatus status = LifespanStatus::GrowingUndetermined;
    double tail_increment = 0.0;
};

Lifespan lifespan(const std::vector<double>& tau, const std::vector<double>& tilde_n, double c);
Lifespan lifespan(const TauTrajectory& traj, double c);

struct GeneralizedSample {
    DensityProfile profile;
    ExtReal N;
    double tau = 0.0;
    bool resolution_warning = false;
};

GeneralizedSample sample_generalized(const TauTrajectory& traj, const TimeMap& map, double t);

struct BlowupEvent {
    double tau1 = 0.0;
    double tau2 = 0.0;
    int index1 = 0;
    int index2 = 0;
    double t_star = 0.0; // t at the right end, so sampling at t_star gives the right limit
    double delta_tau = 0.0;
    bool terminated = true;
};

std::vector<BlowupEvent> detect_blowups(const std::vector<double>& tau, const std::vector<double>& tilde_n,
                                        double eps);
std::vector<BlowupEvent> detect_blowups(const TauTrajectory& traj, double eps);

struct JumpCheck {
    double l1_gap = 0.0;
    double delta_tau_independent = 0.0;
    bool flux_recovered = false; // false if the limit flux never fell below 1
};

/// Re-runs the limit equation from the snapshot at τ₁ and compares with τ₂.
/// For an event that reaches the horizon the limit run stops there and
/// flux_recovered stays false when the flux never fell below 1.
JumpCheck verify_jump(const TauTrajectory& traj, const BlowupEvent& event, const ModelParams& params);

} // namespace nnlif
