/**
 * @file solver_tau.hpp
 * @brief Semi-implicit time stepping of the dilated equation and of the
 *        linear limit equation (Ñ frozen at zero).
 *
 * One step: Ñ from the current boundary slope, explicit upwind drift,
 * implicit diffusion, and reinjection at V_R of exactly the mass that left
 * through the last cell face, so the trapezoidal mass is conserved.
 */
#pragma once

#include "nnlif/grid.hpp"
#include "nnlif/model.hpp"

#include <functional>
#include <string>
#include <vector>

namespace nnlif {

enum class Scheme {
    SemiImplicit,   // explicit upwind drift, implicit diffusion
    FittedImplicit, // implicit exponentially fitted drift-diffusion fluxes
};

std::string to_string(Scheme s);
Scheme scheme_from_string(const std::string& s);

struct StepperConfig {
    double dtau = 1e-4;
    Scheme scheme = Scheme::SemiImplicit;
    int snapshot_stride = 100;
    double blowup_epsilon = 1e-8;
    double horizon = 1.0;

    void validate() const;
};

struct StepInfo {
    double tilde_n = 0.0;     // value used for the step (lagged)
    double g = 0.0;           // boundary slope at the start of the step
    double reinjected = 0.0;  // mass put back at V_R
    double leak = 0.0;        // mass lost through v_min
    double clamp_mass = 0.0;  // mass removed by clamping round-off negatives
    double min_value = 0.0;   // most negative node value before clamping
    SlopeStatus slope_status = SlopeStatus::Ok;
};

struct Snapshot {
    int index = 0;
    double tau = 0.0;
    DensityProfile profile;
};

struct TauTrajectory {
    ModelParams params;
    DilationParams dil;
    StepperConfig cfg;
    bool limit = false;

    std::vector<double> tau;
    std::vector<double> tilde_n;
    std::vector<double> g;
    std::vector<double> M;    // a1 * g
    std::vector<double> mass;
    std::vector<Snapshot> snapshots;

    double clamp_mass_total = 0.0;
    double min_pre_clamp = 0.0;
    double leak_total = 0.0;
    double max_step_mass_change = 0.0;
    int reported_slopes = 0;
    bool stopped_early = false;

    const Snapshot* snapshot_at_index(int k) const;
    const DensityProfile& final_profile() const { return snapshots.back().profile; }
};

struct StepView {
    int index;
    double tau;
    double tilde_n;
    double g;
    const DensityProfile& profile;
};

struct RunHooks {
    /// Called for every recorded state, including the initial one.
    std::function<void(const StepView&)> observer;
    /// Return true to end the run after recording the current state.
    std::function<bool(const StepView&)> stop;
};

/// Semi-implicit step with explicit lagged Ñ.
DensityProfile step_tau(const DensityProfile& p, const ModelParams& params, const DilationParams& dil,
                        double dtau, StepInfo* info = nullptr, Scheme scheme = Scheme::SemiImplicit);

/// Same step with Ñ frozen at zero: drift b, diffusivity a1, reset flux a1 g.
DensityProfile step_limit(const DensityProfile& p, const ModelParams& params, double dtau,
                          StepInfo* info = nullptr, Scheme scheme = Scheme::SemiImplicit);

/// Largest dtau allowed by the drift restriction dtau <= h / (2 max|drift|);
/// infinite for the fitted scheme.
double max_stable_dtau(const Grid& grid, const ModelParams& params, const DilationParams& dil, bool limit,
                       Scheme scheme = Scheme::SemiImplicit);

TauTrajectory run_tau(const DensityProfile& p0, const ModelParams& params, const DilationParams& dil,
                      const StepperConfig& cfg, const RunHooks& hooks = {});

TauTrajectory run_limit_equation(const DensityProfile& p0, const ModelParams& params,
                                 const StepperConfig& cfg, const RunHooks& hooks = {});

/// [-a p'(V_R+) + a p'(V_R-)] - [-a p'(V_F-)] with second-order one-sided differences.
double flux_jump_residual(const DensityProfile& p, double diffusivity);

void write_series_csv(std::ostream& os, const TauTrajectory& traj);

} // namespace nnlif
