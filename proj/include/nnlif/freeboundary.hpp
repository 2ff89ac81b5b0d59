/**
 * @file freeboundary.hpp
 * @brief Moving-boundary reformulation of the dilated equation: the γ = β²
 *        ODE driven by the flux M(s), the drift D(s;M), the boundaries ℓ and
 *        ℓ_R, a check of the change of variables against a τ-trajectory, and
 *        a heat-kernel Volterra solver for M(s).
 *
 * All quantities live in coordinates translated so that V_F = 0. The shift is
 * applied internally; callers pass the untranslated ModelParams.
 */
#pragma once

#include "nnlif/solver_tau.hpp"

#include <functional>
#include <vector>

namespace nnlif {

/// Parameters translated by -V_F (V_F becomes 0, b0 becomes b0 - V_F).
ModelParams translated(const ModelParams& p);

struct GammaState {
    double s = 0.0;
    double M = 0.0;
    double gamma = 1.0;
    double beta = 1.0;
    double tn = 0.0;
    double a_tilde = 0.0;
    double mu_tilde = 0.0;
    double D = 0.0;
    double F = 0.0;
};

struct FreeBoundaryBounds {
    double F_max = 0.0;      // 2 / min(a0, a1 c)
    double D_max = 0.0;      // max(|b0|/c, |b|) / min(a0/c, a1)
    double lipschitz = 0.0;  // L = (max(|b0|, |b| c) + 1) / min(a0, a1 c)
};

FreeBoundaryBounds free_boundary_bounds(const ModelParams& params, double c);

double tilde_n_gamma(double gamma, double M, const ModelParams& params, double c);

/// 2Ñ/ã; throws InvariantError if the bound 2/min(a0, a1 c) fails.
double F_rhs(double gamma, double M, const ModelParams& params, double c);

/// μ̃/(β ã) with the translated b0.
double drift_D(const GammaState& state, const ModelParams& params, double c);

/// Classical RK4 for γ' = F(γ, M(s)), γ(0) = 1, with M linear between samples.
/// `substeps` RK4 steps are taken per sample interval.
std::vector<GammaState> integrate_gamma(const std::vector<double>& s, const std::vector<double>& M,
                                        const ModelParams& params, double c, int substeps = 1);

struct BoundaryPath {
    std::vector<double> s;
    std::vector<double> ell;
    std::vector<double> ell_R;
    double ell_I = 0.0;
    double lipschitz_max = 0.0; // largest (|Δℓ| + |Δℓ_R|)/Δs over consecutive samples
};

/// ℓ = ℓ_I - ∫D (trapezoid), ℓ_R = ℓ + V_R β with the translated V_R.
BoundaryPath boundaries(const std::vector<GammaState>& states, double ell_I, const ModelParams& params, double c);

struct TransformCheck {
    std::vector<double> tau;
    std::vector<double> s;           // S(τ)
    std::vector<double> M;           // g / β²
    std::vector<double> beta_direct; // exp ∫Ñ
    std::vector<GammaState> states;  // from integrate_gamma on (s, M)
    BoundaryPath path;
    double beta_gap = 0.0;
    bool bounds_ok = true;
    double v_shift = 0.0; // V_F subtracted from every voltage
};

TransformCheck cross_check_transform(const TauTrajectory& traj, const ModelParams& params, double c);

/// Flux series M(s) of a τ-trajectory, linearly interpolated at s.
double transformed_flux_at(const TransformCheck& tc, double s);

struct VolterraResult {
    std::vector<double> s;
    std::vector<double> M;
    std::vector<GammaState> states;
    BoundaryPath path;
    double sigma = 0.0;
    int halvings = 0;
    int iterations = 0;
    std::vector<double> gaps;  // max-norm change per Picard iteration
    double max_ratio = 0.0;    // largest gap ratio in the accepted run
};

/// Picard iteration for the boundary flux on [0, sigma]. `u_prime` is ∂_x u_I
/// in translated coordinates (x ≤ ℓ_I); it is taken as 0 below `x_min`.
VolterraResult volterra_M(const std::function<double(double)>& u_prime, double x_min, double ell_I,
                          const ModelParams& params, double c, double sigma, int intervals = 200);

/// Same, with u_I given as a nodal profile in v coordinates (cell slopes).
VolterraResult volterra_M(const DensityProfile& p0, const ModelParams& params, double c, double sigma,
                          int intervals = 200);

} // namespace nnlif
