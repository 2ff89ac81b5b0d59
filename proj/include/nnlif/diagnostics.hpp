/**
 * @file diagnostics.hpp
 * @brief Relative entropy against a steady profile, its dissipation and
 *        perturbation terms, decay-rate fits, flux-control integrals,
 *        super-solution bounds and a weighted Poincaré constant.
 */
#pragma once

#include "nnlif/solver_tau.hpp"
#include "nnlif/steady.hpp"

#include <ostream>
#include <string>
#include <vector>

namespace nnlif {

enum class EntropyChoice {
    QuadraticCentered, // G(x) = (x - 1)^2
    Quadratic,         // G(x) = x^2
};

double entropy_G(EntropyChoice G, double x);
double entropy_G1(EntropyChoice G, double x);
double entropy_G2(EntropyChoice G, double x);
std::string to_string(EntropyChoice G);

double relative_entropy(const DensityProfile& p, const SteadyState& s, EntropyChoice G);

/// Gradient part plus boundary convexity gap; both are nonnegative.
double entropy_dissipation(const DensityProfile& p, const SteadyState& s, EntropyChoice G,
                           const ModelParams& params);

/// Extra term of the nonlinear equation; needs a_c = 0.
double perturbation_term(const DensityProfile& p, const SteadyState& s, double tilde_n, const DilationParams& dil,
                         EntropyChoice G);

struct EntropyRow {
    double tau = 0.0;
    double S = 0.0;
    double D = 0.0;
    double E = 0.0;
    double nu = 0.0;
    double hVR = 0.0;
};

struct EntropyReport {
    EntropyChoice G = EntropyChoice::QuadraticCentered;
    std::vector<EntropyRow> rows;
    double min_dissipation = 0.0;
};

EntropyRow entropy_row(const DensityProfile& p, const SteadyState& s, EntropyChoice G, const ModelParams& params,
                       const DilationParams& dil, double tilde_n, double tau);

/// One row per stored snapshot.
EntropyReport entropy_series(const TauTrajectory& traj, const SteadyState& s, EntropyChoice G);

void write_entropy_csv(std::ostream& os, const EntropyReport& r);

/// Largest ε with D ≥ ε M∞ (ν - 1)^2 on every row where ν ≠ 1.
double control_nu_epsilon(const EntropyReport& r, double M_inf);

/// Least-squares slope of -ln S against τ on the last half of the samples.
double fit_decay_rate(const std::vector<double>& tau, const std::vector<double>& S);

/// Trapezoidal integral of (M - M∞)^2.
double flux_variance_integral(const std::vector<double>& tau, const std::vector<double>& M, double M_inf);

struct DeltaK {
    double delta = 0.0;
    double bound = 0.0; // C / K
    double C = 0.0;     // mass / inf of p∞ left of V_R
};

DeltaK delta_K_mean(const DensityProfile& p, const SteadyState& s, double K);

struct SuperSolutionReport {
    bool holds = true;
    double max_violation = 0.0;
    double gamma_sup = 1.0;
    double C_I = 0.0;
    bool inhibitory = false;
};

double gamma_sup_excitatory(const ModelParams& params);
double gamma_sup_inhibitory(const ModelParams& params);

/// Piecewise-linear reference used for b <= 0: 1 left of V_R, linear to 0 at V_F.
DensityProfile inhibitory_reference(const Grid& grid, const ModelParams& params);

/// Checks p ≤ C_I exp(γ_sup ∫Ñ) ref at every observed step.
class SuperSolutionMonitor {
public:
    SuperSolutionMonitor(const DensityProfile& p0, const SteadyState& s, const DilationParams& dil,
                         const ModelParams& params);
    void observe(const StepView& v);
    SuperSolutionReport report() const { return rep_; }

private:
    std::vector<double> ref_;
    SuperSolutionReport rep_;
    double integral_ = 0.0;
    double last_tau_ = 0.0;
    double last_tn_ = 0.0;
    bool started_ = false;
};

/// Same check on the stored snapshots of a trajectory, with ∫Ñ from the series.
SuperSolutionReport check_super_solution(const TauTrajectory& traj, const SteadyState& s, const DilationParams& dil,
                                         const ModelParams& params);

/// Smallest nonzero eigenvalue of ∫w|f'|^2 / ∫w f^2 for P1 elements with a
/// lumped mass, with the weighted constants deflated away.
double poincare_constant(const std::vector<double>& weight, double h);
double poincare_constant(const DensityProfile& weight);

} // namespace nnlif
