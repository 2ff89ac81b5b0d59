/**
 * @file model.hpp
 * @brief Model constants and the pointwise relations between boundary slope,
 *        firing rate N and dilated firing rate Ñ = 1/(N + c).
 */
#pragma once

#include <limits>
#include <string>

namespace nnlif {

/// Nonnegative real that may also be +infinity. Persisted as the token `inf`.
struct ExtReal {
    double value = 0.0;
    bool infinite = false;

    static ExtReal finite(double v) { return {v, false}; }
    static ExtReal infinity() { return {std::numeric_limits<double>::infinity(), true}; }

    bool is_infinite() const { return infinite; }
    std::string to_string() const;
    bool operator==(const ExtReal& o) const;
};

struct ModelParams {
    double V_L = 0.0;
    double V_R = 0.0;
    double V_F = 1.0;
    double mu0 = 0.0;
    double b = 0.0;
    double a0 = 1.0;
    double a1 = 1.0;

    double b0() const { return V_L + mu0; }
    /// Throws PreconditionError naming the first broken invariant.
    void validate() const;
};

/// Constants of the dilated equation for a chosen c.
struct DilationParams {
    double c = 1.0;
    double b0 = 0.0;
    double b_c = 0.0;
    double a_c = 0.0;
    double b_star = 0.0;

    static DilationParams make(const ModelParams& p, double c);
    /// c = a0/a1, which makes a_c vanish.
    static DilationParams working(const ModelParams& p);
};

enum class Regime { StronglyExcitatory, MildlyExcitatory, Inhibitory };

std::string to_string(Regime r);

struct DriftReport {
    Regime regime = Regime::Inhibitory;
    bool tail_condition_applies = false; // excitatory data need an exponential tail bound
    bool drift_exc = false;              // b0 - (a0/a1) b <= V_F
    bool drift_inh = false;              // b0 <= V_F
};

ExtReal firing_rate_from_slope(double g, const ModelParams& p);
double tilde_n_from_slope(double g, double c, const ModelParams& p);
double tilde_n_from_M(double M, const ModelParams& p);
ExtReal invert_tilde_n(double tn, double c);
Regime classify_regime(const ModelParams& p);
DriftReport drift_hypothesis_check(const ModelParams& p);

/// Diffusivity a_c Ñ + a1 of the dilated equation.
double dilated_diffusivity(const DilationParams& d, const ModelParams& p, double tn);

inline double positive_part(double x) { return x > 0.0 ? x : 0.0; }

} // namespace nnlif
