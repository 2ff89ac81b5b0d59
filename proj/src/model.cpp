#include "nnlif/model.hpp"

#include "nnlif/errors.hpp"

#include <cmath>
#include <cstdio>

namespace nnlif {

std::string ExtReal::to_string() const {
    if (infinite) return "inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    return buf;
}

bool ExtReal::operator==(const ExtReal& o) const {
    if (infinite || o.infinite) return infinite == o.infinite;
    return value == o.value;
}

void ModelParams::validate() const {
    const double all[] = {V_L, V_R, V_F, mu0, b, a0, a1};
    for (double x : all)
        if (!std::isfinite(x)) throw PreconditionError("model parameters must be finite");
    if (!(V_L <= V_R)) throw PreconditionError("params.V_L must satisfy V_L <= V_R");
    if (!(V_R < V_F)) throw PreconditionError("params.V_R must satisfy V_R < V_F");
    if (!(a0 > 0.0)) throw PreconditionError("params.a0 must be positive");
    if (!(a1 > 0.0)) throw PreconditionError("params.a1 must be positive");
}

DilationParams DilationParams::make(const ModelParams& p, double c) {
    if (!(c > 0.0) || !std::isfinite(c)) throw PreconditionError("dilation.c must be positive");
    DilationParams d;
    d.c = c;
    d.b0 = p.b0();
    d.b_c = d.b0 - c * p.b;
    const double working_c = p.a0 / p.a1;
    d.a_c = (c == working_c) ? 0.0 : p.a0 - c * p.a1;
    d.b_star = d.b0 - working_c * p.b;
    return d;
}

DilationParams DilationParams::working(const ModelParams& p) { return make(p, p.a0 / p.a1); }

std::string to_string(Regime r) {
    switch (r) {
    case Regime::StronglyExcitatory: return "StronglyExcitatory";
    case Regime::MildlyExcitatory: return "MildlyExcitatory";
    case Regime::Inhibitory: return "Inhibitory";
    }
    return "Unknown";
}

ExtReal firing_rate_from_slope(double g, const ModelParams& p) {
    if (!(g >= 0.0)) throw PreconditionError("boundary slope must be nonnegative");
    const double s = p.a1 * g;
    if (s >= 1.0) return ExtReal::infinity();
    return ExtReal::finite(p.a0 * g / (1.0 - s));
}

double tilde_n_from_slope(double g, double c, const ModelParams& p) {
    if (!(g >= 0.0)) throw PreconditionError("boundary slope must be nonnegative");
    if (!(c > 0.0)) throw PreconditionError("dilation parameter c must be positive");
    const double r = positive_part(1.0 - p.a1 * g);
    if (r == 0.0) return 0.0;
    const double tn = r / (p.a0 * g + c * r);
    return std::min(tn, 1.0 / c);
}

double tilde_n_from_M(double M, const ModelParams& p) {
    if (!(M >= 0.0)) throw PreconditionError("boundary flux must be nonnegative");
    const double r = positive_part(1.0 - M);
    if (r == 0.0) return 0.0;
    return (p.a1 / p.a0) * r / (M + r);
}

ExtReal invert_tilde_n(double tn, double c) {
    if (!(c > 0.0)) throw PreconditionError("dilation parameter c must be positive");
    if (!(tn >= 0.0) || tn > (1.0 / c) * (1.0 + 1e-12))
        throw RangeError("value of the dilated rate outside [0, 1/c]");
    if (tn == 0.0) return ExtReal::infinity();
    return ExtReal::finite(std::max(0.0, 1.0 / tn - c));
}

Regime classify_regime(const ModelParams& p) {
    const double gap = p.V_F - p.V_R;
    if (p.b >= gap) return Regime::StronglyExcitatory;
    if (p.b > 0.0) return Regime::MildlyExcitatory;
    return Regime::Inhibitory;
}

DriftReport drift_hypothesis_check(const ModelParams& p) {
    DriftReport r;
    r.regime = classify_regime(p);
    r.tail_condition_applies = p.b > 0.0;
    r.drift_exc = p.b0() - (p.a0 / p.a1) * p.b <= p.V_F;
    r.drift_inh = p.b0() <= p.V_F;
    return r;
}

double dilated_diffusivity(const DilationParams& d, const ModelParams& p, double tn) {
    return d.a_c * tn + p.a1;
}

} // namespace nnlif
