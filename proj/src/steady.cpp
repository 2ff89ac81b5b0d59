#include "nnlif/steady.hpp"

#include "nnlif/errors.hpp"
#include "tridiag.hpp"

#include <algorithm>
#include <cmath>

namespace nnlif {

namespace {

double gap(const ModelParams& p) { return p.V_F - p.V_R; }

} // namespace

double SteadyState::left_branch(double v) const {
    const double L = gap(params);
    if (params.b > 0.0) {
        const double k = params.b / params.a1;
        return (std::exp(k * L) - 1.0) * std::exp(k * (v - params.V_R)) / Z;
    }
    if (params.b < 0.0) {
        const double k = params.b / params.a1;
        return (1.0 - std::exp(k * L)) * std::exp(k * (v - params.V_R));
    }
    return L;
}

double SteadyState::right_branch(double v) const {
    const double L = gap(params);
    if (params.b > 0.0) {
        const double k = params.b / params.a1;
        return (std::exp(k * L) - std::exp(k * (v - params.V_R))) / Z;
    }
    if (params.b < 0.0) {
        const double k = params.b / params.a1;
        return std::exp(k * (v - params.V_R)) - std::exp(k * L);
    }
    return params.V_F - v;
}

double SteadyState::value(double v) const {
    if (v >= params.V_F) return 0.0;
    return v <= params.V_R ? left_branch(v) : right_branch(v);
}

double SteadyState::derivative_left(double v) const {
    const double k = params.b / params.a1;
    if (v > params.V_R) return derivative_right(v);
    if (params.b == 0.0) return 0.0;
    return k * left_branch(v);
}

double SteadyState::derivative_right(double v) const {
    if (v < params.V_R) return derivative_left(v);
    if (params.b == 0.0) return -1.0;
    const double k = params.b / params.a1;
    const double e = std::exp(k * (v - params.V_R));
    return params.b > 0.0 ? -k * e / Z : k * e;
}

double SteadyState::derivative(double v) const {
    if (v < params.V_R) return derivative_left(v);
    if (v > params.V_R) return derivative_right(v);
    return 0.5 * (derivative_left(v) + derivative_right(v));
}

namespace {

SteadyState sample(SteadyState s, const Grid& grid) {
    s.profile = DensityProfile(grid);
    for (int i = 0; i < grid.n; ++i) s.profile[i] = s.value(grid.node(i));
    s.profile[grid.n] = 0.0;
    return s;
}

} // namespace

SteadyState steady_excitatory(const ModelParams& params, const Grid& grid) {
    params.validate();
    if (!(params.b > 0.0)) throw RegimeError("excitatory steady state needs b > 0");
    SteadyState s;
    s.params = params;
    s.regime = classify_regime(params);
    const double L = gap(params);
    s.Z = L * std::exp(params.b / params.a1 * L);
    s.M_inf = params.b / L;
    s.normalized = true;
    return sample(s, grid);
}

SteadyState steady_inhibitory(const ModelParams& params, const Grid& grid) {
    params.validate();
    if (params.b > 0.0) throw RegimeError("inhibitory steady state needs b <= 0");
    SteadyState s;
    s.params = params;
    s.regime = Regime::Inhibitory;
    if (params.b < 0.0)
        s.M_inf = -params.b * std::exp(params.b / params.a1 * gap(params));
    else
        s.M_inf = params.a1;
    s.normalized = false;
    return sample(s, grid);
}

SteadyState steady_state(const ModelParams& params, const Grid& grid) {
    return params.b > 0.0 ? steady_excitatory(params, grid) : steady_inhibitory(params, grid);
}

DensityProfile steady_numeric(const ModelParams& params, const Grid& grid) {
    params.validate();
    if (!(params.b > 0.0)) throw RegimeError("numeric steady state needs b > 0");
    const int m = grid.n - 1;
    const double h = grid.h;
    const double dif = params.a1 / (h * h);
    const double adv = params.b / (2.0 * h);
    std::vector<double> lower(m, dif + adv), diag(m, -2.0 * dif), upper(m, dif - adv), rhs(m, 0.0), work;
    lower[0] = 0.0;
    upper[static_cast<size_t>(m - 1)] = 0.0;
    rhs[static_cast<size_t>(grid.i_reset - 1)] = -1.0 / h;
    if (!detail::solve_tridiagonal(lower, diag, upper, rhs, work))
        throw ConfigError("stationary system is singular");
    DensityProfile p(grid);
    for (int i = 1; i < grid.n; ++i) {
        const double x = rhs[static_cast<size_t>(i - 1)];
        if (!(x > 0.0)) throw ConfigError("stationary solution lost positivity; refine the grid");
        p[i] = x;
    }
    const double mass = total_mass(p);
    for (double& x : p.values) x /= mass;
    return p;
}

RatioProfile reference_ratio(const DensityProfile& p, const SteadyState& s, bool guard) {
    const int n = p.n();
    if (s.profile.values.size() != p.values.size()) throw PreconditionError("profile and reference grids differ");
    RatioProfile r;
    r.h.assign(static_cast<size_t>(n) + 1, 0.0);
    for (int i = 1; i < n; ++i) {
        const double ref = s.profile[i];
        if (!(ref > 0.0)) throw DomainError("reference profile vanishes at an interior node");
        r.h[static_cast<size_t>(i)] = p[i] / ref;
    }
    r.h[0] = r.h[1];
    const double g_ref = boundary_slope(s.profile);
    if (!(g_ref > 0.0)) throw DomainError("reference profile has zero boundary slope");
    r.nu = boundary_slope(p) / g_ref;
    r.h[static_cast<size_t>(n)] = r.nu;
    if (guard) {
        double& last = r.h[static_cast<size_t>(n - 1)];
        const double scale = std::max(std::fabs(r.nu), 1e-300);
        if (std::fabs(last - r.nu) > 0.2 * scale) {
            last = 0.5 * (r.h[static_cast<size_t>(n - 2)] + r.nu);
            r.blended = true;
        }
    }
    return r;
}

} // namespace nnlif
