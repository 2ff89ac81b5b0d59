#include "nnlif/grid.hpp"

#include "nnlif/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace nnlif {

double Grid::node(int i) const {
    if (i == n) return v_f;
    return V_R + static_cast<double>(i - i_reset) * h;
}

std::vector<double> Grid::nodes() const {
    std::vector<double> v(static_cast<size_t>(n) + 1);
    for (int i = 0; i <= n; ++i) v[static_cast<size_t>(i)] = node(i);
    return v;
}

Grid make_grid(double v_min_target, double V_R, double V_F, int n) {
    if (n < 16) throw PreconditionError("grid.n must be at least 16");
    if (!(V_R < V_F)) throw ConfigError("grid requires V_R < V_F");
    if (!(v_min_target < V_R))
        throw ConfigError("grid.v_min must lie strictly below V_R");
    const double frac = (V_R - v_min_target) / (V_F - v_min_target);
    int i_reset = static_cast<int>(std::ceil(static_cast<double>(n) * frac - 1e-9));
    i_reset = std::max(i_reset, 1);
    if (i_reset > n - 2)
        throw ConfigError("grid.n too small to resolve (V_R, V_F) on the truncated domain");
    Grid g;
    g.n = n;
    g.i_reset = i_reset;
    g.V_R = V_R;
    g.v_f = V_F;
    g.h = (V_F - V_R) / static_cast<double>(n - i_reset);
    g.v_min = V_R - static_cast<double>(i_reset) * g.h;
    return g;
}

double tail_v_min(const ModelParams& params, double tol) {
    const double L = params.V_F - params.V_R;
    if (params.b > 0.0) {
        const double k = params.b / params.a1;
        const double pref = (1.0 - std::exp(-k * L)) / L;
        return params.V_R - std::log(std::max(1.0, pref) / tol) / k;
    }
    const double spread = std::sqrt(2.0 * std::max(params.a0, params.a1) * std::log(1.0 / tol));
    return std::min(params.V_R, params.b0()) - L - 2.0 * std::fabs(params.b) * params.a1 / params.a0 -
           spread;
}

Grid build_grid(const ModelParams& params, int n, double tol, std::optional<double> v_min_override) {
    if (n < 16) throw PreconditionError("grid.n must be at least 16");
    if (!(tol > 0.0 && tol <= 1e-3))
        throw PreconditionError("grid.tail_tolerance must lie in (0, 1e-3]");
    params.validate();
    const double target = v_min_override ? *v_min_override : tail_v_min(params, tol);
    Grid g = make_grid(target, params.V_R, params.V_F, n);
    g.heuristic_tail = !v_min_override && params.b <= 0.0;
    return g;
}

DensityProfile::DensityProfile(const Grid& g, std::vector<double> v) : grid(g), values(std::move(v)) {
    if (values.size() != static_cast<size_t>(g.n) + 1)
        throw PreconditionError("profile size does not match grid");
}

double total_mass(const DensityProfile& p) {
    const auto& v = p.values;
    if (v.empty()) return 0.0;
    double s = 0.5 * (v.front() + v.back());
    for (size_t i = 1; i + 1 < v.size(); ++i) s += v[i];
    return s * p.grid.h;
}

SlopeReport boundary_slope_report(const DensityProfile& p) {
    const int n = p.n();
    if (p[n] != 0.0) throw PreconditionError("boundary slope needs p(v_f) = 0");
    SlopeReport r;
    r.raw = (4.0 * p[n - 1] - p[n - 2]) / (2.0 * p.grid.h);
    if (r.raw >= 0.0) {
        r.g = r.raw;
    } else if (r.raw >= -1e-10) {
        r.status = SlopeStatus::Clamped;
    } else if (r.raw >= -1e-6) {
        r.status = SlopeStatus::Reported;
    } else {
        throw NumericalIntegrityError("strongly negative boundary slope at v_f");
    }
    return r;
}

double boundary_slope(const DensityProfile& p) { return boundary_slope_report(p).g; }

DensityProfile project_function(const std::function<double(double)>& f, const Grid& grid, bool normalize) {
    DensityProfile p(grid);
    for (int i = 0; i < grid.n; ++i) {
        const double x = f(grid.node(i));
        if (!(x >= 0.0)) throw DomainError("projected function is negative or not finite at a node");
        p[i] = x;
    }
    p[grid.n] = 0.0;
    if (normalize) {
        const double m = total_mass(p);
        if (!(m > 0.0)) throw DomainError("cannot normalize a profile with zero mass");
        for (double& x : p.values) x /= m;
    }
    return p;
}

double l1_distance(const DensityProfile& a, const DensityProfile& b) {
    if (a.values.size() != b.values.size()) throw PreconditionError("profiles live on different grids");
    DensityProfile d(a.grid);
    for (size_t i = 0; i < a.values.size(); ++i) d.values[i] = std::fabs(a.values[i] - b.values[i]);
    return total_mass(d);
}

double max_abs_difference(const DensityProfile& a, const DensityProfile& b) {
    if (a.values.size() != b.values.size()) throw PreconditionError("profiles live on different grids");
    double m = 0.0;
    for (size_t i = 0; i < a.values.size(); ++i) m = std::max(m, std::fabs(a.values[i] - b.values[i]));
    return m;
}

std::string format_number(double x) {
    if (std::isinf(x)) return "inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

void write_profile_csv(std::ostream& os, const DensityProfile& p) {
    os << "v,p\n";
    for (int i = 0; i <= p.n(); ++i) os << format_number(p.grid.node(i)) << ',' << format_number(p[i]) << '\n';
}

} // namespace nnlif
