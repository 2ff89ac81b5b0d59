#include "nnlif/diagnostics.hpp"

#include "nnlif/errors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>

namespace nnlif {

double entropy_G(EntropyChoice G, double x) {
    return G == EntropyChoice::QuadraticCentered ? (x - 1.0) * (x - 1.0) : x * x;
}

double entropy_G1(EntropyChoice G, double x) {
    return G == EntropyChoice::QuadraticCentered ? 2.0 * (x - 1.0) : 2.0 * x;
}

double entropy_G2(EntropyChoice, double) { return 2.0; }

std::string to_string(EntropyChoice G) {
    return G == EntropyChoice::QuadraticCentered ? "quadratic_centered" : "quadratic";
}

namespace {

void require_same_grid(const DensityProfile& p, const SteadyState& s) {
    if (p.values.size() != s.profile.values.size()) throw PreconditionError("profile and reference grids differ");
}

double trapezoid(const std::vector<double>& f, double h) {
    if (f.size() < 2) return 0.0;
    double acc = 0.5 * (f.front() + f.back());
    for (size_t i = 1; i + 1 < f.size(); ++i) acc += f[i];
    return acc * h;
}

} // namespace

double relative_entropy(const DensityProfile& p, const SteadyState& s, EntropyChoice G) {
    require_same_grid(p, s);
    const RatioProfile r = reference_ratio(p, s);
    std::vector<double> f(r.h.size());
    for (size_t i = 0; i < f.size(); ++i) f[i] = s.profile.values[i] * entropy_G(G, r.h[i]);
    return trapezoid(f, p.grid.h);
}

namespace {

double dissipation_from_ratio(const RatioProfile& r, const SteadyState& s, EntropyChoice G, double a1, int i_reset,
                              double hgrid) {
    double grad = 0.0;
    const auto& w = s.profile.values;
    for (size_t j = 0; j + 1 < r.h.size(); ++j) {
        const double dh = (r.h[j + 1] - r.h[j]) / hgrid;
        const double weight = 0.5 * (w[j] * entropy_G2(G, r.h[j]) + w[j + 1] * entropy_G2(G, r.h[j + 1]));
        grad += weight * dh * dh * hgrid;
    }
    const double hR = r.h[static_cast<size_t>(i_reset)];
    const double gap = entropy_G(G, r.nu) - entropy_G(G, hR) - entropy_G1(G, hR) * (r.nu - hR);
    return a1 * grad + s.M_inf * gap;
}

double perturbation_from_ratio(const RatioProfile& r, const SteadyState& s, const Grid& grid, double tn,
                               const DilationParams& dil, EntropyChoice G) {
    if (std::fabs(dil.a_c) > 1e-14) throw PreconditionError("perturbation term needs c = a0/a1");
    if (tn == 0.0) return 0.0;
    std::vector<double> f(r.h.size());
    for (size_t i = 0; i < f.size(); ++i) {
        const double v = grid.node(static_cast<int>(i));
        const double x = r.h[i];
        const double phi = entropy_G1(G, x) * x - entropy_G(G, x);
        f[i] = phi * ((-v + dil.b_star) * s.derivative(v) - s.profile.values[i]);
    }
    return -tn * trapezoid(f, grid.h);
}

} // namespace

double entropy_dissipation(const DensityProfile& p, const SteadyState& s, EntropyChoice G,
                           const ModelParams& params) {
    require_same_grid(p, s);
    const RatioProfile r = reference_ratio(p, s);
    return dissipation_from_ratio(r, s, G, params.a1, p.grid.i_reset, p.grid.h);
}

double perturbation_term(const DensityProfile& p, const SteadyState& s, double tilde_n, const DilationParams& dil,
                         EntropyChoice G) {
    require_same_grid(p, s);
    const RatioProfile r = reference_ratio(p, s);
    return perturbation_from_ratio(r, s, p.grid, tilde_n, dil, G);
}

EntropyRow entropy_row(const DensityProfile& p, const SteadyState& s, EntropyChoice G, const ModelParams& params,
                       const DilationParams& dil, double tilde_n, double tau) {
    require_same_grid(p, s);
    const RatioProfile r = reference_ratio(p, s);
    EntropyRow row;
    row.tau = tau;
    std::vector<double> f(r.h.size());
    for (size_t i = 0; i < f.size(); ++i) f[i] = s.profile.values[i] * entropy_G(G, r.h[i]);
    row.S = trapezoid(f, p.grid.h);
    row.D = dissipation_from_ratio(r, s, G, params.a1, p.grid.i_reset, p.grid.h);
    row.E = perturbation_from_ratio(r, s, p.grid, tilde_n, dil, G);
    row.nu = r.nu;
    row.hVR = r.h[static_cast<size_t>(p.grid.i_reset)];
    return row;
}

EntropyReport entropy_series(const TauTrajectory& traj, const SteadyState& s, EntropyChoice G) {
    EntropyReport rep;
    rep.G = G;
    rep.min_dissipation = std::numeric_limits<double>::infinity();
    for (const Snapshot& snap : traj.snapshots) {
        const double tn = traj.tilde_n[static_cast<size_t>(snap.index)];
        rep.rows.push_back(entropy_row(snap.profile, s, G, traj.params, traj.dil, tn, snap.tau));
        rep.min_dissipation = std::min(rep.min_dissipation, rep.rows.back().D);
    }
    return rep;
}

void write_entropy_csv(std::ostream& os, const EntropyReport& r) {
    os << "tau,S,D,E,nu,hVR\n";
    for (const EntropyRow& x : r.rows)
        os << format_number(x.tau) << ',' << format_number(x.S) << ',' << format_number(x.D) << ','
           << format_number(x.E) << ',' << format_number(x.nu) << ',' << format_number(x.hVR) << '\n';
}

double control_nu_epsilon(const EntropyReport& r, double M_inf) {
    double eps = std::numeric_limits<double>::infinity();
    for (const EntropyRow& x : r.rows) {
        const double d = (x.nu - 1.0) * (x.nu - 1.0) * M_inf;
        if (d > 1e-14) eps = std::min(eps, x.D / d);
    }
    return eps;
}

double fit_decay_rate(const std::vector<double>& tau, const std::vector<double>& S) {
    if (tau.size() != S.size() || tau.size() < 4) throw PreconditionError("decay fit needs at least 4 samples");
    const size_t start = tau.size() / 2;
    double st = 0.0, sy = 0.0;
    const double m = static_cast<double>(tau.size() - start);
    for (size_t i = start; i < tau.size(); ++i) {
        if (!(S[i] > 0.0)) throw DomainError("entropy must be positive on the fit window");
        st += tau[i];
        sy += -std::log(S[i]);
    }
    st /= m;
    sy /= m;
    double num = 0.0, den = 0.0;
    for (size_t i = start; i < tau.size(); ++i) {
        const double dt = tau[i] - st;
        num += dt * (-std::log(S[i]) - sy);
        den += dt * dt;
    }
    if (!(den > 0.0)) throw DomainError("fit window has no spread in tau");
    return num / den;
}

double flux_variance_integral(const std::vector<double>& tau, const std::vector<double>& M, double M_inf) {
    if (tau.size() != M.size()) throw PreconditionError("series lengths differ");
    double acc = 0.0;
    for (size_t i = 1; i < tau.size(); ++i) {
        const double a = M[i - 1] - M_inf, b = M[i] - M_inf;
        acc += 0.5 * (a * a + b * b) * (tau[i] - tau[i - 1]);
    }
    return acc;
}

DeltaK delta_K_mean(const DensityProfile& p, const SteadyState& s, double K) {
    require_same_grid(p, s);
    if (s.params.b > 0.0) throw RegimeError("window mean needs an inhibitory reference");
    if (!(K > 0.0)) throw PreconditionError("window length must be positive");
    const Grid& g = p.grid;
    const double va = g.V_R - K;
    if (va < g.v_min - 1e-12 * std::max(1.0, std::fabs(g.v_min)))
        throw ConfigError("window V_R - K leaves the grid");
    const RatioProfile r = reference_ratio(p, s);
    // trapezoid over whole cells, linear interpolation in the partial cell
    const double x = (va - g.v_min) / g.h;
    int j0 = static_cast<int>(std::ceil(x - 1e-9));
    j0 = std::clamp(j0, 0, g.i_reset);
    double acc = 0.0;
    for (int j = j0; j < g.i_reset; ++j)
        acc += 0.5 * (r.h[static_cast<size_t>(j)] + r.h[static_cast<size_t>(j + 1)]) * g.h;
    if (j0 > 0) {
        const double frac = static_cast<double>(j0) - x;
        if (frac > 0.0) {
            const double hl = r.h[static_cast<size_t>(j0 - 1)], hr = r.h[static_cast<size_t>(j0)];
            const double ha = hr + (hl - hr) * frac;
            acc += 0.5 * (ha + hr) * frac * g.h;
        }
    }
    DeltaK out;
    out.delta = acc / K;
    out.C = total_mass(p) / s.left_branch(g.V_R);
    out.bound = out.C / K;
    return out;
}

double gamma_sup_excitatory(const ModelParams& p) {
    const double k = p.b / p.a1;
    const double bs = p.b0() - (p.a0 / p.a1) * p.b;
    double best = k * std::fabs(bs - p.V_R);
    if (bs > p.V_R) {
        const double hi = std::min(bs, p.V_F);
        auto f = [&](double v) {
            return (bs - v) * k * std::exp(k * v) / (std::exp(k * p.V_F) - std::exp(k * v));
        };
        const int m = 20000;
        int arg = 1;
        double fmax = -std::numeric_limits<double>::infinity();
        for (int i = 1; i < m; ++i) {
            const double v = p.V_R + (hi - p.V_R) * i / m;
            const double y = f(v);
            if (std::isfinite(y) && y > fmax) {
                fmax = y;
                arg = i;
            }
        }
        double lo = p.V_R + (hi - p.V_R) * (arg - 1) / m, up = p.V_R + (hi - p.V_R) * (arg + 1) / m;
        const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
        for (int it = 0; it < 100; ++it) {
            const double a = up - phi * (up - lo), b = lo + phi * (up - lo);
            if (f(a) > f(b))
                up = b;
            else
                lo = a;
        }
        const double y = f(0.5 * (lo + up));
        if (std::isfinite(y)) fmax = std::max(fmax, y);
        best = std::max(best, fmax);
    }
    return 1.0 + best;
}

double gamma_sup_inhibitory(const ModelParams& p) {
    const double b0 = p.b0();
    if (!(b0 > p.V_R)) return 1.0;
    // (b0 - v)/(V_F - v) decreases in v when b0 <= V_F, so the sup sits at V_R
    return 1.0 + (b0 - p.V_R) / (p.V_F - p.V_R);
}

DensityProfile inhibitory_reference(const Grid& grid, const ModelParams& params) {
    DensityProfile q(grid);
    for (int i = 0; i < grid.n; ++i) {
        const double v = grid.node(i);
        q[i] = i <= grid.i_reset ? 1.0 : (params.V_F - v) / (params.V_F - params.V_R);
    }
    q[grid.n] = 0.0;
    return q;
}

namespace {

struct Reference {
    std::vector<double> ref;
    double gamma_sup = 1.0;
    double C_I = 0.0;
    bool inhibitory = false;
};

Reference make_reference(const DensityProfile& p0, const SteadyState& s, const DilationParams& dil,
                         const ModelParams& params) {
    const DriftReport dr = drift_hypothesis_check(params);
    if (std::fabs(dil.a_c) > 1e-14) throw PreconditionError("super-solution check needs c = a0/a1");
    Reference r;
    if (params.b > 0.0) {
        if (!dr.drift_exc) throw RegimeError("super-solution needs b0 - (a0/a1) b <= V_F");
        if (s.profile.values.size() != p0.values.size()) throw PreconditionError("profile and reference grids differ");
        r.ref = s.profile.values;
        r.gamma_sup = gamma_sup_excitatory(params);
    } else {
        if (!dr.drift_inh) throw RegimeError("super-solution needs b0 <= V_F");
        r.ref = inhibitory_reference(p0.grid, params).values;
        r.gamma_sup = gamma_sup_inhibitory(params);
        r.inhibitory = true;
    }
    const int n = p0.n();
    for (int i = 0; i < n; ++i) {
        const double q = r.ref[static_cast<size_t>(i)];
        if (q > 0.0)
            r.C_I = std::max(r.C_I, p0[i] / q);
        else if (p0[i] > 0.0)
            throw DomainError("reference vanishes where the initial data is positive");
    }
    return r;
}

double violation(const DensityProfile& p, const std::vector<double>& ref, double factor) {
    double worst = 0.0;
    for (size_t i = 0; i < ref.size(); ++i) worst = std::max(worst, p.values[i] - factor * ref[i]);
    return worst;
}

} // namespace

SuperSolutionMonitor::SuperSolutionMonitor(const DensityProfile& p0, const SteadyState& s, const DilationParams& dil,
                                           const ModelParams& params) {
    Reference r = make_reference(p0, s, dil, params);
    ref_ = std::move(r.ref);
    rep_.gamma_sup = r.gamma_sup;
    rep_.C_I = r.C_I;
    rep_.inhibitory = r.inhibitory;
}

void SuperSolutionMonitor::observe(const StepView& v) {
    if (started_) integral_ += 0.5 * (v.tilde_n + last_tn_) * (v.tau - last_tau_);
    started_ = true;
    last_tau_ = v.tau;
    last_tn_ = v.tilde_n;
    const double factor = rep_.C_I * std::exp(rep_.gamma_sup * integral_);
    const double viol = violation(v.profile, ref_, factor);
    rep_.max_violation = std::max(rep_.max_violation, viol);
    if (viol > 1e-8) rep_.holds = false;
}

SuperSolutionReport check_super_solution(const TauTrajectory& traj, const SteadyState& s, const DilationParams& dil,
                                         const ModelParams& params) {
    if (traj.snapshots.empty() || traj.snapshots.front().index != 0)
        throw PreconditionError("trajectory must store its initial profile");
    Reference r = make_reference(traj.snapshots.front().profile, s, dil, params);
    SuperSolutionReport rep;
    rep.gamma_sup = r.gamma_sup;
    rep.C_I = r.C_I;
    rep.inhibitory = r.inhibitory;
    std::vector<double> cum(traj.tau.size(), 0.0);
    for (size_t k = 1; k < cum.size(); ++k)
        cum[k] = cum[k - 1] + 0.5 * (traj.tilde_n[k] + traj.tilde_n[k - 1]) * (traj.tau[k] - traj.tau[k - 1]);
    for (const Snapshot& snap : traj.snapshots) {
        const double factor = r.C_I * std::exp(r.gamma_sup * cum[static_cast<size_t>(snap.index)]);
        rep.max_violation = std::max(rep.max_violation, violation(snap.profile, r.ref, factor));
    }
    rep.holds = rep.max_violation <= 1e-8;
    return rep;
}

double poincare_constant(const std::vector<double>& w, double h) {
    const int N = static_cast<int>(w.size());
    if (N < 3) throw PreconditionError("weight needs at least three nodes");
    if (!(h > 0.0)) throw PreconditionError("spacing must be positive");
    for (int i = 0; i < N; ++i)
        if (!(w[static_cast<size_t>(i)] >= 0.0) || ((i > 0 && i < N - 1) && !(w[static_cast<size_t>(i)] > 0.0)))
            throw DomainError("weight must be positive on interior nodes");

    std::vector<double> we(static_cast<size_t>(N - 1));
    for (int e = 0; e + 1 < N; ++e) we[static_cast<size_t>(e)] = 0.5 * (w[static_cast<size_t>(e)] + w[static_cast<size_t>(e + 1)]);
    Eigen::VectorXd mass(N);
    for (int i = 0; i < N; ++i) {
        const double l = i > 0 ? we[static_cast<size_t>(i - 1)] : 0.0;
        const double r = i + 1 < N ? we[static_cast<size_t>(i)] : 0.0;
        mass(i) = 0.5 * h * (l + r);
    }
    const Eigen::VectorXd isq = mass.cwiseSqrt().cwiseInverse();

    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(N, N);
    for (int e = 0; e + 1 < N; ++e) {
        const double k = we[static_cast<size_t>(e)] / h;
        T(e, e) += k;
        T(e + 1, e + 1) += k;
        T(e, e + 1) -= k;
        T(e + 1, e) -= k;
    }
    T = isq.asDiagonal() * T * isq.asDiagonal();
    const Eigen::VectorXd d = mass.cwiseSqrt().normalized();
    const double shift = 4.0 * T.diagonal().maxCoeff() + 1.0;
    T += shift * d * d.transpose();

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw NumericalIntegrityError("eigensolve did not converge");
    const double alpha = es.eigenvalues()(0);
    if (!(alpha > 0.0)) throw NumericalIntegrityError("weighted eigenvalue is not positive");
    return alpha;
}

double poincare_constant(const DensityProfile& weight) { return poincare_constant(weight.values, weight.grid.h); }

} // namespace nnlif
