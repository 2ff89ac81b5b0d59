#include "nnlif/solver_tau.hpp"

#include "nnlif/errors.hpp"
#include "tridiag.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

namespace nnlif {

void StepperConfig::validate() const {
    if (!(dtau > 0.0)) throw ConfigError("stepper.dtau must be positive");
    if (!(horizon > 0.0)) throw ConfigError("stepper.horizon must be positive");
    if (!(blowup_epsilon > 0.0 && blowup_epsilon <= 1e-4))
        throw ConfigError("stepper.blowup_epsilon must lie in (0, 1e-4]");
    if (snapshot_stride < 1) throw ConfigError("stepper.snapshot_stride must be at least 1");
}

const Snapshot* TauTrajectory::snapshot_at_index(int k) const {
    auto it = std::lower_bound(snapshots.begin(), snapshots.end(), k,
                               [](const Snapshot& s, int idx) { return s.index < idx; });
    if (it == snapshots.end() || it->index != k) return nullptr;
    return &*it;
}

namespace {

// Inside the stepper a negative stencil value comes from a diffusion front that
// is not yet resolved at v_f; it is clamped and counted rather than fatal.
SlopeReport stepper_slope(const DensityProfile& p) {
    const int n = p.n();
    SlopeReport r;
    r.raw = (4.0 * p[n - 1] - p[n - 2]) / (2.0 * p.grid.h);
    if (r.raw >= 0.0)
        r.g = r.raw;
    else
        r.status = r.raw >= -1e-10 ? SlopeStatus::Clamped : SlopeStatus::Reported;
    return r;
}

// Bernoulli function x / (e^x - 1)
double bernoulli(double x) {
    if (std::fabs(x) < 1e-8) return 1.0 - 0.5 * x;
    return x / std::expm1(x);
}

class Stepper {
public:
    Stepper(const Grid& grid, const ModelParams& params, const DilationParams& dil, double dtau, bool limit,
            Scheme scheme)
        : grid_(grid), params_(params), dil_(dil), dtau_(dtau), limit_(limit), scheme_(scheme) {
        const int n = grid.n;
        face_v_.resize(static_cast<size_t>(n));
        for (int j = 0; j < n; ++j) face_v_[static_cast<size_t>(j)] = 0.5 * (grid.node(j) + grid.node(j + 1));
        u_.resize(static_cast<size_t>(n));
        const size_t m = static_cast<size_t>(n - 1);
        lower_.resize(m);
        diag_.resize(m);
        upper_.resize(m);
        rhs_.resize(m);
        w_.resize(m);
    }

    void step(const DensityProfile& p, DensityProfile& out, StepInfo& info) {
        const int n = grid_.n;
        const double h = grid_.h;
        const SlopeReport sr = stepper_slope(p);
        info.g = sr.g;
        info.slope_status = sr.status;
        const double tn = limit_ ? 0.0 : tilde_n_from_slope(sr.g, dil_.c, params_);
        info.tilde_n = tn;
        const double A = limit_ ? params_.a1 : dilated_diffusivity(dil_, params_, tn);

        for (int j = 0; j < n; ++j) {
            const double v = face_v_[static_cast<size_t>(j)];
            u_[static_cast<size_t>(j)] = limit_ ? params_.b : (-v + dil_.b_c) * tn + params_.b;
        }
        const double kappa = dtau_ * A / (h * h);
        auto P = [&](int i) { return (i <= 0 || i >= n) ? 0.0 : p[i]; };
        const size_t ir = static_cast<size_t>(grid_.i_reset - 1);
        double couple = kappa;       // weight of p[n-1] in the reinjected amount
        double drift_out = 0.0, drift_leak = 0.0, left_coef = kappa;

        if (scheme_ == Scheme::SemiImplicit) {
            // explicit upwind drift, written so each term is a nonnegative product
            const double lam = dtau_ / h;
            for (int i = 1; i < n; ++i) {
                const double ur = u_[static_cast<size_t>(i)];
                const double ul = u_[static_cast<size_t>(i - 1)];
                const double keep = 1.0 - lam * (std::max(ur, 0.0) + std::max(-ul, 0.0));
                rhs_[static_cast<size_t>(i - 1)] =
                    P(i) * keep + lam * (std::max(ul, 0.0) * P(i - 1) + std::max(-ur, 0.0) * P(i + 1));
            }
            drift_out = std::max(u_[static_cast<size_t>(n - 1)], 0.0) * P(n - 1);
            drift_leak = std::max(-u_[0], 0.0) * P(1);
            rhs_[ir] += lam * drift_out;
            if (kappa != kappa_) assemble_diffusion(kappa, tn);
        } else {
            for (int i = 1; i < n; ++i) rhs_[static_cast<size_t>(i - 1)] = P(i);
            if (kappa != kappa_ || tn != tn_) assemble_fitted(kappa, A, tn);
            couple = kappa * bernoulli(-u_[static_cast<size_t>(n - 1)] * h / A);
            left_coef = kappa * bernoulli(u_[0] * h / A);
        }

        // implicit stage; the last-face outflux is reinjected at V_R
        std::vector<double>& u = rhs_;
        if (!detail::solve_tridiagonal(lower_, diag_, upper_, u, work_))
            throw NumericalIntegrityError("tridiagonal solve failed");
        const size_t last = static_cast<size_t>(n - 2);
        const double s = couple * u[last] / (1.0 - couple * w_[last]);

        out.grid = grid_;
        out.values.assign(static_cast<size_t>(n) + 1, 0.0);
        double min_value = 0.0, clamp = 0.0;
        for (int i = 1; i < n; ++i) {
            double x = u[static_cast<size_t>(i - 1)] + s * w_[static_cast<size_t>(i - 1)];
            if (x < 0.0) {
                min_value = std::min(min_value, x);
                if (x < -1e-12) throw NumericalIntegrityError("negative density beyond round-off");
                clamp += -x * h;
                x = 0.0;
            }
            out[i] = x;
        }
        info.min_value = min_value;
        info.clamp_mass = clamp;
        info.reinjected = dtau_ * drift_out + s * h;
        info.leak = dtau_ * drift_leak + left_coef * out[1] * h;
    }

private:
    void finish_assembly(double kappa, double tn) {
        kappa_ = kappa;
        tn_ = tn;
        const size_t m = diag_.size();
        lower_[0] = 0.0;
        upper_[m - 1] = 0.0;
        std::fill(w_.begin(), w_.end(), 0.0);
        w_[static_cast<size_t>(grid_.i_reset - 1)] = 1.0;
        if (!detail::solve_tridiagonal(lower_, diag_, upper_, w_, work_))
            throw NumericalIntegrityError("tridiagonal solve failed");
    }

    void assemble_diffusion(double kappa, double tn) {
        std::fill(lower_.begin(), lower_.end(), -kappa);
        std::fill(upper_.begin(), upper_.end(), -kappa);
        std::fill(diag_.begin(), diag_.end(), 1.0 + 2.0 * kappa);
        finish_assembly(kappa, tn);
    }

    // face j joins nodes j and j+1 with flux (A/h)[B(-x) p_j - B(x) p_{j+1}], x = u h / A
    void assemble_fitted(double kappa, double A, double tn) {
        const int n = grid_.n;
        const double h = grid_.h;
        for (int i = 1; i < n; ++i) {
            const double xr = u_[static_cast<size_t>(i)] * h / A;
            const double xl = u_[static_cast<size_t>(i - 1)] * h / A;
            const size_t r = static_cast<size_t>(i - 1);
            diag_[r] = 1.0 + kappa * (bernoulli(-xr) + bernoulli(xl));
            upper_[r] = -kappa * bernoulli(xr);
            lower_[r] = -kappa * bernoulli(-xl);
        }
        finish_assembly(kappa, tn);
    }

    Grid grid_;
    ModelParams params_;
    DilationParams dil_;
    double dtau_;
    bool limit_;
    Scheme scheme_;
    double kappa_ = -1.0;
    double tn_ = -1.0;
    std::vector<double> face_v_, u_, lower_, diag_, upper_, rhs_, w_, work_;
};

void check_profile(const DensityProfile& p) {
    if (p.values.size() != static_cast<size_t>(p.grid.n) + 1) throw PreconditionError("malformed profile");
    if (p[p.n()] != 0.0) throw PreconditionError("profile must vanish at v_f");
    for (double x : p.values)
        if (!(x >= 0.0)) throw PreconditionError("profile must be nonnegative and finite");
}

TauTrajectory run(const DensityProfile& p0, const ModelParams& params, const DilationParams& dil,
                  const StepperConfig& cfg, const RunHooks& hooks, bool limit) {
    params.validate();
    cfg.validate();
    check_profile(p0);
    const double dt_max = max_stable_dtau(p0.grid, params, dil, limit, cfg.scheme);
    if (cfg.dtau > dt_max)
        throw ConfigError("stepper.dtau exceeds the drift restriction h/(2 max|drift|) = " +
                          format_number(dt_max));

    TauTrajectory tr;
    tr.params = params;
    tr.dil = dil;
    tr.cfg = cfg;
    tr.limit = limit;
    const int K = static_cast<int>(std::ceil(cfg.horizon / cfg.dtau - 1e-9));
    tr.tau.reserve(static_cast<size_t>(K) + 1);
    tr.tilde_n.reserve(static_cast<size_t>(K) + 1);
    tr.g.reserve(static_cast<size_t>(K) + 1);
    tr.M.reserve(static_cast<size_t>(K) + 1);
    tr.mass.reserve(static_cast<size_t>(K) + 1);

    Stepper stepper(p0.grid, params, dil, cfg.dtau, limit, cfg.scheme);
    DensityProfile cur = p0, next(p0.grid), prev;
    cur[0] = 0.0;
    bool prev_plateau = false;
    double prev_mass = total_mass(cur);

    auto store = [&](int k, const DensityProfile& prof) {
        if (!tr.snapshots.empty() && tr.snapshots.back().index >= k) return;
        tr.snapshots.push_back({k, static_cast<double>(k) * cfg.dtau, prof});
    };

    for (int k = 0;; ++k) {
        const SlopeReport sr = stepper_slope(cur);
        if (sr.status == SlopeStatus::Reported) ++tr.reported_slopes;
        const double tn = limit ? 0.0 : tilde_n_from_slope(sr.g, dil.c, params);
        const double tau = static_cast<double>(k) * cfg.dtau;
        const double mass = total_mass(cur);
        tr.tau.push_back(tau);
        tr.tilde_n.push_back(tn);
        tr.g.push_back(sr.g);
        tr.M.push_back(params.a1 * sr.g);
        tr.mass.push_back(mass);
        if (k > 0) tr.max_step_mass_change = std::max(tr.max_step_mass_change, std::fabs(mass - prev_mass));
        prev_mass = mass;

        const bool plateau = tn <= cfg.blowup_epsilon;
        if (k > 0 && plateau != prev_plateau && !plateau) store(k - 1, prev);
        if (k % cfg.snapshot_stride == 0 || k == K || (k > 0 && plateau != prev_plateau)) store(k, cur);
        prev_plateau = plateau;

        const StepView view{k, tau, tn, sr.g, cur};
        if (hooks.observer) hooks.observer(view);
        if (k == K) break;
        if (hooks.stop && hooks.stop(view)) {
            store(k, cur);
            tr.stopped_early = true;
            break;
        }

        StepInfo info;
        stepper.step(cur, next, info);
        tr.clamp_mass_total += info.clamp_mass;
        tr.min_pre_clamp = std::min(tr.min_pre_clamp, info.min_value);
        tr.leak_total += info.leak;
        std::swap(prev, cur);
        std::swap(cur, next);
    }
    return tr;
}

} // namespace

std::string to_string(Scheme s) { return s == Scheme::SemiImplicit ? "semi_implicit" : "fitted_implicit"; }

Scheme scheme_from_string(const std::string& s) {
    if (s == "semi_implicit") return Scheme::SemiImplicit;
    if (s == "fitted_implicit") return Scheme::FittedImplicit;
    throw ConfigError("stepper.scheme must be semi_implicit or fitted_implicit");
}

double max_stable_dtau(const Grid& grid, const ModelParams& params, const DilationParams& dil, bool limit,
                       Scheme scheme) {
    if (scheme == Scheme::FittedImplicit) return std::numeric_limits<double>::infinity();
    double umax = std::fabs(params.b);
    if (!limit) {
        const double tn_max = 1.0 / dil.c;
        for (int j = 0; j < grid.n; ++j) {
            const double v = 0.5 * (grid.node(j) + grid.node(j + 1));
            umax = std::max(umax, std::fabs((-v + dil.b_c) * tn_max + params.b));
        }
    }
    if (umax == 0.0) return std::numeric_limits<double>::infinity();
    return grid.h / (2.0 * umax);
}

DensityProfile step_tau(const DensityProfile& p, const ModelParams& params, const DilationParams& dil,
                        double dtau, StepInfo* info, Scheme scheme) {
    check_profile(p);
    if (dtau > max_stable_dtau(p.grid, params, dil, false, scheme))
        throw ConfigError("dtau exceeds the drift restriction");
    Stepper s(p.grid, params, dil, dtau, false, scheme);
    DensityProfile out(p.grid);
    StepInfo local;
    s.step(p, out, info ? *info : local);
    return out;
}

DensityProfile step_limit(const DensityProfile& p, const ModelParams& params, double dtau, StepInfo* info,
                          Scheme scheme) {
    check_profile(p);
    const DilationParams dil = DilationParams::make(params, 1.0);
    if (dtau > max_stable_dtau(p.grid, params, dil, true, scheme))
        throw ConfigError("dtau exceeds the drift restriction");
    Stepper s(p.grid, params, dil, dtau, true, scheme);
    DensityProfile out(p.grid);
    StepInfo local;
    s.step(p, out, info ? *info : local);
    return out;
}

TauTrajectory run_tau(const DensityProfile& p0, const ModelParams& params, const DilationParams& dil,
                      const StepperConfig& cfg, const RunHooks& hooks) {
    return run(p0, params, dil, cfg, hooks, false);
}

TauTrajectory run_limit_equation(const DensityProfile& p0, const ModelParams& params, const StepperConfig& cfg,
                                 const RunHooks& hooks) {
    return run(p0, params, DilationParams::make(params, params.a0 / params.a1), cfg, hooks, true);
}

double flux_jump_residual(const DensityProfile& p, double a) {
    const Grid& g = p.grid;
    const int i = g.i_reset;
    if (i < 2 || i + 2 > g.n) throw PreconditionError("reset node too close to the grid ends");
    const double h = g.h;
    const double left = (3.0 * p[i] - 4.0 * p[i - 1] + p[i - 2]) / (2.0 * h);
    const double right = (-3.0 * p[i] + 4.0 * p[i + 1] - p[i + 2]) / (2.0 * h);
    const double dF = (3.0 * p[g.n] - 4.0 * p[g.n - 1] + p[g.n - 2]) / (2.0 * h);
    return (-a * right + a * left) - (-a * dF);
}

void write_series_csv(std::ostream& os, const TauTrajectory& tr) {
    os << "tau,tilde_n,M,mass\n";
    for (size_t k = 0; k < tr.tau.size(); ++k)
        os << format_number(tr.tau[k]) << ',' << format_number(tr.tilde_n[k]) << ',' << format_number(tr.M[k])
           << ',' << format_number(tr.mass[k]) << '\n';
}

} // namespace nnlif
