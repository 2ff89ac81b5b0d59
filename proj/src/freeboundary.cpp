#include "nnlif/freeboundary.hpp"

#include "nnlif/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace nnlif {

ModelParams translated(const ModelParams& p) {
    ModelParams q = p;
    q.V_L = p.V_L - p.V_F;
    q.V_R = p.V_R - p.V_F;
    q.V_F = 0.0;
    return q;
}

FreeBoundaryBounds free_boundary_bounds(const ModelParams& params, double c) {
    const ModelParams q = translated(params);
    const double b0 = q.b0();
    FreeBoundaryBounds B;
    B.F_max = 2.0 / std::min(q.a0, q.a1 * c);
    B.D_max = std::max(std::fabs(b0) / c, std::fabs(q.b)) / std::min(q.a0 / c, q.a1);
    B.lipschitz = (std::max(std::fabs(b0), std::fabs(q.b) * c) + 1.0) / std::min(q.a0, q.a1 * c);
    return B;
}

double tilde_n_gamma(double gamma, double M, const ModelParams& params, double c) {
    if (!(gamma >= 1.0 - 1e-12)) throw PreconditionError("gamma must be at least 1");
    if (!(M >= 0.0)) throw PreconditionError("flux M must be nonnegative");
    if (!(c > 0.0)) throw PreconditionError("dilation parameter c must be positive");
    const double x = gamma * M;
    const double r = positive_part(1.0 - params.a1 * x);
    if (r == 0.0) return 0.0;
    return std::min(r / (params.a0 * x + c * r), 1.0 / c);
}

namespace {

double a_tilde_of(double tn, const ModelParams& p, double c) { return tn * p.a0 + (1.0 - c * tn) * p.a1; }

} // namespace

double F_rhs(double gamma, double M, const ModelParams& params, double c) {
    const double tn = tilde_n_gamma(gamma, M, params, c);
    const double F = 2.0 * tn / a_tilde_of(tn, params, c);
    const double bound = 2.0 / std::min(params.a0, params.a1 * c);
    if (F > bound * (1.0 + 1e-12) || F < 0.0) throw InvariantError("gamma right-hand side leaves its bound");
    return F;
}

double drift_D(const GammaState& st, const ModelParams& params, double c) {
    const ModelParams q = translated(params);
    const double mu = st.tn * q.b0() + (1.0 - c * st.tn) * q.b;
    return mu / (st.beta * a_tilde_of(st.tn, q, c));
}

namespace {

GammaState make_state(double s, double M, double gamma, const ModelParams& params, double c) {
    const ModelParams q = translated(params);
    GammaState st;
    st.s = s;
    st.M = M;
    st.gamma = gamma;
    st.beta = std::sqrt(gamma);
    st.tn = tilde_n_gamma(gamma, M, q, c);
    st.a_tilde = a_tilde_of(st.tn, q, c);
    st.mu_tilde = st.tn * q.b0() + (1.0 - c * st.tn) * q.b;
    st.D = st.mu_tilde / (st.beta * st.a_tilde);
    st.F = 2.0 * st.tn / st.a_tilde;
    return st;
}

} // namespace

std::vector<GammaState> integrate_gamma(const std::vector<double>& s, const std::vector<double>& M,
                                        const ModelParams& params, double c, int substeps) {
    if (s.size() != M.size() || s.empty()) throw PreconditionError("flux samples must match the s axis");
    if (s.front() != 0.0) throw PreconditionError("s axis must start at 0");
    if (substeps < 1) throw PreconditionError("substeps must be at least 1");
    for (size_t k = 0; k < s.size(); ++k) {
        if (!(M[k] >= 0.0)) throw PreconditionError("flux M must be nonnegative");
        if (k > 0 && !(s[k] > s[k - 1])) throw PreconditionError("s samples must be strictly increasing");
    }
    const double C = 2.0 / std::min(params.a0, params.a1 * c);
    std::vector<GammaState> out;
    out.reserve(s.size());
    double gamma = 1.0;
    out.push_back(make_state(0.0, M[0], gamma, params, c));
    for (size_t k = 0; k + 1 < s.size(); ++k) {
        const double s0 = s[k], ds = s[k + 1] - s[k];
        auto Mat = [&](double x) { return M[k] + (M[k + 1] - M[k]) * (x - s0) / ds; };
        const double h = ds / substeps;
        for (int j = 0; j < substeps; ++j) {
            const double t = s0 + j * h;
            const double k1 = F_rhs(gamma, Mat(t), params, c);
            const double k2 = F_rhs(gamma + 0.5 * h * k1, Mat(t + 0.5 * h), params, c);
            const double k3 = F_rhs(gamma + 0.5 * h * k2, Mat(t + 0.5 * h), params, c);
            const double k4 = F_rhs(gamma + h * k3, Mat(t + h), params, c);
            gamma += h * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0;
        }
        const double sk = s[k + 1];
        if (gamma < 1.0 - 1e-12 || gamma > (C * sk + 1.0) * (1.0 + 1e-9))
            throw InvariantError("gamma left the interval [1, C s + 1]");
        out.push_back(make_state(sk, M[k + 1], gamma, params, c));
    }
    return out;
}

BoundaryPath boundaries(const std::vector<GammaState>& states, double ell_I, const ModelParams& params, double c) {
    const ModelParams q = translated(params);
    const double L = free_boundary_bounds(params, c).lipschitz;
    BoundaryPath b;
    b.ell_I = ell_I;
    const size_t n = states.size();
    b.s.resize(n);
    b.ell.resize(n);
    b.ell_R.resize(n);
    double ell = ell_I;
    for (size_t k = 0; k < n; ++k) {
        if (k > 0) ell -= 0.5 * (states[k].D + states[k - 1].D) * (states[k].s - states[k - 1].s);
        b.s[k] = states[k].s;
        b.ell[k] = ell;
        b.ell_R[k] = ell + q.V_R * states[k].beta;
    }
    // sums of consecutive quotients bound every pair quotient, so neighbours suffice
    for (size_t k = 1; k < n; ++k) {
        const double ds = b.s[k] - b.s[k - 1];
        const double qk = (std::fabs(b.ell[k] - b.ell[k - 1]) + std::fabs(b.ell_R[k] - b.ell_R[k - 1])) / ds;
        b.lipschitz_max = std::max(b.lipschitz_max, qk);
    }
    if (b.lipschitz_max > 2.0 * L * (1.0 + 1e-9)) throw InvariantError("moving boundaries exceed the Lipschitz bound");
    return b;
}

TransformCheck cross_check_transform(const TauTrajectory& traj, const ModelParams& params, double c) {
    if (traj.limit) throw PreconditionError("transform check needs a dilated-equation trajectory");
    if (std::fabs(traj.dil.c - c) > 1e-14 * std::max(1.0, c)) throw PreconditionError("c differs from the run");
    const size_t n = traj.tau.size();
    if (n < 2) throw PreconditionError("trajectory too short");
    TransformCheck tc;
    tc.v_shift = params.V_F;
    tc.tau = traj.tau;
    tc.s.assign(n, 0.0);
    tc.M.assign(n, 0.0);
    tc.beta_direct.assign(n, 1.0);
    double I = 0.0;
    double prev_rate = 0.0;
    for (size_t k = 0; k < n; ++k) {
        const double tn = traj.tilde_n[k];
        if (k > 0) I += 0.5 * (tn + traj.tilde_n[k - 1]) * (traj.tau[k] - traj.tau[k - 1]);
        const double beta = std::exp(I);
        const double rate = beta * beta * a_tilde_of(tn, params, c);
        if (k > 0) {
            tc.s[k] = tc.s[k - 1] + 0.5 * (rate + prev_rate) * (traj.tau[k] - traj.tau[k - 1]);
            if (!(tc.s[k] > tc.s[k - 1])) throw NumericalIntegrityError("S(tau) is not increasing");
        }
        prev_rate = rate;
        tc.beta_direct[k] = beta;
        tc.M[k] = traj.g[k] / (beta * beta);
    }
    tc.states = integrate_gamma(tc.s, tc.M, params, c);
    const FreeBoundaryBounds B = free_boundary_bounds(params, c);
    for (size_t k = 0; k < n; ++k) {
        tc.beta_gap = std::max(tc.beta_gap, std::fabs(tc.states[k].beta - tc.beta_direct[k]));
        if (tc.states[k].F > B.F_max * (1.0 + 1e-12) || std::fabs(tc.states[k].D) > B.D_max * (1.0 + 1e-12))
            tc.bounds_ok = false;
    }
    tc.path = boundaries(tc.states, 0.0, params, c);
    return tc;
}

double transformed_flux_at(const TransformCheck& tc, double s) {
    const auto& S = tc.s;
    if (s <= S.front()) return tc.M.front();
    if (s >= S.back()) throw OutOfLifespanError("s beyond the transformed trajectory");
    const size_t j = static_cast<size_t>(std::upper_bound(S.begin(), S.end(), s) - S.begin());
    const size_t i = j - 1;
    const double w = (s - S[i]) / (S[j] - S[i]);
    return tc.M[i] + w * (tc.M[j] - tc.M[i]);
}

namespace {

constexpr std::array<double, 4> kGaussX = {-0.8611363115940526, -0.3399810435848563, 0.3399810435848563,
                                           0.8611363115940526};
constexpr std::array<double, 4> kGaussW = {0.3478548451374538, 0.6521451548625461, 0.6521451548625461,
                                           0.3478548451374538};

struct PicardOutcome {
    std::vector<double> M;
    std::vector<GammaState> states;
    BoundaryPath path;
    std::vector<double> gaps;
    double max_ratio = 0.0;
    bool contracted = false;
};

class VolterraMap {
public:
    VolterraMap(const std::function<double(double)>& up, double x_min, double ell_I, const ModelParams& params,
                double c, double sigma, int K)
        : up_(up), x_min_(x_min), ell_I_(ell_I), params_(params), c_(c), K_(K), ds_(sigma / K) {
        s_.resize(static_cast<size_t>(K) + 1);
        for (int j = 0; j <= K; ++j) s_[static_cast<size_t>(j)] = j * ds_;
    }

    const std::vector<double>& s() const { return s_; }

    std::vector<double> apply(const std::vector<double>& M, std::vector<GammaState>& states, BoundaryPath& path) const {
        std::vector<double> Mp(M.size());
        for (size_t i = 0; i < M.size(); ++i) Mp[i] = std::max(M[i], 0.0);
        states = integrate_gamma(s_, Mp, params_, c_, 4);
        path = boundaries(states, ell_I_, params_, c_);
        std::vector<double> out(M.size());
        out[0] = -up_(ell_I_);
        for (int j = 1; j <= K_; ++j) out[static_cast<size_t>(j)] = evaluate(j, M, path);
        for (double x : out)
            if (!std::isfinite(x)) throw NumericalIntegrityError("non-finite value in the flux integral equation");
        return out;
    }

private:
    double interp(const std::vector<double>& f, double tau) const {
        double x = tau / ds_;
        int i = static_cast<int>(std::floor(x));
        i = std::clamp(i, 0, K_ - 1);
        const double w = x - i;
        return f[static_cast<size_t>(i)] * (1.0 - w) + f[static_cast<size_t>(i) + 1] * w;
    }

    double evaluate(int j, const std::vector<double>& M, const BoundaryPath& path) const {
        const double sj = s_[static_cast<size_t>(j)];
        const double lj = path.ell[static_cast<size_t>(j)];
        const double rs = 2.0 * std::sqrt(sj);
        const double inv_sqrt_pi = 1.0 / std::sqrt(M_PI);

        // initial data: x = ℓ(s) + 2√s z turns the kernel into e^{-z²}
        double k1 = 0.0;
        const double z_hi = (ell_I_ - lj) / rs;
        const double z_lo = std::max(-8.0, (x_min_ - lj) / rs);
        if (z_hi > z_lo) {
            const int panels = 256;
            const double dz = (z_hi - z_lo) / panels;
            for (int p = 0; p < panels; ++p) {
                const double mid = z_lo + (p + 0.5) * dz;
                for (int g = 0; g < 4; ++g) {
                    const double z = mid + 0.5 * dz * kGaussX[static_cast<size_t>(g)];
                    k1 += 0.5 * dz * kGaussW[static_cast<size_t>(g)] * std::exp(-z * z) * up_(lj + rs * z);
                }
            }
            k1 *= -2.0 * inv_sqrt_pi;
        }

        // memory terms with w = √(s - τ), panels aligned with the s grid
        double k2 = 0.0, k3 = 0.0;
        for (int i = j; i >= 1; --i) {
            const double wa = std::sqrt(std::max(sj - s_[static_cast<size_t>(i)], 0.0));
            const double wb = std::sqrt(sj - s_[static_cast<size_t>(i - 1)]);
            const double mid = 0.5 * (wa + wb), half = 0.5 * (wb - wa);
            for (int g = 0; g < 4; ++g) {
                const double w = mid + half * kGaussX[static_cast<size_t>(g)];
                const double tau = sj - w * w;
                const double m = interp(M, tau);
                const double d = lj - interp(path.ell, tau);
                const double dR = lj - interp(path.ell_R, tau);
                const double w2 = w * w;
                const double wt = half * kGaussW[static_cast<size_t>(g)];
                k2 += wt * m * (d / w2) * std::exp(-d * d / (4.0 * w2));
                k3 += wt * m * (dR / w2) * std::exp(-dR * dR / (4.0 * w2));
            }
        }
        return k1 - inv_sqrt_pi * k2 + inv_sqrt_pi * k3;
    }

    std::function<double(double)> up_;
    double x_min_, ell_I_;
    ModelParams params_;
    double c_;
    int K_;
    double ds_;
    std::vector<double> s_;
};

PicardOutcome picard(const VolterraMap& map, double M0) {
    PicardOutcome o;
    std::vector<double> M(map.s().size(), M0);
    for (int it = 0; it < 100; ++it) {
        std::vector<double> next = map.apply(M, o.states, o.path);
        double gap = 0.0;
        for (size_t i = 0; i < M.size(); ++i) gap = std::max(gap, std::fabs(next[i] - M[i]));
        o.gaps.push_back(gap);
        M = std::move(next);
        const size_t m = o.gaps.size();
        if (m >= 2 && o.gaps[m - 2] > 1e-10) {
            const double ratio = gap / o.gaps[m - 2];
            o.max_ratio = std::max(o.max_ratio, ratio);
            if (ratio > 0.5) return o;
        }
        if (gap <= 1e-8) {
            o.contracted = true;
            break;
        }
    }
    if (o.contracted) o.M = std::move(M);
    return o;
}

} // namespace

VolterraResult volterra_M(const std::function<double(double)>& u_prime, double x_min, double ell_I,
                          const ModelParams& params, double c, double sigma, int intervals) {
    params.validate();
    if (!(sigma > 0.0)) throw PreconditionError("sigma must be positive");
    if (intervals < 4) throw PreconditionError("at least 4 intervals are needed");
    if (!(x_min < ell_I)) throw PreconditionError("x_min must lie below the initial boundary");
    const double M0 = -u_prime(ell_I);
    VolterraResult res;
    double sig = sigma;
    for (int halving = 0; halving <= 8; ++halving, sig *= 0.5) {
        VolterraMap map(u_prime, x_min, ell_I, params, c, sig, intervals);
        PicardOutcome o = picard(map, M0);
        if (!o.contracted) continue;
        res.s = map.s();
        res.M = std::move(o.M);
        std::vector<double> Mp(res.M.size());
        for (size_t i = 0; i < Mp.size(); ++i) Mp[i] = std::max(res.M[i], 0.0);
        res.states = integrate_gamma(res.s, Mp, params, c, 4);
        res.path = boundaries(res.states, ell_I, params, c);
        res.sigma = sig;
        res.halvings = halving;
        res.iterations = static_cast<int>(o.gaps.size());
        res.gaps = std::move(o.gaps);
        res.max_ratio = o.max_ratio;
        return res;
    }
    throw HorizonError("flux iteration did not contract after 8 halvings of sigma");
}

VolterraResult volterra_M(const DensityProfile& p0, const ModelParams& params, double c, double sigma,
                          int intervals) {
    const Grid g = p0.grid;
    const double shift = params.V_F;
    auto up = [g, p0, shift](double x) {
        const double v = x + shift;
        int j = static_cast<int>(std::floor((v - g.v_min) / g.h));
        if (j < 0) return 0.0;
        j = std::min(j, g.n - 1);
        return (p0[j + 1] - p0[j]) / g.h;
    };
    return volterra_M(up, g.v_min - shift, 0.0, params, c, sigma, intervals);
}

} // namespace nnlif
