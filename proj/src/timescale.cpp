#include "nnlif/timescale.hpp"

#include "nnlif/errors.hpp"

#include <algorithm>
#include <cmath>

namespace nnlif {

TimeMap TimeMap::from_samples(std::vector<double> taus, std::vector<double> ts) {
    if (taus.size() != ts.size() || taus.empty()) throw PreconditionError("time map needs matching samples");
    if (ts[0] != 0.0) throw PreconditionError("time map must start at t = 0");
    for (size_t i = 1; i < taus.size(); ++i) {
        if (!(taus[i] > taus[i - 1])) throw PreconditionError("tau samples must be strictly increasing");
        if (ts[i] < ts[i - 1]) throw PreconditionError("t samples must be nondecreasing");
    }
    TimeMap m;
    m.taus = std::move(taus);
    m.ts = std::move(ts);
    return m;
}

double TimeMap::t_at(double tau) const {
    if (tau <= taus.front()) return ts.front();
    if (tau >= taus.back()) return ts.back();
    const size_t j = static_cast<size_t>(std::upper_bound(taus.begin(), taus.end(), tau) - taus.begin());
    const size_t i = j - 1;
    const double w = (tau - taus[i]) / (taus[j] - taus[i]);
    return ts[i] + w * (ts[j] - ts[i]);
}

TimeMap forward_time(const std::vector<double>& tau, const std::vector<double>& tn, double c) {
    if (tau.size() != tn.size() || tau.empty()) throw PreconditionError("series lengths differ");
    const double cap = (1.0 / c) * (1.0 + 1e-12);
    std::vector<double> ts(tau.size(), 0.0);
    for (size_t i = 0; i < tau.size(); ++i) {
        if (!(tn[i] >= 0.0 && tn[i] <= cap)) throw RangeError("dilated rate outside [0, 1/c]");
        if (i > 0) ts[i] = ts[i - 1] + 0.5 * (tn[i] + tn[i - 1]) * (tau[i] - tau[i - 1]);
    }
    return TimeMap::from_samples(tau, std::move(ts));
}

TimeMap forward_time(const TauTrajectory& traj, double c) { return forward_time(traj.tau, traj.tilde_n, c); }

double inverse_time(const TimeMap& map, double t) {
    if (t < 0.0) throw OutOfLifespanError("negative time");
    const auto& ts = map.ts;
    const size_t j = static_cast<size_t>(std::upper_bound(ts.begin(), ts.end(), t) - ts.begin());
    if (j == ts.size()) throw OutOfLifespanError("time at or beyond the lifespan estimate");
    const size_t i = j - 1;
    if (ts[i] == t) return map.taus[i];
    const double w = (t - ts[i]) / (ts[j] - ts[i]);
    return map.taus[i] + w * (map.taus[j] - map.taus[i]);
}

std::string to_string(LifespanStatus s) {
    return s == LifespanStatus::FiniteConverged ? "FiniteConverged" : "GrowingUndetermined";
}

Lifespan lifespan(const std::vector<double>& tau, const std::vector<double>& tn, double c) {
    const TimeMap m = forward_time(tau, tn, c);
    Lifespan L;
    L.T_star = m.ts.back();
    const double start = tau.front() + 0.9 * (tau.back() - tau.front());
    L.tail_increment = m.ts.back() - m.t_at(start);
    L.status = L.tail_increment <= 1e-8 ? LifespanStatus::FiniteConverged : LifespanStatus::GrowingUndetermined;
    return L;
}

Lifespan lifespan(const TauTrajectory& traj, double c) { return lifespan(traj.tau, traj.tilde_n, c); }

GeneralizedSample sample_generalized(const TauTrajectory& traj, const TimeMap& map, double t) {
    if (traj.snapshots.empty()) throw ResolutionError("trajectory has no snapshots");
    const double tau = inverse_time(map, t);
    GeneralizedSample out;
    out.tau = tau;

    const auto& snaps = traj.snapshots;
    auto it = std::lower_bound(snaps.begin(), snaps.end(), tau,
                               [](const Snapshot& s, double x) { return s.tau < x; });
    const double tol = 1e-12 * std::max(1.0, std::fabs(tau));
    if (it != snaps.end() && std::fabs(it->tau - tau) <= tol) {
        out.profile = it->profile;
    } else if (it != snaps.begin() && std::prev(it)->tau >= tau - tol) {
        out.profile = std::prev(it)->profile;
    } else if (it == snaps.end() || it == snaps.begin()) {
        const Snapshot& s = (it == snaps.end()) ? snaps.back() : snaps.front();
        out.profile = s.profile;
        out.resolution_warning = true;
    } else {
        const Snapshot& a = *std::prev(it);
        const Snapshot& b = *it;
        const double w = (tau - a.tau) / (b.tau - a.tau);
        out.profile = DensityProfile(a.profile.grid);
        for (size_t i = 0; i < out.profile.values.size(); ++i)
            out.profile.values[i] = (1.0 - w) * a.profile.values[i] + w * b.profile.values[i];
        const double stride = traj.cfg.snapshot_stride * traj.cfg.dtau;
        if (std::min(tau - a.tau, b.tau - tau) > stride * (1.0 + 1e-9)) out.resolution_warning = true;
    }

    // Ñ at τ by linear interpolation of the series
    const auto& ta = traj.tau;
    double tn;
    if (tau >= ta.back()) {
        tn = traj.tilde_n.back();
    } else {
        const size_t j = static_cast<size_t>(std::upper_bound(ta.begin(), ta.end(), tau) - ta.begin());
        const size_t i = j - 1;
        const double w = (tau - ta[i]) / (ta[j] - ta[i]);
        tn = (1.0 - w) * traj.tilde_n[i] + w * traj.tilde_n[j];
    }
    out.N = invert_tilde_n(std::max(tn, 0.0), traj.dil.c);
    return out;
}

std::vector<BlowupEvent> detect_blowups(const std::vector<double>& tau, const std::vector<double>& tn, double eps) {
    std::vector<std::pair<int, int>> runs;
    const int K = static_cast<int>(tn.size());
    for (int k = 0; k < K;) {
        if (tn[static_cast<size_t>(k)] <= eps) {
            int e = k;
            while (e + 1 < K && tn[static_cast<size_t>(e + 1)] <= eps) ++e;
            if (!runs.empty() && k - runs.back().second < 3)
                runs.back().second = e;
            else
                runs.emplace_back(k, e);
            k = e + 1;
        } else {
            ++k;
        }
    }
    std::vector<BlowupEvent> events;
    if (runs.empty()) return events;
    std::vector<double> ts(tau.size(), 0.0);
    for (size_t i = 1; i < tau.size(); ++i) ts[i] = ts[i - 1] + 0.5 * (tn[i] + tn[i - 1]) * (tau[i] - tau[i - 1]);
    for (auto [a, b] : runs) {
        BlowupEvent e;
        e.index1 = a;
        e.index2 = b;
        e.tau1 = tau[static_cast<size_t>(a)];
        e.tau2 = tau[static_cast<size_t>(b)];
        e.delta_tau = e.tau2 - e.tau1;
        e.t_star = ts[static_cast<size_t>(b)];
        e.terminated = b != K - 1;
        events.push_back(e);
    }
    return events;
}

std::vector<BlowupEvent> detect_blowups(const TauTrajectory& traj, double eps) {
    return detect_blowups(traj.tau, traj.tilde_n, eps);
}

JumpCheck verify_jump(const TauTrajectory& traj, const BlowupEvent& event, const ModelParams& params) {
    const Snapshot* s1 = traj.snapshot_at_index(event.index1);
    const Snapshot* s2 = traj.snapshot_at_index(event.index2);
    if (!s1 || !s2) throw ResolutionError("missing snapshots at the ends of the blow-up interval");

    const int target = event.index2 - event.index1;
    StepperConfig cfg = traj.cfg;
    cfg.snapshot_stride = std::max(target, 1);
    // an eternal candidate is followed only up to the end of the stored run
    cfg.horizon = event.terminated ? (2.0 * target + 200.0) * cfg.dtau : std::max(target, 1) * cfg.dtau;

    JumpCheck out;
    DensityProfile at_target;
    bool have_target = false;
    RunHooks hooks;
    hooks.observer = [&](const StepView& v) {
        if (!out.flux_recovered && params.a1 * v.g < 1.0) {
            out.flux_recovered = true;
            out.delta_tau_independent = v.tau;
        }
        if (v.index == target) {
            at_target = v.profile;
            have_target = true;
        }
    };
    hooks.stop = [&](const StepView&) { return have_target && (out.flux_recovered || !event.terminated); };
    const TauTrajectory w = run_limit_equation(s1->profile, params, cfg, hooks);
    if (!out.flux_recovered) out.delta_tau_independent = w.tau.back();
    if (!have_target) throw ResolutionError("limit run did not reach the end of the blow-up interval");
    out.l1_gap = l1_distance(at_target, s2->profile);
    return out;
}

} // namespace nnlif
