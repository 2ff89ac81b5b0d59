#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "nnlif/errors.hpp"
#include "nnlif/steady.hpp"
#include "nnlif/timescale.hpp"

#include <cmath>

using namespace nnlif;

namespace {
std::vector<double> linspace(double a, double b, int n) {
    std::vector<double> x(static_cast<size_t>(n) + 1);
    for (int i = 0; i <= n; ++i) x[static_cast<size_t>(i)] = a + (b - a) * i / n;
    return x;
}

ModelParams make(double b, double a0 = 1.0) {
    ModelParams p;
    p.b = b;
    p.a0 = a0;
    p.a1 = 1.0;
    return p;
}

TauTrajectory jump_run(int n, double dtau, double horizon) {
    const ModelParams p = make(0.9, 0.5);
    const Grid g = build_grid(p, n, 1e-8);
    const DensityProfile p0 =
        project_function([](double v) { return std::exp(-(v - 0.2) * (v - 0.2) / 0.01); }, g, true);
    StepperConfig cfg;
    cfg.dtau = dtau;
    cfg.horizon = horizon;
    return run_tau(p0, p, DilationParams::make(p, 1.0), cfg);
}
} // namespace

TEST_CASE("forward map of constant and piecewise rates") {
    const auto tau = linspace(0.0, 2.0, 200);
    std::vector<double> k(tau.size(), 0.3), z(tau.size(), 0.0);
    TimeMap m = forward_time(tau, k, 1.0);
    for (size_t i = 0; i < tau.size(); ++i) CHECK(m.ts[i] == doctest::Approx(0.3 * tau[i]).epsilon(1e-14));
    m = forward_time(tau, z, 1.0);
    for (double t : m.ts) CHECK(t == 0.0);

    const auto fine = linspace(0.0, 3.0, 30000);
    std::vector<double> pw(fine.size());
    for (size_t i = 0; i < fine.size(); ++i) pw[i] = (fine[i] > 1.0 && fine[i] < 2.0) ? 0.0 : 1.0;
    m = forward_time(fine, pw, 1.0);
    CHECK(m.ts.back() == doctest::Approx(2.0).epsilon(2e-4));
    for (size_t i = 1; i < m.ts.size(); ++i) CHECK(m.ts[i] >= m.ts[i - 1]);

    std::vector<double> bad(tau.size(), 2.0);
    CHECK_THROWS_AS(forward_time(tau, bad, 1.0), RangeError);
}

TEST_CASE("generalized inverse") {
    const auto tau = linspace(0.0, 2.0, 200);
    std::vector<double> k(tau.size(), 0.25);
    const TimeMap m = forward_time(tau, k, 1.0);
    for (double t : {0.0, 0.1, 0.2, 0.3, 0.49})
        CHECK(inverse_time(m, t) == doctest::Approx(t / 0.25).epsilon(1e-12));

    const TimeMap pw = TimeMap::from_samples({0.0, 1.0, 2.0, 3.0}, {0.0, 1.0, 1.0, 2.0});
    CHECK(inverse_time(pw, 1.0) == 2.0);
    CHECK(inverse_time(pw, 0.5) == 0.5);
    CHECK(inverse_time(pw, 1.5) == doctest::Approx(2.5));
    CHECK(inverse_time(pw, 0.0) == 0.0);
    CHECK_THROWS_AS(inverse_time(pw, 2.0), OutOfLifespanError);
    CHECK_THROWS_AS(inverse_time(pw, -0.1), OutOfLifespanError);
    // right-continuity: just above the plateau value the inverse is close to the right end
    CHECK(inverse_time(pw, 1.0 + 1e-9) == doctest::Approx(2.0).epsilon(1e-8));
    CHECK(inverse_time(pw, 1.0 - 1e-9) == doctest::Approx(1.0).epsilon(1e-8));

    for (double t : {0.1, 0.7, 1.2, 1.9}) CHECK(pw.t_at(inverse_time(pw, t)) == doctest::Approx(t).epsilon(1e-12));

    CHECK_THROWS_AS(TimeMap::from_samples({0.0, 1.0, 1.0}, {0.0, 0.1, 0.2}), PreconditionError);
    CHECK_THROWS_AS(TimeMap::from_samples({0.0, 1.0}, {0.1, 0.2}), PreconditionError);
}

TEST_CASE("lifespan estimate") {
    const auto tau = linspace(0.0, 5.0, 500);
    std::vector<double> z(tau.size(), 0.0), full(tau.size(), 0.5);
    Lifespan L = lifespan(tau, z, 1.0);
    CHECK(L.T_star == 0.0);
    CHECK(L.status == LifespanStatus::FiniteConverged);
    L = lifespan(tau, full, 2.0);
    CHECK(L.T_star == doctest::Approx(5.0 / 2.0));
    CHECK(L.status == LifespanStatus::GrowingUndetermined);

    // additivity over concatenated segments
    std::vector<double> r(tau.size());
    for (size_t i = 0; i < tau.size(); ++i) r[i] = 0.5 * std::exp(-tau[i]);
    const double whole = lifespan(tau, r, 1.0).T_star;
    const size_t mid = 217;
    const std::vector<double> t1(tau.begin(), tau.begin() + mid + 1), r1(r.begin(), r.begin() + mid + 1);
    std::vector<double> t2(tau.begin() + mid, tau.end()), r2(r.begin() + mid, r.end());
    for (double& x : t2) x -= tau[mid];
    CHECK(lifespan(t1, r1, 1.0).T_star + lifespan(t2, r2, 1.0).T_star == doctest::Approx(whole).epsilon(1e-13));
}

TEST_CASE("blow-up detection on synthetic series") {
    const auto tau = linspace(0.0, 1.0, 100);
    std::vector<double> tn(tau.size(), 0.5);
    CHECK(detect_blowups(tau, tn, 1e-8).empty());
    for (int i = 30; i <= 60; ++i) tn[static_cast<size_t>(i)] = 0.0;
    auto ev = detect_blowups(tau, tn, 1e-8);
    REQUIRE(ev.size() == 1);
    CHECK(ev[0].index1 == 30);
    CHECK(ev[0].index2 == 60);
    CHECK(ev[0].tau1 == doctest::Approx(0.3));
    CHECK(ev[0].delta_tau == doctest::Approx(0.3));
    CHECK(ev[0].terminated);
    const TimeMap m = forward_time(tau, tn, 1.0);
    CHECK(ev[0].t_star == doctest::Approx(m.ts[30]).epsilon(1e-14));
    CHECK(inverse_time(m, ev[0].t_star) == doctest::Approx(ev[0].tau2));

    tn[62] = 0.0; // gap of one step merges
    for (int i = 90; i <= 100; ++i) tn[static_cast<size_t>(i)] = 0.0;
    ev = detect_blowups(tau, tn, 1e-8);
    REQUIRE(ev.size() == 2);
    CHECK(ev[0].index2 == 62);
    CHECK_FALSE(ev[1].terminated);
}

TEST_CASE("eternal blow-up run") {
    const ModelParams p = make(1.5);
    const Grid g = build_grid(p, 512, 1e-8);
    StepperConfig cfg;
    cfg.dtau = 5e-4;
    cfg.horizon = 2.0;
    const TauTrajectory tr = run_tau(steady_excitatory(p, g).profile, p, DilationParams::make(p, 1.0), cfg);
    const Lifespan L = lifespan(tr, 1.0);
    CHECK(L.T_star <= 1e-6);
    CHECK(L.status == LifespanStatus::FiniteConverged);
    const auto ev = detect_blowups(tr, cfg.blowup_epsilon);
    REQUIRE(ev.size() == 1);
    CHECK_FALSE(ev[0].terminated);
    CHECK(ev[0].tau1 == 0.0);
    CHECK(ev[0].tau2 == doctest::Approx(2.0));
    const JumpCheck jc = verify_jump(tr, ev[0], p);
    CHECK_FALSE(jc.flux_recovered);
    CHECK(jc.delta_tau_independent == doctest::Approx(ev[0].delta_tau));
}

TEST_CASE("jump verification and generalized sampling") {
    const TauTrajectory tr = jump_run(1024, 1e-4, 3.0);
    const auto ev = detect_blowups(tr, tr.cfg.blowup_epsilon);
    REQUIRE(ev.size() == 1);
    CHECK(ev[0].terminated);
    const JumpCheck jc = verify_jump(tr, ev[0], tr.params);
    CHECK(jc.flux_recovered);
    CHECK(jc.l1_gap <= 1e-3);
    CHECK(std::fabs(jc.delta_tau_independent - ev[0].delta_tau) <= 2.0 * tr.cfg.dtau);

    const TimeMap m = forward_time(tr, 1.0);
    // right limit at the blow-up time
    const GeneralizedSample at = sample_generalized(tr, m, ev[0].t_star);
    CHECK(at.tau == doctest::Approx(ev[0].tau2).epsilon(1e-12));
    CHECK(l1_distance(at.profile, tr.snapshot_at_index(ev[0].index2)->profile) <= 1e-12);

    // classical regime: a stored snapshot is returned as is
    const int k = (ev[0].index2 / 100 + 5) * 100;
    REQUIRE(tr.tilde_n[static_cast<size_t>(k)] > 1e-3);
    const Snapshot* s = tr.snapshot_at_index(k);
    REQUIRE(s != nullptr);
    const GeneralizedSample cl = sample_generalized(tr, m, m.ts[static_cast<size_t>(k)]);
    CHECK(cl.tau == doctest::Approx(s->tau).epsilon(1e-12));
    CHECK(l1_distance(cl.profile, s->profile) <= 1e-12);
    CHECK_FALSE(cl.resolution_warning);
    CHECK_FALSE(cl.N.is_infinite());
    CHECK(cl.N.value == doctest::Approx(invert_tilde_n(tr.tilde_n[static_cast<size_t>(k)], 1.0).value));

    CHECK_THROWS_AS(sample_generalized(tr, m, m.ts.back()), OutOfLifespanError);

    // round trip on strictly increasing parts
    for (size_t j = 100; j < tr.tau.size(); j += 997)
        if (tr.tilde_n[j] > 1e-3) CHECK(m.t_at(inverse_time(m, m.ts[j])) == doctest::Approx(m.ts[j]).epsilon(1e-10));
}

TEST_CASE("flux already below threshold gives a zero interval") {
    const ModelParams p = make(0.5);
    const Grid g = build_grid(p, 256, 1e-8);
    StepperConfig cfg;
    cfg.dtau = 1e-3;
    cfg.horizon = 0.5;
    const TauTrajectory tr = run_tau(steady_excitatory(p, g).profile, p, DilationParams::make(p, 1.0), cfg);
    BlowupEvent e;
    e.index1 = 0;
    e.index2 = 100;
    e.tau1 = 0.0;
    e.tau2 = 0.1;
    e.delta_tau = 0.1;
    const JumpCheck jc = verify_jump(tr, e, p);
    CHECK(jc.flux_recovered);
    CHECK(jc.delta_tau_independent == 0.0);
    e.index2 = 101;
    CHECK_THROWS_AS(verify_jump(tr, e, p), ResolutionError);
}
