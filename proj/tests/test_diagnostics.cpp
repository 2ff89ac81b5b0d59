#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "nnlif/diagnostics.hpp"
#include "nnlif/errors.hpp"

#include <cmath>
#include <sstream>

using namespace nnlif;

namespace {
ModelParams make(double b, double a0 = 1.0) {
    ModelParams p;
    p.b = b;
    p.a0 = a0;
    p.a1 = 1.0;
    return p;
}

double bump(double v) { return std::cos(M_PI * v) * std::exp(-v * v); }

DensityProfile scaled(const DensityProfile& p, double k) {
    DensityProfile q = p;
    for (double& x : q.values) x *= k;
    return q;
}
} // namespace

TEST_CASE("entropy of the reference itself") {
    const ModelParams p = make(0.5);
    const Grid g = build_grid(p, 2048, 1e-8);
    const SteadyState s = steady_excitatory(p, g);
    CHECK(relative_entropy(s.profile, s, EntropyChoice::QuadraticCentered) == doctest::Approx(0.0));
    CHECK(relative_entropy(s.profile, s, EntropyChoice::Quadratic) == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(relative_entropy(scaled(s.profile, 2.0), s, EntropyChoice::QuadraticCentered) ==
          doctest::Approx(1.0).epsilon(1e-6));
    for (EntropyChoice G : {EntropyChoice::QuadraticCentered, EntropyChoice::Quadratic}) {
        CHECK(std::fabs(entropy_dissipation(s.profile, s, G, p)) <= 1e-12);
        CHECK(std::fabs(entropy_dissipation(scaled(s.profile, 2.0), s, G, p)) <= 1e-12);
    }
}

TEST_CASE("perturbation term") {
    const ModelParams p = make(0.9, 0.5);
    const DilationParams d = DilationParams::working(p);
    const Grid g = build_grid(p, 4096, 1e-10);
    const SteadyState s = steady_excitatory(p, g);
    const DensityProfile q = project_function([&](double v) { return s.value(v) * (1.0 + 0.5 * bump(v)); }, g, false);
    CHECK(perturbation_term(q, s, 0.0, d, EntropyChoice::QuadraticCentered) == 0.0);
    for (EntropyChoice G : {EntropyChoice::QuadraticCentered, EntropyChoice::Quadratic})
        CHECK(std::fabs(perturbation_term(s.profile, s, 0.3, d, G)) <= 1e-5);
    // adaptive quadrature of the closed-form integrand
    CHECK(perturbation_term(q, s, 0.3, d, EntropyChoice::QuadraticCentered) ==
          doctest::Approx(0.1213419392725997).epsilon(1e-4));
    CHECK_THROWS_AS(perturbation_term(q, s, 0.3, DilationParams::make(p, 1.0), EntropyChoice::Quadratic),
                    PreconditionError);
}

TEST_CASE("entropy decays along the limit equation at the rate of the dissipation") {
    const ModelParams p = make(0.5);
    const Grid g = build_grid(p, 2048, 1e-8);
    const SteadyState s = steady_excitatory(p, g);
    const DensityProfile p0 = project_function([&](double v) { return s.value(v) * (1.0 + 0.5 * bump(v)); }, g, true);
    const DilationParams d = DilationParams::working(p);
    StepperConfig cfg;
    cfg.dtau = 1e-3;
    cfg.horizon = 2.0;
    cfg.scheme = Scheme::FittedImplicit;
    EntropyReport rep;
    RunHooks hooks;
    hooks.observer = [&](const StepView& v) {
        rep.rows.push_back(entropy_row(v.profile, s, EntropyChoice::QuadraticCentered, p, d, v.tilde_n, v.tau));
    };
    run_limit_equation(p0, p, cfg, hooks);
    double worst = 0.0;
    for (size_t k = 1; k < rep.rows.size(); ++k) {
        CHECK(rep.rows[k].S - rep.rows[k - 1].S <= 1e-8);
        CHECK(rep.rows[k].D >= -1e-10);
        if (k > 50) {
            const double dq = -(rep.rows[k].S - rep.rows[k - 1].S) / cfg.dtau;
            const double D = 0.5 * (rep.rows[k].D + rep.rows[k - 1].D);
            worst = std::max(worst, std::fabs(dq - D) / D);
        }
    }
    CHECK(worst <= 0.05);
    CHECK(control_nu_epsilon(rep, s.M_inf) > 0.0);
    std::ostringstream os;
    write_entropy_csv(os, rep);
    CHECK(os.str().rfind("tau,S,D,E,nu,hVR\n", 0) == 0);
}

TEST_CASE("entropy balance along the full equation") {
    const ModelParams p = make(0.5, 0.5);
    const DilationParams d = DilationParams::working(p);
    const Grid g = build_grid(p, 2048, 1e-8);
    const SteadyState s = steady_excitatory(p, g);
    const DensityProfile p0 = project_function([&](double v) { return s.value(v) * (1.0 + 0.5 * bump(v)); }, g, true);
    StepperConfig cfg;
    cfg.dtau = 1e-3;
    cfg.horizon = 1.0;
    cfg.scheme = Scheme::FittedImplicit;
    std::vector<EntropyRow> rows;
    RunHooks hooks;
    hooks.observer = [&](const StepView& v) {
        rows.push_back(entropy_row(v.profile, s, EntropyChoice::QuadraticCentered, p, d, v.tilde_n, v.tau));
    };
    run_tau(p0, p, d, cfg, hooks);
    double worst = 0.0;
    for (size_t k = 51; k < rows.size(); ++k) {
        const double dS = (rows[k].S - rows[k - 1].S) / cfg.dtau;
        const double D = 0.5 * (rows[k].D + rows[k - 1].D);
        const double E = 0.5 * (rows[k].E + rows[k - 1].E);
        worst = std::max(worst, std::fabs(dS + D - E) / std::max({std::fabs(D), std::fabs(E), 1e-12}));
    }
    CHECK(worst <= 0.05);
}

TEST_CASE("decay fit and flux integral") {
    std::vector<double> tau, S, c;
    for (int i = 0; i <= 100; ++i) {
        tau.push_back(0.05 * i);
        S.push_back(std::exp(-2.0 * tau.back()));
        c.push_back(0.7);
    }
    CHECK(fit_decay_rate(tau, S) == doctest::Approx(2.0).epsilon(1e-6));
    CHECK(std::fabs(fit_decay_rate(tau, c)) <= 1e-12);
    S.back() = 0.0;
    CHECK_THROWS_AS(fit_decay_rate(tau, S), DomainError);

    std::vector<double> M(tau.size(), 0.5), M1(tau.size(), 1.5);
    CHECK(flux_variance_integral(tau, M, 0.5) == 0.0);
    CHECK(flux_variance_integral(tau, M1, 0.5) == doctest::Approx(tau.back()));
}

TEST_CASE("flux variance integral converges along the limit equation") {
    const ModelParams p = make(0.5);
    const Grid g = build_grid(p, 1024, 1e-8);
    const SteadyState s = steady_excitatory(p, g);
    const DensityProfile p0 = project_function([&](double v) { return s.value(v) * (1.0 + 0.5 * bump(v)); }, g, true);
    StepperConfig cfg;
    cfg.dtau = 5e-3;
    cfg.horizon = 40.0;
    cfg.snapshot_stride = 100000;
    cfg.scheme = Scheme::FittedImplicit;
    const TauTrajectory tr = run_limit_equation(p0, p, cfg);
    const double whole = flux_variance_integral(tr.tau, tr.M, s.M_inf);
    const size_t cut = tr.tau.size() * 9 / 10;
    const std::vector<double> t1(tr.tau.begin(), tr.tau.begin() + static_cast<long>(cut) + 1);
    const std::vector<double> m1(tr.M.begin(), tr.M.begin() + static_cast<long>(cut) + 1);
    CHECK(whole > 0.0);
    CHECK(whole - flux_variance_integral(t1, m1, s.M_inf) <= 1e-4);
}

TEST_CASE("window mean of the ratio") {
    const ModelParams p = make(0.0);
    const Grid g = build_grid(p, 1024, 1e-8, -20.0);
    const SteadyState s = steady_inhibitory(p, g);
    DeltaK dk = delta_K_mean(s.profile, s, 5.0);
    CHECK(dk.delta == doctest::Approx(1.0).epsilon(1e-12));

    const DensityProfile u = project_function([](double v) { return std::exp(-(v + 2.0) * (v + 2.0)); }, g, true);
    for (double K : {2.0, 4.0, 8.0}) {
        dk = delta_K_mean(u, s, K);
        CHECK(dk.C == doctest::Approx(1.0 / (p.V_F - p.V_R)));
        CHECK(dk.delta <= dk.bound + 1e-12);
        CHECK(delta_K_mean(u, s, 2.0 * K).bound == doctest::Approx(0.5 * dk.bound));
    }
    dk = delta_K_mean(u, s, 2.5 + 0.3 * g.h);
    CHECK(dk.delta <= dk.bound);
    CHECK_THROWS_AS(delta_K_mean(u, s, 25.0), ConfigError);
    const ModelParams e = make(0.5);
    CHECK_THROWS_AS(delta_K_mean(u, steady_excitatory(e, build_grid(e, 1024, 1e-8, -20.0)), 2.0), RegimeError);
}

TEST_CASE("super-solution constants") {
    ModelParams p = make(0.9, 0.5);
    CHECK(gamma_sup_excitatory(p) == doctest::Approx(1.405).epsilon(1e-12));
    ModelParams q = make(-0.5);
    CHECK(gamma_sup_inhibitory(q) == 1.0);
    q.mu0 = 0.5;
    CHECK(gamma_sup_inhibitory(q) == doctest::Approx(1.5));

    const Grid g = build_grid(p, 512, 1e-8);
    const SteadyState s = steady_excitatory(p, g);
    const DilationParams d = DilationParams::working(p);
    SuperSolutionMonitor mon(s.profile, s, d, p);
    CHECK(mon.report().C_I == doctest::Approx(1.0));
    const StepView view{0, 0.0, 0.0, 0.0, s.profile};
    mon.observe(view);
    CHECK(mon.report().holds);
    CHECK(mon.report().max_violation <= 0.0);
    CHECK_THROWS_AS(SuperSolutionMonitor(s.profile, s, DilationParams::make(p, 1.0), p), PreconditionError);
}

TEST_CASE("super-solution bound along a short run") {
    const ModelParams p = make(0.9, 0.5);
    const DilationParams d = DilationParams::working(p);
    const Grid g = build_grid(p, 1024, 1e-8);
    const SteadyState s = steady_excitatory(p, g);
    const DensityProfile p0 =
        project_function([](double v) { return std::exp(-(v - 0.2) * (v - 0.2) / 0.01); }, g, true);
    StepperConfig cfg;
    cfg.dtau = 1e-4;
    cfg.horizon = 1.0;
    const TauTrajectory tr = run_tau(p0, p, d, cfg);
    const SuperSolutionReport r = check_super_solution(tr, s, d, p);
    CHECK(r.holds);
    CHECK(r.max_violation <= 1e-8);
}

TEST_CASE("weighted Poincare constant") {
    std::vector<double> w(513, 1.0);
    const double a = poincare_constant(w, 1.0 / 512);
    CHECK(std::fabs(a - M_PI * M_PI) / (M_PI * M_PI) <= 0.005);
    for (double& x : w) x *= 7.5;
    CHECK(poincare_constant(w, 1.0 / 512) == doctest::Approx(a).epsilon(1e-10));

    double prev = 0.0;
    for (int n : {512, 1024}) {
        const double X = 40.0, h = X / n;
        std::vector<double> d(static_cast<size_t>(n) + 1);
        for (int i = 0; i <= n; ++i) d[static_cast<size_t>(i)] = std::min(i * h, std::exp(-i * h));
        const double al = poincare_constant(d, h);
        CHECK(al > 0.0);
        if (prev > 0.0) CHECK(std::fabs(al - prev) / prev <= 0.05);
        prev = al;
    }

    const ModelParams p = make(0.5);
    const SteadyState s = steady_excitatory(p, build_grid(p, 512, 1e-8));
    CHECK(poincare_constant(s.profile) > 0.0);

    std::vector<double> bad(20, 1.0);
    bad[5] = 0.0;
    CHECK_THROWS_AS(poincare_constant(bad, 0.1), DomainError);
}
