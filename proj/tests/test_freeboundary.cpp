#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "nnlif/errors.hpp"
#include "nnlif/freeboundary.hpp"

#include <cmath>

using namespace nnlif;

namespace {
ModelParams make(double b, double a0 = 0.5, double a1 = 1.0) {
    ModelParams p;
    p.b = b;
    p.a0 = a0;
    p.a1 = a1;
    return p;
}
} // namespace

TEST_CASE("translation moves the threshold to zero") {
    ModelParams p = make(0.9);
    p.V_F = 2.0;
    p.V_R = 1.0;
    const ModelParams q = translated(p);
    CHECK(q.V_F == 0.0);
    CHECK(q.V_R == -1.0);
    CHECK(q.b0() == doctest::Approx(p.b0() - 2.0));
}

TEST_CASE("firing-rate factor in gamma form") {
    const ModelParams p = make(0.9);
    CHECK(tilde_n_gamma(1.0, 1.0, p, 0.5) == 0.0);
    CHECK(tilde_n_gamma(2.0, 0.75, p, 0.5) == 0.0);
    CHECK(tilde_n_gamma(1.0, 0.0, p, 0.5) == doctest::Approx(2.0));
    CHECK(tilde_n_gamma(3.0, 0.0, p, 0.25) == doctest::Approx(4.0));
    for (double M : {0.05, 0.3, 0.7})
        CHECK(tilde_n_gamma(1.0, M, p, 0.5) == doctest::Approx(tilde_n_from_slope(M, 0.5, p)));
    CHECK_THROWS_AS(tilde_n_gamma(0.5, 0.1, p, 0.5), PreconditionError);
    CHECK_THROWS_AS(tilde_n_gamma(1.0, -0.1, p, 0.5), PreconditionError);
}

TEST_CASE("gamma right-hand side and bounds") {
    const ModelParams p = make(0.9);
    CHECK(F_rhs(1.0, 0.0, p, 0.5) == doctest::Approx(2.0 / p.a0));
    CHECK(F_rhs(1.0, 2.0, p, 0.5) == 0.0);
    const FreeBoundaryBounds B = free_boundary_bounds(p, 0.5);
    CHECK(B.F_max == doctest::Approx(4.0));
    for (double c : {0.25, 0.5, 1.0})
        for (double g : {1.0, 1.5, 4.0})
            for (double M = 0.0; M < 1.2; M += 0.05) CHECK(F_rhs(g, M, p, c) <= free_boundary_bounds(p, c).F_max + 1e-12);
}

TEST_CASE("gamma integration") {
    const ModelParams p = make(0.9);
    std::vector<double> s, zero, big, wave;
    for (int k = 0; k <= 100; ++k) {
        s.push_back(0.01 * k);
        zero.push_back(0.0);
        big.push_back(5.0);
        wave.push_back(0.1 + 0.05 * std::sin(7.0 * s.back()));
    }
    auto st = integrate_gamma(s, zero, p, 0.5);
    for (const auto& x : st) CHECK(x.gamma == doctest::Approx(1.0 + 2.0 * x.s / p.a0).epsilon(1e-12));
    st = integrate_gamma(s, big, p, 0.5);
    for (const auto& x : st) CHECK(x.gamma == 1.0);
    const auto coarse = integrate_gamma(s, wave, p, 0.5, 4);
    const auto fine = integrate_gamma(s, wave, p, 0.5, 8);
    for (size_t k = 0; k < s.size(); ++k) {
        CHECK(std::fabs(coarse[k].gamma - fine[k].gamma) <= 1e-8);
        CHECK(coarse[k].gamma >= 1.0);
        CHECK(coarse[k].beta == doctest::Approx(std::sqrt(coarse[k].gamma)));
    }
    CHECK_THROWS_AS(integrate_gamma({0.0, 0.1}, {0.0}, p, 0.5), PreconditionError);
    CHECK_THROWS_AS(integrate_gamma({0.1, 0.2}, {0.0, 0.0}, p, 0.5), PreconditionError);
}

TEST_CASE("drift of the moving frame") {
    ModelParams p = make(0.0);
    p.V_F = 0.0;
    p.V_R = -1.0;
    GammaState st;
    st.beta = 1.0;
    CHECK(drift_D(st, p, 0.5) == 0.0);

    const ModelParams q = make(0.9);
    CHECK(drift_D(st, q, 0.5) == doctest::Approx(q.b / q.a1));
    const FreeBoundaryBounds B = free_boundary_bounds(q, 0.5);
    std::vector<double> s, M;
    for (int k = 0; k <= 200; ++k) {
        s.push_back(0.005 * k);
        M.push_back(0.6 * std::fabs(std::cos(5.0 * s.back())));
    }
    for (const auto& x : integrate_gamma(s, M, q, 0.5)) {
        CHECK(std::fabs(x.D) <= B.D_max + 1e-12);
        CHECK(x.D == doctest::Approx(drift_D(x, q, 0.5)));
    }
}

TEST_CASE("moving boundaries") {
    ModelParams p = make(0.0);
    p.V_F = 0.0;
    p.V_R = -1.0;
    std::vector<double> s, zero;
    for (int k = 0; k <= 50; ++k) {
        s.push_back(0.02 * k);
        zero.push_back(0.0);
    }
    auto path = boundaries(integrate_gamma(s, zero, p, 0.5), -0.3, p, 0.5);
    for (size_t k = 0; k < s.size(); ++k) CHECK(path.ell[k] == doctest::Approx(-0.3));

    const ModelParams q = make(0.9);
    std::vector<double> big(s.size(), 5.0);
    const auto st = integrate_gamma(s, big, q, 0.5);
    path = boundaries(st, 0.0, q, 0.5);
    const double D = q.b / q.a1;
    for (size_t k = 0; k < s.size(); ++k) {
        CHECK(path.ell[k] == doctest::Approx(-D * s[k]));
        CHECK(path.ell_R[k] == doctest::Approx(path.ell[k] - 1.0));
    }
    CHECK(path.lipschitz_max == doctest::Approx(2.0 * D));
    CHECK(path.lipschitz_max <= 2.0 * free_boundary_bounds(q, 0.5).lipschitz);
}

TEST_CASE("change of variables matches a dilated run") {
    const ModelParams p = make(0.9);
    const DilationParams d = DilationParams::working(p);
    const Grid g = build_grid(p, 1024, 1e-8);
    const DensityProfile p0 =
        project_function([](double v) { return std::exp(-(v - 0.2) * (v - 0.2) / 0.01); }, g, true);
    StepperConfig cfg;
    cfg.dtau = 1e-4;
    cfg.horizon = 2.5;
    const TauTrajectory tr = run_tau(p0, p, d, cfg);
    const TransformCheck tc = cross_check_transform(tr, p, d.c);
    CHECK(tc.beta_gap <= 1e-3);
    CHECK(tc.bounds_ok);
    CHECK(tc.v_shift == 1.0);
    CHECK(tc.path.lipschitz_max <= 2.0 * free_boundary_bounds(p, d.c).lipschitz);
    for (size_t k = 1; k < tc.s.size(); ++k) CHECK(tc.s[k] > tc.s[k - 1]);
    CHECK(transformed_flux_at(tc, 0.0) == tc.M.front());
    CHECK_THROWS_AS(transformed_flux_at(tc, tc.s.back() + 1.0), OutOfLifespanError);
    CHECK_THROWS_AS(cross_check_transform(tr, p, 0.3), PreconditionError);
}

TEST_CASE("boundary flux by Picard iteration") {
    const ModelParams p = make(0.9);
    const double c = 0.5;
    auto zero = [](double) { return 0.0; };
    VolterraResult r = volterra_M(zero, -5.0, 0.0, p, c, 0.5);
    for (double m : r.M) CHECK(m == doctest::Approx(0.0));

    // u = (-x) e^{-(x+0.5)^2/0.1}, so -u'(0) = e^{-2.5}
    auto up = [](double x) {
        const double e = std::exp(-(x + 0.5) * (x + 0.5) / 0.1);
        return -e - x * e * (-2.0 * (x + 0.5) / 0.1);
    };
    r = volterra_M(up, -3.0, 0.0, p, c, 0.2, 200);
    CHECK(r.M.front() == doctest::Approx(std::exp(-2.5)));
    CHECK(std::fabs(r.M[1] - r.M[0]) <= 0.1);
    CHECK(r.max_ratio < 1.0);
    CHECK(r.iterations >= 1);
    for (double m : r.M) CHECK(std::isfinite(m));
    CHECK(r.states.size() == r.s.size());
    CHECK_THROWS_AS(volterra_M(up, 0.5, 0.0, p, c, 0.2), PreconditionError);
    CHECK_THROWS_AS(volterra_M(up, -3.0, 0.0, p, c, 0.0), PreconditionError);
}
