#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "nnlif/errors.hpp"
#include "nnlif/model.hpp"

#include <cmath>

using namespace nnlif;

namespace {
ModelParams unit() {
    ModelParams p;
    p.a0 = 1.0;
    p.a1 = 1.0;
    return p;
}
} // namespace

TEST_CASE("firing rate from boundary slope") {
    const ModelParams p = unit();
    CHECK(firing_rate_from_slope(0.0, p).value == 0.0);
    CHECK(firing_rate_from_slope(0.5, p).value == doctest::Approx(1.0));
    CHECK(firing_rate_from_slope(1.0, p).is_infinite());
    CHECK(firing_rate_from_slope(3.0, p).is_infinite());
    CHECK_THROWS_AS(firing_rate_from_slope(-0.1, p), PreconditionError);
    CHECK(firing_rate_from_slope(1.0, p).to_string() == "inf");
}

TEST_CASE("dilated rate from slope") {
    const ModelParams p = unit();
    CHECK(tilde_n_from_slope(0.0, 2.0, p) == doctest::Approx(0.5));
    CHECK(tilde_n_from_slope(1.0, 1.0, p) == 0.0);
    CHECK(tilde_n_from_slope(1.7, 1.0, p) == 0.0);
    CHECK(tilde_n_from_slope(0.5, 1.0, p) == doctest::Approx(0.5));
    CHECK_THROWS_AS(tilde_n_from_slope(-1.0, 1.0, p), PreconditionError);
    CHECK_THROWS_AS(tilde_n_from_slope(0.1, 0.0, p), PreconditionError);
    for (double c : {0.1, 0.5, 1.0, 3.0})
        for (int k = 0; k <= 40; ++k) {
            const double tn = tilde_n_from_slope(0.05 * k, c, p);
            CHECK(tn >= 0.0);
            CHECK(tn <= 1.0 / c);
        }
}

TEST_CASE("dilated rate from flux") {
    ModelParams p;
    p.a0 = 2.0;
    p.a1 = 1.0;
    CHECK(tilde_n_from_M(1.0, p) == 0.0);
    CHECK(tilde_n_from_M(0.0, p) == doctest::Approx(0.5));
    CHECK(tilde_n_from_M(0.5, p) == doctest::Approx(0.25));
    CHECK_THROWS_AS(tilde_n_from_M(-0.5, p), PreconditionError);
}

TEST_CASE("inverse of the dilated rate") {
    CHECK(invert_tilde_n(1.0, 1.0).value == 0.0);
    CHECK(invert_tilde_n(0.5, 2.0).value == 0.0);
    CHECK(invert_tilde_n(0.0, 1.0).is_infinite());
    CHECK(invert_tilde_n(0.25, 1.0).value == doctest::Approx(3.0));
    CHECK_THROWS_AS(invert_tilde_n(1.5, 1.0), RangeError);
    CHECK_THROWS_AS(invert_tilde_n(-0.1, 1.0), RangeError);
}

TEST_CASE("round trip through the dilated rate") {
    ModelParams p;
    p.a0 = 0.5;
    p.a1 = 1.0;
    for (double c : {0.5, 1.0, 2.0})
        for (double g : {0.0, 0.125, 0.25, 0.5, 0.75, 1.0, 1.25}) {
            const ExtReal N = firing_rate_from_slope(g, p);
            const ExtReal back = invert_tilde_n(tilde_n_from_slope(g, c, p), c);
            CHECK(N.is_infinite() == back.is_infinite());
            if (!N.is_infinite()) CHECK(back.value == doctest::Approx(N.value).epsilon(1e-13));
        }
}

TEST_CASE("regime labels") {
    ModelParams p = unit();
    p.b = 1.5;
    CHECK(classify_regime(p) == Regime::StronglyExcitatory);
    p.b = 0.9;
    CHECK(classify_regime(p) == Regime::MildlyExcitatory);
    p.b = 0.0;
    CHECK(classify_regime(p) == Regime::Inhibitory);
    p.b = -1.0;
    CHECK(classify_regime(p) == Regime::Inhibitory);
    p.b = 1.0;
    CHECK(classify_regime(p) == Regime::StronglyExcitatory);

    ModelParams q = unit();
    q.b = 0.9;
    q.V_L -= 3.0;
    q.V_R -= 3.0;
    q.V_F -= 3.0;
    q.mu0 -= 3.0;
    CHECK(classify_regime(q) == Regime::MildlyExcitatory);
}

TEST_CASE("drift hypotheses") {
    ModelParams p;
    p.a0 = 0.5;
    p.a1 = 1.0;
    p.b = 0.9;
    DriftReport r = drift_hypothesis_check(p);
    CHECK(r.drift_inh);
    CHECK(r.drift_exc);
    CHECK(r.tail_condition_applies);
    p.mu0 = 3.0;
    p.b = -0.5;
    p.V_R = 0.0;
    r = drift_hypothesis_check(p);
    CHECK_FALSE(r.drift_inh);
}

TEST_CASE("dilation constants") {
    ModelParams p;
    p.a0 = 0.5;
    p.a1 = 1.0;
    p.b = 0.9;
    const DilationParams w = DilationParams::working(p);
    CHECK(w.c == doctest::Approx(0.5));
    CHECK(std::fabs(w.a_c) < 1e-15);
    CHECK(w.b_star == doctest::Approx(-0.45));
    const DilationParams d = DilationParams::make(p, 2.0);
    for (int k = 0; k <= 20; ++k) {
        const double a = dilated_diffusivity(d, p, 0.5 * k / 20.0);
        CHECK(a >= std::min(p.a0 / d.c, p.a1) - 1e-15);
        CHECK(a <= std::max(p.a0 / d.c, p.a1) + 1e-15);
    }
}

TEST_CASE("parameter invariants") {
    ModelParams p = unit();
    p.V_R = 1.0;
    CHECK_THROWS_AS(p.validate(), PreconditionError);
    p = unit();
    p.a0 = 0.0;
    CHECK_THROWS_AS(p.validate(), PreconditionError);
}
