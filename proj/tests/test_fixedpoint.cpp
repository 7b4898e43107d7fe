#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "affsched/fixedpoint.hpp"
#include "affsched/fluid.hpp"

using namespace affsched;

namespace {

double poly(double x, int d1, double lambda, double mu1, double mu2) {
    const double a = lambda * (1.0 / mu2 - 1.0 / mu1);
    return a * std::pow(x, d1) - x + lambda / mu1;
}

// cumulative state of the all-servers-hold-a-secondary-job equilibrium
FluidState embed_queueing(const std::vector<double>& seq, const FluidParams& p) {
    FluidState st = FluidState::all_type_ii(p, static_cast<int>(seq.size()) - 1);
    for (size_t i = 0; i < seq.size(); ++i) st.qbar[2 * i + 1] = seq[i];
    st.validate();
    return st;
}

// cumulative state of an idle-fraction equilibrium (no jobs above level 1)
FluidState embed_root(const NoQueueingRoot& r, const FluidParams& p) {
    FluidState st = FluidState::empty(p);
    st.at(0, 0) = r.q00 + r.q10;
    st.at(0, 1) = r.q01;
    st.at(1, 0) = r.q10;
    st.validate();
    return st;
}

double max_abs(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

} // namespace

TEST_CASE("queueing fixed point reproduces the d1=3 reference values") {
    const auto seq = queueing_fixed_point(3, 0.8, 1.0, 0.5, 4);
    CHECK(seq[0] == 1.0);
    // non-cumulative level fractions
    CHECK(std::abs((seq[0] - seq[1]) - 0.40) < 5e-5);
    CHECK(std::abs((seq[1] - seq[2]) - 0.4704) < 5e-5);
    CHECK(std::abs((seq[2] - seq[3]) - 0.1283) < 5e-5);
}

TEST_CASE("queueing fixed point closed form at d1=2") {
    const auto seq = queueing_fixed_point(2, 0.8, 1.0, 0.5, 3);
    CHECK(seq[1] == doctest::Approx(0.6).epsilon(1e-14));
    CHECK(seq[2] == doctest::Approx(0.216).epsilon(1e-14));
    CHECK(seq[3] == doctest::Approx(std::pow(0.6, 7)).epsilon(1e-13));
}

TEST_CASE("queueing fixed point is geometric for d1=1") {
    const auto seq = queueing_fixed_point(1, 0.8, 1.0, 0.5, 6);
    for (int i = 0; i <= 6; ++i) CHECK(seq[i] == doctest::Approx(std::pow(0.6, i)).epsilon(1e-13));
}

TEST_CASE("queueing fixed point sequence is strictly decreasing in (0,1]") {
    for (int d1 : {1, 2, 3, 7, 25}) {
        const auto seq = queueing_fixed_point(d1, 0.77, 1.3, 0.4, 8);
        CHECK(seq[0] == 1.0);
        CHECK(seq[1] > 0.0);
        for (size_t i = 0; i + 1 < seq.size(); ++i) {
            CHECK(seq[i] >= 0.0);
            CHECK(seq[i] <= 1.0);
            if (seq[i + 1] > 0.0) {
                CHECK(seq[i + 1] < seq[i]); // strictly decreasing until underflow
            } else {
                CHECK(seq[i + 1] == 0.0);
            }
        }
    }
}

TEST_CASE("queueing regime violations are domain errors") {
    CHECK_THROWS_AS(queueing_fixed_point(3, 0.4, 1.0, 0.5, 5), std::domain_error);
    CHECK_THROWS_AS(queueing_fixed_point(3, 0.5, 1.0, 0.5, 5), std::domain_error);
    CHECK_THROWS_AS(queueing_fixed_point(3, 1.0, 1.0, 0.5, 5), std::domain_error);
    CHECK_THROWS_AS(queueing_fixed_point(3, 1.2, 1.0, 0.5, 5), std::domain_error);
    CHECK_THROWS_AS(metrics(3, 1.0, 1.0, 0.5), std::domain_error);
    CHECK_THROWS_AS(d1_star(0.5, 1.0, 0.5), std::domain_error);
    CHECK_THROWS_AS(queueing_fixed_point(0, 0.8, 1.0, 0.5, 5), std::invalid_argument);
    CHECK_THROWS_AS(queueing_fixed_point(3, 0.8, 0.5, 1.0, 5), std::invalid_argument);
}

TEST_CASE("minimum selection size for bistability matches the reference table") {
    // mu2 = 1/2 row (lambda 0.6..0.9) and mu2 = 1/3 row (lambda 0.4..0.9)
    CHECK(d1_star(0.6, 1.0, 0.5) == 5);
    CHECK(d1_star(0.7, 1.0, 0.5) == 9);
    CHECK(d1_star(0.8, 1.0, 0.5) == 18);
    CHECK(d1_star(0.9, 1.0, 0.5) == 46);
    const double third = 1.0 / 3.0;
    CHECK(d1_star(0.4, 1.0, third) == 3);
    CHECK(d1_star(0.5, 1.0, third) == 5);
    CHECK(d1_star(0.6, 1.0, third) == 7);
    CHECK(d1_star(0.7, 1.0, third) == 12);
    CHECK(d1_star(0.8, 1.0, third) == 22);
    CHECK(d1_star(0.9, 1.0, third) == 54);
}

TEST_CASE("d1_star hand check at lambda=0.4, mu2=1/3") {
    // a = 0.8: d=2 fails the second condition (1.25 > 1.6 is false),
    // d=3 passes (5/3 > sqrt(2.4))
    const double a = 0.4 * (3.0 - 1.0);
    CHECK((1.0 - 1.0 / 2.0) * (1.0 / 0.4) < std::pow(2.0 * a, 1.0));
    CHECK((1.0 - 1.0 / 3.0) * (1.0 / 0.4) > std::pow(3.0 * a, 0.5));
    CHECK(d1_star(0.4, 1.0, 1.0 / 3.0) == 3);
}

TEST_CASE("no-queueing fixed points at d1=25 match the reference root pair") {
    const auto roots = no_queueing_fixed_points(25, 0.8, 1.0, 0.5);
    REQUIRE(roots.size() == 2);

    const auto& stable = roots[0];
    CHECK(stable.eig.stable);
    CHECK(std::abs(stable.q00 - 0.1966) < 5e-5);
    CHECK(std::abs(stable.q01 - 0.0067) < 5e-5);
    // the root of f itself, not the rounded sum of the other two coordinates
    CHECK(stable.q10 == doctest::Approx(0.7966443).epsilon(1e-6));
    CHECK(stable.eig.alpha_plus == doctest::Approx(-0.4113050).epsilon(1e-6));
    CHECK(stable.eig.alpha_minus == doctest::Approx(-1.0886950).epsilon(1e-6));

    const auto& unstable = roots[1];
    CHECK_FALSE(unstable.eig.stable);
    CHECK(unstable.eig.alpha_plus > 0.0);
    CHECK(unstable.x == doctest::Approx(0.930).epsilon(2e-3));
    CHECK(unstable.q00 == doctest::Approx(0.0701464).epsilon(1e-6));

    for (const auto& r : roots) {
        CHECK(std::abs(r.q00 + r.q01 + r.q10 - 1.0) < 1e-10);
        CHECK(std::abs(poly(r.x, 25, 0.8, 1.0, 0.5)) < 1e-10);
        CHECK(r.x > 0.8); // busy fraction exceeds lambda/mu1 at any root
        CHECK_FALSE(r.degenerate);
    }
    CHECK(roots[0].x < roots[1].x);
}

TEST_CASE("no roots below the bistability threshold") {
    CHECK(no_queueing_fixed_points(3, 0.8, 1.0, 0.5).empty());
    CHECK(no_queueing_fixed_points(17, 0.8, 1.0, 0.5).empty());
    CHECK(no_queueing_fixed_points(2, 0.95, 1.0, 0.9).empty());
    CHECK(no_queueing_fixed_points(1, 0.8, 1.0, 0.5).empty());
}

TEST_CASE("root count flips exactly at d1_star across the reference grid") {
    const std::vector<std::pair<double, double>> cells = {
        {0.6, 0.5}, {0.7, 0.5}, {0.8, 0.5},       {0.9, 0.5},       {0.4, 1.0 / 3.0},
        {0.5, 1.0 / 3.0}, {0.6, 1.0 / 3.0}, {0.7, 1.0 / 3.0}, {0.8, 1.0 / 3.0}, {0.9, 1.0 / 3.0},
    };
    for (const auto& [lambda, mu2] : cells) {
        const int ds = d1_star(lambda, 1.0, mu2);
        for (int d1 = std::max(2, ds - 3); d1 < ds; ++d1) {
            CHECK(no_queueing_fixed_points(d1, lambda, 1.0, mu2).empty());
        }
        for (int d1 = ds; d1 <= ds + 3; ++d1) {
            const auto roots = no_queueing_fixed_points(d1, lambda, 1.0, mu2);
            REQUIRE(roots.size() == 2);
            CHECK(roots[0].eig.stable);
            CHECK_FALSE(roots[1].eig.stable);
            CHECK_FALSE(roots[0].degenerate);
            for (const auto& r : roots) CHECK(r.x > lambda);
        }
    }
}

TEST_CASE("single closed-form fixed point when secondary servers absorb the load") {
    SUBCASE("d1 = 1") {
        const auto roots = no_queueing_fixed_points(1, 0.3, 1.0, 0.5);
        REQUIRE(roots.size() == 1);
        const double q00 = (0.5 - 0.3) * 1.0 / ((0.5 - 0.3) * 1.0 + 0.3 * 0.5);
        CHECK(roots[0].q00 == doctest::Approx(q00).epsilon(1e-12));
        CHECK(std::abs(poly(roots[0].x, 1, 0.3, 1.0, 0.5)) < 1e-12);
        CHECK(roots[0].eig.stable);
    }
    SUBCASE("d1 >= 2") {
        const auto roots = no_queueing_fixed_points(3, 0.3, 1.0, 0.5);
        REQUIRE(roots.size() == 1);
        CHECK(std::abs(poly(roots[0].x, 3, 0.3, 1.0, 0.5)) < 1e-10);
        CHECK(roots[0].eig.stable);
        CHECK(std::abs(roots[0].q00 + roots[0].q01 + roots[0].q10 - 1.0) < 1e-10);
    }
}

TEST_CASE("critical point of the root polynomial") {
    const double xt = x_tilde(25, 0.8, 1.0, 0.5);
    CHECK(xt == doctest::Approx(0.8826538).epsilon(1e-6));
    // separates the two d1=25 roots
    const auto roots = no_queueing_fixed_points(25, 0.8, 1.0, 0.5);
    REQUIRE(roots.size() == 2);
    CHECK(roots[0].x < xt);
    CHECK(roots[1].x > xt);
    CHECK_THROWS_AS(x_tilde(1, 0.8, 1.0, 0.5), std::invalid_argument);
}

TEST_CASE("eigenvalues match the closed form and obey the ordering") {
    for (double q00 : {0.05, 0.1966443, 0.5, 0.9}) {
        for (int d1 : {2, 5, 25}) {
            const auto e = local_stability(q00, d1, 0.8, 1.0, 0.5);
            const double x = 1.0 - q00;
            const double disc = 0.25 + 4.0 * 0.8 * d1 * 0.5 * std::pow(x, d1 - 1);
            CHECK(e.alpha_minus == doctest::Approx(0.5 * (-1.5 - std::sqrt(disc))).epsilon(1e-12));
            CHECK(e.alpha_plus == doctest::Approx(0.5 * (-1.5 + std::sqrt(disc))).epsilon(1e-12));
            CHECK(e.alpha_minus < 0.0);
            CHECK(e.alpha_minus < e.alpha_plus);
        }
    }
}

TEST_CASE("stability boundary at the critical point is flagged inconclusive") {
    const double xt = x_tilde(25, 0.8, 1.0, 0.5);
    const auto e = local_stability(1.0 - xt, 25, 0.8, 1.0, 0.5);
    // discriminant collapses to (mu1 + mu2)^2 exactly at x_tilde
    CHECK(std::abs(e.alpha_plus) < 1e-12);
    CHECK(e.inconclusive);
    CHECK_FALSE(e.stable);
}

TEST_CASE("drift vanishes at the queueing fixed point") {
    for (int d1 : {2, 3, 25}) {
        FluidParams p{d1, 0.8, 1.0, 0.5};
        const auto seq = queueing_fixed_point(d1, p.lambda, p.mu1, p.mu2, 12);
        const auto st = embed_queueing(seq, p);
        CHECK(max_abs(drift(st)) < 1e-12);
    }
    // geometric tail decays slowly at d1=1; push the truncation level out
    FluidParams p1{1, 0.8, 1.0, 0.5};
    const auto seq1 = queueing_fixed_point(1, p1.lambda, p1.mu1, p1.mu2, 70);
    CHECK(max_abs(drift(embed_queueing(seq1, p1))) < 1e-10);
}

TEST_CASE("drift vanishes at both no-queueing fixed points") {
    FluidParams p{25, 0.8, 1.0, 0.5};
    const auto roots = no_queueing_fixed_points(25, 0.8, 1.0, 0.5);
    REQUIRE(roots.size() == 2);
    for (const auto& r : roots) CHECK(max_abs(drift(embed_root(r, p))) < 1e-10);
}

TEST_CASE("stationary metrics at the reference parameters") {
    const auto m = metrics(3, 0.8, 1.0, 0.5);

    // independent series evaluation with library pow
    double eq_cm = 0.0;
    for (int i = 1; i <= 6; ++i) eq_cm += std::pow(0.6, (std::pow(3.0, i) - 1.0) / 2.0);
    CHECK(m.eq_cm == doctest::Approx(eq_cm).epsilon(1e-13));
    double eq_jsq = 0.0;
    for (int i = 1; i <= 6; ++i) eq_jsq += std::pow(0.8, (std::pow(3.0, i + 1) - 1.0) / 2.0);
    CHECK(m.eq_jsq == doctest::Approx(eq_jsq).epsilon(1e-13));

    CHECK(m.eq_ra == doctest::Approx(3.2).epsilon(1e-12));
    CHECK(m.eq_ii == doctest::Approx(0.6).epsilon(1e-12));
    CHECK(m.eq_i == doctest::Approx(eq_cm - 0.6).epsilon(1e-12));
    CHECK(m.lambda_tilde == doctest::Approx(0.6).epsilon(1e-12));
    CHECK(m.ew_ii == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(m.ew_ra == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(m.ew_jsq == doctest::Approx(eq_jsq / 0.8).epsilon(1e-12));

    // the immediate-switch share is 1/4 up to the binary representation of 0.8
    CHECK(std::abs(m.switch_fraction - 0.25) <= 2.3e-16);
}

TEST_CASE("switch fraction is bitwise exact at dyadic parameters") {
    const auto m = metrics(2, 0.625, 1.0, 0.5);
    CHECK(m.lambda_tilde == 0.25);
    CHECK(m.switch_fraction == 0.6);
}

TEST_CASE("waiting-time mixture closes back to the mean queue length") {
    for (int d1 : {1, 2, 3, 10, 25}) {
        for (double lambda : {0.55, 0.7, 0.8, 0.95}) {
            const auto m = metrics(d1, lambda, 1.0, 0.5);
            CHECK(lambda * m.ew == doctest::Approx(m.eq_cm).epsilon(1e-12));
        }
    }
}

TEST_CASE("d1=1 metrics reduce to the closed geometric forms") {
    const auto m = metrics(1, 0.8, 1.0, 0.5);
    CHECK(m.eq_cm == doctest::Approx(0.6 / 0.4).epsilon(1e-12));
    CHECK(m.eq_jsq == doctest::Approx(m.eq_ra).epsilon(1e-12)); // JSQ(1) is random assignment
}

TEST_CASE("switch fraction tends to 1 as lambda approaches mu2") {
    const auto m = metrics(2, 0.5001, 1.0, 0.5);
    CHECK(m.switch_fraction > 0.999);
    CHECK(m.eq_ii < 1e-3);
}
