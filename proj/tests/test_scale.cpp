#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "parisian/scale.hpp"
#include "oracles.hpp"

using namespace parisian;

namespace {
const RiskModel kCL{2.0, 1.0, ClaimLaw::exponential(1.0)};
// same law as Exp(1) but routed through the numeric scale-function path
const RiskModel kCLNumeric{2.0, 1.0, ClaimLaw::erlang_mixture({{1.0, 1, 1.0}})};
const RiskModel kMix{2.0, 0.8, ClaimLaw::erlang_mixture({{0.3, 1, 1.0}, {0.7, 3, 4.0}})};
const RiskModel kDet{1.5, 1.0, ClaimLaw::deterministic(1.0)};
}  // namespace

TEST_CASE("closed-form W for exponential claims", "[scale]") {
    ScaleEvaluator ev(kCL);
    CHECK(ev.w(0.0) == Catch::Approx(0.5).margin(1e-15));
    CHECK(ev.w(-1.0) == 0.0);
    CHECK(ev.w(-1e-12) == 0.0);
    CHECK(ev.w(1.0) == Catch::Approx(1.0 - 0.5 * std::exp(-0.5)).margin(1e-12));
    CHECK(ev.wq(1.0, 0.0) == Catch::Approx(0.5).margin(1e-13));
    for (double x : {0.0, 0.5, 2.0, 7.0})
        CHECK(ev.wq(0.0, x) == Catch::Approx(ev.w(x)).margin(1e-14));
}

TEST_CASE("Laplace transform identity for W^{(q)}", "[scale][property]") {
    ScaleEvaluator ev(kCL);
    for (double q : {0.0, 0.5, 1.0}) {
        const double phi = ev.phi(q);
        for (double shift : {0.5, 1.0, 2.0}) {
            const double beta = phi + shift;
            const double numeric = oracle::simpson_to_inf(
                [&](double x) { return std::exp(-beta * x) * ev.wq(q, x); }, 0.0, 4.0);
            CHECK(numeric == Catch::Approx(1.0 / (cumulant(kCL, beta) - q)).margin(1e-6));
        }
    }
}

TEST_CASE("numeric scale table reproduces the closed form", "[scale]") {
    ScaleEvaluator closed(kCL), numeric(kCLNumeric);
    for (double x = 0.0; x <= 12.0; x += 0.37)
        CHECK(numeric.w(x) == Catch::Approx(closed.w(x)).margin(1e-6));
    for (double x : {0.0, 0.31, 1.7, 6.0})
        CHECK(numeric.wq(0.8, x) == Catch::Approx(closed.wq(0.8, x)).margin(2e-6));
}

TEST_CASE("numeric scale functions satisfy the Laplace identity", "[scale]") {
    // reduced tolerance for the quadrature-backed claim laws
    for (const RiskModel* m : {&kMix, &kDet}) {
        ScaleEvaluator ev(*m);
        for (double q : {0.0, 0.7}) {
            const double beta = phi_inverse(*m, q) + 1.0;
            const double numeric = oracle::simpson_to_inf(
                [&](double x) { return std::exp(-beta * x) * ev.wq(q, x); }, 0.0, 4.0, 1e-10);
            CHECK(numeric == Catch::Approx(1.0 / (cumulant(*m, beta) - q)).margin(1e-5));
        }
    }
}

TEST_CASE("W^{(q)} monotone in x and q", "[scale][property]") {
    for (const RiskModel* m : {&kCL, &kMix}) {
        ScaleEvaluator ev(*m);
        double prev = 0.0;
        for (double x = 0.0; x <= 6.0; x += 0.25) {
            const double val = ev.wq(0.5, x);
            CHECK(val >= prev - 1e-12);
            prev = val;
        }
        for (double x : {0.0, 1.0, 3.0}) {
            double prevq = 0.0;
            for (double q : {0.0, 0.25, 0.5, 1.0, 2.0}) {
                const double val = ev.wq(q, x);
                CHECK(val >= prevq - 1e-12);
                prevq = val;
            }
        }
    }
}

TEST_CASE("w_prime differentiates W", "[scale]") {
    for (const RiskModel* m : {&kCL, &kMix}) {
        ScaleEvaluator ev(*m);
        for (double x : {0.4, 1.1, 2.7}) {
            const double fd = oracle::derivative([&](double t) { return ev.w(t); }, x, 1, 1e-4);
            CHECK(ev.w_prime(x) == Catch::Approx(fd).margin(2e-6));
        }
    }
}

TEST_CASE("Lambda vanishes when the level is unreachable", "[scale]") {
    ScaleEvaluator ev(kCL);
    CHECK(ev.lambda_q(0.5, -2.1, 1.0) == 0.0);  // x < -c t: support never reached
    // at x = -c t exactly, only the straight-line atom contributes:
    // W^{(q)}(0) (c t / t) e^{-lambda t} = e^{-lambda t}
    CHECK(ev.lambda_q(0.5, -2.0, 1.0) == Catch::Approx(std::exp(-1.0)).margin(1e-12));
    CHECK(ev.lambda_q(0.0, -1.9, 1.0) > 0.0);
    CHECK_THROWS_AS(ev.lambda_q(0.0, -1.0, 0.0), std::domain_error);
    CHECK_THROWS_AS(ev.lambda_q(0.0, -1.0, -2.0), std::domain_error);
}

TEST_CASE("incomplete Laplace transform identity (Lambda vs dG)", "[scale][property]") {
    ScaleEvaluator ev(kCL);
    for (double q : {0.0, 0.5, 1.0}) {
        for (double y : {0.5, 1.0, 2.0}) {
            for (double t : {0.3, 1.0, 3.0}) {
                const double lhs = std::exp(-q * t) * ev.lambda_q(q, -y, t);
                const double rhs = ev.incomplete_lt(q, y, t);
                CHECK(lhs == Catch::Approx(rhs).margin(1e-6));
            }
        }
    }
}

TEST_CASE("Lambda at q=0 approaches 1 as t grows", "[scale]") {
    ScaleEvaluator ev(kCL);
    CHECK(ev.lambda_q(0.0, -1.0, 200.0) == Catch::Approx(1.0).margin(1e-4));
}

TEST_CASE("G_y basics", "[scale]") {
    ScaleEvaluator ev(kCL);
    CHECK(ev.g_upcross(1.0, 0.4) == 0.0);  // below the slope bound y/c
    CHECK(ev.g_upcross(1.0, 0.5) == Catch::Approx(std::exp(-0.5)).margin(1e-12));
    double prev = 0.0;
    for (double t : {0.5, 0.8, 1.5, 3.0, 8.0, 20.0}) {
        const double val = ev.g_upcross(1.0, t);
        CHECK(val >= prev);
        prev = val;
    }
    CHECK(ev.g_upcross(1.0, 200.0) == Catch::Approx(1.0).margin(1e-4));
    CHECK_THROWS_AS(ev.g_upcross(0.0, 1.0), std::domain_error);
    CHECK_THROWS_AS(ev.g_upcross(1.0, 0.0), std::domain_error);
}

TEST_CASE("Kendall consistency: dG/dt equals (y/t) f_t(y)", "[scale][property]") {
    ScaleEvaluator ev(kCL);
    const double y = 1.0;
    for (double t : {0.8, 1.5, 3.0, 6.0}) {
        const double fd =
            oracle::derivative([&](double s) { return ev.g_upcross(y, s); }, t, 1, 1e-3);
        CHECK(fd == Catch::Approx(ev.first_passage_density(y, t)).margin(1e-5));
    }
}

TEST_CASE("tail transform decomposition", "[scale]") {
    ScaleEvaluator ev(kCL);
    for (double q : {0.0, 0.5, 1.0}) {
        for (double y : {0.5, 1.5}) {
            TailTransform tbl(ev, q, y);
            // total transform is e^{-Phi(q) y}
            CHECK(tbl.total() ==
                  Catch::Approx(std::exp(-phi_inverse(kCL, q) * y)).margin(1e-8));
            for (double t : {0.1, 0.4, 1.0, 3.0, 11.0}) {
                CHECK(tbl.incomplete(t) + tbl.tail(t) == Catch::Approx(tbl.total()).margin(1e-12));
                if (t > y / 2.0)
                    CHECK(tbl.incomplete(t) ==
                          Catch::Approx(ev.incomplete_lt(q, y, t)).margin(1e-9));
                CHECK(tbl.tail(t) == Catch::Approx(ev.tail_lt(q, y, t)).margin(1e-8));
            }
        }
    }
}
