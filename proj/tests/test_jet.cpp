#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "parisian/model.hpp"
#include "parisian/ruin.hpp"
#include "parisian/taylor_jet.hpp"
#include "oracles.hpp"

using namespace parisian;

TEST_CASE("jet arithmetic against hand derivatives", "[jet]") {
    // f(r) = r^2 e^r: f' = (r^2+2r)e^r, f'' = (r^2+4r+2)e^r
    const double r = 0.7;
    TaylorJet x = TaylorJet::variable(4, r);
    TaylorJet f = x * x * jet_exp(x);
    const double er = std::exp(r);
    CHECK(f.value() == Catch::Approx(r * r * er).epsilon(1e-14));
    CHECK(f.derivative(1) == Catch::Approx((r * r + 2 * r) * er).epsilon(1e-13));
    CHECK(f.derivative(2) == Catch::Approx((r * r + 4 * r + 2) * er).epsilon(1e-13));

    // division and sqrt: g(r) = sqrt(r) / (1 + r)
    TaylorJet g = jet_sqrt(x) / (x + 1.0);
    auto gf = [](double t) { return std::sqrt(t) / (1.0 + t); };
    CHECK(g.derivative(1) == Catch::Approx(oracle::derivative(gf, r, 1)).margin(1e-9));
    CHECK(g.derivative(2) == Catch::Approx(oracle::derivative(gf, r, 2)).margin(1e-7));
}

TEST_CASE("integer powers multiply out", "[jet]") {
    TaylorJet x = TaylorJet::variable(5, 1.3);
    TaylorJet direct = x * x * x * x;
    TaylorJet pow = jet_powi(x, 4);
    for (std::size_t k = 0; k <= 5; ++k)
        CHECK(pow[k] == Catch::Approx(direct[k]).margin(1e-12));
}

TEST_CASE("division by a zero-valued jet is rejected", "[jet]") {
    TaylorJet x = TaylorJet::variable(3, 0.0);
    TaylorJet one = TaylorJet::constant(3, 1.0);
    CHECK_THROWS_AS(one / x, std::domain_error);
}

TEST_CASE("phi_jet composes to the identity under psi", "[jet]") {
    // psi(Phi(r)) = r means the composite jet must be [r0, 1, 0, 0, ...]
    const std::size_t order = 6;
    auto check_model = [&](const RiskModel& m, double r0) {
        TaylorJet phi = phi_jet(m, r0, order);
        CHECK(cumulant(m, phi.value()) == Catch::Approx(r0).margin(1e-12));
        TaylorJet comp = cumulant(m, phi);
        CHECK(comp[0] == Catch::Approx(r0).margin(1e-11));
        CHECK(comp[1] == Catch::Approx(1.0).margin(1e-10));
        for (std::size_t k = 2; k <= order; ++k) CHECK(comp[k] == Catch::Approx(0.0).margin(1e-9));
    };
    check_model({2.0, 1.0, ClaimLaw::exponential(1.0)}, 1.0);
    check_model({2.0, 1.0, ClaimLaw::exponential(1.0)}, 0.25);
    check_model({2.0, 1.0, ClaimLaw::erlang_mixture({{0.4, 2, 2.0}, {0.6, 1, 1.5}})}, 0.8);
    check_model({1.5, 1.0, ClaimLaw::deterministic(1.0)}, 0.6);
}

TEST_CASE("phi_jet matches finite differences of Phi", "[jet]") {
    RiskModel m{2.0, 1.0, ClaimLaw::exponential(1.0)};
    const double r = 1.0;
    TaylorJet phi = phi_jet(m, r, 3);
    auto f = [&](double q) { return phi_inverse(m, q); };
    CHECK(phi.derivative(1) == Catch::Approx(oracle::derivative(f, r, 1)).margin(1e-8));
    CHECK(phi.derivative(2) == Catch::Approx(oracle::derivative(f, r, 2)).margin(1e-6));
}
