#include <catch2/catch_amalgamated.hpp>
#include <algorithm>
#include <cmath>
#include <random>

#include "parisian/marginal.hpp"
#include "oracles.hpp"

using namespace parisian;

namespace {
const RiskModel kCL{2.0, 1.0, ClaimLaw::exponential(1.0)};
const RiskModel kMix{2.0, 0.8, ClaimLaw::erlang_mixture({{0.3, 1, 1.0}, {0.7, 3, 4.0}})};
}  // namespace

TEST_CASE("atom of the no-claim path", "[marginal]") {
    MarginalLaw ml(kCL, 0.5);
    CHECK(ml.atom_location() == Catch::Approx(1.0));
    CHECK(ml.atom_weight() == Catch::Approx(std::exp(-0.5)).margin(1e-15));
    CHECK(ml.pdf(1.0) == 0.0);   // density vanishes at and above c t
    CHECK(ml.pdf(1.5) == 0.0);
    CHECK(ml.pdf(0.5) > 0.0);
    CHECK_THROWS_AS(MarginalLaw(kCL, 0.0), std::domain_error);
    CHECK_THROWS_AS(MarginalLaw({1.5, 1.0, ClaimLaw::deterministic(1.0)}, 1.0),
                    capability_error);
}

TEST_CASE("exponential claims match the Poisson-Gamma series", "[marginal]") {
    const double t = 0.8, c = 2.0, lam = 1.0, al = 1.0;
    MarginalLaw ml(kCL, t);
    auto series = [&](double z) {
        const double s = c * t - z;
        if (s <= 0.0) return 0.0;
        double total = 0.0;
        for (int n = 1; n <= 60; ++n) {
            const double logp = n * std::log(lam * t) - lam * t - std::lgamma(n + 1.0) +
                                n * std::log(al) + (n - 1.0) * std::log(s) - al * s -
                                std::lgamma(double(n));
            total += std::exp(logp);
        }
        return total;
    };
    for (double z : {-2.0, -0.5, 0.0, 0.7, 1.3, 1.59})
        CHECK(ml.pdf(z) == Catch::Approx(series(z)).margin(1e-12));
}

TEST_CASE("atom plus density mass is 1", "[marginal][property]") {
    // the density jumps to 0 at c t; stop the oracle a hair below the edge
    for (double t : {0.1, 1.0, 10.0}) {
        MarginalLaw ml(kCL, t);
        const double ct = 2.0 * t;
        const double span = 60.0 + 10.0 * t;  // S_t mass beyond this is ~0
        const double mass = oracle::simpson([&](double z) { return ml.pdf(z); }, ct - span,
                                            ct - 1e-10, 1e-11);
        CHECK(ml.atom_weight() + mass == Catch::Approx(1.0).margin(1e-8));
    }
    MarginalLaw ml(kMix, 1.5);
    const double ct = 2.0 * 1.5;
    const double mass =
        oracle::simpson([&](double z) { return ml.pdf(z); }, ct - 80.0, ct - 1e-10, 1e-11);
    CHECK(ml.atom_weight() + mass == Catch::Approx(1.0).margin(1e-8));
}

TEST_CASE("mean identity E X_t = (c - lambda E xi) t", "[marginal]") {
    for (const RiskModel* m : {&kCL, &kMix}) {
        const double t = 1.3;
        MarginalLaw ml(*m, t);
        const double ct = m->premium_rate * t;
        const double mean = ml.atom_weight() * ct +
                            oracle::simpson([&](double z) { return z * ml.pdf(z); }, ct - 90.0,
                                            ct - 1e-10, 1e-11);
        CHECK(mean == Catch::Approx(mean_x1(*m) * t).margin(1e-7));
    }
}

TEST_CASE("cdf agrees with integrated density", "[marginal]") {
    for (const RiskModel* m : {&kCL, &kMix}) {
        MarginalLaw ml(*m, 0.9);
        const double ct = m->premium_rate * 0.9;
        for (double z : {-1.0, 0.0, 1.0, ct - 0.05}) {
            const double want =
                oracle::simpson([&](double y) { return ml.pdf(y); }, ct - 80.0, z, 1e-11);
            CHECK(ml.cdf(z) == Catch::Approx(want).margin(1e-9));
        }
        CHECK(ml.cdf(ct) == 1.0);
        CHECK(ml.cdf(ct + 1.0) == 1.0);
        CHECK(ml.cdf(ct - 1e-9) == Catch::Approx(1.0 - ml.atom_weight()).margin(1e-6));
    }
}

TEST_CASE("empirical law of X_t matches the analytic cdf", "[marginal][mc]") {
    // independent sampler: exponential interarrivals count the claims
    const double t = 1.0, c = 2.0, lam = 1.0;
    std::mt19937_64 gen(20240817u);
    std::exponential_distribution<double> interarrival(lam);
    std::exponential_distribution<double> claim(1.0);
    const std::size_t n = 1000000;
    std::vector<double> samples(n);
    for (auto& s : samples) {
        double clock = interarrival(gen);
        double total = 0.0;
        while (clock <= t) {
            total += claim(gen);
            clock += interarrival(gen);
        }
        s = c * t - total;
    }
    std::sort(samples.begin(), samples.end());
    MarginalLaw ml(kCL, t);
    const double ks = oracle::ks_distance(std::move(samples),
                                          [&](double z) { return ml.cdf(z); });
    CHECK(ks < 4e-3);
}
