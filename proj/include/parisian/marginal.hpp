#pragma once

// Law of X_t given X_0 = 0: an atom of mass e^{-lambda t} at c t (no claims)
// plus an absolutely continuous part below it. The compound Poisson claim sum
// is represented in the mixed-Erlang class: every continuous claim law here
// expands into exponential stages with a common rate, and the stage-count law
// of the sum comes out of the Panjer recursion. Exponential claims reduce to
// the familiar Poisson-times-Gamma series.

#include <cmath>
#include <vector>

#include "parisian/errors.hpp"
#include "parisian/model.hpp"

namespace parisian {

namespace detail {

// Poisson(mean) pmf for k = 0..kmax, anchored at the mode in log space so the
// table stays finite for large means.
inline std::vector<double> poisson_pmf_table(double mean, std::size_t kmax) {
    std::vector<double> p(kmax + 1, 0.0);
    if (mean <= 0.0) {
        p[0] = 1.0;
        return p;
    }
    std::size_t mode = static_cast<std::size_t>(mean);
    if (mode > kmax) mode = kmax;
    p[mode] = std::exp(double(mode) * std::log(mean) - mean - std::lgamma(double(mode) + 1.0));
    for (std::size_t k = mode + 1; k <= kmax; ++k) p[k] = p[k - 1] * mean / double(k);
    for (std::size_t k = mode; k > 0; --k) p[k - 1] = p[k] * double(k) / mean;
    return p;
}

}  // namespace detail

class MarginalLaw {
  public:
    // Tail mass left out of the stage-count law; the spec's series truncation.
    static constexpr double kSeriesTailMass = 1e-12;

    MarginalLaw(const RiskModel& model, double t) {
        if (!(t > 0.0)) throw std::domain_error("marginal_law: t must be > 0");
        if (!model.claim.is_continuous())
            throw capability_error(
                "marginal_law: deterministic claims give a purely atomic law; "
                "no density decomposition is available");
        validate_model(model);
        t_ = t;
        drift_end_ = model.premium_rate * t;
        const double mean_jumps = model.claim_rate * t;
        atom_ = std::exp(-mean_jumps);

        const StageExpansion ex = model.claim.stage_expansion();
        rate_ = ex.common_rate;

        if (ex.weights.size() == 1) {
            // Single-stage claims: stage count of the sum is Poisson itself.
            std::size_t kmax = static_cast<std::size_t>(
                mean_jumps + 12.0 * std::sqrt(mean_jumps + 1.0) + 30.0);
            auto table = detail::poisson_pmf_table(mean_jumps, kmax);
            double cum = table[0];
            std::size_t k = 1;
            stage_.assign(kmax, 0.0);
            for (; k <= kmax; ++k) {
                stage_[k - 1] = table[k];
                cum += table[k];
                if (1.0 - cum < kSeriesTailMass) break;
            }
            stage_.resize(std::min(k, kmax));
        } else {
            if (mean_jumps > 600.0)
                throw capability_error("marginal_law: lambda*t too large for the stage recursion");
            // Panjer recursion for the compound Poisson stage-count law. The
            // severity pmf b is truncated, so the recursion can only reach
            // the available mass e^{-lambda t (1 - sum b)}; terminate against
            // that, not against 1.
            const std::vector<double>& b = ex.weights;
            double bsum = 0.0;
            for (double w : b) bsum += w;
            const double available = std::exp(-mean_jumps * (1.0 - bsum));
            std::vector<double> q;
            q.push_back(std::exp(-mean_jumps));  // P(zero stages) = atom
            double cum = q[0];
            const std::size_t cap = 2000000;
            while (available - cum >= 0.5 * kSeriesTailMass && q.size() < cap) {
                const std::size_t k = q.size();
                double s = 0.0;
                const std::size_t jmax = std::min(k, b.size());
                for (std::size_t j = 1; j <= jmax; ++j) s += double(j) * b[j - 1] * q[k - j];
                q.push_back(mean_jumps / double(k) * s);
                cum += q.back();
            }
            if (q.size() >= cap)
                throw internal_error("marginal_law: stage recursion failed to converge");
            stage_.assign(q.begin() + 1, q.end());
        }

        stage_tail_.assign(stage_.size() + 1, 0.0);
        for (std::size_t i = stage_.size(); i-- > 0;)
            stage_tail_[i] = stage_tail_[i + 1] + stage_[i];
    }

    double time() const { return t_; }
    double atom_location() const { return drift_end_; }
    double atom_weight() const { return atom_; }
    double common_rate() const { return rate_; }
    const std::vector<double>& stage_weights() const { return stage_; }

    // Density f_t(z) of the absolutely continuous part; zero for z >= c t.
    double pdf(double z) const {
        const double s = drift_end_ - z;
        if (!(s > 0.0)) return 0.0;
        const double rs = rate_ * s;
        if (rs < 600.0) {
            double term = rate_ * std::exp(-rs);  // Erlang(1, R) density
            double total = 0.0;
            for (std::size_t k = 0; k < stage_.size(); ++k) {
                total += stage_[k] * term;
                term *= rs / double(k + 1);
            }
            return total;
        }
        double total = 0.0;
        const double logr = std::log(rate_), logs = std::log(s);
        for (std::size_t k = 0; k < stage_.size(); ++k) {
            if (stage_[k] == 0.0) continue;
            const double n = double(k + 1);
            total += stage_[k] * std::exp(n * logr + (n - 1.0) * logs - rs - std::lgamma(n));
        }
        return total;
    }

    // P(X_t <= z), including the atom at c t. Uses the stage representation:
    // P(sum >= s) = sum_l Poisson(R s){l} * P(stage count > l).
    double cdf(double z) const {
        const double s = drift_end_ - z;
        if (!(s > 0.0)) return 1.0;
        const double rs = rate_ * s;
        if (stage_.empty()) return 0.0;
        auto pois = detail::poisson_pmf_table(rs, stage_.size() - 1);
        double total = 0.0;
        for (std::size_t l = 0; l < stage_.size(); ++l) total += pois[l] * stage_tail_[l];
        return total;
    }

  private:
    double t_ = 0.0;
    double drift_end_ = 0.0;  // c t
    double atom_ = 0.0;       // e^{-lambda t}
    double rate_ = 0.0;       // common exponential-stage rate R
    std::vector<double> stage_;       // stage_[k-1] = P(K = k), k >= 1
    std::vector<double> stage_tail_;  // stage_tail_[l] = P(K > l), l >= 0
};

inline MarginalLaw marginal_law(const RiskModel& model, double t) { return MarginalLaw(model, t); }

}  // namespace parisian
