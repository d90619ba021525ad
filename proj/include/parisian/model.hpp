#pragma once

// Risk-reserve process X_t = u + c t - sum_{j<=A_t} xi_j with Poisson claim
// arrivals A and i.i.d. positive claims xi. Spectrally negative, bounded
// variation. This header holds the claim-size laws, the cumulant
// psi(theta) = c theta + lambda (E e^{-theta xi} - 1), its right inverse Phi,
// and the Levy tail Pi((-inf, x]).

#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <sstream>
#include <vector>

#include "parisian/errors.hpp"
#include "parisian/taylor_jet.hpp"

namespace parisian {

struct ErlangComponent {
    double weight = 1.0;
    unsigned shape = 1;  // integer shape nu >= 1
    double rate = 1.0;
};

// Mixed-Erlang stage representation of a nonnegative law: the law of a sum of
// K exponential(common_rate) stages where K has pmf weights[k-1].
struct StageExpansion {
    double common_rate = 0.0;
    std::vector<double> weights;  // index k-1 holds P(K = k)
};

class ClaimLaw {
  public:
    enum class Kind { Exponential, ErlangMixture, Deterministic };

    static ClaimLaw exponential(double rate) {
        if (!(rate > 0.0) || !std::isfinite(rate))
            throw model_error("ClaimLaw: exponential rate must be positive and finite");
        ClaimLaw law;
        law.kind_ = Kind::Exponential;
        law.components_ = {{1.0, 1, rate}};
        return law;
    }

    static ClaimLaw erlang_mixture(std::vector<ErlangComponent> comps) {
        if (comps.empty()) throw model_error("ClaimLaw: mixture needs at least one component");
        double wsum = 0.0;
        for (const auto& c : comps) {
            if (!(c.weight >= 0.0) || !(c.rate > 0.0) || !std::isfinite(c.rate) || c.shape < 1)
                throw model_error("ClaimLaw: component needs weight>=0, shape>=1, finite rate>0");
            wsum += c.weight;
        }
        if (std::abs(wsum - 1.0) > 1e-12)
            throw model_error("ClaimLaw: mixture weights must sum to 1 within 1e-12");
        ClaimLaw law;
        law.kind_ = Kind::ErlangMixture;
        law.components_ = std::move(comps);
        return law;
    }

    static ClaimLaw deterministic(double size) {
        if (!(size > 0.0) || !std::isfinite(size))
            throw model_error("ClaimLaw: deterministic size must be positive and finite");
        ClaimLaw law;
        law.kind_ = Kind::Deterministic;
        law.size_ = size;
        return law;
    }

    Kind kind() const { return kind_; }
    bool is_exponential() const { return kind_ == Kind::Exponential; }
    bool is_continuous() const { return kind_ != Kind::Deterministic; }
    const std::vector<ErlangComponent>& components() const { return components_; }
    double deterministic_size() const { return size_; }

    double exponential_rate() const {
        if (kind_ != Kind::Exponential)
            throw capability_error("ClaimLaw: not an exponential claim law");
        return components_[0].rate;
    }

    double mean() const {
        if (kind_ == Kind::Deterministic) return size_;
        double m = 0.0;
        for (const auto& c : components_) m += c.weight * double(c.shape) / c.rate;
        return m;
    }

    // E e^{-theta xi} is finite for theta > lower_theta().
    double lower_theta() const {
        if (kind_ == Kind::Deterministic) return -std::numeric_limits<double>::infinity();
        double rmin = std::numeric_limits<double>::infinity();
        for (const auto& c : components_) rmin = std::min(rmin, c.rate);
        return -rmin;
    }

    double mgf_neg(double theta) const {
        if (kind_ == Kind::Deterministic) return std::exp(-theta * size_);
        double s = 0.0;
        for (const auto& c : components_) {
            double base = c.rate / (c.rate + theta);
            double p = 1.0;
            for (unsigned i = 0; i < c.shape; ++i) p *= base;
            s += c.weight * p;
        }
        return s;
    }

    // d/dtheta of mgf_neg; equals -E[xi e^{-theta xi}].
    double mgf_neg_deriv(double theta) const {
        if (kind_ == Kind::Deterministic) return -size_ * std::exp(-theta * size_);
        double s = 0.0;
        for (const auto& c : components_) {
            double base = c.rate / (c.rate + theta);
            double p = 1.0;
            for (unsigned i = 0; i < c.shape; ++i) p *= base;
            s += -c.weight * double(c.shape) * p / (c.rate + theta);
        }
        return s;
    }

    TaylorJet mgf_neg(const TaylorJet& theta) const {
        if (kind_ == Kind::Deterministic) return jet_exp(theta * (-size_));
        TaylorJet s = TaylorJet::constant(theta.order(), 0.0);
        for (const auto& c : components_) {
            TaylorJet base = TaylorJet::constant(theta.order(), c.rate) / (theta + c.rate);
            s += c.weight * jet_powi(base, c.shape);
        }
        return s;
    }

    TaylorJet mgf_neg_deriv(const TaylorJet& theta) const {
        if (kind_ == Kind::Deterministic) return jet_exp(theta * (-size_)) * (-size_);
        TaylorJet s = TaylorJet::constant(theta.order(), 0.0);
        for (const auto& c : components_) {
            TaylorJet base = TaylorJet::constant(theta.order(), c.rate) / (theta + c.rate);
            s -= (c.weight * double(c.shape)) * jet_powi(base, c.shape) / (theta + c.rate);
        }
        return s;
    }

    // P(xi > s); Erlang tail is the finite Poisson sum from the mixture display.
    double tail(double s) const {
        if (s < 0.0) return 1.0;
        if (kind_ == Kind::Deterministic) return s < size_ ? 1.0 : 0.0;
        double total = 0.0;
        for (const auto& c : components_) {
            double term = std::exp(-c.rate * s);
            double acc = term;
            for (unsigned l = 1; l < c.shape; ++l) {
                term *= c.rate * s / double(l);
                acc += term;
            }
            total += c.weight * acc;
        }
        return total;
    }

    // P(xi >= s); differs from tail() only where the law has an atom.
    double tail_closed(double s) const {
        if (kind_ == Kind::Deterministic) return s <= size_ ? 1.0 : 0.0;
        return tail(s);
    }

    double cdf(double s) const { return 1.0 - tail(s); }

    // Density of a continuous claim law.
    double density(double s) const {
        if (kind_ == Kind::Deterministic)
            throw capability_error("ClaimLaw: deterministic law has no density");
        if (s <= 0.0) return 0.0;
        double total = 0.0;
        for (const auto& c : components_) {
            double logp = double(c.shape) * std::log(c.rate) + double(c.shape - 1) * std::log(s) -
                          c.rate * s - std::lgamma(double(c.shape));
            total += c.weight * std::exp(logp);
        }
        return total;
    }

    // Mixed-Erlang representation with a single common rate (the largest rate
    // in the mixture); components with smaller rates are re-expanded through
    // the negative-binomial identity, truncated once the left-out mass drops
    // below tail_eps. Exponential laws come back as a single stage.
    StageExpansion stage_expansion(double tail_eps = 1e-15) const {
        if (kind_ == Kind::Deterministic)
            throw capability_error("ClaimLaw: deterministic law has no stage expansion");
        StageExpansion ex;
        double rmax = 0.0;
        for (const auto& c : components_) rmax = std::max(rmax, c.rate);
        ex.common_rate = rmax;
        for (const auto& c : components_) {
            if (c.weight == 0.0) continue;
            const double p = c.rate / rmax;
            if (p >= 1.0 - 1e-15) {
                grow(ex.weights, c.shape);
                ex.weights[c.shape - 1] += c.weight;
                continue;
            }
            // Erlang(nu, r) = sum_{k>=nu} NB(k-nu; nu, p) Erlang(k, rmax)
            double w = std::pow(p, double(c.shape));
            double cum = 0.0;
            for (unsigned k = c.shape; cum < 1.0 - tail_eps; ++k) {
                grow(ex.weights, k);
                ex.weights[k - 1] += c.weight * w;
                cum += w;
                w *= (1.0 - p) * double(k) / double(k + 1 - c.shape);
                if (k > 100000)
                    throw internal_error("ClaimLaw: stage expansion failed to converge");
            }
        }
        return ex;
    }

    // Draw a claim using the supplied uniform(0,1) source. Consumption order:
    // one uniform for the mixture component, then one per exponential stage.
    template <typename U>
    double sample(U&& uniform) const {
        if (kind_ == Kind::Deterministic) return size_;
        std::size_t idx = 0;
        if (components_.size() > 1) {
            const double u = uniform();
            double acc = 0.0;
            for (; idx + 1 < components_.size(); ++idx) {
                acc += components_[idx].weight;
                if (u <= acc) break;
            }
        }
        const auto& c = components_[idx];
        double s = 0.0;
        for (unsigned i = 0; i < c.shape; ++i) s += -std::log(uniform()) / c.rate;
        return s;
    }

  private:
    static void grow(std::vector<double>& v, unsigned stage) {
        if (v.size() < stage) v.resize(stage, 0.0);
    }

    Kind kind_ = Kind::Exponential;
    std::vector<ErlangComponent> components_;
    double size_ = 0.0;
};

struct RiskModel {
    double premium_rate = 1.0;  // c
    double claim_rate = 1.0;    // lambda
    ClaimLaw claim = ClaimLaw::exponential(1.0);
};

inline void validate_rates(const RiskModel& m) {
    if (!(m.premium_rate > 0.0) || !std::isfinite(m.premium_rate))
        throw model_error("RiskModel: premium rate must be positive and finite");
    if (!(m.claim_rate > 0.0) || !std::isfinite(m.claim_rate))
        throw model_error("RiskModel: claim rate must be positive and finite");
}

// E_0 X_1 = c - lambda E(xi); throws if the safety loading condition fails.
inline double mean_x1(const RiskModel& m) {
    validate_rates(m);
    const double mean = m.premium_rate - m.claim_rate * m.claim.mean();
    if (!(mean > 0.0)) {
        std::ostringstream os;
        os << "RiskModel: safety loading violated, E[X_1] = " << mean << " <= 0";
        throw model_error(os.str());
    }
    return mean;
}

inline void validate_model(const RiskModel& m) { (void)mean_x1(m); }

// psi(theta) = c theta + lambda (E e^{-theta xi} - 1).
inline double cumulant(const RiskModel& m, double theta) {
    if (theta < 0.0 && theta <= m.claim.lower_theta())
        throw std::domain_error("cumulant: theta outside the claim law's domain");
    return m.premium_rate * theta + m.claim_rate * (m.claim.mgf_neg(theta) - 1.0);
}

inline double cumulant_deriv(const RiskModel& m, double theta) {
    if (theta < 0.0 && theta <= m.claim.lower_theta())
        throw std::domain_error("cumulant: theta outside the claim law's domain");
    return m.premium_rate + m.claim_rate * m.claim.mgf_neg_deriv(theta);
}

inline TaylorJet cumulant(const RiskModel& m, const TaylorJet& theta) {
    return theta * m.premium_rate + m.claim_rate * (m.claim.mgf_neg(theta) - 1.0);
}

inline TaylorJet cumulant_deriv(const RiskModel& m, const TaylorJet& theta) {
    return m.claim_rate * m.claim.mgf_neg_deriv(theta) + m.premium_rate;
}

// Phi(q) = sup{theta >= 0 : psi(theta) = q}. Under safety loading psi is
// strictly increasing and convex on [0, inf), so this is a plain root.
// Exponential claims use the closed form; otherwise a bracketed Newton.
inline double phi_inverse(const RiskModel& m, double q) {
    if (!(q >= 0.0)) throw std::domain_error("phi_inverse: q must be >= 0");
    validate_model(m);
    const double c = m.premium_rate, la = m.claim_rate;
    if (m.claim.is_exponential()) {
        const double al = m.claim.exponential_rate();
        const double d = al * c - la - q;
        return (std::sqrt(d * d + 4.0 * q * al * c) - d) / (2.0 * c);
    }
    if (q == 0.0) return 0.0;
    double hi = 1.0;
    while (cumulant(m, hi) <= q) {
        hi *= 2.0;
        if (hi > 1e12) throw internal_error("phi_inverse: bracket search failed");
    }
    double lo = 0.0;
    double theta = 0.5 * hi;
    for (int it = 0; it < 200; ++it) {
        const double f = cumulant(m, theta) - q;
        if (f > 0.0)
            hi = theta;
        else
            lo = theta;
        const double step = f / cumulant_deriv(m, theta);
        double next = theta - step;
        if (!(next > lo) || !(next < hi)) next = 0.5 * (lo + hi);  // bisection fallback
        if (std::abs(next - theta) <= 1e-15 * std::max(1.0, std::abs(theta))) {
            theta = next;
            break;
        }
        theta = next;
    }
    return theta;
}

// Pi((-inf, x]) for x < 0: jump measure mass of jumps at or below x, equal to
// lambda P(xi >= -x).
inline double levy_tail(const RiskModel& m, double x) {
    if (!(x < 0.0)) throw std::domain_error("levy_tail: x must be < 0");
    return m.claim_rate * m.claim.tail_closed(-x);
}

// Density of Pi on (-inf, 0) for continuous claim laws: lambda g(-x).
inline double levy_density(const RiskModel& m, double x) {
    if (!(x < 0.0)) throw std::domain_error("levy_density: x must be < 0");
    return m.claim_rate * m.claim.density(-x);
}

// Exponential tilt: the process with cumulant psi_nu(theta) = psi(theta+nu)
// - psi(nu) is again drift + compound Poisson, with the claim law reweighted
// by e^{-nu s}. The mixed-Erlang class is closed under this operation.
inline RiskModel tilt(const RiskModel& m, double nu) {
    if (nu == 0.0) return m;
    if (!(nu > 0.0)) throw std::domain_error("tilt: nu must be >= 0");
    RiskModel out = m;
    switch (m.claim.kind()) {
        case ClaimLaw::Kind::Exponential: {
            const double al = m.claim.exponential_rate();
            out.claim = ClaimLaw::exponential(al + nu);
            out.claim_rate = m.claim_rate * al / (al + nu);
            break;
        }
        case ClaimLaw::Kind::ErlangMixture: {
            const double norm = m.claim.mgf_neg(nu);
            std::vector<ErlangComponent> comps;
            for (const auto& c : m.claim.components()) {
                double scale = std::pow(c.rate / (c.rate + nu), double(c.shape));
                comps.push_back({c.weight * scale / norm, c.shape, c.rate + nu});
            }
            out.claim = ClaimLaw::erlang_mixture(std::move(comps));
            out.claim_rate = m.claim_rate * norm;
            break;
        }
        case ClaimLaw::Kind::Deterministic: {
            out.claim_rate = m.claim_rate * std::exp(-nu * m.claim.deterministic_size());
            break;
        }
    }
    return out;
}

// Lundberg (adjustment) coefficient: the positive root of psi(-gamma) = 0,
// giving the classical bound P_u(tau_0^- < inf) <= e^{-gamma u}.
inline double lundberg_coefficient(const RiskModel& m) {
    validate_model(m);
    if (m.claim.is_exponential())
        return m.claim.exponential_rate() - m.claim_rate / m.premium_rate;
    const double lower = m.claim.lower_theta();  // -inf for bounded claims
    double hi = std::isfinite(lower) ? -lower : 1.0;
    if (!std::isfinite(lower)) {
        while (cumulant(m, -hi) < 0.0) hi *= 2.0;
    }
    double lo = 0.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        double val;
        if (std::isfinite(lower) && -mid <= lower)
            val = std::numeric_limits<double>::infinity();
        else
            val = cumulant(m, -mid);
        if (val < 0.0)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

// Classical (non-Parisian) ruin probability bound: the exact expression
// (lambda/(alpha c)) e^{-(alpha - lambda/c) u} for exponential claims,
// Lundberg's inequality e^{-gamma u} otherwise.
inline double classical_ruin_bound(const RiskModel& m, double u) {
    const double gamma = lundberg_coefficient(m);
    double prefactor = 1.0;
    if (m.claim.is_exponential())
        prefactor = m.claim_rate / (m.claim.exponential_rate() * m.premium_rate);
    return prefactor * std::exp(-gamma * std::max(u, 0.0));
}

// Smallest u with classical_ruin_bound(u) < tol; absorption/truncation levels
// come from this rule.
inline double ruin_bound_level(const RiskModel& m, double tol) {
    const double gamma = lundberg_coefficient(m);
    double prefactor = 1.0;
    if (m.claim.is_exponential())
        prefactor = m.claim_rate / (m.claim.exponential_rate() * m.premium_rate);
    if (prefactor < tol) return 0.0;
    return std::log(prefactor / tol) / gamma;
}

}  // namespace parisian
