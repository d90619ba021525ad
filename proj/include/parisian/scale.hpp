#pragma once

// Scale functions and first-passage laws.
//
//   W^{(q)}: defined through int_0^inf e^{-bx} W^{(q)}(x) dx = 1/(psi(b)-q),
//            evaluated here via the exponential tilt W^{(q)}(x) =
//            e^{Phi(q)x} W_{Phi(q)}(x). For exponential claims the tilted
//            process is again of Cramer-Lundberg type and W_nu has a closed
//            form; otherwise W_nu solves a renewal (Volterra) equation on a
//            grid.
//   Lambda^{(q)}(x,t) = int W^{(q)}(x+z) (z/t) P_0(X_t in dz), the kernel of
//            the incomplete Laplace transform of tau_y^+.
//   G_y(t)  = P_0(tau_y^+ <= t) via Kendall's identity: an atom e^{-lambda y/c}
//            at y/c (straight-line hit, no claims) plus density (y/s) f_s(y).
//
// The atom of law(X_s) at c s is handled symbolically throughout; quadrature
// only ever sees the absolutely continuous part.

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <vector>

#include "parisian/errors.hpp"
#include "parisian/marginal.hpp"
#include "parisian/model.hpp"
#include "parisian/quadrature.hpp"

namespace parisian {

namespace detail {

// Grid solution of the renewal equation
//   c W(x) = 1 + int_0^x W(y) [lambda F-bar_xi(x-y)] dy
// for the 0-scale function of a bounded-variation model, by product-trapezoid
// stepping on two nested grids with Richardson extrapolation. W_nu increases
// to 1/E[X_1]; building stops once that limit is reached to ~1e-12.
class VolterraScaleTable {
  public:
    explicit VolterraScaleTable(const RiskModel& model) : m_(model) {
        limit_ = 1.0 / mean_x1(m_);
        const double gamma = lundberg_coefficient(m_);
        double scale = std::min(m_.claim.mean(), 1.0 / std::max(gamma, 1e-6));
        h_ = scale / 48.0;
        if (m_.claim.kind() == ClaimLaw::Kind::Deterministic) {
            // deterministic claims use the prefix-sum form below; the claim
            // size must be a whole number of steps
            const double d = m_.claim.deterministic_size();
            claim_steps_ = std::size_t(std::ceil(d / h_));
            h_ = d / double(claim_steps_);
        }
        coarse_ = {1.0 / m_.premium_rate};
        fine_ = {1.0 / m_.premium_rate};
        kc_ = {m_.claim_rate};
        kf_ = {m_.claim_rate};
        tc_ = {0.0};
        tf_ = {0.0};
        extend_nodes(64);
    }

    double eval(double x) {
        if (x < 0.0) return 0.0;
        std::lock_guard<std::mutex> lock(mutex_);
        double idx = x / h_;
        while (!saturated_ && idx + 2.0 >= double(coarse_.size()))
            extend_nodes(coarse_.size());
        if (saturated_ && idx + 2.0 >= double(coarse_.size())) return limit_;
        // 4-point Lagrange interpolation on Richardson-extrapolated nodes.
        std::size_t i = std::size_t(idx);
        std::size_t lo = (i == 0) ? 0 : i - 1;
        if (lo + 3 >= coarse_.size()) lo = coarse_.size() - 4;
        const double t = idx - double(lo);
        double node[4];
        for (int j = 0; j < 4; ++j) node[j] = richardson(lo + j);
        const double c0 = -(t - 1.0) * (t - 2.0) * (t - 3.0) / 6.0;
        const double c1 = t * (t - 2.0) * (t - 3.0) / 2.0;
        const double c2 = -t * (t - 1.0) * (t - 3.0) / 2.0;
        const double c3 = t * (t - 1.0) * (t - 2.0) / 6.0;
        return c0 * node[0] + c1 * node[1] + c2 * node[2] + c3 * node[3];
    }

    double limit() const { return limit_; }

  private:
    double richardson(std::size_t i) const {
        return fine_[2 * i] + (fine_[2 * i] - coarse_[i]) / 3.0;
    }

    // Advance one grid (values w, kernel samples k, prefix integrals t) by
    // one product-trapezoid step. Continuous claims convolve against the
    // smooth kernel lambda F-bar_xi; deterministic claims use the exact
    // window form c W(x) = 1 + lambda int_{max(0, x-d)}^x W(y) dy built from
    // trapezoid prefix sums, which keeps the claim-size jump out of the rule.
    void step(std::vector<double>& w, std::vector<double>& k, std::vector<double>& t, double h,
              std::size_t window) {
        const std::size_t n = w.size();
        if (m_.claim.kind() == ClaimLaw::Kind::Deterministic) {
            const double la = m_.claim_rate;
            const double lower = (n >= window) ? t[n - window] : 0.0;
            const double partial = t[n - 1] + 0.5 * h * w[n - 1];  // int_0^{x} W short of W_n
            const double wn =
                (1.0 + la * (partial - lower)) / (m_.premium_rate - 0.5 * h * la);
            w.push_back(wn);
            t.push_back(t[n - 1] + 0.5 * h * (w[n - 1] + wn));
            return;
        }
        if (k.size() <= n) k.push_back(m_.claim_rate * m_.claim.tail(double(k.size()) * h));
        double s = 0.5 * w[0] * k[n];
        for (std::size_t j = 1; j < n; ++j) s += w[j] * k[n - j];
        w.push_back((1.0 + h * s) / (m_.premium_rate - 0.5 * h * k[0]));
    }

    void extend_nodes(std::size_t count) {
        if (saturated_) return;
        for (std::size_t it = 0; it < count; ++it) {
            step(coarse_, kc_, tc_, h_, claim_steps_);
            step(fine_, kf_, tf_, 0.5 * h_, 2 * claim_steps_);
            step(fine_, kf_, tf_, 0.5 * h_, 2 * claim_steps_);
            if (coarse_.size() > 400000)
                throw internal_error("scale table: grid grew past the hard cap");
        }
        const std::size_t n = coarse_.size() - 1;
        if (limit_ - richardson(n) < 1e-12 * limit_) saturated_ = true;
    }

    RiskModel m_;
    std::mutex mutex_;
    double h_ = 0.0;
    double limit_ = 0.0;
    bool saturated_ = false;
    std::size_t claim_steps_ = 0;        // deterministic claim size in h-steps
    std::vector<double> coarse_, fine_;  // W values at steps h and h/2
    std::vector<double> kc_, kf_;        // lambda * claim tail at grid nodes
    std::vector<double> tc_, tf_;        // trapezoid prefix integrals of W
};

}  // namespace detail

class ScaleEvaluator {
  public:
    explicit ScaleEvaluator(RiskModel model, QuadratureSpec quad = {})
        : m_(std::move(model)), quad_(quad), state_(std::make_shared<State>()) {
        quad_.validate();
        validate_model(m_);
    }

    const RiskModel& model() const { return m_; }
    const QuadratureSpec& quadrature() const { return quad_; }

    double phi(double q) const {
        std::lock_guard<std::mutex> lock(state_->mutex);
        auto it = state_->phi.find(q);
        if (it != state_->phi.end()) return it->second;
        const double v = phi_inverse(m_, q);
        state_->phi.emplace(q, v);
        return v;
    }

    // W(x) = W^{(0)}(x).
    double w(double x) const { return wq(0.0, x); }

    // W^{(q)}(x) = e^{Phi(q) x} W_{Phi(q)}(x).
    double wq(double q, double x) const {
        if (!(q >= 0.0)) throw std::domain_error("wq: q must be >= 0");
        if (x < 0.0) return 0.0;
        const double nu = phi(q);
        if (m_.claim.is_exponential()) {
            const RiskModel tm = tilt(m_, nu);
            const double al = tm.claim.exponential_rate();
            const double c = tm.premium_rate, la = tm.claim_rate;
            const double wt =
                al / (al * c - la) * (1.0 - la / (al * c) * std::exp(-(al - la / c) * x));
            return std::exp(nu * x) * wt;
        }
        return std::exp(nu * x) * table(nu)->eval(x);
    }

    // d/dx W(x) for x > 0 (0-scale function); from the closed form for
    // exponential claims, otherwise from the renewal ODE
    // c W'(x) = lambda W(x) - lambda (g * W)(x)   (continuous claims)
    // c W'(x) = lambda W(x) - lambda W(x - d)     (deterministic claims).
    double w_prime(double x) const {
        if (!(x > 0.0)) throw std::domain_error("w_prime: x must be > 0");
        if (m_.claim.is_exponential()) {
            const double al = m_.claim.exponential_rate();
            const double c = m_.premium_rate, la = m_.claim_rate;
            return al / (al * c - la) * (la / (al * c)) * (al - la / c) *
                   std::exp(-(al - la / c) * x);
        }
        const double lam = m_.claim_rate, c = m_.premium_rate;
        if (m_.claim.kind() == ClaimLaw::Kind::Deterministic)
            return (lam * w(x) - lam * w(x - m_.claim.deterministic_size())) / c;
        const double conv = integrate(
            [&](double y) { return m_.claim.density(x - y) * w(y); }, 0.0, x, quad_);
        return (lam * w(x) - lam * conv) / c;
    }

    // Lambda^{(q)}(x, t) = int_0^inf W^{(q)}(x+z) (z/t) P_0(X_t in dz),
    // evaluated as the symbolic atom term plus a finite quadrature.
    double lambda_q(double q, double x, double t) const {
        if (!(t > 0.0)) throw std::domain_error("lambda_q: t must be > 0");
        const double ct = m_.premium_rate * t;
        // strictly below -ct the whole range of X_t misses the support of
        // W^{(q)}; at equality the atom of X_t at ct still meets W(0) = 1/c
        if (x < -ct) return 0.0;
        MarginalLaw ml(m_, t);
        double total = ml.atom_weight() * wq(q, x + ct) * m_.premium_rate;
        const double zlo = std::max(0.0, -x);
        if (zlo < ct)
            total += integrate(
                [&](double z) { return wq(q, x + z) * (z / t) * ml.pdf(z); }, zlo, ct, quad_);
        return total;
    }

    // Kendall-route density of tau_y^+ at s > y/c: (y/s) f_s(y).
    double first_passage_density(double y, double s) const {
        MarginalLaw ml(m_, s);
        return (y / s) * ml.pdf(y);
    }

    // G_y(t) = P_0(tau_y^+ <= t).
    double g_upcross(double y, double t) const {
        if (!(y > 0.0) || !(t > 0.0)) throw std::domain_error("g_upcross: need y > 0, t > 0");
        return incomplete_lt(0.0, y, t);
    }

    // E_0(e^{-q tau_y^+}; tau_y^+ <= t) = int_{(0,t]} e^{-qs} dG_y(s).
    double incomplete_lt(double q, double y, double t) const {
        if (!(y > 0.0) || !(t > 0.0)) throw std::domain_error("incomplete_lt: need y, t > 0");
        const double hit = y / m_.premium_rate;
        if (t < hit) return 0.0;
        double total = std::exp(-(q + m_.claim_rate) * hit);
        if (t > hit)
            total += integrate(
                [&](double s) { return std::exp(-q * s) * first_passage_density(y, s); }, hit, t,
                quad_);
        return std::min(total, 1.0);
    }

    // E_0(e^{-q tau_y^+}; tau_y^+ > t), the complement of the above against
    // the full transform e^{-Phi(q) y}; computed as a forward tail integral
    // so no cancellation occurs.
    double tail_lt(double q, double y, double t) const {
        if (!(y > 0.0) || !(t >= 0.0)) throw std::domain_error("tail_lt: need y > 0, t >= 0");
        const double hit = y / m_.premium_rate;
        double total = (t < hit) ? std::exp(-(q + m_.claim_rate) * hit) : 0.0;
        const double lo = std::max(t, hit);
        total += integrate_tail(
            [&](double s) { return std::exp(-q * s) * first_passage_density(y, s); }, lo, quad_,
            std::max(1.0, hit));
        return total;
    }

    std::shared_ptr<detail::VolterraScaleTable> table(double nu) const {
        std::lock_guard<std::mutex> lock(state_->mutex);
        auto it = state_->tables.find(nu);
        if (it != state_->tables.end()) return it->second;
        auto tab = std::make_shared<detail::VolterraScaleTable>(tilt(m_, nu));
        state_->tables.emplace(nu, tab);
        return tab;
    }

  private:
    struct State {
        std::mutex mutex;
        std::map<double, double> phi;
        std::map<double, std::shared_ptr<detail::VolterraScaleTable>> tables;
    };

    RiskModel m_;
    QuadratureSpec quad_;
    std::shared_ptr<State> state_;
};

// Precomputed prefix/suffix decomposition of the measure e^{-qs} dG_y(s) on a
// fixed adaptive partition. Lets delay-domain integrals query
//   incomplete(t) = int_{(0,t]} e^{-qs} dG_y(s)   and
//   tail(t)       = int_{(t,inf)} e^{-qs} dG_y(s)
// many times at the cost of one short local quadrature per query.
class TailTransform {
  public:
    TailTransform(const ScaleEvaluator& ev, double q, double y)
        : ev_(&ev), q_(q), y_(y) {
        if (!(y > 0.0)) throw std::domain_error("TailTransform: y must be > 0");
        const auto& m = ev.model();
        const QuadratureSpec& spec = ev.quadrature();
        hit_ = y / m.premium_rate;
        atom_ = std::exp(-(q + m.claim_rate) * hit_);

        // Expand the horizon until the integrand is negligible.
        const double cutoff = spec.truncation_mass * 1e-3;
        double hi = hit_ + std::max(1.0, hit_);
        double step = std::max(1.0, hit_);
        for (int it = 0; it < 400 && integrand(hi) > cutoff; ++it) {
            hi += step;
            step *= 1.25;
        }
        QuadratureSpec tight = spec;
        tight.abs_tol = std::min(spec.abs_tol, 1e-11);
        part_ = integrate_partition([&](double s) { return integrand(s); }, hit_, hi, tight);

        prefix_.assign(part_.segments.size() + 1, 0.0);
        for (std::size_t i = 0; i < part_.segments.size(); ++i)
            prefix_[i + 1] = prefix_[i] + part_.segments[i].integral;
        suffix_.assign(part_.segments.size() + 1, 0.0);
        for (std::size_t i = part_.segments.size(); i-- > 0;)
            suffix_[i] = suffix_[i + 1] + part_.segments[i].integral;
    }

    double total() const { return atom_ + suffix_[0]; }

    double incomplete(double t) const {
        if (t < hit_) return 0.0;
        if (t >= horizon()) return total();
        const std::size_t i = locate(t);
        const auto& seg = part_.segments[i];
        return atom_ + prefix_[i] + partial(seg.a, std::min(t, seg.b));
    }

    double tail(double t) const {
        if (t < hit_) return total();
        if (t >= horizon()) return 0.0;
        const std::size_t i = locate(t);
        const auto& seg = part_.segments[i];
        return suffix_[i + 1] + partial(std::min(t, seg.b), seg.b);
    }

  private:
    double integrand(double s) const {
        return std::exp(-q_ * s) * ev_->first_passage_density(y_, s);
    }
    double horizon() const { return part_.segments.empty() ? hit_ : part_.segments.back().b; }
    std::size_t locate(double t) const {
        // index of the segment containing t (segments are sorted, contiguous)
        std::size_t lo = 0, hi = part_.segments.size();
        while (lo + 1 < hi) {
            const std::size_t mid = (lo + hi) / 2;
            if (part_.segments[mid].a <= t)
                lo = mid;
            else
                hi = mid;
        }
        return lo;
    }
    double partial(double a, double b) const {
        if (!(b > a)) return 0.0;
        return detail::gk15([&](double s) { return integrand(s); }, a, b).integral;
    }

    const ScaleEvaluator* ev_;
    double q_, y_, hit_, atom_;
    AdaptivePartition part_;
    std::vector<double> prefix_, suffix_;
};

}  // namespace parisian
