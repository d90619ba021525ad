#pragma once

// Parisian ruin analytics for deficit-dependent random delay windows.
//
//   h_u(x)  first-deficit density: h_u(x) = int_{(0-,u]} Pi((-inf,x+z-u]) dW(z)
//   K(x)    P(the delay granted at deficit x outlasts the excursion):
//           K(x) = E_0 F-bar_x(tau^+_{|x|}) = int F-bar_x(t) dG_{|x|}(t)
//   H(v)    = int_{-inf}^0 K(x) h_v(x) dx
//   survival formula: P_u(no Parisian ruin) = E_0 X_1 (W(u) + W(0) H(u)/(1-H(0)))
//   M_1/M_2, Q_1/Q_2 and the geometric recursion for the joint transform
//           E_u(e^{-vT + w X_T}; T < tau_b^+).
//
// Closed forms (exponential claims; piecewise-exponential or Erlang-mixture
// kernels) sit next to fully general quadrature routes; both are exposed so
// they can be played against each other.

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "parisian/delay_kernel.hpp"
#include "parisian/errors.hpp"
#include "parisian/model.hpp"
#include "parisian/quadrature.hpp"
#include "parisian/scale.hpp"
#include "parisian/taylor_jet.hpp"

namespace parisian {

enum class Route { Auto, ClosedForm, Quadrature };

inline const char* route_name(Route r) {
    switch (r) {
        case Route::ClosedForm: return "closed-form";
        case Route::Quadrature: return "quadrature";
        default: return "auto";
    }
}

// Taylor jet of Phi around r0: closed form for exponential claims, otherwise
// Newton iteration on jets for psi(theta) = r (each sweep doubles the number
// of correct coefficients).
inline TaylorJet phi_jet(const RiskModel& m, double r0, std::size_t order) {
    if (m.claim.is_exponential()) {
        const double al = m.claim.exponential_rate();
        const double c = m.premium_rate, la = m.claim_rate;
        TaylorJet r = TaylorJet::variable(order, r0);
        TaylorJet d = -r + (al * c - la);
        TaylorJet disc = d * d + (4.0 * al * c) * r;
        return (jet_sqrt(disc) - d) / (2.0 * c);
    }
    TaylorJet r = TaylorJet::variable(order, r0);
    TaylorJet theta = TaylorJet::constant(order, phi_inverse(m, r0));
    for (int it = 0; it < 8; ++it)
        theta -= (cumulant(m, theta) - r) / cumulant_deriv(m, theta);
    return theta;
}

namespace detail {

// Chebyshev interpolant of a smooth function on [lo, hi], fitted at interior
// nodes with the degree doubled until spot checks agree.
class ChebyshevFit {
  public:
    template <typename F>
    ChebyshevFit(F&& f, double lo, double hi, double tol) : lo_(lo), hi_(hi) {
        std::size_t n = 24;
        fit(f, n);
        for (;;) {
            double worst = 0.0;
            for (int i = 1; i <= 7; ++i) {
                const double x = lo_ + (hi_ - lo_) * (double(i) / 8.0 + 0.013);
                worst = std::max(worst, std::abs(eval(x) - f(x)));
            }
            if (worst <= tol || n >= 192) break;
            n *= 2;
            fit(f, n);
        }
    }

    double eval(double x) const {
        const double t = (2.0 * x - lo_ - hi_) / (hi_ - lo_);
        double d1 = 0.0, d2 = 0.0;
        for (std::size_t j = coef_.size() - 1; j >= 1; --j) {
            const double tmp = d1;
            d1 = 2.0 * t * d1 - d2 + coef_[j];
            d2 = tmp;
        }
        return t * d1 - d2 + 0.5 * coef_[0];
    }

  private:
    template <typename F>
    void fit(F&& f, std::size_t n) {
        constexpr double kPi = 3.14159265358979323846;
        std::vector<double> fx(n);
        for (std::size_t k = 0; k < n; ++k) {
            const double t = std::cos(kPi * (double(k) + 0.5) / double(n));
            fx[k] = f(0.5 * (lo_ + hi_) + 0.5 * (hi_ - lo_) * t);
        }
        coef_.assign(n, 0.0);
        for (std::size_t j = 0; j < n; ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < n; ++k)
                s += fx[k] * std::cos(kPi * double(j) * (double(k) + 0.5) / double(n));
            coef_[j] = 2.0 * s / double(n);
        }
    }

    double lo_, hi_;
    std::vector<double> coef_;
};

// Piecewise-Chebyshev cache of a deficit function x -> f(x) on [x_min, 0),
// split at the kernel's breakpoints (f may jump across cells but is smooth
// inside each one).
class DeficitCache {
  public:
    template <typename F>
    DeficitCache(F&& f, std::vector<double> edges, double tol) : edges_(std::move(edges)) {
        for (std::size_t i = 0; i + 1 < edges_.size(); ++i)
            pieces_.emplace_back(f, edges_[i], edges_[i + 1], tol);
    }

    double eval(double x) const {
        // cell i covers (edges_[i], edges_[i+1]]; x below x_min clamps to 0
        if (x <= edges_.front()) return 0.0;
        std::size_t lo = 0, hi = edges_.size() - 1;
        while (lo + 1 < hi) {
            const std::size_t mid = (lo + hi) / 2;
            if (edges_[mid] < x)
                lo = mid;
            else
                hi = mid;
        }
        return pieces_[lo].eval(x);
    }

    const std::vector<double>& edges() const { return edges_; }

  private:
    std::vector<double> edges_;
    std::vector<ChebyshevFit> pieces_;
};

}  // namespace detail

class ParisianProblem {
  public:
    static constexpr unsigned kMaxDerivativeOrder = 16;

    ParisianProblem(RiskModel model, DelayKernel kernel, QuadratureSpec quad = {})
        : model_(std::move(model)),
          kernel_(std::move(kernel)),
          quad_(quad),
          scale_(model_, quad_) {
        quad_.validate();
        validate_model(model_);
        h0_auto_ = h_fn_impl(0.0, resolve(Route::Auto));
        if (!(h0_auto_ < 1.0))
            throw internal_error(
                "ParisianProblem: computed H(0) >= 1, impossible since H(0) <= "
                "P_0(tau_0^- < inf) < 1; numerical defect");
    }

    const RiskModel& model() const { return model_; }
    const DelayKernel& kernel() const { return kernel_; }
    const ScaleEvaluator& scale() const { return scale_; }
    const QuadratureSpec& quadrature() const { return quad_; }

    bool closed_form_available() const {
        return model_.claim.is_exponential() &&
               kernel_.kind() != DelayKernel::Kind::Deterministic;
    }

    Route resolve(Route r) const {
        if (r != Route::Auto) return r;
        return closed_form_available() ? Route::ClosedForm : Route::Quadrature;
    }

    // --- first-deficit density -------------------------------------------

    // h_u(x), x < 0: closed form (lambda/c) e^{alpha x - (alpha-lambda/c) u}
    // for exponential claims; otherwise the Stieltjes integral against dW
    // including the atom W(0) at z = 0.
    double first_deficit_density(double u, double x, Route route = Route::Auto) const {
        if (!(u >= 0.0)) throw std::domain_error("first_deficit_density: u must be >= 0");
        if (!(x < 0.0)) throw std::domain_error("first_deficit_density: x must be < 0");
        Route r = route;
        if (r == Route::Auto)
            r = model_.claim.is_exponential() ? Route::ClosedForm : Route::Quadrature;
        if (r == Route::ClosedForm) {
            if (!model_.claim.is_exponential())
                throw capability_error("first_deficit_density: closed form needs exponential claims");
            const double al = model_.claim.exponential_rate();
            const double c = model_.premium_rate, la = model_.claim_rate;
            return la / c * std::exp(al * x - (al - la / c) * u);
        }
        double total = scale_.w(0.0) * levy_tail(model_, x - u);
        if (u > 0.0)
            total += integrate(
                [&](double z) { return levy_tail(model_, x + z - u) * scale_.w_prime(z); }, 0.0,
                u, quad_);
        return total;
    }

    // --- K(x) = E_0 F-bar_x(tau^+_{|x|}) ----------------------------------

    double k_fn(double x, Route route = Route::Auto) const {
        if (!(x < 0.0)) throw std::domain_error("k_fn: x must be < 0");
        Route r = route;
        if (r == Route::Auto) {
            switch (kernel_.kind()) {
                case DelayKernel::Kind::PiecewiseExponential: return k_exponential_closed(x);
                case DelayKernel::Kind::PiecewiseErlangMixture: return k_mixture_closed(x);
                case DelayKernel::Kind::Deterministic: return k_quadrature(x);
            }
        }
        if (r == Route::ClosedForm) {
            switch (kernel_.kind()) {
                case DelayKernel::Kind::PiecewiseExponential: return k_exponential_closed(x);
                case DelayKernel::Kind::PiecewiseErlangMixture: return k_mixture_closed(x);
                default:
                    throw capability_error("k_fn: no closed form for a deterministic kernel");
            }
        }
        return k_quadrature(x);
    }

    // phi_l(r, x) = ((-1)^l / l!) d^l/dr^l e^{Phi(r) x}.
    double phi_ell(unsigned ell, double r, double x) const {
        if (ell > kMaxDerivativeOrder)
            throw capability_error("phi_ell: derivative order beyond supported jet order");
        if (!(r > 0.0)) throw std::domain_error("phi_ell: r must be > 0");
        if (!(x < 0.0)) throw std::domain_error("phi_ell: x must be < 0");
        const TaylorJet e = jet_exp(phi_jet(model_, r, ell) * x);
        return (ell % 2 == 0) ? e[ell] : -e[ell];
    }

    // --- H(v) = int K(x) h_v(x) dx ----------------------------------------

    double h_fn(double v, Route route = Route::Auto) const {
        if (!(v >= 0.0)) throw std::domain_error("h_fn: v must be >= 0");
        return h_fn_impl(v, resolve(route));
    }

    // --- survival / ruin probability ----------------------------------------

    // P_u(N = infinity) = E_0 X_1 (W(u) + W(0) H(u) / (1 - H(0))).
    double survival_prob(double u, Route route = Route::Auto) const {
        if (!(u >= 0.0)) throw std::domain_error("survival_prob: u must be >= 0");
        const Route r = resolve(route);
        const double h0 = (r == resolve(Route::Auto)) ? h0_auto_ : h_fn_impl(0.0, r);
        if (!(h0 < 1.0))
            throw internal_error("survival_prob: H(0) >= 1, impossible since H(0) <= "
                                 "P_0(tau_0^- < inf) < 1");
        const double hu = (u == 0.0) ? h0 : h_fn_impl(u, r);
        const double value =
            mean_x1(model_) * (scale_.w(u) + scale_.w(0.0) * hu / (1.0 - h0));
        return std::clamp(value, 0.0, 1.0);
    }

    double ruin_prob(double u, Route route = Route::Auto) const {
        return 1.0 - survival_prob(u, route);
    }

    // P_u(N < infinity) for the Cramer-Lundberg model with exponential claims:
    // (lambda/(alpha c)) [1 - (alpha c - lambda) H(0) / (lambda (1-H(0)))]
    //   e^{-(alpha - lambda/c) u}.
    double ruin_prob_cl(double u) const {
        if (!(u >= 0.0)) throw std::domain_error("ruin_prob_cl: u must be >= 0");
        if (!model_.claim.is_exponential())
            throw capability_error(
                "ruin_prob_cl: needs exponential claims; use survival_prob instead");
        const double al = model_.claim.exponential_rate();
        const double c = model_.premium_rate, la = model_.claim_rate;
        const double h0 = h0_auto_;
        const double bracket = 1.0 - (al * c - la) * h0 / (la * (1.0 - h0));
        return la / (al * c) * bracket * std::exp(-(al - la / c) * u);
    }

    // --- M_1 / M_2 ----------------------------------------------------------

    // M_1(v,w,x) = E[e^{(psi(w)-v) eta + w x} - e^{-v eta}
    //              Lambda^{(psi(w))}(x, eta)], integrated over the delay law
    // at deficit x (atoms explicit, continuous part by quadrature). Evaluated
    // through the tail transform E_0(e^{-q tau}; tau > t) so the two huge
    // terms never meet in floating point.
    double m1(double v, double w, double x) const {
        if (!(v >= 0.0) || !(w >= 0.0)) throw std::domain_error("m1: need v, w >= 0");
        if (!(x < 0.0)) throw std::domain_error("m1: x must be < 0");
        const double q = cumulant(model_, w);
        const TailTransform tbl(scale_, q, -x);
        auto term = [&](double t) {
            const double tail = tbl.tail(t);
            if (tail <= 0.0) return 0.0;
            const double at = (q - v) * t;
            if (at > 600.0) return std::exp(at + std::log(tail));
            return std::exp(at) * tail;
        };
        double total = 0.0;
        const auto atoms = kernel_.atoms(x);
        for (const auto& atom : atoms) total += atom.mass * term(atom.location);
        if (atoms.empty()) {
            const double horizon = kernel_.tail_horizon(x, quad_.truncation_mass);
            // the tail transform jumps at t = |x|/c (first-passage atom);
            // split there so the quadrature only ever sees smooth pieces
            const double hit = std::min(-x / model_.premium_rate, horizon);
            auto f = [&](double t) { return kernel_.density(x, t) * term(t); };
            if (hit > 0.0) total += integrate(f, 0.0, hit, quad_);
            if (horizon > hit) total += integrate(f, hit, horizon, quad_);
        }
        return total;
    }

    // M_2(v,x) = E_0 e^{-v tau^+_{|x|}} 1(tau^+_{|x|} <= eta)
    //          = E_eta[ incomplete-LT(v, |x|, eta) ].
    double m2(double v, double x) const {
        if (!(v >= 0.0)) throw std::domain_error("m2: v must be >= 0");
        if (!(x < 0.0)) throw std::domain_error("m2: x must be < 0");
        const TailTransform tbl(scale_, v, -x);
        double total = 0.0;
        const auto atoms = kernel_.atoms(x);
        for (const auto& atom : atoms) total += atom.mass * tbl.incomplete(atom.location);
        if (atoms.empty()) {
            const double horizon = kernel_.tail_horizon(x, quad_.truncation_mass);
            // incomplete(t) is 0 until t = |x|/c and jumps by the atom there
            const double hit = std::min(-x / model_.premium_rate, horizon);
            if (horizon > hit)
                total += integrate(
                    [&](double t) { return kernel_.density(x, t) * tbl.incomplete(t); }, hit,
                    horizon, quad_);
            // mass beyond the horizon sees incomplete(t) ~ total()
            total += kernel_.tail(x, horizon) * tbl.total();
        }
        return total;
    }

    // --- Q_1 / Q_2 and the joint transform -----------------------------------

    double q1(double u, double v, double w, double b) const {
        check_two_sided(u, v, b);
        if (!(w >= 0.0)) throw std::domain_error("q1: w must be >= 0");
        if (u == b) return 0.0;
        const auto cache = make_m_cache([&](double x) { return m1(v, w, x); });
        return q_weighted(u, v, b, cache);
    }

    double q2(double u, double v, double b) const {
        check_two_sided(u, v, b);
        if (u == b) return 0.0;
        const auto cache = make_m_cache([&](double x) { return m2(v, x); });
        return q_weighted(u, v, b, cache);
    }

    // E_u(e^{-v T + w X_T}; T < tau_b^+)
    //   = Q_1(u,v,w) + Q_1(0,v,w) Q_2(u,v) / (1 - Q_2(0,v)).
    double joint_lt(double u, double v, double w, double b) const {
        check_two_sided(u, v, b);
        if (!(w >= 0.0)) throw std::domain_error("joint_lt: w must be >= 0");
        if (u == b) return 0.0;  // tau_b^+ = 0 from X_0 = b; documented convention
        const auto m1cache = make_m_cache([&](double x) { return m1(v, w, x); });
        const auto m2cache = make_m_cache([&](double x) { return m2(v, x); });
        const double q1u = q_weighted(u, v, b, m1cache);
        const double q2u = q_weighted(u, v, b, m2cache);
        const double q10 = (u == 0.0) ? q1u : q_weighted(0.0, v, b, m1cache);
        const double q20 = (u == 0.0) ? q2u : q_weighted(0.0, v, b, m2cache);
        const double denom = 1.0 - q20;
        if (!(denom > 0.0))
            throw internal_error("joint_lt: Q_2(0) >= 1 breaks the geometric-series identity");
        return q1u + q10 * q2u / denom;
    }

    // E_u(e^{-v tau_0^-}; tau_0^- < tau_b^+): the Q-weight integral with the
    // M factor replaced by 1. The same resolvent weight as Q_1/Q_2.
    double exit_transform(double u, double v, double b) const {
        check_two_sided(u, v, b);
        if (u == b) return 0.0;
        auto inner = [&](double y) { return model_.claim_rate * model_.claim.tail(y); };
        return outer_weighted(u, v, b, inner);
    }

    // Truncation rule for "effectively infinite" barriers: the smallest b
    // whose classical ruin probability is below 1e-6.
    double default_barrier() const { return ruin_bound_level(model_, 1e-6); }

  private:
    void check_two_sided(double u, double v, double b) const {
        if (!(b > 0.0)) throw std::domain_error("two-sided exit: b must be > 0");
        if (!(u >= 0.0) || u > b) throw std::domain_error("two-sided exit: need 0 <= u <= b");
        if (!(v >= 0.0)) throw std::domain_error("two-sided exit: v must be >= 0");
    }

    // Piecewise-exponential kernel: K(x) = e^{Phi(r(x)) x}, infinite rate -> 0.
    double k_exponential_closed(double x) const {
        const auto& cell = kernel_.cell(kernel_.cell_index(x));
        if (cell.immediate) return 0.0;
        return std::exp(scale_.phi(cell.components[0].rate) * x);
    }

    // Erlang-mixture kernel: K(x) = sum_j p_j sum_{l<nu_j} r_j^l phi_l(r_j, x).
    double k_mixture_closed(double x) const {
        const auto& cell = kernel_.cell(kernel_.cell_index(x));
        if (cell.immediate) return 0.0;
        double total = 0.0;
        for (const auto& comp : cell.components) {
            if (comp.shape - 1 > kMaxDerivativeOrder)
                throw capability_error("k_fn: mixture shape beyond supported jet order");
            const TaylorJet e = jet_exp(phi_jet(model_, comp.rate, comp.shape - 1) * x);
            double rl = 1.0;
            double inner = 0.0;
            for (unsigned l = 0; l < comp.shape; ++l) {
                const double phl = (l % 2 == 0) ? e[l] : -e[l];
                inner += rl * phl;
                rl *= comp.rate;
            }
            total += comp.weight * inner;
        }
        return std::clamp(total, 0.0, 1.0);
    }

    // Generic route: Stieltjes integral of F-bar_x against dG_{|x|}, atom at
    // t = |x|/c included.
    double k_quadrature(double x) const {
        const double y = -x;
        if (kernel_.immediate_at(x)) return 0.0;
        const double hit = y / model_.premium_rate;
        double total = std::exp(-model_.claim_rate * hit) * kernel_.tail(x, hit);
        if (kernel_.kind() == DelayKernel::Kind::Deterministic) {
            const double d = kernel_.deterministic_delay();
            if (d > hit)
                total += integrate(
                    [&](double s) { return scale_.first_passage_density(y, s); }, hit, d, quad_);
            return std::clamp(total, 0.0, 1.0);
        }
        total += integrate_tail(
            [&](double s) {
                return kernel_.tail(x, s) * scale_.first_passage_density(y, s);
            },
            hit, quad_, std::max(1.0, hit));
        return std::clamp(total, 0.0, 1.0);
    }

    double h_fn_impl(double v, Route r) const {
        if (r == Route::ClosedForm) {
            if (!closed_form_available())
                throw capability_error(
                    "h_fn: closed form needs exponential claims and a piecewise kernel");
            const double al = model_.claim.exponential_rate();
            const double gamma = al - model_.claim_rate / model_.premium_rate;
            return h0_closed() * std::exp(-gamma * v);
        }
        // generic: quadrature of int K(x) h_v(x) dx with quadrature K
        auto integrand = [&](double x) {
            return k_fn(x, Route::Quadrature) * first_deficit_density(v, x);
        };
        double lo = -1.0;
        while (envelope_h(v, lo) > quad_.truncation_mass * 1e-2 && lo > -2000.0) lo *= 1.5;
        return integrate(integrand, lo, 0.0, quad_);
    }

    // crude positive envelope of K(x) h_v(x) used only to pick a cutoff
    double envelope_h(double v, double x) const {
        return std::max(1.0, -x) * first_deficit_density(v, x, Route::Auto);
    }

    double h0_closed() const {
        const double al = model_.claim.exponential_rate();
        const double c = model_.premium_rate, la = model_.claim_rate;
        const std::size_t cells = kernel_.cell_count();
        const auto& breaks = kernel_.breakpoints();
        double total = 0.0;
        for (std::size_t i = 0; i < cells; ++i) {
            const auto& cell = kernel_.cell(i);
            if (cell.immediate) continue;
            const bool first = (i == 0);
            const double hi = (i == cells - 1) ? 0.0 : breaks[i];
            const double lo = first ? 0.0 : breaks[i - 1];  // lo unused when first
            if (kernel_.kind() == DelayKernel::Kind::PiecewiseExponential) {
                // exact: (lambda/c) (e^{(al+Phi(r)) a_i} - e^{(al+Phi(r)) a_{i-1}})
                //        / (al + Phi(r))
                const double rho = al + scale_.phi(cell.components[0].rate);
                double val = std::exp(rho * hi);
                if (!first) val -= std::exp(rho * lo);
                total += la / c * val / rho;
            } else {
                // Erlang-mixture cells: per-cell quadrature of e^{alpha x} K(x).
                // The unbounded first cell is cut where e^{alpha x} alone is
                // below truncation mass relative to the cell's upper edge.
                const double cell_lo =
                    first ? hi - (std::log(1.0 / quad_.truncation_mass) + 5.0) / al : lo;
                total += la / c *
                         integrate(
                             [&](double x) { return std::exp(al * x) * k_mixture_closed(x); },
                             cell_lo, hi, quad_);
            }
        }
        return total;
    }

    // Piecewise-Chebyshev cache of an M function over the deficit range that
    // matters for the Q integrals.
    detail::DeficitCache make_m_cache(const std::function<double(double)>& f) const {
        double x_min = -1.0;
        if (model_.claim.kind() == ClaimLaw::Kind::Deterministic) {
            x_min = -model_.claim.deterministic_size();
        } else {
            while (model_.claim.tail(-x_min) >= quad_.truncation_mass && x_min > -2000.0)
                x_min *= 1.5;
        }
        std::vector<double> edges;
        edges.push_back(x_min);
        for (double bk : kernel_.breakpoints())
            if (bk > x_min && bk < 0.0) edges.push_back(bk);
        edges.push_back(0.0);
        return detail::DeficitCache(f, std::move(edges), 1e-9);
    }

    // lambda int_0^b weight_v(u,y) [int M(x) g(y-x) dx] dy
    double q_weighted(double u, double v, double b, const detail::DeficitCache& M) const {
        auto inner = [&](double y) {
            if (model_.claim.kind() == ClaimLaw::Kind::Deterministic) {
                const double d = model_.claim.deterministic_size();
                return (y < d) ? model_.claim_rate * M.eval(y - d) : 0.0;
            }
            const auto& edges = M.edges();
            double total = 0.0;
            for (std::size_t i = 0; i + 1 < edges.size(); ++i)
                total += integrate(
                    [&](double x) { return M.eval(x) * model_.claim.density(y - x); },
                    edges[i], edges[i + 1], quad_);
            return model_.claim_rate * total;
        };
        return outer_weighted(u, v, b, inner);
    }

    // Resolvent weight of the two-sided exit identity,
    //   W^{(v)}(u) W^{(v)}(b-y) / W^{(v)}(b) - W^{(v)}(u-y).
    // For y <= u with exponential claims the difference collapses to
    //   e^{Phi(v)(u-y)} A B (e^{delta y} - 1)(e^{-delta u} - e^{-delta b}) / D
    // in the tilted parameters; the subtraction form loses all digits once
    // Phi(v)(u-y) is large, the reduced form never subtracts.
    double two_sided_weight(double u, double y, double v, double b) const {
        if (y >= u)
            return scale_.wq(v, u) * scale_.wq(v, b - y) / scale_.wq(v, b);
        if (model_.claim.is_exponential()) {
            const double nu = scale_.phi(v);
            const RiskModel tm = tilt(model_, nu);
            const double al = tm.claim.exponential_rate();
            const double c = tm.premium_rate, la = tm.claim_rate;
            const double A = al / (al * c - la);
            const double B = la / (al * c);
            const double delta = al - la / c;
            const double denom = 1.0 - B * std::exp(-delta * b);
            return std::exp(nu * (u - y)) * A * B * std::expm1(delta * y) *
                   (std::exp(-delta * u) - std::exp(-delta * b)) / denom;
        }
        return scale_.wq(v, u) * scale_.wq(v, b - y) / scale_.wq(v, b) -
               scale_.wq(v, u - y);
    }

    template <typename Inner>
    double outer_weighted(double u, double v, double b, Inner&& inner) const {
        auto f = [&](double y) { return two_sided_weight(u, y, v, b) * inner(y); };
        // W^{(v)}(u-y) switches off at y = u; keep the kink on a panel edge.
        double total = 0.0;
        if (u > 0.0) total += integrate(f, 0.0, std::min(u, b), quad_);
        if (u < b) total += integrate(f, u, b, quad_);
        return total;
    }

    RiskModel model_;
    DelayKernel kernel_;
    QuadratureSpec quad_;
    ScaleEvaluator scale_;
    double h0_auto_ = 0.0;
};

}  // namespace parisian
