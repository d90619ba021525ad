#pragma once

// Stochastic kernel P_x of delay-window lengths as a function of the deficit
// x < 0. The deficit axis is partitioned by breakpoints
// -inf =: a_0 < a_1 < ... < a_{n-1} < a_n := 0 and each cell carries one delay
// law: exponential, a finite Erlang mixture, or "immediate" (point mass at 0,
// the infinite-rate case). A deterministic kernel (same point mass at d for
// every deficit) covers the classical fixed-delay setting.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "parisian/errors.hpp"
#include "parisian/model.hpp"

namespace parisian {

class DelayKernel {
  public:
    enum class Kind { PiecewiseExponential, PiecewiseErlangMixture, Deterministic };

    struct Cell {
        bool immediate = false;  // infinite rate: delay is identically 0
        std::vector<ErlangComponent> components;
    };

    // Point mass carried by the delay law at a given deficit (immediate and
    // deterministic kernels have one; mixtures have none).
    struct Atom {
        double location = 0.0;
        double mass = 0.0;
    };

    static DelayKernel piecewise_exponential(std::vector<double> breakpoints,
                                             std::vector<Cell> cells) {
        for (auto& c : cells)
            for (auto& comp : c.components)
                if (comp.shape != 1)
                    throw model_error("DelayKernel: exponential cells must have shape 1");
        return DelayKernel(Kind::PiecewiseExponential, std::move(breakpoints), std::move(cells));
    }

    static DelayKernel piecewise_erlang_mixture(std::vector<double> breakpoints,
                                                std::vector<Cell> cells) {
        return DelayKernel(Kind::PiecewiseErlangMixture, std::move(breakpoints), std::move(cells));
    }

    static DelayKernel deterministic(double delay) {
        if (!(delay >= 0.0) || !std::isfinite(delay))
            throw model_error("DelayKernel: deterministic delay must be finite and >= 0");
        DelayKernel k;
        k.kind_ = Kind::Deterministic;
        k.delay_ = delay;
        return k;
    }

    // Single-cell conveniences.
    static DelayKernel exponential(double rate) {
        return piecewise_exponential({}, {Cell{false, {{1.0, 1, rate}}}});
    }
    static DelayKernel immediate() { return piecewise_exponential({}, {Cell{true, {}}}); }

    Kind kind() const { return kind_; }
    double deterministic_delay() const { return delay_; }
    const std::vector<double>& breakpoints() const { return breaks_; }
    std::size_t cell_count() const { return cells_.size(); }
    const Cell& cell(std::size_t i) const { return cells_[i]; }

    // Cell containing x < 0: cell i covers (a_{i-1}, a_i] over the interior
    // breakpoints, the final cell covers (a_{n-1}, 0).
    std::size_t cell_index(double x) const {
        check_deficit(x);
        return std::size_t(std::lower_bound(breaks_.begin(), breaks_.end(), x) - breaks_.begin());
    }

    bool immediate_at(double x) const {
        if (kind_ == Kind::Deterministic) return delay_ == 0.0;
        return cells_[cell_index(x)].immediate;
    }

    // F_x(t) = P_x([0, t]).
    double cdf(double x, double t) const {
        check_deficit(x);
        if (!(t >= 0.0)) throw std::domain_error("DelayKernel: t must be >= 0");
        if (kind_ == Kind::Deterministic) return t >= delay_ ? 1.0 : 0.0;
        const Cell& c = cells_[cell_index(x)];
        if (c.immediate) return 1.0;
        return 1.0 - cell_tail(c, t);
    }

    double tail(double x, double t) const {
        check_deficit(x);
        if (!(t >= 0.0)) throw std::domain_error("DelayKernel: t must be >= 0");
        if (kind_ == Kind::Deterministic) return t >= delay_ ? 0.0 : 1.0;
        const Cell& c = cells_[cell_index(x)];
        if (c.immediate) return 0.0;
        return cell_tail(c, t);
    }

    // Generalized inverse F_x^{<-}(y) = inf{s >= 0 : F_x(s) >= y}.
    double quantile(double x, double y) const {
        check_deficit(x);
        if (!(y > 0.0) || !(y < 1.0))
            throw std::domain_error("DelayKernel: quantile level must be in (0,1)");
        if (kind_ == Kind::Deterministic) return delay_;
        const Cell& c = cells_[cell_index(x)];
        if (c.immediate) return 0.0;
        if (c.components.size() == 1 && c.components[0].shape == 1)
            return -std::log1p(-y) / c.components[0].rate;

        // Bracketed bisection to width 1e-9, then two Newton polish steps.
        double hi = 0.0;
        for (const auto& comp : c.components)
            hi = std::max(hi, (double(comp.shape) + 10.0 * std::sqrt(double(comp.shape))) /
                                  comp.rate);
        while (1.0 - cell_tail(c, hi) < y) hi *= 2.0;
        double lo = 0.0;
        while (hi - lo > 1e-9) {
            const double mid = 0.5 * (lo + hi);
            if (1.0 - cell_tail(c, mid) >= y)
                hi = mid;
            else
                lo = mid;
        }
        double t = 0.5 * (lo + hi);
        for (int i = 0; i < 2; ++i) {
            const double f = (1.0 - cell_tail(c, t)) - y;
            const double d = cell_density(c, t);
            if (d > 0.0) t -= f / d;
        }
        return std::max(t, 0.0);
    }

    // Inverse-transform sampler; by construction identical to quantile.
    double sample(double x, double u) const { return quantile(x, u); }

    // Density of the absolutely continuous part of P_x at t > 0.
    double density(double x, double t) const {
        check_deficit(x);
        if (kind_ == Kind::Deterministic) return 0.0;
        const Cell& c = cells_[cell_index(x)];
        if (c.immediate) return 0.0;
        return cell_density(c, t);
    }

    std::vector<Atom> atoms(double x) const {
        check_deficit(x);
        if (kind_ == Kind::Deterministic) return {{delay_, 1.0}};
        if (cells_[cell_index(x)].immediate) return {{0.0, 1.0}};
        return {};
    }

    // t with F-bar_x(t) < eps; integration horizon for delay-domain integrals.
    double tail_horizon(double x, double eps) const {
        check_deficit(x);
        if (kind_ == Kind::Deterministic) return delay_;
        const Cell& c = cells_[cell_index(x)];
        if (c.immediate) return 0.0;
        double t = 1.0;
        for (const auto& comp : c.components) t = std::max(t, double(comp.shape) / comp.rate);
        while (cell_tail(c, t) >= eps) t *= 2.0;
        return t;
    }

  private:
    DelayKernel() = default;

    DelayKernel(Kind kind, std::vector<double> breakpoints, std::vector<Cell> cells)
        : kind_(kind), breaks_(std::move(breakpoints)), cells_(std::move(cells)) {
        if (cells_.size() != breaks_.size() + 1)
            throw model_error("DelayKernel: need exactly one cell per breakpoint interval");
        for (std::size_t i = 0; i < breaks_.size(); ++i) {
            if (!(breaks_[i] < 0.0) || !std::isfinite(breaks_[i]))
                throw model_error("DelayKernel: breakpoints must be finite and < 0");
            if (i > 0 && !(breaks_[i] > breaks_[i - 1]))
                throw model_error("DelayKernel: breakpoints must be strictly increasing");
        }
        for (const auto& c : cells_) {
            if (c.immediate) {
                if (!c.components.empty())
                    throw model_error("DelayKernel: immediate cell must have no components");
                continue;
            }
            if (c.components.empty())
                throw model_error("DelayKernel: cell needs components or the immediate flag");
            double wsum = 0.0;
            for (const auto& comp : c.components) {
                if (!(comp.weight >= 0.0) || !(comp.rate > 0.0) || !std::isfinite(comp.rate) ||
                    comp.shape < 1)
                    throw model_error("DelayKernel: component needs weight>=0, shape>=1, rate>0");
                wsum += comp.weight;
            }
            if (std::abs(wsum - 1.0) > 1e-12)
                throw model_error("DelayKernel: cell weights must sum to 1 within 1e-12");
        }
    }

    static void check_deficit(double x) {
        if (!(x < 0.0)) throw std::domain_error("DelayKernel: deficit x must be < 0");
    }

    // Mixture tail: sum_j p_j sum_{l < nu_j} (r_j t)^l e^{-r_j t} / l!.
    static double cell_tail(const Cell& c, double t) {
        if (t <= 0.0) return 1.0;
        double total = 0.0;
        for (const auto& comp : c.components) {
            double term = std::exp(-comp.rate * t);
            double acc = term;
            for (unsigned l = 1; l < comp.shape; ++l) {
                term *= comp.rate * t / double(l);
                acc += term;
            }
            total += comp.weight * acc;
        }
        return total;
    }

    static double cell_density(const Cell& c, double t) {
        if (t <= 0.0) return 0.0;
        double total = 0.0;
        for (const auto& comp : c.components) {
            double term = comp.rate * std::exp(-comp.rate * t);
            for (unsigned l = 1; l < comp.shape; ++l) term *= comp.rate * t / double(l);
            total += comp.weight * term;
        }
        return total;
    }

    Kind kind_ = Kind::PiecewiseExponential;
    double delay_ = 0.0;           // deterministic kernel only
    std::vector<double> breaks_;   // interior breakpoints a_1 < ... < a_{n-1} < 0
    std::vector<Cell> cells_;
};

}  // namespace parisian
