#pragma once

// Truncated Taylor series ("jet") arithmetic. A jet of order N stores the
// coefficients c_k = f^(k)(a)/k! of an expansion around a fixed point, and
// arithmetic propagates them by Cauchy products. Used to take high-order
// derivatives of e^{Phi(r) x} in the rate variable r.

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace parisian {

class TaylorJet {
  public:
    TaylorJet() : c_(1, 0.0) {}
    explicit TaylorJet(std::size_t order, double value = 0.0) : c_(order + 1, 0.0) {
        c_[0] = value;
    }

    static TaylorJet variable(std::size_t order, double at) {
        TaylorJet j(order, at);
        if (order >= 1) j.c_[1] = 1.0;
        return j;
    }
    static TaylorJet constant(std::size_t order, double v) { return TaylorJet(order, v); }

    std::size_t order() const { return c_.size() - 1; }
    double value() const { return c_[0]; }
    double operator[](std::size_t k) const { return k < c_.size() ? c_[k] : 0.0; }
    double& operator[](std::size_t k) { return c_[k]; }

    // k-th derivative at the expansion point (coefficient times k!).
    double derivative(std::size_t k) const {
        if (k >= c_.size()) return 0.0;
        double fact = 1.0;
        for (std::size_t i = 2; i <= k; ++i) fact *= double(i);
        return c_[k] * fact;
    }

    TaylorJet operator-() const {
        TaylorJet r = *this;
        for (auto& x : r.c_) x = -x;
        return r;
    }
    TaylorJet& operator+=(const TaylorJet& o) {
        check(o);
        for (std::size_t i = 0; i < c_.size(); ++i) c_[i] += o.c_[i];
        return *this;
    }
    TaylorJet& operator-=(const TaylorJet& o) {
        check(o);
        for (std::size_t i = 0; i < c_.size(); ++i) c_[i] -= o.c_[i];
        return *this;
    }
    friend TaylorJet operator+(TaylorJet a, const TaylorJet& b) { return a += b; }
    friend TaylorJet operator-(TaylorJet a, const TaylorJet& b) { return a -= b; }
    friend TaylorJet operator+(TaylorJet a, double s) {
        a.c_[0] += s;
        return a;
    }
    friend TaylorJet operator+(double s, TaylorJet a) {
        a.c_[0] += s;
        return a;
    }
    friend TaylorJet operator-(TaylorJet a, double s) {
        a.c_[0] -= s;
        return a;
    }
    friend TaylorJet operator-(double s, const TaylorJet& a) { return (-a) + s; }
    friend TaylorJet operator*(TaylorJet a, double s) {
        for (auto& x : a.c_) x *= s;
        return a;
    }
    friend TaylorJet operator*(double s, TaylorJet a) { return a * s; }
    friend TaylorJet operator/(TaylorJet a, double s) { return a * (1.0 / s); }

    friend TaylorJet operator*(const TaylorJet& a, const TaylorJet& b) {
        a.check(b);
        const std::size_t n = a.order();
        TaylorJet r(n);
        for (std::size_t k = 0; k <= n; ++k) {
            double s = 0.0;
            for (std::size_t i = 0; i <= k; ++i) s += a.c_[i] * b.c_[k - i];
            r.c_[k] = s;
        }
        return r;
    }

    // h = a/b solved from b*h = a, coefficient by coefficient.
    friend TaylorJet operator/(const TaylorJet& a, const TaylorJet& b) {
        a.check(b);
        if (b.c_[0] == 0.0) throw std::domain_error("TaylorJet: division by jet with zero value");
        const std::size_t n = a.order();
        TaylorJet r(n);
        for (std::size_t k = 0; k <= n; ++k) {
            double s = a.c_[k];
            for (std::size_t i = 0; i < k; ++i) s -= b.c_[k - i] * r.c_[i];
            r.c_[k] = s / b.c_[0];
        }
        return r;
    }

  private:
    void check(const TaylorJet& o) const {
        if (o.c_.size() != c_.size()) throw std::logic_error("TaylorJet: mixed orders");
    }
    std::vector<double> c_;
};

// exp(f): g[0]=exp(f[0]), g[n] = (1/n) sum_{k=0}^{n-1} (n-k) f[n-k] g[k].
inline TaylorJet jet_exp(const TaylorJet& x) {
    const std::size_t n = x.order();
    TaylorJet r(n);
    r[0] = std::exp(x.value());
    for (std::size_t k = 1; k <= n; ++k) {
        double s = 0.0;
        for (std::size_t i = 0; i < k; ++i) s += double(k - i) * x[k - i] * r[i];
        r[k] = s / double(k);
    }
    return r;
}

// sqrt(f) from g*g = f.
inline TaylorJet jet_sqrt(const TaylorJet& x) {
    if (!(x.value() > 0.0)) throw std::domain_error("TaylorJet: sqrt needs positive value");
    const std::size_t n = x.order();
    TaylorJet r(n);
    r[0] = std::sqrt(x.value());
    for (std::size_t k = 1; k <= n; ++k) {
        double s = x[k];
        for (std::size_t i = 1; i < k; ++i) s -= r[i] * r[k - i];
        r[k] = s / (2.0 * r[0]);
    }
    return r;
}

inline TaylorJet jet_powi(const TaylorJet& x, unsigned p) {
    TaylorJet r = TaylorJet::constant(x.order(), 1.0);
    TaylorJet base = x;
    while (p > 0) {
        if (p & 1u) r = r * base;
        p >>= 1;
        if (p) base = base * base;
    }
    return r;
}

}  // namespace parisian
