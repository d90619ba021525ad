#pragma once

// Test-side numerical oracles, deliberately independent of the library's
// quadrature and root-finding paths: composite Simpson with interval
// doubling, plain bisection, Richardson-extrapolated central differences.

#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

namespace oracle {

// Composite Simpson, panels doubled until two refinements agree to tol,
// returning the Richardson-extrapolated value.
template <typename F>
double simpson(F&& f, double a, double b, double tol = 1e-11, int n0 = 64) {
    auto composite = [&](int n) {
        const double h = (b - a) / n;
        double s = f(a) + f(b);
        for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
        return s * h / 3.0;
    };
    double prev = composite(n0);
    for (int n = 2 * n0; n <= (1 << 22); n *= 2) {
        const double cur = composite(n);
        if (std::abs(cur - prev) < tol) return cur + (cur - prev) / 15.0;
        prev = cur;
    }
    throw std::runtime_error("oracle::simpson did not converge");
}

// Integral over [a, inf) by fixed-width Simpson blocks; stops after several
// negligible blocks in a row.
template <typename F>
double simpson_to_inf(F&& f, double a, double width = 5.0, double tol = 1e-12) {
    double total = 0.0;
    int quiet = 0;
    for (int blk = 0; blk < 4000; ++blk) {
        const double piece = simpson(f, a, a + width, tol * 0.1);
        total += piece;
        if (std::abs(piece) < tol * std::max(1.0, std::abs(total)))
            ++quiet;
        else
            quiet = 0;
        if (quiet >= 3) return total;
        a += width;
    }
    throw std::runtime_error("oracle::simpson_to_inf did not converge");
}

// Bisection for an increasing function.
template <typename F>
double bisect_increasing(F&& f, double target, double lo, double hi, int iters = 200) {
    for (int i = 0; i < iters; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (f(mid) < target)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

// Richardson-extrapolated central difference of given order (1..3).
template <typename F>
double derivative(F&& f, double x, int order, double h = 1e-3) {
    auto diff = [&](double step) {
        switch (order) {
            case 1: return (f(x + step) - f(x - step)) / (2.0 * step);
            case 2: return (f(x + step) - 2.0 * f(x) + f(x - step)) / (step * step);
            case 3:
                return (f(x + 2.0 * step) - 2.0 * f(x + step) + 2.0 * f(x - step) -
                        f(x - 2.0 * step)) /
                       (2.0 * step * step * step);
            default: throw std::invalid_argument("order must be 1..3");
        }
    };
    const double d1 = diff(h);
    const double d2 = diff(h / 2.0);
    return d2 + (d2 - d1) / 3.0;
}

// Kolmogorov-Smirnov distance between sorted samples and a CDF. Handles
// atoms: runs of tied samples compare their lower empirical step against the
// left limit F(v-), not F(v).
inline double ks_distance(std::vector<double> sorted_samples,
                          const std::function<double(double)>& cdf) {
    const double n = double(sorted_samples.size());
    double worst = 0.0;
    std::size_t i = 0;
    while (i < sorted_samples.size()) {
        const double v = sorted_samples[i];
        std::size_t j = i;
        while (j < sorted_samples.size() && sorted_samples[j] == v) ++j;
        const double F = cdf(v);
        const double F_left = cdf(v - 1e-9 * (1.0 + std::abs(v)));
        worst = std::max(worst, std::abs(double(j) / n - F));
        worst = std::max(worst, std::abs(double(i) / n - F_left));
        i = j;
    }
    return worst;
}

}  // namespace oracle
