#pragma once

// Adaptive Gauss-Kronrod (7-15) quadrature with a global error heap, plus a
// panel-sweep helper for integrals over [a, inf) whose integrands decay to 0.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <vector>

namespace parisian {

// Tolerances and truncation knobs shared by every numeric integral in the
// library. rel_tol is relative to the current integral estimate; abs_tol is
// the floor used when the estimate is near zero.
struct QuadratureSpec {
    double abs_tol = 1e-9;
    double rel_tol = 1e-7;
    int max_subdivisions = 2000;
    double truncation_mass = 1e-10;

    void validate() const {
        if (!(abs_tol > 0.0) || !(rel_tol > 0.0) || !(truncation_mass > 0.0))
            throw std::invalid_argument("QuadratureSpec: tolerances must be positive");
        if (max_subdivisions < 1)
            throw std::invalid_argument("QuadratureSpec: max_subdivisions must be >= 1");
        if (rel_tol < 100.0 * std::numeric_limits<double>::epsilon())
            throw std::invalid_argument("QuadratureSpec: rel_tol below 100*machine-epsilon");
    }
};

namespace detail {

// 15-point Kronrod abscissae on [-1,1] (positive half) and weights; the
// embedded 7-point Gauss rule uses the odd-indexed abscissae.
inline constexpr double kGK15Nodes[8] = {
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000};

inline constexpr double kGK15Weights[8] = {
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714};

inline constexpr double kG7Weights[4] = {
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327};

struct PanelResult {
    double integral = 0.0;
    double error = 0.0;
    double abs_integral = 0.0;  // integral of |f|, for error scaling
};

template <typename F>
PanelResult gk15(F&& f, double a, double b) {
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (a + b);

    double fv[15];
    for (int i = 0; i < 7; ++i) {
        fv[i] = f(mid - half * kGK15Nodes[i]);
        fv[14 - i] = f(mid + half * kGK15Nodes[i]);
    }
    fv[7] = f(mid);

    double resk = kGK15Weights[7] * fv[7];
    double resg = kG7Weights[3] * fv[7];
    double resabs = std::abs(resk);
    for (int i = 0; i < 7; ++i) {
        const double sum = fv[i] + fv[14 - i];
        resk += kGK15Weights[i] * sum;
        resabs += kGK15Weights[i] * (std::abs(fv[i]) + std::abs(fv[14 - i]));
        if (i % 2 == 1) resg += kG7Weights[i / 2] * sum;
    }

    // resasc: integral of |f - mean|, used by the QUADPACK error heuristic.
    const double mean = resk * 0.5;
    double resasc = kGK15Weights[7] * std::abs(fv[7] - mean);
    for (int i = 0; i < 7; ++i)
        resasc += kGK15Weights[i] * (std::abs(fv[i] - mean) + std::abs(fv[14 - i] - mean));

    PanelResult r;
    r.integral = resk * half;
    r.abs_integral = resabs * std::abs(half);
    resasc *= std::abs(half);

    double err = std::abs((resk - resg) * half);
    if (resasc != 0.0 && err != 0.0)
        err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
    const double eps50 = 50.0 * std::numeric_limits<double>::epsilon();
    if (r.abs_integral > std::numeric_limits<double>::min() / eps50)
        err = std::max(err, eps50 * r.abs_integral);
    r.error = err;
    return r;
}

struct Segment {
    double a, b;
    double integral, error;
    bool operator<(const Segment& o) const { return error < o.error; }
};

}  // namespace detail

// Partition of [a,b] produced by the adaptive integrator; segments are sorted
// by position. Exposed so callers can reuse the refinement (prefix sums etc.).
struct AdaptivePartition {
    std::vector<detail::Segment> segments;  // sorted by left endpoint
    double integral = 0.0;
    double error = 0.0;
};

// Globally adaptive GK7-15 over a finite interval. Throws if the subdivision
// budget is exhausted before tolerances are met.
template <typename F>
AdaptivePartition integrate_partition(F&& f, double a, double b, const QuadratureSpec& spec) {
    AdaptivePartition out;
    if (a == b) return out;

    std::vector<detail::Segment> heap;
    auto push = [&](double lo, double hi) {
        auto pr = detail::gk15(f, lo, hi);
        heap.push_back({lo, hi, pr.integral, pr.error});
        std::push_heap(heap.begin(), heap.end());
        return pr;
    };
    auto first = push(a, b);

    double total = first.integral;
    double toterr = first.error;
    int splits = 0;
    while (toterr > std::max(spec.abs_tol, spec.rel_tol * std::abs(total))) {
        if (splits >= spec.max_subdivisions)
            throw std::runtime_error("integrate: subdivision limit reached without convergence");
        std::pop_heap(heap.begin(), heap.end());
        detail::Segment worst = heap.back();
        heap.pop_back();
        total -= worst.integral;
        toterr -= worst.error;
        const double mid = 0.5 * (worst.a + worst.b);
        if (mid <= worst.a || mid >= worst.b) {
            // interval at floating-point resolution; put it back and accept
            heap.push_back(worst);
            std::push_heap(heap.begin(), heap.end());
            total += worst.integral;
            toterr += worst.error;
            break;
        }
        const auto left = push(worst.a, mid);
        const auto right = push(mid, worst.b);
        total += left.integral + right.integral;
        toterr += left.error + right.error;
        ++splits;
    }

    std::sort(heap.begin(), heap.end(),
              [](const detail::Segment& x, const detail::Segment& y) { return x.a < y.a; });
    out.segments = std::move(heap);
    // Recompute the sum in left-to-right order so results do not depend on
    // the heap's internal ordering.
    out.integral = 0.0;
    out.error = 0.0;
    for (const auto& s : out.segments) {
        out.integral += s.integral;
        out.error += s.error;
    }
    return out;
}

template <typename F>
double integrate(F&& f, double a, double b, const QuadratureSpec& spec) {
    return integrate_partition(std::forward<F>(f), a, b, spec).integral;
}

// Integral over [a, inf) for integrands that decay to zero. Sweeps panels of
// geometrically growing width; stops once several consecutive panels are
// negligible against the accumulated total.
template <typename F>
double integrate_tail(F&& f, double a, const QuadratureSpec& spec, double initial_width = 1.0) {
    if (!(initial_width > 0.0)) throw std::invalid_argument("integrate_tail: width must be > 0");
    double total = 0.0;
    double lo = a;
    double width = initial_width;
    int quiet = 0;
    const int max_panels = 600;
    for (int panel = 0; panel < max_panels; ++panel) {
        const double hi = lo + width;
        QuadratureSpec local = spec;
        local.abs_tol = std::max(spec.abs_tol * 0.1, spec.truncation_mass * 0.01);
        const double piece = integrate(f, lo, hi, local);
        total += piece;
        if (std::abs(piece) <= std::max(spec.abs_tol, spec.truncation_mass * std::abs(total)))
            ++quiet;
        else
            quiet = 0;
        if (quiet >= 3) return total;
        lo = hi;
        width *= 1.5;
    }
    throw std::runtime_error("integrate_tail: integrand does not appear to decay");
}

}  // namespace parisian
