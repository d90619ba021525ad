#pragma once

// Exact event-driven Monte Carlo for the risk process with deficit-dependent
// Parisian delays. No time discretization anywhere: between claim arrivals
// the path is linear with slope c, claims are drawn from the claim law, and
// every crossing time (down-crossing at a jump, up-crossing by drift, barrier
// hit, position at delay expiry) is solved in closed form segment by segment.
//
// Per-path uniforms come from a counter-based substream addressed by the path
// index, consumed in a fixed order (interarrival, claim draw(s), one delay
// uniform per excursion), so estimates are bit-identical for a given
// (seed, config) regardless of the number of worker threads.

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <thread>
#include <vector>

#include "parisian/delay_kernel.hpp"
#include "parisian/errors.hpp"
#include "parisian/model.hpp"
#include "parisian/rng.hpp"

namespace parisian {

struct SimConfig {
    double initial_reserve = 0.0;          // u
    std::size_t n_paths = 1000000;
    std::uint64_t seed = 0;
    double bias_tol = 1e-9;                // residual ruin mass beyond u*
    std::size_t max_events = 100000000;    // per-path event guard
    unsigned threads = 0;                  // 0 = hardware concurrency
    double barrier = std::numeric_limits<double>::quiet_NaN();  // b, joint-transform runs
    double v = 0.0;                        // time transform parameter
    double w = 0.0;                        // deficit transform parameter

    void validate() const {
        if (n_paths < 1) throw std::invalid_argument("SimConfig: n_paths must be >= 1");
        if (!(initial_reserve >= 0.0))
            throw std::invalid_argument("SimConfig: initial reserve must be >= 0");
        if (!(bias_tol > 0.0)) throw std::invalid_argument("SimConfig: bias_tol must be > 0");
    }
};

struct RuinEstimate {
    double value = 0.0;
    double std_error = 0.0;
    std::size_t n_paths = 0;
    std::uint64_t seed = 0;
    double bias_bound = 0.0;
    double wall_seconds = 0.0;
    std::size_t flagged_paths = 0;
};

struct FirstPassageEstimate {
    std::vector<double> t_grid;
    std::vector<double> cdf;
    std::vector<double> std_error;
    std::size_t n_paths = 0;
    std::uint64_t seed = 0;
};

namespace detail {

// Vector-valued path functionals accumulated block by block. Blocks are
// processed in path order by whichever worker grabs them; block partial sums
// live in a block-indexed array and the final reduction runs in block order,
// making the result independent of thread scheduling.
template <typename PathFn>
std::vector<double> run_paths(std::size_t n_paths, unsigned threads, std::size_t values_per_path,
                              PathFn&& per_path) {
    constexpr std::size_t kBlock = 4096;
    const std::size_t n_blocks = (n_paths + kBlock - 1) / kBlock;
    std::vector<std::vector<double>> partial(n_blocks);

    unsigned n_threads = threads != 0 ? threads : std::thread::hardware_concurrency();
    if (n_threads == 0) n_threads = 1;
    n_threads = unsigned(std::min<std::size_t>(n_threads, n_blocks));

    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        std::vector<double> values(values_per_path);
        for (;;) {
            const std::size_t blk = next.fetch_add(1);
            if (blk >= n_blocks) return;
            std::vector<double> acc(values_per_path, 0.0);
            const std::size_t lo = blk * kBlock;
            const std::size_t hi = std::min(lo + kBlock, n_paths);
            for (std::size_t path = lo; path < hi; ++path) {
                per_path(path, values);
                for (std::size_t i = 0; i < values_per_path; ++i) acc[i] += values[i];
            }
            partial[blk] = std::move(acc);
        }
    };

    if (n_threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(n_threads);
        for (unsigned i = 0; i < n_threads; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    std::vector<double> total(values_per_path, 0.0);
    for (std::size_t blk = 0; blk < n_blocks; ++blk)
        for (std::size_t i = 0; i < values_per_path; ++i) total[i] += partial[blk][i];
    return total;
}

struct ExcursionOutcome {
    bool ruined = false;
    double length = 0.0;      // time to up-cross when not ruined
    double deficit_at_end = 0.0;  // X at delay expiry when ruined
};

// Evolve one negative excursion starting from deficit x0 < 0 with delay
// window eta. Exact piecewise-linear arithmetic; 'track_deficit' controls
// whether we stop at the expiry (joint-transform functionals) or run to the
// up-cross (not needed for plain ruin, which exits on the first ruin check).
inline ExcursionOutcome run_excursion(const RiskModel& m, double x0, double eta,
                                      PathStream& stream, std::size_t& events,
                                      std::size_t max_events, bool& flagged) {
    ExcursionOutcome out;
    double x = x0;
    double elapsed = 0.0;
    const double c = m.premium_rate;
    for (;;) {
        const double to_zero = -x / c;
        const double dt = stream.exponential(m.claim_rate);
        if (dt >= to_zero) {
            // drift reaches 0 before the next claim
            if (eta < elapsed + to_zero) {
                out.ruined = true;
                out.deficit_at_end = x + c * (eta - elapsed);
                return out;
            }
            out.length = elapsed + to_zero;
            return out;
        }
        if (eta < elapsed + dt) {
            out.ruined = true;
            out.deficit_at_end = x + c * (eta - elapsed);
            return out;
        }
        x += c * dt - m.claim.sample([&]() { return stream.uniform(); });
        elapsed += dt;
        if (++events > max_events) {
            flagged = true;
            out.length = elapsed + (-x / c);
            return out;
        }
    }
}

}  // namespace detail

// Estimate of P_u(N < inf): ruin happens in the first excursion whose delay
// window expires before the excursion up-crosses zero. Paths are absorbed as
// survived once the reserve exceeds the level u* at which the classical ruin
// bound drops below cfg.bias_tol.
inline RuinEstimate simulate_ruin(const RiskModel& model, const DelayKernel& kernel,
                                  const SimConfig& cfg) {
    cfg.validate();
    validate_model(model);
    const auto start = std::chrono::steady_clock::now();
    const double ustar = ruin_bound_level(model, cfg.bias_tol);
    const double c = model.premium_rate;

    auto per_path = [&](std::size_t path, std::vector<double>& out) {
        PathStream stream(cfg.seed, path);
        double x = cfg.initial_reserve;
        std::size_t events = 0;
        bool flagged = false;
        double ruined = 0.0;
        while (!flagged) {
            if (x >= ustar) break;
            const double dt = stream.exponential(model.claim_rate);
            x += c * dt - model.claim.sample([&]() { return stream.uniform(); });
            if (++events > cfg.max_events) {
                flagged = true;
                break;
            }
            if (x < 0.0) {
                const double eta = kernel.quantile(x, stream.uniform());
                auto exc = detail::run_excursion(model, x, eta, stream, events, cfg.max_events,
                                                 flagged);
                if (exc.ruined) {
                    ruined = 1.0;
                    break;
                }
                x = 0.0;
            }
        }
        out[0] = ruined;
        out[1] = ruined;  // squared value; identical for an indicator
        out[2] = flagged ? 1.0 : 0.0;
    };

    const auto sums = detail::run_paths(cfg.n_paths, cfg.threads, 3, per_path);
    const double n = double(cfg.n_paths);

    RuinEstimate est;
    est.n_paths = cfg.n_paths;
    est.seed = cfg.seed;
    est.flagged_paths = std::size_t(sums[2]);
    if (est.flagged_paths > 0 && double(est.flagged_paths) / n > 1e-6)
        throw internal_error("simulate_ruin: flagged-path fraction exceeds 1e-6");
    est.value = sums[0] / n;
    const double var = std::max(0.0, (sums[1] - sums[0] * sums[0] / n) / std::max(1.0, n - 1.0));
    est.std_error = std::sqrt(var / n);
    est.bias_bound = classical_ruin_bound(model, ustar);
    est.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return est;
}

// Estimate of E_u(e^{-v T + w X_T}; T < tau_b^+). Paths terminate at the
// barrier (contribution 0) or at Parisian ruin (contribution e^{-vT + w X_T});
// both happen almost surely, so no absorption level is involved.
inline RuinEstimate simulate_joint_lt(const RiskModel& model, const DelayKernel& kernel,
                                      const SimConfig& cfg) {
    cfg.validate();
    validate_model(model);
    if (!(cfg.barrier > 0.0) || std::isnan(cfg.barrier))
        throw std::invalid_argument("simulate_joint_lt: config needs a barrier b > 0");
    if (cfg.initial_reserve > cfg.barrier)
        throw std::domain_error("simulate_joint_lt: requires u <= b");
    if (!(cfg.v >= 0.0) || !(cfg.w >= 0.0))
        throw std::domain_error("simulate_joint_lt: requires v, w >= 0");
    const auto start = std::chrono::steady_clock::now();
    const double c = model.premium_rate;
    const double b = cfg.barrier;

    auto per_path = [&](std::size_t path, std::vector<double>& out) {
        PathStream stream(cfg.seed, path);
        double x = cfg.initial_reserve;
        double t = 0.0;
        std::size_t events = 0;
        bool flagged = false;
        double value = 0.0;
        for (;;) {
            if (flagged) break;
            const double dt = stream.exponential(model.claim_rate);
            if (x + c * dt > b) break;  // barrier hit during drift: tau_b^+ first
            x += c * dt - model.claim.sample([&]() { return stream.uniform(); });
            t += dt;
            if (++events > cfg.max_events) {
                flagged = true;
                break;
            }
            if (x < 0.0) {
                const double eta = kernel.quantile(x, stream.uniform());
                auto exc = detail::run_excursion(model, x, eta, stream, events, cfg.max_events,
                                                 flagged);
                if (exc.ruined) {
                    const double ruin_time = t + eta;
                    value = std::exp(-cfg.v * ruin_time + cfg.w * exc.deficit_at_end);
                    break;
                }
                t += exc.length;
                x = 0.0;
            }
        }
        out[0] = value;
        out[1] = value * value;
        out[2] = flagged ? 1.0 : 0.0;
    };

    const auto sums = detail::run_paths(cfg.n_paths, cfg.threads, 3, per_path);
    const double n = double(cfg.n_paths);

    RuinEstimate est;
    est.n_paths = cfg.n_paths;
    est.seed = cfg.seed;
    est.flagged_paths = std::size_t(sums[2]);
    if (est.flagged_paths > 0 && double(est.flagged_paths) / n > 1e-6)
        throw internal_error("simulate_joint_lt: flagged-path fraction exceeds 1e-6");
    est.value = sums[0] / n;
    const double var = std::max(0.0, (sums[1] - sums[0] * sums[0] / n) / std::max(1.0, n - 1.0));
    est.std_error = std::sqrt(var / n);
    est.bias_bound = 0.0;  // path functional is exact
    est.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return est;
}

// Empirical CDF of tau_y^+ from X_0 = 0 on the supplied time grid.
inline FirstPassageEstimate simulate_first_passage(const RiskModel& model, double y,
                                                   std::vector<double> t_grid,
                                                   const SimConfig& cfg) {
    cfg.validate();
    validate_model(model);
    if (!(y > 0.0)) throw std::domain_error("simulate_first_passage: y must be > 0");
    if (t_grid.empty()) throw std::invalid_argument("simulate_first_passage: empty grid");
    for (std::size_t i = 1; i < t_grid.size(); ++i)
        if (!(t_grid[i] > t_grid[i - 1]))
            throw std::invalid_argument("simulate_first_passage: grid must be increasing");
    const double t_max = t_grid.back();
    const double c = model.premium_rate;
    const std::size_t m = t_grid.size();

    auto per_path = [&](std::size_t path, std::vector<double>& out) {
        PathStream stream(cfg.seed, path);
        double x = 0.0;
        double t = 0.0;
        double tau = std::numeric_limits<double>::infinity();
        std::size_t events = 0;
        while (t <= t_max) {
            const double dt = stream.exponential(model.claim_rate);
            if (x + c * dt > y) {
                tau = t + (y - x) / c;
                break;
            }
            x += c * dt - model.claim.sample([&]() { return stream.uniform(); });
            t += dt;
            if (++events > cfg.max_events) break;
        }
        for (std::size_t i = 0; i < m; ++i) out[i] = (tau <= t_grid[i]) ? 1.0 : 0.0;
    };

    const auto sums = detail::run_paths(cfg.n_paths, cfg.threads, m, per_path);
    const double n = double(cfg.n_paths);

    FirstPassageEstimate est;
    est.t_grid = std::move(t_grid);
    est.n_paths = cfg.n_paths;
    est.seed = cfg.seed;
    est.cdf.resize(m);
    est.std_error.resize(m);
    for (std::size_t i = 0; i < m; ++i) {
        const double p = sums[i] / n;
        est.cdf[i] = p;
        est.std_error[i] = std::sqrt(std::max(0.0, p * (1.0 - p)) / n);
    }
    return est;
}

}  // namespace parisian
