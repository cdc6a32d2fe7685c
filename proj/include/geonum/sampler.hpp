#pragma once

// Haar-random unimodular lattices. n = 2 is sampled exactly from the modular
// fundamental domain; n >= 3 uses a random walk exp(eps) Lambda with eps a
// Gaussian in sl_n(R), whose stationary law is the Haar measure.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <numbers>
#include <random>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include <unsupported/Eigen/MatrixFunctions>

#include "geonum/error.hpp"
#include "geonum/lattice.hpp"
#include "geonum/linalg.hpp"
#include "geonum/random.hpp"
#include "geonum/stats.hpp"

namespace geonum {

struct ChainConfig {
    int n = 3;
    double step_sigma = 0.5;
    std::size_t burn_in = 5000;
    std::size_t thinning = 10;
    std::size_t chain_count = 4;
    std::size_t samples_per_chain = 1000;
    std::uint64_t seed = 1;

    void validate() const {
        if (n < 2) throw Error(ErrorCode::ConfigError, "sampler.n: dimension must be >= 2");
        if (!(step_sigma > 0 && step_sigma <= 2)) throw Error(ErrorCode::ConfigError, "sampler.step_sigma: must lie in (0, 2]");
        if (thinning < 1) throw Error(ErrorCode::ConfigError, "sampler.thinning: must be >= 1");
        if (chain_count < 1) throw Error(ErrorCode::ConfigError, "sampler.chain_count: must be >= 1");
        if (samples_per_chain < 1) throw Error(ErrorCode::ConfigError, "sampler.samples_per_chain: must be >= 1");
    }
};

/// Exact Haar sample on X_2: z = x + iy from the fundamental domain with
/// density (3/pi) y^{-2}, basis (1/sqrt y)(1, 0), (1/sqrt y)(x, y), then a uniform rotation.
inline UnimodularLattice sample_sl2_exact(Rng& rng) {
    // marginal of x is proportional to 1/sqrt(1 - x^2) on [-1/2, 1/2]
    const double u = (uniform01(rng) - 0.5) * (std::numbers::pi / 3);
    const double x = std::sin(u);
    // given x, y has density a / y^2 on [a, inf) with a = sqrt(1 - x^2)
    const double v = 1.0 - uniform01(rng);  // (0, 1]
    const double y = std::sqrt(1 - x * x) / v;
    const double angle = 2 * std::numbers::pi * uniform01(rng);
    const double scale = 1 / std::sqrt(y);
    RealMatrix b(2, 2);
    b << scale, scale * x, 0, scale * y;
    RealMatrix rot(2, 2);
    rot << std::cos(angle), -std::sin(angle), std::sin(angle), std::cos(angle);
    return UnimodularLattice::from_basis(rot * b);
}

/// One random-walk step Lambda -> exp(eps) Lambda, eps = sigma * sum_a xi_a E_a
/// over the elementary trace-zero basis {E_ij (i != j), E_ii - E_{i+1,i+1}}.
inline UnimodularLattice mcmc_step(const UnimodularLattice& lattice, double step_sigma, Rng& rng) {
    const int n = lattice.n();
    std::normal_distribution<double> normal(0.0, step_sigma);
    RealMatrix eps = RealMatrix::Zero(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (i != j) eps(i, j) = normal(rng);
    for (int i = 0; i + 1 < n; ++i) {
        const double xi = normal(rng);
        eps(i, i) += xi;
        eps(i + 1, i + 1) -= xi;
    }
    RealMatrix b = eps.exp() * lattice.basis();
    const double det = b.determinant();
    b /= std::copysign(std::pow(std::abs(det), 1.0 / n), det);
    if (n % 2 == 0 && det < 0) b.col(0) = -b.col(0);
    return UnimodularLattice::from_basis(b);
}

/// One chain: starts at Z^n, discards burn_in steps, then emits every
/// thinning-th state. For n = 2 every emission is an independent exact draw.
class Chain {
public:
    Chain(const ChainConfig& config, std::uint64_t chain_seed)
        : config_(config), rng_(chain_seed), state_(UnimodularLattice::standard(config.n)) {}

    UnimodularLattice next() {
        if (config_.n == 2) return sample_sl2_exact(rng_);
        if (!burned_) {
            for (std::size_t i = 0; i < config_.burn_in; ++i) state_ = mcmc_step(state_, config_.step_sigma, rng_);
            burned_ = true;
        }
        for (std::size_t i = 0; i < config_.thinning; ++i) state_ = mcmc_step(state_, config_.step_sigma, rng_);
        return state_;
    }

private:
    ChainConfig config_;
    Rng rng_;
    UnimodularLattice state_;
    bool burned_ = false;
};

inline std::uint64_t chain_seed(const ChainConfig& config, std::size_t chain) { return derive_seed(config.seed, chain); }

/// Runs fn(chain_index) for every chain on up to `threads` workers and returns
/// the results in chain order. The first exception is rethrown.
template <class Fn>
auto for_each_chain(std::size_t chain_count, std::size_t threads, Fn&& fn)
    -> std::vector<decltype(fn(std::size_t{}))> {
    using R = decltype(fn(std::size_t{}));
    std::vector<R> results(chain_count);
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (std::size_t c = next++; c < chain_count; c = next++) {
            try {
                results[c] = fn(c);
            } catch (...) {
                std::lock_guard<std::mutex> lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    const std::size_t workers = std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(1, chain_count));
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t i = 0; i < workers; ++i) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    if (failure) std::rethrow_exception(failure);
    return results;
}

/// Evaluates `stat` on every emitted lattice; one series per chain.
template <class Stat>
auto sample_series(const ChainConfig& config, std::size_t threads, Stat&& stat) {
    config.validate();
    return for_each_chain(config.chain_count, threads, [&](std::size_t c) {
        Chain chain(config, chain_seed(config, c));
        std::vector<decltype(stat(std::declval<const UnimodularLattice&>()))> out;
        out.reserve(config.samples_per_chain);
        for (std::size_t i = 0; i < config.samples_per_chain; ++i) out.push_back(stat(chain.next()));
        return out;
    });
}

struct ChainSample {
    std::uint64_t chain = 0;
    std::uint64_t index = 0;
    UnimodularLattice lattice;
};

/// The emitted stream, interleaved round-robin across chains.
inline std::vector<ChainSample> sample_chain(const ChainConfig& config, std::size_t threads = 1) {
    const auto per_chain = sample_series(config, threads, [](const UnimodularLattice& l) { return l; });
    std::vector<ChainSample> out;
    out.reserve(config.chain_count * config.samples_per_chain);
    for (std::size_t i = 0; i < config.samples_per_chain; ++i)
        for (std::size_t c = 0; c < config.chain_count; ++c) out.push_back(ChainSample{c, i, per_chain[c][i]});
    return out;
}

struct StationarityDiagnostics {
    double mean = 0;
    double standard_error = 0;  // batch means
    double autocorr_time = 1;   // integrated, self-consistent window
};

/// Integrated autocorrelation time 1 + 2 sum_{t<=W} rho(t), with the smallest
/// window W >= 5 tau(W). A constant series has time 1.
inline double integrated_autocorr_time(std::span<const double> xs) {
    if (xs.size() < 4) throw Error(ErrorCode::InsufficientData, "autocorrelation needs four values");
    const double m = mean(xs);
    CompensatedSum c0;
    for (double x : xs) c0.add((x - m) * (x - m));
    if (c0.value() <= 0) return 1.0;
    double tau = 1;
    const std::size_t max_window = xs.size() / 2;
    for (std::size_t w = 1; w < max_window; ++w) {
        CompensatedSum cw;
        for (std::size_t i = 0; i + w < xs.size(); ++i) cw.add((xs[i] - m) * (xs[i + w] - m));
        tau += 2 * cw.value() / c0.value();
        if (static_cast<double>(w) >= 5 * tau) break;
    }
    return std::max(tau, 1e-12);
}

inline StationarityDiagnostics stationarity_diagnostics(std::span<const double> series, std::size_t batches) {
    if (batches < 2 || series.size() < 2 * batches) {
        throw Error(ErrorCode::InsufficientData, "need batches >= 2 and at least 2 values per batch");
    }
    StationarityDiagnostics d;
    d.mean = mean(series);
    const auto bm = batch_means(series, batches);
    d.standard_error = std::sqrt(variance(bm) / static_cast<double>(batches));
    d.autocorr_time = integrated_autocorr_time(series);
    return d;
}

}  // namespace geonum
