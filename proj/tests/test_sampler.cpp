#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "geonum/sampler.hpp"
#include "geonum/siegel.hpp"

using namespace geonum;

namespace {

double three_se_check(const std::vector<std::vector<double>>& chains, double expected, double* se_out = nullptr) {
    std::vector<double> all;
    for (const auto& c : chains) all.insert(all.end(), c.begin(), c.end());
    const double se = pooled_batch_se(chains, 20);
    if (se_out) *se_out = se;
    return std::abs(mean(all) - expected) / se;
}

}  // namespace

TEST(ExactSampler, UnimodularBasis) {
    Rng rng(1);
    for (int i = 0; i < 1000; ++i) {
        const auto l = sample_sl2_exact(rng);
        EXPECT_NEAR(l.basis().determinant(), 1.0, 1e-9);
    }
}

TEST(ExactSampler, SiegelMeansOnBallOfVolumeTwenty) {
    ChainConfig c;
    c.n = 2;
    c.chain_count = 1;
    c.samples_per_chain = 20000;
    const Region ball = Region::ball_of_volume(2, 20.0);
    const auto counts = sample_series(c, 1, [&](const UnimodularLattice& l) {
        const PointSet s = collect_points(ball, l);
        return std::pair<double, double>(static_cast<double>(s.points.size()), static_cast<double>(s.primitive_count()));
    });
    std::vector<double> all, pr;
    for (const auto& [a, p] : counts[0]) {
        all.push_back(a);
        pr.push_back(p);
    }
    const double se_all = std::sqrt(variance(all) / static_cast<double>(all.size()));
    const double se_pr = std::sqrt(variance(pr) / static_cast<double>(pr.size()));
    EXPECT_LE(std::abs(mean(all) - 20.0), 3 * se_all);
    EXPECT_LE(std::abs(mean(pr) - 120 / (std::numbers::pi * std::numbers::pi)), 3 * se_pr);
}

TEST(ExactSampler, ShortestVectorDistribution) {
    // On X_2 with a <= 1: P(shortest |v|^2 < a) = P(y > 1/a) = 3a / pi.
    Rng rng(2);
    const int total = 100000;
    int below = 0;
    for (int i = 0; i < total; ++i)
        if (!enumerate_nonzero_in_radius(sample_sl2_exact(rng), std::sqrt(0.5)).empty()) ++below;
    const double p = 3 * 0.5 / std::numbers::pi;
    EXPECT_NEAR(static_cast<double>(below) / total, p, 4 * std::sqrt(p * (1 - p) / total));
}

TEST(McmcStep, DeterminantStaysOne) {
    Rng rng(3);
    for (int n = 2; n <= 5; ++n) {
        UnimodularLattice l = UnimodularLattice::standard(n);
        for (int i = 0; i < 300; ++i) {
            l = mcmc_step(l, 0.7, rng);
            EXPECT_NEAR(l.basis().determinant(), 1.0, 1e-9);
        }
    }
}

TEST(McmcStep, SmallStepKeepsShortVectors) {
    Rng rng(4);
    UnimodularLattice l = UnimodularLattice::standard(3);
    for (int i = 0; i < 50; ++i) l = mcmc_step(l, 0.5, rng);
    const UnimodularLattice moved = mcmc_step(l, 1e-10, rng);
    const auto before = enumerate_nonzero_in_radius(l, 1.6);
    const auto after = enumerate_nonzero_in_radius(moved, 1.6);
    ASSERT_EQ(before.size(), after.size());
    for (std::size_t i = 0; i < before.size(); ++i) EXPECT_LT((before[i].v - after[i].v).norm(), 1e-7);
}

TEST(Chain, SiegelMeanInDimensionThree) {
    ChainConfig c;
    c.n = 3;
    c.samples_per_chain = 2500;
    const Region ball = Region::ball_of_volume(3, 10.0);
    const auto series = sample_series(c, 1, [&](const UnimodularLattice& l) { return static_cast<double>(siegel_count(ball, l)); });
    EXPECT_LE(three_se_check(series, 10.0), 3.0);
}

TEST(Chain, LagOneAutocorrelationIsSmall) {
    ChainConfig c;
    c.n = 3;
    c.chain_count = 1;
    c.samples_per_chain = 4000;
    const Region ball = Region::ball_of_volume(3, 10.0);
    const auto series = sample_series(c, 1, [&](const UnimodularLattice& l) { return static_cast<double>(siegel_count(ball, l)); });
    EXPECT_LT(autocorrelation(series[0], 1), 0.2);
}

TEST(Chain, SplitHalvesAgree) {
    ChainConfig c;
    c.n = 3;
    c.chain_count = 2;
    c.samples_per_chain = 3000;
    const Region ball = Region::ball_of_volume(3, 5.0);
    const auto series = sample_series(c, 1, [&](const UnimodularLattice& l) { return static_cast<double>(primitive_count(ball, l)); });
    for (const auto& s : series) {
        const std::size_t half = s.size() / 2;
        const std::span<const double> a(s.data(), half), b(s.data() + half, half);
        const auto da = stationarity_diagnostics(a, 10), db = stationarity_diagnostics(b, 10);
        EXPECT_LE(std::abs(da.mean - db.mean), 4 * std::hypot(da.standard_error, db.standard_error));
    }
}

TEST(Chain, Deterministic) {
    ChainConfig c;
    c.n = 3;
    c.burn_in = 100;
    c.samples_per_chain = 20;
    std::string a, b;
    for (const auto& s : sample_chain(c, 1)) a += lattice_record(s.lattice, s.chain, s.index).dump() + "\n";
    for (const auto& s : sample_chain(c, 3)) b += lattice_record(s.lattice, s.chain, s.index).dump() + "\n";
    EXPECT_EQ(a, b);
}

TEST(Chain, InterleavingMatchesSingleChains) {
    ChainConfig c;
    c.n = 3;
    c.burn_in = 50;
    c.chain_count = 4;
    c.samples_per_chain = 10;
    const auto stream = sample_chain(c, 2);
    ASSERT_EQ(stream.size(), 40u);
    for (std::size_t chain = 0; chain < 4; ++chain) {
        Chain single(c, chain_seed(c, chain));
        for (std::size_t i = 0; i < 10; ++i) {
            const ChainSample& s = stream[i * 4 + chain];
            EXPECT_EQ(s.chain, chain);
            EXPECT_EQ(s.index, i);
            EXPECT_EQ(s.lattice.basis(), single.next().basis());
        }
    }
}

TEST(Chain, ConfigValidation) {
    ChainConfig c;
    c.step_sigma = 0;
    try {
        c.validate();
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::ConfigError);
        EXPECT_NE(std::string(e.what()).find("sampler.step_sigma"), std::string::npos);
    }
}

TEST(Diagnostics, Examples) {
    const std::vector<double> constant(100, 3.0);
    const auto dc = stationarity_diagnostics(constant, 10);
    EXPECT_EQ(dc.standard_error, 0.0);
    EXPECT_EQ(dc.mean, 3.0);

    std::vector<double> ramp(100);
    for (int i = 0; i < 100; ++i) ramp[static_cast<std::size_t>(i)] = i + 1;
    EXPECT_EQ(stationarity_diagnostics(ramp, 10).mean, 50.5);

    Rng rng(8);
    std::vector<double> pm(10000);
    for (auto& x : pm) x = uniform01(rng) < 0.5 ? -1.0 : 1.0;
    const double tau = stationarity_diagnostics(pm, 20).autocorr_time;
    EXPECT_GT(tau, 0.5);
    EXPECT_LT(tau, 1.5);

    try {
        stationarity_diagnostics(std::vector<double>(5, 1.0), 10);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::InsufficientData);
    }
}

TEST(Diagnostics, CorrelatedSeriesHasLongerTime) {
    // AR(1) with phi = 0.8 has integrated time (1 + phi) / (1 - phi) = 9
    Rng rng(9);
    std::normal_distribution<double> g(0, 1);
    std::vector<double> xs(200000);
    double x = 0;
    for (auto& v : xs) {
        x = 0.8 * x + g(rng);
        v = x;
    }
    EXPECT_NEAR(stationarity_diagnostics(xs, 20).autocorr_time, 9.0, 1.0);
}

TEST(Stats, WilsonAndFits) {
    const Interval w = wilson_interval(0.0, 100, 3);
    EXPECT_EQ(w.low, 0.0);
    EXPECT_GT(w.high, 0.0);
    const Interval h = wilson_interval(0.5, 100, 2);
    EXPECT_LT(h.low, 0.5);
    EXPECT_GT(h.high, 0.5);

    const std::vector<double> xs{1, 2, 3, 4}, ys{3, 5, 7, 9}, ws{1, 1, 1, 1};
    const LineFit f = weighted_line_fit(xs, ys, ws);
    EXPECT_NEAR(f.slope, 2, 1e-12);
    EXPECT_NEAR(f.intercept, 1, 1e-12);
    EXPECT_NEAR(line_fit(xs, ys).slope, 2, 1e-12);

    CompensatedSum s;
    s.add(1e16);
    s.add(1.0);
    s.add(-1e16);
    EXPECT_EQ(s.value(), 1.0);
}
