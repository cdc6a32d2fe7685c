#include <cmath>
#include <numbers>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "geonum/lattice.hpp"
#include "geonum/random.hpp"
#include "geonum/sampler.hpp"
#include "oracles.hpp"

using namespace geonum;

namespace {

double ball_volume(int n, double r) { return unit_ball_volume(n) * std::pow(r, n); }

oracle::Rows coefficient_set(const std::vector<LatticePoint>& pts) {
    oracle::Rows out;
    for (const auto& p : pts) out.push_back(p.c);
    return out;
}

// Random unimodular lattice with a moderately skewed basis.
UnimodularLattice random_lattice(std::mt19937_64& rng, int n) {
    Rng r(rng());
    UnimodularLattice l = UnimodularLattice::standard(n);
    for (int i = 0; i < 10; ++i) l = mcmc_step(l, 0.5, r);
    return l;
}

}  // namespace

TEST(Primitive, Points) {
    const auto z3 = UnimodularLattice::standard(3);
    EXPECT_FALSE(is_primitive(z3, z3.make_point({2, 4, 6})));
    EXPECT_TRUE(is_primitive(z3, z3.make_point({3, 5, 7})));
    const auto z2 = UnimodularLattice::standard(2);
    EXPECT_FALSE(is_primitive(z2, z2.make_point({4, 6})));
    try {
        is_primitive(z3, z3.make_point({0, 0, 0}));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::ZeroVector);
    }
}

TEST(Primitive, Tuples) {
    const auto z3 = UnimodularLattice::standard(3);
    const std::vector<LatticePoint> e12{z3.make_point({1, 0, 0}), z3.make_point({0, 1, 0})};
    EXPECT_TRUE(is_primitive_tuple(z3, e12));
    const std::vector<LatticePoint> twice{z3.make_point({2, 0, 0}), z3.make_point({0, 1, 0})};
    EXPECT_FALSE(is_primitive_tuple(z3, twice));
    const std::vector<LatticePoint> diag{z3.make_point({1, 1, 0}), z3.make_point({1, -1, 0})};
    EXPECT_FALSE(is_primitive_tuple(z3, diag));
    const std::vector<LatticePoint> repeated{z3.make_point({1, 0, 0}), z3.make_point({1, 0, 0})};
    EXPECT_FALSE(is_primitive_tuple(z3, repeated));
    const std::vector<LatticePoint> four{z3.make_point({1, 0, 0}), z3.make_point({0, 1, 0}), z3.make_point({0, 0, 1}),
                                         z3.make_point({1, 1, 1})};
    try {
        is_primitive_tuple(z3, four);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::TupleTooLong);
    }
}

TEST(Primitive, TupleCriterionMatchesCompletionSearch) {
    std::mt19937_64 rng(31);
    int checked = 0;
    for (int n = 2; n <= 3; ++n)
        for (int k = 1; k <= 2; ++k)
            for (int trial = 0; trial < 60; ++trial) {
                const auto rows = oracle::random_rows(rng, k, n, 3);
                if (std::all_of(rows.begin(), rows.end(), [](const auto& r) {
                        return std::all_of(r.begin(), r.end(), [](std::int64_t x) { return x == 0; });
                    }))
                    continue;
                // completion rows are searched with entries up to 6; the first of two
                // added rows only up to 2 to keep the search exhaustive but small
                const int bound = (n - k == 2) ? 2 : 6;
                EXPECT_EQ(is_primitive_coefficients(rows), oracle::completes_to_unimodular(rows, bound))
                    << "n=" << n << " k=" << k;
                ++checked;
            }
    EXPECT_GT(checked, 200);
}

TEST(Enumeration, SmallExamples) {
    EXPECT_EQ(enumerate_nonzero_in_radius(UnimodularLattice::standard(3), 1.5).size(), 18u);
    EXPECT_EQ(enumerate_nonzero_in_radius(UnimodularLattice::standard(2), 1.0).size(), 4u);
    EXPECT_TRUE(enumerate_nonzero_in_radius(UnimodularLattice::standard(4), 0.99).empty());
}

TEST(Enumeration, SortedAndSymmetric) {
    std::mt19937_64 rng(32);
    const auto l = random_lattice(rng, 3);
    const auto pts = enumerate_nonzero_in_radius(l, 2.0);
    std::set<std::vector<std::int64_t>> seen;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        if (i > 0) EXPECT_LT(pts[i - 1].c, pts[i].c);
        seen.insert(pts[i].c);
        EXPECT_LE((l.basis() * RealVector::Map(std::vector<double>(pts[i].c.begin(), pts[i].c.end()).data(), 3) - pts[i].v)
                      .lpNorm<Eigen::Infinity>(),
                  1e-9 * (1 + pts[i].v.lpNorm<Eigen::Infinity>()));
    }
    for (const auto& p : pts) {
        auto neg = p.c;
        for (auto& x : neg) x = -x;
        EXPECT_TRUE(seen.count(neg));
    }
}

TEST(Enumeration, MatchesBruteForce) {
    std::mt19937_64 rng(33);
    std::uniform_real_distribution<double> radius(0.5, 3.0);
    for (int trial = 0; trial < 100; ++trial) {
        const int n = 2 + trial % 3;
        const auto l = random_lattice(rng, n);
        const double r = radius(rng);
        EXPECT_EQ(coefficient_set(enumerate_nonzero_in_radius(l, r)), oracle::brute_force_enumeration(l.basis(), r))
            << "n=" << n << " R=" << r;
    }
}

TEST(Enumeration, BudgetIsEnforced) {
    try {
        enumerate_nonzero_in_radius(UnimodularLattice::standard(3), 30.0, 1000);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::EnumerationBudgetExceeded);
    }
}

TEST(Enumeration, InRegion) {
    const auto z3 = UnimodularLattice::standard(3);
    EXPECT_EQ(enumerate_in_region(z3, Region::ball_of_volume(3, ball_volume(3, 1.05))).size(), 6u);
    RealVector lo(2), hi(2);
    lo << 0.1, 0.1;
    hi << 0.9, 0.9;
    EXPECT_TRUE(enumerate_in_region(UnimodularLattice::standard(2), Region::box(lo, hi)).empty());
    EXPECT_EQ(enumerate_in_region(z3, Region::ball_of_volume(3, 14.1371669)).size(), 18u);
}

TEST(Enumeration, BasisIndependence) {
    std::mt19937_64 rng(34);
    for (int trial = 0; trial < 30; ++trial) {
        const int n = 2 + trial % 3;
        const auto l = random_lattice(rng, n);
        const RealMatrix other = l.basis() * oracle::random_unimodular(rng, n, 20);
        if (std::abs(other.determinant() - 1) > 1e-6) continue;
        const auto l2 = UnimodularLattice::from_basis(other, 1e-6);
        const Region a = Region::ball_of_volume(n, 12.0);
        EXPECT_EQ(enumerate_in_region(l, a).size(), enumerate_in_region(l2, a).size());
    }
}

TEST(Enumeration, MultiplicityIdentity) {
    // #(L \ 0 in B_t) = sum_j #(L_pr in B_{t / j^n})
    std::mt19937_64 rng(35);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 2 + trial % 3;
        const auto l = trial == 0 ? UnimodularLattice::standard(3) : random_lattice(rng, n);
        const int dim = l.n();
        const double t = 30.0;
        const auto all = enumerate_in_region(l, Region::ball_of_volume(dim, t));
        std::size_t sum = 0;
        for (int j = 1;; ++j) {
            const auto pts = enumerate_in_region(l, Region::ball_of_volume(dim, t / std::pow(j, dim)));
            if (pts.empty()) break;
            for (const auto& p : pts) sum += is_primitive(l, p) ? 1 : 0;
        }
        EXPECT_EQ(all.size(), sum);
    }
}

TEST(Lattice, FromBasisChecksDeterminant) {
    RealMatrix b = RealMatrix::Identity(2, 2) * 2.0;
    try {
        UnimodularLattice::from_basis(b);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::InvalidLattice);
    }
    RealMatrix flip(2, 2);
    flip << 0, 1, 1, 0;
    EXPECT_NEAR(UnimodularLattice::from_basis(flip).basis().determinant(), 1.0, 1e-12);
}

TEST(Lattice, JsonRecordRoundTrip) {
    std::mt19937_64 rng(36);
    const auto l = random_lattice(rng, 3);
    const auto j = lattice_record(l, 2, 17);
    EXPECT_EQ(j["chain"], 2);
    EXPECT_EQ(j["index"], 17);
    EXPECT_EQ(j["basis"].size(), 9u);
    const auto back = lattice_from_record(nlohmann::json::parse(j.dump()));
    EXPECT_LT((back.basis() - l.basis()).cwiseAbs().maxCoeff(), 1e-12);
}
