#pragma once

// Counting statistics of one lattice against one region: Siegel and primitive
// Siegel transforms of an indicator, ordered linearly independent k-tuples
// (optionally of primitive points), primitive k-tuples, and the span dimension
// of the primitive points that decides the events Omega/Theta.

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "geonum/error.hpp"
#include "geonum/lattice.hpp"
#include "geonum/linalg.hpp"
#include "geonum/regions.hpp"

namespace geonum {

inline constexpr std::size_t kDefaultTupleBudget = 10'000'000;

struct CountOptions {
    std::size_t enumeration_cap = kDefaultEnumerationCap;
    std::size_t tuple_budget = kDefaultTupleBudget;
    double rank_tolerance = kDefaultRankTolerance;
};

/// Nonzero lattice points of one region, with their primitivity flags.
struct PointSet {
    int n = 0;
    std::vector<LatticePoint> points;
    std::vector<bool> primitive;

    std::size_t primitive_count() const {
        return static_cast<std::size_t>(std::count(primitive.begin(), primitive.end(), true));
    }
};

inline PointSet collect_points(const Region& a, const UnimodularLattice& lattice, const CountOptions& opts = {}) {
    PointSet set;
    set.n = lattice.n();
    set.points = enumerate_in_region(lattice, a, opts.enumeration_cap);
    set.primitive.reserve(set.points.size());
    for (const auto& p : set.points) set.primitive.push_back(gcd_vector(std::span<const std::int64_t>(p.c)) == 1);
    return set;
}

namespace detail {

// Ordered k-tuples drawn from `pool` that are linearly independent; `leaf`
// decides whether a full-rank tuple is counted.
template <class Leaf>
std::uint64_t count_independent_tuples(const std::vector<const LatticePoint*>& pool, int n, int k,
                                       const CountOptions& opts, Leaf&& leaf) {
    if (k == 0 || pool.empty()) return 0;
    std::uint64_t count = 0;
    std::size_t evaluations = 0;
    std::vector<const LatticePoint*> prefix;
    prefix.reserve(static_cast<std::size_t>(k));
    RealMatrix m(n, k);

    auto spend = [&] {
        if (++evaluations > opts.tuple_budget) {
            throw Error(ErrorCode::CombinatorialBudgetExceeded,
                        "tuple evaluations exceed budget " + std::to_string(opts.tuple_budget));
        }
    };

    auto descend = [&](auto&& self, int depth) -> void {
        for (const LatticePoint* p : pool) {
            spend();
            m.col(depth) = p->v;
            // a single nonzero vector is always independent
            if (depth > 0 && rank_with_tolerance(m.leftCols(depth + 1), opts.rank_tolerance) !=
                                 static_cast<std::size_t>(depth + 1)) {
                continue;
            }
            prefix.push_back(p);
            if (depth + 1 == k) {
                if (leaf(prefix)) ++count;
            } else {
                self(self, depth + 1);
            }
            prefix.pop_back();
        }
    };
    descend(descend, 0);
    return count;
}

}  // namespace detail

/// Number of nonzero lattice points in A.
inline std::uint64_t siegel_count(const PointSet& set) { return set.points.size(); }
/// Number of primitive lattice points in A.
inline std::uint64_t primitive_count(const PointSet& set) { return set.primitive_count(); }

inline std::uint64_t siegel_count(const Region& a, const UnimodularLattice& lattice, const CountOptions& opts = {}) {
    return siegel_count(collect_points(a, lattice, opts));
}

inline std::uint64_t primitive_count(const Region& a, const UnimodularLattice& lattice, const CountOptions& opts = {}) {
    return primitive_count(collect_points(a, lattice, opts));
}

/// Ordered linearly independent k-tuples of (primitive, if flagged) points of A.
inline std::uint64_t independent_tuple_count(const PointSet& set, int k, bool primitive_only,
                                             const CountOptions& opts = {}) {
    if (k < 1 || k > set.n) throw Error(ErrorCode::BadTupleOrder, "tuple order must lie in [1, n]");
    std::vector<const LatticePoint*> pool;
    for (std::size_t i = 0; i < set.points.size(); ++i)
        if (!primitive_only || set.primitive[i]) pool.push_back(&set.points[i]);
    return detail::count_independent_tuples(pool, set.n, k, opts, [](const auto&) { return true; });
}

inline std::uint64_t independent_tuple_count(const Region& a, const UnimodularLattice& lattice, int k,
                                             bool primitive_only, const CountOptions& opts = {}) {
    if (k < 1 || k > lattice.n()) throw Error(ErrorCode::BadTupleOrder, "tuple order must lie in [1, n]");
    return independent_tuple_count(collect_points(a, lattice, opts), k, primitive_only, opts);
}

/// Pr_{A,k}: ordered k-tuples of points of A that extend to a basis of the lattice.
inline std::uint64_t primitive_ktuple_count(const PointSet& set, int k, const CountOptions& opts = {}) {
    if (k < 1 || k > set.n) throw Error(ErrorCode::BadTupleOrder, "tuple order must lie in [1, n]");
    // members of a primitive tuple are primitive points
    std::vector<const LatticePoint*> pool;
    for (std::size_t i = 0; i < set.points.size(); ++i)
        if (set.primitive[i]) pool.push_back(&set.points[i]);
    if (k == 1) return pool.size();
    std::vector<std::vector<std::int64_t>> rows(static_cast<std::size_t>(k));
    return detail::count_independent_tuples(pool, set.n, k, opts, [&](const std::vector<const LatticePoint*>& tuple) {
        for (std::size_t i = 0; i < tuple.size(); ++i) rows[i] = tuple[i]->c;
        return is_primitive_coefficients(rows);
    });
}

inline std::uint64_t primitive_ktuple_count(const Region& a, const UnimodularLattice& lattice, int k,
                                            const CountOptions& opts = {}) {
    if (k < 1 || k > lattice.n()) throw Error(ErrorCode::BadTupleOrder, "tuple order must lie in [1, n]");
    return primitive_ktuple_count(collect_points(a, lattice, opts), k, opts);
}

/// dim span(A ∩ L_pr); the empty set spans {0}.
inline int span_dim_primitive(const PointSet& set, const CountOptions& opts = {}) {
    std::vector<RealVector> prim;
    for (std::size_t i = 0; i < set.points.size(); ++i)
        if (set.primitive[i]) prim.push_back(set.points[i].v);
    return static_cast<int>(rank_with_tolerance(std::span<const RealVector>(prim), opts.rank_tolerance));
}

inline int span_dim_primitive(const Region& a, const UnimodularLattice& lattice, const CountOptions& opts = {}) {
    return span_dim_primitive(collect_points(a, lattice, opts), opts);
}

/// Wire identifiers: siegel, siegel_pr, tilde_k:<k>, tilde_k_pr:<k>, pr_tuples:<k>, span_dim_pr, omega:<k>.
struct Statistic {
    enum class Kind { Siegel, SiegelPr, TildeK, TildeKPr, PrTuples, SpanDimPr, Omega };
    Kind kind = Kind::Siegel;
    int k = 0;

    std::string name() const {
        switch (kind) {
        case Kind::Siegel: return "siegel";
        case Kind::SiegelPr: return "siegel_pr";
        case Kind::TildeK: return "tilde_k:" + std::to_string(k);
        case Kind::TildeKPr: return "tilde_k_pr:" + std::to_string(k);
        case Kind::PrTuples: return "pr_tuples:" + std::to_string(k);
        case Kind::SpanDimPr: return "span_dim_pr";
        case Kind::Omega: return "omega:" + std::to_string(k);
        }
        return "?";
    }

    static Statistic parse(const std::string& s) {
        const auto colon = s.find(':');
        const std::string head = s.substr(0, colon);
        std::optional<int> k;
        if (colon != std::string::npos) {
            try {
                std::size_t used = 0;
                k = std::stoi(s.substr(colon + 1), &used);
                if (used != s.size() - colon - 1) k.reset();
            } catch (const std::exception&) {
                k.reset();
            }
            if (!k) throw Error(ErrorCode::ConfigError, "statistic '" + s + "' has a malformed order");
        }
        auto plain = [&](Kind kind) {
            if (k) throw Error(ErrorCode::ConfigError, "statistic '" + head + "' takes no order");
            return Statistic{kind, 0};
        };
        auto ordered = [&](Kind kind) {
            if (!k || *k < 1) throw Error(ErrorCode::ConfigError, "statistic '" + head + "' needs an order >= 1");
            return Statistic{kind, *k};
        };
        if (head == "siegel") return plain(Kind::Siegel);
        if (head == "siegel_pr") return plain(Kind::SiegelPr);
        if (head == "span_dim_pr") return plain(Kind::SpanDimPr);
        if (head == "tilde_k") return ordered(Kind::TildeK);
        if (head == "tilde_k_pr") return ordered(Kind::TildeKPr);
        if (head == "pr_tuples") return ordered(Kind::PrTuples);
        if (head == "omega") return ordered(Kind::Omega);
        throw Error(ErrorCode::ConfigError, "unknown statistic '" + s + "'");
    }
};

inline double evaluate(const Statistic& stat, const PointSet& set, const CountOptions& opts = {}) {
    using K = Statistic::Kind;
    switch (stat.kind) {
    case K::Siegel: return static_cast<double>(siegel_count(set));
    case K::SiegelPr: return static_cast<double>(primitive_count(set));
    case K::TildeK: return static_cast<double>(independent_tuple_count(set, stat.k, false, opts));
    case K::TildeKPr: return static_cast<double>(independent_tuple_count(set, stat.k, true, opts));
    case K::PrTuples: return static_cast<double>(primitive_ktuple_count(set, stat.k, opts));
    case K::SpanDimPr: return static_cast<double>(span_dim_primitive(set, opts));
    case K::Omega: return span_dim_primitive(set, opts) < stat.k ? 1.0 : 0.0;
    }
    return 0;
}

struct CountReport {
    std::uint64_t total_nonzero = 0;
    std::uint64_t primitive = 0;
    std::map<std::string, double> by_statistic;
};

inline CountReport count_report(const Region& a, const UnimodularLattice& lattice,
                                std::span<const Statistic> stats, const CountOptions& opts = {}) {
    const PointSet set = collect_points(a, lattice, opts);
    CountReport report{siegel_count(set), primitive_count(set), {}};
    for (const Statistic& s : stats) report.by_statistic[s.name()] = evaluate(s, set, opts);
    return report;
}

}  // namespace geonum
