#pragma once

// Unimodular lattices (points of X_n) held by an LLL-reduced column basis,
// primitivity of points and tuples, and Fincke-Pohst enumeration of the
// lattice points in a ball or region.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "geonum/error.hpp"
#include "geonum/linalg.hpp"
#include "geonum/regions.hpp"

namespace geonum {

inline constexpr double kDefaultDetTolerance = 1e-9;
inline constexpr std::size_t kDefaultEnumerationCap = 10'000'000;

struct LatticePoint {
    RealVector v;                 // ambient coordinates
    std::vector<std::int64_t> c;  // coefficients in the lattice basis, v = basis * c
};

class UnimodularLattice {
public:
    /// Builds the lattice generated by the columns of `basis`, which must have
    /// |det| within `det_tolerance` of 1. The stored basis is LLL-reduced and
    /// positively oriented.
    static UnimodularLattice from_basis(const RealMatrix& basis, double det_tolerance = kDefaultDetTolerance) {
        detail::check_basis(basis);
        const double det = basis.determinant();
        if (!(std::abs(std::abs(det) - 1.0) <= det_tolerance)) {
            throw Error(ErrorCode::InvalidLattice, "basis determinant " + std::to_string(det) + " is not +-1");
        }
        RealMatrix b = basis;
        detail::lll_in_place(b, nullptr, kDefaultLllDelta);
        if (b.determinant() < 0) b.col(0) = -b.col(0);
        return UnimodularLattice(std::move(b), det_tolerance);
    }

    /// The standard lattice Z^n.
    static UnimodularLattice standard(int n) {
        if (n < 1) throw Error(ErrorCode::DimensionMismatch, "dimension must be positive");
        return UnimodularLattice(RealMatrix::Identity(n, n), kDefaultDetTolerance);
    }

    int n() const noexcept { return static_cast<int>(basis_.cols()); }
    const RealMatrix& basis() const noexcept { return basis_; }
    double det_tolerance() const noexcept { return det_tolerance_; }
    const RealVector& gso_norm2() const noexcept { return gso_.norm2; }
    const RealMatrix& gso_mu() const noexcept { return gso_.mu; }

    RealVector point(std::span<const std::int64_t> c) const {
        RealVector v = RealVector::Zero(n());
        for (int i = 0; i < n(); ++i)
            if (c[static_cast<std::size_t>(i)] != 0) v += static_cast<double>(c[static_cast<std::size_t>(i)]) * basis_.col(i);
        return v;
    }

    LatticePoint make_point(std::vector<std::int64_t> c) const {
        if (static_cast<int>(c.size()) != n()) throw Error(ErrorCode::DimensionMismatch, "coefficient length");
        RealVector v = point(c);
        return LatticePoint{std::move(v), std::move(c)};
    }

private:
    UnimodularLattice(RealMatrix basis, double det_tolerance) : basis_(std::move(basis)), det_tolerance_(det_tolerance) {
        detail::compute_gso(basis_, gso_);
    }

    RealMatrix basis_;
    double det_tolerance_;
    detail::Gso gso_;
};

/// A point is primitive iff its coefficient vector has gcd 1.
inline bool is_primitive(const UnimodularLattice& lattice, const LatticePoint& p) {
    if (static_cast<int>(p.c.size()) != lattice.n()) throw Error(ErrorCode::DimensionMismatch, "coefficient length");
    const std::int64_t g = gcd_vector(std::span<const std::int64_t>(p.c));
    if (g == 0) throw Error(ErrorCode::ZeroVector, "the zero vector is never primitive");
    return g == 1;
}

/// Primitive iff the k x n coefficient matrix has k Smith invariant factors, all equal to 1.
inline bool is_primitive_coefficients(std::span<const std::vector<std::int64_t>> rows) {
    if (rows.empty()) throw Error(ErrorCode::EmptyInput, "empty tuple");
    if (rows.size() == 1) return gcd_vector(std::span<const std::int64_t>(rows[0])) == 1;
    if (rows.size() == 2 && rows[0].size() == rows[1].size()) {
        // two rows: the product of both invariant factors is the gcd of the 2x2 minors
        const auto& a = rows[0];
        const auto& b = rows[1];
        const bool small = std::all_of(a.begin(), a.end(), [](std::int64_t x) { return std::abs(x) < (1LL << 30); }) &&
                           std::all_of(b.begin(), b.end(), [](std::int64_t x) { return std::abs(x) < (1LL << 30); });
        if (small) {
            std::int64_t g = 0;
            for (std::size_t i = 0; i < a.size() && g != 1; ++i)
                for (std::size_t j = i + 1; j < a.size() && g != 1; ++j) g = detail::gcd_pair(g, a[i] * b[j] - a[j] * b[i]);
            return g == 1;
        }
    }
    IntMatrix m = IntMatrix::from_rows(std::vector<std::vector<std::int64_t>>(rows.begin(), rows.end()));
    const SmithForm snf = smith_normal_form(m);
    if (snf.rank() != rows.size()) return false;
    return std::all_of(snf.divisors.begin(), snf.divisors.end(), [](const Integer& d) { return d == 1; });
}

/// True iff the tuple extends to a Z-basis of the lattice.
inline bool is_primitive_tuple(const UnimodularLattice& lattice, std::span<const LatticePoint> tuple) {
    if (tuple.empty()) throw Error(ErrorCode::EmptyInput, "empty tuple");
    if (static_cast<int>(tuple.size()) > lattice.n()) {
        throw Error(ErrorCode::TupleTooLong, "a primitive tuple has at most n members");
    }
    std::vector<std::vector<std::int64_t>> rows;
    rows.reserve(tuple.size());
    for (const auto& p : tuple) {
        if (static_cast<int>(p.c.size()) != lattice.n()) throw Error(ErrorCode::DimensionMismatch, "coefficient length");
        rows.push_back(p.c);
    }
    return is_primitive_coefficients(rows);
}

/// All v in L \ {0} with |v| <= R (closed, relative slack 1e-12), sorted
/// lexicographically by coefficient vector.
inline std::vector<LatticePoint> enumerate_nonzero_in_radius(const UnimodularLattice& lattice, double radius,
                                                             std::size_t max_points = kDefaultEnumerationCap) {
    if (!(radius > 0)) throw Error(ErrorCode::DomainError, "enumeration radius must be positive");
    const int n = lattice.n();
    const RealVector& bn = lattice.gso_norm2();
    const RealMatrix& mu = lattice.gso_mu();
    const double r2 = radius * radius * (1 + 2 * kBoundarySlack);

    double estimate = 1;
    for (int j = 0; j < n; ++j) estimate *= 2 * std::sqrt(r2 / bn(j)) + 1;
    if (estimate > static_cast<double>(max_points)) {
        throw Error(ErrorCode::EnumerationBudgetExceeded,
                    "estimated " + std::to_string(estimate) + " candidates exceeds cap " + std::to_string(max_points));
    }

    std::vector<LatticePoint> out;
    std::vector<std::int64_t> c(static_cast<std::size_t>(n), 0);
    std::vector<double> acc(static_cast<std::size_t>(n) + 1, 0.0);

    // depth-first over coefficients c_{n-1}, ..., c_0 with the GSO partial norms
    auto descend = [&](auto&& self, int j) -> void {
        double center = 0;
        for (int i = j + 1; i < n; ++i) center -= mu(i, j) * static_cast<double>(c[static_cast<std::size_t>(i)]);
        const double rem = r2 - acc[static_cast<std::size_t>(j) + 1];
        if (rem < 0) return;
        const double half = std::sqrt(rem / bn(j));
        const double margin = 1e-9 * (1 + std::abs(center) + half);
        const auto lo = static_cast<std::int64_t>(std::ceil(center - half - margin));
        const auto hi = static_cast<std::int64_t>(std::floor(center + half + margin));
        for (std::int64_t x = lo; x <= hi; ++x) {
            const double y = static_cast<double>(x) - center;
            const double partial = acc[static_cast<std::size_t>(j) + 1] + y * y * bn(j);
            if (partial > r2 * (1 + 1e-9)) continue;
            c[static_cast<std::size_t>(j)] = x;
            acc[static_cast<std::size_t>(j)] = partial;
            if (j > 0) {
                self(self, j - 1);
                continue;
            }
            if (std::all_of(c.begin(), c.end(), [](std::int64_t ci) { return ci == 0; })) continue;
            RealVector v = lattice.point(c);
            if (v.squaredNorm() > r2) continue;
            if (out.size() >= max_points) {
                throw Error(ErrorCode::EnumerationBudgetExceeded, "point count exceeds cap " + std::to_string(max_points));
            }
            out.push_back(LatticePoint{std::move(v), c});
        }
        c[static_cast<std::size_t>(j)] = 0;
    };
    descend(descend, n - 1);

    std::sort(out.begin(), out.end(), [](const LatticePoint& a, const LatticePoint& b) { return a.c < b.c; });
    return out;
}

/// Nonzero lattice points in A.
inline std::vector<LatticePoint> enumerate_in_region(const UnimodularLattice& lattice, const Region& a,
                                                     std::size_t max_points = kDefaultEnumerationCap) {
    if (a.dim() != lattice.n()) throw Error(ErrorCode::DimensionMismatch, "region and lattice dimension differ");
    std::vector<LatticePoint> pts = enumerate_nonzero_in_radius(lattice, a.bounding_radius(), max_points);
    std::erase_if(pts, [&](const LatticePoint& p) { return !a.contains(p.v); });
    return pts;
}

/// JSONL record {"n":..,"basis":[row-major],"chain":..,"index":..}.
inline nlohmann::ordered_json lattice_record(const UnimodularLattice& lattice, std::uint64_t chain, std::uint64_t index) {
    nlohmann::ordered_json j;
    j["n"] = lattice.n();
    std::vector<double> flat;
    flat.reserve(static_cast<std::size_t>(lattice.n() * lattice.n()));
    for (int r = 0; r < lattice.n(); ++r)
        for (int c = 0; c < lattice.n(); ++c) flat.push_back(lattice.basis()(r, c));
    j["basis"] = flat;
    j["chain"] = chain;
    j["index"] = index;
    return j;
}

inline UnimodularLattice lattice_from_record(const nlohmann::json& j) {
    const int n = j.at("n").get<int>();
    const auto flat = j.at("basis").get<std::vector<double>>();
    if (n < 1 || flat.size() != static_cast<std::size_t>(n * n)) {
        throw Error(ErrorCode::DimensionMismatch, "lattice record basis has wrong length");
    }
    RealMatrix b(n, n);
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) b(r, c) = flat[static_cast<std::size_t>(r * n + c)];
    return UnimodularLattice::from_basis(b);
}

}  // namespace geonum
