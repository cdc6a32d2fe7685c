#pragma once

// Exact integer matrix algebra (gcd, Hermite and Smith normal forms) and the
// floating-point lattice utilities the rest of the toolkit is built on
// (LLL reduction, numerical rank, integer coefficient recovery).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <gmpxx.h>

#include "geonum/error.hpp"

namespace geonum {

using Integer = mpz_class;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;
using CoeffMatrix = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>;

/// Dense row-major matrix of arbitrary-precision integers.
class IntMatrix {
public:
    IntMatrix() = default;

    IntMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0) {
        if (rows == 0 || cols == 0) {
            throw Error(ErrorCode::EmptyInput, "IntMatrix needs positive dimensions");
        }
    }

    IntMatrix(std::initializer_list<std::initializer_list<long>> rows) {
        rows_ = rows.size();
        cols_ = rows_ == 0 ? 0 : rows.begin()->size();
        if (rows_ == 0 || cols_ == 0) {
            throw Error(ErrorCode::EmptyInput, "IntMatrix needs positive dimensions");
        }
        data_.reserve(rows_ * cols_);
        for (const auto& row : rows) {
            if (row.size() != cols_) {
                throw Error(ErrorCode::DimensionMismatch, "ragged IntMatrix initializer");
            }
            for (long x : row) data_.emplace_back(x);
        }
    }

    static IntMatrix identity(std::size_t n) {
        IntMatrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1;
        return m;
    }

    template <class T>
    static IntMatrix from_rows(const std::vector<std::vector<T>>& rows) {
        if (rows.empty() || rows.front().empty()) {
            throw Error(ErrorCode::EmptyInput, "IntMatrix needs positive dimensions");
        }
        IntMatrix m(rows.size(), rows.front().size());
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (rows[i].size() != m.cols_) {
                throw Error(ErrorCode::DimensionMismatch, "ragged IntMatrix rows");
            }
            for (std::size_t j = 0; j < m.cols_; ++j) m(i, j) = Integer(static_cast<long>(rows[i][j]));
        }
        return m;
    }

    static IntMatrix from_eigen(const CoeffMatrix& c) {
        IntMatrix m(static_cast<std::size_t>(c.rows()), static_cast<std::size_t>(c.cols()));
        for (std::size_t i = 0; i < m.rows_; ++i)
            for (std::size_t j = 0; j < m.cols_; ++j) m(i, j) = Integer(static_cast<long>(c(i, j)));
        return m;
    }

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }

    Integer& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    const Integer& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    std::span<const Integer> entries() const noexcept { return data_; }

    bool operator==(const IntMatrix& other) const {
        return rows_ == other.rows_ && cols_ == other.cols_ && data_ == other.data_;
    }

    IntMatrix operator*(const IntMatrix& rhs) const {
        if (cols_ != rhs.rows_) throw Error(ErrorCode::DimensionMismatch, "IntMatrix product");
        IntMatrix out(rows_, rhs.cols_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t l = 0; l < cols_; ++l) {
                const Integer& a = (*this)(i, l);
                if (a == 0) continue;
                for (std::size_t j = 0; j < rhs.cols_; ++j) out(i, j) += a * rhs(l, j);
            }
        return out;
    }

    IntMatrix transpose() const {
        IntMatrix t(cols_, rows_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
        return t;
    }

    void swap_rows(std::size_t a, std::size_t b) {
        if (a == b) return;
        for (std::size_t j = 0; j < cols_; ++j) std::swap((*this)(a, j), (*this)(b, j));
    }

    void swap_cols(std::size_t a, std::size_t b) {
        if (a == b) return;
        for (std::size_t i = 0; i < rows_; ++i) std::swap((*this)(i, a), (*this)(i, b));
    }

    /// row[dst] += factor * row[src]
    void add_row_multiple(std::size_t dst, std::size_t src, const Integer& factor) {
        if (factor == 0) return;
        for (std::size_t j = 0; j < cols_; ++j) (*this)(dst, j) += factor * (*this)(src, j);
    }

    /// col[dst] += factor * col[src]
    void add_col_multiple(std::size_t dst, std::size_t src, const Integer& factor) {
        if (factor == 0) return;
        for (std::size_t i = 0; i < rows_; ++i) (*this)(i, dst) += factor * (*this)(i, src);
    }

    /// Fraction-free (Bareiss) determinant; exact.
    Integer determinant() const {
        if (rows_ != cols_) throw Error(ErrorCode::DimensionMismatch, "determinant of non-square matrix");
        IntMatrix a = *this;
        const std::size_t n = rows_;
        Integer sign = 1;
        Integer prev = 1;
        for (std::size_t k = 0; k + 1 < n; ++k) {
            if (a(k, k) == 0) {
                std::size_t p = k + 1;
                while (p < n && a(p, k) == 0) ++p;
                if (p == n) return 0;
                a.swap_rows(k, p);
                sign = -sign;
            }
            for (std::size_t i = k + 1; i < n; ++i)
                for (std::size_t j = k + 1; j < n; ++j) {
                    Integer num = a(i, j) * a(k, k) - a(i, k) * a(k, j);
                    mpz_divexact(a(i, j).get_mpz_t(), num.get_mpz_t(), prev.get_mpz_t());
                }
            prev = a(k, k);
        }
        return sign * a(n - 1, n - 1);
    }

    bool is_unimodular() const { return rows_ == cols_ && abs(determinant()) == 1; }

    friend std::ostream& operator<<(std::ostream& os, const IntMatrix& m) {
        os << '[';
        for (std::size_t i = 0; i < m.rows_; ++i) {
            os << (i ? ",[" : "[");
            for (std::size_t j = 0; j < m.cols_; ++j) os << (j ? "," : "") << m(i, j).get_str();
            os << ']';
        }
        return os << ']';
    }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<Integer> data_;
};

namespace detail {
inline Integer abs_value(const Integer& x) { return abs(x); }
inline std::int64_t abs_value(std::int64_t x) { return x < 0 ? -x : x; }
inline std::int64_t gcd_pair(std::int64_t a, std::int64_t b) {
    a = abs_value(a);
    b = abs_value(b);
    while (b != 0) {
        std::int64_t t = a % b;
        a = b;
        b = t;
    }
    return a;
}
inline Integer gcd_pair(const Integer& a, const Integer& b) { return gcd(a, b); }
}  // namespace detail

/// gcd of the absolute values; the all-zero sequence has gcd 0.
template <class T>
T gcd_vector(std::span<const T> c) {
    if (c.empty()) throw Error(ErrorCode::EmptyInput, "gcd_vector of an empty sequence");
    T g = 0;
    for (const T& x : c) {
        g = detail::gcd_pair(g, x);
        if (g == 1) break;
    }
    return g;
}

inline std::int64_t gcd_vector(std::initializer_list<std::int64_t> c) {
    return gcd_vector(std::span<const std::int64_t>(c.begin(), c.size()));
}

inline Integer gcd_vector(const std::vector<Integer>& c) { return gcd_vector(std::span<const Integer>(c)); }
inline std::int64_t gcd_vector(const std::vector<std::int64_t>& c) {
    return gcd_vector(std::span<const std::int64_t>(c));
}

struct SmithForm {
    std::vector<Integer> divisors;  // nonzero invariant factors d_1 | d_2 | ... | d_rank
    IntMatrix U;                    // rows x rows, unimodular
    IntMatrix V;                    // cols x cols, unimodular
    IntMatrix diagonal;             // U * M * V

    std::size_t rank() const noexcept { return divisors.size(); }
};

/// Smith normal form by gcd-driven row/column elimination, always pivoting on
/// the entry of least absolute value in the remaining block.
inline SmithForm smith_normal_form(const IntMatrix& m) {
    const std::size_t rows = m.rows();
    const std::size_t cols = m.cols();
    IntMatrix a = m;
    IntMatrix u = IntMatrix::identity(rows);
    IntMatrix v = IntMatrix::identity(cols);
    std::vector<Integer> divisors;

    const std::size_t steps = std::min(rows, cols);
    Integer q;
    for (std::size_t t = 0; t < steps; ++t) {
        bool exhausted = false;
        for (;;) {
            // pivot: least nonzero |a_ij| in the trailing block
            std::size_t pi = rows, pj = cols;
            for (std::size_t i = t; i < rows; ++i)
                for (std::size_t j = t; j < cols; ++j) {
                    if (a(i, j) == 0) continue;
                    if (pi == rows || mpz_cmpabs(a(i, j).get_mpz_t(), a(pi, pj).get_mpz_t()) < 0) {
                        pi = i;
                        pj = j;
                    }
                }
            if (pi == rows) {
                exhausted = true;
                break;
            }
            a.swap_rows(t, pi);
            u.swap_rows(t, pi);
            a.swap_cols(t, pj);
            v.swap_cols(t, pj);

            bool clean = true;
            for (std::size_t i = t + 1; i < rows; ++i) {
                if (a(i, t) == 0) continue;
                mpz_tdiv_q(q.get_mpz_t(), a(i, t).get_mpz_t(), a(t, t).get_mpz_t());
                a.add_row_multiple(i, t, -q);
                u.add_row_multiple(i, t, -q);
                if (a(i, t) != 0) clean = false;
            }
            for (std::size_t j = t + 1; j < cols; ++j) {
                if (a(t, j) == 0) continue;
                mpz_tdiv_q(q.get_mpz_t(), a(t, j).get_mpz_t(), a(t, t).get_mpz_t());
                a.add_col_multiple(j, t, -q);
                v.add_col_multiple(j, t, -q);
                if (a(t, j) != 0) clean = false;
            }
            if (!clean) continue;

            // pivot must divide the whole trailing block
            std::size_t bad = rows;
            for (std::size_t i = t + 1; i < rows && bad == rows; ++i)
                for (std::size_t j = t + 1; j < cols; ++j)
                    if (!mpz_divisible_p(a(i, j).get_mpz_t(), a(t, t).get_mpz_t())) {
                        bad = i;
                        break;
                    }
            if (bad == rows) break;
            a.add_row_multiple(t, bad, 1);
            u.add_row_multiple(t, bad, 1);
        }
        if (exhausted) break;
        if (a(t, t) < 0) {
            for (std::size_t j = 0; j < cols; ++j) a(t, j) = -a(t, j);
            for (std::size_t j = 0; j < rows; ++j) u(t, j) = -u(t, j);
        }
        divisors.push_back(a(t, t));
    }
    return SmithForm{std::move(divisors), std::move(u), std::move(v), std::move(a)};
}

struct HermiteForm {
    IntMatrix H;  // row echelon, positive pivots, entries above each pivot reduced into [0, pivot)
    IntMatrix U;  // unimodular with U * M = H
    std::size_t rank = 0;
};

/// Row-style Hermite normal form.
inline HermiteForm hermite_normal_form(const IntMatrix& m) {
    const std::size_t rows = m.rows();
    const std::size_t cols = m.cols();
    IntMatrix h = m;
    IntMatrix u = IntMatrix::identity(rows);
    std::size_t r = 0;
    Integer g, s, t, q;
    for (std::size_t c = 0; c < cols && r < rows; ++c) {
        for (std::size_t i = r + 1; i < rows; ++i) {
            if (h(i, c) == 0) continue;
            if (h(r, c) == 0) {
                h.swap_rows(r, i);
                u.swap_rows(r, i);
                continue;
            }
            // [s t; -b/g a/g] is unimodular and sends (a, b) to (g, 0)
            Integer a = h(r, c), b = h(i, c);
            mpz_gcdext(g.get_mpz_t(), s.get_mpz_t(), t.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
            Integer ag = a / g, bg = b / g;
            for (IntMatrix* x : {&h, &u}) {
                for (std::size_t j = 0; j < x->cols(); ++j) {
                    Integer top = s * (*x)(r, j) + t * (*x)(i, j);
                    Integer bottom = -bg * (*x)(r, j) + ag * (*x)(i, j);
                    (*x)(r, j) = std::move(top);
                    (*x)(i, j) = std::move(bottom);
                }
            }
        }
        if (h(r, c) == 0) continue;
        if (h(r, c) < 0) {
            for (std::size_t j = 0; j < cols; ++j) h(r, j) = -h(r, j);
            for (std::size_t j = 0; j < rows; ++j) u(r, j) = -u(r, j);
        }
        for (std::size_t i = 0; i < r; ++i) {
            mpz_fdiv_q(q.get_mpz_t(), h(i, c).get_mpz_t(), h(r, c).get_mpz_t());
            h.add_row_multiple(i, r, -q);
            u.add_row_multiple(i, r, -q);
        }
        ++r;
    }
    return HermiteForm{std::move(h), std::move(u), r};
}

struct LllResult {
    RealMatrix basis;  // columns: reduced basis, equal to input * U
    IntMatrix U;
};

namespace detail {

struct Gso {
    RealMatrix mu;      // mu(i, j) for j < i
    RealVector norm2;   // |b*_i|^2
};

inline void compute_gso(const RealMatrix& b, Gso& g) {
    const Eigen::Index n = b.cols();
    g.mu.setZero(n, n);
    g.norm2.resize(n);
    RealMatrix bstar = b;
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < i; ++j) {
            g.mu(i, j) = b.col(i).dot(bstar.col(j)) / g.norm2(j);
            bstar.col(i) -= g.mu(i, j) * bstar.col(j);
        }
        g.norm2(i) = bstar.col(i).squaredNorm();
    }
}

// Relative floor on |b*_i| / max |b_j| below which a basis counts as singular.
inline constexpr double kSingularRatio = 1e-13;

inline void check_basis(const RealMatrix& b) {
    if (b.rows() != b.cols() || b.rows() == 0) {
        throw Error(ErrorCode::DimensionMismatch, "basis must be a nonempty square matrix");
    }
    if (!b.allFinite()) throw Error(ErrorCode::SingularBasis, "basis has non-finite entries");
}

/// In-place LLL on the columns of `b`; `u` (if given) accumulates the column operations.
inline void lll_in_place(RealMatrix& b, CoeffMatrix* u, double delta) {
    check_basis(b);
    if (!(delta > 0.25 && delta < 1.0)) {
        throw Error(ErrorCode::DomainError, "LLL delta must lie in (0.25, 1)");
    }
    const Eigen::Index n = b.cols();
    Gso g;
    compute_gso(b, g);
    const double scale = b.colwise().squaredNorm().maxCoeff();
    for (Eigen::Index i = 0; i < n; ++i) {
        if (!(g.norm2(i) > kSingularRatio * kSingularRatio * scale)) {
            throw Error(ErrorCode::SingularBasis, "basis is numerically singular");
        }
    }
    Eigen::Index k = 1;
    std::size_t iterations = 0;
    while (k < n) {
        if (++iterations > 1000000) throw Error(ErrorCode::SingularBasis, "LLL failed to converge");
        for (Eigen::Index j = k - 1; j >= 0; --j) {
            const double m = g.mu(k, j);
            if (std::abs(m) <= 0.5 + 1e-12) continue;
            const double q = std::nearbyint(m);
            b.col(k) -= q * b.col(j);
            if (u) u->col(k) -= static_cast<std::int64_t>(q) * u->col(j);
            for (Eigen::Index l = 0; l < j; ++l) g.mu(k, l) -= q * g.mu(j, l);
            g.mu(k, j) -= q;
        }
        const double m = g.mu(k, k - 1);
        if (g.norm2(k) >= (delta - m * m) * g.norm2(k - 1)) {
            ++k;
        } else {
            b.col(k).swap(b.col(k - 1));
            if (u) u->col(k).swap(u->col(k - 1));
            compute_gso(b, g);
            k = std::max<Eigen::Index>(1, k - 1);
        }
    }
}

}  // namespace detail

inline constexpr double kDefaultLllDelta = 0.99;

/// LLL reduction of the column basis `b`. Returns the reduced basis B' and the
/// unimodular U with B' = B * U.
inline LllResult lll_reduce(const RealMatrix& b, double delta = kDefaultLllDelta) {
    RealMatrix reduced = b;
    CoeffMatrix u = CoeffMatrix::Identity(b.rows(), b.cols());
    detail::lll_in_place(reduced, &u, delta);
    return LllResult{std::move(reduced), IntMatrix::from_eigen(u)};
}

/// Recovers the integer c with v = B c, provided the residual is within `tol`.
inline std::vector<std::int64_t> integer_coefficients(const RealMatrix& b, const RealVector& v, double tol) {
    detail::check_basis(b);
    if (v.size() != b.rows()) throw Error(ErrorCode::DimensionMismatch, "vector/basis dimension");
    if (!(tol > 0)) throw Error(ErrorCode::DomainError, "tolerance must be positive");
    Eigen::FullPivLU<RealMatrix> lu(b);
    if (!lu.isInvertible()) throw Error(ErrorCode::SingularBasis, "basis is singular");
    const RealVector x = lu.solve(v);
    std::vector<std::int64_t> c(static_cast<std::size_t>(x.size()));
    RealVector rounded(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        rounded(i) = std::nearbyint(x(i));
        c[static_cast<std::size_t>(i)] = static_cast<std::int64_t>(rounded(i));
    }
    const double residual = (b * rounded - v).lpNorm<Eigen::Infinity>();
    if (!(residual <= tol)) {
        throw Error(ErrorCode::NotInLattice, "residual " + std::to_string(residual) + " exceeds tolerance");
    }
    return c;
}

inline constexpr double kDefaultRankTolerance = 1e-9;

/// Numerical rank of the columns of `m`: singular values >= tol * largest.
inline std::size_t rank_with_tolerance(const RealMatrix& m, double tol = kDefaultRankTolerance) {
    if (m.cols() == 0 || m.rows() == 0) return 0;
    Eigen::JacobiSVD<RealMatrix> svd(m);
    const auto& sv = svd.singularValues();
    const double largest = sv.size() ? sv(0) : 0.0;
    if (!(largest > 0)) return 0;
    std::size_t rank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv(i) >= tol * largest) ++rank;
    return rank;
}

/// Numerical rank of a set of vectors; the empty set has rank 0.
inline std::size_t rank_with_tolerance(std::span<const RealVector> vectors, double tol = kDefaultRankTolerance) {
    if (vectors.empty()) return 0;
    const Eigen::Index dim = vectors.front().size();
    RealMatrix m(dim, static_cast<Eigen::Index>(vectors.size()));
    for (std::size_t i = 0; i < vectors.size(); ++i) {
        if (vectors[i].size() != dim) throw Error(ErrorCode::DimensionMismatch, "vectors of mixed dimension");
        m.col(static_cast<Eigen::Index>(i)) = vectors[i];
    }
    return rank_with_tolerance(m, tol);
}

}  // namespace geonum
