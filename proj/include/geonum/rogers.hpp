#pragma once

// Right-hand side of Rogers' moment formula for ball indicators: zeta
// constants, the partitions P_{k,r}, the matrix families D_{k,r,s,(nu;mu)} with
// their elementary-divisor weights, the product integrals over B_1, and the
// resulting moment polynomials P_{n,k}(T), Q_{n,k}(T) with Phi_n and omega_n.
//
// Integrals are taken in units where B_1 has radius 1: the constraint
// rho_1(sum_i d_ij x_i / s) reads |sum_i d_ij x_i| <= s, and every integral is
// reported relative to m(B_1)^r = 1.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "geonum/error.hpp"
#include "geonum/linalg.hpp"
#include "geonum/random.hpp"

namespace geonum {

// ---------------------------------------------------------------- constants

/// Riemann zeta for real s > 1: partial sum plus Euler-Maclaurin tail
/// N^{1-s}/(s-1) - N^{-s}/2 + s N^{-s-1}/12, with N chosen so the next
/// correction term is below tol/2.
inline double zeta(double s, double tol = 1e-12) {
    if (!(s > 1)) throw Error(ErrorCode::DomainError, "zeta needs s > 1");
    if (!(tol > 0)) throw Error(ErrorCode::DomainError, "zeta tolerance must be positive");
    const double c = s * (s + 1) * (s + 2) / 720.0;
    double n = std::max(10.0, std::ceil(std::pow(2 * c / tol, 1.0 / (s + 3))));
    n = std::min(n, 1e8);
    const auto big_n = static_cast<std::int64_t>(n);
    // smallest terms first
    double sum = 0;
    for (std::int64_t m = big_n; m >= 1; --m) sum += std::pow(static_cast<double>(m), -s);
    return sum + std::pow(n, 1 - s) / (s - 1) - 0.5 * std::pow(n, -s) + s * std::pow(n, -s - 1) / 12.0;
}

/// theta_{n,k} = 1 / prod_{j<k} zeta(n - j), defined for 1 <= k <= n - 1.
inline double theta(int n, int k) {
    if (k < 1 || k > n - 1) throw Error(ErrorCode::BadOrder, "theta needs 1 <= k <= n-1");
    double prod = 1;
    for (int j = 0; j < k; ++j) prod *= zeta(n - j);
    return 1.0 / prod;
}

// --------------------------------------------------------------- partitions

/// (nu; mu), 1-based, both strictly increasing, disjoint, covering {1..k}.
struct RogersPartition {
    int k = 0;
    int r = 0;
    std::vector<int> nu;
    std::vector<int> mu;

    bool operator==(const RogersPartition&) const = default;
};

/// All C(k, r) partitions, lexicographic in nu.
inline std::vector<RogersPartition> partitions(int k, int r) {
    if (k < 2) throw Error(ErrorCode::BadOrder, "partitions need k >= 2");
    if (r < 1 || r > k - 1) throw Error(ErrorCode::BadOrder, "partitions need 1 <= r <= k-1");
    std::vector<RogersPartition> out;
    std::vector<int> nu(static_cast<std::size_t>(r));
    std::iota(nu.begin(), nu.end(), 1);
    for (;;) {
        RogersPartition p{k, r, nu, {}};
        for (int j = 1; j <= k; ++j)
            if (!std::binary_search(nu.begin(), nu.end(), j)) p.mu.push_back(j);
        out.push_back(std::move(p));
        int i = r - 1;
        while (i >= 0 && nu[static_cast<std::size_t>(i)] == k - r + i + 1) --i;
        if (i < 0) break;
        ++nu[static_cast<std::size_t>(i)];
        for (int j = i + 1; j < r; ++j) nu[static_cast<std::size_t>(j)] = nu[static_cast<std::size_t>(j - 1)] + 1;
    }
    return out;
}

// ---------------------------------------------------------------- D matrices

struct RogersMatrixTerm {
    IntMatrix D;  // r x k
    int s = 1;
    RogersPartition partition;
    std::vector<Integer> divisors;  // elementary divisors eps_{D,1..r}
    std::vector<Integer> e_factors; // gcd(eps_{D,i}, s)
    double weight = 0;              // (e_1 ... e_r / s^r)^n
};

namespace detail {

// Positions (row, column) of D, 0-based, whose entries are not fixed by the
// partition: column mu_j, row i with mu_j > nu_i.
struct FreeLayout {
    std::vector<std::pair<int, int>> free;  // (row, col)
    std::vector<int> mu_cols;               // 0-based mu columns
    bool has_forced_zero_column = false;    // some mu column has no free entry
};

inline FreeLayout free_layout(const RogersPartition& p) {
    FreeLayout layout;
    for (int muj : p.mu) {
        layout.mu_cols.push_back(muj - 1);
        bool any = false;
        for (int i = 0; i < p.r; ++i)
            if (muj > p.nu[static_cast<std::size_t>(i)]) {
                layout.free.emplace_back(i, muj - 1);
                any = true;
            }
        if (!any) layout.has_forced_zero_column = true;
    }
    return layout;
}

inline void check_partition(const RogersPartition& p, int k, int r) {
    if (p.k != k || p.r != r || static_cast<int>(p.nu.size()) != r || static_cast<int>(p.mu.size()) != k - r) {
        throw Error(ErrorCode::BadOrder, "partition does not match (k, r)");
    }
}

/// Visits every assignment of the free entries in [-max_entry, max_entry]
/// that satisfies the column and gcd conditions. `entries` is indexed like `layout.free`.
template <class Visit>
void for_each_free_assignment(const RogersPartition& p, const FreeLayout& layout, int s, int max_entry,
                              bool allow_zero_columns, Visit&& visit) {
    if (layout.has_forced_zero_column && !allow_zero_columns) return;
    const std::size_t f = layout.free.size();
    std::vector<int> entries(f, -max_entry);
    // column of each free slot, as an index into mu_cols
    std::vector<std::size_t> slot_col(f);
    for (std::size_t i = 0; i < f; ++i)
        slot_col[i] = static_cast<std::size_t>(
            std::find(layout.mu_cols.begin(), layout.mu_cols.end(), layout.free[i].second) - layout.mu_cols.begin());
    std::vector<int> nonzero_in_col(layout.mu_cols.size());
    for (;;) {
        bool ok = true;
        if (!allow_zero_columns) {
            std::fill(nonzero_in_col.begin(), nonzero_in_col.end(), 0);
            for (std::size_t i = 0; i < f; ++i)
                if (entries[i] != 0) nonzero_in_col[slot_col[i]] = 1;
            ok = std::all_of(nonzero_in_col.begin(), nonzero_in_col.end(), [](int v) { return v != 0; });
        }
        if (ok) {
            // gcd of all coefficients is gcd(s, free entries); it divides s, so coprimality means 1
            std::int64_t g = s;
            for (std::size_t i = 0; i < f && g != 1; ++i) g = gcd_pair(g, entries[i]);
            if (g == 1) visit(entries);
        }
        std::size_t i = 0;
        while (i < f && entries[i] == max_entry) entries[i++] = -max_entry;
        if (i == f) break;
        ++entries[i];
    }
    (void)p;
}

inline IntMatrix build_d(const RogersPartition& p, const FreeLayout& layout, int s, const std::vector<int>& entries) {
    IntMatrix d(static_cast<std::size_t>(p.r), static_cast<std::size_t>(p.k));
    for (int i = 0; i < p.r; ++i) d(static_cast<std::size_t>(i), static_cast<std::size_t>(p.nu[static_cast<std::size_t>(i)] - 1)) = s;
    for (std::size_t i = 0; i < layout.free.size(); ++i)
        d(static_cast<std::size_t>(layout.free[i].first), static_cast<std::size_t>(layout.free[i].second)) = entries[i];
    return d;
}

inline double pow_int(double base, int e) {
    double out = 1;
    for (int i = 0; i < e; ++i) out *= base;
    return out;
}

}  // namespace detail

/// Members of D_{k,r,s,(nu;mu)} with free entries in [-max_entry, max_entry],
/// with elementary divisors and the weight (e_1...e_r / s^r)^n filled in.
inline std::vector<RogersMatrixTerm> d_matrices(int k, int r, int s, const RogersPartition& partition, int max_entry,
                                                int n, bool allow_zero_columns = false) {
    detail::check_partition(partition, k, r);
    if (s < 1) throw Error(ErrorCode::DomainError, "s must be >= 1");
    if (max_entry < 0) throw Error(ErrorCode::DomainError, "max_entry must be >= 0");
    const detail::FreeLayout layout = detail::free_layout(partition);
    std::vector<RogersMatrixTerm> out;
    detail::for_each_free_assignment(partition, layout, s, max_entry, allow_zero_columns, [&](const std::vector<int>& e) {
        RogersMatrixTerm term;
        term.D = detail::build_d(partition, layout, s, e);
        term.s = s;
        term.partition = partition;
        const SmithForm snf = smith_normal_form(term.D);
        term.divisors = snf.divisors;
        Integer prod = 1;
        for (const Integer& eps : snf.divisors) {
            term.e_factors.push_back(gcd(eps, Integer(s)));
            prod *= term.e_factors.back();
        }
        term.weight = std::pow(prod.get_d() / detail::pow_int(s, r), n);
        out.push_back(std::move(term));
    });
    return out;
}

// ---------------------------------------------------------------- integrals

/// Closed form for r = 1: the constraints are concentric balls of radius s/|d_j|.
inline double ball_integral_r1(const IntMatrix& d, int s, int n) {
    if (d.rows() != 1) throw Error(ErrorCode::InvalidTerm, "ball_integral_r1 needs a 1 x k matrix");
    if (s < 1) throw Error(ErrorCode::InvalidTerm, "s must be >= 1");
    double value = 1;
    for (std::size_t j = 0; j < d.cols(); ++j) {
        if (d(0, j) == 0) throw Error(ErrorCode::InvalidTerm, "zero entry in r = 1 term");
        const double ratio = static_cast<double>(s) / std::abs(d(0, j).get_d());
        value = std::min(value, std::min(1.0, std::pow(ratio, n)));
    }
    return value;
}

struct McEstimate {
    double value = 0;
    double standard_error = 0;
};

/// Monte Carlo product integral for a term of any r: each x_i uniform in B_1
/// (forced by the nu columns), averaging the indicator of all column constraints.
inline McEstimate ball_integral_mc(const IntMatrix& d, int s, int n, std::size_t samples, Rng& rng) {
    const std::size_t r = d.rows(), k = d.cols();
    if (s < 1) throw Error(ErrorCode::InvalidTerm, "s must be >= 1");
    if (samples == 0) throw Error(ErrorCode::InsufficientData, "ball_integral_mc needs samples");
    for (std::size_t i = 0; i < r; ++i) {
        bool pinned = false;
        for (std::size_t j = 0; j < k && !pinned; ++j) {
            bool unit = d(i, j) == s;
            for (std::size_t l = 0; l < r && unit; ++l)
                if (l != i && d(l, j) != 0) unit = false;
            pinned = unit;
        }
        if (!pinned) throw Error(ErrorCode::InvalidTerm, "row " + std::to_string(i) + " has no s*e_i column");
    }
    std::vector<std::vector<double>> cols(k, std::vector<double>(r));
    for (std::size_t j = 0; j < k; ++j)
        for (std::size_t i = 0; i < r; ++i) cols[j][i] = d(i, j).get_d();
    const double s2 = static_cast<double>(s) * s * (1 + 1e-12);
    std::vector<RealVector> x(r);
    std::size_t hits = 0;
    RealVector acc(n);
    for (std::size_t t = 0; t < samples; ++t) {
        for (std::size_t i = 0; i < r; ++i) x[i] = uniform_in_ball(n, 1.0, rng);
        bool inside = true;
        for (std::size_t j = 0; j < k && inside; ++j) {
            acc.setZero();
            for (std::size_t i = 0; i < r; ++i)
                if (cols[j][i] != 0) acc += cols[j][i] * x[i];
            inside = acc.squaredNorm() <= s2;
        }
        if (inside) ++hits;
    }
    const double p = static_cast<double>(hits) / static_cast<double>(samples);
    return McEstimate{p, std::sqrt(p * (1 - p) / static_cast<double>(samples))};
}

// ------------------------------------------------------------- coefficients

struct TruncationParams {
    int s_max = 50;
    int d_max = 50;
    std::size_t mc_samples = 100000;
    std::uint64_t seed = 1;
    bool allow_zero_columns = false;
    double term_budget = 5e7;  // maximum number of D matrices enumerated per coefficient
};

struct BetaEstimate {
    double value = 0;             // truncated sum
    double exact_part = 0;        // terms evaluated in closed form
    double mc_part = 0;           // pooled Monte Carlo estimate of the remaining terms
    double mc_stderr = 0;
    double truncation_bound = 0;  // envelope bound on the discarded terms (may be +inf)
    bool truncation_rigorous = false;
    std::size_t terms = 0;
    std::size_t mc_terms = 0;
    double error = 0;             // 3 * mc_stderr + truncation_bound
    std::string truncation_note;
};

namespace detail {

// Elementary divisors of a small r x k integer matrix via determinantal
// divisors (gcd of j x j minors), in 128-bit arithmetic.
inline std::vector<std::int64_t> small_elementary_divisors(const std::vector<std::int64_t>& m, int rows, int cols) {
    using I = __int128;
    auto gcd128 = [](I a, I b) {
        if (a < 0) a = -a;
        if (b < 0) b = -b;
        while (b != 0) {
            I t = a % b;
            a = b;
            b = t;
        }
        return a;
    };
    auto det = [&](const std::vector<int>& ri, const std::vector<int>& ci) -> I {
        const int j = static_cast<int>(ri.size());
        std::vector<I> a(static_cast<std::size_t>(j * j));
        for (int x = 0; x < j; ++x)
            for (int y = 0; y < j; ++y) a[static_cast<std::size_t>(x * j + y)] = m[static_cast<std::size_t>(ri[static_cast<std::size_t>(x)] * cols + ci[static_cast<std::size_t>(y)])];
        I sign = 1, prev = 1;
        for (int p = 0; p + 1 < j; ++p) {
            if (a[static_cast<std::size_t>(p * j + p)] == 0) {
                int q = p + 1;
                while (q < j && a[static_cast<std::size_t>(q * j + p)] == 0) ++q;
                if (q == j) return 0;
                for (int y = 0; y < j; ++y) std::swap(a[static_cast<std::size_t>(p * j + y)], a[static_cast<std::size_t>(q * j + y)]);
                sign = -sign;
            }
            for (int x = p + 1; x < j; ++x)
                for (int y = p + 1; y < j; ++y)
                    a[static_cast<std::size_t>(x * j + y)] =
                        (a[static_cast<std::size_t>(x * j + y)] * a[static_cast<std::size_t>(p * j + p)] -
                         a[static_cast<std::size_t>(x * j + p)] * a[static_cast<std::size_t>(p * j + y)]) / prev;
            prev = a[static_cast<std::size_t>(p * j + p)];
        }
        return sign * a[static_cast<std::size_t>(j * j - 1)];
    };
    auto combos = [](int total, int size) {
        std::vector<std::vector<int>> out;
        std::vector<int> c(static_cast<std::size_t>(size));
        std::iota(c.begin(), c.end(), 0);
        for (;;) {
            out.push_back(c);
            int i = size - 1;
            while (i >= 0 && c[static_cast<std::size_t>(i)] == total - size + i) --i;
            if (i < 0) break;
            ++c[static_cast<std::size_t>(i)];
            for (int x = i + 1; x < size; ++x) c[static_cast<std::size_t>(x)] = c[static_cast<std::size_t>(x - 1)] + 1;
        }
        return out;
    };
    std::vector<std::int64_t> eps;
    I prev_delta = 1;
    for (int j = 1; j <= std::min(rows, cols); ++j) {
        I delta = 0;
        for (const auto& ri : combos(rows, j))
            for (const auto& ci : combos(cols, j)) {
                delta = gcd128(delta, det(ri, ci));
                if (delta == 1) break;
            }
        if (delta == 0) break;
        eps.push_back(static_cast<std::int64_t>(delta / prev_delta));
        prev_delta = delta;
    }
    return eps;
}

// One Monte Carlo pool member: weight * bound times the probability that a
// sample drawn from the bounding proposal satisfies every constraint.
struct PoolTerm {
    double mass = 0;      // weight * bound
    double radius = 1;    // proposal radius for x_{pivot_row}, in units of B_1
    int s = 1;
    int pivot_row = 0;
    int pivot_col = -1;   // index into the term's mu columns; -1 means plain sampling
    std::size_t offset = 0;  // into the flat mu-column entry store
};

// Sum over (s, M) outside [1, s_max] x [0, d_max] of N_f(M) max(s, M)^{-n},
// where N_f(M) counts free-entry vectors with max |entry| = M.
inline double envelope_tail(int n, int f, int s_max, int d_max, bool allow_zero) {
    if (f == 0) {
        double tail = 0;
        // only s varies: sum_{s > s_max} s^{-n}
        tail = std::pow(static_cast<double>(s_max), 1 - n) / (n - 1);
        return tail;
    }
    if (n - f <= 1) return std::numeric_limits<double>::infinity();
    auto count_at = [&](int m) -> double {
        if (m == 0) return allow_zero ? 1.0 : 0.0;
        return std::pow(2.0 * m + 1, f) - std::pow(2.0 * m - 1, f);
    };
    auto s_tail = [&](double a) { return std::pow(a, 1 - n) / (n - 1); };  // >= sum_{s > a} s^{-n}
    double tail = 0;
    // s > s_max, M <= d_max
    for (int m = 0; m <= d_max; ++m) {
        const double c = count_at(m);
        if (c == 0) continue;
        const double below = std::max(0, m - s_max);  // s in (s_max, m]
        tail += c * (below * std::pow(static_cast<double>(m), -n) + s_tail(std::max(s_max, m)));
    }
    // M > d_max, every s >= 1: sum_s max(s, M)^{-n} <= M^{1-n} + M^{1-n}/(n-1)
    const double factor = static_cast<double>(n) / (n - 1);
    const int cutoff = std::max(d_max * 1000, 100000);
    for (int m = d_max + 1; m <= cutoff; ++m) tail += factor * count_at(m) * std::pow(static_cast<double>(m), 1 - n);
    // beyond the cutoff, count_at(m) <= 2 f (3m)^{f-1}
    tail += factor * 2.0 * f * std::pow(3.0, f - 1) * std::pow(static_cast<double>(cutoff), f - n + 1) / (n - f - 1);
    return tail;
}

}  // namespace detail

/// beta_{n,k,r}(1): the truncated triple sum over partitions, s <= s_max and
/// free entries bounded by d_max. Terms whose integral factorises are summed
/// exactly; the rest are estimated jointly by importance sampling over terms.
inline BetaEstimate beta_coefficient(int n, int k, int r, const TruncationParams& params) {
    if (k < 2 || k > n - 1) throw Error(ErrorCode::BadOrder, "beta needs 2 <= k <= n-1");
    if (r < 1 || r > k - 1) throw Error(ErrorCode::BadOrder, "beta needs 1 <= r <= k-1");
    if (params.s_max < 1 || params.d_max < 0) throw Error(ErrorCode::DomainError, "truncation must be positive");

    const auto parts = partitions(k, r);
    double planned = 0;
    for (const auto& p : parts) {
        const auto layout = detail::free_layout(p);
        planned += params.s_max * std::pow(2.0 * params.d_max + 1, static_cast<double>(layout.free.size()));
    }
    if (planned > params.term_budget) {
        throw Error(ErrorCode::CombinatorialBudgetExceeded,
                    "truncation would enumerate " + std::to_string(planned) + " matrices; lower s_max/d_max");
    }

    BetaEstimate est;
    std::vector<detail::PoolTerm> pool;
    std::vector<std::int16_t> store;  // per pool term: r x (k - r) mu-column entries, column-major
    const int mu_count = k - r;
    double exact = 0;

    for (const auto& p : parts) {
        const auto layout = detail::free_layout(p);
        for (int s = 1; s <= params.s_max; ++s) {
            const double s_pow = detail::pow_int(static_cast<double>(s), n);
            detail::for_each_free_assignment(p, layout, s, params.d_max, params.allow_zero_columns,
                                             [&](const std::vector<int>& e) {
                ++est.terms;
                // mu-column entries, column-major
                std::vector<int> mu_entries(static_cast<std::size_t>(r * mu_count), 0);
                for (std::size_t i = 0; i < layout.free.size(); ++i) {
                    const int row = layout.free[i].first;
                    const int colpos = static_cast<int>(std::find(layout.mu_cols.begin(), layout.mu_cols.end(),
                                                                  layout.free[i].second) - layout.mu_cols.begin());
                    mu_entries[static_cast<std::size_t>(colpos * r + row)] = e[i];
                }
                double weight;
                if (r == 1) {
                    weight = 1.0 / s_pow;  // eps_1 = 1 by coprimality, so e_1 = 1
                } else {
                    std::vector<std::int64_t> full(static_cast<std::size_t>(r * k), 0);
                    for (int i = 0; i < r; ++i) full[static_cast<std::size_t>(i * k + p.nu[static_cast<std::size_t>(i)] - 1)] = s;
                    for (int c = 0; c < mu_count; ++c)
                        for (int i = 0; i < r; ++i)
                            full[static_cast<std::size_t>(i * k + layout.mu_cols[static_cast<std::size_t>(c)])] =
                                mu_entries[static_cast<std::size_t>(c * r + i)];
                    const auto eps = detail::small_elementary_divisors(full, r, k);
                    double ratio = 1;
                    for (std::int64_t x : eps) ratio *= static_cast<double>(detail::gcd_pair(x, s)) / s;
                    weight = detail::pow_int(ratio, n);
                }
                // classify columns: single-entry columns factorise onto their row
                std::vector<double> row_factor(static_cast<std::size_t>(r), 1.0);
                bool factorises = true;
                int best_row = 0, best_col = -1;
                int best_abs = 0;
                for (int c = 0; c < mu_count; ++c) {
                    int nonzero = 0, row = 0;
                    for (int i = 0; i < r; ++i) {
                        const int v = mu_entries[static_cast<std::size_t>(c * r + i)];
                        if (v != 0) {
                            ++nonzero;
                            row = i;
                            if (std::abs(v) > best_abs) {
                                best_abs = std::abs(v);
                                best_row = i;
                                best_col = c;
                            }
                        }
                    }
                    if (nonzero == 1) {
                        const double ratio = static_cast<double>(s) / std::abs(mu_entries[static_cast<std::size_t>(c * r + row)]);
                        row_factor[static_cast<std::size_t>(row)] =
                            std::min(row_factor[static_cast<std::size_t>(row)], std::min(1.0, detail::pow_int(ratio, n)));
                    } else if (nonzero > 1) {
                        factorises = false;
                    }
                }
                if (factorises) {
                    double integral = 1;
                    for (double fct : row_factor) integral *= fct;
                    exact += weight * integral;
                    return;
                }
                detail::PoolTerm t;
                t.s = s;
                t.offset = store.size();
                const double ratio = static_cast<double>(s) / best_abs;
                if (ratio < 1) {
                    t.radius = ratio;
                    t.pivot_row = best_row;
                    t.pivot_col = best_col;
                    t.mass = weight * detail::pow_int(ratio, n);
                } else {
                    t.mass = weight;
                }
                for (int v : mu_entries) store.push_back(static_cast<std::int16_t>(v));
                pool.push_back(t);
            });
        }
    }
    est.exact_part = exact;
    est.mc_terms = pool.size();

    if (!pool.empty()) {
        std::vector<double> cumulative(pool.size());
        double total = 0;
        for (std::size_t i = 0; i < pool.size(); ++i) cumulative[i] = (total += pool[i].mass);
        Rng rng = make_rng(params.seed, static_cast<std::uint64_t>(1000 * n + 100 * k + r));
        std::vector<RealVector> x(static_cast<std::size_t>(r));
        RealVector acc(n);
        std::size_t hits = 0;
        const std::size_t samples = std::max<std::size_t>(1, params.mc_samples);
        for (std::size_t draw = 0; draw < samples; ++draw) {
            const double u = uniform01(rng) * total;
            auto idx = static_cast<std::size_t>(std::upper_bound(cumulative.begin(), cumulative.end(), u) - cumulative.begin());
            idx = std::min(idx, pool.size() - 1);
            const detail::PoolTerm& t = pool[idx];
            const std::int16_t* ent = store.data() + t.offset;
            const double s2 = static_cast<double>(t.s) * t.s * (1 + 1e-12);
            for (int i = 0; i < r; ++i)
                if (t.pivot_col < 0 || i != t.pivot_row) x[static_cast<std::size_t>(i)] = uniform_in_ball(n, 1.0, rng);
            if (t.pivot_col >= 0) {
                // x_pivot uniform in the ball where the pivot column constraint holds
                const double dp = ent[t.pivot_col * r + t.pivot_row];
                RealVector center = RealVector::Zero(n);
                for (int i = 0; i < r; ++i)
                    if (i != t.pivot_row && ent[t.pivot_col * r + i] != 0)
                        center -= (ent[t.pivot_col * r + i] / dp) * x[static_cast<std::size_t>(i)];
                x[static_cast<std::size_t>(t.pivot_row)] = center + uniform_in_ball(n, t.radius, rng);
                if (x[static_cast<std::size_t>(t.pivot_row)].squaredNorm() > 1 + 1e-12) continue;
            }
            bool inside = true;
            for (int c = 0; c < mu_count && inside; ++c) {
                if (c == t.pivot_col) continue;
                acc.setZero();
                for (int i = 0; i < r; ++i)
                    if (ent[c * r + i] != 0) acc += static_cast<double>(ent[c * r + i]) * x[static_cast<std::size_t>(i)];
                inside = acc.squaredNorm() <= s2;
            }
            if (inside) ++hits;
        }
        const double p = static_cast<double>(hits) / static_cast<double>(samples);
        est.mc_part = total * p;
        est.mc_stderr = total * std::sqrt(p * (1 - p) / static_cast<double>(samples));
    }
    est.value = est.exact_part + est.mc_part;

    double tail = 0;
    for (const auto& p : parts) {
        const auto layout = detail::free_layout(p);
        if (layout.has_forced_zero_column && !params.allow_zero_columns) continue;
        tail += detail::envelope_tail(n, static_cast<int>(layout.free.size()), params.s_max, params.d_max,
                                      params.allow_zero_columns);
    }
    est.truncation_bound = tail;
    est.truncation_rigorous = r == 1 && std::isfinite(tail);
    est.truncation_note = r == 1 ? "rigorous envelope: sum of max(s,|d|)^{-n} over discarded terms"
                                 : "heuristic: envelope assumes weight <= s^{-n} and a one-constraint volume bound";
    est.error = 3 * est.mc_stderr + tail;
    return est;
}

// --------------------------------------------------------------- polynomials

struct MomentPolynomial {
    int n = 0;
    int k = 0;
    std::vector<double> coefficients;        // index = degree, 0..k
    std::vector<double> coefficient_errors;

    double operator()(double t) const {
        double v = 0;
        for (std::size_t i = coefficients.size(); i-- > 0;) v = v * t + coefficients[i];
        return v;
    }

    /// Evaluation with every coefficient raised by its error.
    double upper(double t) const {
        double v = 0;
        for (std::size_t i = coefficients.size(); i-- > 0;) v = v * t + coefficients[i] + coefficient_errors[i];
        return v;
    }
};

/// P_{n,k}(T) = T^k + sum_{r=1}^{k-1} beta_{n,k,r}(1) T^r.
inline MomentPolynomial moment_polynomial(int n, int k, const TruncationParams& params,
                                          std::vector<BetaEstimate>* details = nullptr) {
    if (k < 2 || k > n - 1) throw Error(ErrorCode::BadOrder, "moment polynomial needs 2 <= k <= n-1");
    MomentPolynomial p{n, k, std::vector<double>(static_cast<std::size_t>(k) + 1, 0.0),
                       std::vector<double>(static_cast<std::size_t>(k) + 1, 0.0)};
    p.coefficients[static_cast<std::size_t>(k)] = 1.0;
    for (int r = 1; r <= k - 1; ++r) {
        const BetaEstimate b = beta_coefficient(n, k, r, params);
        p.coefficients[static_cast<std::size_t>(r)] = b.value;
        p.coefficient_errors[static_cast<std::size_t>(r)] = b.error;
        if (details) details->push_back(b);
    }
    return p;
}

/// Q_{n,k}(T) = zeta(n)^{-k} T^k - T^k + P_{n,k}(T).
inline MomentPolynomial q_polynomial(int n, int k, const MomentPolynomial& p) {
    if (p.n != n || p.k != k) throw Error(ErrorCode::BadOrder, "polynomial does not match (n, k)");
    MomentPolynomial q = p;
    q.coefficients[static_cast<std::size_t>(k)] = std::pow(zeta(n), -k);
    return q;
}

/// Phi_n(t) = [zeta(n)^{-(n-1)} t^{n-1} / Q_{n,n-1}(t)]^{n-2}.
inline double phi(int n, double t, const MomentPolynomial& q) {
    if (q.n != n || q.k != n - 1) throw Error(ErrorCode::BadOrder, "phi needs Q_{n,n-1}");
    if (!(t > 0)) throw Error(ErrorCode::DomainError, "phi needs t > 0");
    const double lead = std::pow(zeta(n), -(n - 1)) * std::pow(t, n - 1);
    return std::pow(lead / q(t), n - 2);
}

/// Sum of the non-leading coefficients of [zeta(n)^{n-1} Q_{n,n-1}(T)]^{n-2}.
inline double omega(int n, const MomentPolynomial& q) {
    if (q.n != n || q.k != n - 1) throw Error(ErrorCode::BadOrder, "omega needs Q_{n,n-1}");
    const double scale = std::pow(zeta(n), n - 1);
    std::vector<double> base(q.coefficients.size());
    for (std::size_t i = 0; i < base.size(); ++i) base[i] = scale * q.coefficients[i];
    std::vector<double> power{1.0};
    for (int e = 0; e < n - 2; ++e) {
        std::vector<double> next(power.size() + base.size() - 1, 0.0);
        for (std::size_t i = 0; i < power.size(); ++i)
            for (std::size_t j = 0; j < base.size(); ++j) next[i + j] += power[i] * base[j];
        power = std::move(next);
    }
    double sum = 0;
    for (std::size_t i = 0; i + 1 < power.size(); ++i) sum += power[i];
    return sum;
}

}  // namespace geonum
