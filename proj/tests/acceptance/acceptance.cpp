// Acceptance suite: twelve criteria, one [PASS]/[FAIL] line each.
//
// Usage: geonum_acceptance [config_dir]
// Exit status is 0 iff every criterion passes.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "geonum/geonum.hpp"
#include "oracles.hpp"

using namespace geonum;
using namespace geonum::harness;

namespace {

std::string config_dir = GEONUM_CONFIG_DIR;

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

ExperimentResult run(const std::string& name, std::size_t threads = 1) {
    return run_experiment(load_experiment(config_dir + "/" + name), threads);
}

const ResultRecord& find(const ExperimentResult& r, const std::string& stat, std::optional<double> t = std::nullopt) {
    for (const auto& rec : r.records)
        if (rec.statistic == stat && (!t || (rec.t && std::abs(*rec.t - *t) < 1e-9))) return rec;
    throw Error(ErrorCode::DomainError, "no record " + stat);
}

std::string describe(const ResultRecord& r) {
    std::string s = r.statistic;
    if (r.t) s += fmt("(t=%g)", *r.t);
    s += fmt(" %.5g", r.estimate);
    if (r.standard_error > 0) s += fmt(" +- %.3g", r.standard_error);
    if (r.theory) s += fmt(" vs %.5g", *r.theory);
    return s;
}

// Variance over standard error squared, pooled over the chains of `config`.
double effective_samples(const ChainConfig& config, const Region& a, bool primitive, std::size_t batches) {
    const auto chains = sample_series(config, 1, [&](const UnimodularLattice& l) {
        return static_cast<double>(primitive ? primitive_count(a, l) : siegel_count(a, l));
    });
    std::vector<double> all;
    for (const auto& c : chains) all.insert(all.end(), c.begin(), c.end());
    const double se = pooled_batch_se(chains, batches);
    return variance(all) / (se * se);
}

UnimodularLattice random_lattice(std::mt19937_64& rng, int n) {
    Rng r(rng());
    UnimodularLattice l = UnimodularLattice::standard(n);
    for (int i = 0; i < 10; ++i) l = mcmc_step(l, 0.5, r);
    return l;
}

Outcome exact_oracles() {
    std::mt19937_64 rng(2024);
    std::size_t snf_fail = 0, enum_fail = 0, tuple_fail = 0, tuples = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const int rows = 1 + static_cast<int>(rng() % 4), cols = 1 + static_cast<int>(rng() % 4);
        const auto m = oracle::random_rows(rng, rows, cols, 9);
        const IntMatrix im = IntMatrix::from_rows(m);
        const SmithForm f = smith_normal_form(im);
        const auto expected = oracle::invariant_factors(m);
        bool ok = f.divisors.size() == expected.size() && f.U.is_unimodular() && f.V.is_unimodular() &&
                  f.U * im * f.V == f.diagonal;
        Integer prod = 1;
        for (std::size_t i = 0; ok && i < expected.size(); ++i) {
            ok = f.divisors[i] == expected[i] && (i == 0 || f.divisors[i] % f.divisors[i - 1] == 0);
            prod *= f.divisors[i];
        }
        if (ok && rows == cols) ok = (f.rank() == static_cast<std::size_t>(rows)) == (oracle::det_small(m) != 0) &&
                                     (f.rank() < static_cast<std::size_t>(rows) || prod == std::abs(oracle::det_small(m)));
        if (!ok) ++snf_fail;
    }
    std::uniform_real_distribution<double> radius(0.5, 3.0);
    for (int trial = 0; trial < 100; ++trial) {
        const int n = 2 + trial % 3;
        const auto l = random_lattice(rng, n);
        const double r = radius(rng);
        oracle::Rows got;
        for (const auto& p : enumerate_nonzero_in_radius(l, r)) got.push_back(p.c);
        if (got != oracle::brute_force_enumeration(l.basis(), r)) ++enum_fail;
    }
    for (int n = 2; n <= 3; ++n)
        for (int k = 1; k <= 2; ++k)
            for (int trial = 0; trial < 100; ++trial) {
                const auto rows = oracle::random_rows(rng, k, n, 3);
                bool zero_row = false;
                for (const auto& row : rows) zero_row = zero_row || std::all_of(row.begin(), row.end(), [](auto x) { return x == 0; });
                if (zero_row) continue;
                ++tuples;
                if (is_primitive_coefficients(rows) != oracle::completes_to_unimodular(rows, n - k == 2 ? 2 : 6)) ++tuple_fail;
            }
    return {snf_fail + enum_fail + tuple_fail == 0,
            fmt("SNF 1000 cases, %zu failed; enumeration 100 lattices, %zu failed; tuple criterion %zu cases, %zu failed",
                snf_fail, enum_fail, tuples, tuple_fail)};
}

Outcome siegel_exact_n2() {
    const auto all = run("c02_siegel_n2.toml"), pr = run("c02_primitive_n2.toml");
    const auto& a = find(all, "siegel", 20.0);
    const auto& p = find(pr, "siegel_pr", 20.0);
    return {a.pass && p.pass && a.samples >= 20000, describe(a) + "; " + describe(p)};
}

Outcome siegel_mcmc_n3() {
    const auto all = run("c03_siegel_n3.toml"), pr = run("c03_primitive_n3.toml");
    const auto& a = find(all, "siegel", 10.0);
    const auto& p = find(pr, "siegel_pr", 10.0);
    const auto spec = load_experiment(config_dir + "/c03_siegel_n3.toml");
    const double neff = std::min(effective_samples(spec.sampler, spec.regions[0], false, spec.batches),
                                 effective_samples(spec.sampler, spec.regions[0], true, spec.batches));
    return {a.pass && p.pass && neff >= 1e4, describe(a) + "; " + describe(p) + fmt("; effective samples %.0f", neff)};
}

Outcome independent_pairs_n4() {
    const auto r = run("c04_independent_pairs_n4.toml");
    const auto& p = find(r, "tilde_k_pr:2", 5.0);
    return {p.pass, describe(p) + "; " + describe(find(r, "tilde_k:2", 5.0))};
}

Outcome primitive_pairs_n5() {
    const auto r = run("c05_primitive_pairs_n5.toml");
    const auto& p = find(r, "pr_tuples:2", 4.0);
    return {p.pass, describe(p)};
}

Outcome variance_rate_n3() {
    const auto r = run("c06_variance_rate_n3.toml");
    const auto& s = find(r, "pr_tuples_var_slope:1");
    std::string d = describe(s) + "; variances";
    for (double t : {5.0, 10.0, 20.0, 40.0}) d += fmt(" %.4g", find(r, "pr_tuples_var:1", t).estimate);
    return {s.pass && s.estimate >= 0.8 && s.estimate <= 1.2, d};
}

Outcome rogers_cross_check() {
    const auto spec = load_experiment(config_dir + "/c07_second_moment_n3.toml");
    const auto r = run_experiment(spec);
    const auto& sq = find(r, "siegel_sq", 5.0);
    const BetaEstimate beta = beta_coefficient(3, 2, 1, spec.rogers);
    const double predicted = 25 + 5 * beta.value;
    const double slack = 3 * sq.standard_error + 5 * beta.truncation_bound;
    const bool ok = spec.rogers.s_max == 50 && spec.rogers.d_max == 50 && beta.truncation_rigorous && beta.mc_terms == 0 &&
                    std::abs(sq.estimate - predicted) <= slack && sq.pass;
    return {ok, fmt("E[N^2] %.4g +- %.3g vs 25 + 5 * %.5f = %.4g, allowed %.3g (truncation bound %.4f)", sq.estimate,
                    sq.standard_error, beta.value, predicted, slack, 5 * beta.truncation_bound)};
}

Outcome beta_at_least_one() {
    bool ok = true;
    std::string d;
    for (auto [n, k] : {std::pair{3, 2}, std::pair{4, 2}, std::pair{4, 3}}) {
        const BetaEstimate b = beta_coefficient(n, k, k - 1, TruncationParams{});
        ok = ok && b.value >= 1 - b.error;
        d += fmt("%sbeta(%d,%d,%d) = %.4f (error %.3g)", d.empty() ? "" : "; ", n, k, k - 1, b.value, b.error);
    }
    return {ok, d};
}

Outcome box_moment_bound() {
    const auto r = run("c09_box_moment_n3.toml");
    const auto& m = find(r, "moment_pr:2", 10.0);
    return {m.pass, describe(m)};
}

Outcome tail_decay() {
    const auto r = run("c10_tail_decay_n3.toml");
    const auto& slope = find(r, "card_pr_le2_slope");
    const auto& trend = find(r, "card_pr_le2_trend");
    // the trend record holds the slope of log(p_t t), i.e. the fitted slope plus one
    std::string d = fmt("slope %.3f +- %.3f; slope of log(p_t t) %.3f; constant %.3f; p_t", slope.estimate,
                        slope.standard_error, trend.estimate, find(r, "card_pr_le2_constant").estimate);
    for (double t : {10.0, 20.0, 40.0, 80.0}) d += fmt(" %.4g", find(r, "card_pr_le2", t).estimate);
    return {slope.pass && trend.pass, d};
}

Outcome span_lower_bound() {
    const auto r = run("c11_span_bound_n3.toml");
    bool ok = true;
    std::string d;
    for (double t : {5.0, 20.0}) {
        const auto& th = find(r, "theta:1", t);
        ok = ok && th.pass;
        d += (d.empty() ? "" : "; ") + describe(th);
    }
    return {ok, d};
}

Outcome determinism() {
    const auto spec = load_experiment(config_dir + "/c12_determinism.toml");
    const auto dir = std::filesystem::temp_directory_path() / "geonum_acceptance";
    std::filesystem::create_directories(dir);
    auto produce = [&](std::size_t threads, const std::string& tag) {
        const auto r = run_experiment(spec, threads);
        const std::string base = (dir / tag).string();
        write_csv(r.records, base + ".csv");
        write_json(r.records, base + ".json", r.metadata);
        std::ifstream c(base + ".csv", std::ios::binary), j(base + ".json", std::ios::binary);
        std::stringstream s;
        s << c.rdbuf() << j.rdbuf();
        return s.str();
    };
    const std::string a = produce(1, "t1a"), b = produce(1, "t1b"), c = produce(8, "t8");
    std::filesystem::remove_all(dir);
    return {a == b && a == c && !a.empty(), fmt("%zu bytes; rerun identical: %s; 8 threads identical: %s", a.size(),
                                                a == b ? "yes" : "no", a == c ? "yes" : "no")};
}

struct Criterion {
    const char* title;
    double limit_seconds;  // 0: no runtime requirement
    std::function<Outcome()> check;
};

}  // namespace

int main(int argc, char** argv) {
    if (argc > 1) config_dir = argv[1];
    const std::vector<Criterion> criteria{
        {"exact oracle suite", 120, exact_oracles},
        {"Siegel and primitive means, exact sampler n=2", 60, siegel_exact_n2},
        {"Siegel and primitive means, random walk n=3", 300, siegel_mcmc_n3},
        {"independent primitive pairs n=4", 600, independent_pairs_n4},
        {"primitive pairs n=5", 600, primitive_pairs_n5},
        {"variance growth rate n=3", 0, variance_rate_n3},
        {"second moment vs truncated P_{3,2}", 0, rogers_cross_check},
        {"beta_{n,k,k-1}(1) >= 1", 0, beta_at_least_one},
        {"box second moment <= Q_{3,2}(10)", 0, box_moment_bound},
        {"tail decay of P(card <= 2)", 0, tail_decay},
        {"span probability >= Phi_3(t)", 0, span_lower_bound},
        {"byte-identical output at 1 and 8 threads", 0, determinism},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[i].check();
        } catch (const std::exception& e) {
            o = {false, std::string("error: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (criteria[i].limit_seconds > 0 && secs > criteria[i].limit_seconds) {
            o.pass = false;
            o.detail += fmt("; runtime over %.0f s", criteria[i].limit_seconds);
        }
        if (!o.pass) ++failed;
        std::printf("[%s] C%zu %s: %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].title, o.detail.c_str(), secs);
        std::fflush(stdout);
    }
    std::printf("%zu of %zu criteria passed\n", criteria.size() - static_cast<std::size_t>(failed), criteria.size());
    return failed == 0 ? 0 : 1;
}
