#pragma once

// Experiments E1-E8: sample lattices, evaluate per-region observables, and
// turn the per-chain series into result records.
//
// Standard errors are batch means pooled over chains. Proportions carry Wilson
// intervals at the effective sample size implied by that standard error.
// Decay fits use Jeffreys-smoothed proportions and only regions with a
// positive count.

#include <cmath>
#include <cstdint>
#include <deque>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "geonum/harness/config.hpp"
#include "geonum/harness/report.hpp"
#include "geonum/lattice.hpp"
#include "geonum/rogers.hpp"
#include "geonum/sampler.hpp"
#include "geonum/siegel.hpp"
#include "geonum/stats.hpp"

namespace geonum::harness {

struct ExperimentResult {
    std::vector<ResultRecord> records;
    nlohmann::ordered_json metadata;
};

namespace detail {

struct Observable {
    std::string name;
    std::function<double(const PointSet&)> eval;
};

struct Summary {
    double mean = 0;
    double se = 0;
    std::uint64_t samples = 0;
};

inline Summary summarize(const std::vector<std::vector<double>>& chains, std::size_t batches) {
    CompensatedSum total;
    std::uint64_t count = 0;
    for (const auto& c : chains)
        for (double x : c) {
            total.add(x);
            ++count;
        }
    return Summary{total.value() / static_cast<double>(count), pooled_batch_se(chains, batches), count};
}

/// Unbiased variance of the pooled series and the batch-means error of the squared deviations.
inline Summary summarize_variance(const std::vector<std::vector<double>>& chains, std::size_t batches) {
    const Summary m = summarize(chains, batches);
    std::vector<std::vector<double>> dev(chains.size());
    for (std::size_t c = 0; c < chains.size(); ++c)
        for (double x : chains[c]) dev[c].push_back((x - m.mean) * (x - m.mean));
    Summary v = summarize(dev, batches);
    const double bessel = static_cast<double>(m.samples) / static_cast<double>(m.samples - 1);
    v.mean *= bessel;
    v.se *= bessel;
    return v;
}

inline double effective_size(double p, double se, std::uint64_t samples) {
    const auto n = static_cast<double>(samples);
    if (!(se > 0) || p <= 0 || p >= 1) return n;
    return std::min(n, p * (1 - p) / (se * se));
}

struct DecayFit {
    std::optional<LineFit> fit;
    std::size_t used = 0;
};

// Fit of log p~ against log t, p~ = (x + 1/2) / (N_eff + 1), weights N_eff p~ / (1 - p~).
inline DecayFit decay_fit(const std::vector<double>& ts, const std::vector<Summary>& ps) {
    std::vector<double> x, y, w;
    for (std::size_t i = 0; i < ts.size(); ++i) {
        const double neff = effective_size(ps[i].mean, ps[i].se, ps[i].samples);
        const double hits = ps[i].mean * neff;
        if (!(ps[i].mean > 0)) continue;
        const double smoothed = (hits + 0.5) / (neff + 1);
        x.push_back(std::log(ts[i]));
        y.push_back(std::log(smoothed));
        w.push_back(neff * smoothed / (1 - smoothed));
    }
    DecayFit out;
    out.used = x.size();
    if (x.size() >= 2) out.fit = weighted_line_fit(x, y, w);
    return out;
}

}  // namespace detail

/// Runs one experiment. Output depends only on the spec, never on `threads`.
inline ExperimentResult run_experiment(const ExperimentSpec& spec, std::size_t threads = 1) {
    spec.validate();
    const int n = spec.n;
    const double zn = zeta(n);
    const double c = spec.confidence;
    const std::string id = to_string(spec.id);
    const CountOptions limits = spec.limits;

    // observables evaluated on every region
    std::vector<detail::Observable> obs;
    switch (spec.id) {
    case ExperimentId::E1:
        obs.push_back({"siegel", [](const PointSet& s) { return static_cast<double>(siegel_count(s)); }});
        break;
    case ExperimentId::E2:
        obs.push_back({"siegel_pr", [](const PointSet& s) { return static_cast<double>(primitive_count(s)); }});
        break;
    case ExperimentId::E3: {
        const int k = *spec.k;
        obs.push_back({"tilde_k:" + std::to_string(k), [k, limits](const PointSet& s) {
                           return static_cast<double>(independent_tuple_count(s, k, false, limits));
                       }});
        obs.push_back({"tilde_k_pr:" + std::to_string(k), [k, limits](const PointSet& s) {
                           return static_cast<double>(independent_tuple_count(s, k, true, limits));
                       }});
        break;
    }
    case ExperimentId::E4: {
        const int l = *spec.ell;
        obs.push_back({"pr_tuples:" + std::to_string(l), [l, limits](const PointSet& s) {
                           return static_cast<double>(primitive_ktuple_count(s, l, limits));
                       }});
        break;
    }
    case ExperimentId::E5: {
        const int k = n - 2;
        obs.push_back({"omega:" + std::to_string(k), [k, limits](const PointSet& s) {
                           return span_dim_primitive(s, limits) < k ? 1.0 : 0.0;
                       }});
        break;
    }
    case ExperimentId::E6: {
        const int l = *spec.ell;
        obs.push_back({"pr_tuples:" + std::to_string(l), [l, limits](const PointSet& s) {
                           return static_cast<double>(primitive_ktuple_count(s, l, limits));
                       }});
        obs.push_back({"tilde_k_pr:" + std::to_string(n - 2), [n, limits](const PointSet& s) {
                           return static_cast<double>(independent_tuple_count(s, n - 2, true, limits));
                       }});
        obs.push_back({"siegel_sq", [](const PointSet& s) {
                           const auto v = static_cast<double>(siegel_count(s));
                           return v * v;
                       }});
        break;
    }
    case ExperimentId::E7: {
        const int k = *spec.k;
        obs.push_back({"moment_pr:" + std::to_string(k), [k](const PointSet& s) {
                           return std::pow(static_cast<double>(primitive_count(s)), k);
                       }});
        break;
    }
    case ExperimentId::E8:
        obs.push_back({"card_pr_le2", [](const PointSet& s) { return primitive_count(s) <= 2 ? 1.0 : 0.0; }});
        break;
    }

    const std::size_t nreg = spec.regions.size(), nobs = obs.size();
    // per chain: series[region * nobs + observable][sample]
    const auto per_chain = for_each_chain(spec.sampler.chain_count, threads, [&](std::size_t ch) {
        Chain chain(spec.sampler, chain_seed(spec.sampler, ch));
        std::vector<std::vector<double>> series(nreg * nobs);
        for (auto& s : series) s.reserve(spec.sampler.samples_per_chain);
        for (std::size_t i = 0; i < spec.sampler.samples_per_chain; ++i) {
            const UnimodularLattice lattice = chain.next();
            for (std::size_t r = 0; r < nreg; ++r) {
                const PointSet set = collect_points(spec.regions[r], lattice, limits);
                for (std::size_t o = 0; o < nobs; ++o) series[r * nobs + o].push_back(obs[o].eval(set));
            }
        }
        return series;
    });
    auto chains_of = [&](std::size_t r, std::size_t o) {
        std::vector<std::vector<double>> out;
        out.reserve(per_chain.size());
        for (const auto& ch : per_chain) out.push_back(ch[r * nobs + o]);
        return out;
    };

    ExperimentResult result;
    std::deque<ResultRecord> records;  // stable references while appending
    const std::uint64_t total = spec.sampler.chain_count * spec.sampler.samples_per_chain;
    auto record = [&](std::string stat, std::optional<double> t, double est, double se) -> ResultRecord& {
        ResultRecord r;
        r.experiment = id;
        r.statistic = std::move(stat);
        r.n = n;
        r.t = t;
        r.estimate = est;
        r.standard_error = se;
        r.samples = total;
        r.seed = spec.sampler.seed;
        records.push_back(std::move(r));
        return records.back();
    };
    // theory with an uncertain region volume: widen the slack by the volume error
    auto with_volume_error = [&](ResultRecord& r, double theory_sd) {
        if (theory_sd > 0) r.tolerance = c * std::sqrt(r.standard_error * r.standard_error + theory_sd * theory_sd);
    };
    auto proportion_ci = [&](ResultRecord& r, const detail::Summary& s) {
        const Interval ci = wilson_interval(s.mean, detail::effective_size(s.mean, s.se, s.samples), c);
        r.ci_low = ci.low;
        r.ci_high = ci.high;
    };

    nlohmann::ordered_json rogers_meta;
    auto rogers_polynomial = [&](int k) {
        std::vector<BetaEstimate> details;
        MomentPolynomial p = moment_polynomial(n, k, spec.rogers, &details);
        nlohmann::ordered_json j;
        j["k"] = k;
        j["coefficients"] = p.coefficients;
        j["errors"] = p.coefficient_errors;
        nlohmann::ordered_json notes = nlohmann::ordered_json::array();
        for (const auto& b : details) notes.push_back(b.truncation_note);
        j["truncation"] = notes;
        rogers_meta.push_back(j);
        return p;
    };

    switch (spec.id) {
    case ExperimentId::E1:
    case ExperimentId::E2: {
        const double scale = spec.id == ExperimentId::E1 ? 1.0 : 1.0 / zn;
        for (std::size_t r = 0; r < nreg; ++r) {
            const Region& a = spec.regions[r];
            const auto s = detail::summarize(chains_of(r, 0), spec.batches);
            auto& rec = record(obs[0].name, a.volume(), s.mean, s.se);
            rec.theory = scale * a.volume();
            rec.relation = Relation::Equal;
            with_volume_error(rec, scale * a.volume_error() / 3);
        }
        break;
    }
    case ExperimentId::E3: {
        const int k = *spec.k;
        for (std::size_t r = 0; r < nreg; ++r) {
            const Region& a = spec.regions[r];
            const double m = a.volume();
            const double sd = k * std::pow(m, k - 1) * a.volume_error() / 3;
            for (std::size_t o = 0; o < 2; ++o) {
                const double scale = o == 0 ? 1.0 : std::pow(zn, -k);
                const auto s = detail::summarize(chains_of(r, o), spec.batches);
                auto& rec = record(obs[o].name, m, s.mean, s.se);
                rec.theory = scale * std::pow(m, k);
                rec.relation = Relation::Equal;
                with_volume_error(rec, scale * sd);
            }
        }
        break;
    }
    case ExperimentId::E4: {
        const int l = *spec.ell;
        const double th = theta(n, l);
        std::vector<double> xs, ys, ws;
        for (std::size_t r = 0; r < nreg; ++r) {
            const Region& a = spec.regions[r];
            const double m = a.volume();
            const auto chains = chains_of(r, 0);
            const auto s = detail::summarize(chains, spec.batches);
            auto& rec = record(obs[0].name, m, s.mean, s.se);
            rec.theory = th * std::pow(m, l);
            rec.relation = Relation::Equal;
            with_volume_error(rec, th * l * std::pow(m, l - 1) * a.volume_error() / 3);

            const auto v = detail::summarize_variance(chains, spec.batches);
            auto& vrec = record("pr_tuples_var:" + std::to_string(l), m, v.mean, v.se);
            vrec.note = "second central moment; no closed form asserted";
            if (v.mean > 0 && v.se > 0) {
                xs.push_back(std::log(m));
                ys.push_back(std::log(v.mean));
                ws.push_back((v.mean / v.se) * (v.mean / v.se));
            }
        }
        if (nreg >= 2) {
            auto& rec = record("pr_tuples_var_slope:" + std::to_string(l), std::nullopt, 0, 0);
            rec.theory = 2.0 * l - 1;
            rec.relation = Relation::Equal;
            rec.tolerance = spec.tolerances.variance_slope;
            if (xs.size() >= 2) {
                const LineFit f = weighted_line_fit(xs, ys, ws);
                rec.estimate = f.slope;
                rec.standard_error = f.slope_se;
                rec.note = "log-log slope of variance against volume; constant exp(intercept) = " +
                           format_double(std::exp(f.intercept));
            } else {
                rec.estimate = std::nan("");
                rec.note = "fewer than two regions with positive variance";
            }
        }
        break;
    }
    case ExperimentId::E5: {
        const int k = n - 2;
        const MomentPolynomial q = q_polynomial(n, n - 1, rogers_polynomial(n - 1));
        const double om = omega(n, q);
        std::vector<double> ts;
        std::vector<detail::Summary> ps;
        for (std::size_t r = 0; r < nreg; ++r) {
            const double m = spec.regions[r].volume();
            const auto s = detail::summarize(chains_of(r, 0), spec.batches);
            const double ph = phi(n, m, q);
            ts.push_back(m);
            ps.push_back(s);

            auto& orec = record(obs[0].name, m, s.mean, s.se);
            orec.theory = 1 - ph;
            orec.relation = Relation::AtMost;
            proportion_ci(orec, s);

            auto& trec = record("theta:" + std::to_string(k), m, 1 - s.mean, s.se);
            trec.theory = ph;
            trec.relation = Relation::AtLeast;
            const auto ci = wilson_interval(1 - s.mean, detail::effective_size(s.mean, s.se, s.samples), c);
            trec.ci_low = ci.low;
            trec.ci_high = ci.high;

            auto& srec = record("omega_scaled:" + std::to_string(k), m, s.mean * m, s.se * m);
            srec.theory = om;
            srec.relation = Relation::AtMost;
        }
        auto& rec = record("omega_slope:" + std::to_string(k), std::nullopt, 0, 0);
        const auto fit = detail::decay_fit(ts, ps);
        if (fit.fit) {
            rec.estimate = fit.fit->slope;
            rec.standard_error = fit.fit->slope_se;
            rec.theory = spec.tolerances.decay_slope_max;
            rec.relation = Relation::AtMost;
            rec.tolerance = 0.0;
        } else {
            rec.estimate = std::nan("");
            rec.note = "fewer than two regions with a positive count; decay not fitted";
        }
        break;
    }
    case ExperimentId::E6: {
        const int l = *spec.ell;
        const double th = theta(n, l);
        const double lead = std::pow(zn, -(n - 2));
        const MomentPolynomial p2 = rogers_polynomial(2);
        std::vector<double> xs, ys;
        for (std::size_t r = 0; r < nreg; ++r) {
            const double m = spec.regions[r].volume();
            const auto pr = detail::summarize(chains_of(r, 0), spec.batches);
            auto& a = record("pr_tuples_ratio:" + std::to_string(l), m, pr.mean / std::pow(m, l), pr.se / std::pow(m, l));
            a.theory = th;
            a.relation = Relation::Equal;

            const auto nn = detail::summarize(chains_of(r, 1), spec.batches);
            const double scale = std::pow(m, n - 2);
            auto& b = record("tilde_k_pr_ratio:" + std::to_string(n - 2), m, nn.mean / scale, nn.se / scale);
            b.theory = lead;
            b.relation = Relation::Equal;
            if (nn.mean > 0) {
                xs.push_back(std::log(m));
                ys.push_back(std::log(nn.mean));
            }

            const auto sq = detail::summarize(chains_of(r, 2), spec.batches);
            auto& d = record("siegel_sq", m, sq.mean, sq.se);
            d.theory = p2(m);
            d.relation = Relation::Equal;
            double truncation = 0;
            for (std::size_t i = 0; i < p2.coefficient_errors.size(); ++i) truncation += p2.coefficient_errors[i] * std::pow(m, i);
            d.tolerance = c * sq.se + truncation;
            d.note = "theory from the truncated moment polynomial P_{n,2}; tolerance adds its error bound";
        }
        if (xs.size() >= 2) {
            const LineFit f = line_fit(xs, ys);
            auto& g = record("tilde_k_pr_growth:" + std::to_string(n - 2), std::nullopt, f.slope, f.slope_se);
            g.note = "log-log growth of the mean count; the mean identity predicts slope " + std::to_string(n - 2);
        }
        break;
    }
    case ExperimentId::E7: {
        const int k = *spec.k;
        std::optional<MomentPolynomial> q;
        if (k >= 2) q = q_polynomial(n, k, rogers_polynomial(k));
        for (std::size_t r = 0; r < nreg; ++r) {
            const Region& a = spec.regions[r];
            const double m = a.volume();
            const auto s = detail::summarize(chains_of(r, 0), spec.batches);
            auto& rec = record(obs[0].name, m, s.mean, s.se);
            rec.relation = Relation::AtMost;
            if (q) {
                // evaluate at the upper end of the volume and coefficient error bars
                rec.theory = q->upper(m + a.volume_error());
                rec.note = "theory is Q_{n,k}(m(A)) with coefficient and volume errors added";
            } else {
                rec.theory = (m + a.volume_error()) / zn;
            }
        }
        break;
    }
    case ExperimentId::E8: {
        std::vector<double> ts;
        std::vector<detail::Summary> ps;
        double constant = 0;
        for (std::size_t r = 0; r < nreg; ++r) {
            const double m = spec.regions[r].volume();
            const auto s = detail::summarize(chains_of(r, 0), spec.batches);
            ts.push_back(m);
            ps.push_back(s);
            auto& p = record("card_pr_le2", m, s.mean, s.se);
            proportion_ci(p, s);
            record("card_pr_le2_scaled", m, s.mean * m, s.se * m);
            constant = std::max(constant, s.mean * m);
        }
        auto& k = record("card_pr_le2_constant", std::nullopt, constant, 0);
        k.note = "max over regions of p_t * t; empirical stand-in for the existential constant";
        if (nreg >= 2) {
            const auto fit = detail::decay_fit(ts, ps);
            auto& slope = record("card_pr_le2_slope", std::nullopt, 0, 0);
            auto& trend = record("card_pr_le2_trend", std::nullopt, 0, 0);
            if (fit.fit) {
                slope.estimate = fit.fit->slope;
                slope.standard_error = fit.fit->slope_se;
                slope.theory = spec.tolerances.decay_slope_max;
                slope.relation = Relation::AtMost;
                slope.tolerance = 0.0;
                trend.estimate = fit.fit->slope + 1;
                trend.standard_error = fit.fit->slope_se;
                trend.theory = 0.0;
                trend.relation = Relation::AtMost;
                trend.tolerance = spec.tolerances.trend_z * fit.fit->slope_se;
                trend.note = "slope of log(p_t * t); fails only on a significant increase";
            } else {
                slope.estimate = trend.estimate = std::nan("");
                slope.note = trend.note = "fewer than two regions with a positive count; decay not fitted";
            }
        }
        break;
    }
    }

    for (auto& r : records) r.decide(c);
    result.records.assign(records.begin(), records.end());
    sort_records(result.records);

    auto& meta = result.metadata;
    meta["experiment"] = id;
    meta["n"] = n;
    if (spec.k) meta["k"] = *spec.k;
    if (spec.ell) meta["ell"] = *spec.ell;
    meta["confidence"] = c;
    meta["batches_per_chain"] = spec.batches;
    meta["regions"] = nlohmann::ordered_json::array();
    for (const auto& a : spec.regions) meta["regions"].push_back(region_descriptor(a));
    meta["sampler"] = {{"n", spec.sampler.n},
                       {"step_sigma", spec.sampler.step_sigma},
                       {"burn_in", spec.sampler.burn_in},
                       {"thinning", spec.sampler.thinning},
                       {"chain_count", spec.sampler.chain_count},
                       {"samples_per_chain", spec.sampler.samples_per_chain},
                       {"seed", spec.sampler.seed},
                       {"method", n == 2 ? "exact fundamental-domain sampling" : "random walk on SL_n(R), LLL after each step"}};
    if (!rogers_meta.is_null()) {
        meta["rogers"] = {{"s_max", spec.rogers.s_max},
                          {"d_max", spec.rogers.d_max},
                          {"mc_samples", spec.rogers.mc_samples},
                          {"seed", spec.rogers.seed},
                          {"allow_zero_columns", spec.rogers.allow_zero_columns},
                          {"polynomials", rogers_meta}};
    }
    meta["statistical_design"] =
        "sample sizes, batch counts, confidence multiplier and tolerances are choices of this tool; "
        "standard errors are pooled batch means";
    return result;
}

}  // namespace geonum::harness
