// Command-line front end: lattice sampling, experiments, Rogers polynomials, zeta.
//
// Exit status: 0 when every pass flag is true, 2 when an identity check
// fails, 1 on any error.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "geonum/geonum.hpp"

namespace {

int run_sample(const geonum::ChainConfig& config, std::size_t threads, const std::string& out_path) {
    const auto stream = geonum::sample_chain(config, threads);
    std::string text;
    for (const auto& s : stream) text += geonum::lattice_record(s.lattice, s.chain, s.index).dump() + "\n";
    if (out_path == "-") {
        std::cout << text;
    } else {
        geonum::harness::write_text(out_path, text);
    }
    return 0;
}

int run_experiment_cmd(const std::string& config_path, const std::string& prefix, std::size_t threads) {
    const auto spec = geonum::harness::load_experiment(config_path);
    const auto result = geonum::harness::run_experiment(spec, threads);
    geonum::harness::write_csv(result.records, prefix + ".csv");
    geonum::harness::write_json(result.records, prefix + ".json", result.metadata);
    std::size_t failed = 0;
    for (const auto& r : result.records)
        if (!r.pass) {
            ++failed;
            std::cerr << "FAIL " << r.experiment << ' ' << r.statistic << " t="
                      << (r.t ? geonum::harness::format_double(*r.t) : "-") << " estimate="
                      << geonum::harness::format_double(r.estimate) << " theory="
                      << (r.theory ? geonum::harness::format_double(*r.theory) : "-") << '\n';
        }
    std::cerr << result.records.size() << " records, " << failed << " failed\n";
    return failed == 0 ? 0 : 2;
}

int run_rogers(int n, int k, const geonum::TruncationParams& params) {
    const auto p = geonum::moment_polynomial(n, k, params);
    nlohmann::ordered_json j;
    j["n"] = n;
    j["k"] = k;
    j["coefficients"] = p.coefficients;
    j["errors"] = p.coefficient_errors;
    j["s_max"] = params.s_max;
    j["d_max"] = params.d_max;
    j["mc_samples"] = params.mc_samples;
    j["seed"] = params.seed;
    if (params.allow_zero_columns) j["allow_zero_columns"] = true;
    std::cout << j.dump(2) << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"geonum: lattice point statistics over random unimodular lattices"};
    app.require_subcommand(1);
    std::size_t threads = 1;
    app.add_option("--threads", threads, "worker threads (results do not depend on it)")->check(CLI::PositiveNumber);

    geonum::ChainConfig chain;
    std::string sample_out = "-";
    auto* sample = app.add_subcommand("sample", "write a JSONL stream of Haar-random lattices");
    sample->add_option("--n", chain.n, "dimension")->required();
    sample->add_option("--chains", chain.chain_count, "independent chains");
    sample->add_option("--burnin", chain.burn_in, "discarded steps per chain");
    sample->add_option("--thin", chain.thinning, "steps between emitted states");
    sample->add_option("--count", chain.samples_per_chain, "emitted lattices per chain");
    sample->add_option("--sigma", chain.step_sigma, "random-walk step scale");
    sample->add_option("--seed", chain.seed, "master seed");
    sample->add_option("--out", sample_out, "output file, '-' for stdout");

    std::string config_path, prefix;
    auto* experiment = app.add_subcommand("experiment", "run a TOML-configured experiment");
    experiment->add_option("--config", config_path, "experiment TOML file")->required();
    experiment->add_option("--out", prefix, "output prefix for PREFIX.csv and PREFIX.json")->required();

    int rn = 3, rk = 2;
    geonum::TruncationParams tp;
    auto* rogers = app.add_subcommand("rogers-poly", "print the moment polynomial P_{n,k} as JSON");
    rogers->add_option("--n", rn, "dimension")->required();
    rogers->add_option("--k", rk, "moment order")->required();
    rogers->add_option("--smax", tp.s_max, "largest s");
    rogers->add_option("--dmax", tp.d_max, "largest free entry");
    rogers->add_option("--mc", tp.mc_samples, "Monte Carlo samples per coefficient");
    rogers->add_option("--seed", tp.seed, "seed");
    rogers->add_flag("--allow-zero-columns", tp.allow_zero_columns, "admit zero columns in D");

    double zs = 2, ztol = 1e-12;
    auto* zeta_cmd = app.add_subcommand("zeta", "evaluate the Riemann zeta function at real s > 1");
    zeta_cmd->add_option("--s", zs, "argument")->required();
    zeta_cmd->add_option("--tol", ztol, "absolute tolerance");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (*sample) return run_sample(chain, threads, sample_out);
        if (*experiment) return run_experiment_cmd(config_path, prefix, threads);
        if (*rogers) return run_rogers(rn, rk, tp);
        if (*zeta_cmd) {
            std::printf("%.15g\n", geonum::zeta(zs, ztol));
            return 0;
        }
    } catch (const geonum::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
