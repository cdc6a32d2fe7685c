#pragma once

// Experiment descriptions read from TOML. Every table and key is checked;
// errors carry the dotted path of the offending field.

#include <cerrno>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>
#include <toml.hpp>

#include "geonum/error.hpp"
#include "geonum/regions.hpp"
#include "geonum/rogers.hpp"
#include "geonum/sampler.hpp"
#include "geonum/siegel.hpp"

namespace geonum::harness {

enum class ExperimentId { E1 = 1, E2, E3, E4, E5, E6, E7, E8 };

inline std::string to_string(ExperimentId id) { return "E" + std::to_string(static_cast<int>(id)); }

struct Tolerances {
    double variance_slope = 0.2;   // E4: |slope - (2 ell - 1)| bound
    double decay_slope_max = -0.8; // E5, E8: fitted log-log slope must not exceed this
    double trend_z = 1.645;        // E8: one-sided z for an increasing p_t * t trend
};

struct ExperimentSpec {
    ExperimentId id = ExperimentId::E1;
    int n = 3;
    std::vector<Region> regions;
    std::optional<int> k;
    std::optional<int> ell;
    double confidence = 3.0;
    std::size_t batches = 20;  // batch means per chain
    ChainConfig sampler;
    TruncationParams rogers;
    CountOptions limits;
    Tolerances tolerances;

    /// Field-path checks of the experiment-specific hypotheses.
    void validate() const {
        sampler.validate();
        if (sampler.n != n) throw Error(ErrorCode::ConfigError, "sampler.n: differs from experiment.n");
        if (regions.empty()) throw Error(ErrorCode::ConfigError, "experiment.regions: at least one region required");
        for (std::size_t i = 0; i < regions.size(); ++i)
            if (regions[i].dim() != n)
                throw Error(ErrorCode::ConfigError, "experiment.regions[" + std::to_string(i) + "]: dimension differs from n");
        if (!(confidence > 0)) throw Error(ErrorCode::ConfigError, "experiment.confidence: must be positive");
        if (batches < 2) throw Error(ErrorCode::ConfigError, "experiment.batches: must be >= 2");
        if (sampler.samples_per_chain < 2 * batches) {
            throw Error(ErrorCode::ConfigError, "sampler.samples_per_chain: need at least 2 * experiment.batches");
        }
        auto need = [&](const std::optional<int>& v, const char* name) {
            if (!v) throw Error(ErrorCode::ConfigError, std::string("experiment.") + name + ": required for " + to_string(id));
            return *v;
        };
        switch (id) {
        case ExperimentId::E3:
        case ExperimentId::E7: {
            const int kk = need(k, "k");
            if (kk < 1 || kk > n - 1) throw Error(ErrorCode::ConfigError, "experiment.k: must lie in [1, n-1]");
            break;
        }
        case ExperimentId::E4: {
            const int l = need(ell, "ell");
            if (l < 1 || 2 * l > n - 1) throw Error(ErrorCode::ConfigError, "experiment.ell: must lie in [1, (n-1)/2]");
            break;
        }
        case ExperimentId::E6: {
            const int l = need(ell, "ell");
            if (n < 3) throw Error(ErrorCode::ConfigError, "experiment.n: E6 needs n >= 3");
            if (l < 1 || l > n - 1) throw Error(ErrorCode::ConfigError, "experiment.ell: must lie in [1, n-1]");
            break;
        }
        case ExperimentId::E5:
            if (n < 3) throw Error(ErrorCode::ConfigError, "experiment.n: E5 needs n >= 3");
            break;
        default: break;
        }
    }
};

namespace detail {

inline std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

inline void check_keys(const toml::table& t, const std::string& path, std::initializer_list<const char*> allowed) {
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [key, _] : t)
        if (!ok.count(std::string(key.str())))
            throw Error(ErrorCode::ConfigError, join(path, std::string(key.str())) + ": unknown key");
}

inline double get_real(const toml::node& node, const std::string& path) {
    if (auto v = node.as_floating_point()) return v->get();
    if (auto v = node.as_integer()) return static_cast<double>(v->get());
    throw Error(ErrorCode::ConfigError, path + ": expected a number");
}

inline std::int64_t get_int(const toml::node& node, const std::string& path) {
    if (auto v = node.as_integer()) return v->get();
    throw Error(ErrorCode::ConfigError, path + ": expected an integer");
}

inline std::size_t get_count(const toml::node& node, const std::string& path) {
    const std::int64_t v = get_int(node, path);
    if (v < 0) throw Error(ErrorCode::ConfigError, path + ": must be nonnegative");
    return static_cast<std::size_t>(v);
}

inline bool get_bool(const toml::node& node, const std::string& path) {
    if (auto v = node.as_boolean()) return v->get();
    throw Error(ErrorCode::ConfigError, path + ": expected a boolean");
}

inline std::string get_string(const toml::node& node, const std::string& path) {
    if (auto v = node.as_string()) return v->get();
    throw Error(ErrorCode::ConfigError, path + ": expected a string");
}

inline const toml::node& require(const toml::table& t, const char* key, const std::string& path) {
    const toml::node* node = t.get(key);
    if (!node) throw Error(ErrorCode::ConfigError, join(path, key) + ": missing");
    return *node;
}

inline RealVector get_vector(const toml::node& node, const std::string& path, int n) {
    const toml::array* arr = node.as_array();
    if (!arr) throw Error(ErrorCode::ConfigError, path + ": expected an array");
    if (static_cast<int>(arr->size()) != n)
        throw Error(ErrorCode::ConfigError, path + ": expected " + std::to_string(n) + " entries");
    RealVector v(n);
    for (int i = 0; i < n; ++i) v(i) = get_real(*arr->get(static_cast<std::size_t>(i)), path + "[" + std::to_string(i) + "]");
    return v;
}

inline const toml::table& as_table(const toml::node& node, const std::string& path) {
    if (const toml::table* t = node.as_table()) return *t;
    throw Error(ErrorCode::ConfigError, path + ": expected a table");
}

}  // namespace detail

/// Region descriptor, e.g. {kind = "ball_by_volume", t = 10.0}.
inline Region parse_region(const toml::table& t, int n, const std::string& path) {
    using namespace detail;
    const std::string kind = get_string(require(t, "kind", path), join(path, "kind"));
    try {
        if (kind == "ball_by_volume") {
            check_keys(t, path, {"kind", "t"});
            return Region::ball_of_volume(n, get_real(require(t, "t", path), join(path, "t")));
        }
        if (kind == "box") {
            check_keys(t, path, {"kind", "low", "high"});
            const RealVector low = get_vector(require(t, "low", path), join(path, "low"), n);
            return Region::box(low, get_vector(require(t, "high", path), join(path, "high"), n));
        }
        if (kind == "annulus") {
            check_keys(t, path, {"kind", "t_inner", "t_outer"});
            return Region::annulus(n, get_real(require(t, "t_inner", path), join(path, "t_inner")),
                                   get_real(require(t, "t_outer", path), join(path, "t_outer")));
        }
        if (kind == "shifted_ball") {
            check_keys(t, path, {"kind", "center", "t"});
            return Region::shifted_ball(get_vector(require(t, "center", path), join(path, "center"), n),
                                        get_real(require(t, "t", path), join(path, "t")));
        }
        const std::size_t samples = t.get("mc_samples") ? get_count(*t.get("mc_samples"), join(path, "mc_samples"))
                                                        : kDefaultCompositeSamples;
        const auto seed = t.get("seed") ? static_cast<std::uint64_t>(get_int(*t.get("seed"), join(path, "seed"))) : 0;
        if (kind == "union") {
            check_keys(t, path, {"kind", "parts", "mc_samples", "seed"});
            const toml::array* arr = require(t, "parts", path).as_array();
            if (!arr) throw Error(ErrorCode::ConfigError, join(path, "parts") + ": expected an array of tables");
            std::vector<Region> parts;
            for (std::size_t i = 0; i < arr->size(); ++i) {
                const std::string p = join(path, "parts") + "[" + std::to_string(i) + "]";
                parts.push_back(parse_region(as_table(*arr->get(i), p), n, p));
            }
            return Region::union_of(parts, samples, seed);
        }
        if (kind == "difference") {
            check_keys(t, path, {"kind", "base", "removed", "mc_samples", "seed"});
            const std::string pb = join(path, "base"), pr = join(path, "removed");
            return Region::difference(parse_region(as_table(require(t, "base", path), pb), n, pb),
                                      parse_region(as_table(require(t, "removed", path), pr), n, pr), samples, seed);
        }
    } catch (const Error& e) {
        if (e.code() == ErrorCode::ConfigError) throw;
        throw Error(ErrorCode::ConfigError, path + ": " + e.what());
    }
    throw Error(ErrorCode::ConfigError, join(path, "kind") + ": unknown region kind '" + kind + "'");
}

/// JSON descriptor mirroring the TOML form.
inline nlohmann::ordered_json region_descriptor(const Region& a) {
    nlohmann::ordered_json j;
    j["kind"] = to_string(a.kind());
    auto vec = [](const RealVector& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
    switch (a.kind()) {
    case RegionKind::BallByVolume: j["t"] = a.t(); break;
    case RegionKind::Box: j["low"] = vec(a.low()); j["high"] = vec(a.high()); break;
    case RegionKind::Annulus: j["t_inner"] = a.t_inner(); j["t_outer"] = a.t(); break;
    case RegionKind::ShiftedBall: j["center"] = vec(a.center()); j["t"] = a.t(); break;
    case RegionKind::Union:
        j["parts"] = nlohmann::ordered_json::array();
        for (std::size_t i = 0; i < a.child_count(); ++i) j["parts"].push_back(region_descriptor(a.child(i)));
        break;
    case RegionKind::Difference:
        j["base"] = region_descriptor(a.child(0));
        j["removed"] = region_descriptor(a.child(1));
        break;
    }
    if (a.kind() == RegionKind::Union || a.kind() == RegionKind::Difference) {
        j["mc_samples"] = a.mc_samples();
        j["seed"] = a.mc_seed();
    }
    j["volume"] = a.volume();
    return j;
}

inline ExperimentSpec parse_experiment(const toml::table& root) {
    using namespace detail;
    ExperimentSpec spec;
    check_keys(root, "", {"experiment", "sampler", "rogers", "limits", "tolerances"});
    const toml::node* exp_node = root.get("experiment");
    if (!exp_node) throw Error(ErrorCode::ConfigError, "experiment: missing table");
    const toml::table& e = as_table(*exp_node, "experiment");
    check_keys(e, "experiment", {"id", "n", "regions", "k", "ell", "confidence", "batches"});

    const std::string id = get_string(require(e, "id", "experiment"), "experiment.id");
    if (id.size() != 2 || id[0] != 'E' || id[1] < '1' || id[1] > '8')
        throw Error(ErrorCode::ConfigError, "experiment.id: expected one of E1..E8, got '" + id + "'");
    spec.id = static_cast<ExperimentId>(id[1] - '0');
    spec.n = static_cast<int>(get_int(require(e, "n", "experiment"), "experiment.n"));
    if (spec.n < 2 || spec.n > 8) throw Error(ErrorCode::ConfigError, "experiment.n: must lie in [2, 8]");
    if (auto v = e.get("k")) spec.k = static_cast<int>(get_int(*v, "experiment.k"));
    if (auto v = e.get("ell")) spec.ell = static_cast<int>(get_int(*v, "experiment.ell"));
    if (auto v = e.get("confidence")) spec.confidence = get_real(*v, "experiment.confidence");
    if (auto v = e.get("batches")) spec.batches = get_count(*v, "experiment.batches");

    const toml::array* regions = require(e, "regions", "experiment").as_array();
    if (!regions) throw Error(ErrorCode::ConfigError, "experiment.regions: expected an array of tables");
    for (std::size_t i = 0; i < regions->size(); ++i) {
        const std::string p = "experiment.regions[" + std::to_string(i) + "]";
        spec.regions.push_back(parse_region(as_table(*regions->get(i), p), spec.n, p));
    }

    spec.sampler.n = spec.n;
    if (auto node = root.get("sampler")) {
        const toml::table& s = as_table(*node, "sampler");
        check_keys(s, "sampler", {"step_sigma", "burn_in", "thinning", "chain_count", "samples_per_chain", "seed"});
        if (auto v = s.get("step_sigma")) spec.sampler.step_sigma = get_real(*v, "sampler.step_sigma");
        if (auto v = s.get("burn_in")) spec.sampler.burn_in = get_count(*v, "sampler.burn_in");
        if (auto v = s.get("thinning")) spec.sampler.thinning = get_count(*v, "sampler.thinning");
        if (auto v = s.get("chain_count")) spec.sampler.chain_count = get_count(*v, "sampler.chain_count");
        if (auto v = s.get("samples_per_chain")) spec.sampler.samples_per_chain = get_count(*v, "sampler.samples_per_chain");
        if (auto v = s.get("seed")) spec.sampler.seed = static_cast<std::uint64_t>(get_int(*v, "sampler.seed"));
    }
    if (auto node = root.get("rogers")) {
        const toml::table& r = as_table(*node, "rogers");
        check_keys(r, "rogers", {"s_max", "d_max", "mc_samples", "seed", "allow_zero_columns"});
        if (auto v = r.get("s_max")) spec.rogers.s_max = static_cast<int>(get_int(*v, "rogers.s_max"));
        if (auto v = r.get("d_max")) spec.rogers.d_max = static_cast<int>(get_int(*v, "rogers.d_max"));
        if (auto v = r.get("mc_samples")) spec.rogers.mc_samples = get_count(*v, "rogers.mc_samples");
        if (auto v = r.get("seed")) spec.rogers.seed = static_cast<std::uint64_t>(get_int(*v, "rogers.seed"));
        if (auto v = r.get("allow_zero_columns")) spec.rogers.allow_zero_columns = get_bool(*v, "rogers.allow_zero_columns");
        if (spec.rogers.s_max < 1) throw Error(ErrorCode::ConfigError, "rogers.s_max: must be >= 1");
        if (spec.rogers.d_max < 1) throw Error(ErrorCode::ConfigError, "rogers.d_max: must be >= 1");
    }
    if (auto node = root.get("limits")) {
        const toml::table& l = as_table(*node, "limits");
        check_keys(l, "limits", {"enumeration_cap", "tuple_budget"});
        if (auto v = l.get("enumeration_cap")) spec.limits.enumeration_cap = get_count(*v, "limits.enumeration_cap");
        if (auto v = l.get("tuple_budget")) spec.limits.tuple_budget = get_count(*v, "limits.tuple_budget");
    }
    if (auto node = root.get("tolerances")) {
        const toml::table& t = as_table(*node, "tolerances");
        check_keys(t, "tolerances", {"variance_slope", "decay_slope_max", "trend_z"});
        if (auto v = t.get("variance_slope")) spec.tolerances.variance_slope = get_real(*v, "tolerances.variance_slope");
        if (auto v = t.get("decay_slope_max")) spec.tolerances.decay_slope_max = get_real(*v, "tolerances.decay_slope_max");
        if (auto v = t.get("trend_z")) spec.tolerances.trend_z = get_real(*v, "tolerances.trend_z");
    }
    spec.validate();
    return spec;
}

inline ExperimentSpec parse_experiment_text(const std::string& text, const std::string& source = "config") {
    toml::table root;
    try {
        root = toml::parse(text, source);
    } catch (const toml::parse_error& err) {
        std::string where;
        if (err.source().begin) where = " (line " + std::to_string(err.source().begin.line) + ")";
        throw Error(ErrorCode::ConfigError, source + where + ": " + std::string(err.description()));
    }
    return parse_experiment(root);
}

inline ExperimentSpec load_experiment(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw Error(ErrorCode::IoError, "cannot open '" + path + "': " + std::strerror(errno));
    std::stringstream buf;
    buf << f.rdbuf();
    return parse_experiment_text(buf.str(), path);
}

}  // namespace geonum::harness
