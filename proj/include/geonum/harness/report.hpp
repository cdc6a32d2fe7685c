#pragma once

// Experiment result records and their CSV / JSON serialisation.

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "geonum/error.hpp"

namespace geonum::harness {

/// How estimate and theory are compared. The slack is `tolerance` when set,
/// otherwise confidence * stderr.
enum class Relation { Equal, AtMost, AtLeast, Report };

inline const char* to_string(Relation r) {
    switch (r) {
    case Relation::Equal: return "eq";
    case Relation::AtMost: return "le";
    case Relation::AtLeast: return "ge";
    case Relation::Report: return "report";
    }
    return "report";
}

struct ResultRecord {
    std::string experiment;
    std::string statistic;
    int n = 0;
    std::optional<double> t;       // region volume; empty for records aggregated over regions
    double estimate = 0;
    double standard_error = 0;
    std::optional<double> theory;
    bool pass = true;
    std::uint64_t samples = 0;
    std::uint64_t seed = 0;

    Relation relation = Relation::Report;
    std::optional<double> tolerance;
    std::optional<double> ci_low, ci_high;
    std::string note;

    /// Sets `pass` from estimate, theory, relation and slack.
    void decide(double confidence) {
        if (!theory || relation == Relation::Report) {
            pass = true;
            return;
        }
        const double slack = tolerance ? *tolerance : confidence * standard_error;
        const double d = estimate - *theory;
        switch (relation) {
        case Relation::Equal: pass = std::abs(d) <= slack; break;
        case Relation::AtMost: pass = d <= slack; break;
        case Relation::AtLeast: pass = d >= -slack; break;
        case Relation::Report: pass = true; break;
        }
        if (!std::isfinite(estimate)) pass = false;
    }
};

/// Rows ordered by (experiment, statistic, t); aggregate rows (no t) first.
inline void sort_records(std::vector<ResultRecord>& records) {
    std::stable_sort(records.begin(), records.end(), [](const ResultRecord& a, const ResultRecord& b) {
        if (a.experiment != b.experiment) return a.experiment < b.experiment;
        if (a.statistic != b.statistic) return a.statistic < b.statistic;
        if (a.t.has_value() != b.t.has_value()) return !a.t.has_value();
        return a.t.value_or(0) < b.t.value_or(0);
    });
}

inline bool all_pass(const std::vector<ResultRecord>& records) {
    return std::all_of(records.begin(), records.end(), [](const ResultRecord& r) { return r.pass; });
}

inline std::string format_double(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.9g", x);
    return buf;
}

inline constexpr const char* kCsvHeader = "experiment,statistic,n,t,estimate,stderr,theory,pass,samples,seed";

inline std::string to_csv(std::vector<ResultRecord> records) {
    sort_records(records);
    std::ostringstream out;
    out << kCsvHeader << '\n';
    for (const auto& r : records) {
        out << r.experiment << ',' << r.statistic << ',' << r.n << ',' << (r.t ? format_double(*r.t) : "") << ','
            << format_double(r.estimate) << ',' << format_double(r.standard_error) << ','
            << (r.theory ? format_double(*r.theory) : "") << ',' << (r.pass ? "true" : "false") << ',' << r.samples
            << ',' << r.seed << '\n';
    }
    return out.str();
}

inline nlohmann::ordered_json to_json(const ResultRecord& r) {
    nlohmann::ordered_json j;
    auto opt = [](const std::optional<double>& v) { return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(); };
    j["experiment"] = r.experiment;
    j["statistic"] = r.statistic;
    j["n"] = r.n;
    j["t"] = opt(r.t);
    j["estimate"] = r.estimate;
    j["stderr"] = r.standard_error;
    j["theory"] = opt(r.theory);
    j["pass"] = r.pass;
    j["samples"] = r.samples;
    j["seed"] = r.seed;
    j["relation"] = to_string(r.relation);
    if (r.tolerance) j["tolerance"] = *r.tolerance;
    if (r.ci_low) j["ci"] = {*r.ci_low, *r.ci_high};
    if (!r.note.empty()) j["note"] = r.note;
    return j;
}

inline std::string to_json_text(std::vector<ResultRecord> records, const nlohmann::ordered_json& metadata) {
    sort_records(records);
    nlohmann::ordered_json doc;
    doc["metadata"] = metadata;
    doc["records"] = nlohmann::ordered_json::array();
    for (const auto& r : records) doc["records"].push_back(to_json(r));
    return doc.dump(2) + "\n";
}

inline void write_text(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw Error(ErrorCode::IoError, "cannot open '" + path + "': " + std::strerror(errno));
    f << text;
    f.flush();
    if (!f) throw Error(ErrorCode::IoError, "cannot write '" + path + "': " + std::strerror(errno));
}

inline void write_csv(const std::vector<ResultRecord>& records, const std::string& path) {
    write_text(path, to_csv(records));
}

inline void write_json(const std::vector<ResultRecord>& records, const std::string& path,
                       const nlohmann::ordered_json& metadata = nlohmann::ordered_json::object()) {
    write_text(path, to_json_text(records, metadata));
}

}  // namespace geonum::harness
