#pragma once

// JSON experiment configuration: parsing, canonical digest, and encoders for
// the library's result types.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "moran/attainability.hpp"
#include "moran/ensemble.hpp"
#include "moran/error.hpp"
#include "moran/estimator.hpp"
#include "moran/phi.hpp"
#include "moran/theory.hpp"
#include "moran/tree_oracle.hpp"

#ifndef MORAN_VERSION
#define MORAN_VERSION "0.0.0"
#endif

namespace moran {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

inline constexpr const char* kToolName = "moran";
inline constexpr const char* kToolVersion = MORAN_VERSION;

struct Target {
    double value = 0.0;
    Bound bound = Bound::upper;
    Regime regime = Regime::dependent;
};

struct SampleConfig {
    long long levels = 3;
    bool svg = true;
};

struct TreeGenerator {
    std::uint64_t seed = 0;
    long long count = 1;
    long long max_depth = 12;
    std::vector<int> branching{2, 3};
    long long extra_thresholds = 8;
};

struct LemmaConfig {
    std::optional<LabeledTree> tree;
    std::optional<TreeGenerator> generator;
    std::optional<double> s;
    double R = 1.0;
    std::optional<double> r;
};

struct ExperimentConfig {
    std::optional<EnsembleSpec> ensemble;
    std::uint64_t seed = 0;
    long long depth = 0;
    std::vector<DimensionFunction> phis;
    std::vector<Target> targets;
    EstimatorConfig estimator;
    SampleConfig sample;
    std::optional<LemmaConfig> lemma;
    std::string output_dir = ".";
    json document;  // the parsed document with overrides applied; hashed for the digest
};

namespace detail {

[[noreturn]] inline void config_error(const std::string& what) { throw Error(ErrorCode::ConfigError, what); }

inline void only_keys(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
    if (!j.is_object()) config_error(where + " must be an object");
    for (const auto& [k, v] : j.items()) {
        bool ok = false;
        for (const char* a : allowed) ok = ok || k == a;
        if (!ok) config_error(where + ": unknown key \"" + k + "\"");
    }
}

template <class T>
T get(const json& j, const char* key, const std::string& where) {
    if (!j.contains(key)) config_error(where + ": missing \"" + key + "\"");
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        config_error(where + "." + key + ": " + e.what());
    }
}

template <class T>
T get_or(const json& j, const char* key, T fallback, const std::string& where) {
    return j.contains(key) ? get<T>(j, key, where) : fallback;
}

inline std::vector<double> numbers(const json& j, const char* key, const std::string& where) {
    return get<std::vector<double>>(j, key, where);
}

}  // namespace detail

inline EnsembleSpec parse_ensemble(const json& j) {
    using namespace detail;
    const std::string where = "ensemble";
    only_keys(j, where, {"K", "A", "B", "tau", "weight_mode", "shared_weights", "atoms"});
    EnsembleSpec s;
    s.bounds.K = get<int>(j, "K", where);
    s.bounds.A = get<double>(j, "A", where);
    s.bounds.B = get<double>(j, "B", where);
    s.bounds.tau = get<double>(j, "tau", where);
    const auto mode = get_or<std::string>(j, "weight_mode", "dependent", where);
    if (mode == "dependent")
        s.mode = WeightMode::dependent;
    else if (mode == "independent")
        s.mode = WeightMode::independent;
    else
        config_error(where + ".weight_mode must be \"dependent\" or \"independent\"");
    if (j.contains("shared_weights")) s.shared_weights = numbers(j, "shared_weights", where);
    if (!j.contains("atoms") || !j["atoms"].is_array()) config_error(where + ".atoms must be an array");
    for (std::size_t i = 0; i < j["atoms"].size(); ++i) {
        const auto& a = j["atoms"][i];
        const std::string aw = where + ".atoms[" + std::to_string(i) + "]";
        only_keys(a, aw, {"ratios", "weights", "mass"});
        Atom atom;
        atom.ratios = numbers(a, "ratios", aw);
        if (a.contains("weights")) atom.weights = numbers(a, "weights", aw);
        atom.mass = get<double>(a, "mass", aw);
        s.atoms.push_back(std::move(atom));
    }
    return s;
}

inline ojson encode_ensemble(const EnsembleSpec& s) {
    ojson j;
    j["K"] = s.bounds.K;
    j["A"] = s.bounds.A;
    j["B"] = s.bounds.B;
    j["tau"] = s.bounds.tau;
    j["weight_mode"] = std::string(to_string(s.mode));
    if (s.shared_weights) j["shared_weights"] = *s.shared_weights;
    j["atoms"] = ojson::array();
    for (const auto& a : s.atoms) {
        ojson aj;
        aj["ratios"] = a.ratios;
        if (a.weights) aj["weights"] = *a.weights;
        aj["mass"] = a.mass;
        j["atoms"].push_back(std::move(aj));
    }
    return j;
}

inline DimensionFunction parse_phi(const json& j) {
    using namespace detail;
    const std::string where = "phi";
    const auto family = get<std::string>(j, "family", where);
    if (family == "zero") {
        only_keys(j, where, {"family"});
        return DimensionFunction::zero();
    }
    if (family == "constant") {
        only_keys(j, where, {"family", "C"});
        return DimensionFunction::constant(get<double>(j, "C", where));
    }
    if (family == "inverse_log_power") {
        only_keys(j, where, {"family", "alpha"});
        return DimensionFunction::inverse_log_power(get<double>(j, "alpha", where));
    }
    if (family == "loglog_power") {
        only_keys(j, where, {"family", "alpha"});
        return DimensionFunction::loglog_power(get<double>(j, "alpha", where));
    }
    if (family == "theta_spectrum") {
        only_keys(j, where, {"family", "theta"});
        return DimensionFunction::theta_spectrum(get<double>(j, "theta", where));
    }
    config_error("phi.family \"" + family + "\" is not a known family");
}

inline ojson encode_phi(const DimensionFunction& phi) {
    ojson j;
    j["family"] = std::string(to_string(phi.family()));
    switch (phi.family()) {
    case PhiFamily::zero: break;
    case PhiFamily::constant: j["C"] = phi.parameter(); break;
    case PhiFamily::inverse_log_power:
    case PhiFamily::loglog_power: j["alpha"] = phi.parameter(); break;
    case PhiFamily::theta_spectrum: j["theta"] = phi.parameter(); break;
    }
    j["name"] = phi.name();
    j["size_class"] = std::string(to_string(phi.size_class()));
    return j;
}

inline LabeledTree parse_tree(const json& j) {
    using namespace detail;
    const std::string where = "lemma.tree";
    only_keys(j, where, {"K", "A", "B", "tau", "labels"});
    LabeledTree t;
    t.K = get<int>(j, "K", where);
    t.A = get<double>(j, "A", where);
    t.B = get<double>(j, "B", where);
    t.tau = get<double>(j, "tau", where);
    t.labels = get<std::vector<std::vector<double>>>(j, "labels", where);
    return t;
}

inline EstimatorConfig parse_estimator(const json& j) {
    using namespace detail;
    const std::string where = "estimator";
    only_keys(j, where,
              {"min_level", "max_level", "max_window", "exhaustive_window", "enumeration_cap", "bin_width",
               "set_max_level", "set_min_window", "set_max_window", "box_levels", "audit_tolerance"});
    EstimatorConfig c;
    c.min_level = get_or(j, "min_level", c.min_level, where);
    c.max_level = get_or(j, "max_level", c.max_level, where);
    c.max_window = get_or(j, "max_window", c.max_window, where);
    c.exhaustive_window = get_or(j, "exhaustive_window", c.exhaustive_window, where);
    c.enumeration_cap = get_or(j, "enumeration_cap", c.enumeration_cap, where);
    c.bin_width = get_or(j, "bin_width", c.bin_width, where);
    c.set_max_level = get_or(j, "set_max_level", c.set_max_level, where);
    c.set_min_window = get_or(j, "set_min_window", c.set_min_window, where);
    c.set_max_window = get_or(j, "set_max_window", c.set_max_window, where);
    c.box_levels = get_or(j, "box_levels", c.box_levels, where);
    c.audit_tolerance = get_or(j, "audit_tolerance", c.audit_tolerance, where);
    if (c.min_level < 1 || c.max_level < c.min_level || c.max_window < 1 || c.exhaustive_window < 0 ||
        c.enumeration_cap < 1 || !(c.bin_width > 0.0) || c.set_max_level < 1 || c.set_min_window < 1 ||
        c.set_max_window < 1 || c.box_levels < 0 || !(c.audit_tolerance >= 0.0))
        config_error("estimator: caps must be positive and levels ordered");
    return c;
}

/// Parses a configuration document. Sections are optional; commands that need
/// a missing section report ConfigError.
inline ExperimentConfig parse_config(const json& doc) {
    using namespace detail;
    only_keys(doc, "config", {"ensemble", "seed", "depth", "phi", "targets", "estimator", "sample", "lemma", "output"});
    ExperimentConfig c;
    c.document = doc;
    if (doc.contains("ensemble")) c.ensemble = parse_ensemble(doc["ensemble"]);
    c.seed = get_or<std::uint64_t>(doc, "seed", 0, "config");
    c.depth = get_or<long long>(doc, "depth", 0, "config");
    if (doc.contains("phi")) {
        if (!doc["phi"].is_array()) config_error("phi must be an array");
        for (const auto& p : doc["phi"]) c.phis.push_back(parse_phi(p));
    }
    if (doc.contains("targets")) {
        if (!doc["targets"].is_array()) config_error("targets must be an array");
        for (const auto& t : doc["targets"]) {
            only_keys(t, "targets[]", {"value", "bound", "regime"});
            Target tg;
            tg.value = get<double>(t, "value", "targets[]");
            const auto b = get<std::string>(t, "bound", "targets[]");
            const auto r = get_or<std::string>(t, "regime", "dependent", "targets[]");
            if (b != "upper" && b != "lower") config_error("targets[].bound must be \"upper\" or \"lower\"");
            if (r != "dependent" && r != "independent")
                config_error("targets[].regime must be \"dependent\" or \"independent\"");
            tg.bound = b == "upper" ? Bound::upper : Bound::lower;
            tg.regime = r == "dependent" ? Regime::dependent : Regime::independent;
            c.targets.push_back(tg);
        }
    }
    if (doc.contains("estimator")) c.estimator = parse_estimator(doc["estimator"]);
    if (doc.contains("sample")) {
        const auto& s = doc["sample"];
        only_keys(s, "sample", {"levels", "svg"});
        c.sample.levels = get_or(s, "levels", c.sample.levels, "sample");
        c.sample.svg = get_or(s, "svg", c.sample.svg, "sample");
    }
    if (doc.contains("lemma")) {
        const auto& l = doc["lemma"];
        only_keys(l, "lemma", {"tree", "generator", "s", "R", "r"});
        LemmaConfig lc;
        if (l.contains("tree")) lc.tree = parse_tree(l["tree"]);
        if (l.contains("generator")) {
            const auto& g = l["generator"];
            only_keys(g, "lemma.generator", {"seed", "count", "max_depth", "branching", "extra_thresholds"});
            TreeGenerator tg;
            tg.seed = get_or(g, "seed", tg.seed, "lemma.generator");
            tg.count = get_or(g, "count", tg.count, "lemma.generator");
            tg.max_depth = get_or(g, "max_depth", tg.max_depth, "lemma.generator");
            tg.branching = get_or(g, "branching", tg.branching, "lemma.generator");
            tg.extra_thresholds = get_or(g, "extra_thresholds", tg.extra_thresholds, "lemma.generator");
            if (tg.count < 1 || tg.max_depth < 1 || tg.branching.empty() || tg.extra_thresholds < 0)
                config_error("lemma.generator: count, max_depth must be >= 1 and branching non-empty");
            for (int k : tg.branching)
                if (k < 2) config_error("lemma.generator.branching entries must be >= 2");
            lc.generator = tg;
        }
        if (lc.tree.has_value() == lc.generator.has_value())
            config_error("lemma needs exactly one of \"tree\" or \"generator\"");
        if (l.contains("s")) lc.s = get<double>(l, "s", "lemma");
        lc.R = get_or(l, "R", lc.R, "lemma");
        if (l.contains("r")) lc.r = get<double>(l, "r", "lemma");
        c.lemma = lc;
    }
    if (doc.contains("output")) {
        only_keys(doc["output"], "output", {"dir"});
        c.output_dir = get_or<std::string>(doc["output"], "dir", ".", "output");
    }
    return c;
}

inline json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::ConfigError, "cannot open " + path);
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::ConfigError, path + ": " + e.what());
    }
}

/// FNV-1a 64 over the canonical (sorted-key, compact) serialization.
inline std::string config_digest(const json& doc) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : doc.dump()) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

/// Digest of everything that affects results; the output location is excluded.
inline std::string result_digest(const ExperimentConfig& c) {
    json doc = c.document;
    if (doc.is_object()) doc.erase("output");
    return config_digest(doc);
}

inline ojson provenance(const ExperimentConfig& c) {
    ojson j;
    j["tool"] = kToolName;
    j["version"] = kToolVersion;
    j["config_digest"] = result_digest(c);
    return j;
}

inline std::string provenance_comment(const ExperimentConfig& c) {
    return std::string("# ") + kToolName + " " + kToolVersion + " config " + result_digest(c);
}

template <class T>
ojson opt(const std::optional<T>& v) {
    return v ? ojson(*v) : ojson(nullptr);
}

inline ojson encode_report(const DimensionReport& r) {
    ojson j;
    j["d_lower"] = r.d_lower;
    j["d_upper"] = r.d_upper;
    j["hausdorff"] = r.hausdorff;
    j["delta_small"] = r.delta_small;
    j["delta_big"] = r.delta_big;
    j["measure_upper"] = opt(r.measure_upper);
    j["measure_lower"] = opt(r.measure_lower);
    j["atom_dims"] = r.atom_dims;
    j["ratio_table"] = opt(r.ratio_table);
    j["max_ratio_sum_at_least_one"] = r.max_ratio_sum_at_least_one;
    return j;
}

inline ojson encode_gaps(const GapReport& g) {
    ojson j;
    j["upper_gap"] = g.upper_gap;
    j["lower_gap"] = g.lower_gap;
    j["upper_attained"] = g.upper_attained;
    j["lower_attained"] = g.lower_attained;
    j["upper_consistent"] = g.upper_consistent;
    j["lower_consistent"] = g.lower_consistent;
    return j;
}

inline ojson encode_audit(const AuditResult& a) {
    ojson j;
    j["pass"] = a.pass;
    j["checks"] = ojson::array();
    for (const auto& c : a.checks)
        j["checks"].push_back({{"check", c.name}, {"lhs", c.lhs}, {"rhs", c.rhs}, {"tolerance", c.tolerance},
                               {"pass", c.pass}});
    return j;
}

inline ojson encode_tree(const LabeledTree& t) {
    ojson j;
    j["K"] = t.K;
    j["A"] = t.A;
    j["B"] = t.B;
    j["tau"] = t.tau;
    j["labels"] = t.labels;
    return j;
}

}  // namespace moran
