#pragma once

// Subcommand implementations shared by the command-line tool and its tests.
// Each command reads an ExperimentConfig, writes its artifacts under
// config.output_dir and prints a short summary.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "moran/attainability.hpp"
#include "moran/ensemble.hpp"
#include "moran/error.hpp"
#include "moran/estimator.hpp"
#include "moran/io.hpp"
#include "moran/realization.hpp"
#include "moran/theory.hpp"
#include "moran/tree_oracle.hpp"

namespace moran {

/// Command-line overrides; unset fields leave the config document untouched.
struct Overrides {
    std::optional<std::uint64_t> seed;
    std::optional<long long> depth;
    std::optional<std::string> output_dir;
    std::optional<long long> max_level;
    std::optional<long long> max_window;
};

inline json apply_overrides(json doc, const Overrides& o) {
    if (o.seed) doc["seed"] = *o.seed;
    if (o.depth) doc["depth"] = *o.depth;
    if (o.output_dir) doc["output"]["dir"] = *o.output_dir;
    if (o.max_level) doc["estimator"]["max_level"] = *o.max_level;
    if (o.max_window) doc["estimator"]["max_window"] = *o.max_window;
    return doc;
}

inline ExperimentConfig load_config(const std::string& path, const Overrides& o = {}) {
    return parse_config(apply_overrides(read_json_file(path), o));
}

namespace detail {

inline std::filesystem::path write_artifact(const ExperimentConfig& c, const std::string& name,
                                            const std::string& content) {
    const std::filesystem::path dir(c.output_dir);
    std::filesystem::create_directories(dir);
    const auto path = dir / name;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::ConfigError, "cannot write " + path.string());
    out << content;
    return path;
}

inline std::string dump(const ojson& j) { return j.dump(2) + "\n"; }

inline Ensemble require_ensemble(const ExperimentConfig& c) {
    if (!c.ensemble) throw Error(ErrorCode::ConfigError, "config has no \"ensemble\" section");
    return validate_ensemble(*c.ensemble);
}

inline MoranRealization require_realization(const ExperimentConfig& c, const Ensemble& e) {
    if (c.depth < 1) throw Error(ErrorCode::InvalidDepth, "config \"depth\" must be >= 1");
    return realize(e, sample_environment(e, c.seed, c.depth));
}

inline std::string csv_field(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

}  // namespace detail

inline int run_dims(const ExperimentConfig& c, std::ostream& out) {
    const Ensemble e = detail::require_ensemble(c);
    const auto report = dimension_report(e);
    ojson j = provenance(c);
    j["command"] = "dims";
    j["report"] = encode_report(report);
    j["gaps"] = encode_gaps(gap_report(e));
    if (report.measure_upper) {
        const auto a = audit_lowerphi(report);
        j["lowerphi_audit"] = {{"pass", a.pass},
                               {"lower_slack", a.lower_slack},
                               {"upper_slack", a.upper_slack},
                               {"violating_atom", opt(a.violating_atom)}};
    } else {
        j["lowerphi_audit"] = nullptr;
    }
    const auto path = detail::write_artifact(c, "dims.json", detail::dump(j));
    out << "d = " << format_double(report.d_lower) << ", D = " << format_double(report.d_upper)
        << ", hausdorff = " << format_double(report.hausdorff) << ", delta = " << format_double(report.delta_small)
        << ", Delta = " << format_double(report.delta_big) << "\nwrote " << path.string() << "\n";
    return 0;
}

inline int run_attain(const ExperimentConfig& c, std::ostream& out) {
    const Ensemble e = detail::require_ensemble(c);
    if (c.targets.empty()) throw Error(ErrorCode::ConfigError, "config has no \"targets\"");
    ojson j = provenance(c);
    j["command"] = "attain";
    j["results"] = ojson::array();
    for (const auto& t : c.targets) {
        ojson r;
        r["target"] = t.value;
        r["bound"] = std::string(to_string(t.bound));
        r["regime"] = std::string(to_string(t.regime));
        std::optional<Ensemble> built;
        if (t.regime == Regime::dependent) {
            built = dependent_weights(e, t.value, t.bound);
        } else {
            const auto iw = independent_weights(e, t.value, t.bound);
            built = with_shared_weights(e, iw.weights);
            r["anchor_index"] = iw.anchor + 1;
            r["common_exponent"] = iw.exponent;
        }
        const auto m = measure_dims(*built);
        const double achieved = t.bound == Bound::upper ? m.upper : m.lower;
        r["ensemble"] = encode_ensemble(built->spec());
        r["verification"] = {{"achieved", achieved}, {"abs_error", std::fabs(achieved - t.value)}};
        out << to_string(t.regime) << ' ' << to_string(t.bound) << " target " << format_double(t.value)
            << ": achieved " << format_double(achieved) << "\n";
        j["results"].push_back(std::move(r));
    }
    const auto path = detail::write_artifact(c, "attain.json", detail::dump(j));
    out << "wrote " << path.string() << "\n";
    return 0;
}

inline int run_sample(const ExperimentConfig& c, std::ostream& out) {
    const Ensemble e = detail::require_ensemble(c);
    const auto real = detail::require_realization(c, e);
    if (c.sample.levels < 1) throw Error(ErrorCode::InvalidDepth, "sample.levels must be >= 1");
    const auto rows = export_levels(real, static_cast<std::size_t>(c.sample.levels), c.estimator.enumeration_cap);
    std::ostringstream csv;
    csv << provenance_comment(c) << '\n';
    write_levels_csv(csv, rows);
    const auto path = detail::write_artifact(c, "sample.csv", csv.str());
    out << "wrote " << rows.size() << " intervals to " << path.string() << "\n";
    if (c.sample.svg) {
        std::ostringstream svg;
        write_levels_svg(svg, rows);
        std::string s = svg.str();
        const auto nl = s.find('\n');
        s.insert(nl + 1, "<!-- " + provenance_comment(c).substr(2) + " -->\n");
        out << "wrote " << detail::write_artifact(c, "sample.svg", s).string() << "\n";
    }
    return 0;
}

inline constexpr const char* kEstimateCsvHeader = "start_level,window,theta_max,theta_min,section_count,set_exponent";

inline std::string estimate_csv(const ExperimentConfig& c, const EstimateReport& rep) {
    std::ostringstream os;
    os << provenance_comment(c) << " phi " << rep.phi.name() << '\n' << kEstimateCsvHeader << '\n';
    for (const auto& w : rep.windows)
        os << w.start_level << ',' << w.window << ',' << detail::csv_field(w.theta_max) << ','
           << detail::csv_field(w.theta_min) << ',' << detail::csv_field(w.section_count) << ','
           << detail::csv_field(w.set_exponent) << '\n';
    return os.str();
}

inline int run_estimate(const ExperimentConfig& c, std::ostream& out) {
    const Ensemble e = detail::require_ensemble(c);
    const auto real = detail::require_realization(c, e);
    const auto theory = dimension_report(e);
    std::vector<DimensionFunction> phis = c.phis;
    if (phis.empty()) phis.push_back(DimensionFunction::zero());

    ojson j = provenance(c);
    j["command"] = "estimate";
    j["seed"] = c.seed;
    j["depth"] = c.depth;
    j["estimates"] = ojson::array();
    std::vector<EstimateReport> reports;
    for (const auto& phi : phis) {
        auto rep = estimate(real, phi, c.estimator);
        const auto audit = ordering_audit(rep, theory, c.estimator.audit_tolerance);
        const auto path = detail::write_artifact(c, "estimate_" + phi.name() + ".csv", estimate_csv(c, rep));
        ojson s;
        s["phi"] = encode_phi(phi);
        s["windows"] = rep.windows.size();
        s["upper_measure"] = opt(rep.upper_measure);
        s["lower_measure"] = opt(rep.lower_measure);
        s["upper_set"] = opt(rep.upper_set);
        s["lower_set"] = opt(rep.lower_set);
        s["lower_box"] = opt(rep.lower_box);
        s["upper_box"] = opt(rep.upper_box);
        s["ordering_audit"] = encode_audit(audit);
        s["csv"] = path.filename().string();
        j["estimates"].push_back(std::move(s));
        out << phi.name() << ": upper_measure " << detail::csv_field(rep.upper_measure) << ", lower_measure "
            << detail::csv_field(rep.lower_measure) << ", upper_set " << detail::csv_field(rep.upper_set)
            << ", lower_set " << detail::csv_field(rep.lower_set) << ", ordering audit "
            << (audit.pass ? "PASS" : "FAIL") << "\n";
        reports.push_back(std::move(rep));
    }

    // Pairs whose window sets are nested get the exact monotonicity audit.
    j["monotonicity"] = ojson::array();
    for (std::size_t a = 0; a < reports.size(); ++a)
        for (std::size_t b = a + 1; b < reports.size(); ++b) {
            auto m = monotonicity_audit(reports[a], reports[b]);
            std::size_t lo = a, hi = b;
            if (!m.windows_nested) {
                m = monotonicity_audit(reports[b], reports[a]);
                lo = b, hi = a;
            }
            ojson r;
            r["smaller"] = phis[lo].name();
            r["larger"] = phis[hi].name();
            r["windows_nested"] = m.windows_nested;
            r["pass"] = m.windows_nested ? ojson(m.pass) : ojson(nullptr);
            r["checks"] = encode_audit(m.checks)["checks"];
            j["monotonicity"].push_back(std::move(r));
        }
    const auto path = detail::write_artifact(c, "estimate.json", detail::dump(j));
    out << "wrote " << path.string() << "\n";
    return 0;
}

inline int run_lemma(const ExperimentConfig& c, std::ostream& out) {
    if (!c.lemma) throw Error(ErrorCode::ConfigError, "config has no \"lemma\" section");
    const auto& lc = *c.lemma;
    std::vector<LabeledTree> trees;
    SplitMix64 rng(lc.generator ? lc.generator->seed : c.seed);
    if (lc.tree) {
        trees.push_back(*lc.tree);
    } else {
        const auto& g = *lc.generator;
        for (long long i = 0; i < g.count; ++i) {
            const int K = g.branching[rng.below(g.branching.size())];
            const auto n = static_cast<std::size_t>(1 + rng.below(static_cast<std::uint64_t>(g.max_depth)));
            trees.push_back(random_tree(rng, K, n));
        }
    }
    const std::size_t extra = lc.generator ? static_cast<std::size_t>(lc.generator->extra_thresholds) : 0;

    ojson j = provenance(c);
    j["command"] = "lemma";
    j["trees"] = ojson::array();
    std::size_t checks = 0, failures = 0;
    for (const auto& t : trees) {
        validate_tree(t);
        const double s = lc.s ? *lc.s : tree_exponent(t);
        ojson tj;
        if (lc.tree) tj["tree"] = encode_tree(t);
        else tj["K"] = t.K, tj["depth"] = t.depth();
        tj["s"] = s;
        tj["checks"] = ojson::array();
        std::vector<double> ratios;
        if (lc.r) ratios.push_back(*lc.r / lc.R);
        else ratios = threshold_sweep(t, rng, extra);
        for (double q : ratios) {
            const auto res = verify_geometric_lemma(t, s, q * lc.R, lc.R);
            ++checks;
            failures += !res.pass;
            tj["checks"].push_back({{"r", q * lc.R},
                                    {"R", lc.R},
                                    {"threshold", res.threshold},
                                    {"count", res.count},
                                    {"bound", res.bound},
                                    {"pass", res.pass}});
            if (trees.size() == 1 && ratios.size() == 1)
                out << "|Upsilon_r| = " << res.count << ", bound = " << format_double(res.bound) << "\n";
        }
        j["trees"].push_back(std::move(tj));
    }
    j["checks"] = checks;
    j["failures"] = failures;
    j["pass"] = failures == 0;
    const auto path = detail::write_artifact(c, "lemma.json", detail::dump(j));
    out << "lemma: " << (failures == 0 ? "PASS" : "FAIL") << " (" << trees.size() << " trees, " << checks
        << " checks, " << failures << " failures)\nwrote " << path.string() << "\n";
    return 0;
}

/// Dispatches by name; returns the process exit code.
inline int run_command(const std::string& name, const ExperimentConfig& c, std::ostream& out) {
    if (name == "dims") return run_dims(c, out);
    if (name == "attain") return run_attain(c, out);
    if (name == "sample") return run_sample(c, out);
    if (name == "estimate") return run_estimate(c, out);
    if (name == "lemma") return run_lemma(c, out);
    throw Error(ErrorCode::ConfigError, "unknown command " + name);
}

}  // namespace moran
