#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "fockstop/harness/config.hpp"

namespace fockstop::harness {

inline constexpr const char* report_schema = "fockstop-report/1";
inline constexpr const char* library_version = "1.0.0";

/// Identity labels a record may point at.
inline const std::set<std::string>& known_anchors() {
    static const std::set<std::string> a = {
        "notation:fock",   "def:Et",          "def:Gamma",       "def:qst",         "def:future-adapted",
        "notation:sfg",    "eqn:mixint",      "eqn:keyip",       "eqn:keyS",        "cor:key",
        "thm:expS",        "thm:shift",       "thm:isom",        "thm:SstarT",      "eqn:SstarTint",
        "eqn:jSstarT",     "rem:GammaSstarT", "prp:S+t",         "thm:SstarTiso",   "eqn:SstarT1",
        "eqn:SstarT2",     "def:ccrflow",     "eqn:shift",       "thm:flowstop",    "eqn:flowgamma",
        "prp:sigmagamma",  "thm:addt",        "def:padapt",      "eqn:padapt",      "eqn:defcocycle",
        "def:isometric",   "eg:weylcocycle",  "lem:uni",         "eqn:cocycle1",    "eqn:cocycle2",
        "thm:stopcocycle", "cor:cauchy",      "prp:vnorm",       "prp:inorm",       "thm:cocyclerel",
        "eqn:stoppedcocycle", "eqn:appstop",  "eqn:apploc",      "eqn:appdet",      "rem:vacuum-at-S+t",
        "rem:identity-at-S+t", "convergence:cutoff", "convergence:refinement", "exploratory:associativity"};
    return a;
}

struct Record {
    std::string suite;
    std::uint64_t seed = 0;
    std::string name;
    std::string anchor;
    double residual = 0.0;
    double tolerance = 0.0;
    bool pass = false;
    bool exploratory = false;
};

/// Collects records for one (suite, seed) cell.
class Recorder {
public:
    Recorder(std::string suite, std::uint64_t seed) : suite_(std::move(suite)), seed_(seed) {}

    void check(const std::string& name, const std::string& anchor, double residual, double tolerance,
               bool exploratory = false) {
        if (!known_anchors().count(anchor)) throw Error("unregistered anchor '" + anchor + "'");
        records_.push_back({suite_, seed_, name, anchor, residual, tolerance,
                            !std::isnan(residual) && residual <= tolerance, exploratory});
    }

    std::vector<Record>& records() { return records_; }

private:
    std::string suite_;
    std::uint64_t seed_;
    std::vector<Record> records_;
};

struct Summary {
    std::size_t total = 0;
    std::size_t passed = 0;
    std::size_t failed = 0;
    std::size_t exploratory_failed = 0;

    bool all_pass() const { return failed == 0; }
};

inline Summary summarize(const std::vector<Record>& records) {
    Summary s;
    for (const auto& r : records) {
        ++s.total;
        if (r.pass) {
            ++s.passed;
        } else if (r.exploratory) {
            ++s.exploratory_failed;
        } else {
            ++s.failed;
        }
    }
    return s;
}

struct Report {
    SuiteConfig config;
    double tol_trunc = 0.0;
    bool tol_trunc_calibrated = false;
    std::vector<Record> records;

    Summary summary() const { return summarize(records); }
};

/// Build facts only; nothing that varies between runs on the same build.
inline json environment_fingerprint() {
    return {{"library_version", library_version},
            {"compiler", __VERSION__},
            {"cplusplus", static_cast<std::int64_t>(__cplusplus)},
            {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                          std::to_string(EIGEN_MINOR_VERSION)},
            {"json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." + std::to_string(NLOHMANN_JSON_VERSION_MINOR) +
                         "." + std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
            {"basis_order", "bin-major, lexicographic occupation tuples, initial factor leftmost"}};
}

inline json to_json(const Record& r) {
    json j = {{"suite", r.suite},         {"seed", r.seed},
              {"name", r.name},           {"anchor", r.anchor},
              {"residual", r.residual},   {"tolerance", r.tolerance},
              {"pass", r.pass},           {"exploratory", r.exploratory}};
    if (std::isnan(r.residual)) j["residual"] = "nan";
    return j;
}

inline json to_json(const Report& rep) {
    json records = json::array();
    for (const auto& r : rep.records) records.push_back(to_json(r));
    const Summary s = rep.summary();
    return {{"schema", report_schema},
            {"config", to_json(rep.config)},
            {"environment", environment_fingerprint()},
            {"tol_trunc", {{"value", rep.tol_trunc}, {"calibrated", rep.tol_trunc_calibrated}}},
            {"records", records},
            {"summary",
             {{"total", s.total},
              {"passed", s.passed},
              {"failed", s.failed},
              {"exploratory_failed", s.exploratory_failed},
              {"all_pass", s.all_pass()}}}};
}

inline std::string sci(double x) {
    std::ostringstream os;
    os << std::scientific << std::setprecision(2) << x;
    return os.str();
}

inline std::string to_markdown(const Report& rep) {
    std::ostringstream md;
    const Summary s = rep.summary();
    md << "# fockstop report\n\n";
    md << "Model " << describe(rep.config.model) << ", tol_exact " << sci(rep.config.tol_exact) << ", tol_trunc "
       << sci(rep.tol_trunc) << (rep.tol_trunc_calibrated ? " (calibrated)" : "") << ".\n\n";
    md << "**" << s.passed << "/" << s.total << " passed**";
    if (s.failed) md << ", " << s.failed << " failed";
    if (s.exploratory_failed) md << ", " << s.exploratory_failed << " exploratory failures";
    md << "\n";
    std::string current;
    for (const auto& r : rep.records) {
        if (r.suite != current) {
            current = r.suite;
            md << "\n## " << current << "\n\n| seed | check | anchor | residual | tolerance | result |\n"
               << "|---:|---|---|---:|---:|---|\n";
        }
        md << "| " << r.seed << " | " << r.name << " | `" << r.anchor << "` | " << sci(r.residual) << " | "
           << sci(r.tolerance) << " | " << (r.pass ? "pass" : (r.exploratory ? "fail (exploratory)" : "**FAIL**"))
           << " |\n";
    }
    return md.str();
}

}  // namespace fockstop::harness
