#pragma once

#include <json.hpp>

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "fockstop/model.hpp"

namespace fockstop::harness {

using json = nlohmann::json;

inline const std::vector<std::string>& known_suites() {
    static const std::vector<std::string> s = {"stoptime", "markov",    "convolution", "flow",
                                               "cocycle",  "applebaum", "convergence"};
    return s;
}

struct Refinement {
    int n_bins = 0;
    int cutoff = 0;

    friend bool operator==(const Refinement&, const Refinement&) = default;
};

struct SuiteConfig {
    ModelParams model{1.0, 4, 3, 1, 2};
    std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
    double amplitude_cap = 0.25;
    double tol_exact = 1e-10;
    std::optional<double> tol_trunc;  // empty: calibrate on the fly
    std::vector<std::string> suites = known_suites();
    std::uint64_t dimension_cap = default_dimension_cap;
    std::vector<Refinement> refinements{{2, 2}, {2, 3}, {2, 4}, {2, 5}};
    double convergence_amplitude = 0.2;
};

inline json to_json(const ModelParams& p) {
    return {{"horizon_T", p.horizon},
            {"n_bins", p.n_bins},
            {"cutoff_N", p.cutoff},
            {"mult_d", p.mult},
            {"init_dim", p.init_dim}};
}

inline json to_json(const SuiteConfig& c) {
    json refs = json::array();
    for (const auto& r : c.refinements) refs.push_back({{"n_bins", r.n_bins}, {"cutoff_N", r.cutoff}});
    json j = {{"model", to_json(c.model)},
              {"seeds", c.seeds},
              {"amplitude_cap", c.amplitude_cap},
              {"tol_exact", c.tol_exact},
              {"tol_trunc", nullptr},
              {"suites", c.suites},
              {"dimension_cap", c.dimension_cap},
              {"convergence", {{"refinements", refs}, {"amplitude", c.convergence_amplitude}}}};
    if (c.tol_trunc) j["tol_trunc"] = *c.tol_trunc;
    return j;
}

namespace detail {

template <class T>
T get_or(const json& j, const char* key, T fallback) {
    if (!j.contains(key) || j.at(key).is_null()) return fallback;
    return j.at(key).get<T>();
}

}  // namespace detail

/// Checks that do not need a model allocation.
inline void check_config(const SuiteConfig& c) {
    for (const auto& s : c.suites) {
        if (std::find(known_suites().begin(), known_suites().end(), s) == known_suites().end()) {
            throw ConfigError("unknown suite '" + s + "'");
        }
    }
    if (!(c.amplitude_cap >= 0.0)) throw ConfigError("amplitude_cap must be non-negative");
    if (!(c.tol_exact >= 0.0)) throw ConfigError("tol_exact must be non-negative");
    if (c.tol_trunc && !(*c.tol_trunc > c.tol_exact)) throw ConfigError("tol_trunc must exceed tol_exact");
    if (!(c.convergence_amplitude >= 0.0)) throw ConfigError("convergence amplitude must be non-negative");
    check_params(c.model, c.dimension_cap);
    for (const auto& r : c.refinements) {
        ModelParams p = c.model;
        p.n_bins = r.n_bins;
        p.cutoff = r.cutoff;
        p.init_dim = 1;
        check_params(p, c.dimension_cap);
    }
}

inline SuiteConfig parse_config(const json& j) {
    SuiteConfig c;
    try {
        if (!j.is_object()) throw ConfigError("config must be a JSON object");
        if (j.contains("model")) {
            const json& m = j.at("model");
            c.model.horizon = detail::get_or(m, "horizon_T", c.model.horizon);
            c.model.n_bins = detail::get_or(m, "n_bins", c.model.n_bins);
            c.model.cutoff = detail::get_or(m, "cutoff_N", c.model.cutoff);
            c.model.mult = detail::get_or(m, "mult_d", c.model.mult);
            c.model.init_dim = detail::get_or(m, "init_dim", c.model.init_dim);
        }
        c.seeds = detail::get_or(j, "seeds", c.seeds);
        c.amplitude_cap = detail::get_or(j, "amplitude_cap", c.amplitude_cap);
        c.tol_exact = detail::get_or(j, "tol_exact", c.tol_exact);
        if (j.contains("tol_trunc") && !j.at("tol_trunc").is_null()) c.tol_trunc = j.at("tol_trunc").get<double>();
        c.suites = detail::get_or(j, "suites", c.suites);
        c.dimension_cap = detail::get_or(j, "dimension_cap", c.dimension_cap);
        if (j.contains("convergence")) {
            const json& cv = j.at("convergence");
            c.convergence_amplitude = detail::get_or(cv, "amplitude", c.convergence_amplitude);
            if (cv.contains("refinements")) {
                c.refinements.clear();
                for (const auto& r : cv.at("refinements")) {
                    c.refinements.push_back({r.at("n_bins").get<int>(), r.at("cutoff_N").get<int>()});
                }
            }
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("malformed config: ") + e.what());
    }
    check_config(c);
    return c;
}

inline json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open " + path);
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

inline SuiteConfig load_config(const std::string& path) { return parse_config(read_json_file(path)); }

}  // namespace fockstop::harness
