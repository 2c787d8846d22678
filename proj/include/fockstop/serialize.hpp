#pragma once

#include <json.hpp>

#include <string>
#include <vector>

#include "fockstop/cocycle.hpp"

namespace fockstop {

/// JSON persistence for stop times and cocycles. Matrices are row-major
/// lists of [re, im] pairs in the basis order documented on Model.
namespace io {

using json = nlohmann::json;

inline constexpr const char* stoptime_schema = "fockstop-stoptime/1";
inline constexpr const char* cocycle_schema = "fockstop-cocycle/1";

inline json params_to_json(const ModelParams& p) {
    return {{"horizon_T", p.horizon},
            {"n_bins", p.n_bins},
            {"cutoff_N", p.cutoff},
            {"mult_d", p.mult},
            {"init_dim", p.init_dim}};
}

inline ModelParams params_from_json(const json& j) {
    ModelParams p;
    p.horizon = j.at("horizon_T").get<double>();
    p.n_bins = j.at("n_bins").get<int>();
    p.cutoff = j.at("cutoff_N").get<int>();
    p.mult = j.at("mult_d").get<int>();
    p.init_dim = j.at("init_dim").get<int>();
    return p;
}

inline json matrix_to_json(const Matrix& m) {
    json out = json::array();
    for (Index r = 0; r < m.rows(); ++r) {
        for (Index c = 0; c < m.cols(); ++c) out.push_back({m(r, c).real(), m(r, c).imag()});
    }
    return out;
}

inline Matrix matrix_from_json(const json& j, Index dim) {
    if (!j.is_array() || static_cast<Index>(j.size()) != dim * dim) {
        throw DimensionError("serialized matrix must hold " + std::to_string(dim * dim) + " entries");
    }
    Matrix m(dim, dim);
    for (Index r = 0; r < dim; ++r) {
        for (Index c = 0; c < dim; ++c) {
            const json& e = j.at(static_cast<std::size_t>(r * dim + c));
            m(r, c) = cplx(e.at(0).get<double>(), e.at(1).get<double>());
        }
    }
    return m;
}

inline void require_schema(const json& j, const char* schema) {
    if (!j.contains("schema") || j.at("schema") != schema) {
        throw ConfigError(std::string("expected a document with schema ") + schema);
    }
}

inline json to_json(const StopTime& s) {
    json masses = json::array();
    for (const auto& ms : s.masses()) masses.push_back({{"bin", ms.bin}, {"matrix", matrix_to_json(ms.projection.matrix())}});
    return {{"schema", stoptime_schema}, {"params", params_to_json(s.model().params())}, {"masses", masses}};
}

/// Parses and validates; throws ValidationError if the axioms fail at tol.
inline StopTime stoptime_from_json(const json& j, double tol = 1e-10,
                                   std::uint64_t dimension_cap = default_dimension_cap) {
    try {
        require_schema(j, stoptime_schema);
        const Model m(params_from_json(j.at("params")), dimension_cap);
        std::vector<Mass> masses;
        for (const auto& e : j.at("masses")) {
            masses.push_back({e.at("bin").get<int>(),
                              Operator(fock_space(m), matrix_from_json(e.at("matrix"), m.fock_dim()))});
        }
        StopTime s(m, std::move(masses));
        require_valid(s, tol);
        return s;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("malformed stop time: ") + e.what());
    }
}

inline json to_json(const Cocycle& v) {
    const Model& m = v.model();
    json entries = json::array();
    for (int k = 0; k <= m.n_bins(); ++k) entries.push_back({{"bin", k}, {"matrix", matrix_to_json(v.at(k).matrix())}});
    return {{"schema", cocycle_schema},
            {"params", params_to_json(m.params())},
            {"kind", v.kind()},
            {"p", matrix_to_json(v.p().matrix())},
            {"entries", entries}};
}

inline Cocycle cocycle_from_json(const json& j, std::uint64_t dimension_cap = default_dimension_cap) {
    try {
        require_schema(j, cocycle_schema);
        const Model m(params_from_json(j.at("params")), dimension_cap);
        const MultiplicityProjection p(matrix_from_json(j.at("p"), m.mult()));
        std::vector<Operator> entries(static_cast<std::size_t>(m.n_bins()) + 1, Operator::zero(ambient_space(m)));
        std::vector<bool> seen(entries.size(), false);
        for (const auto& e : j.at("entries")) {
            const int k = e.at("bin").get<int>();
            require_bin(m, k, "serialized cocycle");
            entries[static_cast<std::size_t>(k)] =
                Operator(ambient_space(m), matrix_from_json(e.at("matrix"), m.ambient_dim()));
            seen[static_cast<std::size_t>(k)] = true;
        }
        for (std::size_t k = 0; k < seen.size(); ++k) {
            if (!seen[k]) throw DimensionError("serialized cocycle lacks bin " + std::to_string(k));
        }
        return {m, p, std::move(entries), j.value("kind", std::string("custom"))};
    } catch (const json::exception& e) {
        throw ConfigError(std::string("malformed cocycle: ") + e.what());
    }
}

}  // namespace io
}  // namespace fockstop
