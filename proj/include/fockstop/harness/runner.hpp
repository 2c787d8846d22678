#pragma once

#include <atomic>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>
#include <vector>

#include "fockstop/harness/calibrate.hpp"
#include "fockstop/harness/convergence.hpp"

namespace fockstop::harness {

using SuiteFn = void (*)(const Context&, Recorder&);

inline SuiteFn suite_function(const std::string& name) {
    if (name == "stoptime") return suite_stoptime;
    if (name == "markov") return suite_markov;
    if (name == "convolution") return suite_convolution;
    if (name == "flow") return suite_flow;
    if (name == "cocycle") return suite_cocycle;
    if (name == "applebaum") return suite_applebaum;
    if (name == "convergence") return suite_convergence;
    throw ConfigError("unknown suite '" + name + "'");
}

/// Worker count: hardware concurrency, capped by FOCKSTOP_THREADS.
inline unsigned worker_count() {
    unsigned n = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("FOCKSTOP_THREADS")) {
        char* end = nullptr;
        const long cap = std::strtol(env, &end, 10);
        if (end == env || *end != '\0' || cap < 1) throw ConfigError("FOCKSTOP_THREADS must be a positive integer");
        n = std::min(n, static_cast<unsigned>(cap));
    }
    return n;
}

/// The configured tol_trunc, or the calibrated one when unset.
inline double resolve_tol_trunc(const SuiteConfig& c, bool* calibrated = nullptr) {
    if (calibrated) *calibrated = !c.tol_trunc.has_value();
    if (c.tol_trunc) return *c.tol_trunc;
    return calibrate_tolerance(c.model.cutoff, c.model.mult, c.amplitude_cap);
}

/// Runs every (suite, seed) cell. Cells are independent and may run on
/// several threads; records are merged in config order, so the report does
/// not depend on scheduling. The first error raised by a cell is rethrown.
inline Report run_suites(const SuiteConfig& cfg, unsigned threads = worker_count()) {
    check_config(cfg);
    const Model model(cfg.model, cfg.dimension_cap);
    Report rep;
    rep.config = cfg;
    rep.tol_trunc = resolve_tol_trunc(cfg, &rep.tol_trunc_calibrated);
    if (!(rep.tol_trunc > cfg.tol_exact)) rep.tol_trunc = std::max(rep.tol_trunc, cfg.tol_exact);

    struct Cell {
        std::string suite;
        std::uint64_t seed;
        std::vector<Record> records;
        std::exception_ptr error;
    };
    std::vector<Cell> cells;
    std::vector<std::string> seen;
    for (const auto& s : cfg.suites) {
        if (std::find(seen.begin(), seen.end(), s) != seen.end()) continue;
        seen.push_back(s);
        suite_function(s);
        for (const auto seed : cfg.seeds) cells.push_back({s, seed, {}, nullptr});
    }

    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i = next++; i < cells.size(); i = next++) {
            Cell& cell = cells[i];
            try {
                Recorder rec(cell.suite, cell.seed);
                suite_function(cell.suite)(Context{cfg, model, rep.tol_trunc, cell.seed}, rec);
                cell.records = std::move(rec.records());
            } catch (...) {
                cell.error = std::current_exception();
            }
        }
    };
    const unsigned n = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(cells.size())));
    if (n <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (unsigned i = 0; i < n; ++i) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }
    for (auto& cell : cells) {
        if (cell.error) std::rethrow_exception(cell.error);
        rep.records.insert(rep.records.end(), cell.records.begin(), cell.records.end());
    }
    return rep;
}

}  // namespace fockstop::harness
