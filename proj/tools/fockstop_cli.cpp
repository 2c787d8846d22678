#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "fockstop/harness/runner.hpp"

namespace fs = std::filesystem;
using namespace fockstop;
using namespace fockstop::harness;

namespace {

constexpr int exit_pass = 0;
constexpr int exit_fail = 1;
constexpr int exit_config = 2;

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + path.string());
    out << text;
}

fs::path prepare_dir(const std::string& dir) {
    fs::path p(dir);
    std::error_code ec;
    fs::create_directories(p, ec);
    if (ec) throw ConfigError("cannot create " + dir + ": " + ec.message());
    return p;
}

int run(const std::string& config_path, const std::vector<std::string>& suites,
        const std::vector<std::uint64_t>& seeds, const std::string& out_dir) {
    SuiteConfig cfg = load_config(config_path);
    if (!suites.empty()) cfg.suites = suites;
    if (!seeds.empty()) cfg.seeds = seeds;
    check_config(cfg);
    const Report rep = run_suites(cfg);
    const fs::path dir = prepare_dir(out_dir);
    write_file(dir / "report.json", to_json(rep).dump(2) + "\n");
    write_file(dir / "report.md", to_markdown(rep));
    const Summary s = rep.summary();
    std::cout << s.passed << "/" << s.total << " checks passed";
    if (s.failed) std::cout << ", " << s.failed << " failed";
    if (s.exploratory_failed) std::cout << ", " << s.exploratory_failed << " exploratory failures";
    std::cout << " (tol_trunc " << sci(rep.tol_trunc) << ")\n";
    for (const auto& r : rep.records) {
        if (!r.pass && !r.exploratory) {
            std::cout << "FAIL " << r.suite << " seed " << r.seed << ": " << r.name << " [" << r.anchor << "] "
                      << sci(r.residual) << " > " << sci(r.tolerance) << "\n";
        }
    }
    return s.all_pass() ? exit_pass : exit_fail;
}

int converge(const std::string& config_path, const std::string& out_dir) {
    const SuiteConfig cfg = load_config(config_path);
    const std::uint64_t seed = cfg.seeds.empty() ? 1 : cfg.seeds.front();
    const auto rows = convergence_study(cfg, seed);
    const fs::path dir = prepare_dir(out_dir);
    write_file(dir / "convergence.csv", to_csv(rows));
    bool ok = true;
    for (const char* id : {"exp-inner", "weyl-element", "weyl-unitarity"}) {
        const double ratio = worst_cutoff_ratio(rows, id);
        std::cout << id << ": worst successive-cutoff ratio " << sci(ratio) << "\n";
        ok = ok && ratio <= 2.0;
    }
    for (const auto& r : rows) {
        if (r.identity.rfind("refined-", 0) == 0 && r.residual > 1e-12) ok = false;
    }
    std::cout << "wrote " << (dir / "convergence.csv").string() << "\n";
    return ok ? exit_pass : exit_fail;
}

int calibrate(const std::string& config_path) {
    json j = read_json_file(config_path);
    SuiteConfig cfg = parse_config(j);
    const double tol = calibrate_tolerance(cfg.model.cutoff, cfg.model.mult, cfg.amplitude_cap);
    if (!(tol > cfg.tol_exact)) {
        throw ConfigError("calibrated tol_trunc " + sci(tol) + " does not exceed tol_exact " + sci(cfg.tol_exact));
    }
    j["tol_trunc"] = tol;
    write_file(config_path, j.dump(2) + "\n");
    std::cout << "tol_trunc = " << sci(tol) << " written to " << config_path << "\n";
    return exit_pass;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Quantum stop times on a truncated Fock space: verification harness"};
    app.require_subcommand(1);

    std::string config_path, out_dir = ".";
    std::vector<std::string> suites;
    std::vector<std::uint64_t> seeds;

    auto* run_cmd = app.add_subcommand("run", "run the theorem suites and write report.json / report.md");
    run_cmd->add_option("--config", config_path, "suite configuration (JSON)")->required();
    run_cmd->add_option("--suite", suites, "restrict to this suite (repeatable)");
    run_cmd->add_option("--seed", seeds, "restrict to this seed (repeatable)");
    run_cmd->add_option("--out", out_dir, "output directory");

    auto* conv_cmd = app.add_subcommand("converge", "cutoff sweep and dyadic refinement study as CSV");
    conv_cmd->add_option("--config", config_path, "suite configuration (JSON)")->required();
    conv_cmd->add_option("--out", out_dir, "output directory")->required();

    auto* cal_cmd = app.add_subcommand("calibrate", "calibrate tol_trunc and write it into the config");
    cal_cmd->add_option("--config", config_path, "suite configuration (JSON)")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? exit_pass : exit_config;
    }

    try {
        if (*run_cmd) return run(config_path, suites, seeds, out_dir);
        if (*conv_cmd) return converge(config_path, out_dir);
        if (*cal_cmd) return calibrate(config_path);
    } catch (const ModelTooLarge& e) {
        std::cerr << "fockstop: model too large: " << e.what() << "\n";
        return exit_config;
    } catch (const std::exception& e) {
        std::cerr << "fockstop: " << e.what() << "\n";
        return exit_config;
    }
    return exit_config;
}
