#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "fockstop/harness/suites.hpp"

namespace fockstop::harness {

struct ConvergenceRow {
    std::string identity;
    int n_bins = 0;
    int cutoff = 0;
    double amplitude = 0.0;
    double residual = 0.0;
};

/// Residuals below this are treated as equal when comparing successive cutoffs.
inline constexpr double convergence_floor = 1e-12;

/// Refinement checks run only where the refined Fock space stays this small.
inline constexpr Index refinement_dimension_limit = 1024;

namespace detail {

inline Model sweep_model(const SuiteConfig& cfg, int n_bins, int cutoff) {
    ModelParams p = cfg.model;
    p.n_bins = n_bins;
    p.cutoff = cutoff;
    p.init_dim = 1;
    return Model(p, cfg.dimension_cap);
}

/// Step function with per-bin amplitude exactly `amp` and random direction.
inline StepFunction fixed_amplitude_function(Rng& rng, const Model& m, double amp) {
    StepFunction f = StepFunction::zero(m);
    for (int k = 1; k <= m.n_bins(); ++k) f.amplitudes().row(k - 1) = amp * rng.unit_vector(m.mult()).transpose();
    return f;
}

/// Isometry from one coarse bin into a pair of fine bins: each coarse mode
/// becomes the symmetric mode (a_1 + a_2)/sqrt(2) of the two halves.
inline Matrix dyadic_bin_embedding(const Model& coarse, const Model& fine) {
    const Index b = coarse.bin_dim();
    const Index bf = fine.bin_dim();
    const int d = coarse.mult();
    Matrix out = Matrix::Zero(bf * bf, b);
    for (Index s = 0; s < b; ++s) {
        const std::vector<int>& occ = coarse.bin_basis()[static_cast<std::size_t>(s)];
        std::vector<int> left(static_cast<std::size_t>(d), 0);
        // Odometer over 0 <= left[i] <= occ[i].
        while (true) {
            double amp = 1.0;
            std::vector<int> right(static_cast<std::size_t>(d));
            for (int i = 0; i < d; ++i) {
                const auto mi = static_cast<std::uint64_t>(occ[i]);
                right[i] = occ[i] - left[i];
                amp *= std::sqrt(static_cast<double>(fockstop::detail::binomial(mi, static_cast<std::uint64_t>(left[i])))) /
                       std::pow(2.0, occ[i] / 2.0);
            }
            out(fine.bin_state_index(left) * bf + fine.bin_state_index(right), s) = amp;
            int i = 0;
            while (i < d && left[i] == occ[i]) left[i++] = 0;
            if (i == d) break;
            ++left[i];
        }
    }
    return out;
}

inline Matrix kron_power(const Matrix& a, int k) {
    Matrix out = Matrix::Identity(1, 1);
    for (int i = 0; i < k; ++i) out = kron(out, a);
    return out;
}

/// The coarse stop time carried to the 2x finer grid: P_k moves to bin 2k
/// through the embedding; the final bin takes the remainder.
inline StopTime refine_stoptime(const StopTime& s, const Model& fine, const Matrix& bin_embed) {
    const Model& m = s.model();
    const int n = m.n_bins();
    const Index fd = fine.fock_dim();
    std::vector<Mass> masses;
    Matrix rest = Matrix::Identity(fd, fd);
    for (const auto& ms : s.masses()) {
        if (ms.bin >= n) continue;
        const Matrix head = compress_tail(m, ms.projection.matrix(), false, n - ms.bin);
        const Matrix iota = kron_power(bin_embed, ms.bin);
        const Matrix p = identity_after(fine, iota * head * iota.adjoint(), 2 * ms.bin);
        rest -= p;
        masses.push_back({2 * ms.bin, Operator(fock_space(fine), p)});
    }
    masses.push_back({2 * n, Operator(fock_space(fine), rest)});
    return {fine, std::move(masses)};
}

struct RefinementResidual {
    double axioms = 0.0;
    double exps = 0.0;
    double compression = 0.0;
    double coarse_grid = 0.0;
};

inline double exps_residual(const StopTime& s) {
    const int n = s.model().n_bins();
    std::vector<Matrix> es;
    for (int t = 0; t <= n; ++t) es.push_back(time_projection_ES(s, t).matrix());
    double r = 0.0;
    for (int a = 0; a <= n; ++a) {
        r = std::max(r, norm_bound(s.cumulative(a) * es[n] - es[a]));
        for (int b = a; b <= n; ++b) r = std::max(r, norm_bound(es[a] * es[b] - es[a]));
    }
    return r;
}

inline RefinementResidual refinement_residuals(const StopTime& s, const Model& fine) {
    const Model& m = s.model();
    const Matrix bin_embed = dyadic_bin_embedding(m, fine);
    const StopTime f = refine_stoptime(s, fine, bin_embed);
    const Matrix iota = kron_power(bin_embed, m.n_bins());
    RefinementResidual r;
    r.axioms = validate(f, 1.0).max_residual();
    r.exps = exps_residual(f);
    const Matrix ef = time_projection_ES(f).matrix();
    r.compression = norm_bound(iota.adjoint() * ef * iota - time_projection_ES(s).matrix());
    Partition even{{0}};
    for (int k = 1; k <= m.n_bins(); ++k) even.points.push_back(2 * k);
    r.coarse_grid = norm_bound(time_projection_ES(f, even).matrix() - ef);
    return r;
}

}  // namespace detail

/// Truncation residuals of exponential-vector and Weyl identities at each
/// configured (n_bins, cutoff_N), plus refinement residuals where affordable.
inline std::vector<ConvergenceRow> convergence_study(const SuiteConfig& cfg, std::uint64_t seed) {
    using namespace detail;
    std::vector<ConvergenceRow> rows;
    const double amp = cfg.convergence_amplitude;
    for (const auto& ref : cfg.refinements) {
        const Model m = sweep_model(cfg, ref.n_bins, ref.cutoff);
        // The test functions depend on n_bins only, never on the cutoff.
        Rng rng(derive_seed(seed, 700 + static_cast<std::uint64_t>(ref.n_bins)));
        const StepFunction f = fixed_amplitude_function(rng, m, amp);
        const StepFunction g = fixed_amplitude_function(rng, m, amp);
        const StepFunction h = fixed_amplitude_function(rng, m, amp);
        const Vector ef = exp_vector(m, f).amplitudes();
        const Vector eg = exp_vector(m, g).amplitudes();
        const Vector eh = exp_vector(m, h).amplitudes();
        const Operator w = weyl(m, f);
        const cplx weyl_exact = std::exp(-0.5 * f.norm() * f.norm() - inner(f, h) + inner(g, f + h));
        rows.push_back({"exp-inner", ref.n_bins, ref.cutoff, amp, std::abs(ef.dot(eg) - std::exp(inner(f, g)))});
        rows.push_back({"weyl-element", ref.n_bins, ref.cutoff, amp, std::abs(eg.dot(w.matrix() * eh) - weyl_exact)});
        rows.push_back({"weyl-unitarity", ref.n_bins, ref.cutoff, amp, unitarity_defect(w)});

        ModelParams fp = m.params();
        fp.n_bins *= 2;
        const ModelSizes sizes = compute_sizes(fp);
        if (sizes.fock > static_cast<std::uint64_t>(refinement_dimension_limit) || sizes.ambient > cfg.dimension_cap) {
            continue;
        }
        const Model fine(fp, cfg.dimension_cap);
        const StopTime s = random_stoptime(m, derive_seed(seed, 800 + static_cast<std::uint64_t>(ref.cutoff)));
        const RefinementResidual rr = refinement_residuals(s, fine);
        rows.push_back({"refined-axioms", fp.n_bins, ref.cutoff, 0.0, rr.axioms});
        rows.push_back({"refined-expS", fp.n_bins, ref.cutoff, 0.0, rr.exps});
        rows.push_back({"refined-compression", fp.n_bins, ref.cutoff, 0.0, rr.compression});
        rows.push_back({"refined-coarse-grid", fp.n_bins, ref.cutoff, 0.0, rr.coarse_grid});
    }
    return rows;
}

/// Worst ratio r(N_next) / r(N) over successive cutoffs of each
/// (identity, n_bins) series, residuals floored at convergence_floor.
inline double worst_cutoff_ratio(const std::vector<ConvergenceRow>& rows, const std::string& identity) {
    std::map<int, std::vector<std::pair<int, double>>> series;
    for (const auto& r : rows) {
        if (r.identity == identity) series[r.n_bins].emplace_back(r.cutoff, r.residual);
    }
    double worst = 0.0;
    for (auto& [bins, pts] : series) {
        std::sort(pts.begin(), pts.end());
        for (std::size_t i = 1; i < pts.size(); ++i) {
            const double prev = std::max(pts[i - 1].second, convergence_floor);
            const double next = std::max(pts[i].second, convergence_floor);
            worst = std::max(worst, next / prev);
        }
    }
    return worst;
}

inline std::string to_csv(const std::vector<ConvergenceRow>& rows) {
    std::ostringstream os;
    os << "identity,n_bins,cutoff_N,amplitude,residual\n";
    char buf[64];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%.6e", r.residual);
        os << r.identity << ',' << r.n_bins << ',' << r.cutoff << ',' << r.amplitude << ',' << buf << '\n';
    }
    return os.str();
}

inline void suite_convergence(const Context& c, Recorder& r) {
    const std::vector<ConvergenceRow> rows = convergence_study(c.config, c.seed);
    for (const char* id : {"exp-inner", "weyl-element", "weyl-unitarity"}) {
        r.check(std::string(id) + ": residual ratio between successive cutoffs", "convergence:cutoff",
                worst_cutoff_ratio(rows, id), 2.0);
    }
    const double e12 = c.exact(1e-12);
    double axioms = 0.0, exps = 0.0, comp = 0.0, grid = 0.0;
    bool any = false;
    for (const auto& row : rows) {
        if (row.identity == "refined-axioms") axioms = std::max(axioms, row.residual), any = true;
        if (row.identity == "refined-expS") exps = std::max(exps, row.residual);
        if (row.identity == "refined-compression") comp = std::max(comp, row.residual);
        if (row.identity == "refined-coarse-grid") grid = std::max(grid, row.residual);
    }
    if (!any) return;
    r.check("refined stop time satisfies the axioms", "convergence:refinement", axioms, e12);
    r.check("E_(S,s) E_(S,t) = E_(S,min(s,t)) on the refined grid", "convergence:refinement", exps, e12);
    r.check("embedding* E_S(refined) embedding = E_S", "convergence:refinement", comp, e12);
    r.check("coarse-grid Riemann sum equals E_S on the refined grid", "convergence:refinement", grid, e12);
}

}  // namespace fockstop::harness
