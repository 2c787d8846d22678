#pragma once

#include <cstdint>

#include "fockstop/ccr_flow.hpp"

namespace fockstop {

inline void require_joint_horizon(const StopTime& s, const StopTime& t, const char* what) {
    if (!(s.model().params() == t.model().params())) {
        throw DimensionError(std::string(what) + ": stop times live on different models");
    }
    if (s.support() + t.support() > s.model().n_bins()) {
        throw HorizonError(std::string(what) + ": supports " + std::to_string(s.support()) + " + " +
                           std::to_string(t.support()) + " exceed " +
                           std::to_string(s.model().n_bins()) + " bins");
    }
}

/// (S * T)({t_m}) = sum_{k + j = m} P^S_k sigma_k(P^T_j).
inline StopTime convolve(const StopTime& s, const StopTime& t) {
    require_joint_horizon(s, t, "convolution");
    const Model& m = s.model();
    std::map<int, Matrix> acc;
    for (const auto& a : s.masses()) {
        if (a.projection.matrix().trace().real() < 0.5) continue;
        for (const auto& b : t.masses()) {
            if (b.projection.matrix().trace().real() < 0.5) continue;
            const Matrix piece = a.projection.matrix() * sigma_t(m, a.bin, b.projection).matrix();
            auto [it, fresh] = acc.try_emplace(a.bin + b.bin, piece);
            if (!fresh) it->second += piece;
        }
    }
    std::vector<Mass> masses;
    for (auto& [bin, p] : acc) {
        if (p.trace().real() > 0.5) masses.push_back({bin, Operator(fock_space(m), std::move(p))});
    }
    return {m, std::move(masses)};
}

/// X_{<= n-j} (x) I on the last j bins, with X Gaussian of unit Frobenius norm.
inline Operator random_safe_operator(Rng& rng, const Model& m, int j, bool with_initial) {
    require_bin(m, j, "random operator");
    const Index head = outer_dim(m, with_initial) * m.block_dim(m.n_bins() - j);
    return {Space{m.params(), with_initial}, identity_after(m, random_operator(rng, head), m.n_bins() - j)};
}

struct HomomorphismReport {
    double composition = 0.0;      // max ||sigma_{S*T}(X) - sigma_S(sigma_T(X))||
    double time_projection = 0.0;  // ||sigma_S(E_T) - E_{S*T}||
};

inline HomomorphismReport homomorphism_suite(const StopTime& s, const StopTime& t, std::uint64_t seed,
                                             int samples, bool with_initial = false) {
    const Model& m = s.model();
    const StopTime st = convolve(s, t);
    const FlowEndomorphism ss(s), tt(t), sst(st);
    Rng rng(seed);
    HomomorphismReport r;
    for (int i = 0; i < samples; ++i) {
        const Operator x = random_safe_operator(rng, m, s.support() + t.support(), with_initial);
        r.composition = std::max(r.composition, distance(sst(x), ss(tt(x))));
    }
    r.time_projection = distance(ss(time_projection_ES(t)), time_projection_ES(st));
    return r;
}

}  // namespace fockstop
