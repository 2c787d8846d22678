#pragma once

#include <gtest/gtest.h>

#include <cstdint>
#include <functional>
#include <string>

#include "fockstop/fockstop.hpp"

namespace fockstop::testing {

/// Small random model: 1..3 bins, cutoff 1..3, d in {1, 2}, init 1..2,
/// ambient dimension kept under 600.
struct ModelGen {
    int max_bins = 3;
    bool allow_init = true;

    ModelParams operator()(Rng& rng) const {
        for (;;) {
            ModelParams p;
            p.horizon = 0.5 + rng.uniform();
            p.n_bins = rng.uniform_int(1, max_bins);
            p.cutoff = rng.uniform_int(1, 3);
            p.mult = rng.uniform_int(1, 2);
            p.init_dim = allow_init ? rng.uniform_int(1, 2) : 1;
            if (compute_sizes(p).ambient <= 600) return p;
        }
    }
};

/// Runs `body` on `cases` independent streams; failures name the case seed.
inline void for_all(int cases, std::uint64_t base, const std::function<void(Rng&, std::uint64_t)>& body) {
    for (int i = 0; i < cases; ++i) {
        const std::uint64_t seed = base * 1000 + static_cast<std::uint64_t>(i);
        SCOPED_TRACE("case seed " + std::to_string(seed));
        Rng rng(seed);
        body(rng, seed);
    }
}

inline Matrix basis_projector(Index dim, std::initializer_list<Index> keep) {
    Matrix p = Matrix::Zero(dim, dim);
    for (Index i : keep) p(i, i) = 1.0;
    return p;
}

/// Per-bin amplitude exactly `r` in a random direction, on bins 1..support.
inline StepFunction function_of_radius(Rng& rng, const Model& m, double r, int support) {
    StepFunction f = StepFunction::zero(m);
    for (int k = 1; k <= support; ++k) f.amplitudes().row(k - 1) = r * rng.unit_vector(m.mult()).transpose();
    return f;
}

}  // namespace fockstop::testing
