#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include "fockstop/fock.hpp"

namespace fockstop::harness {

inline constexpr double tol_trunc_floor = 1e-12;

struct TruncationDefects {
    double coherent = 0.0;  // |<e(a), e(b)> - exp(conj(a) b)|
    double weyl = 0.0;      // |<e(g), D(f) e(h)> - closed form|

    double max() const { return std::max(coherent, weyl); }
};

/// Amplitudes r e^{i phi} on the first mode, r in {0, cap/4, ..., cap}.
inline std::vector<Vector> amplitude_grid(int mult, double cap) {
    std::vector<Vector> grid;
    for (int i = 0; i <= 4; ++i) {
        const double r = cap * i / 4.0;
        for (int q = 0; q < (i == 0 ? 1 : 4); ++q) {
            Vector a = Vector::Zero(mult);
            a(0) = std::polar(r, q * std::numbers::pi / 2.0);
            grid.push_back(a);
        }
    }
    return grid;
}

/// Single-bin truncation defects at cutoff N over the amplitude grid.
inline TruncationDefects single_bin_defects(int cutoff, int mult, double cap) {
    const Model m(ModelParams{1.0, 1, cutoff, mult, 1});
    const auto grid = amplitude_grid(mult, cap);
    std::vector<Vector> coh;
    std::vector<Matrix> disp;
    for (const auto& a : grid) {
        coh.push_back(coherent_bin(m, a));
        disp.push_back(displacement_bin(m, a));
    }
    TruncationDefects d;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        for (std::size_t j = 0; j < grid.size(); ++j) {
            const cplx exact = std::exp(grid[i].dot(grid[j]));
            d.coherent = std::max(d.coherent, std::abs(coh[i].dot(coh[j]) - exact));
        }
    }
    for (std::size_t f = 0; f < grid.size(); ++f) {
        for (std::size_t h = 0; h < grid.size(); ++h) {
            const Vector moved = disp[f] * coh[h];
            const cplx pre = std::exp(-0.5 * grid[f].squaredNorm() - grid[f].dot(grid[h]));
            const Vector fh = grid[f] + grid[h];
            for (std::size_t g = 0; g < grid.size(); ++g) {
                const cplx exact = pre * std::exp(grid[g].dot(fh));
                d.weyl = std::max(d.weyl, std::abs(coh[g].dot(moved) - exact));
            }
        }
    }
    return d;
}

/// tol_trunc = 10 x the worst single-bin defect, floored at 1e-12.
inline double calibrate_tolerance(int cutoff, int mult, double cap) {
    return std::max(tol_trunc_floor, 10.0 * single_bin_defects(cutoff, mult, cap).max());
}

}  // namespace fockstop::harness
