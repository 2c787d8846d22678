#pragma once

#include <Eigen/QR>

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

#include "fockstop/model.hpp"

namespace fockstop {

/// Seeded generator. Only the engine output is used (no std distributions),
/// so streams are identical across standard library implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    /// Uniform on [0, 1).
    double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [lo, hi].
    int uniform_int(int lo, int hi) {
        const auto span = static_cast<std::uint64_t>(hi - lo + 1);
        return lo + static_cast<int>(eng_() % span);
    }

    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u = 0.0;
        while (u <= 0.0) u = uniform();
        const double v = uniform();
        const double r = std::sqrt(-2.0 * std::log(u));
        spare_ = r * std::sin(2.0 * std::numbers::pi * v);
        has_spare_ = true;
        return r * std::cos(2.0 * std::numbers::pi * v);
    }

    /// Standard complex Gaussian, E|z|^2 = 1.
    cplx gaussian() {
        const double re = normal();
        const double im = normal();
        return {re * std::numbers::sqrt2 / 2.0, im * std::numbers::sqrt2 / 2.0};
    }

    Matrix gaussian_matrix(Index rows, Index cols) {
        Matrix m(rows, cols);
        for (Index c = 0; c < cols; ++c) {
            for (Index r = 0; r < rows; ++r) m(r, c) = gaussian();
        }
        return m;
    }

    Vector gaussian_vector(Index n) { return gaussian_matrix(n, 1).col(0); }

    Vector unit_vector(Index n) {
        Vector v = gaussian_vector(n);
        return v / v.norm();
    }

private:
    std::mt19937_64 eng_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

/// n x r matrix with orthonormal columns spanning C * (Gaussian block).
inline Matrix orthonormal_columns(const Matrix& spanning) {
    Eigen::HouseholderQR<Matrix> qr(spanning);
    return qr.householderQ() * Matrix::Identity(spanning.rows(), spanning.cols());
}

/// Random rank-r subprojection of the orthogonal projection c.
inline Matrix random_subprojection(Rng& rng, const Matrix& c, Index rank) {
    if (rank == 0) return Matrix::Zero(c.rows(), c.cols());
    const Matrix q = orthonormal_columns(c * rng.gaussian_matrix(c.cols(), rank));
    return q * q.adjoint();
}

/// Step function with bins 1..support drawn uniformly in the ball of the
/// given radius (per bin), zero afterwards.
inline StepFunction random_step_function(Rng& rng, const Model& m, double radius, int support) {
    StepFunction f = StepFunction::zero(m);
    for (int k = 1; k <= std::min(support, m.n_bins()); ++k) {
        Vector v = rng.gaussian_vector(m.mult());
        v /= v.norm();
        const double r = radius * std::pow(rng.uniform(), 1.0 / (2.0 * m.mult()));
        f.amplitudes().row(k - 1) = r * v.transpose();
    }
    return f;
}

/// Dense Gaussian matrix normalized to unit Frobenius norm.
inline Matrix random_operator(Rng& rng, Index n) {
    Matrix m = rng.gaussian_matrix(n, n);
    return m / m.norm();
}

}  // namespace fockstop
