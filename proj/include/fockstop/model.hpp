#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "fockstop/errors.hpp"

namespace fockstop {

using Index = Eigen::Index;
using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

/// Upper bound on the ambient dimension (initial space times Fock space)
/// accepted when a Model is built without an explicit cap.
inline constexpr std::uint64_t default_dimension_cap = 4096;

/// Discretization parameters. Time [0, horizon) is cut into n_bins bins of
/// equal width; each bin carries a d-mode bosonic space truncated at total
/// occupation `cutoff`. The initial space is the leftmost tensor factor.
struct ModelParams {
    double horizon = 1.0;
    int n_bins = 4;
    int cutoff = 3;
    int mult = 1;
    int init_dim = 1;

    double bin_width() const { return horizon / static_cast<double>(n_bins); }

    friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

inline std::string describe(const ModelParams& p) {
    std::ostringstream os;
    os << "(T=" << p.horizon << ", n_bins=" << p.n_bins << ", cutoff=" << p.cutoff
       << ", mult=" << p.mult << ", init_dim=" << p.init_dim << ")";
    return os.str();
}

/// Sizes implied by a parameter set. Values saturate at UINT64_MAX so the
/// cap comparison is safe before anything is allocated.
struct ModelSizes {
    std::uint64_t per_bin = 0;
    std::uint64_t fock = 0;
    std::uint64_t ambient = 0;
};

namespace detail {

inline std::uint64_t sat_mul(std::uint64_t a, std::uint64_t b) {
    if (a != 0 && b > std::numeric_limits<std::uint64_t>::max() / a) {
        return std::numeric_limits<std::uint64_t>::max();
    }
    return a * b;
}

// C(n, k) with saturation; exact while the result fits.
inline std::uint64_t binomial(std::uint64_t n, std::uint64_t k) {
    if (k > n) return 0;
    k = std::min(k, n - k);
    unsigned __int128 r = 1;
    for (std::uint64_t i = 1; i <= k; ++i) {
        r = r * (n - k + i) / i;
        if (r > std::numeric_limits<std::uint64_t>::max()) {
            return std::numeric_limits<std::uint64_t>::max();
        }
    }
    return static_cast<std::uint64_t>(r);
}

}  // namespace detail

inline ModelSizes compute_sizes(const ModelParams& p) {
    ModelSizes s;
    if (p.n_bins <= 0 || p.cutoff < 0 || p.mult <= 0 || p.init_dim <= 0) return s;
    // sum_{m=0}^{N} C(m+d-1, d-1) = C(N+d, d)
    s.per_bin = detail::binomial(static_cast<std::uint64_t>(p.cutoff + p.mult),
                                 static_cast<std::uint64_t>(p.mult));
    s.fock = 1;
    for (int k = 0; k < p.n_bins; ++k) s.fock = detail::sat_mul(s.fock, s.per_bin);
    s.ambient = detail::sat_mul(s.fock, static_cast<std::uint64_t>(p.init_dim));
    return s;
}

inline void check_params(const ModelParams& p, std::uint64_t dimension_cap) {
    if (!(p.horizon > 0.0) || p.n_bins <= 0) {
        throw ConfigError("bin width must be strictly positive " + describe(p));
    }
    if (p.cutoff < 0 || p.mult <= 0 || p.init_dim <= 0) {
        throw ConfigError("invalid model parameters " + describe(p));
    }
    const ModelSizes s = compute_sizes(p);
    if (s.ambient > dimension_cap) {
        std::ostringstream os;
        os << "model " << describe(p) << " needs per-bin dim " << s.per_bin << ", Fock dim "
           << s.fock << ", ambient dim " << s.ambient << " > cap " << dimension_cap;
        throw ModelTooLarge(os.str());
    }
}

/// A validated model together with its basis layout.
///
/// Basis ordering: a Fock index is the base-b number whose most significant
/// digit is bin 1; within a bin, occupation tuples (m_1, ..., m_d) with
/// m_1 + ... + m_d <= cutoff are listed lexicographically, so digit 0 is the
/// bin vacuum. An ambient index is init_index * fock_dim + fock_index.
class Model {
public:
    explicit Model(ModelParams params, std::uint64_t dimension_cap = default_dimension_cap)
        : params_(params) {
        check_params(params_, dimension_cap);
        const ModelSizes s = compute_sizes(params_);
        bin_dim_ = static_cast<Index>(s.per_bin);
        fock_dim_ = static_cast<Index>(s.fock);
        ambient_dim_ = static_cast<Index>(s.ambient);

        std::vector<int> occ(static_cast<std::size_t>(params_.mult), 0);
        enumerate(0, params_.cutoff, occ);
        powers_.resize(static_cast<std::size_t>(params_.n_bins) + 1);
        powers_[0] = 1;
        for (int k = 1; k <= params_.n_bins; ++k) powers_[k] = powers_[k - 1] * bin_dim_;
    }

    const ModelParams& params() const { return params_; }
    int n_bins() const { return params_.n_bins; }
    int mult() const { return params_.mult; }
    int cutoff() const { return params_.cutoff; }
    Index init_dim() const { return params_.init_dim; }
    double bin_width() const { return params_.bin_width(); }

    Index bin_dim() const { return bin_dim_; }
    Index fock_dim() const { return fock_dim_; }
    Index ambient_dim() const { return ambient_dim_; }
    Index dim(bool with_initial) const { return with_initial ? ambient_dim_ : fock_dim_; }

    /// Dimension of a block of `bins` consecutive bins (b^bins).
    Index block_dim(int bins) const { return powers_.at(static_cast<std::size_t>(bins)); }

    /// Occupation tuples of one bin, in basis order.
    const std::vector<std::vector<int>>& bin_basis() const { return basis_; }

    int total_occupation(Index bin_state) const {
        int s = 0;
        for (int m : basis_[static_cast<std::size_t>(bin_state)]) s += m;
        return s;
    }

    /// Basis position of an occupation tuple, or -1 when it is truncated away.
    Index bin_state_index(const std::vector<int>& occ) const {
        for (std::size_t i = 0; i < basis_.size(); ++i) {
            if (basis_[i] == occ) return static_cast<Index>(i);
        }
        return -1;
    }

    /// Digit (per-bin state) of Fock index `idx` at bin `bin` in 1..n.
    Index digit(Index idx, int bin) const {
        return (idx / block_dim(params_.n_bins - bin)) % bin_dim_;
    }

    Index with_digit(Index idx, int bin, Index value) const {
        const Index stride = block_dim(params_.n_bins - bin);
        return idx + (value - digit(idx, bin)) * stride;
    }

    /// True when every bin after `k` is in its vacuum state.
    bool vacuum_after(Index idx, int k) const { return idx % block_dim(params_.n_bins - k) == 0; }

    /// True when every bin in 1..k is in its vacuum state.
    bool vacuum_before(Index idx, int k) const { return idx < block_dim(params_.n_bins - k); }

private:
    void enumerate(std::size_t pos, int remaining, std::vector<int>& occ) {
        if (pos == occ.size()) {
            basis_.push_back(occ);
            return;
        }
        for (int m = 0; m <= remaining; ++m) {
            occ[pos] = m;
            enumerate(pos + 1, remaining - m, occ);
        }
        occ[pos] = 0;
    }

    ModelParams params_;
    Index bin_dim_ = 0;
    Index fock_dim_ = 0;
    Index ambient_dim_ = 0;
    std::vector<std::vector<int>> basis_;
    std::vector<Index> powers_;
};

/// Which factor an operator or vector acts on: Fock space alone, or the
/// initial space tensored with Fock space.
struct Space {
    ModelParams params;
    bool with_initial = false;

    friend bool operator==(const Space&, const Space&) = default;
};

inline Space fock_space(const Model& m) { return {m.params(), false}; }
inline Space ambient_space(const Model& m) { return {m.params(), true}; }

inline Index dimension_of(const Space& s) {
    const ModelSizes sz = compute_sizes(s.params);
    return static_cast<Index>(s.with_initial ? sz.ambient : sz.fock);
}

/// Piecewise-constant test function. Row k-1 holds the integrated amplitude
/// of bin k scaled by 1/sqrt(bin width), so the L2 norm is the Frobenius
/// norm of the amplitude matrix.
class StepFunction {
public:
    StepFunction() = default;
    explicit StepFunction(Matrix amplitudes) : amps_(std::move(amplitudes)) {}

    static StepFunction zero(const Model& m) {
        return StepFunction(Matrix::Zero(m.n_bins(), m.mult()));
    }

    /// c * 1_{[0, t_k)}, i.e. amplitude c * sqrt(bin width) on bins 1..k.
    static StepFunction constant(const Model& m, const Vector& c, int up_to_bin) {
        StepFunction f = zero(m);
        const double s = std::sqrt(m.bin_width());
        for (int k = 0; k < up_to_bin && k < m.n_bins(); ++k) f.amps_.row(k) = s * c.transpose();
        return f;
    }

    int n_bins() const { return static_cast<int>(amps_.rows()); }
    int mult() const { return static_cast<int>(amps_.cols()); }
    const Matrix& amplitudes() const { return amps_; }
    Matrix& amplitudes() { return amps_; }

    /// Amplitude vector of bin k (1-based).
    Vector bin(int k) const { return amps_.row(k - 1).transpose(); }

    /// Largest bin carrying a nonzero amplitude (0 for the zero function).
    int support() const {
        for (int k = n_bins(); k >= 1; --k) {
            if (amps_.row(k - 1).squaredNorm() > 0.0) return k;
        }
        return 0;
    }

    double norm() const { return amps_.norm(); }

    /// f * 1_{bins <= k}
    StepFunction head(int k) const {
        StepFunction g = *this;
        for (int i = k; i < n_bins(); ++i) g.amps_.row(i).setZero();
        return g;
    }

    /// f * 1_{bins > k}
    StepFunction tail(int k) const {
        StepFunction g = *this;
        for (int i = 0; i < std::min(k, n_bins()); ++i) g.amps_.row(i).setZero();
        return g;
    }

    /// Right shift by j bins; mass pushed past the horizon is dropped.
    StepFunction shifted(int j) const {
        StepFunction g(Matrix::Zero(amps_.rows(), amps_.cols()));
        for (int i = 0; i + j < n_bins(); ++i) g.amps_.row(i + j) = amps_.row(i);
        return g;
    }

    /// Left shift by j bins (adjoint of the right shift).
    StepFunction shifted_back(int j) const {
        StepFunction g(Matrix::Zero(amps_.rows(), amps_.cols()));
        for (int i = j; i < n_bins(); ++i) g.amps_.row(i - j) = amps_.row(i);
        return g;
    }

    StepFunction operator+(const StepFunction& o) const { return StepFunction(amps_ + o.amps_); }
    StepFunction operator-(const StepFunction& o) const { return StepFunction(amps_ - o.amps_); }
    StepFunction operator*(cplx s) const { return StepFunction(amps_ * s); }

private:
    Matrix amps_;
};

/// <f, g> in L2, conjugate-linear in f.
inline cplx inner(const StepFunction& f, const StepFunction& g) {
    return (f.amplitudes().conjugate().cwiseProduct(g.amplitudes())).sum();
}

/// <f, g> restricted to bins > k.
inline cplx inner_after(const StepFunction& f, const StepFunction& g, int k) {
    cplx s = 0.0;
    for (int i = k; i < f.n_bins(); ++i) {
        s += f.amplitudes().row(i).conjugate().cwiseProduct(g.amplitudes().row(i)).sum();
    }
    return s;
}

}  // namespace fockstop
