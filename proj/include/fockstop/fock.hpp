#pragma once

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "fockstop/operator.hpp"

namespace fockstop {

// ---------------------------------------------------------------------------
// Tensor layout helpers.
//
// Every index is (init, head, tail) where head runs over bins 1..k and tail
// over bins k+1..n; the init factor is present only for ambient operators.
// ---------------------------------------------------------------------------

inline Index outer_dim(const Model& m, bool with_initial) { return with_initial ? m.init_dim() : 1; }

/// <vac_{last k bins}| X |vac_{last k bins}>: the compression of X onto the
/// subspace whose last k bins are empty, as an operator on the first n-k bins
/// (with the init factor kept in front).
inline Matrix compress_tail(const Model& m, const Matrix& x, bool with_initial, int k) {
    const Index outer = outer_dim(m, with_initial);
    const Index keep = m.block_dim(m.n_bins() - k);
    const Index stride = m.block_dim(k);
    const Index fock = m.fock_dim();
    std::vector<Index> idx;
    idx.reserve(static_cast<std::size_t>(outer * keep));
    for (Index i = 0; i < outer; ++i) {
        for (Index h = 0; h < keep; ++h) idx.push_back(i * fock + h * stride);
    }
    const Index d = static_cast<Index>(idx.size());
    Matrix out(d, d);
    for (Index c = 0; c < d; ++c) {
        for (Index r = 0; r < d; ++r) out(r, c) = x(idx[r], idx[c]);
    }
    return out;
}

/// I_{bins <= k} (x) Y, where Y acts on (init) (x) bins k+1..n.
inline Matrix identity_before(const Model& m, const Matrix& y, bool with_initial, int k) {
    const Index outer = outer_dim(m, with_initial);
    const Index head = m.block_dim(k);
    const Index tail = m.block_dim(m.n_bins() - k);
    const Index fock = m.fock_dim();
    if (y.rows() != outer * tail || y.cols() != outer * tail) {
        throw DimensionError("identity_before: tail operator has wrong size");
    }
    Matrix out = Matrix::Zero(outer * fock, outer * fock);
    for (Index i = 0; i < outer; ++i) {
        for (Index j = 0; j < outer; ++j) {
            const auto blk = y.block(i * tail, j * tail, tail, tail);
            for (Index h = 0; h < head; ++h) {
                out.block(i * fock + h * tail, j * fock + h * tail, tail, tail) = blk;
            }
        }
    }
    return out;
}

/// X (x) I_{bins > k}, where X acts on (init) (x) bins 1..k. The init factor
/// is the most significant one of X, so a plain Kronecker product keeps it
/// in front.
inline Matrix identity_after(const Model& m, const Matrix& x, int k) {
    const Index tail = m.block_dim(m.n_bins() - k);
    return kron(x, Matrix::Identity(tail, tail));
}

// ---------------------------------------------------------------------------
// Single-bin primitives.
// ---------------------------------------------------------------------------

namespace detail {

inline double factorial(int n) {
    double r = 1.0;
    for (int i = 2; i <= n; ++i) r *= i;
    return r;
}

}  // namespace detail

/// Truncated coherent vector of one bin: sum_{|m|<=N} prod_i a_i^{m_i}/sqrt(m_i!).
inline Vector coherent_bin(const Model& m, const Vector& alpha) {
    if (alpha.size() != m.mult()) throw DimensionError("bin amplitude has wrong multiplicity");
    Vector v(m.bin_dim());
    const auto& basis = m.bin_basis();
    for (std::size_t s = 0; s < basis.size(); ++s) {
        cplx c = 1.0;
        for (int i = 0; i < m.mult(); ++i) {
            const int mi = basis[s][static_cast<std::size_t>(i)];
            for (int r = 0; r < mi; ++r) c *= alpha(i);
            c /= std::sqrt(detail::factorial(mi));
        }
        v(static_cast<Index>(s)) = c;
    }
    return v;
}

/// Creation operator a_i^dagger on one truncated bin.
inline Matrix creation_bin(const Model& m, int mode) {
    Matrix a = Matrix::Zero(m.bin_dim(), m.bin_dim());
    const auto& basis = m.bin_basis();
    for (std::size_t s = 0; s < basis.size(); ++s) {
        std::vector<int> up = basis[s];
        up[static_cast<std::size_t>(mode)] += 1;
        const Index t = m.bin_state_index(up);
        if (t >= 0) a(t, static_cast<Index>(s)) = std::sqrt(static_cast<double>(up[mode]));
    }
    return a;
}

/// exp(a^dagger(alpha) - a(alpha)) on one truncated bin. The generator is
/// exactly anti-Hermitian after truncation, so the result is unitary.
inline Matrix displacement_bin(const Model& m, const Vector& alpha) {
    if (alpha.size() != m.mult()) throw DimensionError("bin amplitude has wrong multiplicity");
    Matrix gen = Matrix::Zero(m.bin_dim(), m.bin_dim());
    for (int i = 0; i < m.mult(); ++i) {
        const Matrix ad = creation_bin(m, i);
        gen += alpha(i) * ad - std::conj(alpha(i)) * ad.adjoint();
    }
    // gen = iH with H Hermitian
    const Matrix h = (cplx(0.0, -1.0) * gen + (cplx(0.0, -1.0) * gen).adjoint()) * 0.5;
    Eigen::SelfAdjointEigenSolver<Matrix> es(h);
    const Vector phases = (cplx(0.0, 1.0) * es.eigenvalues().cast<cplx>()).array().exp().matrix();
    return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

namespace detail {

inline cplx permanent(const Matrix& a) {
    const Index n = a.rows();
    if (n == 0) return 1.0;
    std::vector<Index> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), Index{0});
    cplx total = 0.0;
    do {
        cplx p = 1.0;
        for (Index i = 0; i < n; ++i) p *= a(i, perm[static_cast<std::size_t>(i)]);
        total += p;
    } while (std::next_permutation(perm.begin(), perm.end()));
    return total;
}

}  // namespace detail

/// Second quantization Gamma(A) of a d x d matrix A on one truncated bin.
/// <n|Gamma(A)|n'> = perm(A[n, n']) / sqrt(prod n_i! prod n'_i!), where the
/// rows of A[n, n'] repeat mode i n_i times and the columns n'_i times.
inline Matrix second_quantize_bin(const Model& m, const Matrix& a) {
    if (a.rows() != m.mult() || a.cols() != m.mult()) {
        throw DimensionError("second quantization: matrix must be mult x mult");
    }
    const auto& basis = m.bin_basis();
    const Index b = m.bin_dim();
    Matrix out = Matrix::Zero(b, b);
    auto expand = [&](const std::vector<int>& occ) {
        std::vector<Index> modes;
        for (int i = 0; i < m.mult(); ++i) {
            for (int r = 0; r < occ[static_cast<std::size_t>(i)]; ++r) modes.push_back(i);
        }
        return modes;
    };
    auto norm = [&](const std::vector<int>& occ) {
        double f = 1.0;
        for (int x : occ) f *= detail::factorial(x);
        return f;
    };
    for (Index r = 0; r < b; ++r) {
        const auto rm = expand(basis[static_cast<std::size_t>(r)]);
        for (Index c = 0; c < b; ++c) {
            const auto cm = expand(basis[static_cast<std::size_t>(c)]);
            if (rm.size() != cm.size()) continue;
            const Index k = static_cast<Index>(rm.size());
            Matrix sub(k, k);
            for (Index i = 0; i < k; ++i) {
                for (Index j = 0; j < k; ++j) sub(i, j) = a(rm[i], cm[j]);
            }
            out(r, c) = detail::permanent(sub) /
                        std::sqrt(norm(basis[static_cast<std::size_t>(r)]) *
                                  norm(basis[static_cast<std::size_t>(c)]));
        }
    }
    return out;
}

/// Tensor product of per-bin operators, bin 1 first.
inline Matrix bin_product(const std::vector<Matrix>& per_bin) {
    Matrix out = Matrix::Identity(1, 1);
    for (const auto& op : per_bin) out = kron(out, op);
    return out;
}

// ---------------------------------------------------------------------------
// Fock-space primitives.
// ---------------------------------------------------------------------------

inline void require_function(const Model& m, const StepFunction& f) {
    if (f.n_bins() != m.n_bins() || f.mult() != m.mult()) {
        throw DimensionError("step function does not match the model");
    }
}

inline StateVector vacuum(const Model& m) {
    Vector v = Vector::Zero(m.fock_dim());
    v(0) = 1.0;
    return {fock_space(m), v};
}

/// Exponential vector e(f) = (x)_k e^(f_k); unnormalized, e(0) is the vacuum.
inline StateVector exp_vector(const Model& m, const StepFunction& f) {
    require_function(m, f);
    Vector v = Vector::Ones(1);
    for (int k = 1; k <= m.n_bins(); ++k) v = kron(v, coherent_bin(m, f.bin(k)));
    return {fock_space(m), v};
}

/// e(f) restricted to the first k bins, as a vector on bins 1..k.
inline Vector exp_vector_head(const Model& m, const StepFunction& f, int k) {
    require_function(m, f);
    Vector v = Vector::Ones(1);
    for (int i = 1; i <= k; ++i) v = kron(v, coherent_bin(m, f.bin(i)));
    return v;
}

inline void require_bin(const Model& m, int k, const char* what) {
    if (k < 0 || k > m.n_bins()) {
        throw HorizonError(std::string(what) + ": bin index " + std::to_string(k) + " outside 0.." +
                           std::to_string(m.n_bins()));
    }
}

/// E_k: identity on bins 1..k, vacuum projection on bins k+1..n.
inline Operator time_projection(const Model& m, int k) {
    require_bin(m, k, "time projection");
    Matrix e = Matrix::Zero(m.fock_dim(), m.fock_dim());
    for (Index i = 0; i < m.fock_dim(); ++i) {
        if (m.vacuum_after(i, k)) e(i, i) = 1.0;
    }
    return {fock_space(m), e};
}

/// Gamma_j: second-quantized right shift by j bins. A basis tuple whose
/// last j bins are empty moves j bins to the right; anything else is
/// annihilated, so Gamma_j is isometric exactly on ran E_{n-j}.
inline Operator shift(const Model& m, int j) {
    require_bin(m, j, "shift");
    const Index keep = m.block_dim(m.n_bins() - j);
    const Index stride = m.block_dim(j);
    Matrix g = Matrix::Zero(m.fock_dim(), m.fock_dim());
    for (Index h = 0; h < keep; ++h) g(h, h * stride) = 1.0;
    return {fock_space(m), g};
}

inline Operator shift_adjoint(const Model& m, int j) { return shift(m, j).adjoint(); }

/// Weyl operator W(f) = (x)_k exp(a^dagger(f_k) - a(f_k)).
inline Operator weyl(const Model& m, const StepFunction& f) {
    require_function(m, f);
    Matrix w = Matrix::Identity(1, 1);
    for (int k = 1; k <= m.n_bins(); ++k) w = kron(w, displacement_bin(m, f.bin(k)));
    return {fock_space(m), w};
}

/// ||W*W - I||, reported as a truncation diagnostic.
inline double unitarity_defect(const Operator& w) { return isometry_residual(w.matrix()); }

/// I_{bins <= k} (x) Gamma(p)^{(x)(n-k)} on Fock space.
inline Operator second_quantize_tail(const Model& m, const Matrix& p, int k) {
    require_bin(m, k, "second quantization");
    const Matrix gp = second_quantize_bin(m, p);
    Matrix out = Matrix::Identity(m.block_dim(k), m.block_dim(k));
    for (int i = k + 1; i <= m.n_bins(); ++i) out = kron(out, gp);
    return {fock_space(m), out};
}

// ---------------------------------------------------------------------------
// Commutant tests.
// ---------------------------------------------------------------------------

/// max ||[X, G]|| over matrix units G = |a><b| placed on a single bin in
/// [first_bin, last_bin] (identity on every other factor, init included).
inline double commutant_residual(const Model& m, const Matrix& x, bool with_initial, int first_bin,
                                 int last_bin) {
    const Index dim = x.rows();
    const Index fock = m.fock_dim();
    if (dim != m.dim(with_initial) || x.cols() != dim) {
        throw DimensionError("commutant test: operator has wrong size");
    }
    double worst = 0.0;
    Matrix d(dim, dim);
    for (int bin = std::max(first_bin, 1); bin <= std::min(last_bin, m.n_bins()); ++bin) {
        for (Index a = 0; a < m.bin_dim(); ++a) {
            for (Index b = 0; b < m.bin_dim(); ++b) {
                d.setZero();
                for (Index c = 0; c < dim; ++c) {
                    const Index f = c % fock;
                    if (m.digit(f, bin) == b) d.col(c) += x.col(c - f + m.with_digit(f, bin, a));
                }
                for (Index r = 0; r < dim; ++r) {
                    const Index f = r % fock;
                    if (m.digit(f, bin) == a) d.row(r) -= x.row(r - f + m.with_digit(f, bin, b));
                }
                worst = std::max(worst, norm_bound(d));
            }
        }
    }
    return worst;
}

/// ||X - I_{bins <= r} (x) Y|| with Y the average of the diagonal head blocks
/// of X; zero iff X commutes with every operator on bins 1..r.
inline double head_identity_residual(const Model& m, const Matrix& x, bool with_initial, int r) {
    require_bin(m, r, "head identity test");
    const Index outer = outer_dim(m, with_initial);
    const Index head = m.block_dim(r);
    const Index tail = m.block_dim(m.n_bins() - r);
    const Index fock = m.fock_dim();
    if (x.rows() != outer * fock || x.cols() != outer * fock) {
        throw DimensionError("head identity test: operator has wrong size");
    }
    Matrix y = Matrix::Zero(outer * tail, outer * tail);
    for (Index i = 0; i < outer; ++i) {
        for (Index j = 0; j < outer; ++j) {
            for (Index h = 0; h < head; ++h) {
                y.block(i * tail, j * tail, tail, tail) += x.block(i * fock + h * tail, j * fock + h * tail, tail, tail);
            }
        }
    }
    y /= static_cast<double>(head);
    return norm_bound(x - identity_before(m, y, with_initial, r));
}

/// ||X - X_head (x) I_{bins > k}|| with X_head the average of the diagonal
/// tail blocks of X; zero iff X commutes with every operator on bins > k.
inline double tail_identity_residual(const Model& m, const Matrix& x, bool with_initial, int k) {
    require_bin(m, k, "tail identity test");
    const Index tail = m.block_dim(m.n_bins() - k);
    const Index head = x.rows() / tail;
    if (x.rows() != m.dim(with_initial) || x.cols() != x.rows()) {
        throw DimensionError("tail identity test: operator has wrong size");
    }
    Matrix h = Matrix::Zero(head, head);
    for (Index t = 0; t < tail; ++t) {
        for (Index b = 0; b < head; ++b) {
            for (Index a = 0; a < head; ++a) h(a, b) += x(a * tail + t, b * tail + t);
        }
    }
    h /= static_cast<double>(tail);
    return norm_bound(x - identity_after(m, h, k));
}

struct AdaptednessResult {
    bool adapted = false;
    double residual = 0.0;
};

/// X is adapted at bin k when it commutes with every operator on bins > k,
/// i.e. X = X_{<=k} (x) I_{>k}. The init factor counts as "before".
inline AdaptednessResult adaptedness_check(const Model& m, const Operator& x, int k, double tol) {
    require_bin(m, k, "adaptedness check");
    const double r = tail_identity_residual(m, x.matrix(), x.space().with_initial, k);
    return {r <= tol, r};
}

/// X acts trivially on the last j bins (a precondition for shifting by j).
inline bool is_horizon_safe(const Model& m, const Operator& x, int j, double tol) {
    return adaptedness_check(m, x, m.n_bins() - j, tol).adapted;
}

}  // namespace fockstop
