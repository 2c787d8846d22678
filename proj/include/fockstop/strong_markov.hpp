#pragma once

#include "fockstop/convolution.hpp"

namespace fockstop {

/// The strong Markov map j_S : ran E_S (x) ran Gamma_S -> Fock space.
///
/// On the horizon the post-S space is only reachable through vectors that are
/// vacuum on the last K = support(S) bins, so the second factor is taken to be
/// Gamma_S(ran E_{n-K}). The map is exactly isometric there.
class StrongMarkov {
public:
    explicit StrongMarkov(StopTime s, double tol = 1e-10)
        : s_(std::move(s)), tol_(tol), es_(time_projection_ES(s_).matrix()), gs_(stopped_shift(s_).matrix()) {
        const Model& m = s_.model();
        const int n = m.n_bins();
        // ran E_S = sum_k ran P~_k (x) vacuum tail.
        std::vector<Vector> cols;
        for (const auto& ms : s_.masses()) {
            const int k = ms.bin;
            const Index tail = m.block_dim(n - k);
            const Matrix head = compress_tail(m, ms.projection.matrix(), false, n - k);
            Eigen::SelfAdjointEigenSolver<Matrix> es(head);
            for (Index i = 0; i < head.rows(); ++i) {
                if (es.eigenvalues()(i) < 0.5) continue;
                Vector v = Vector::Zero(m.fock_dim());
                for (Index h = 0; h < head.rows(); ++h) v(h * tail) = es.eigenvectors()(h, i);
                cols.push_back(std::move(v));
            }
        }
        pre_.resize(m.fock_dim(), static_cast<Index>(cols.size()));
        for (std::size_t i = 0; i < cols.size(); ++i) pre_.col(static_cast<Index>(i)) = cols[i];

        const int k = s_.support();
        const Index safe = m.block_dim(n - k);
        post_.resize(m.fock_dim(), safe);
        for (Index h = 0; h < safe; ++h) post_.col(h) = gs_.col(h * m.block_dim(k));
    }

    const StopTime& stop_time() const { return s_; }
    const Matrix& time_projection() const { return es_; }
    const Matrix& shift() const { return gs_; }

    /// Orthonormal bases of the two factors.
    const Matrix& pre_basis() const { return pre_; }
    const Matrix& post_basis() const { return post_; }

    /// j_S(u (x) Gamma_S y) for u in ran E_S and y vacuum on the last K bins.
    Vector apply_preimage(const Vector& u, const Vector& y) const {
        const Model& m = s_.model();
        const int n = m.n_bins();
        Vector out = Vector::Zero(m.fock_dim());
        for (const auto& ms : s_.masses()) {
            const int k = ms.bin;
            const Index tail = m.block_dim(n - k);
            const Index stride = m.block_dim(k);
            const Vector a = ms.projection.matrix() * u;
            for (Index h = 0; h < m.block_dim(k); ++h) {
                const cplx ah = a(h * tail);
                if (ah == cplx(0.0)) continue;
                for (Index t = 0; t < tail; ++t) out(h * tail + t) += ah * y(t * stride);
            }
        }
        return out;
    }

    /// j_S(u (x) w); throws DomainError outside ran E_S (x) Gamma_S(safe).
    Vector apply(const Vector& u, const Vector& w) const {
        const Model& m = s_.model();
        if (u.size() != m.fock_dim() || w.size() != m.fock_dim()) {
            throw DimensionError("strong Markov map: vectors must live on Fock space");
        }
        const double su = 1.0 + u.norm();
        if ((es_ * u - u).norm() > tol_ * su) throw DomainError("first argument is not in ran E_S");
        const Vector y = gs_.adjoint() * w;
        const double sw = 1.0 + w.norm();
        if ((gs_ * y - w).norm() > tol_ * sw) throw DomainError("second argument is not in ran Gamma_S");
        const Index block = m.block_dim(s_.support());
        double tail_mass = 0.0;
        for (Index i = 0; i < y.size(); ++i) {
            if (i % block != 0) tail_mass += std::norm(y(i));
        }
        if (std::sqrt(tail_mass) > tol_ * sw) {
            throw DomainError("second argument reaches past the horizon of Gamma_S");
        }
        return apply_preimage(u, y);
    }

    /// J(C) = sum_{i,j} C_ij j_S(pre_i (x) post_j) for a coefficient matrix C.
    Vector apply_coefficients(const Matrix& c) const {
        if (c.rows() != pre_.cols() || c.cols() != post_.cols()) {
            throw DimensionError("strong Markov map: coefficient matrix has wrong shape");
        }
        const Model& m = s_.model();
        const Index stride = m.block_dim(s_.support());
        const Matrix u = pre_ * c;
        Vector out = Vector::Zero(m.fock_dim());
        for (Index j = 0; j < c.cols(); ++j) {
            out += apply_preimage(u.col(j), Vector::Unit(m.fock_dim(), j * stride));
        }
        return out;
    }

    /// Dense matrix of j_S in the product basis, column i * r2 + j.
    Matrix matrix() const {
        const Model& m = s_.model();
        const Index stride = m.block_dim(s_.support());
        const Index r2 = post_.cols();
        Matrix out(m.fock_dim(), pre_.cols() * r2);
        for (Index i = 0; i < pre_.cols(); ++i) {
            for (Index j = 0; j < r2; ++j) {
                out.col(i * r2 + j) = apply_preimage(pre_.col(i), Vector::Unit(m.fock_dim(), j * stride));
            }
        }
        return out;
    }

private:
    StopTime s_;
    double tol_;
    Matrix es_;
    Matrix gs_;
    Matrix pre_;
    Matrix post_;
};

/// j_{S,T}(u (x) v (x) w) = j_S(u (x) Gamma_S j_T(Gamma_S* v (x) Gamma_T Gamma_{S*T}* w)).
class ConvolutionMarkov {
public:
    ConvolutionMarkov(const StopTime& s, const StopTime& t, double tol = 1e-10)
        : js_(s, tol), jt_(t, tol), jst_(convolve(s, t), tol), tol_(tol) {}

    const StrongMarkov& outer() const { return js_; }
    const StrongMarkov& inner() const { return jt_; }
    const StrongMarkov& combined() const { return jst_; }

    Vector apply(const Vector& u, const Vector& v, const Vector& w) const {
        const Matrix& gs = js_.shift();
        const Vector v0 = gs.adjoint() * v;
        if ((gs * v0 - v).norm() > tol_ * (1.0 + v.norm())) {
            throw DomainError("middle argument is not in Gamma_S(ran E_T)");
        }
        const Vector z = jst_.shift().adjoint() * w;
        if ((jst_.shift() * z - w).norm() > tol_ * (1.0 + w.norm())) {
            throw DomainError("last argument is not in ran Gamma_{S*T}");
        }
        const Vector inner = jt_.apply(v0, jt_.shift() * z);
        return js_.apply(u, gs * inner);
    }

    /// Orthonormal basis of Gamma_S(ran E_T).
    Matrix middle_basis() const { return js_.shift() * jt_.pre_basis(); }

private:
    StrongMarkov js_;
    StrongMarkov jt_;
    StrongMarkov jst_;
    double tol_;
};

}  // namespace fockstop
