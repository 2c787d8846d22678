#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fockstop/convolution.hpp"

namespace fockstop {

/// An orthogonal projection p on the multiplicity space.
class MultiplicityProjection {
public:
    explicit MultiplicityProjection(Matrix p, double tol = 1e-12) : p_(std::move(p)) {
        if (p_.rows() != p_.cols()) throw DimensionError("multiplicity projection must be square");
        const double r = projection_residual(p_);
        if (r > tol) throw ValidationError("multiplicity-projection", "residual " + std::to_string(r));
    }

    static MultiplicityProjection identity(int d) { return MultiplicityProjection(Matrix::Identity(d, d)); }
    static MultiplicityProjection zero(int d) { return MultiplicityProjection(Matrix::Zero(d, d)); }

    const Matrix& matrix() const { return p_; }
    int dim() const { return static_cast<int>(p_.rows()); }
    bool is_identity(double tol = 1e-12) const { return norm_bound(p_ - Matrix::Identity(dim(), dim())) <= tol; }
    bool is_zero(double tol = 1e-12) const { return norm_bound(p_) <= tol; }

private:
    Matrix p_;
};

/// A bin-indexed p-adapted process V_0..V_n on initial (x) Fock space.
class Cocycle {
public:
    Cocycle(Model m, MultiplicityProjection p, std::vector<Operator> entries, std::string kind = "custom")
        : model_(std::move(m)), p_(std::move(p)), entries_(std::move(entries)), kind_(std::move(kind)) {
        if (p_.dim() != model_.mult()) throw DimensionError("cocycle: projection does not match multiplicity");
        if (entries_.size() != static_cast<std::size_t>(model_.n_bins()) + 1) {
            throw DimensionError("cocycle needs entries for bins 0..n");
        }
        for (const auto& v : entries_) require_same(v.space(), ambient_space(model_), "cocycle entry");
    }

    const Model& model() const { return model_; }
    const MultiplicityProjection& p() const { return p_; }
    const std::string& kind() const { return kind_; }
    const Operator& at(int k) const {
        require_bin(model_, k, "cocycle");
        return entries_[static_cast<std::size_t>(k)];
    }

    /// I_init (x) I_{bins <= k} (x) Gamma(p) on bins > k.
    Operator tail_projection(int k) const {
        return ampliate(model_, second_quantize_tail(model_, p_.matrix(), k));
    }

    /// V_{k)} on init (x) bins 1..k; Gamma(p) fixes the vacuum, so this is
    /// the vacuum compression of the tail.
    Matrix head(int k) const { return compress_tail(model_, at(k).matrix(), true, model_.n_bins() - k); }

    /// ||V_k - V_{k)} (x) P_{[k}||.
    double factorization_residual(int k) const {
        return norm_bound(at(k).matrix() - kron(head(k), tail_factor(k)));
    }

    /// V^_k = V_{k)} (x) I.
    Operator hat(int k, double tol = 1e-9) const {
        const double r = factorization_residual(k);
        if (r > tol) {
            throw AdaptednessError("cocycle entry " + std::to_string(k) + " does not factor across the bin cut (" +
                                   std::to_string(r) + ")");
        }
        return {ambient_space(model_), identity_after(model_, head(k), k)};
    }

private:
    Matrix tail_factor(int k) const {
        const Matrix gp = second_quantize_bin(model_, p_.matrix());
        Matrix out = Matrix::Identity(1, 1);
        for (int i = k + 1; i <= model_.n_bins(); ++i) out = kron(out, gp);
        return out;
    }

    Model model_;
    MultiplicityProjection p_;
    std::vector<Operator> entries_;
    std::string kind_;
};

// ---------------------------------------------------------------------------
// Constructors.
// ---------------------------------------------------------------------------

inline Operator weyl_upto(const Model& m, const Vector& c, int k) {
    return weyl(m, StepFunction::constant(m, c, k));
}

/// W_k(c) = I_init (x) W(1_{[0, t_k)} c); identity adapted.
inline Cocycle weyl_cocycle(const Model& m, const Vector& c) {
    std::vector<Operator> v;
    for (int k = 0; k <= m.n_bins(); ++k) v.push_back(ampliate(m, weyl_upto(m, c, k)));
    return {m, MultiplicityProjection::identity(m.mult()), std::move(v), "weyl"};
}

/// V_k(c) = I_init (x) E_k W(1_{[0, t_k)} c); vacuum adapted.
inline Cocycle vacuum_weyl_cocycle(const Model& m, const Vector& c) {
    std::vector<Operator> v;
    for (int k = 0; k <= m.n_bins(); ++k) {
        v.push_back(ampliate(m, time_projection(m, k) * weyl_upto(m, c, k)));
    }
    return {m, MultiplicityProjection::zero(m.mult()), std::move(v), "vacuum-weyl"};
}

/// sum_i |i><i| (x) W(1_{[0, t_k)} c_i): a Weyl cocycle steered by the
/// initial-space basis state. Identity adapted.
inline Cocycle controlled_weyl_cocycle(const Model& m, const std::vector<Vector>& cs) {
    if (static_cast<Index>(cs.size()) != m.init_dim()) {
        throw DimensionError("controlled Weyl cocycle needs one amplitude per initial basis state");
    }
    std::vector<Operator> v;
    for (int k = 0; k <= m.n_bins(); ++k) {
        Matrix out = Matrix::Zero(m.ambient_dim(), m.ambient_dim());
        for (Index i = 0; i < m.init_dim(); ++i) {
            out.block(i * m.fock_dim(), i * m.fock_dim(), m.fock_dim(), m.fock_dim()) =
                weyl_upto(m, cs[static_cast<std::size_t>(i)], k).matrix();
        }
        v.push_back({ambient_space(m), std::move(out)});
    }
    return {m, MultiplicityProjection::identity(m.mult()), std::move(v), "controlled-weyl"};
}

/// I_init (x) W(1_{[0, t_k)} c) Gamma(p) on bins > k, for a general p.
/// Experimental: a p-adapted isometric cocycle for any projection p.
inline Cocycle projected_weyl_cocycle(const Model& m, const Vector& c, const MultiplicityProjection& p) {
    std::vector<Operator> v;
    for (int k = 0; k <= m.n_bins(); ++k) {
        v.push_back(ampliate(m, weyl_upto(m, c, k) * second_quantize_tail(m, p.matrix(), k)));
    }
    return {m, p, std::move(v), "projected-weyl"};
}

// ---------------------------------------------------------------------------
// Stopping.
// ---------------------------------------------------------------------------

inline void require_compatible(const Cocycle& v, const StopTime& s) {
    if (!(v.model().params() == s.model().params())) {
        throw DimensionError("cocycle and stop time live on different models");
    }
}

/// V_{S,t} = sum_{k <= t} V_k P_k.
inline Operator stop_cocycle(const Cocycle& v, const StopTime& s, int up_to) {
    require_compatible(v, s);
    const Model& m = v.model();
    require_bin(m, up_to, "stopped cocycle");
    Matrix out = Matrix::Zero(m.ambient_dim(), m.ambient_dim());
    for (const auto& ms : s.masses()) {
        if (ms.bin <= up_to) out += times_lifted(m, v.at(ms.bin).matrix(), ms.projection.matrix(), true);
    }
    return {ambient_space(m), out};
}

inline Operator stop_cocycle(const Cocycle& v, const StopTime& s) { return stop_cocycle(v, s, s.model().n_bins()); }

/// V_{S,pi} = sum_i V_{t_i} S((t_{i-1}, t_i]).
inline Operator stop_cocycle(const Cocycle& v, const StopTime& s, const Partition& p) {
    require_compatible(v, s);
    const Model& m = v.model();
    require_partition(m, p);
    Matrix out = Matrix::Zero(m.ambient_dim(), m.ambient_dim());
    for (std::size_t i = 1; i < p.points.size(); ++i) {
        const Matrix iv = s.interval(p.points[i - 1], p.points[i]);
        if (iv.trace().real() < 0.5) continue;
        out += times_lifted(m, v.at(p.points[i]).matrix(), iv, true);
    }
    return {ambient_space(m), out};
}

/// V^_S = sum_k V^_k P_k.
inline Operator stop_hat(const Cocycle& v, const StopTime& s, double tol = 1e-9) {
    require_compatible(v, s);
    const Model& m = v.model();
    Matrix out = Matrix::Zero(m.ambient_dim(), m.ambient_dim());
    for (const auto& ms : s.masses()) {
        out += times_lifted(m, v.hat(ms.bin, tol).matrix(), ms.projection.matrix(), true);
    }
    return {ambient_space(m), out};
}

}  // namespace fockstop
