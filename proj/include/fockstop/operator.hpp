#pragma once

#include <cmath>
#include <string>

#include "fockstop/model.hpp"

namespace fockstop {

/// Cheap upper bound on the operator norm: sqrt(||A||_1 * ||A||_inf).
/// Used for every matrix residual so tolerances are dimension-robust.
inline double norm_bound(const Matrix& a) {
    if (a.size() == 0) return 0.0;
    const Eigen::MatrixXd abs = a.cwiseAbs();
    const double col = abs.colwise().sum().maxCoeff();
    const double row = abs.rowwise().sum().maxCoeff();
    return std::sqrt(col * row);
}

inline void require_same(const Space& a, const Space& b, const char* what) {
    if (!(a == b)) {
        throw DimensionError(std::string(what) + ": operands act on different spaces");
    }
}

class StateVector {
public:
    StateVector(Space space, Vector amplitudes) : space_(std::move(space)), amps_(std::move(amplitudes)) {
        if (amps_.size() != dimension_of(space_)) {
            throw DimensionError("state vector length does not match its space");
        }
    }

    static StateVector zero(const Space& s) { return {s, Vector::Zero(dimension_of(s))}; }

    const Space& space() const { return space_; }
    const Vector& amplitudes() const { return amps_; }
    Vector& amplitudes() { return amps_; }
    Index size() const { return amps_.size(); }
    double norm() const { return amps_.norm(); }

    StateVector operator+(const StateVector& o) const {
        require_same(space_, o.space_, "vector sum");
        return {space_, amps_ + o.amps_};
    }
    StateVector operator-(const StateVector& o) const {
        require_same(space_, o.space_, "vector difference");
        return {space_, amps_ - o.amps_};
    }
    StateVector operator*(cplx s) const { return {space_, amps_ * s}; }

private:
    Space space_;
    Vector amps_;
};

inline cplx inner(const StateVector& a, const StateVector& b) {
    require_same(a.space(), b.space(), "inner product");
    return a.amplitudes().dot(b.amplitudes());
}

class Operator {
public:
    Operator(Space space, Matrix matrix) : space_(std::move(space)), m_(std::move(matrix)) {
        const Index n = dimension_of(space_);
        if (m_.rows() != n || m_.cols() != n) {
            throw DimensionError("operator matrix does not match its space");
        }
    }

    static Operator identity(const Space& s) {
        const Index n = dimension_of(s);
        return {s, Matrix::Identity(n, n)};
    }
    static Operator zero(const Space& s) {
        const Index n = dimension_of(s);
        return {s, Matrix::Zero(n, n)};
    }

    const Space& space() const { return space_; }
    const Matrix& matrix() const { return m_; }
    Matrix& matrix() { return m_; }
    Index dim() const { return m_.rows(); }

    Operator adjoint() const { return {space_, m_.adjoint()}; }

    Operator operator*(const Operator& o) const {
        require_same(space_, o.space_, "operator product");
        return {space_, m_ * o.m_};
    }
    StateVector operator*(const StateVector& v) const {
        require_same(space_, v.space(), "operator application");
        return {space_, m_ * v.amplitudes()};
    }
    Operator operator+(const Operator& o) const {
        require_same(space_, o.space_, "operator sum");
        return {space_, m_ + o.m_};
    }
    Operator operator-(const Operator& o) const {
        require_same(space_, o.space_, "operator difference");
        return {space_, m_ - o.m_};
    }
    Operator operator*(cplx s) const { return {space_, m_ * s}; }

private:
    Space space_;
    Matrix m_;
};

inline double distance(const Operator& a, const Operator& b) {
    require_same(a.space(), b.space(), "distance");
    return norm_bound(a.matrix() - b.matrix());
}

inline double distance(const StateVector& a, const StateVector& b) {
    require_same(a.space(), b.space(), "distance");
    return (a.amplitudes() - b.amplitudes()).norm();
}

/// max(||P^2 - P||, ||P - P*||)
inline double projection_residual(const Matrix& p) {
    return std::max(norm_bound(p * p - p), norm_bound(p - p.adjoint()));
}

/// ||V*V - I||
inline double isometry_residual(const Matrix& v) {
    return norm_bound(v.adjoint() * v - Matrix::Identity(v.cols(), v.cols()));
}

inline bool is_projection(const Operator& p, double tol) { return projection_residual(p.matrix()) <= tol; }
inline bool is_isometry(const Operator& v, double tol) { return isometry_residual(v.matrix()) <= tol; }

/// Kronecker product with the left factor most significant.
inline Matrix kron(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Index i = 0; i < a.rows(); ++i) {
        for (Index j = 0; j < a.cols(); ++j) {
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
        }
    }
    return out;
}

inline Vector kron(const Vector& a, const Vector& b) {
    Vector out(a.size() * b.size());
    for (Index i = 0; i < a.size(); ++i) out.segment(i * b.size(), b.size()) = a(i) * b;
    return out;
}

/// I_init (x) X for a Fock-space operator X.
inline Operator ampliate(const Model& m, const Operator& x) {
    if (x.space().with_initial) return x;
    require_same(x.space(), fock_space(m), "ampliation");
    return {ambient_space(m), kron(Matrix::Identity(m.init_dim(), m.init_dim()), x.matrix())};
}

/// u (x) x for an initial-space vector u and a Fock vector x.
inline StateVector ampliate(const Model& m, const Vector& init, const StateVector& x) {
    require_same(x.space(), fock_space(m), "ampliation");
    if (init.size() != m.init_dim()) throw DimensionError("initial-space vector has wrong length");
    return {ambient_space(m), kron(init, x.amplitudes())};
}

}  // namespace fockstop
