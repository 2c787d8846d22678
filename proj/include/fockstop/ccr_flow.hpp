#pragma once

#include <variant>

#include "fockstop/stop_time.hpp"

namespace fockstop {

/// sigma_j(X) = I_{bins <= j} (x) Gamma_j X Gamma_j* on the shifted factor.
/// A *-homomorphism on operators that act trivially on the last j bins
/// (see is_horizon_safe); elsewhere it is only a compression.
inline Operator sigma_t(const Model& m, int j, const Operator& x) {
    require_bin(m, j, "CCR flow");
    const bool wi = x.space().with_initial;
    return {x.space(), identity_before(m, compress_tail(m, x.matrix(), wi, j), wi, j)};
}

/// sigma_S(X) = sum_k sigma_k(X) P_k.
inline Operator sigma_S(const StopTime& s, const Operator& x) {
    const Model& m = s.model();
    const bool wi = x.space().with_initial;
    Matrix out = Matrix::Zero(x.dim(), x.dim());
    for (const auto& ms : s.masses()) {
        out += times_lifted(m, sigma_t(m, ms.bin, x).matrix(), ms.projection.matrix(), wi);
    }
    return {x.space(), out};
}

/// Riemann sum sum_i sigma_{t_i}(X) S((t_{i-1}, t_i]).
inline Operator sigma_S(const StopTime& s, const Operator& x, const Partition& p) {
    const Model& m = s.model();
    require_partition(m, p);
    const bool wi = x.space().with_initial;
    Matrix out = Matrix::Zero(x.dim(), x.dim());
    for (std::size_t i = 1; i < p.points.size(); ++i) {
        const Matrix iv = s.interval(p.points[i - 1], p.points[i]);
        if (iv.trace().real() < 0.5) continue;
        out += times_lifted(m, sigma_t(m, p.points[i], x).matrix(), iv, wi);
    }
    return {x.space(), out};
}

/// Either sigma_{t_j} or sigma_S. sigma_{t_n} doubles as the horizon stand-in
/// for sigma_infinity.
class FlowEndomorphism {
public:
    FlowEndomorphism(const Model& m, int j) : model_(m), kind_(j) { require_bin(m, j, "CCR flow"); }
    explicit FlowEndomorphism(StopTime s) : model_(s.model()), kind_(std::move(s)) {}

    const Model& model() const { return model_; }

    /// Number of trailing bins an argument must leave untouched.
    int reach() const {
        if (const int* j = std::get_if<int>(&kind_)) return *j;
        return std::get<StopTime>(kind_).support();
    }

    Operator operator()(const Operator& x) const {
        if (const int* j = std::get_if<int>(&kind_)) return sigma_t(model_, *j, x);
        return sigma_S(std::get<StopTime>(kind_), x);
    }

private:
    Model model_;
    std::variant<int, StopTime> kind_;
};

}  // namespace fockstop
