#pragma once

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fockstop/fock.hpp"
#include "fockstop/random.hpp"

namespace fockstop {

/// One atom of a stop time: all mass of S at the boundary t_bin.
struct Mass {
    int bin = 0;
    Operator projection;
};

/// A finite quantum stop time supported on bin boundaries t_1..t_n.
/// Masses act on the Fock factor; ambient versions are ampliations.
class StopTime {
public:
    StopTime(Model model, std::vector<Mass> masses) : model_(std::move(model)), masses_(std::move(masses)) {
        std::map<int, Matrix> merged;
        for (const auto& ms : masses_) {
            require_same(ms.projection.space(), fock_space(model_), "stop time mass");
            if (ms.bin < 0 || ms.bin > model_.n_bins()) {
                throw HorizonError("stop time mass at bin " + std::to_string(ms.bin) + " outside 0.." +
                                   std::to_string(model_.n_bins()));
            }
            auto [it, fresh] = merged.try_emplace(ms.bin, ms.projection.matrix());
            if (!fresh) it->second += ms.projection.matrix();
        }
        masses_.clear();
        for (auto& [bin, p] : merged) masses_.push_back({bin, Operator(fock_space(model_), std::move(p))});
    }

    const Model& model() const { return model_; }
    const std::vector<Mass>& masses() const { return masses_; }

    /// Latest bin carrying non-negligible mass (projections of rank >= 1).
    int support() const {
        int k = 0;
        for (const auto& ms : masses_) {
            if (ms.projection.matrix().trace().real() > 0.5) k = std::max(k, ms.bin);
        }
        return k;
    }

    /// P_k (zero if S has no atom at k).
    Matrix mass_at(int k) const {
        for (const auto& ms : masses_) {
            if (ms.bin == k) return ms.projection.matrix();
        }
        return Matrix::Zero(model_.fock_dim(), model_.fock_dim());
    }

    /// S((s, t]) on the Fock factor.
    Matrix interval(int s, int t) const {
        Matrix out = Matrix::Zero(model_.fock_dim(), model_.fock_dim());
        for (const auto& ms : masses_) {
            if (ms.bin > s && ms.bin <= t) out += ms.projection.matrix();
        }
        return out;
    }

    /// S([0, t]).
    Matrix cumulative(int t) const { return interval(-1, t); }

private:
    Model model_;
    std::vector<Mass> masses_;
};

/// Lift a Fock-space matrix to the space `with_initial` selects.
inline Matrix lift(const Model& m, const Matrix& fock_matrix, bool with_initial) {
    if (!with_initial) return fock_matrix;
    return kron(Matrix::Identity(m.init_dim(), m.init_dim()), fock_matrix);
}

/// X * lift(P) without forming the lifted matrix.
inline Matrix times_lifted(const Model& m, const Matrix& x, const Matrix& p, bool with_initial) {
    if (!with_initial) return x * p;
    const Index f = m.fock_dim();
    Matrix out(x.rows(), x.cols());
    for (Index i = 0; i < m.init_dim(); ++i) out.middleCols(i * f, f).noalias() = x.middleCols(i * f, f) * p;
    return out;
}

// ---------------------------------------------------------------------------
// Validation.
// ---------------------------------------------------------------------------

struct InvariantCheck {
    std::string invariant;
    double residual = 0.0;
    bool pass = false;
};

struct ValidationReport {
    std::vector<InvariantCheck> checks;

    bool valid() const {
        return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.pass; });
    }
    const InvariantCheck* first_failure() const {
        for (const auto& c : checks) {
            if (!c.pass) return &c;
        }
        return nullptr;
    }
    double max_residual() const {
        double r = 0.0;
        for (const auto& c : checks) r = std::max(r, c.residual);
        return r;
    }
};

inline ValidationReport validate(const StopTime& s, double tol) {
    const Model& m = s.model();
    const Index n = m.fock_dim();
    double proj = 0.0, orth = 0.0, adapt = 0.0, at_zero = 0.0;
    Matrix total = Matrix::Zero(n, n);
    const auto& ms = s.masses();
    for (std::size_t i = 0; i < ms.size(); ++i) {
        const Matrix& p = ms[i].projection.matrix();
        total += p;
        proj = std::max(proj, projection_residual(p));
        for (std::size_t j = i + 1; j < ms.size(); ++j) {
            orth = std::max(orth, norm_bound(p * ms[j].projection.matrix()));
        }
        if (ms[i].bin == 0) at_zero = std::max(at_zero, norm_bound(p));
        adapt = std::max(adapt, adaptedness_check(m, ms[i].projection, ms[i].bin, tol).residual);
    }
    const double comp = norm_bound(total - Matrix::Identity(n, n));
    ValidationReport r;
    r.checks = {{"projection", proj, proj <= tol},
                {"orthogonality", orth, orth <= tol},
                {"completeness", comp, comp <= tol},
                {"no-mass-at-zero", at_zero, at_zero <= tol},
                {"adaptedness", adapt, adapt <= tol}};
    return r;
}

inline void require_valid(const StopTime& s, double tol) {
    const ValidationReport r = validate(s, tol);
    if (const auto* bad = r.first_failure()) {
        throw ValidationError(bad->invariant, "residual " + std::to_string(bad->residual));
    }
}

// ---------------------------------------------------------------------------
// Generators.
// ---------------------------------------------------------------------------

inline StopTime deterministic(const Model& m, int k) {
    if (k < 1 || k > m.n_bins()) {
        throw HorizonError("deterministic stop time at bin " + std::to_string(k) + " outside 1.." +
                           std::to_string(m.n_bins()));
    }
    return {m, {{k, Operator::identity(fock_space(m))}}};
}

/// Stops at the first bin that is not in its vacuum state; the all-vacuum
/// remainder (and anything after) is assigned to `last_bin`.
inline StopTime first_arrival(const Model& m, std::optional<int> last_bin = std::nullopt) {
    const int last = last_bin.value_or(m.n_bins());
    if (last < 1 || last > m.n_bins()) throw HorizonError("first arrival: last bin outside the horizon");
    const Index n = m.fock_dim();
    std::vector<Mass> masses;
    Matrix rest = Matrix::Identity(n, n);
    for (int k = 1; k < last; ++k) {
        Matrix p = Matrix::Zero(n, n);
        for (Index i = 0; i < n; ++i) {
            if (m.vacuum_before(i, k - 1) && m.digit(i, k) != 0) p(i, i) = 1.0;
        }
        rest -= p;
        masses.push_back({k, Operator(fock_space(m), std::move(p))});
    }
    masses.push_back({last, Operator(fock_space(m), std::move(rest))});
    return {m, std::move(masses)};
}

/// Random adapted stop time: at bin k a random subprojection of the
/// complement of S([0, t_{k-1}]) is drawn inside the first-k-bins factor.
/// Bins with zero rank are dropped; `last_bin` takes the remainder.
inline StopTime random_stoptime(const Model& m, std::uint64_t seed, std::optional<int> last_bin = std::nullopt) {
    const int last = last_bin.value_or(m.n_bins());
    if (last < 1 || last > m.n_bins()) throw HorizonError("random stop time: last bin outside the horizon");
    Rng rng(seed);
    const Index b = m.bin_dim();
    const Matrix ib = Matrix::Identity(b, b);
    std::vector<Mass> masses;
    Matrix q = Matrix::Zero(1, 1);  // cumulative mass on bins 1..k-1
    for (int k = 1; k <= last; ++k) {
        const Matrix grown = kron(q, ib);
        const Index head = grown.rows();
        const Matrix comp = Matrix::Identity(head, head) - grown;
        const auto r = static_cast<int>(std::lround(comp.trace().real()));
        Matrix piece;
        if (k == last) {
            piece = comp;
        } else {
            const int rank = r >= 2 ? rng.uniform_int(1, r - 1) : 0;
            piece = random_subprojection(rng, comp, rank);
        }
        q = grown + piece;
        if (piece.trace().real() > 0.5) {
            masses.push_back({k, Operator(fock_space(m), identity_after(m, piece, k))});
        }
    }
    return {m, std::move(masses)};
}

/// S + t_j: every atom moves j bins later.
inline StopTime shift_stoptime(const StopTime& s, int j) {
    const Model& m = s.model();
    if (j < 0 || s.support() + j > m.n_bins()) {
        throw HorizonError("shifting a stop time with support " + std::to_string(s.support()) + " by " +
                           std::to_string(j) + " bins leaves the horizon");
    }
    std::vector<Mass> masses;
    for (const auto& ms : s.masses()) {
        if (ms.projection.matrix().trace().real() > 0.5) masses.push_back({ms.bin + j, ms.projection});
    }
    return {m, std::move(masses)};
}

// ---------------------------------------------------------------------------
// S^{f,g}, future-adapted families and stop-time integrals.
// ---------------------------------------------------------------------------

struct ComplexMeasure {
    std::vector<std::pair<int, cplx>> atoms;

    cplx total() const {
        cplx s = 0.0;
        for (const auto& a : atoms) s += a.second;
        return s;
    }
    cplx at(int k) const {
        for (const auto& a : atoms) {
            if (a.first == k) return a.second;
        }
        return 0.0;
    }
};

/// Atoms exp(-<f, g>_{bins > k}) <e(f), P_k e(g)>. The exponent is cut at the
/// horizon.
inline ComplexMeasure sfg_measure(const StopTime& s, const StepFunction& f, const StepFunction& g) {
    const Model& m = s.model();
    const Vector ef = exp_vector(m, f).amplitudes();
    const Vector eg = exp_vector(m, g).amplitudes();
    ComplexMeasure mu;
    for (const auto& ms : s.masses()) {
        const cplx w = ef.dot(ms.projection.matrix() * eg);
        mu.atoms.emplace_back(ms.bin, std::exp(-inner_after(f, g, ms.bin)) * w);
    }
    return mu;
}

/// k -> F_k for k = 0..n, where F_k lives on (init) (x) bins k+1..n and
/// F(t_k) = e(0 on bins <= k) (x) F_k.
class AdaptedFamily {
public:
    AdaptedFamily(const Model& m, std::vector<Vector> entries, bool with_initial = false)
        : with_initial_(with_initial), entries_(std::move(entries)) {
        if (entries_.size() != static_cast<std::size_t>(m.n_bins()) + 1) {
            throw DimensionError("adapted family needs one entry per bin boundary 0..n");
        }
        const Index outer = outer_dim(m, with_initial_);
        for (int k = 0; k <= m.n_bins(); ++k) {
            if (entries_[static_cast<std::size_t>(k)].size() != outer * m.block_dim(m.n_bins() - k)) {
                throw DimensionError("adapted family entry " + std::to_string(k) +
                                     " does not match its tail space");
            }
        }
    }

    static AdaptedFamily vacuum(const Model& m) {
        std::vector<Vector> e;
        for (int k = 0; k <= m.n_bins(); ++k) e.push_back(Vector::Unit(m.block_dim(m.n_bins() - k), 0));
        return {m, std::move(e)};
    }

    /// F_k = tail part of Gamma_k x (the bins-after-k content of x shifted by k).
    static AdaptedFamily from_shift(const Model& m, const Vector& x) {
        return from_shifts(m, std::vector<Vector>(static_cast<std::size_t>(m.n_bins()) + 1, x));
    }

    /// F_k = tail part of Gamma_k x_k, one vector per boundary.
    static AdaptedFamily from_shifts(const Model& m, const std::vector<Vector>& xs) {
        if (xs.size() != static_cast<std::size_t>(m.n_bins()) + 1) {
            throw DimensionError("adapted family needs one vector per bin boundary 0..n");
        }
        std::vector<Vector> e;
        for (int k = 0; k <= m.n_bins(); ++k) {
            const Vector& x = xs[static_cast<std::size_t>(k)];
            if (x.size() != m.fock_dim()) throw DimensionError("adapted family: vector has wrong length");
            const Index tail = m.block_dim(m.n_bins() - k);
            const Index stride = m.block_dim(k);
            Vector v(tail);
            for (Index t = 0; t < tail; ++t) v(t) = x(t * stride);
            e.push_back(std::move(v));
        }
        return {m, std::move(e)};
    }

    /// F_k = e(theta_k g) restricted to bins > k.
    static AdaptedFamily shifted_exponential(const Model& m, const StepFunction& g) {
        return from_shift(m, exp_vector(m, g).amplitudes());
    }

    /// F_k = e(f restricted to bins > k).
    static AdaptedFamily tail_of(const Model& m, const StepFunction& f) {
        require_function(m, f);
        std::vector<Vector> e;
        for (int k = 0; k <= m.n_bins(); ++k) {
            Vector v = Vector::Ones(1);
            for (int i = k + 1; i <= m.n_bins(); ++i) v = kron(v, coherent_bin(m, f.bin(i)));
            e.push_back(std::move(v));
        }
        return {m, std::move(e)};
    }

    static AdaptedFamily random(Rng& rng, const Model& m, bool with_initial = false) {
        std::vector<Vector> e;
        const Index outer = outer_dim(m, with_initial);
        for (int k = 0; k <= m.n_bins(); ++k) {
            e.push_back(rng.unit_vector(outer * m.block_dim(m.n_bins() - k)));
        }
        return {m, std::move(e), with_initial};
    }

    bool with_initial() const { return with_initial_; }
    const Vector& at(int k) const { return entries_.at(static_cast<std::size_t>(k)); }

private:
    bool with_initial_ = false;
    std::vector<Vector> entries_;
};

/// head (x) F_k with the init factor of F_k moved to the front.
inline Vector splice(const Model& m, const Vector& head, const Vector& tail_vec, int k, bool with_initial) {
    const Index outer = outer_dim(m, with_initial);
    const Index tail = m.block_dim(m.n_bins() - k);
    Vector out(outer * m.fock_dim());
    for (Index i = 0; i < outer; ++i) {
        out.segment(i * m.fock_dim(), m.fock_dim()) = kron(head, Vector(tail_vec.segment(i * tail, tail)));
    }
    return out;
}

/// sum_{k <= t} P_k (e(f on bins <= k) (x) F_k).
inline StateVector stop_integral(const StopTime& s, const StepFunction& f, const AdaptedFamily& F, int up_to) {
    const Model& m = s.model();
    require_bin(m, up_to, "stop integral");
    const bool wi = F.with_initial();
    Vector out = Vector::Zero(m.dim(wi));
    for (const auto& ms : s.masses()) {
        if (ms.bin > up_to) continue;
        const Vector v = splice(m, exp_vector_head(m, f, ms.bin), F.at(ms.bin), ms.bin, wi);
        out += lift(m, ms.projection.matrix(), wi) * v;
    }
    return {Space{m.params(), wi}, out};
}

// ---------------------------------------------------------------------------
// E_{S,t}, Gamma_S and partition sums.
// ---------------------------------------------------------------------------

/// E_{S,t} = sum_{k <= t} P_k E_k.
inline Operator time_projection_ES(const StopTime& s, int up_to) {
    const Model& m = s.model();
    require_bin(m, up_to, "stopped time projection");
    Matrix out = Matrix::Zero(m.fock_dim(), m.fock_dim());
    for (const auto& ms : s.masses()) {
        if (ms.bin > up_to) continue;
        // P_k E_k keeps the columns of P_k whose index is vacuum after bin k.
        const Index stride = m.block_dim(m.n_bins() - ms.bin);
        for (Index i = 0; i < m.fock_dim(); i += stride) out.col(i) += ms.projection.matrix().col(i);
    }
    return {fock_space(m), out};
}

inline Operator time_projection_ES(const StopTime& s) { return time_projection_ES(s, s.model().n_bins()); }

/// Gamma_S = sum_k P_k Gamma_k.
inline Operator stopped_shift(const StopTime& s) {
    const Model& m = s.model();
    Matrix out = Matrix::Zero(m.fock_dim(), m.fock_dim());
    for (const auto& ms : s.masses()) {
        // (P_k Gamma_k)[:, h b^k] = P_k[:, h]
        const Index stride = m.block_dim(ms.bin);
        const Index keep = m.block_dim(m.n_bins() - ms.bin);
        for (Index h = 0; h < keep; ++h) out.col(h * stride) += ms.projection.matrix().col(h);
    }
    return {fock_space(m), out};
}

/// A partition 0 = t_0 < t_1 < ... < t_r of bin boundaries.
struct Partition {
    std::vector<int> points;
};

inline Partition finest_partition(const Model& m, int up_to) {
    Partition p;
    for (int k = 0; k <= up_to; ++k) p.points.push_back(k);
    return p;
}

inline void require_partition(const Model& m, const Partition& p) {
    if (p.points.size() < 2 || p.points.front() != 0) throw DomainError("partition must start at 0");
    for (std::size_t i = 1; i < p.points.size(); ++i) {
        if (p.points[i] <= p.points[i - 1]) throw DomainError("partition must be strictly increasing");
    }
    require_bin(m, p.points.back(), "partition");
}

/// E_{S,pi} = sum_i S((t_{i-1}, t_i]) E_{t_i}.
inline Operator time_projection_ES(const StopTime& s, const Partition& p) {
    const Model& m = s.model();
    require_partition(m, p);
    Matrix out = Matrix::Zero(m.fock_dim(), m.fock_dim());
    for (std::size_t i = 1; i < p.points.size(); ++i) {
        out += s.interval(p.points[i - 1], p.points[i]) * time_projection(m, p.points[i]).matrix();
    }
    return {fock_space(m), out};
}

}  // namespace fockstop
