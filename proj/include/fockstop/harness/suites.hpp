#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "fockstop/cocycle.hpp"
#include "fockstop/harness/report.hpp"
#include "fockstop/strong_markov.hpp"

namespace fockstop::harness {

/// Everything a suite cell may read. Shared between threads, never written.
struct Context {
    const SuiteConfig& config;
    const Model& model;
    double tol_trunc;
    std::uint64_t seed;

    /// Tolerance for an identity that holds exactly in the truncated model.
    double exact(double pinned) const { return std::min(config.tol_exact, pinned); }
    double cap() const { return config.amplitude_cap; }
};

/// Independent stream seed for (seed, salt), splitmix64 finalizer.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t salt) {
    std::uint64_t z = seed * 0x9E3779B97F4A7C15ULL + salt * 0xD1B54A32D192ED03ULL + 0x632BE59BD9B4E019ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Random instances drawn per seed; five seeds give the acceptance counts.
inline constexpr int stoptimes_per_seed = 20;
inline constexpr int exps_per_seed = 10;
inline constexpr int key_lemma_per_seed = 10;
inline constexpr int applebaum_per_seed = 4;

namespace detail {

inline int pick(Rng& rng, int lo, int hi) { return hi <= lo ? lo : rng.uniform_int(lo, hi); }

/// Unit Gaussian vector on the indices whose last j bins are empty.
inline Vector random_safe_vector(Rng& rng, const Model& m, int j) {
    Vector v = Vector::Zero(m.fock_dim());
    const Index stride = m.block_dim(j);
    for (Index h = 0; h < m.block_dim(m.n_bins() - j); ++h) v(h * stride) = rng.gaussian();
    return v / v.norm();
}

/// Unit vector in the range of the projection p.
inline Vector random_in_range(Rng& rng, const Matrix& p) {
    const Vector v = p * rng.gaussian_vector(p.rows());
    return v / v.norm();
}

/// 0 < random subset of 1..n-1 < n.
inline Partition random_partition(Rng& rng, const Model& m) {
    Partition p{{0}};
    for (int k = 1; k < m.n_bins(); ++k) {
        if (rng.uniform() < 0.5) p.points.push_back(k);
    }
    p.points.push_back(m.n_bins());
    return p;
}

/// Constant cocycle amplitude whose per-bin amplitude lies in [cap/2, cap].
inline Vector random_amplitude(Rng& rng, const Model& m, double cap) {
    return rng.unit_vector(m.mult()) * (cap * (0.5 + 0.5 * rng.uniform()) / std::sqrt(m.bin_width()));
}

inline std::vector<Matrix> time_projections(const Model& m) {
    std::vector<Matrix> e;
    for (int k = 0; k <= m.n_bins(); ++k) e.push_back(time_projection(m, k).matrix());
    return e;
}

inline Matrix lifted(const Model& m, const Matrix& fock) { return lift(m, fock, true); }

}  // namespace detail

// ---------------------------------------------------------------------------
// stoptime: time projections, shifts, stop-time axioms, E_{S,t}, Gamma_S and
// the key lemma.
// ---------------------------------------------------------------------------

inline void suite_stoptime(const Context& c, Recorder& r) {
    using namespace detail;
    const Model& m = c.model;
    const int n = m.n_bins();
    const double e12 = c.exact(1e-12), e10 = c.exact(1e-10), tt = c.tol_trunc;
    const Index dim = m.fock_dim();
    const Matrix id = Matrix::Identity(dim, dim);
    Rng rng(derive_seed(c.seed, 1));

    const std::vector<Matrix> e = time_projections(m);
    std::vector<Matrix> g;
    for (int k = 0; k <= n; ++k) g.push_back(shift(m, k).matrix());
    double ee = 0.0, gg = 0.0, giso = 0.0, eg = 0.0;
    for (int s = 0; s <= n; ++s) {
        for (int t = 0; t <= n; ++t) ee = std::max(ee, norm_bound(e[s] * e[t] - e[std::min(s, t)]));
        giso = std::max(giso, norm_bound((g[s].adjoint() * g[s] - id) * e[n - s]));
        for (int t = s; t <= n; ++t) {
            if (s + t <= n) gg = std::max(gg, norm_bound(g[s] * g[t] - g[s + t]));
            eg = std::max(eg, norm_bound((e[s] * g[t] - e[0]) * e[n - t]));
            eg = std::max(eg, norm_bound(e[t] * g[s] - g[s] * e[t - s]));
        }
    }
    r.check("E_s E_t = E_min(s,t)", "def:Et", ee, e12);
    r.check("Gamma_s Gamma_t = Gamma_(s+t)", "def:Gamma", gg, e12);
    r.check("Gamma_j isometric on ran E_(n-j)", "def:Gamma", giso, e12);
    r.check("E_s Gamma_t = E_0 and E_t Gamma_s = Gamma_s E_(t-s) on safe inputs", "def:Gamma", eg, e12);

    {
        const StepFunction f = random_step_function(rng, m, c.cap(), n);
        const Vector ef = exp_vector(m, f).amplitudes();
        double head = 0.0;
        for (int k = 0; k <= n; ++k) head = std::max(head, (e[k] * ef - exp_vector(m, f.head(k)).amplitudes()).norm());
        r.check("E_k e(f) = e(f 1_[0,t_k))", "notation:fock", head, e10);
        const int j = pick(rng, 1, n);
        const StepFunction h = random_step_function(rng, m, c.cap(), n - j);
        const double sh = (g[j] * exp_vector(m, h).amplitudes() - exp_vector(m, h.shifted(j)).amplitudes()).norm();
        r.check("Gamma_j e(h) = e(theta_j h)", "def:Gamma", sh, e10);
        const StepFunction f2 = random_step_function(rng, m, c.cap(), n);
        const double ip = std::abs(ef.dot(exp_vector(m, f2).amplitudes()) - std::exp(inner(f, f2)));
        r.check("<e(f), e(g)> = exp <f, g>", "notation:fock", ip, tt);
    }

    // Axioms over random stop times, plus first arrival.
    {
        std::vector<double> worst;
        std::vector<std::string> names;
        for (int i = 0; i < stoptimes_per_seed; ++i) {
            const StopTime s = random_stoptime(m, derive_seed(c.seed, 100 + i), pick(rng, 1, n));
            const ValidationReport v = validate(s, e10);
            if (names.empty()) {
                for (const auto& ch : v.checks) names.push_back(ch.invariant);
                worst.assign(names.size(), 0.0);
            }
            for (std::size_t q = 0; q < v.checks.size(); ++q) worst[q] = std::max(worst[q], v.checks[q].residual);
        }
        for (std::size_t q = 0; q < names.size(); ++q) {
            r.check("random stop times: " + names[q], "def:qst", worst[q], e10);
        }
        r.check("first arrival satisfies the axioms", "def:qst", validate(first_arrival(m), e10).max_residual(), e10);
    }

    // E_{S,t} algebra over random stop times.
    {
        double pairs = 0.0, cum = 0.0, proj = 0.0, part = 0.0;
        for (int i = 0; i < exps_per_seed; ++i) {
            const StopTime s = random_stoptime(m, derive_seed(c.seed, 200 + i));
            std::vector<Matrix> es;
            for (int t = 0; t <= n; ++t) es.push_back(time_projection_ES(s, t).matrix());
            for (int a = 0; a <= n; ++a) {
                proj = std::max(proj, projection_residual(es[a]));
                cum = std::max(cum, norm_bound(s.cumulative(a) * es[n] - es[a]));
                for (int b = a; b <= n; ++b) {
                    pairs = std::max(pairs, norm_bound(es[a] * es[b] - es[a]));
                    pairs = std::max(pairs, norm_bound(es[b] * es[a] - es[a]));
                }
            }
            part = std::max(part, projection_residual(time_projection_ES(s, random_partition(rng, m)).matrix()));
        }
        r.check("E_(S,s) E_(S,t) = E_(S,min(s,t))", "thm:expS", pairs, e12);
        r.check("S([0,s]) E_S = E_(S,s)", "thm:expS", cum, e12);
        r.check("E_(S,t) is a projection", "thm:expS", proj, e12);
        r.check("E_(S,pi) is a projection", "thm:expS", part, e12);
    }

    // Gamma_S.
    {
        const StopTime s = random_stoptime(m, derive_seed(c.seed, 300));
        const Matrix gs = stopped_shift(s).matrix();
        const int k = s.support();
        Matrix cols(dim, m.block_dim(n - k));
        for (Index h = 0; h < cols.cols(); ++h) cols.col(h) = gs.col(h * m.block_dim(k));
        r.check("Gamma_S isometric on ran E_(n-K)", "thm:shift", isometry_residual(cols), e10);
        const double vac = std::abs(gs.col(0).squaredNorm() - 1.0);
        r.check("||Gamma_S Omega|| = 1", "thm:shift", vac, e12);
    }

    // Key lemma over random (S, f, g, F, G).
    {
        double ip = 0.0, trunc = 0.0, full = 0.0, total = 0.0;
        for (int i = 0; i < key_lemma_per_seed; ++i) {
            const StopTime s = random_stoptime(m, derive_seed(c.seed, 400 + i), pick(rng, 1, n));
            const StepFunction f = random_step_function(rng, m, c.cap(), n);
            const StepFunction g = random_step_function(rng, m, c.cap(), n);
            const AdaptedFamily ff = AdaptedFamily::random(rng, m);
            const AdaptedFamily gg2 = AdaptedFamily::random(rng, m);
            const int t = pick(rng, 0, n);
            const Vector a = stop_integral(s, f, ff, t).amplitudes();
            const Vector b = stop_integral(s, g, gg2, t).amplitudes();
            const ComplexMeasure mu = sfg_measure(s, f, g);
            cplx rhs = 0.0;
            for (const auto& [k, w] : mu.atoms) {
                if (k <= t) rhs += ff.at(k).dot(gg2.at(k)) * w;
            }
            ip = std::max(ip, std::abs(a.dot(b) - rhs));
            for (int q = 0; q <= n; ++q) {
                const Vector cut = stop_integral(s, f, ff, std::min(q, t)).amplitudes();
                trunc = std::max(trunc, (s.cumulative(q) * a - cut).norm());
            }
            const Vector ef = exp_vector(m, f).amplitudes();
            full = std::max(full, (stop_integral(s, f, AdaptedFamily::tail_of(m, f), n).amplitudes() - ef).norm());
            total = std::max(total, std::abs(sfg_measure(s, StepFunction::zero(m), StepFunction::zero(m)).total() - 1.0));
        }
        r.check("<I_t(f,F), I_t(g,G)> = int <F,G> dS^(f,g)", "eqn:keyip", ip, tt);
        r.check("S([0,r]) I_t(f,F) = I_(min(r,t))(f,F)", "eqn:keyS", trunc, tt);
        r.check("int S(ds) e(f 1_[0,s)) (x) e(f 1_[s,oo)) = e(f)", "cor:key", full, tt);
        r.check("S^(0,0) is a probability measure", "notation:sfg", total, e12);
    }
}

// ---------------------------------------------------------------------------
// markov: the strong Markov map j_S.
// ---------------------------------------------------------------------------

inline void suite_markov(const Context& c, Recorder& r) {
    using namespace detail;
    const Model& m = c.model;
    const int n = m.n_bins();
    const double e10 = c.exact(1e-10), e9 = c.exact(1e-9), tt = c.tol_trunc;
    Rng rng(derive_seed(c.seed, 2));

    const StopTime s = random_stoptime(m, derive_seed(c.seed, 21), pick(rng, 1, n - 1));
    const StrongMarkov js(s);
    const int k = s.support();
    const Matrix& pre = js.pre_basis();
    const Matrix& post = js.post_basis();
    const Matrix& gs = js.shift();

    r.check("Gamma_S isometric on ran E_(n-K)", "thm:shift", isometry_residual(post), e10);

    double coef = 0.0, prod = 0.0, omega = 0.0, expo = 0.0;
    for (int i = 0; i < 10; ++i) {
        Matrix c1 = rng.gaussian_matrix(pre.cols(), post.cols());
        Matrix c2 = rng.gaussian_matrix(pre.cols(), post.cols());
        c1 /= c1.norm();
        c2 /= c2.norm();
        const Vector a = js.apply_coefficients(c1);
        const Vector b = js.apply_coefficients(c2);
        coef = std::max(coef, std::abs(a.dot(b) - (c1.adjoint() * c2).trace()));
        coef = std::max(coef, std::abs(a.norm() - 1.0));

        const Vector u = random_in_range(rng, js.time_projection());
        const Vector w = gs * random_safe_vector(rng, m, k);
        prod = std::max(prod, std::abs(js.apply(u, w).norm() - u.norm() * w.norm()));
        omega = std::max(omega, (js.apply(u, gs.col(0)) - u).norm());

        const StepFunction f = random_step_function(rng, m, c.cap(), n);
        const StepFunction g = random_step_function(rng, m, c.cap(), n - k);
        const int t = pick(rng, 0, n);
        const Vector ut = time_projection_ES(s, t).matrix() * exp_vector(m, f).amplitudes();
        const Vector lhs = js.apply(ut, gs * exp_vector(m, g).amplitudes());
        const Vector rhs = stop_integral(s, f, AdaptedFamily::shifted_exponential(m, g), t).amplitudes();
        expo = std::max(expo, (lhs - rhs).norm());
    }
    r.check("j_S isometric on ran E_S (x) Gamma_S(ran E_(n-K))", "thm:isom", coef, tt);
    r.check("||j_S(u (x) w)|| = ||u|| ||w||", "thm:isom", prod, tt);
    r.check("j_S(u (x) Gamma_S Omega) = u", "thm:isom", omega, e10);
    r.check("j_S(E_(S,t) e(f) (x) Gamma_S e(g)) = int_[0,t] S(ds) e(f 1_[0,s)) (x) Gamma_s e(g)", "thm:isom", expo,
            tt);

    double sg = 0.0;
    for (int i = 0; i < 5; ++i) {
        const Operator x = random_safe_operator(rng, m, k, false);
        const Matrix cm = rng.gaussian_matrix(pre.cols(), post.cols()) / std::sqrt(double(pre.cols() * post.cols()));
        const Matrix mm = post.adjoint() * (gs * x.matrix() * gs.adjoint()) * post;
        const Vector lhs = sigma_S(s, x).matrix() * js.apply_coefficients(cm);
        sg = std::max(sg, (lhs - js.apply_coefficients(cm * mm.transpose())).norm());
    }
    r.check("sigma_S(X) j_S(u (x) w) = j_S(u (x) Gamma_S X Gamma_S* w)", "prp:sigmagamma", sg, e9);
}

// ---------------------------------------------------------------------------
// convolution: S * T and j_{S,T}.
// ---------------------------------------------------------------------------

inline void suite_convolution(const Context& c, Recorder& r) {
    using namespace detail;
    const Model& m = c.model;
    const int n = m.n_bins();
    const double e10 = c.exact(1e-10), tt = c.tol_trunc;
    Rng rng(derive_seed(c.seed, 3));

    const int a = pick(rng, 1, n - 1);
    const int b = pick(rng, 1, n - a);
    const StopTime s = random_stoptime(m, derive_seed(c.seed, 31), a);
    const StopTime t = random_stoptime(m, derive_seed(c.seed, 32), b);
    const StopTime st = convolve(s, t);
    const int ks = s.support(), kt = t.support();
    const Matrix gs = stopped_shift(s).matrix();
    const Matrix gt = stopped_shift(t).matrix();
    const Matrix gst = stopped_shift(st).matrix();
    const Matrix est = time_projection_ES(st).matrix();
    const Matrix et = time_projection_ES(t).matrix();

    r.check("S*T satisfies the axioms", "thm:SstarT", validate(st, e10).max_residual(), e10);

    {
        const StepFunction f = random_step_function(rng, m, c.cap(), n);
        const Vector ef = exp_vector(m, f).amplitudes();
        double cum = 0.0;
        for (int u = 0; u <= n; ++u) {
            std::vector<Vector> xs;
            for (int q = 0; q <= n; ++q) {
                const Matrix tu = u >= q ? t.cumulative(u - q) : Matrix::Zero(m.fock_dim(), m.fock_dim());
                xs.push_back(tu * (shift(m, q).matrix().adjoint() * ef));
            }
            const Vector rhs = stop_integral(s, f, AdaptedFamily::from_shifts(m, xs), u).amplitudes();
            cum = std::max(cum, (st.cumulative(u) * ef - rhs).norm());
        }
        r.check("(S*T)([0,u]) e(f) = int S(ds) e(f 1_[0,s)) (x) Gamma_s T([0,u-s]) Gamma_s* e(f)", "eqn:SstarTint",
                cum, tt);

        std::vector<Vector> xs;
        for (int q = 0; q <= n; ++q) xs.push_back(et * (shift(m, q).matrix().adjoint() * ef));
        const Vector rhs = stop_integral(s, f, AdaptedFamily::from_shifts(m, xs), n).amplitudes();
        r.check("E_(S*T) e(f) = int S(ds) e(f 1_[0,s)) (x) Gamma_s E_T Gamma_s* e(f)", "thm:SstarT",
                (est * ef - rhs).norm(), tt);
    }

    const ConvolutionMarkov jm(s, t);
    {
        double nested = 0.0;
        for (int i = 0; i < 5; ++i) {
            const StepFunction f = random_step_function(rng, m, c.cap(), n);
            const Vector y = random_safe_vector(rng, m, ks + kt);
            const Vector lhs = jm.combined().apply(est * exp_vector(m, f).amplitudes(), gst * y);
            std::vector<Vector> zs;
            for (int q = 0; q <= n; ++q) {
                zs.push_back(stop_integral(t, f.shifted_back(q), AdaptedFamily::from_shift(m, y), n).amplitudes());
            }
            const Vector rhs = stop_integral(s, f, AdaptedFamily::from_shifts(m, zs), n).amplitudes();
            nested = std::max(nested, (lhs - rhs).norm());
        }
        r.check("j_(S*T) on exponential vectors is the nested stop integral", "eqn:jSstarT", nested, tt);
    }

    {
        const StopTime sd = convolve(s, deterministic(m, b));
        const StopTime sh = shift_stoptime(s, b);
        double d = 0.0;
        for (int k = 0; k <= n; ++k) d = std::max(d, norm_bound(sd.mass_at(k) - sh.mass_at(k)));
        r.check("S * delta_t = S + t", "prp:S+t", d, e10);
        const Matrix safe = time_projection(m, n - ks - kt).matrix();
        r.check("Gamma_(S*T) = Gamma_S Gamma_T on safe inputs", "rem:GammaSstarT", norm_bound((gst - gs * gt) * safe),
                e10);
    }

    const Matrix mid = jm.middle_basis();
    auto random_mid = [&] {
        const Vector v = mid * rng.gaussian_vector(mid.cols());
        return Vector(v / v.norm());
    };
    {
        double iso = 0.0, fac = 0.0;
        for (int rep = 0; rep < 5; ++rep) {
            std::vector<Vector> us, vs, ws;
            Vector x = Vector::Zero(m.fock_dim());
            for (int i = 0; i < 3; ++i) {
                us.push_back(random_in_range(rng, jm.outer().time_projection()));
                vs.push_back(random_mid());
                ws.push_back(gst * random_safe_vector(rng, m, ks + kt));
                const Vector xi = jm.apply(us.back(), vs.back(), ws.back());
                x += xi;
                const Vector via = jm.combined().apply(jm.outer().apply(us.back(), vs.back()), ws.back());
                fac = std::max(fac, (xi - via).norm());
            }
            cplx expected = 0.0;
            for (int i = 0; i < 3; ++i) {
                for (int l = 0; l < 3; ++l) expected += us[i].dot(us[l]) * vs[i].dot(vs[l]) * ws[i].dot(ws[l]);
            }
            iso = std::max(iso, std::abs(x.squaredNorm() - expected));
        }
        r.check("j_(S,T) isometric on sums of product vectors", "thm:SstarTiso", iso, tt);
        r.check("j_(S,T)(u (x) v (x) w) = j_(S*T)(j_S(u (x) v) (x) w)", "thm:SstarTiso", fac, tt);
    }

    {
        const StrongMarkov& js = jm.outer();
        const Matrix& q = jm.inner().pre_basis();
        Matrix j1(m.fock_dim(), js.pre_basis().cols() * q.cols());
        for (Index i = 0; i < js.pre_basis().cols(); ++i) {
            for (Index l = 0; l < q.cols(); ++l) j1.col(i * q.cols() + l) = js.apply_preimage(js.pre_basis().col(i), q.col(l));
        }
        r.check("j_S(ran E_S (x) Gamma_S ran E_T) = ran E_(S*T)", "eqn:SstarT1", norm_bound(j1 * j1.adjoint() - est),
                e10);

        double omega = 0.0, inner = 0.0, contained = 0.0;
        for (int i = 0; i < 5; ++i) {
            const Vector u = random_in_range(rng, js.time_projection());
            const Vector v = random_mid();
            omega = std::max(omega, (jm.apply(u, v, gst.col(0)) - js.apply(u, v)).norm());
            const Vector z = random_safe_vector(rng, m, ks + kt);
            const Vector lhs = jm.apply(Vector::Unit(m.fock_dim(), 0), v, gst * z);
            const Vector rhs = gs * jm.inner().apply(gs.adjoint() * v, gt * z);
            inner = std::max(inner, (lhs - rhs).norm());
            contained = std::max(contained, (gs * (gs.adjoint() * lhs) - lhs).norm());
        }
        r.check("j_(S,T)(u (x) v (x) Gamma_(S*T) Omega) = j_S(u (x) v)", "eqn:SstarT1", omega, e10);
        r.check("j_(S,T)(Omega (x) v (x) w) = Gamma_S j_T(Gamma_S* v (x) Gamma_T Gamma_(S*T)* w)", "eqn:SstarT2", inner,
                e10);
        r.check("j_(S,T)(Omega (x) v (x) w) lies in ran Gamma_S", "eqn:SstarT2", contained, e10);
    }

    if (n >= 3) {
        const StopTime p = random_stoptime(m, derive_seed(c.seed, 33), 1);
        const StopTime q = random_stoptime(m, derive_seed(c.seed, 34), 1);
        const StopTime w = random_stoptime(m, derive_seed(c.seed, 35), n - 2);
        const StopTime left = convolve(convolve(p, q), w);
        const StopTime right = convolve(p, convolve(q, w));
        double d = 0.0;
        for (int k = 0; k <= n; ++k) d = std::max(d, norm_bound(left.mass_at(k) - right.mass_at(k)));
        r.check("(R*S)*T = R*(S*T)", "exploratory:associativity", d, e10, true);
    }
}

// ---------------------------------------------------------------------------
// flow: sigma_t and sigma_S.
// ---------------------------------------------------------------------------

inline void suite_flow(const Context& c, Recorder& r) {
    using namespace detail;
    const Model& m = c.model;
    const int n = m.n_bins();
    const double e9 = c.exact(1e-9), tt = c.tol_trunc;
    const Index dim = m.fock_dim();
    const Matrix id = Matrix::Identity(dim, dim);
    Rng rng(derive_seed(c.seed, 4));
    const std::vector<Matrix> e = time_projections(m);
    const Space fs = fock_space(m);

    double et = 0.0, semi = 0.0, intertwine = 0.0, range = 0.0, hom = 0.0, elem = 0.0;
    for (int s = 0; s <= n; ++s) {
        for (int t = 0; s + t <= n; ++t) {
            et = std::max(et, norm_bound(sigma_t(m, s, Operator(fs, e[t])).matrix() - e[s + t]));
            const Operator x = random_safe_operator(rng, m, s + t, false);
            semi = std::max(semi, distance(sigma_t(m, s, sigma_t(m, t, x)), sigma_t(m, s + t, x)));
        }
        const Matrix g = shift(m, s).matrix();
        const Operator x = random_safe_operator(rng, m, s, false);
        const Operator y = random_safe_operator(rng, m, s, false);
        const Matrix sx = sigma_t(m, s, x).matrix();
        intertwine = std::max(intertwine, norm_bound((sx * g - g * x.matrix()) * e[n - s]));
        range = std::max(range, head_identity_residual(
                                    m, sigma_t(m, s, Operator(fs, random_operator(rng, dim))).matrix(), false, s));
        hom = std::max(hom, norm_bound(sigma_t(m, s, x * y).matrix() - sx * sigma_t(m, s, y).matrix()));
        hom = std::max(hom, norm_bound(sigma_t(m, s, x.adjoint()).matrix() - sx.adjoint()));
        hom = std::max(hom, norm_bound(sigma_t(m, s, Operator::identity(fs)).matrix() - id));

        const StepFunction f = random_step_function(rng, m, c.cap(), n);
        const StepFunction h = random_step_function(rng, m, c.cap(), n);
        const cplx lhs = exp_vector(m, f).amplitudes().dot(sx * exp_vector(m, h).amplitudes());
        const cplx rhs = exp_vector_head(m, f, s).dot(exp_vector_head(m, h, s)) *
                         exp_vector(m, f.shifted_back(s)).amplitudes().dot(
                             x.matrix() * exp_vector(m, h.shifted_back(s)).amplitudes());
        elem = std::max(elem, std::abs(lhs - rhs));
    }
    r.check("sigma_s(E_t) = E_(s+t)", "def:ccrflow", et, e9);
    r.check("sigma_s sigma_t = sigma_(s+t)", "def:ccrflow", semi, e9);
    r.check("sigma_t(X) Gamma_t = Gamma_t X", "eqn:shift", intertwine, e9);
    r.check("sigma_t(X) commutes with operators on bins <= t", "def:ccrflow", range, e9);
    r.check("sigma_t is a unital *-homomorphism on safe operators", "def:ccrflow", hom, e9);
    r.check("<e(f), sigma_t(X) e(h)> factorizes across t", "eqn:shift", elem, tt);

    const StopTime s = random_stoptime(m, derive_seed(c.seed, 41), pick(rng, 1, n - 1));
    const int k = s.support();
    const Matrix gs = stopped_shift(s).matrix();
    {
        double unital = norm_bound(sigma_S(s, Operator::identity(fs)).matrix() - id);
        unital = std::max(unital, distance(sigma_S(s, Operator::identity(ambient_space(m))),
                                           Operator::identity(ambient_space(m))));
        double mult = 0.0, adj = 0.0, gamma = 0.0, riemann = 0.0;
        for (int i = 0; i < 3; ++i) {
            const Operator x = random_safe_operator(rng, m, k, false);
            const Operator y = random_safe_operator(rng, m, k, false);
            const Operator sx = sigma_S(s, x);
            mult = std::max(mult, distance(sigma_S(s, x * y), sx * sigma_S(s, y)));
            adj = std::max(adj, distance(sigma_S(s, x.adjoint()), sx.adjoint()));
            gamma = std::max(gamma, norm_bound((sx.matrix() * gs - gs * x.matrix()) * e[n - k]));
            riemann = std::max(riemann, distance(sigma_S(s, x, finest_partition(m, n)), sx));
        }
        const Operator ax = random_safe_operator(rng, m, k, true);
        const Operator ay = random_safe_operator(rng, m, k, true);
        mult = std::max(mult, distance(sigma_S(s, ax * ay), sigma_S(s, ax) * sigma_S(s, ay)));
        r.check("sigma_S(I) = I", "thm:flowstop", unital, e9);
        r.check("sigma_S(XY) = sigma_S(X) sigma_S(Y)", "thm:flowstop", mult, e9);
        r.check("sigma_S(X*) = sigma_S(X)*", "thm:flowstop", adj, e9);
        r.check("finest Riemann sum of sigma_S equals sigma_S", "thm:flowstop", riemann, e9);
        r.check("sigma_S(X) Gamma_S = Gamma_S X", "eqn:flowgamma", gamma, e9);
    }

    {
        const double e0 = norm_bound(sigma_S(s, Operator(fs, e[0])).matrix() - time_projection_ES(s).matrix());
        r.check("sigma_S(E_0) = E_S", "thm:addt", e0, e9);
        const StopTime t = random_stoptime(m, derive_seed(c.seed, 42), pick(rng, 1, n - k));
        const HomomorphismReport fock = homomorphism_suite(s, t, derive_seed(c.seed, 43), 3, false);
        const HomomorphismReport amb = homomorphism_suite(s, t, derive_seed(c.seed, 44), 1, true);
        r.check("sigma_(S*T) = sigma_S sigma_T", "thm:addt", std::max(fock.composition, amb.composition), e9);
        r.check("sigma_S(E_T) = E_(S*T)", "thm:addt", fock.time_projection, e9);
    }
}

// ---------------------------------------------------------------------------
// cocycle: Weyl cocycles, adaptedness, stopping.
// ---------------------------------------------------------------------------

namespace detail {

inline void check_cocycle_structure(const Context& c, Recorder& r, const Cocycle& v, bool exploratory) {
    const Model& m = c.model;
    const int n = m.n_bins();
    const double tt = c.tol_trunc;
    const std::string pre = v.kind() + ": ";

    double fac = 0.0, hatiso = 0.0, vv = 0.0, vac = 0.0;
    std::vector<Matrix> hat;
    for (int k = 0; k <= n; ++k) {
        fac = std::max(fac, v.factorization_residual(k));
        hat.push_back(v.hat(k, std::numeric_limits<double>::infinity()).matrix());
        hatiso = std::max(hatiso, isometry_residual(hat.back()));
        const Matrix& vk = v.at(k).matrix();
        vv = std::max(vv, norm_bound(vk.adjoint() * vk - v.tail_projection(k).matrix()));
        if (v.p().is_zero()) {
            const Vector ek = lifted(m, time_projection(m, k).matrix()).diagonal();
            vac = std::max(vac, norm_bound(ek.asDiagonal() * vk * ek.asDiagonal() - vk));
        }
    }
    r.check(pre + "V_k = V_(k)) (x) P_[k", "eqn:padapt", fac, tt, exploratory);
    r.check(pre + "V^_k isometric", "def:isometric", hatiso, tt, exploratory);
    r.check(pre + "V_k* V_k = I (x) P_[k", "def:isometric", vv, tt, exploratory);
    if (v.p().is_zero()) r.check(pre + "E_k V_k E_k = V_k", "def:padapt", vac, tt, exploratory);

    double def = 0.0, c1 = 0.0, c2 = 0.0;
    for (int a = 0; a <= n; ++a) {
        for (int b = 0; a + b <= n; ++b) {
            def = std::max(def, norm_bound(v.at(a + b).matrix() - hat[a] * sigma_t(m, a, v.at(b)).matrix()));
        }
        for (int s = a + 1; s <= n; ++s) {
            const Matrix x = v.at(s).matrix().adjoint() * v.at(a).matrix();
            c1 = std::max(c1, head_identity_residual(m, x, true, a));
            c2 = std::max(c2, head_identity_residual(m, Matrix(x.adjoint()), true, a));
        }
    }
    r.check(pre + "V_(s+t) = V^_s sigma_s(V_t)", "eqn:defcocycle", def, tt, exploratory);
    r.check(pre + "V_s* V_r acts trivially on bins <= r", "eqn:cocycle1", c1, tt, exploratory);
    r.check(pre + "V_r* V_s acts trivially on bins <= r", "eqn:cocycle2", c2, tt, exploratory);
}

inline void check_stopped_cocycle(const Context& c, Recorder& r, const Cocycle& v, const StopTime& s,
                                  const std::string& label, Rng& rng) {
    const Model& m = c.model;
    const int n = m.n_bins();
    const double tt = c.tol_trunc, slack = tt + 1e-10;
    const std::string pre = v.kind() + ", " + label + ": ";
    const Index dim = m.ambient_dim();

    std::vector<Matrix> vst(static_cast<std::size_t>(n) + 1, Matrix::Zero(dim, dim));
    for (const auto& ms : s.masses()) {
        const Matrix term = times_lifted(m, v.at(ms.bin).matrix(), ms.projection.matrix(), true);
        for (int t = ms.bin; t <= n; ++t) vst[t] += term;
    }
    std::vector<Matrix> cum, est;
    for (int t = 0; t <= n; ++t) {
        cum.push_back(lifted(m, s.cumulative(t)));
        est.push_back(lifted(m, time_projection_ES(s, t).matrix()));
    }

    double absorb = 0.0, contraction = 0.0, cauchy = 0.0, vnorm = 0.0, inorm = 0.0;
    for (int t = 0; t <= n; ++t) {
        absorb = std::max(absorb, norm_bound(vst[t] - times_lifted(m, vst[t], s.cumulative(t), true)));
    }
    for (int i = 0; i < 10; ++i) {
        const Vector z = rng.unit_vector(dim);
        for (int t = 0; t <= n; ++t) {
            const double vz = (vst[t] * z).norm();
            const double sz = (cum[t] * z).norm();
            contraction = std::max(contraction, vz - sz);
            if (v.p().is_zero()) vnorm = std::max(vnorm, std::abs(vz - (est[t] * z).norm()));
            if (v.p().is_identity()) inorm = std::max(inorm, std::abs(vz - sz));
            for (int q = 0; q < t; ++q) {
                const double d = ((vst[t] - vst[q]) * z).norm() - ((cum[t] - cum[q]) * z).norm();
                cauchy = std::max(cauchy, d);
            }
        }
    }
    r.check(pre + "V_(S,t) = V_(S,t) S([0,t])", "thm:stopcocycle", absorb, tt);
    r.check(pre + "||V_(S,t) z|| <= ||S([0,t]) z||", "lem:uni", std::max(contraction, 0.0), slack);
    r.check(pre + "||(V_(S,t) - V_(S,s)) z|| <= ||S((s,t]) z||", "cor:cauchy", std::max(cauchy, 0.0), slack);
    if (v.p().is_zero()) {
        double fix = 0.0;
        for (int t = 0; t <= n; ++t) {
            fix = std::max(fix, norm_bound(times_lifted(m, vst[t], time_projection_ES(s, t).matrix(), true) - vst[t]));
        }
        r.check(pre + "V_(S,t) E_(S,t) = V_(S,t)", "prp:vnorm", fix, slack);
        r.check(pre + "||V_(S,t) z|| = ||E_(S,t) z||", "prp:vnorm", vnorm, slack);
    }
    if (v.p().is_identity()) {
        r.check(pre + "||V_(S,t) z|| = ||S([0,t]) z||", "prp:inorm", inorm, slack);
        r.check(pre + "V_S isometric", "prp:inorm", isometry_residual(vst[n]), slack);
    }
}

}  // namespace detail

inline void suite_cocycle(const Context& c, Recorder& r) {
    using namespace detail;
    const Model& m = c.model;
    const int n = m.n_bins();
    const double tt = c.tol_trunc;
    Rng rng(derive_seed(c.seed, 5));

    const Vector amp = random_amplitude(rng, m, c.cap());
    const Cocycle w = weyl_cocycle(m, amp);
    const Cocycle vw = vacuum_weyl_cocycle(m, amp);
    std::vector<Cocycle> all{w, vw};
    if (m.init_dim() >= 2) {
        std::vector<Vector> cs;
        for (Index i = 0; i < m.init_dim(); ++i) cs.push_back(random_amplitude(rng, m, c.cap()));
        all.push_back(controlled_weyl_cocycle(m, cs));
    }
    for (const auto& v : all) check_cocycle_structure(c, r, v, false);
    if (m.mult() >= 2) {
        const Vector dir = rng.unit_vector(m.mult());
        const MultiplicityProjection p(dir * dir.adjoint());
        check_cocycle_structure(c, r, projected_weyl_cocycle(m, random_amplitude(rng, m, c.cap()), p), true);
    }

    double hats = 0.0;
    for (int k = 0; k <= n; ++k) hats = std::max(hats, distance(vw.hat(k), w.at(k)));
    r.check("hat of the vacuum Weyl cocycle is the Weyl cocycle", "eg:weylcocycle", hats, tt);

    {
        const Model& mm = m;
        const double third = c.cap() / 3.0;
        const StepFunction f = random_step_function(rng, mm, third, n);
        const StepFunction g = random_step_function(rng, mm, third, n);
        const StepFunction h = random_step_function(rng, mm, third, n);
        const Vector eh = exp_vector(mm, h).amplitudes();
        const Vector lhs = weyl(mm, f).matrix() * (weyl(mm, g).matrix() * eh);
        const Vector rhs = std::exp(cplx(0.0, -inner(f, g).imag())) * (weyl(mm, f + g).matrix() * eh);
        r.check("W(f) W(g) = exp(-i Im<f,g>) W(f+g) on e(h)", "eg:weylcocycle", (lhs - rhs).norm(), tt);
        const Vector act = std::exp(-0.5 * f.norm() * f.norm() - inner(f, h)) * exp_vector(mm, f + h).amplitudes();
        r.check("W(f) e(h) = exp(-||f||^2/2 - <f,h>) e(f+h)", "eg:weylcocycle",
                (weyl(mm, f).matrix() * eh - act).norm(), tt);
    }

    const StopTime rs = random_stoptime(m, derive_seed(c.seed, 51));
    const StopTime fa = first_arrival(m);
    for (const auto& v : all) {
        check_stopped_cocycle(c, r, v, rs, "random S", rng);
        check_stopped_cocycle(c, r, v, fa, "first arrival", rng);
    }

    const Cocycle one = weyl_cocycle(m, Vector::Zero(m.mult()));
    r.check("stopping the identity cocycle gives I", "thm:stopcocycle",
            distance(stop_cocycle(one, rs), Operator::identity(ambient_space(m))), c.exact(1e-10));
}

// ---------------------------------------------------------------------------
// applebaum: the stopped cocycle relation and its consequences.
// ---------------------------------------------------------------------------

inline void suite_applebaum(const Context& c, Recorder& r) {
    using namespace detail;
    const Model& m = c.model;
    const int n = m.n_bins();
    const double tt = c.tol_trunc;
    Rng rng(derive_seed(c.seed, 6));
    const int kinds = m.init_dim() >= 2 ? 3 : 2;

    double rel = 0.0, app_a = 0.0, app_b = 0.0, app_c = 0.0, app_d = 0.0, app_e = 0.0, det = 0.0;
    bool any_d = false, any_e = false;
    for (int trial = 0; trial < applebaum_per_seed; ++trial) {
        const int kind = (static_cast<int>(c.seed % 3) + trial) % kinds;
        const Vector amp = random_amplitude(rng, m, c.cap());
        Cocycle v = kind == 0 ? weyl_cocycle(m, amp) : vacuum_weyl_cocycle(m, amp);
        if (kind == 2) {
            std::vector<Vector> cs;
            for (Index i = 0; i < m.init_dim(); ++i) cs.push_back(random_amplitude(rng, m, c.cap()));
            v = controlled_weyl_cocycle(m, cs);
        }
        const StopTime s = random_stoptime(m, derive_seed(c.seed, 60 + trial), pick(rng, 1, std::max(1, n - 2)));
        const int k = s.support();
        const int j = pick(rng, 1, std::max(1, n - k - 1));
        const StopTime sj = shift_stoptime(s, j);

        const Matrix vsj = stop_cocycle(v, sj).matrix();
        const Matrix vh = stop_hat(v, s).matrix();
        const Matrix svj = sigma_S(s, v.at(j)).matrix();
        const Matrix gsf = stopped_shift(s).matrix();
        const Matrix gs = lifted(m, gsf);
        const Vector safe = lifted(m, time_projection(m, n - k).matrix()).diagonal();
        const Matrix& vj = v.at(j).matrix();
        const Matrix bb = vh.adjoint() * vsj;

        rel = std::max(rel, norm_bound(vsj - vh * svj));
        app_a = std::max(app_a, norm_bound((times_lifted(m, vsj, gsf, true) - times_lifted(m, vh, gsf, true) * vj) *
                                           safe.asDiagonal()));
        app_b = std::max(app_b, norm_bound(bb - svj));
        app_c = std::max(app_c, norm_bound((gs.adjoint() * times_lifted(m, bb, gsf, true) - vj) * safe.asDiagonal()));
        if (v.p().is_zero()) {
            any_d = true;
            const Matrix e = time_projection_ES(sj).matrix();
            app_d = std::max(app_d, norm_bound(bb - lifted(m, e) * times_lifted(m, bb, e, true)));
        }
        if (v.p().is_identity()) {
            any_e = true;
            // Two generic operators on the bins that survive the shift by S + t
            // generate the full algebra there, so commuting with both suffices.
            for (int q = 0; q < 2; ++q) {
                const Operator x = random_safe_operator(rng, m, k + j, false);
                const Matrix g = lifted(m, sigma_S(sj, x).matrix());
                app_e = std::max(app_e, norm_bound(bb * g - g * bb));
            }
        }

        const int d = pick(rng, 1, n - 1);
        const int dj = pick(rng, 1, n - d);
        const Matrix gdf = shift(m, d).matrix();
        const Vector sd = lifted(m, time_projection(m, n - d).matrix()).diagonal();
        const Matrix bd = v.hat(d).matrix().adjoint() * v.at(d + dj).matrix();
        det = std::max(det, norm_bound((lifted(m, gdf).adjoint() * times_lifted(m, bd, gdf, true) - v.at(dj).matrix()) *
                                       sd.asDiagonal()));
    }
    r.check("V_(S+t) = V^_S sigma_S(V_t)", "thm:cocyclerel", rel, tt);
    r.check("(a) V_(S+t) Gamma_S = V^_S Gamma_S V_t", "eqn:appstop", app_a, tt);
    r.check("(b) V^_S* V_(S+t) = sigma_S(V_t)", "eqn:apploc", app_b, tt);
    r.check("(c) Gamma_S* V^_S* V_(S+t) Gamma_S = V_t", "eqn:appdet", app_c, tt);
    if (any_d) r.check("(d) V^_S* V_(S+t) is vacuum adapted at S+t", "rem:vacuum-at-S+t", app_d, tt);
    if (any_e) r.check("(e) V^_S* V_(S+t) is identity adapted at S+t", "rem:identity-at-S+t", app_e, tt);
    r.check("deterministic S: Gamma_s* V^_s* V_(s+t) Gamma_s = V_t", "eqn:appdet", det, tt);
}

}  // namespace fockstop::harness
