#include "support.hpp"

namespace fockstop {
namespace {

using testing::for_all;

Model flow_model(Rng& rng, bool with_init) {
    for (;;) {
        ModelParams p = testing::ModelGen{4, with_init}(rng);
        if (p.n_bins >= 2) return Model(p);
    }
}

Vector amplitude(Rng& rng, const Model& m, double r) { return r * rng.unit_vector(m.mult()); }

Cocycle identity_cocycle(const Model& m) {
    std::vector<Operator> v(static_cast<std::size_t>(m.n_bins()) + 1, Operator::identity(ambient_space(m)));
    return {m, MultiplicityProjection::identity(m.mult()), std::move(v), "identity"};
}

TEST(FlowProperty, TimeProjectionsAndSemigroupLaw) {
    for_all(25, 51, [](Rng& rng, std::uint64_t) {
        const Model m = flow_model(rng, true);
        const int n = m.n_bins();
        const int s = rng.uniform_int(0, n);
        const int t = rng.uniform_int(0, n - s);
        EXPECT_EQ(sigma_t(m, s, time_projection(m, t)).matrix(), time_projection(m, s + t).matrix());
        const Operator x(ambient_space(m), random_operator(rng, m.ambient_dim()));
        EXPECT_LT(distance(sigma_t(m, s, sigma_t(m, t, x)), sigma_t(m, s + t, x)), 1e-14);
        EXPECT_EQ(sigma_t(m, s, Operator::identity(ambient_space(m))).matrix(), Matrix::Identity(m.ambient_dim(), m.ambient_dim()));
    });
}

TEST(FlowProperty, HomomorphismOnSafeOperatorsAndShiftIntertwining) {
    for_all(25, 52, [](Rng& rng, std::uint64_t) {
        const Model m = flow_model(rng, false);
        const int j = rng.uniform_int(0, m.n_bins());
        const Operator x = random_safe_operator(rng, m, j, false);
        const Operator y = random_safe_operator(rng, m, j, false);
        EXPECT_LT(distance(sigma_t(m, j, x * y), sigma_t(m, j, x) * sigma_t(m, j, y)), 1e-14);
        EXPECT_LT(distance(sigma_t(m, j, x.adjoint()), sigma_t(m, j, x).adjoint()), 1e-15);
        const Operator g = shift(m, j);
        EXPECT_LT(distance(sigma_t(m, j, x) * g, g * x), 1e-14);
        EXPECT_LT(head_identity_residual(m, sigma_t(m, j, x).matrix(), false, j), 1e-14);
    });
}

TEST(FlowProperty, StoppedFlowIsAUnitalHomomorphismIntertwiningTheStoppedShift) {
    for_all(20, 53, [](Rng& rng, std::uint64_t seed) {
        const Model m = flow_model(rng, true);
        const StopTime s = random_stoptime(m, seed, rng.uniform_int(1, m.n_bins() - 1));
        const int k = s.support();
        const Operator id = Operator::identity(ambient_space(m));
        EXPECT_LT(distance(sigma_S(s, id), id), 1e-12);
        const Operator x = random_safe_operator(rng, m, k, true);
        const Operator y = random_safe_operator(rng, m, k, true);
        EXPECT_LT(distance(sigma_S(s, x * y), sigma_S(s, x) * sigma_S(s, y)), 1e-12);
        EXPECT_LT(distance(sigma_S(s, x, finest_partition(m, m.n_bins())), sigma_S(s, x)), 1e-14);
        const Operator xf = random_safe_operator(rng, m, k, false);
        const Matrix gs = stopped_shift(s).matrix();
        EXPECT_LT(norm_bound(sigma_S(s, xf).matrix() * gs - gs * xf.matrix()), 1e-12);
        EXPECT_EQ(FlowEndomorphism(s).reach(), k);
        EXPECT_LT(distance(sigma_S(s, time_projection(m, 0)), time_projection_ES(s)), 1e-12);
    });
}

TEST(Flow, EndomorphismAtFixedTime) {
    const Model m({1.0, 3, 1, 1, 1});
    const FlowEndomorphism f(m, 2);
    EXPECT_EQ(f.reach(), 2);
    EXPECT_EQ(f(time_projection(m, 1)).matrix(), time_projection(m, 3).matrix());
    EXPECT_THROW(FlowEndomorphism(m, 4), HorizonError);
}

TEST(MultiplicityProjection, ValidatesItsMatrix) {
    EXPECT_THROW(MultiplicityProjection(0.5 * Matrix::Identity(2, 2)), ValidationError);
    EXPECT_THROW(MultiplicityProjection(Matrix::Zero(2, 3)), DimensionError);
    EXPECT_TRUE(MultiplicityProjection::identity(2).is_identity());
    EXPECT_TRUE(MultiplicityProjection::zero(2).is_zero());
}

TEST(Cocycle, RejectsMalformedFamilies) {
    const Model m({1.0, 2, 1, 1, 2});
    const Operator id = Operator::identity(ambient_space(m));
    EXPECT_THROW(Cocycle(m, MultiplicityProjection::identity(1), {id, id}), DimensionError);
    EXPECT_THROW(Cocycle(m, MultiplicityProjection::identity(2), {id, id, id}), DimensionError);
    EXPECT_THROW(Cocycle(m, MultiplicityProjection::identity(1), {id, id, Operator::identity(fock_space(m))}),
                 DimensionError);
    EXPECT_THROW(controlled_weyl_cocycle(m, {Vector::Ones(1)}), DimensionError);
    Rng rng(54);
    const Operator scrambled(ambient_space(m), random_operator(rng, m.ambient_dim()));
    const Cocycle bad(m, MultiplicityProjection::identity(1), {id, scrambled, id});
    EXPECT_THROW(bad.hat(1), AdaptednessError);
    const Model other({1.0, 3, 1, 1, 2});
    EXPECT_THROW(stop_cocycle(bad, deterministic(other, 1)), DimensionError);
}

TEST(CocycleProperty, WeylFamiliesFactorAndSatisfyTheCocycleLaw) {
    for_all(15, 55, [](Rng& rng, std::uint64_t) {
        const Model m = flow_model(rng, true);
        const int n = m.n_bins();
        const Vector c = amplitude(rng, m, 0.8);
        std::vector<Cocycle> family = {weyl_cocycle(m, c), vacuum_weyl_cocycle(m, c)};
        if (m.mult() == 2) {
            Matrix p = Matrix::Zero(2, 2);
            p(0, 0) = 1.0;
            family.push_back(projected_weyl_cocycle(m, c, MultiplicityProjection(p)));
        }
        for (const Cocycle& v : family) {
            SCOPED_TRACE(v.kind());
            for (int k = 0; k <= n; ++k) {
                EXPECT_LT(v.factorization_residual(k), 1e-13);
                EXPECT_LT(isometry_residual(v.hat(k).matrix()), 1e-12);
                const Matrix vk = v.at(k).matrix();
                EXPECT_LT(norm_bound(vk.adjoint() * vk - v.tail_projection(k).matrix()), 1e-12);
            }
            const int s = rng.uniform_int(0, n);
            const int t = rng.uniform_int(0, n - s);
            const Operator rhs = v.hat(s) * sigma_t(m, s, v.at(t));
            EXPECT_LT(distance(v.at(s + t), rhs), 1e-12);
        }
    });
}

TEST(CocycleProperty, StoppedCocyclesPreserveNorms) {
    for_all(15, 56, [](Rng& rng, std::uint64_t seed) {
        const Model m = flow_model(rng, true);
        const int n = m.n_bins();
        const StopTime s = random_stoptime(m, seed, rng.uniform_int(1, n));
        const Vector c = amplitude(rng, m, 0.8);
        const Cocycle w = weyl_cocycle(m, c);
        const Cocycle vw = vacuum_weyl_cocycle(m, c);
        EXPECT_LT(isometry_residual(stop_cocycle(w, s).matrix()), 1e-12);
        const int t = rng.uniform_int(0, n);
        const Vector z = rng.unit_vector(m.ambient_dim());
        const Matrix cum = lift(m, s.cumulative(t), true);
        const Matrix est = lift(m, time_projection_ES(s, t).matrix(), true);
        EXPECT_NEAR((stop_cocycle(w, s, t).matrix() * z).norm(), (cum * z).norm(), 1e-12);
        EXPECT_NEAR((stop_cocycle(vw, s, t).matrix() * z).norm(), (est * z).norm(), 1e-12);
        EXPECT_LT(norm_bound(stop_cocycle(w, s, t).matrix() * cum - stop_cocycle(w, s, t).matrix()), 1e-12);
        EXPECT_LT(distance(stop_cocycle(w, s, finest_partition(m, n)), stop_cocycle(w, s)), 1e-14);
        std::vector<Vector> cs;
        for (Index i = 0; i < m.init_dim(); ++i) cs.push_back(amplitude(rng, m, 0.5));
        EXPECT_LT(isometry_residual(stop_cocycle(controlled_weyl_cocycle(m, cs), s).matrix()), 1e-12);
    });
}

TEST(Cocycle, StoppingTheIdentityCocycleGivesTheIdentity) {
    Rng rng(57);
    const Model m({1.0, 3, 2, 1, 2});
    const Cocycle one = identity_cocycle(m);
    for (int i = 0; i < 5; ++i) {
        EXPECT_EQ(stop_cocycle(one, random_stoptime(m, 570 + i)).matrix(),
                  Matrix::Identity(m.ambient_dim(), m.ambient_dim()));
    }
    EXPECT_EQ(stop_hat(one, first_arrival(m)).matrix(), Matrix::Identity(m.ambient_dim(), m.ambient_dim()));
}

TEST(Weyl, CommutationRelationAtHighCutoff) {
    // W(f) W(g) = exp(-i Im<f, g>) W(f + g), checked on exponential vectors.
    Rng rng(58);
    const Model m({1.0, 1, 14, 1, 1});
    const StepFunction f = testing::function_of_radius(rng, m, 0.3, 1);
    const StepFunction g = testing::function_of_radius(rng, m, 0.3, 1);
    const StepFunction h = testing::function_of_radius(rng, m, 0.2, 1);
    const Vector eh = exp_vector(m, h).amplitudes();
    const Vector lhs = weyl(m, f).matrix() * (weyl(m, g).matrix() * eh);
    const Vector rhs = std::exp(cplx(0.0, -inner(f, g).imag())) * (weyl(m, f + g).matrix() * eh);
    EXPECT_LT((lhs - rhs).norm(), 1e-9);
    // The opposite phase convention is visibly wrong.
    const Vector flipped = std::exp(cplx(0.0, inner(f, g).imag())) * (weyl(m, f + g).matrix() * eh);
    if (std::abs(inner(f, g).imag()) > 1e-3) EXPECT_GT((lhs - flipped).norm(), 1e-4);
}

}  // namespace
}  // namespace fockstop
