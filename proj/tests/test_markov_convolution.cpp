#include "support.hpp"

namespace fockstop {
namespace {

using testing::for_all;

StopTime random_with_support(Rng& rng, const Model& m, std::uint64_t seed, int max_support) {
    return random_stoptime(m, seed, rng.uniform_int(1, std::max(1, max_support)));
}

Model markov_model(Rng& rng) {
    for (;;) {
        ModelParams p = testing::ModelGen{4, false}(rng);
        if (p.n_bins >= 2) return Model(p);
    }
}

TEST(StrongMarkov, DeterministicTimeSplicesHeadAndTail) {
    const Model m({1.0, 2, 1, 1, 1});
    const StrongMarkov j(deterministic(m, 1));
    // u = |10> in ran E_1, w = Gamma_1 |10> = |01>: j(u (x) w) = |11>.
    const Vector u = Vector::Unit(4, 2);
    const Vector w = Vector::Unit(4, 1);
    EXPECT_EQ(j.apply(u, w), Vector::Unit(4, 3));
    EXPECT_EQ(j.pre_basis().cols(), 2);
    EXPECT_EQ(j.post_basis().cols(), 2);
}

TEST(StrongMarkov, RefusesVectorsOutsideItsDomain) {
    const Model m({1.0, 2, 1, 1, 1});
    const StrongMarkov j(first_arrival(m));
    // |11> is not in ran E_S = span{|00>, |01>, |10>}.
    EXPECT_THROW(j.apply(Vector::Unit(4, 3), Vector::Unit(4, 0)), DomainError);
    const StrongMarkov d(deterministic(m, 1));
    // |10> is not in ran Gamma_1 = span{|00>, |01>}.
    EXPECT_THROW(d.apply(Vector::Unit(4, 0), Vector::Unit(4, 2)), DomainError);
    EXPECT_THROW(d.apply(Vector::Unit(3, 0), Vector::Unit(4, 0)), DimensionError);
    EXPECT_THROW(d.apply_coefficients(Matrix::Zero(1, 1)), DimensionError);
}

TEST(StrongMarkovProperty, IsometricOnTheProductBasis) {
    for_all(25, 41, [](Rng& rng, std::uint64_t seed) {
        const Model m = markov_model(rng);
        const StrongMarkov j(random_with_support(rng, m, seed, m.n_bins() - 1));
        EXPECT_LT(isometry_residual(j.matrix()), 1e-12);
        EXPECT_LT(isometry_residual(j.pre_basis()), 1e-12);
        EXPECT_LT(isometry_residual(j.post_basis()), 1e-12);
        const Matrix c = rng.gaussian_matrix(j.pre_basis().cols(), j.post_basis().cols());
        EXPECT_NEAR(j.apply_coefficients(c).norm(), c.norm(), 1e-12);
    });
}

TEST(StrongMarkovProperty, VacuumInTheSecondSlotIsTheIdentity) {
    for_all(25, 42, [](Rng& rng, std::uint64_t seed) {
        const Model m = markov_model(rng);
        const StrongMarkov j(random_with_support(rng, m, seed, m.n_bins()));
        const Vector u = j.pre_basis() * rng.gaussian_vector(j.pre_basis().cols());
        EXPECT_LT((j.apply(u, vacuum(m).amplitudes()) - u).norm(), 1e-12);
    });
}

TEST(StrongMarkovProperty, ProductNormsMultiply) {
    for_all(25, 43, [](Rng& rng, std::uint64_t seed) {
        const Model m = markov_model(rng);
        const StrongMarkov j(random_with_support(rng, m, seed, m.n_bins() - 1));
        const Vector u = j.pre_basis() * rng.gaussian_vector(j.pre_basis().cols());
        const Vector w = j.post_basis() * rng.gaussian_vector(j.post_basis().cols());
        EXPECT_NEAR(j.apply(u, w).norm(), u.norm() * w.norm(), 1e-12);
    });
}

TEST(ConvolutionProperty, IsAStopTimeAndShiftsUnderDeterministicT) {
    for_all(25, 44, [](Rng& rng, std::uint64_t seed) {
        const Model m = markov_model(rng);
        const int n = m.n_bins();
        const StopTime s = random_with_support(rng, m, seed, n - 1);
        const StopTime t = random_with_support(rng, m, seed + 7, n - s.support());
        const StopTime st = convolve(s, t);
        EXPECT_TRUE(validate(st, 1e-10).valid());
        EXPECT_LE(st.support(), s.support() + t.support());
        const int d = rng.uniform_int(1, n - s.support());
        const StopTime sd = convolve(s, deterministic(m, d));
        const StopTime plus = shift_stoptime(s, d);
        for (int k = 0; k <= n; ++k) EXPECT_LT(norm_bound(sd.mass_at(k) - plus.mass_at(k)), 1e-12);
    });
}

TEST(ConvolutionProperty, StoppedShiftsCompose) {
    for_all(25, 45, [](Rng& rng, std::uint64_t seed) {
        const Model m = markov_model(rng);
        const int n = m.n_bins();
        const StopTime s = random_with_support(rng, m, seed, n - 1);
        const StopTime t = random_with_support(rng, m, seed + 7, n - s.support());
        const Matrix safe = time_projection(m, n - s.support() - t.support()).matrix();
        const Matrix lhs = stopped_shift(convolve(s, t)).matrix() * safe;
        EXPECT_LT(norm_bound(lhs - stopped_shift(s).matrix() * stopped_shift(t).matrix() * safe), 1e-12);
    });
}

TEST(ConvolutionProperty, FlowOfTheConvolutionIsTheComposedFlow) {
    for_all(15, 46, [](Rng& rng, std::uint64_t seed) {
        const Model m = markov_model(rng);
        const int n = m.n_bins();
        const StopTime s = random_with_support(rng, m, seed, n - 1);
        const StopTime t = random_with_support(rng, m, seed + 7, n - s.support());
        const HomomorphismReport r = homomorphism_suite(s, t, seed, 3);
        EXPECT_LT(r.composition, 1e-12);
        EXPECT_LT(r.time_projection, 1e-12);
    });
}

TEST(Convolution, RefusesPairsPastTheHorizon) {
    const Model m({1.0, 3, 1, 1, 1});
    EXPECT_THROW(convolve(deterministic(m, 2), deterministic(m, 2)), HorizonError);
    const Model other({1.0, 3, 2, 1, 1});
    EXPECT_THROW(convolve(deterministic(m, 1), deterministic(other, 1)), DimensionError);
}

TEST(ConvolutionMarkov, FactorsThroughTheInnerMaps) {
    Rng rng(47);
    const Model m({1.0, 3, 2, 1, 1});
    const StopTime s = random_stoptime(m, 471, 1);
    const StopTime t = random_stoptime(m, 472, 1);
    const ConvolutionMarkov jj(s, t);
    const Vector u = jj.outer().pre_basis() * rng.gaussian_vector(jj.outer().pre_basis().cols());
    const Vector v = jj.middle_basis() * rng.gaussian_vector(jj.middle_basis().cols());
    const Vector w = jj.combined().post_basis() * rng.gaussian_vector(jj.combined().post_basis().cols());
    EXPECT_NEAR(jj.apply(u, v, w).norm(), u.norm() * v.norm() * w.norm(), 1e-12);
    const Vector inner = jj.outer().apply(u, v);
    EXPECT_LT((jj.apply(u, v, w) - jj.combined().apply(inner, w)).norm(), 1e-12);
    // Something outside Gamma_S: the all-occupied basis vector.
    EXPECT_THROW(jj.apply(u, Vector::Unit(m.fock_dim(), m.fock_dim() - 1), w), DomainError);
}

}  // namespace
}  // namespace fockstop
