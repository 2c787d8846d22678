#include "support.hpp"

namespace fockstop {
namespace {

using testing::for_all;

/// Independent truncated-series oracle for <e(f), e(g)> with d <= 2.
cplx truncated_exp_inner(const Model& m, const StepFunction& f, const StepFunction& g) {
    cplx total = 1.0;
    for (int k = 1; k <= m.n_bins(); ++k) {
        const Vector a = f.bin(k), b = g.bin(k);
        const cplx z0 = std::conj(a(0)) * b(0);
        const cplx z1 = m.mult() == 2 ? std::conj(a(1)) * b(1) : cplx(0.0);
        cplx s = 0.0;
        for (int i = 0; i <= m.cutoff(); ++i) {
            for (int j = 0; j <= (m.mult() == 2 ? m.cutoff() - i : 0); ++j) {
                s += std::pow(z0, i) * std::pow(z1, j) / (std::tgamma(i + 1.0) * std::tgamma(j + 1.0));
            }
        }
        total *= s;
    }
    return total;
}

Matrix number_on_bin(const Model& m, int bin) {
    Matrix x = Matrix::Zero(m.fock_dim(), m.fock_dim());
    for (Index i = 0; i < m.fock_dim(); ++i) x(i, i) = m.total_occupation(m.digit(i, bin));
    return x;
}

TEST(ExpVector, SingleBinOracle) {
    const Model m({1.0, 1, 2, 1, 1});
    const Vector e = exp_vector(m, StepFunction::constant(m, Vector::Constant(1, 0.3), 1)).amplitudes();
    ASSERT_EQ(e.size(), 3);
    EXPECT_NEAR(std::abs(e(0) - 1.0), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(e(1) - 0.3), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(e(2) - 0.09 / std::sqrt(2.0)), 0.0, 1e-15);
}

TEST(ExpVector, ZeroFunctionIsTheVacuum) {
    const Model m({1.0, 3, 2, 2, 1});
    EXPECT_EQ(exp_vector(m, StepFunction::zero(m)).amplitudes(), vacuum(m).amplitudes());
}

TEST(ExpVectorProperty, InnerProductMatchesTruncatedSeries) {
    for_all(30, 21, [](Rng& rng, std::uint64_t) {
        const Model m(testing::ModelGen{}(rng));
        const StepFunction f = random_step_function(rng, m, 0.8, m.n_bins());
        const StepFunction g = random_step_function(rng, m, 0.8, m.n_bins());
        const cplx got = exp_vector(m, f).amplitudes().dot(exp_vector(m, g).amplitudes());
        EXPECT_NEAR(std::abs(got - truncated_exp_inner(m, f, g)), 0.0, 1e-13);
    });
}

TEST(TimeProjection, KeepsStatesVacuumAfterTheCut) {
    const Model m({1.0, 2, 1, 1, 1});
    // Basis |00>, |01>, |10>, |11>.
    EXPECT_EQ(time_projection(m, 1).matrix(), testing::basis_projector(4, {0, 2}));
    EXPECT_EQ(time_projection(m, 0).matrix(), testing::basis_projector(4, {0}));
    EXPECT_EQ(time_projection(m, 2).matrix(), Matrix::Identity(4, 4));
}

TEST(Shift, MovesContentRightAndKillsOverflow) {
    const Model m({1.0, 2, 1, 1, 1});
    Matrix expect = Matrix::Zero(4, 4);
    expect(0, 0) = 1.0;  // |00> -> |00>
    expect(1, 2) = 1.0;  // |10> -> |01>
    EXPECT_EQ(shift(m, 1).matrix(), expect);
    EXPECT_EQ(shift(m, 0).matrix(), Matrix::Identity(4, 4));
}

TEST(ShiftProperty, ActsOnExponentialVectorsByShiftingTheFunction) {
    for_all(30, 22, [](Rng& rng, std::uint64_t) {
        const Model m(testing::ModelGen{}(rng));
        const int j = rng.uniform_int(0, m.n_bins());
        const StepFunction h = random_step_function(rng, m, 0.7, m.n_bins() - j);
        const Vector moved = shift(m, j).matrix() * exp_vector(m, h).amplitudes();
        EXPECT_LT((moved - exp_vector(m, h.shifted(j)).amplitudes()).norm(), 1e-14);
        const Matrix g = shift(m, j).matrix();
        const Matrix e = time_projection(m, m.n_bins() - j).matrix();
        EXPECT_LT(norm_bound(g.adjoint() * g - e), 1e-15);
        const int s = rng.uniform_int(0, m.n_bins() - j);
        EXPECT_LT(norm_bound(shift(m, s).matrix() * g - shift(m, s + j).matrix()), 1e-15);
    });
}

TEST(Creation, LaddersWithSquareRoots) {
    const Model m({1.0, 1, 2, 1, 1});
    const Matrix ad = creation_bin(m, 0);
    EXPECT_DOUBLE_EQ(ad(1, 0).real(), 1.0);
    EXPECT_DOUBLE_EQ(ad(2, 1).real(), std::sqrt(2.0));
    EXPECT_EQ(ad.col(2), Vector::Zero(3));
}

TEST(Weyl, TruncatedDisplacementIsExactlyUnitary) {
    Rng rng(5);
    const Model m({1.0, 2, 3, 2, 1});
    const Operator w = weyl(m, random_step_function(rng, m, 1.5, 2));
    EXPECT_LT(unitarity_defect(w), 1e-13);
}

TEST(Weyl, ApproachesTheCoherentActionAsTheCutoffGrows) {
    double previous = 1.0;
    for (int cutoff : {4, 6, 8, 10}) {
        const Model m({1.0, 1, cutoff, 1, 1});
        Rng local(6);
        const StepFunction f = testing::function_of_radius(local, m, 0.4, 1);
        const StepFunction h = testing::function_of_radius(local, m, 0.3, 1);
        const cplx phase = std::exp(-0.5 * f.norm() * f.norm() - inner(f, h));
        const Vector lhs = weyl(m, f).matrix() * exp_vector(m, h).amplitudes();
        const double r = (lhs - phase * exp_vector(m, f + h).amplitudes()).norm();
        EXPECT_LT(r, previous);
        previous = r;
    }
    EXPECT_LT(previous, 1e-7);
}

TEST(SecondQuantization, IdentityZeroAndMultiplicativity) {
    const Model m({1.0, 1, 3, 2, 1});
    EXPECT_LT(norm_bound(second_quantize_bin(m, Matrix::Identity(2, 2)) - Matrix::Identity(10, 10)), 1e-15);
    EXPECT_EQ(second_quantize_bin(m, Matrix::Zero(2, 2)), testing::basis_projector(10, {0}));
    Rng rng(7);
    for (int i = 0; i < 5; ++i) {
        const Matrix a = rng.gaussian_matrix(2, 2);
        const Matrix b = rng.gaussian_matrix(2, 2);
        const Matrix lhs = second_quantize_bin(m, a * b);
        EXPECT_LT(norm_bound(lhs - second_quantize_bin(m, a) * second_quantize_bin(m, b)), 1e-12);
        EXPECT_LT(norm_bound(second_quantize_bin(m, a.adjoint()) - second_quantize_bin(m, a).adjoint()), 1e-13);
    }
    EXPECT_THROW(second_quantize_bin(m, Matrix::Identity(3, 3)), DimensionError);
}

TEST(Adaptedness, NumberOperatorIsAdaptedAtItsOwnBin) {
    const Model m({1.0, 3, 2, 1, 1});
    const Operator n1(fock_space(m), number_on_bin(m, 1));
    EXPECT_TRUE(adaptedness_check(m, n1, 1, 1e-12).adapted);
    EXPECT_TRUE(adaptedness_check(m, n1, 3, 1e-12).adapted);
    EXPECT_FALSE(adaptedness_check(m, n1, 0, 1e-3).adapted);
    const Operator n2(fock_space(m), number_on_bin(m, 2));
    EXPECT_FALSE(adaptedness_check(m, n2, 1, 1e-3).adapted);
    EXPECT_TRUE(is_horizon_safe(m, n2, 1, 1e-12));
    EXPECT_FALSE(is_horizon_safe(m, n2, 2, 1e-3));
}

TEST(AdaptednessProperty, StructuralTestsAgreeWithTheCommutantOracle) {
    for_all(25, 23, [](Rng& rng, std::uint64_t) {
        const Model m(testing::ModelGen{}(rng));
        const bool wi = m.init_dim() > 1;
        const int n = m.n_bins();
        const int k = rng.uniform_int(0, n);
        const Index outer = outer_dim(m, wi);
        // X_head (x) I_tail: both tail tests vanish.
        const Matrix x = identity_after(m, random_operator(rng, outer * m.block_dim(k)), k);
        EXPECT_LT(tail_identity_residual(m, x, wi, k), 1e-14);
        EXPECT_LT(commutant_residual(m, x, wi, k + 1, n), 1e-14);
        // I_head (x) Y: both head tests vanish.
        const Matrix y = identity_before(m, random_operator(rng, outer * m.block_dim(n - k)), wi, k);
        EXPECT_LT(head_identity_residual(m, y, wi, k), 1e-14);
        EXPECT_LT(commutant_residual(m, y, wi, 1, k), 1e-14);
        // A generic operator fails both, whenever the tested block is nontrivial.
        const Matrix g = random_operator(rng, m.dim(wi));
        if (k < n) {
            EXPECT_GT(tail_identity_residual(m, g, wi, k), 1e-3);
            EXPECT_GT(commutant_residual(m, g, wi, k + 1, n), 1e-3);
        }
        if (k > 0) {
            EXPECT_GT(head_identity_residual(m, g, wi, k), 1e-3);
            EXPECT_GT(commutant_residual(m, g, wi, 1, k), 1e-3);
        }
        // Perturbations are detected at the scale they are made.
        const double eps = 1e-6;
        if (k < n) {
            const double r = tail_identity_residual(m, x + eps * g, wi, k);
            EXPECT_GT(r, 1e-9);
            EXPECT_LT(r, 1e-4);
        }
    });
}

TEST(FockErrors, OutOfRangeBinsAndMismatchedShapes) {
    const Model m({1.0, 2, 1, 1, 1});
    EXPECT_THROW(time_projection(m, 3), HorizonError);
    EXPECT_THROW(time_projection(m, -1), HorizonError);
    EXPECT_THROW(shift(m, 3), HorizonError);
    const Model other({1.0, 3, 1, 1, 1});
    EXPECT_THROW(exp_vector(m, StepFunction::zero(other)), DimensionError);
    EXPECT_THROW(identity_before(m, Matrix::Identity(3, 3), false, 1), DimensionError);
    EXPECT_THROW(time_projection(m, 1) * time_projection(other, 1), DimensionError);
    EXPECT_THROW(Operator(fock_space(m), Matrix::Identity(3, 3)), DimensionError);
}

}  // namespace
}  // namespace fockstop
