#include <random>

#include <gtest/gtest.h>

#include "cglasso/glasso.hpp"
#include "oracles.hpp"

using namespace cglasso;

namespace {

Matrix random_spd(Index K, std::mt19937_64& rng, double ridge = 0.5) {
    std::normal_distribution<double> nd;
    Matrix a(K, K);
    for (Index i = 0; i < a.size(); ++i) a.data()[i] = nd(rng);
    Matrix s = a * a.transpose() / static_cast<double>(K);
    s.diagonal().array() += ridge;
    return s;
}

Matrix sample_cov(Index n, Index K, std::mt19937_64& rng) {
    std::normal_distribution<double> nd;
    Matrix z(n, K);
    for (Index i = 0; i < z.size(); ++i) z.data()[i] = nd(rng);
    for (Index k = 1; k < K; ++k) z.col(k) += 0.6 * z.col(k - 1);
    return centered_covariance(z).second;
}

// 2x2 objective in free parameters (a, b, c) -> Omega = ((a, b), (b, c)).
double objective2(const Vector& v, const Matrix& s, double lambda, bool pen_diag) {
    const double a = v[0], b = v[1], c = v[2];
    const double det = a * c - b * b;
    if (!(a > 0 && det > 0)) return INFINITY;
    const double tr = s(0, 0) * a + 2 * s(0, 1) * b + s(1, 1) * c;
    const double l1 = 2 * std::abs(b) + (pen_diag ? std::abs(a) + std::abs(c) : 0.0);
    return -0.5 * std::log(det) + 0.5 * tr + lambda * l1;
}

int off_diagonal_count(const Matrix& om) {
    int edges = 0;
    for (Index l = 0; l < om.cols(); ++l)
        for (Index k = 0; k < l; ++k) edges += om(k, l) != 0.0;
    return edges;
}

}  // namespace

TEST(GlassoObjective, ScalarValues) {
    GlassoOptions o;
    EXPECT_NEAR(glasso_objective(PrecisionMatrix(Matrix::Ones(1, 1)), Matrix::Ones(1, 1), o), 0.5, 1e-15);
    o.lambda = 0.25;
    EXPECT_NEAR(glasso_objective(PrecisionMatrix(Matrix::Constant(1, 1, 2.0)), Matrix::Ones(1, 1), o),
                -0.5 * std::log(2.0) + 1.0 + 0.5, 1e-14);
    EXPECT_NEAR(glasso_objective(PrecisionMatrix(Matrix::Constant(1, 1, 2.0)), Matrix::Ones(1, 1), o), 1.1534, 1e-4);
}

TEST(GlassoObjective, TermByTerm) {
    std::mt19937_64 rng(1);
    for (int t = 0; t < 10; ++t) {
        const Matrix om = random_spd(3, rng);
        const Matrix s = random_spd(3, rng);
        GlassoOptions o;
        o.lambda = 0.3;
        double l1 = 0, tr = 0;
        for (Index i = 0; i < 3; ++i)
            for (Index j = 0; j < 3; ++j) {
                l1 += std::abs(om(i, j));
                tr += s(i, j) * om(j, i);
            }
        const double expected = -0.5 * std::log(om.determinant()) + 0.5 * tr + 0.3 * l1;
        EXPECT_NEAR(glasso_objective(PrecisionMatrix(om), s, o), expected, 1e-12);
        o.penalize_diagonal = false;
        EXPECT_NEAR(glasso_objective(PrecisionMatrix(om), s, o), expected - 0.3 * om.diagonal().cwiseAbs().sum(),
                    1e-12);
    }
}

TEST(GlassoFit, DiagonalClosedForm) {
    GlassoOptions o;
    o.lambda = 0.25;
    const Matrix om = glasso_fit(Matrix::Identity(4, 4), o).matrix();
    for (Index k = 0; k < 4; ++k) EXPECT_NEAR(om(k, k), 2.0 / 3.0, 1e-8);
    EXPECT_EQ(om.diagonal().asDiagonal().toDenseMatrix(), om);
}

TEST(GlassoFit, ScalarCase) {
    GlassoOptions o;
    o.lambda = 0.1;
    EXPECT_NEAR(glasso_fit(Matrix::Constant(1, 1, 2.0), o)(0, 0), 1.0 / 2.2, 1e-15);
}

TEST(GlassoFit, TwoByTwoMatchesGridSearch) {
    Matrix s(2, 2);
    s << 1, 0.5, 0.5, 1;
    for (bool pen : {true, false}) {
        GlassoOptions o;
        o.lambda = 0.1;
        o.penalize_diagonal = pen;
        const Matrix om = glasso_fit(s, o).matrix();
        const Vector best = oracle::grid_minimize([&](const Vector& v) { return objective2(v, s, 0.1, pen); },
                                                  Vector::Constant(3, 1.0), Vector::Constant(3, 0.99), 1e-6);
        EXPECT_NEAR(om(0, 0), best[0], 1e-3);
        EXPECT_NEAR(om(0, 1), best[1], 1e-3);
        EXPECT_NEAR(om(1, 1), best[2], 1e-3);
    }
}

TEST(GlassoFit, LambdaMaxGivesDiagonal) {
    std::mt19937_64 rng(2);
    for (int t = 0; t < 5; ++t) {
        const Matrix s = sample_cov(40, 6, rng);
        GlassoOptions o;
        o.lambda = glasso_lambda_max(s);
        const Matrix om = glasso_fit(s, o).matrix();
        for (Index l = 0; l < 6; ++l)
            for (Index k = 0; k < 6; ++k)
                if (k != l) {
                    EXPECT_EQ(om(k, l), 0.0);
                }
        o.lambda *= 0.9;
        EXPECT_GT(off_diagonal_count(glasso_fit(s, o).matrix()), 0);
    }
}

TEST(GlassoFit, TwoByTwoAboveLambdaMaxMatchesGrid) {
    Matrix s(2, 2);
    s << 1, 0.3, 0.3, 2;
    const double lam = 0.2;  // > 0.3 / 2
    GlassoOptions o;
    o.lambda = lam;
    const Matrix om = glasso_fit(s, o).matrix();
    EXPECT_EQ(om(0, 1), 0.0);
    const Vector best = oracle::grid_minimize([&](const Vector& v) { return objective2(v, s, lam, true); },
                                              Vector::Constant(3, 1.0), Vector::Constant(3, 0.99), 1e-6);
    EXPECT_NEAR(best[1], 0.0, 1e-3);
    EXPECT_NEAR(om(0, 0), best[0], 1e-3);
    EXPECT_NEAR(om(1, 1), best[2], 1e-3);
}

TEST(GlassoFit, SubgradientResidualAndEigenBound) {
    std::mt19937_64 rng(3);
    for (int t = 0; t < 20; ++t) {
        const Index K = 3 + t % 8;
        const Matrix s = sample_cov(15 + 3 * t, K, rng);  // sometimes singular
        GlassoOptions o;
        o.lambda = glasso_lambda_max(s) * (0.05 + 0.04 * t);
        const PrecisionMatrix om = glasso_fit(s, o);
        EXPECT_LE(glasso_subgradient_residual(om.matrix(), s, o), 1e-6);
        Eigen::SelfAdjointEigenSolver<Matrix> es(om.matrix());
        EXPECT_LE(es.eigenvalues().maxCoeff(), static_cast<double>(K) / o.lambda + 1e-6);
    }
}

TEST(GlassoFit, UnpenalizedDiagonalSatisfiesConditions) {
    std::mt19937_64 rng(4);
    const Matrix s = sample_cov(50, 6, rng);
    GlassoOptions o;
    o.lambda = 0.05;
    o.penalize_diagonal = false;
    const Matrix om = glasso_fit(s, o).matrix();
    EXPECT_LE(glasso_subgradient_residual(om, s, o), 1e-6);
    const Matrix sigma = om.inverse();
    for (Index k = 0; k < 6; ++k) EXPECT_NEAR(sigma(k, k), s(k, k), 1e-6);
}

TEST(GlassoFit, SolutionIsNotImprovedByPerturbation) {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> nd;
    const Matrix s = sample_cov(30, 5, rng);
    GlassoOptions o;
    o.lambda = 0.08;
    const PrecisionMatrix om = glasso_fit(s, o);
    const double f0 = glasso_objective(om, s, o);
    for (int t = 0; t < 200; ++t) {
        Matrix d(5, 5);
        for (Index i = 0; i < 25; ++i) d.data()[i] = 1e-3 * nd(rng);
        Matrix p = om.matrix() + 0.5 * (d + d.transpose());
        Eigen::LLT<Matrix> llt(p);
        if (llt.info() != Eigen::Success) continue;
        EXPECT_GE(glasso_objective(PrecisionMatrix(p), s, o), f0 - 1e-9);
    }
}

TEST(GlassoFit, WarmStartAgreesWithColdStart) {
    std::mt19937_64 rng(6);
    const Matrix s = sample_cov(40, 8, rng);
    GlassoOptions o;
    o.lambda = 0.05;
    const Matrix cold = glasso_fit(s, o).matrix();
    GlassoOptions o2 = o;
    o2.lambda = 0.08;
    const Matrix warm = glasso_fit(s, o, glasso_fit(s, o2).matrix()).matrix();
    EXPECT_LT((cold - warm).cwiseAbs().maxCoeff(), 1e-4);
    // a non-PD warm start falls back to a cold start
    EXPECT_LT((glasso_fit(s, o, Matrix(-Matrix::Identity(8, 8))).matrix() - cold).cwiseAbs().maxCoeff(), 1e-4);
}

TEST(GlassoFit, RejectsBadInput) {
    GlassoOptions o;
    o.lambda = -1;
    EXPECT_THROW(glasso_fit(Matrix::Identity(2, 2), o), ArgumentError);
    o.lambda = 0.1;
    Matrix asym(2, 2);
    asym << 1, 0.2, 0.3, 1;
    EXPECT_THROW(glasso_fit(asym, o), ArgumentError);
    o.lambda = 0.0;
    EXPECT_THROW(glasso_fit(Matrix::Zero(2, 2), o), ConvergenceError);
}

TEST(GlassoFit, SingularCovarianceWithoutPenaltyFails) {
    Matrix s(2, 2);
    s << 1, 1, 1, 1;
    GlassoOptions o;
    o.max_iter = 50;
    EXPECT_THROW(glasso_fit(s, o), ConvergenceError);
}

TEST(GlassoPath, SingleElementEqualsFit) {
    std::mt19937_64 rng(7);
    const Matrix s = sample_cov(30, 5, rng);
    GlassoOptions o;
    o.lambda = 0.1;
    const auto path = glasso_path(s, {0.1}, o);
    ASSERT_EQ(path.size(), 1u);
    EXPECT_EQ(path[0].matrix(), glasso_fit(s, o).matrix());
}

TEST(GlassoPath, StartsEmptyAndValidatesOrder) {
    std::mt19937_64 rng(8);
    const Matrix s = sample_cov(30, 5, rng);
    const double lmax = glasso_lambda_max(s);
    const auto path = glasso_path(s, {lmax, 0.5 * lmax, 0.1 * lmax}, {});
    EXPECT_EQ(off_diagonal_count(path[0].matrix()), 0);
    EXPECT_THROW(glasso_path(s, {0.1, 0.2}, {}), ArgumentError);
}
