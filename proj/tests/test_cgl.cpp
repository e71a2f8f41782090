#include <gtest/gtest.h>

#include "cglasso/cgl.hpp"
#include "cglasso/simulate.hpp"

using namespace cglasso;

namespace {

CountTable simulated(Index K, Index n, std::uint64_t seed, NetworkType type = NetworkType::chain) {
    SimConfig cfg;
    cfg.network = type;
    cfg.K = K;
    cfg.n = n;
    cfg.depth_low = 20 * K;
    cfg.depth_high = 40 * K;
    cfg.seed = seed;
    return generate_dataset(make_precision(type, K, seed), cfg).counts;
}

CountTable single_37() {
    CountMatrix c(2, 2);
    c << 3, 7, 3, 7;
    return CountTable(c, {"a", "ref"}, 1);
}

}  // namespace

TEST(OverallObjective, SingleSampleReduction) {
    // two identical samples average to the single-sample value
    const auto x = single_37();
    const double f = overall_objective(Matrix::Zero(2, 1), Vector::Zero(1), PrecisionMatrix(Matrix::Identity(1, 1)), x,
                                       0.0);
    EXPECT_NEAR(f, 10 * std::log(2.0), 1e-12);
}

TEST(OverallObjective, DecomposesIntoPerSampleAndGlassoTerms) {
    const auto x = simulated(5, 20, 3);
    CglOptions o;
    o.lambda = 0.07;
    const auto st = initialize(x, o);
    Matrix z = st.z;
    z.array() += 0.1;
    auto [mean, s] = centered_covariance(z);
    const PrecisionMatrix om(st.omega);
    double per_sample = 0.0;
    for (Index i = 0; i < x.num_samples(); ++i)
        per_sample += z_objective(z.row(i).transpose(), x.counts_real().row(i).transpose(), x.depth(i), mean.mu,
                                  om.matrix());
    per_sample /= static_cast<double>(x.num_samples());
    const double trace = (s.cwiseProduct(om.matrix())).sum();
    const double expected = per_sample - 0.5 * trace + glasso_objective(om, s, o.glasso_options());
    EXPECT_NEAR(overall_objective(z, mean.mu, om, x, o.lambda), expected, 1e-10);
}

TEST(OverallObjective, LinearInLambda) {
    const auto x = simulated(4, 10, 5);
    CglOptions o;
    o.lambda = 0.1;
    const auto st = initialize(x, o);
    const double w = l1_norm(st.omega, true);
    const double a = overall_objective(st, x, 0.1);
    const double b = overall_objective(st, x, 0.35);
    EXPECT_NEAR(b - a, 0.25 * w, 1e-10);
}

TEST(Initialize, IdenticalRowsGiveDiagonalClosedForm) {
    CountMatrix c(3, 3);
    c << 2, 4, 8, 2, 4, 8, 2, 4, 8;
    const CountTable x(c, {"a", "b", "ref"}, 2);
    CglOptions o;
    o.lambda = 0.2;
    const auto st = initialize(x, o);
    EXPECT_NEAR(st.omega(0, 0), 1.0 / 0.4, 1e-8);
    EXPECT_NEAR(st.omega(1, 1), 1.0 / 0.4, 1e-8);
    EXPECT_EQ(st.omega(0, 1), 0.0);
}

TEST(Initialize, SurrogatesAndMeans) {
    const auto x = simulated(6, 25, 7);
    CglOptions o;
    o.lambda = 0.1;
    const auto st = initialize(x, o);
    EXPECT_EQ(st.z, surrogate_logratios(x, o.pseudocount).values);
    for (Index k = 0; k < 6; ++k) EXPECT_NEAR(st.mu[k], st.z.col(k).mean(), 1e-12);
}

TEST(Fit, LargeLambdaKeepsNetworkEmpty) {
    const auto x = simulated(6, 30, 8);
    CglOptions o;
    const auto z0 = surrogate_logratios(x, o.pseudocount);
    o.lambda = static_cast<double>(x.dim()) * centered_covariance(z0).second.cwiseAbs().maxCoeff();
    const auto f = fit(x, o);
    for (Index l = 0; l < 6; ++l)
        for (Index k = 0; k < 6; ++k)
            if (k != l) {
                EXPECT_EQ(f.omega(k, l), 0.0);
            }
}

TEST(Fit, MonotoneAndConvergedOnChain) {
    const auto x = simulated(5, 30, 11);
    CglOptions o;
    o.lambda = 0.05;
    const auto f = fit(x, o);
    EXPECT_TRUE(f.converged);
    EXPECT_LE(f.iterations, 100);
    EXPECT_EQ(f.objective_trace.size(), static_cast<std::size_t>(f.iterations) + 1);
    for (std::size_t t = 1; t < f.objective_trace.size(); ++t)
        EXPECT_LE(f.objective_trace[t], f.objective_trace[t - 1] + 1e-6);
    EXPECT_LE(f.certificate.mu_residual, 1e-12);
    EXPECT_LE(f.certificate.omega_residual, 1e-6);
}

TEST(Fit, StationarityToleranceIsHonored) {
    const auto x = simulated(5, 30, 12);
    CglOptions o;
    o.lambda = 0.05;
    o.outer_tol = 1e-12;
    o.stationarity_tol = 1e-5;
    o.max_outer_iter = 2000;
    const auto f = fit(x, o);
    ASSERT_TRUE(f.converged);
    EXPECT_LE(f.certificate.max_z_gradient, 1e-5);
    EXPECT_EQ(f.certificate.max_z_gradient, detail::max_z_gradient(f.state(), x));
}

TEST(Fit, Deterministic) {
    const auto x = simulated(6, 30, 13);
    CglOptions o;
    o.lambda = 0.04;
    const auto a = fit(x, o);
    o.threads = 3;
    const auto b = fit(x, o);
    EXPECT_EQ(a.omega.matrix(), b.omega.matrix());
    EXPECT_EQ(a.z.values, b.z.values);
    EXPECT_EQ(a.objective_trace, b.objective_trace);
}

TEST(Fit, RestartsNeverWorsenObjective) {
    const auto x = simulated(5, 30, 14);
    CglOptions o;
    o.lambda = 0.05;
    const auto base = fit(x, o);
    o.restarts = 2;
    o.seed = 9;
    const auto multi = fit(x, o);
    EXPECT_LE(multi.objective_trace.back(), base.objective_trace.back());
}

TEST(Fit, RejectsInvalidOptions) {
    const auto x = simulated(4, 10, 15);
    CglOptions o;
    o.lambda = -1;
    EXPECT_THROW(fit(x, o), ArgumentError);
    o.lambda = 0.1;
    o.pseudocount = 0;
    EXPECT_THROW(fit(x, o), ArgumentError);
}

TEST(FitPath, SingleElementEqualsFit) {
    const auto x = simulated(5, 30, 16);
    CglOptions o;
    o.lambda = 0.06;
    const auto path = fit_path(x, {0.06}, o);
    ASSERT_EQ(path.size(), 1u);
    ASSERT_TRUE(path[0].fit);
    EXPECT_EQ(path[0].fit->omega.matrix(), fit(x, o).omega.matrix());
}

TEST(FitPath, WarmStartMatchesColdStartSupport) {
    const auto x = simulated(6, 40, 17);
    CglOptions o;
    const std::vector<double> lambdas{0.2, 0.1, 0.05};
    const auto path = fit_path(x, lambdas, o);
    for (std::size_t i = 0; i < lambdas.size(); ++i) {
        ASSERT_TRUE(path[i].fit) << path[i].error;
        o.lambda = lambdas[i];
        const auto cold = fit(x, o);
        const Matrix& a = path[i].fit->omega.matrix();
        const Matrix& b = cold.omega.matrix();
        for (Index l = 0; l < 6; ++l)
            for (Index k = 0; k < l; ++k)
                if (std::abs(a(k, l)) > 1e-3 || std::abs(b(k, l)) > 1e-3) {
                    EXPECT_EQ(a(k, l) != 0.0, b(k, l) != 0.0) << "lambda " << lambdas[i] << " pair " << k << "," << l;
                }
    }
    EXPECT_THROW(fit_path(x, {0.1, 0.1}, o), ArgumentError);
}
