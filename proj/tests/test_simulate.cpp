#include <algorithm>
#include <numbers>

#include <gtest/gtest.h>

#include "cglasso/metrics.hpp"
#include "cglasso/simulate.hpp"

using namespace cglasso;

TEST(ChainPrecision, SmallCase) {
    Matrix expected(3, 3);
    expected << 1.5, 0.5, 0, 0.5, 1.5, 0.5, 0, 0.5, 1.5;
    EXPECT_EQ(chain_precision(3).matrix(), expected);
}

TEST(ChainPrecision, EigenvaluesFollowCosineFormula) {
    const Index K = 30;
    Eigen::SelfAdjointEigenSolver<Matrix> es(chain_precision(K).matrix());
    std::vector<double> expected;
    for (Index j = 1; j <= K; ++j)
        expected.push_back(1.5 + std::cos(static_cast<double>(j) * std::numbers::pi / static_cast<double>(K + 1)));
    std::sort(expected.begin(), expected.end());
    for (Index j = 0; j < K; ++j) {
        EXPECT_NEAR(es.eigenvalues()[j], expected[static_cast<std::size_t>(j)], 1e-12);
        EXPECT_GT(es.eigenvalues()[j], 0.5);
        EXPECT_LT(es.eigenvalues()[j], 2.5);
    }
    EXPECT_EQ(Adjacency::from_precision(chain_precision(K).matrix()).num_edges(), K - 1);
}

TEST(RandomPrecision, EdgeCountMatchesBinomialMean) {
    double total = 0;
    for (std::uint64_t s = 0; s < 50; ++s) {
        const auto om = random_precision(200, s);
        EXPECT_EQ(om.matrix(), om.matrix().transpose());
        total += static_cast<double>(Adjacency::from_precision(om.matrix()).num_edges());
    }
    EXPECT_NEAR(total / 50.0, 298.5, 29.85);
}

TEST(RandomPrecision, PositiveDefiniteAndSeeded) {
    for (std::uint64_t s = 0; s < 100; ++s) EXPECT_NO_THROW(random_precision(30, s));
    EXPECT_EQ(random_precision(30, 5).matrix(), random_precision(30, 5).matrix());
    EXPECT_NE(random_precision(30, 5).matrix(), random_precision(30, 6).matrix());
}

TEST(HubPrecision, GroupStructure) {
    for (std::uint64_t s = 0; s < 100; ++s) {
        const auto om = hub_precision(40, s);
        const auto adj = Adjacency::from_precision(om.matrix());
        std::vector<Index> degrees;
        for (Index k = 0; k < 40; ++k) degrees.push_back(adj.degree(k));
        std::sort(degrees.rbegin(), degrees.rend());
        EXPECT_EQ(degrees[0], 19);  // two groups of 20
        EXPECT_EQ(degrees[1], 19);
        for (std::size_t k = 2; k < degrees.size(); ++k) EXPECT_EQ(degrees[k], 1);
    }
    const auto adj = Adjacency::from_precision(hub_precision(45, 1).matrix());
    EXPECT_EQ(adj.num_edges(), 45 - 3);  // three groups, each a star
}

TEST(GenerateDataset, RowsSumToDepthWithinRange) {
    SimConfig cfg;
    cfg.K = 10;
    cfg.n = 50;
    cfg.depth_low = 200;
    cfg.depth_high = 400;
    cfg.seed = 4;
    const auto d = generate_dataset(chain_precision(10), cfg);
    for (Index i = 0; i < 50; ++i) {
        EXPECT_EQ(d.counts.counts().row(i).sum(), d.counts.depths()[static_cast<std::size_t>(i)]);
        EXPECT_GE(d.counts.depth(i), 200);
        EXPECT_LE(d.counts.depth(i), 400);
        EXPECT_NEAR(d.p.row(i).sum(), 1.0, 1e-12);
    }
    EXPECT_EQ(d.counts.reference_name(), "reference");
    EXPECT_EQ(d.counts.taxa()[0], "taxon1");
}

TEST(GenerateDataset, DeterministicInSeed) {
    SimConfig cfg;
    cfg.K = 6;
    cfg.n = 20;
    cfg.depth_low = 100;
    cfg.depth_high = 200;
    cfg.seed = 9;
    const auto a = generate_dataset(chain_precision(6), cfg);
    const auto b = generate_dataset(chain_precision(6), cfg);
    EXPECT_EQ(a.counts.counts(), b.counts.counts());
    EXPECT_EQ(a.z, b.z);
    cfg.seed = 10;
    EXPECT_NE(generate_dataset(chain_precision(6), cfg).counts.counts(), a.counts.counts());
}

TEST(GenerateDataset, LatentCovarianceMatchesModel) {
    SimConfig cfg;
    cfg.K = 4;
    cfg.n = 20000;
    cfg.variation = 0.2;
    cfg.depth_low = 10;
    cfg.depth_high = 20;
    cfg.seed = 1;
    const auto om = chain_precision(4);
    const auto d = generate_dataset(om, cfg);
    const Matrix s = centered_covariance(d.z).second;
    const Matrix sigma = (0.2 * om.matrix()).inverse();
    EXPECT_LT((s - sigma).norm() / sigma.norm(), 0.05);
}

TEST(DepthPresets, MultiplesOfK) {
    auto find = [](const std::string& name) {
        for (const auto& p : kDepthPresets)
            if (name == p.name) return p;
        throw std::runtime_error("missing preset " + name);
    };
    EXPECT_EQ(find("dense-low").low_per_k, 20);
    EXPECT_EQ(find("dense-low").high_per_k, 40);
    EXPECT_EQ(find("dense-high").low_per_k, 100);
    EXPECT_EQ(find("dense-high").high_per_k, 200);
    EXPECT_EQ(find("sparse-1").low_per_k, 8);
    EXPECT_EQ(find("sparse-2").low_per_k, 4);
    EXPECT_EQ(find("sparse-3").low_per_k, 2);
    EXPECT_EQ(find("sparse-3").high_per_k, 4);
    EXPECT_EQ(find("sparse-4").low_per_k, 1);
    EXPECT_EQ(find("sparse-4").high_per_k, 2);
}

TEST(SimConfig, Validates) {
    SimConfig cfg;
    cfg.variation = 0;
    EXPECT_THROW(cfg.validate(), ArgumentError);
    cfg.variation = 1;
    cfg.depth_low = 10;
    cfg.depth_high = 5;
    EXPECT_THROW(cfg.validate(), ArgumentError);
    EXPECT_THROW(parse_network_type("ring"), ArgumentError);
}
