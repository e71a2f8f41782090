#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include <boost/random/binomial_distribution.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_01.hpp>
#include <boost/random/uniform_int_distribution.hpp>

#include "cglasso/core.hpp"
#include "cglasso/random.hpp"

namespace cglasso {

enum class NetworkType { chain, random, hub };

inline std::string to_string(NetworkType t) {
    switch (t) {
        case NetworkType::chain: return "chain";
        case NetworkType::random: return "random";
        case NetworkType::hub: return "hub";
    }
    return "unknown";
}

inline NetworkType parse_network_type(const std::string& s) {
    if (s == "chain") return NetworkType::chain;
    if (s == "random") return NetworkType::random;
    if (s == "hub") return NetworkType::hub;
    throw ArgumentError("unknown network type: " + s);
}

struct SimConfig {
    NetworkType network = NetworkType::chain;
    Index K = 200;
    Index n = 100;
    /// Compositional variation: the latent precision is c * Omega.
    double variation = 1.0;
    std::int64_t depth_low = 20 * 200;
    std::int64_t depth_high = 40 * 200;
    Vector mu;  ///< empty means zero
    std::uint64_t seed = 0;

    void validate() const {
        if (K < 2) throw ArgumentError("simulation needs K >= 2");
        if (n < 2) throw ArgumentError("simulation needs n >= 2");
        if (!(variation > 0.0)) throw ArgumentError("variation c must be > 0");
        if (depth_low < 1 || depth_low > depth_high) throw ArgumentError("need 1 <= depth_low <= depth_high");
        if (mu.size() != 0 && mu.size() != K) throw ArgumentError("mu must have length K");
    }
};

/// Depth ranges as multiples of K: dense low/high depth and sparse levels 1-4.
struct DepthPreset {
    const char* name;
    std::int64_t low_per_k;
    std::int64_t high_per_k;
};

inline constexpr DepthPreset kDepthPresets[] = {
    {"dense-low", 20, 40}, {"dense-high", 100, 200}, {"sparse-1", 8, 16},
    {"sparse-2", 4, 8},    {"sparse-3", 2, 4},       {"sparse-4", 1, 2},
};

inline PrecisionMatrix chain_precision(Index K) {
    if (K < 2) throw ArgumentError("chain_precision needs K >= 2");
    Matrix om = Matrix::Zero(K, K);
    for (Index k = 0; k < K; ++k) {
        om(k, k) = 1.5;
        if (k + 1 < K) om(k, k + 1) = om(k + 1, k) = 0.5;
    }
    return PrecisionMatrix(std::move(om));
}

namespace detail {

inline void dominant_diagonal(Matrix& om) {
    for (Index k = 0; k < om.rows(); ++k) om(k, k) = om.row(k).cwiseAbs().sum() + 1.0;
}

}  // namespace detail

/// Off-diagonal pairs set to 1 independently with probability 3/K; the diagonal
/// is the absolute row sum plus one, so the matrix is strictly diagonally dominant.
inline PrecisionMatrix random_precision(Index K, std::uint64_t seed) {
    if (K < 2) throw ArgumentError("random_precision needs K >= 2");
    Rng rng(derive_seed(seed, 0x52414E44));
    boost::random::uniform_01<double> unif;
    const double prob = std::min(1.0, 3.0 / static_cast<double>(K));
    Matrix om = Matrix::Zero(K, K);
    for (Index l = 1; l < K; ++l)
        for (Index k = 0; k < l; ++k)
            if (unif(rng) < prob) om(k, l) = om(l, k) = 1.0;
    detail::dominant_diagonal(om);
    return PrecisionMatrix(std::move(om));
}

/// Nodes split at random into ceil(K/20) groups; each group's hub links to every
/// other member with weight 1.
inline PrecisionMatrix hub_precision(Index K, std::uint64_t seed) {
    if (K < 2) throw ArgumentError("hub_precision needs K >= 2");
    Rng rng(derive_seed(seed, 0x485542));
    std::vector<Index> order(static_cast<std::size_t>(K));
    std::iota(order.begin(), order.end(), Index{0});
    portable_shuffle(order, rng);
    const Index groups = (K + 19) / 20;
    Matrix om = Matrix::Zero(K, K);
    for (Index g = 0; g < groups; ++g) {
        const Index begin = g * K / groups;
        const Index end = (g + 1) * K / groups;
        const Index hub = order[static_cast<std::size_t>(begin)];
        for (Index m = begin + 1; m < end; ++m) {
            const Index other = order[static_cast<std::size_t>(m)];
            om(hub, other) = om(other, hub) = 1.0;
        }
    }
    detail::dominant_diagonal(om);
    return PrecisionMatrix(std::move(om));
}

inline PrecisionMatrix make_precision(NetworkType t, Index K, std::uint64_t seed) {
    switch (t) {
        case NetworkType::chain: return chain_precision(K);
        case NetworkType::random: return random_precision(K, seed);
        case NetworkType::hub: return hub_precision(K, seed);
    }
    throw ArgumentError("unknown network type");
}

struct SimulatedData {
    CountTable counts;
    Matrix z;  ///< true latent log-ratios, n x K
    Matrix p;  ///< true probabilities, n x (K+1), reference last
};

/// Draws from the logistic normal multinomial model:
///   z_i ~ N(mu, (c Omega)^{-1}),  p_i = inverse alr(z_i),
///   M_i ~ Uniform{depth_low..depth_high},  x_i ~ Multinomial(M_i, p_i).
/// Multinomial draws use sequential conditional binomials.
inline SimulatedData generate_dataset(const PrecisionMatrix& omega_true, const SimConfig& cfg) {
    cfg.validate();
    const Index K = omega_true.dim();
    if (K != cfg.K) throw ArgumentError("omega dimension does not match config K");
    const Index n = cfg.n;
    const Vector mu = cfg.mu.size() ? cfg.mu : Vector::Zero(K);

    Eigen::LLT<Matrix> llt(cfg.variation * omega_true.matrix());
    if (llt.info() != Eigen::Success) throw DomainError("scaled precision matrix is not positive definite");
    const auto upper = llt.matrixU();  // c Omega = U'U, so U^{-1} eps ~ N(0, (c Omega)^{-1})

    Rng rng(derive_seed(cfg.seed, 0x53494D));
    boost::random::normal_distribution<double> normal(0.0, 1.0);
    boost::random::uniform_int_distribution<std::int64_t> depth_dist(cfg.depth_low, cfg.depth_high);

    Matrix z(n, K);
    Matrix p(n, K + 1);
    CountMatrix counts(n, K + 1);
    std::vector<std::string> taxa;
    for (Index k = 0; k < K; ++k) taxa.push_back("taxon" + std::to_string(k + 1));
    taxa.push_back("reference");

    Vector eps(K);
    for (Index i = 0; i < n; ++i) {
        for (Index k = 0; k < K; ++k) eps[k] = normal(rng);
        const Vector zi = mu + upper.solve(eps);
        z.row(i) = zi.transpose();
        const Vector pi = inverse_alr(zi).values();
        p.row(i) = pi.transpose();

        const std::int64_t depth = depth_dist(rng);
        std::int64_t remaining = depth;
        double mass_left = 1.0;
        for (Index k = 0; k < K; ++k) {
            std::int64_t draw = 0;
            if (remaining > 0 && mass_left > 0.0) {
                const double q = std::clamp(pi[k] / mass_left, 0.0, 1.0);
                boost::random::binomial_distribution<std::int64_t, double> binom(remaining, q);
                draw = binom(rng);
            }
            counts(i, k) = draw;
            remaining -= draw;
            mass_left -= pi[k];
        }
        counts(i, K) = remaining;
    }
    return {CountTable(counts, std::move(taxa), K), std::move(z), std::move(p)};
}

}  // namespace cglasso
