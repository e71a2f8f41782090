#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <sstream>
#include <vector>

#include "cglasso/estimators.hpp"
#include "cglasso/metrics.hpp"
#include "cglasso/parallel.hpp"
#include "cglasso/random.hpp"

namespace cglasso {

struct StarsOptions {
    double beta = 0.05;
    /// Defaults to floor(7 sqrt(n)); when that exceeds n, floor(0.8 n) is used.
    std::optional<Index> subsample_size;
    int num_subsamples = 50;
    std::uint64_t seed = 0;
    bool monotonize = true;
    int threads = 1;

    Index resolved_subsample_size(Index n) const {
        if (subsample_size) return *subsample_size;
        const auto b = static_cast<Index>(std::floor(7.0 * std::sqrt(static_cast<double>(n))));
        return b <= n ? b : std::max<Index>(1, static_cast<Index>(std::floor(0.8 * static_cast<double>(n))));
    }

    void validate(Index n) const {
        if (!(beta > 0.0 && beta < 1.0)) throw ArgumentError("stars beta must be in (0, 1)");
        if (num_subsamples < 2) throw ArgumentError("stars needs at least 2 subsamples");
        const Index b = resolved_subsample_size(n);
        if (b < 1) throw ArgumentError("subsample size must be >= 1");
        if (b > n) throw ArgumentError("subsample size exceeds the number of samples");
    }
};

/// N reproducible subsets of b distinct sample indices (sorted), drawn without replacement.
inline std::vector<std::vector<Index>> subsample_indices(Index n, const StarsOptions& opts) {
    opts.validate(n);
    const Index b = opts.resolved_subsample_size(n);
    Rng rng(derive_seed(opts.seed, 0x5354415253));
    std::vector<std::vector<Index>> out;
    std::vector<Index> pool(static_cast<std::size_t>(n));
    for (int s = 0; s < opts.num_subsamples; ++s) {
        std::iota(pool.begin(), pool.end(), Index{0});
        // partial Fisher-Yates: the first b slots form the subsample
        for (Index i = 0; i < b; ++i) {
            boost::random::uniform_int_distribution<Index> pick(i, n - 1);
            std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(pick(rng))]);
        }
        std::vector<Index> subset(pool.begin(), pool.begin() + b);
        std::sort(subset.begin(), subset.end());
        out.push_back(std::move(subset));
    }
    return out;
}

/// Fraction of networks containing each edge.
inline Matrix edge_frequencies(const std::vector<Adjacency>& fits) {
    if (fits.empty()) throw ArgumentError("edge_frequencies needs at least one network");
    const Index K = fits.front().dim();
    Matrix theta = Matrix::Zero(K, K);
    for (const auto& a : fits) {
        if (a.dim() != K) throw ArgumentError("edge_frequencies: networks differ in dimension");
        theta += a.matrix().cast<double>();
    }
    return theta / static_cast<double>(fits.size());
}

/// Mean over unordered pairs of 2 theta (1 - theta).
inline double instability(const Matrix& theta) {
    const Index K = theta.rows();
    if (K < 2) return 0.0;
    double total = 0.0;
    for (Index l = 0; l < K; ++l)
        for (Index k = 0; k < l; ++k) total += 2.0 * theta(k, l) * (1.0 - theta(k, l));
    return total / (static_cast<double>(K) * static_cast<double>(K - 1) / 2.0);
}

struct StarsResult {
    std::vector<double> lambdas;
    std::vector<Matrix> frequencies;
    std::vector<double> instability;
    std::vector<double> instability_monotone;  ///< running max from the sparse end
    bool stable = false;                        ///< false: no lambda met the threshold
    std::size_t selected_index = 0;
    double selected_lambda = 0.0;
    Adjacency selected_network;
    std::optional<Matrix> selected_omega;
};

/**
 * Stability selection of lambda.
 *
 * Each subsample is fit along the whole (descending) path; edge frequencies and
 * instabilities are computed per lambda; the smallest lambda whose instability
 * (monotonized if requested) is <= beta is selected and the estimator is refit
 * on the full data at that lambda.
 */
inline StarsResult stars_select(const CountTable& x, Method method, const std::vector<double>& lambdas,
                                const StarsOptions& opts, const EstimatorOptions& est = {}) {
    const Index n = x.num_samples();
    opts.validate(n);
    if (lambdas.empty()) throw ArgumentError("stars needs at least one lambda");
    for (std::size_t i = 1; i < lambdas.size(); ++i)
        if (!(lambdas[i] < lambdas[i - 1])) throw ArgumentError("lambdas must be strictly decreasing");

    const auto subsets = subsample_indices(n, opts);
    std::vector<std::vector<Adjacency>> networks(subsets.size());
    parallel_for(subsets.size(), opts.threads, [&](std::size_t s) {
        const CountTable sub = x.select_rows(subsets[s]);
        auto path = network_path(sub, method, lambdas, est);
        for (auto& p : path) {
            if (!p.error.empty()) {
                std::ostringstream msg;
                msg << "stars subsample " << s << ", " << p.error;
                throw Error(msg.str());
            }
            networks[s].push_back(std::move(p.network));
        }
    });

    StarsResult r;
    r.lambdas = lambdas;
    double running = 0.0;
    for (std::size_t l = 0; l < lambdas.size(); ++l) {
        std::vector<Adjacency> at_lambda;
        for (const auto& per_subsample : networks) at_lambda.push_back(per_subsample[l]);
        r.frequencies.push_back(edge_frequencies(at_lambda));
        const double d = instability(r.frequencies.back());
        r.instability.push_back(d);
        running = std::max(running, d);
        r.instability_monotone.push_back(running);
    }
    const auto& curve = opts.monotonize ? r.instability_monotone : r.instability;
    for (std::size_t l = 0; l < lambdas.size(); ++l) {
        if (curve[l] <= opts.beta) {
            r.stable = true;
            r.selected_index = l;
        }
    }
    if (!r.stable) {
        r.selected_network = Adjacency(x.dim(), x.network_taxa());
        return r;
    }
    r.selected_lambda = lambdas[r.selected_index];
    auto refit = network_path(x, method, {r.selected_lambda}, est);
    if (!refit.front().error.empty()) throw Error("stars full-data refit, " + refit.front().error);
    r.selected_network = std::move(refit.front().network);
    r.selected_omega = std::move(refit.front().omega);
    return r;
}

}  // namespace cglasso
