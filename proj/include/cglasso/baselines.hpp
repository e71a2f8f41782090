#pragma once

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "cglasso/core.hpp"
#include "cglasso/glasso.hpp"
#include "cglasso/metrics.hpp"
#include "cglasso/parallel.hpp"

namespace cglasso {

/// gLASSO baseline: penalized Gaussian fit on the covariance of count surrogates.
inline PrecisionMatrix glasso_on_surrogates(const CountTable& x, double lambda, double pseudocount,
                                            GlassoOptions opts = {}) {
    opts.lambda = lambda;
    const auto z = surrogate_logratios(x, pseudocount);
    return glasso_fit(centered_covariance(z).second, opts);
}

struct LassoOptions {
    double tol = 1e-7;
    int max_iter = 1000;
};

/// Largest |d_j' y| / n: the smallest lambda with an all-zero lasso solution.
inline double lasso_lambda_max(const Eigen::Ref<const Vector>& y, const Eigen::Ref<const Matrix>& d) {
    if (d.cols() == 0) return 0.0;
    return (d.transpose() * y).cwiseAbs().maxCoeff() / static_cast<double>(y.size());
}

/// max over coordinates of the KKT violation of (1/2n)|y - D b|^2 + lambda |b|_1.
inline double lasso_kkt_residual(const Eigen::Ref<const Vector>& y, const Eigen::Ref<const Matrix>& d,
                                 const Eigen::Ref<const Vector>& beta, double lambda) {
    const double n = static_cast<double>(y.size());
    const Vector g = d.transpose() * (y - d * beta) / n;
    double worst = 0.0;
    for (Index j = 0; j < beta.size(); ++j) {
        const double v = beta[j] == 0.0 ? std::max(0.0, std::abs(g[j]) - lambda)
                                        : std::abs(g[j] - lambda * (beta[j] > 0.0 ? 1.0 : -1.0));
        worst = std::max(worst, v);
    }
    return worst;
}

/**
 * Cyclic coordinate descent for min_b (1/2n)|y - D b|^2 + lambda |b|_1.
 * Columns of D and y are expected to be centered. Sweeps alternate between all
 * coordinates and the current active set until the KKT residual is below tol.
 */
inline Vector lasso_regression(const Eigen::Ref<const Vector>& y, const Eigen::Ref<const Matrix>& d, double lambda,
                               const LassoOptions& opts = {}) {
    if (d.rows() != y.size()) throw ArgumentError("lasso_regression: dimension mismatch");
    if (!(lambda >= 0.0)) throw ArgumentError("lasso lambda must be >= 0");
    const Index p = d.cols();
    const double n = static_cast<double>(y.size());
    Vector beta = Vector::Zero(p);
    if (p == 0 || lambda >= lasso_lambda_max(y, d)) return beta;
    const Vector col_sq = d.colwise().squaredNorm().transpose() / n;
    Vector resid = y;

    auto update = [&](Index j) {
        if (col_sq[j] <= 0.0) return 0.0;
        const double rho = d.col(j).dot(resid) / n + col_sq[j] * beta[j];
        const double next = detail::soft_threshold(rho, lambda) / col_sq[j];
        const double delta = next - beta[j];
        if (delta != 0.0) {
            resid -= delta * d.col(j);
            beta[j] = next;
        }
        return std::abs(delta) * std::sqrt(col_sq[j]);
    };

    std::vector<Index> active;
    for (int it = 0; it < opts.max_iter; ++it) {
        double change = 0.0;
        for (Index j = 0; j < p; ++j) change = std::max(change, update(j));
        if (change < 0.1 * opts.tol && lasso_kkt_residual(y, d, beta, lambda) <= opts.tol) return beta;
        active.clear();
        for (Index j = 0; j < p; ++j)
            if (beta[j] != 0.0) active.push_back(j);
        for (int inner = 0; inner < opts.max_iter; ++inner) {
            double c = 0.0;
            for (Index j : active) c = std::max(c, update(j));
            if (c < 0.1 * opts.tol) break;
        }
    }
    const double kkt = lasso_kkt_residual(y, d, beta, lambda);
    if (kkt <= opts.tol) return beta;
    std::ostringstream msg;
    msg << "lasso_regression: no convergence within " << opts.max_iter << " sweeps (KKT residual " << kkt << ")";
    throw ConvergenceError(msg.str(), beta, kkt);
}

enum class MbRule { and_rule, or_rule };

struct MbOptions {
    double lambda = 0.0;
    MbRule rule = MbRule::or_rule;
    double lasso_tol = 1e-7;
    int max_iter = 1000;
    int threads = 1;
};

/// Columns centered and scaled to unit (divisor-n) variance; constant columns become zero.
inline Matrix standardize_columns(const Matrix& z) {
    Matrix out = z.rowwise() - z.colwise().mean();
    const double n = static_cast<double>(z.rows());
    for (Index j = 0; j < out.cols(); ++j) {
        const double sd = std::sqrt(out.col(j).squaredNorm() / n);
        if (sd > 0.0) out.col(j) /= sd;
        else out.col(j).setZero();
    }
    return out;
}

/// Largest lambda at which some node regression has a nonzero coefficient.
inline double mb_lambda_max(const Matrix& z) {
    const Matrix zs = standardize_columns(z);
    const Matrix gram = zs.transpose() * zs / static_cast<double>(zs.rows());
    double m = 0.0;
    for (Index l = 0; l < gram.cols(); ++l)
        for (Index k = 0; k < gram.rows(); ++k)
            if (k != l) m = std::max(m, std::abs(gram(k, l)));
    return m;
}

/// Neighborhood selection: lasso of each standardized column on all others,
/// supports combined with AND or OR.
inline Adjacency mb_select(const LogRatioMatrix& z, const MbOptions& opts, std::vector<std::string> names = {}) {
    const Index n = z.values.rows();
    const Index K = z.values.cols();
    if (n < 2) throw ArgumentError("mb_select needs at least 2 samples");
    const Matrix zs = standardize_columns(z.values);
    Matrix coef = Matrix::Zero(K, K);  // column k: coefficients of node k's regression
    const LassoOptions lopts{opts.lasso_tol, opts.max_iter};

    parallel_for(static_cast<std::size_t>(K), opts.threads, [&](std::size_t kk) {
        const Index k = static_cast<Index>(kk);
        Matrix others(n, K - 1);
        Index c = 0;
        for (Index j = 0; j < K; ++j)
            if (j != k) others.col(c++) = zs.col(j);
        Vector b;
        try {
            b = lasso_regression(zs.col(k), others, opts.lambda, lopts);
        } catch (const ConvergenceError& e) {
            std::ostringstream msg;
            msg << "mb_select node " << k << ": " << e.what();
            throw ConvergenceError(msg.str(), e.last_iterate(), e.residual());
        }
        c = 0;
        for (Index j = 0; j < K; ++j)
            if (j != k) coef(j, k) = b[c++];
    });

    Adjacency adj(K, std::move(names));
    for (Index l = 0; l < K; ++l) {
        for (Index k = 0; k < l; ++k) {
            const bool a = coef(k, l) != 0.0;
            const bool b = coef(l, k) != 0.0;
            if (opts.rule == MbRule::and_rule ? (a && b) : (a || b)) adj.set(k, l, true);
        }
    }
    return adj;
}

}  // namespace cglasso
