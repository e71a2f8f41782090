#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>
#include <vector>

#include "cglasso/core.hpp"

namespace cglasso {

/**
 * Options for the L1-penalized Gaussian likelihood solver.
 *
 * `lambda` is the weight of the entrywise L1 norm in
 *   -1/2 log det(Omega) + 1/2 tr(S Omega) + lambda * |Omega|_1.
 * The solver works on the doubled form -log det + tr(S Omega) + 2 lambda |Omega|_1,
 * which has the same minimizer.
 */
struct GlassoOptions {
    double lambda = 0.0;
    bool penalize_diagonal = true;
    double tol = 1e-6;
    int max_iter = 5000;

    void validate() const {
        if (!(lambda >= 0.0)) throw ArgumentError("glasso lambda must be >= 0");
        if (!(tol > 0.0)) throw ArgumentError("glasso tol must be > 0");
        if (max_iter <= 0) throw ArgumentError("glasso max_iter must be > 0");
    }
};

inline double l1_norm(const Matrix& omega, bool include_diagonal) {
    double total = omega.cwiseAbs().sum();
    if (!include_diagonal) total -= omega.diagonal().cwiseAbs().sum();
    return total;
}

inline double glasso_objective(const PrecisionMatrix& omega, const Matrix& s, const GlassoOptions& opts) {
    if (s.rows() != omega.dim() || s.cols() != omega.dim()) throw ArgumentError("S and Omega dimensions differ");
    const double trace = (s.cwiseProduct(omega.matrix())).sum();
    return -0.5 * omega.log_det() + 0.5 * trace + opts.lambda * l1_norm(omega.matrix(), opts.penalize_diagonal);
}

/**
 * Largest violation of the subgradient optimality conditions at `omega`,
 * in the doubled scaling: with Sigma = Omega^{-1} and rho = 2 lambda,
 *   |Sigma_kl - S_kl| <= rho                     where omega_kl == 0,
 *   Sigma_kl - S_kl  == rho * sign(omega_kl)     elsewhere.
 * Unpenalized diagonal entries use rho = 0.
 */
inline double glasso_subgradient_residual(const Matrix& omega, const Matrix& s, const GlassoOptions& opts) {
    Eigen::LLT<Matrix> llt(omega);
    if (llt.info() != Eigen::Success) return std::numeric_limits<double>::infinity();
    const Matrix sigma = llt.solve(Matrix::Identity(omega.rows(), omega.cols()));
    const double rho = 2.0 * opts.lambda;
    double worst = 0.0;
    for (Index l = 0; l < omega.cols(); ++l) {
        for (Index k = 0; k < omega.rows(); ++k) {
            const double pen = (k == l && !opts.penalize_diagonal) ? 0.0 : rho;
            const double g = sigma(k, l) - s(k, l);
            const double w = omega(k, l);
            const double v = (w == 0.0) ? std::max(0.0, std::abs(g) - pen)
                                        : std::abs(g - pen * (w > 0.0 ? 1.0 : -1.0));
            worst = std::max(worst, v);
        }
    }
    return worst;
}

/// Smallest lambda at which the solution has no off-diagonal entries.
inline double glasso_lambda_max(const Matrix& s) {
    double m = 0.0;
    for (Index l = 0; l < s.cols(); ++l)
        for (Index k = 0; k < l; ++k) m = std::max(m, std::abs(s(k, l)));
    return 0.5 * m;
}

namespace detail {

inline double soft_threshold(double x, double t) {
    if (x > t) return x - t;
    if (x < -t) return x + t;
    return 0.0;
}

/**
 * Coordinate descent for column j:
 *   min_b 1/2 b' W11 b - b' s12 + rho |b|_1
 * where W11 is W with row/column j removed. `beta` has length K with
 * beta[j] ignored; `wb` holds W11 * beta on entry and exit.
 */
inline bool column_lasso(const Matrix& w, const Matrix& s, Index j, double rho, Vector& beta, Vector& wb,
                         double tol, int max_sweeps) {
    const Index K = w.rows();
    std::vector<Index> active;
    auto sweep = [&](bool full) {
        double change = 0.0;
        auto visit = [&](Index k) {
            const double wkk = w(k, k);
            const double r = s(k, j) - (wb[k] - wkk * beta[k]);
            const double next = soft_threshold(r, rho) / wkk;
            const double delta = next - beta[k];
            if (delta != 0.0) {
                for (Index m = 0; m < K; ++m)
                    if (m != j) wb[m] += w(m, k) * delta;
                beta[k] = next;
                change = std::max(change, std::abs(delta) * wkk);
            }
        };
        if (full) {
            for (Index k = 0; k < K; ++k)
                if (k != j) visit(k);
        } else {
            for (Index k : active) visit(k);
        }
        return change;
    };
    // Exact solve on the active set with signs held fixed; kept only if no sign changes.
    auto polish = [&]() {
        const Index a = static_cast<Index>(active.size());
        if (a == 0) return;
        Matrix waa(a, a);
        Vector rhs(a);
        for (Index p = 0; p < a; ++p) {
            for (Index q = 0; q < a; ++q) waa(p, q) = w(active[p], active[q]);
            const double sign = beta[active[p]] > 0.0 ? 1.0 : -1.0;
            rhs[p] = s(active[p], j) - rho * sign;
        }
        Eigen::LLT<Matrix> llt(waa);
        if (llt.info() != Eigen::Success) return;
        const Vector sol = llt.solve(rhs);
        for (Index p = 0; p < a; ++p)
            if (!(sol[p] * beta[active[p]] > 0.0)) return;
        for (Index p = 0; p < a; ++p) {
            const double delta = sol[p] - beta[active[p]];
            for (Index m = 0; m < K; ++m)
                if (m != j) wb[m] += w(m, active[p]) * delta;
            beta[active[p]] = sol[p];
        }
    };
    double coarse_tol = std::max(tol, 1e-4);
    for (int outer = 0; outer < max_sweeps; ++outer) {
        const double full_change = sweep(true);
        if (!std::isfinite(full_change)) return false;
        if (full_change < tol) return true;
        active.clear();
        for (Index k = 0; k < K; ++k)
            if (k != j && beta[k] != 0.0) active.push_back(k);
        for (int inner = 0; inner < max_sweeps; ++inner) {
            const double c = sweep(false);
            if (!std::isfinite(c)) return false;
            if (c < coarse_tol) break;
        }
        polish();
        coarse_tol = std::max(tol, 1e-2 * coarse_tol);
    }
    return false;
}

}  // namespace detail

/**
 * Column-wise block coordinate descent for the penalized Gaussian likelihood.
 *
 * W (the working covariance) is updated one column at a time by solving a
 * lasso in the remaining coordinates; Omega is recovered from W and the
 * column coefficients. Iteration stops when the subgradient residual drops
 * below `tol`, or when a sweep leaves W unchanged to within 1e-3 * tol.
 *
 * `warm_start`, if given, seeds W = warm^{-1} (diagonal reset); a warm start
 * that is not positive definite after the reset falls back to a cold start.
 */
inline PrecisionMatrix glasso_fit(const Matrix& s, const GlassoOptions& opts,
                                  const std::optional<Matrix>& warm_start = std::nullopt) {
    opts.validate();
    const Index K = s.rows();
    if (K == 0 || s.cols() != K) throw ArgumentError("S must be square and non-empty");
    const double scale = std::max(1.0, s.cwiseAbs().maxCoeff());
    if ((s - s.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) throw ArgumentError("S must be symmetric");

    const double rho = 2.0 * opts.lambda;
    const double diag_pen = opts.penalize_diagonal ? rho : 0.0;

    for (Index k = 0; k < K; ++k) {
        if (!(s(k, k) + diag_pen > 0.0)) {
            std::ostringstream msg;
            msg << "glasso: diagonal entry " << k << " of S plus penalty is not positive";
            throw ConvergenceError(msg.str(), Matrix::Zero(K, K), std::numeric_limits<double>::infinity());
        }
    }

    if (K == 1) {
        Matrix om(1, 1);
        om(0, 0) = 1.0 / (s(0, 0) + diag_pen);
        return PrecisionMatrix(std::move(om));
    }

    Matrix w = s;
    w.diagonal().array() += diag_pen;
    Matrix beta = Matrix::Zero(K, K);  // column j: regression of j on the rest

    if (warm_start && warm_start->rows() == K && warm_start->cols() == K) {
        Eigen::LLT<Matrix> llt(*warm_start);
        if (llt.info() == Eigen::Success) {
            Matrix wi = llt.solve(Matrix::Identity(K, K));
            wi.diagonal() = w.diagonal();
            Eigen::LLT<Matrix> check(wi);
            if (check.info() == Eigen::Success) {
                w = 0.5 * (wi + wi.transpose());
                for (Index j = 0; j < K; ++j) {
                    const double d = (*warm_start)(j, j);
                    for (Index k = 0; k < K; ++k)
                        beta(k, j) = (k == j) ? 0.0 : -(*warm_start)(k, j) / d;
                }
            }
        }
    }

    const double inner_tol = 1e-3 * opts.tol * 1e-3;
    const int inner_sweeps = std::max(1000, 10 * opts.max_iter);

    auto recover_omega = [&](Matrix& om) -> bool {
        om.setZero(K, K);
        for (Index j = 0; j < K; ++j) {
            double quad = 0.0;
            for (Index k = 0; k < K; ++k)
                if (k != j) quad += w(k, j) * beta(k, j);
            const double denom = w(j, j) - quad;
            if (!(denom > 0.0) || !std::isfinite(denom)) return false;
            const double ojj = 1.0 / denom;
            om(j, j) = ojj;
            for (Index k = 0; k < K; ++k)
                if (k != j) om(k, j) = -beta(k, j) * ojj;
        }
        for (Index l = 0; l < K; ++l) {
            for (Index k = 0; k < l; ++k) {
                const double a = om(k, l);
                const double b = om(l, k);
                // an entry is zero only if both column solves agree it is zero
                const double v = (a == 0.0 && b == 0.0) ? 0.0 : 0.5 * (a + b);
                om(k, l) = v;
                om(l, k) = v;
            }
        }
        return true;
    };

    Matrix omega(K, K);
    double residual = std::numeric_limits<double>::infinity();
    for (int iter = 0; iter < opts.max_iter; ++iter) {
        double max_change = 0.0;
        for (Index j = 0; j < K; ++j) {
            Vector b = beta.col(j);
            b[j] = 0.0;
            Vector wb = Vector::Zero(K);
            for (Index k = 0; k < K; ++k)
                if (b[k] != 0.0)
                    for (Index m = 0; m < K; ++m)
                        if (m != j) wb[m] += w(m, k) * b[k];
            if (!detail::column_lasso(w, s, j, rho, b, wb, inner_tol, inner_sweeps)) {
                std::ostringstream msg;
                msg << "glasso: inner lasso for column " << j << " did not converge (lambda=" << opts.lambda << ")";
                throw ConvergenceError(msg.str(), w, residual);
            }
            beta.col(j) = b;
            for (Index k = 0; k < K; ++k) {
                if (k == j) continue;
                max_change = std::max(max_change, std::abs(wb[k] - w(k, j)));
                w(k, j) = wb[k];
                w(j, k) = wb[k];
            }
        }
        if (!w.allFinite()) break;
        if (recover_omega(omega)) {
            residual = glasso_subgradient_residual(omega, s, opts);
            if (residual < opts.tol || max_change < 1e-3 * opts.tol) {
                Eigen::LLT<Matrix> llt(omega);
                if (llt.info() == Eigen::Success) return PrecisionMatrix(std::move(omega));
            }
        }
    }
    std::ostringstream msg;
    msg << "glasso: no convergence within " << opts.max_iter << " sweeps (lambda=" << opts.lambda
        << ", residual=" << residual << ")";
    throw ConvergenceError(msg.str(), omega, residual);
}

/// One fit per lambda (strictly decreasing), each warm-started from the previous.
inline std::vector<PrecisionMatrix> glasso_path(const Matrix& s, const std::vector<double>& lambdas,
                                                const GlassoOptions& opts) {
    for (std::size_t i = 0; i < lambdas.size(); ++i) {
        if (!(lambdas[i] >= 0.0)) throw ArgumentError("lambdas must be >= 0");
        if (i > 0 && !(lambdas[i] < lambdas[i - 1])) throw ArgumentError("lambdas must be strictly decreasing");
    }
    std::vector<PrecisionMatrix> out;
    out.reserve(lambdas.size());
    std::optional<Matrix> warm;
    for (double lam : lambdas) {
        GlassoOptions o = opts;
        o.lambda = lam;
        try {
            out.push_back(glasso_fit(s, o, warm));
        } catch (const ConvergenceError& e) {
            std::ostringstream msg;
            msg << "glasso path at lambda=" << lam << ": " << e.what();
            throw ConvergenceError(msg.str(), e.last_iterate(), e.residual());
        }
        warm = out.back().matrix();
    }
    return out;
}

}  // namespace cglasso
