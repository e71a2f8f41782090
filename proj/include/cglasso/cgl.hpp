#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <boost/random/normal_distribution.hpp>

#include "cglasso/core.hpp"
#include "cglasso/glasso.hpp"
#include "cglasso/map_newton.hpp"
#include "cglasso/parallel.hpp"
#include "cglasso/random.hpp"

namespace cglasso {

struct CglOptions {
    double lambda = 0.0;
    double pseudocount = 0.5;
    /// Stop when |f_t - f_{t-1}| / max(1, |f_{t-1}|) < outer_tol ...
    double outer_tol = 1e-5;
    /// ... and, if set, every per-sample z-gradient at the current (mu, Omega) is below this.
    std::optional<double> stationarity_tol;
    int max_outer_iter = 100;
    NewtonOptions newton;
    GlassoOptions glasso;
    /// Extra runs from randomly perturbed starting log-ratios; the run with the
    /// smallest final objective is kept.
    int restarts = 0;
    double restart_scale = 0.5;
    std::uint64_t seed = 0;
    int threads = 1;

    void validate() const {
        if (!(lambda >= 0.0)) throw ArgumentError("cgl lambda must be >= 0");
        if (!(pseudocount > 0.0)) throw ArgumentError("pseudocount must be > 0");
        if (!(outer_tol > 0.0)) throw ArgumentError("outer_tol must be > 0");
        if (stationarity_tol && !(*stationarity_tol > 0.0)) throw ArgumentError("stationarity_tol must be > 0");
        if (max_outer_iter <= 0) throw ArgumentError("max_outer_iter must be > 0");
        if (restarts < 0) throw ArgumentError("restarts must be >= 0");
        newton.validate();
    }

    GlassoOptions glasso_options() const {
        GlassoOptions g = glasso;
        g.lambda = lambda;
        return g;
    }
};

/// Block values (Z, mu, Omega) of the coordinate descent.
struct CglState {
    Matrix z;
    Vector mu;
    Matrix omega;
};

/// Optimality evidence at a fitted point.
struct StationarityCertificate {
    double max_z_gradient = 0.0;  ///< max over samples of |grad of the per-sample objective|_inf
    double mu_residual = 0.0;     ///< |mu - mean(Z)|_inf
    double omega_residual = 0.0;  ///< glasso subgradient residual of Omega against S(Z)
};

struct CglFit {
    LogRatioMatrix z;
    MeanVector mu;
    PrecisionMatrix omega;
    std::vector<double> objective_trace;  ///< initial value, then one entry per outer iteration
    int iterations = 0;
    bool converged = false;
    double lambda = 0.0;
    StationarityCertificate certificate;

    CglState state() const { return {z.values, mu.mu, omega.matrix()}; }
};

/// Overall objective over all blocks:
///   -1/n sum_i [x_i' z_i - M_i log(sum e^{z_i} + 1)] - 1/2 log det Omega
///   + 1/(2n) sum_i (z_i - mu)' Omega (z_i - mu) + lambda |Omega|_1
inline double overall_objective(const Matrix& z, const Vector& mu, const PrecisionMatrix& omega, const CountTable& x,
                                double lambda, bool penalize_diagonal = true) {
    const Index n = x.num_samples();
    const Index K = x.dim();
    if (z.rows() != n || z.cols() != K || mu.size() != K || omega.dim() != K)
        throw ArgumentError("overall_objective: dimension mismatch");
    const Matrix& c = x.counts_real();
    double multinomial = 0.0;
    double quad = 0.0;
    for (Index i = 0; i < n; ++i) {
        const Vector zi = z.row(i).transpose();
        multinomial += c.row(i).head(K).dot(zi.transpose()) - x.depth(i) * log1p_sum_exp(zi);
        const Vector d = zi - mu;
        quad += d.dot(omega.matrix() * d);
    }
    const double nn = static_cast<double>(n);
    return -multinomial / nn - 0.5 * omega.log_det() + quad / (2.0 * nn) +
           lambda * l1_norm(omega.matrix(), penalize_diagonal);
}

inline double overall_objective(const CglState& s, const CountTable& x, double lambda, bool penalize_diagonal = true) {
    return overall_objective(s.z, s.mu, PrecisionMatrix(s.omega), x, lambda, penalize_diagonal);
}

/// Surrogate log-ratios, their mean, and the penalized fit on their covariance.
inline CglState initialize(const CountTable& x, const CglOptions& opts) {
    opts.validate();
    LogRatioMatrix z0 = surrogate_logratios(x, opts.pseudocount);
    auto [mean, s] = centered_covariance(z0);
    PrecisionMatrix om = glasso_fit(s, opts.glasso_options());
    return {std::move(z0.values), std::move(mean.mu), om.matrix()};
}

inline StationarityCertificate stationarity_certificate(const CglState& s, const CountTable& x,
                                                        const GlassoOptions& glasso) {
    StationarityCertificate cert;
    const Matrix& c = x.counts_real();
    for (Index i = 0; i < x.num_samples(); ++i) {
        const Vector g = z_gradient(s.z.row(i).transpose(), c.row(i).transpose(), x.depth(i), s.mu, s.omega);
        cert.max_z_gradient = std::max(cert.max_z_gradient, g.lpNorm<Eigen::Infinity>());
    }
    auto [mean, cov] = centered_covariance(s.z);
    cert.mu_residual = (s.mu - mean.mu).lpNorm<Eigen::Infinity>();
    cert.omega_residual = glasso_subgradient_residual(s.omega, cov, glasso);
    return cert;
}

namespace detail {

inline double max_z_gradient(const CglState& s, const CountTable& x) {
    const Matrix& c = x.counts_real();
    double worst = 0.0;
    for (Index i = 0; i < x.num_samples(); ++i) {
        const Vector g = z_gradient(s.z.row(i).transpose(), c.row(i).transpose(), x.depth(i), s.mu, s.omega);
        worst = std::max(worst, g.lpNorm<Eigen::Infinity>());
    }
    return worst;
}

inline CglFit run_bcd(const CountTable& x, const CglOptions& opts, CglState state) {
    const Index n = x.num_samples();
    const Matrix& counts = x.counts_real();
    const GlassoOptions gopts = opts.glasso_options();
    const bool pen_diag = gopts.penalize_diagonal;

    std::vector<double> trace;
    double prev = overall_objective(state.z, state.mu, PrecisionMatrix(state.omega), x, opts.lambda, pen_diag);
    trace.push_back(prev);

    bool converged = false;
    int iter = 0;
    std::vector<Vector> next_rows(static_cast<std::size_t>(n));
    for (iter = 1; iter <= opts.max_outer_iter; ++iter) {
        // z-block: independent per-sample MAP problems
        parallel_for(static_cast<std::size_t>(n), opts.threads, [&](std::size_t ii) {
            const Index i = static_cast<Index>(ii);
            try {
                next_rows[ii] = map_estimate(counts.row(i).transpose(), x.depth(i), state.mu, state.omega,
                                             state.z.row(i).transpose(), opts.newton)
                                    .z;
            } catch (const ConvergenceError& e) {
                std::ostringstream msg;
                msg << "cgl outer iteration " << iter << ", sample " << i << ": " << e.what();
                throw ConvergenceError(msg.str(), e.last_iterate(), e.residual());
            }
        });
        for (Index i = 0; i < n; ++i) state.z.row(i) = next_rows[static_cast<std::size_t>(i)].transpose();

        // mu-block: closed form
        auto [mean, s] = centered_covariance(state.z);
        state.mu = mean.mu;

        // Omega-block: penalized Gaussian likelihood on the current covariance
        try {
            state.omega = glasso_fit(s, gopts, state.omega).matrix();
        } catch (const ConvergenceError& e) {
            std::ostringstream msg;
            msg << "cgl outer iteration " << iter << ": " << e.what();
            throw ConvergenceError(msg.str(), e.last_iterate(), e.residual());
        }

        const double f = overall_objective(state.z, state.mu, PrecisionMatrix(state.omega), x, opts.lambda, pen_diag);
        if (f > prev + 1e-6) {
            std::ostringstream msg;
            msg << "cgl: objective increased from " << prev << " to " << f << " at outer iteration " << iter;
            throw Error(msg.str());
        }
        trace.push_back(f);
        const double rel = std::abs(prev - f) / std::max(1.0, std::abs(prev));
        prev = f;
        if (rel < opts.outer_tol && (!opts.stationarity_tol || max_z_gradient(state, x) <= *opts.stationarity_tol)) {
            converged = true;
            break;
        }
    }
    if (iter > opts.max_outer_iter) iter = opts.max_outer_iter;

    CglFit fit{LogRatioMatrix(state.z, LogRatioMatrix::Kind::latent_estimate),
               MeanVector{state.mu},
               PrecisionMatrix(state.omega),
               std::move(trace),
               iter,
               converged,
               opts.lambda,
               {}};
    fit.certificate = stationarity_certificate(state, x, gopts);
    return fit;
}

}  // namespace detail

/**
 * Block coordinate descent over (Z, mu, Omega) for one lambda:
 *   1. per-sample Newton MAP updates of z_i, warm-started at the previous z_i;
 *   2. mu = mean of the rows of Z;
 *   3. Omega = penalized Gaussian fit on the covariance of Z.
 * The objective is recorded after every outer iteration.
 */
inline CglFit fit(const CountTable& x, const CglOptions& opts, const std::optional<CglState>& warm = std::nullopt) {
    opts.validate();
    CglState start = warm ? *warm : initialize(x, opts);
    if (start.z.rows() != x.num_samples() || start.z.cols() != x.dim())
        throw ArgumentError("cgl warm start has wrong dimensions");
    CglFit best = detail::run_bcd(x, opts, start);

    if (opts.restarts > 0) {
        Rng rng(derive_seed(opts.seed, 0xC61));
        boost::random::normal_distribution<double> normal(0.0, opts.restart_scale);
        const CglState base = warm ? *warm : start;
        for (int r = 0; r < opts.restarts; ++r) {
            CglState perturbed = base;
            for (Index j = 0; j < perturbed.z.cols(); ++j)
                for (Index i = 0; i < perturbed.z.rows(); ++i) perturbed.z(i, j) += normal(rng);
            auto [mean, s] = centered_covariance(perturbed.z);
            perturbed.mu = mean.mu;
            perturbed.omega = glasso_fit(s, opts.glasso_options()).matrix();
            CglFit candidate = detail::run_bcd(x, opts, std::move(perturbed));
            if (candidate.objective_trace.back() < best.objective_trace.back()) best = std::move(candidate);
        }
    }
    return best;
}

struct CglPathEntry {
    double lambda = 0.0;
    std::optional<CglFit> fit;
    std::string error;  ///< non-empty when this lambda failed
};

/// Fits along a strictly decreasing lambda sequence, warm-starting each fit from
/// the last successful one. A failure at one lambda is recorded and the path continues.
inline std::vector<CglPathEntry> fit_path(const CountTable& x, const std::vector<double>& lambdas,
                                          const CglOptions& opts) {
    for (std::size_t i = 0; i < lambdas.size(); ++i) {
        if (!(lambdas[i] >= 0.0)) throw ArgumentError("lambdas must be >= 0");
        if (i > 0 && !(lambdas[i] < lambdas[i - 1])) throw ArgumentError("lambdas must be strictly decreasing");
    }
    std::vector<CglPathEntry> out;
    std::optional<CglState> warm;
    for (double lam : lambdas) {
        CglOptions o = opts;
        o.lambda = lam;
        CglPathEntry entry;
        entry.lambda = lam;
        try {
            entry.fit = fit(x, o, warm);
            warm = entry.fit->state();
        } catch (const Error& e) {
            std::ostringstream msg;
            msg << "lambda=" << lam << ": " << e.what();
            entry.error = msg.str();
        }
        out.push_back(std::move(entry));
    }
    return out;
}

}  // namespace cglasso
