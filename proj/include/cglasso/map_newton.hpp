#pragma once

#include <cmath>
#include <limits>
#include <sstream>

#include "cglasso/core.hpp"

namespace cglasso {

struct NewtonOptions {
    double grad_tol = 1e-8;
    int max_iter = 100;
    double armijo_c = 1e-4;
    double backtrack_factor = 0.5;
    int max_backtracks = 50;

    void validate() const {
        if (!(grad_tol > 0.0)) throw ArgumentError("newton grad_tol must be > 0");
        if (max_iter <= 0) throw ArgumentError("newton max_iter must be > 0");
        if (!(armijo_c > 0.0 && armijo_c < 1.0)) throw ArgumentError("armijo_c must be in (0,1)");
        if (!(backtrack_factor > 0.0 && backtrack_factor < 1.0))
            throw ArgumentError("backtrack_factor must be in (0,1)");
        if (max_backtracks < 0) throw ArgumentError("max_backtracks must be >= 0");
    }
};

// Per-sample negative log posterior of the latent log-ratios z given one count
// row x (K+1 parts, reference last) with depth M:
//   1/2 (z-mu)' Omega (z-mu) - [ x_{1:K}' z - M log(sum e^z + 1) ].

inline double z_objective(const Eigen::Ref<const Vector>& z, const Eigen::Ref<const Vector>& x, double depth,
                          const Eigen::Ref<const Vector>& mu, const Eigen::Ref<const Matrix>& omega) {
    const Index K = z.size();
    const Vector d = z - mu;
    return 0.5 * d.dot(omega * d) - (x.head(K).dot(z) - depth * log1p_sum_exp(z));
}

inline Vector z_gradient(const Eigen::Ref<const Vector>& z, const Eigen::Ref<const Vector>& x, double depth,
                         const Eigen::Ref<const Vector>& mu, const Eigen::Ref<const Matrix>& omega) {
    const Index K = z.size();
    return omega * (z - mu) - x.head(K) + depth * softmax_numerators(z);
}

inline Matrix z_hessian(const Eigen::Ref<const Vector>& z, const Eigen::Ref<const Vector>& /*x*/, double depth,
                        const Eigen::Ref<const Vector>& /*mu*/, const Eigen::Ref<const Matrix>& omega) {
    // M/(s+1)^2 [ (s+1) diag(e^z) - e^z e^z' ] == M [ diag(p) - p p' ]
    const Vector p = softmax_numerators(z);
    const Matrix pp = p * p.transpose();
    Matrix h = omega - depth * pp;
    h.diagonal() += depth * p;
    return h;
}

struct MapResult {
    Vector z;
    int iterations = 0;
    double grad_norm = 0.0;
    double objective = 0.0;
};

/**
 * Newton-Raphson with Armijo backtracking for one sample.
 *
 * The sufficient-decrease test allows a few ulps of slack in the objective:
 * close to the optimum the predicted decrease falls below the rounding error of
 * the objective itself, and without slack the line search would stall while
 * the gradient is still above `grad_tol`.
 */
inline MapResult map_estimate(const Eigen::Ref<const Vector>& x, double depth, const Eigen::Ref<const Vector>& mu,
                              const Eigen::Ref<const Matrix>& omega, const Eigen::Ref<const Vector>& init_z,
                              const NewtonOptions& opts = {}) {
    opts.validate();
    if (!init_z.allFinite()) throw DomainError("map_estimate: initial z is not finite");
    const Index K = mu.size();
    if (init_z.size() != K || omega.rows() != K || omega.cols() != K || x.size() != K + 1)
        throw ArgumentError("map_estimate: dimension mismatch");

    MapResult r;
    r.z = init_z;
    r.objective = z_objective(r.z, x, depth, mu, omega);
    Vector g = z_gradient(r.z, x, depth, mu, omega);
    r.grad_norm = g.lpNorm<Eigen::Infinity>();

    for (int it = 0; it < opts.max_iter; ++it) {
        if (r.grad_norm <= opts.grad_tol) return r;

        const Matrix h = z_hessian(r.z, x, depth, mu, omega);
        Eigen::LLT<Matrix> llt(h);
        Vector dir;
        if (llt.info() == Eigen::Success) dir = -llt.solve(g);
        if (llt.info() != Eigen::Success || !dir.allFinite() || g.dot(dir) >= 0.0) dir = -g;

        const double slope = g.dot(dir);
        const double slack = 64.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(r.objective));
        double step = 1.0;
        Vector trial;
        double f_trial = 0.0;
        bool accepted = false;
        for (int bt = 0; bt <= opts.max_backtracks; ++bt) {
            trial = r.z + step * dir;
            f_trial = z_objective(trial, x, depth, mu, omega);
            if (std::isfinite(f_trial) && f_trial <= r.objective + opts.armijo_c * step * slope + slack) {
                accepted = true;
                break;
            }
            step *= opts.backtrack_factor;
        }
        if (!accepted) {
            std::ostringstream msg;
            msg << "map_estimate: line search failed after " << opts.max_backtracks
                << " backtracks (gradient norm " << r.grad_norm << ")";
            throw ConvergenceError(msg.str(), r.z, r.grad_norm);
        }
        r.z = std::move(trial);
        r.objective = f_trial;
        g = z_gradient(r.z, x, depth, mu, omega);
        r.grad_norm = g.lpNorm<Eigen::Infinity>();
        r.iterations = it + 1;
    }
    if (r.grad_norm <= opts.grad_tol) return r;
    std::ostringstream msg;
    msg << "map_estimate: no convergence within " << opts.max_iter << " iterations (gradient norm " << r.grad_norm
        << ")";
    throw ConvergenceError(msg.str(), r.z, r.grad_norm);
}

}  // namespace cglasso
