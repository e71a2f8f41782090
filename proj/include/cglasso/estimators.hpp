#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "cglasso/baselines.hpp"
#include "cglasso/cgl.hpp"
#include "cglasso/glasso.hpp"
#include "cglasso/metrics.hpp"

namespace cglasso {

enum class Method { cgl, glasso, mb };

inline std::string to_string(Method m) {
    switch (m) {
        case Method::cgl: return "cgl";
        case Method::glasso: return "glasso";
        case Method::mb: return "mb";
    }
    return "unknown";
}

inline Method parse_method(const std::string& s) {
    if (s == "cgl") return Method::cgl;
    if (s == "glasso") return Method::glasso;
    if (s == "mb") return Method::mb;
    throw ArgumentError("unknown method: " + s);
}

/// Settings shared by all three estimators; lambda fields inside are overwritten per fit.
struct EstimatorOptions {
    double pseudocount = 0.5;
    CglOptions cgl;
    GlassoOptions glasso;
    MbOptions mb;
};

/// One network on a lambda path. `omega` is empty for neighborhood selection.
struct PathNetwork {
    double lambda = 0.0;
    Adjacency network;
    std::optional<Matrix> omega;
    std::optional<CglFit> cgl_fit;
    std::string error;
};

/// Largest useful lambda for `method`: every larger value gives an empty network
/// (exactly for glasso/mb; for cgl at initialization).
inline double lambda_max(const CountTable& x, Method method, double pseudocount) {
    const auto z = surrogate_logratios(x, pseudocount);
    if (method == Method::mb) return mb_lambda_max(z.values);
    return glasso_lambda_max(centered_covariance(z).second);
}

/// `count` log-spaced values from lambda_max down to lambda_max * min_ratio.
inline std::vector<double> lambda_grid(double lambda_max, int count, double min_ratio) {
    if (count < 1) throw ArgumentError("lambda count must be >= 1");
    if (!(min_ratio > 0.0 && min_ratio <= 1.0)) throw ArgumentError("lambda min ratio must be in (0, 1]");
    if (!(lambda_max > 0.0)) throw ArgumentError("lambda_max must be > 0");
    std::vector<double> out;
    for (int i = 0; i < count; ++i) {
        const double t = count == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(count - 1);
        out.push_back(lambda_max * std::pow(min_ratio, t));
    }
    for (std::size_t i = 1; i < out.size(); ++i)
        if (!(out[i] < out[i - 1])) throw ArgumentError("lambda grid is not strictly decreasing");
    return out;
}

/// Fits `method` along a decreasing lambda path. Glasso and CGL warm-start along
/// the path. CGL failures are recorded per lambda; glasso and mb errors propagate.
inline std::vector<PathNetwork> network_path(const CountTable& x, Method method, const std::vector<double>& lambdas,
                                             const EstimatorOptions& opts) {
    const auto names = x.network_taxa();
    std::vector<PathNetwork> out;
    switch (method) {
        case Method::cgl: {
            CglOptions o = opts.cgl;
            o.pseudocount = opts.pseudocount;
            for (auto& entry : fit_path(x, lambdas, o)) {
                PathNetwork p;
                p.lambda = entry.lambda;
                p.error = entry.error;
                if (entry.fit) {
                    p.network = Adjacency::from_precision(entry.fit->omega.matrix(), names);
                    p.omega = entry.fit->omega.matrix();
                    p.cgl_fit = std::move(entry.fit);
                } else {
                    p.network = Adjacency(x.dim(), names);
                }
                out.push_back(std::move(p));
            }
            break;
        }
        case Method::glasso: {
            const auto z = surrogate_logratios(x, opts.pseudocount);
            const auto fits = glasso_path(centered_covariance(z).second, lambdas, opts.glasso);
            for (std::size_t i = 0; i < fits.size(); ++i) {
                PathNetwork p;
                p.lambda = lambdas[i];
                p.network = Adjacency::from_precision(fits[i].matrix(), names);
                p.omega = fits[i].matrix();
                out.push_back(std::move(p));
            }
            break;
        }
        case Method::mb: {
            const auto z = surrogate_logratios(x, opts.pseudocount);
            for (double lam : lambdas) {
                MbOptions o = opts.mb;
                o.lambda = lam;
                PathNetwork p;
                p.lambda = lam;
                p.network = mb_select(z, o, names);
                out.push_back(std::move(p));
            }
            break;
        }
    }
    return out;
}

}  // namespace cglasso
