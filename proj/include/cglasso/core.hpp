#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "cglasso/errors.hpp"

namespace cglasso {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;
using CountMatrix = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>;

/**
 * Compositional count table: n samples by K+1 taxa.
 *
 * The constructor takes counts in the caller's column order together with the
 * index of the reference taxon. Internally the reference column is moved to
 * the end so that columns 0..K-1 are the network nodes (in their original
 * relative order) and column K is the log-ratio denominator.
 */
class CountTable {
public:
    CountTable(const CountMatrix& counts, std::vector<std::string> taxa, Index reference_index,
               std::vector<std::string> sample_ids = {})
        : reference_index_(reference_index) {
        const Index n = counts.rows();
        const Index parts = counts.cols();
        if (n < 2) throw ArgumentError("count table needs at least 2 samples");
        if (parts < 2) throw ArgumentError("count table needs at least 2 taxa (K >= 1)");
        if (static_cast<Index>(taxa.size()) != parts)
            throw ArgumentError("taxon name count does not match column count");
        if (reference_index < 0 || reference_index >= parts)
            throw ArgumentError("reference index out of range");
        std::unordered_set<std::string> seen;
        for (const auto& t : taxa)
            if (!seen.insert(t).second) throw ArgumentError("duplicate taxon name: " + t);
        if (sample_ids.empty()) {
            for (Index i = 0; i < n; ++i) sample_ids.push_back("s" + std::to_string(i + 1));
        }
        if (static_cast<Index>(sample_ids.size()) != n)
            throw ArgumentError("sample id count does not match row count");

        counts_.resize(n, parts);
        taxa_.reserve(parts);
        Index col = 0;
        for (Index k = 0; k < parts; ++k) {
            if (k == reference_index) continue;
            counts_.col(col++) = counts.col(k);
            taxa_.push_back(taxa[k]);
        }
        counts_.col(col) = counts.col(reference_index);
        taxa_.push_back(taxa[reference_index]);

        depths_.resize(n);
        for (Index i = 0; i < n; ++i) {
            std::int64_t total = 0;
            for (Index k = 0; k < parts; ++k) {
                if (counts_(i, k) < 0) throw ArgumentError("negative count in sample " + sample_ids[i]);
                total += counts_(i, k);
            }
            if (total <= 0) throw ArgumentError("sample " + sample_ids[i] + " has zero depth");
            depths_[i] = total;
        }
        real_ = counts_.cast<double>();
        sample_ids_ = std::move(sample_ids);
    }

    Index num_samples() const noexcept { return counts_.rows(); }
    /// Number of non-reference taxa (K).
    Index dim() const noexcept { return counts_.cols() - 1; }
    Index num_parts() const noexcept { return counts_.cols(); }

    /// Counts with the reference taxon in the last column.
    const CountMatrix& counts() const noexcept { return counts_; }
    const Matrix& counts_real() const noexcept { return real_; }
    const std::vector<std::int64_t>& depths() const noexcept { return depths_; }
    double depth(Index i) const { return static_cast<double>(depths_[static_cast<std::size_t>(i)]); }

    /// Taxon names with the reference last.
    const std::vector<std::string>& taxa() const noexcept { return taxa_; }
    std::vector<std::string> network_taxa() const { return {taxa_.begin(), taxa_.end() - 1}; }
    const std::string& reference_name() const noexcept { return taxa_.back(); }
    Index reference_index() const noexcept { return reference_index_; }
    const std::vector<std::string>& sample_ids() const noexcept { return sample_ids_; }

    /// Counts and names restored to the caller's original column order.
    CountMatrix original_counts() const {
        CountMatrix out(counts_.rows(), counts_.cols());
        Index src = 0;
        for (Index k = 0; k < counts_.cols(); ++k)
            out.col(k) = (k == reference_index_) ? counts_.col(dim()) : counts_.col(src++);
        return out;
    }
    std::vector<std::string> original_taxa() const {
        std::vector<std::string> out;
        Index src = 0;
        for (Index k = 0; k < counts_.cols(); ++k)
            out.push_back(k == reference_index_ ? taxa_.back() : taxa_[static_cast<std::size_t>(src++)]);
        return out;
    }

    CountTable select_rows(std::span<const Index> rows) const {
        CountMatrix sub(static_cast<Index>(rows.size()), counts_.cols());
        std::vector<std::string> ids;
        for (std::size_t r = 0; r < rows.size(); ++r) {
            sub.row(static_cast<Index>(r)) = counts_.row(rows[r]);
            ids.push_back(sample_ids_[static_cast<std::size_t>(rows[r])]);
        }
        return CountTable(sub, taxa_, dim(), std::move(ids));
    }

private:
    CountMatrix counts_;
    Matrix real_;
    std::vector<std::string> taxa_;
    std::vector<std::string> sample_ids_;
    std::vector<std::int64_t> depths_;
    Index reference_index_ = 0;
};

/// n x K additive log-ratios, either latent estimates or count surrogates.
struct LogRatioMatrix {
    enum class Kind { latent_estimate, surrogate };

    LogRatioMatrix(Matrix v, Kind k) : values(std::move(v)), kind(k) {
        if (!values.allFinite()) throw DomainError("log-ratio matrix has non-finite entries");
    }

    Matrix values;
    Kind kind;
};

/// Multinomial probabilities over K+1 parts, reference last.
class ProbabilityVector {
public:
    explicit ProbabilityVector(Vector p) : p_(std::move(p)) {
        if (p_.size() < 2) throw ArgumentError("probability vector needs at least 2 parts");
        if (!p_.allFinite() || (p_.array() < 0.0).any())
            throw DomainError("probabilities must be finite and non-negative");
        if (std::abs(p_.sum() - 1.0) > 1e-12) throw DomainError("probabilities must sum to 1");
    }
    const Vector& values() const noexcept { return p_; }
    Index size() const noexcept { return p_.size(); }
    double operator[](Index k) const { return p_[k]; }

private:
    Vector p_;
};

/// Symmetric positive-definite K x K matrix.
class PrecisionMatrix {
public:
    explicit PrecisionMatrix(Matrix omega) : omega_(std::move(omega)) {
        if (omega_.rows() != omega_.cols() || omega_.rows() == 0)
            throw ArgumentError("precision matrix must be square and non-empty");
        if (!omega_.allFinite()) throw DomainError("precision matrix has non-finite entries");
        const double scale = std::max(1.0, omega_.cwiseAbs().maxCoeff());
        if ((omega_ - omega_.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale)
            throw DomainError("precision matrix is not symmetric");
        Eigen::LLT<Matrix> llt(omega_);
        if (llt.info() != Eigen::Success) throw DomainError("precision matrix is not positive definite");
        log_det_ = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
    }

    const Matrix& matrix() const noexcept { return omega_; }
    Index dim() const noexcept { return omega_.rows(); }
    double log_det() const noexcept { return log_det_; }
    double operator()(Index k, Index l) const { return omega_(k, l); }

private:
    Matrix omega_;
    double log_det_ = 0.0;
};

struct MeanVector {
    Vector mu;
};

/// log(sum_k exp(z_k) + 1), shifted by max(0, max z) so it never overflows.
inline double log1p_sum_exp(const Eigen::Ref<const Vector>& z) {
    const double shift = std::max(0.0, z.size() ? z.maxCoeff() : 0.0);
    return shift + std::log((z.array() - shift).exp().sum() + std::exp(-shift));
}

/// Softmax weights e^{z_k} / (sum_j e^{z_j} + 1) for the K non-reference parts.
inline Vector softmax_numerators(const Eigen::Ref<const Vector>& z) {
    const double shift = std::max(0.0, z.size() ? z.maxCoeff() : 0.0);
    Vector e = (z.array() - shift).exp();
    const double denom = e.sum() + std::exp(-shift);
    return e / denom;
}

/// z_k = log(p_k / p_ref) for every part except `ref`, in original order.
inline Vector alr_transform(const ProbabilityVector& p, Index ref) {
    const Index parts = p.size();
    if (ref < 0 || ref >= parts) throw ArgumentError("reference index out of range");
    if ((p.values().array() <= 0.0).any()) throw DomainError("alr_transform needs strictly positive probabilities");
    Vector z(parts - 1);
    const double log_ref = std::log(p[ref]);
    Index out = 0;
    for (Index k = 0; k < parts; ++k)
        if (k != ref) z[out++] = std::log(p[k]) - log_ref;
    return z;
}

/// Inverse of alr with the reference appended as the last part.
inline ProbabilityVector inverse_alr(const Eigen::Ref<const Vector>& z) {
    if (!z.allFinite()) throw DomainError("inverse_alr needs finite input");
    const double shift = std::max(0.0, z.size() ? z.maxCoeff() : 0.0);
    Vector p(z.size() + 1);
    p.head(z.size()) = (z.array() - shift).exp();
    p[z.size()] = std::exp(-shift);
    p /= p.sum();
    return ProbabilityVector(std::move(p));
}

/// Log-ratios of observed counts against the reference; zero counts are
/// replaced by `pseudocount`, non-zero counts are left untouched.
inline LogRatioMatrix surrogate_logratios(const CountTable& x, double pseudocount) {
    if (!(pseudocount > 0.0)) throw ArgumentError("pseudocount must be positive");
    const Index n = x.num_samples();
    const Index K = x.dim();
    const Matrix& c = x.counts_real();
    Matrix z(n, K);
    for (Index i = 0; i < n; ++i) {
        const double ref = c(i, K) > 0.0 ? c(i, K) : pseudocount;
        const double log_ref = std::log(ref);
        for (Index k = 0; k < K; ++k) {
            const double v = c(i, k) > 0.0 ? c(i, k) : pseudocount;
            z(i, k) = std::log(v) - log_ref;
        }
    }
    return LogRatioMatrix(std::move(z), LogRatioMatrix::Kind::surrogate);
}

/// Column means and the divisor-n covariance of the rows of Z.
inline std::pair<MeanVector, Matrix> centered_covariance(const Matrix& z) {
    const Index n = z.rows();
    if (n < 2) throw ArgumentError("centered_covariance needs at least 2 rows");
    Vector mean = z.colwise().mean().transpose();
    Matrix centered = z.rowwise() - mean.transpose();
    Matrix s = (centered.transpose() * centered) / static_cast<double>(n);
    s = 0.5 * (s + s.transpose());
    return {MeanVector{std::move(mean)}, std::move(s)};
}

inline std::pair<MeanVector, Matrix> centered_covariance(const LogRatioMatrix& z) {
    return centered_covariance(z.values);
}

}  // namespace cglasso
