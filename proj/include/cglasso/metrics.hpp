#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "cglasso/core.hpp"

namespace cglasso {

/// Symmetric 0/1 edge indicator with zero diagonal and optional node names.
class Adjacency {
public:
    Adjacency() = default;
    explicit Adjacency(Index K, std::vector<std::string> names = {})
        : edges_(Eigen::MatrixX<std::uint8_t>::Zero(K, K)), names_(std::move(names)) {
        if (!names_.empty() && static_cast<Index>(names_.size()) != K)
            throw ArgumentError("adjacency: name count does not match dimension");
    }

    /// Edges where |omega_kl| > threshold, k != l.
    static Adjacency from_precision(const Matrix& omega, std::vector<std::string> names = {}, double threshold = 0.0) {
        Adjacency a(omega.rows(), std::move(names));
        for (Index l = 0; l < omega.cols(); ++l)
            for (Index k = 0; k < l; ++k)
                if (std::abs(omega(k, l)) > threshold || std::abs(omega(l, k)) > threshold) a.set(k, l, true);
        return a;
    }

    static Adjacency from_matrix(const Eigen::MatrixX<std::uint8_t>& m, std::vector<std::string> names = {}) {
        if (m.rows() != m.cols()) throw ArgumentError("adjacency must be square");
        Adjacency a(m.rows(), std::move(names));
        for (Index l = 0; l < m.cols(); ++l) {
            if (m(l, l) != 0) throw ArgumentError("adjacency diagonal must be zero");
            for (Index k = 0; k < l; ++k) {
                if ((m(k, l) != 0) != (m(l, k) != 0)) throw ArgumentError("adjacency must be symmetric");
                if (m(k, l)) a.set(k, l, true);
            }
        }
        return a;
    }

    Index dim() const noexcept { return edges_.rows(); }
    bool operator()(Index k, Index l) const { return edges_(k, l) != 0; }
    void set(Index k, Index l, bool on) {
        if (k == l) throw ArgumentError("adjacency: self loops are not allowed");
        edges_(k, l) = edges_(l, k) = on ? 1 : 0;
    }
    const std::vector<std::string>& names() const noexcept { return names_; }
    const Eigen::MatrixX<std::uint8_t>& matrix() const noexcept { return edges_; }

    Index num_edges() const {
        Index total = 0;
        for (Index l = 0; l < dim(); ++l)
            for (Index k = 0; k < l; ++k) total += edges_(k, l);
        return total;
    }
    Index degree(Index k) const {
        Index d = 0;
        for (Index l = 0; l < dim(); ++l) d += edges_(k, l);
        return d;
    }
    std::string name(Index k) const {
        return names_.empty() ? "node" + std::to_string(k + 1) : names_[static_cast<std::size_t>(k)];
    }
    bool operator==(const Adjacency& o) const { return edges_ == o.edges_; }

private:
    Eigen::MatrixX<std::uint8_t> edges_;
    std::vector<std::string> names_;
};

struct Confusion {
    Index tp = 0, fp = 0, fn = 0, tn = 0;
    double precision = 0.0, recall = 0.0, f1 = 0.0;
};

/// Counts over unordered off-diagonal pairs. Empty estimates have precision 0
/// and F1 is 0 whenever precision + recall is 0.
inline Confusion edge_confusion(const Adjacency& est, const Adjacency& truth) {
    if (est.dim() != truth.dim()) throw ArgumentError("edge_confusion: dimension mismatch");
    Confusion c;
    for (Index l = 0; l < est.dim(); ++l) {
        for (Index k = 0; k < l; ++k) {
            const bool e = est(k, l);
            const bool t = truth(k, l);
            if (e && t) ++c.tp;
            else if (e) ++c.fp;
            else if (t) ++c.fn;
            else ++c.tn;
        }
    }
    c.precision = (c.tp + c.fp) > 0 ? static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp) : 0.0;
    c.recall = (c.tp + c.fn) > 0 ? static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn) : 0.0;
    c.f1 = (c.precision + c.recall) > 0.0 ? 2.0 * c.precision * c.recall / (c.precision + c.recall) : 0.0;
    return c;
}

struct RocPoint {
    double fpr = 0.0;
    double tpr = 0.0;
};

struct RocCurve {
    std::vector<RocPoint> points;  ///< one per lambda, in path order
    double auc = 0.0;
};

/// Trapezoidal area under points sorted by FPR, with (0,0) prepended and (1,1) appended.
inline double roc_auc(std::vector<RocPoint> pts) {
    pts.push_back({0.0, 0.0});
    pts.push_back({1.0, 1.0});
    std::sort(pts.begin(), pts.end(),
              [](const RocPoint& a, const RocPoint& b) { return std::tie(a.fpr, a.tpr) < std::tie(b.fpr, b.tpr); });
    double area = 0.0;
    for (std::size_t i = 1; i < pts.size(); ++i)
        area += (pts[i].fpr - pts[i - 1].fpr) * 0.5 * (pts[i].tpr + pts[i - 1].tpr);
    return area;
}

inline RocCurve roc_points(const std::vector<Adjacency>& path, const Adjacency& truth) {
    if (truth.num_edges() == 0) throw ArgumentError("roc_points: truth has no edges, TPR undefined");
    RocCurve curve;
    for (const auto& est : path) {
        const Confusion c = edge_confusion(est, truth);
        const double negatives = static_cast<double>(c.fp + c.tn);
        curve.points.push_back({negatives > 0 ? static_cast<double>(c.fp) / negatives : 0.0,
                                static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn)});
    }
    curve.auc = roc_auc(curve.points);
    return curve;
}

struct DegreeRank {
    std::string taxon;
    Index degree = 0;
    Index rank = 0;
};

/// Degrees in descending order with competition ranking (ties share the
/// smallest rank: 1, 2, 2, 4, ...). Ties in degree keep node order.
inline std::vector<DegreeRank> degree_ranks(const Adjacency& adj) {
    std::vector<DegreeRank> out;
    for (Index k = 0; k < adj.dim(); ++k) out.push_back({adj.name(k), adj.degree(k), 0});
    std::stable_sort(out.begin(), out.end(), [](const DegreeRank& a, const DegreeRank& b) { return a.degree > b.degree; });
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i].rank = (i > 0 && out[i].degree == out[i - 1].degree) ? out[i - 1].rank : static_cast<Index>(i) + 1;
    return out;
}

/// Competition ranks for a plain list of degrees, in input order.
inline std::vector<Index> competition_ranks(const std::vector<Index>& degrees) {
    std::vector<Index> ranks;
    for (Index d : degrees)
        ranks.push_back(1 + static_cast<Index>(std::count_if(degrees.begin(), degrees.end(), [d](Index o) { return o > d; })));
    return ranks;
}

/// |omega_kl| / sqrt(omega_kk omega_ll) off the diagonal, 0 on it.
inline Matrix partial_correlations(const PrecisionMatrix& omega) {
    const Matrix& om = omega.matrix();
    const Vector inv_sd = om.diagonal().cwiseSqrt().cwiseInverse();
    Matrix w = (inv_sd.asDiagonal() * om.cwiseAbs() * inv_sd.asDiagonal()).eval();
    w.diagonal().setZero();
    return w;
}

struct EdgeRecord {
    std::string taxon_a;
    std::string taxon_b;
    double selection_probability = 0.0;
    double weight = 0.0;

    EdgeRecord() = default;
    EdgeRecord(std::string a, std::string b, double prob, double w)
        : taxon_a(std::move(a)), taxon_b(std::move(b)), selection_probability(prob), weight(w) {
        if (taxon_b < taxon_a) std::swap(taxon_a, taxon_b);
    }
};

/// Probability descending, then weight descending, then name pair ascending; first top_m kept.
inline std::vector<EdgeRecord> rank_edges(std::vector<EdgeRecord> records, std::size_t top_m) {
    std::sort(records.begin(), records.end(), [](const EdgeRecord& a, const EdgeRecord& b) {
        if (a.selection_probability != b.selection_probability) return a.selection_probability > b.selection_probability;
        if (a.weight != b.weight) return a.weight > b.weight;
        return std::tie(a.taxon_a, a.taxon_b) < std::tie(b.taxon_a, b.taxon_b);
    });
    if (records.size() > top_m) records.resize(top_m);
    return records;
}

struct OverlapPoint {
    Index num_edges = 0;
    Index num_gold_hits = 0;
};

/// (edges, edges that are in the gold set) for each network on the path.
inline std::vector<OverlapPoint> literature_overlap_curve(const std::vector<Adjacency>& path,
                                                          const std::vector<std::pair<std::string, std::string>>& gold) {
    std::vector<OverlapPoint> out;
    if (path.empty()) return out;
    std::map<std::string, Index> index;
    for (Index k = 0; k < path.front().dim(); ++k) index[path.front().name(k)] = k;
    std::vector<std::string> unknown;
    std::set<std::pair<Index, Index>> gold_pairs;
    for (const auto& [a, b] : gold) {
        const auto ia = index.find(a);
        const auto ib = index.find(b);
        if (ia == index.end()) unknown.push_back(a);
        if (ib == index.end()) unknown.push_back(b);
        if (ia != index.end() && ib != index.end() && ia->second != ib->second)
            gold_pairs.insert(std::minmax(ia->second, ib->second));
    }
    if (!unknown.empty()) {
        std::sort(unknown.begin(), unknown.end());
        unknown.erase(std::unique(unknown.begin(), unknown.end()), unknown.end());
        std::string msg = "gold edges reference unknown taxa:";
        for (const auto& u : unknown) msg += " " + u;
        throw ArgumentError(msg);
    }
    for (const auto& adj : path) {
        OverlapPoint p;
        p.num_edges = adj.num_edges();
        for (const auto& [k, l] : gold_pairs) p.num_gold_hits += adj(k, l) ? 1 : 0;
        out.push_back(p);
    }
    return out;
}

}  // namespace cglasso
