#pragma once

#include <string>
#include <vector>

#include "cglasso/core.hpp"
#include "cglasso/io.hpp"

namespace cglasso {

struct IngestOptions {
    /// Taxa non-zero in fewer than this fraction of samples are dropped.
    double prevalence_min = 0.05;
    /// Taxon name, or "auto" for the retained taxon with the largest mean relative abundance.
    std::string reference = "auto";
    /// Samples with total count below this are dropped.
    std::int64_t min_depth = 100;
};

/**
 * Filters a raw table and picks the reference taxon.
 *
 * The sample-depth floor and the prevalence filter are applied alternately
 * until neither removes anything, so ingesting an already-ingested table with
 * the same options returns it unchanged.
 */
inline CountTable ingest(const io::RawCountTable& raw, const IngestOptions& opts) {
    if (!(opts.prevalence_min >= 0.0 && opts.prevalence_min <= 1.0))
        throw ArgumentError("prevalence threshold must be in [0, 1]");
    std::vector<Index> rows;
    std::vector<Index> cols;
    for (Index i = 0; i < raw.counts.rows(); ++i) rows.push_back(i);
    for (Index k = 0; k < raw.counts.cols(); ++k) cols.push_back(k);

    for (bool changed = true; changed;) {
        changed = false;
        std::vector<Index> kept_rows;
        for (Index i : rows) {
            std::int64_t depth = 0;
            for (Index k : cols) depth += raw.counts(i, k);
            if (depth >= opts.min_depth && depth > 0) kept_rows.push_back(i);
        }
        changed |= kept_rows.size() != rows.size();
        rows = std::move(kept_rows);

        std::vector<Index> kept_cols;
        for (Index k : cols) {
            std::size_t nonzero = 0;
            for (Index i : rows) nonzero += raw.counts(i, k) > 0 ? 1 : 0;
            const double frac = rows.empty() ? 0.0 : static_cast<double>(nonzero) / static_cast<double>(rows.size());
            if (frac >= opts.prevalence_min && nonzero > 0) kept_cols.push_back(k);
        }
        changed |= kept_cols.size() != cols.size();
        cols = std::move(kept_cols);
    }
    if (rows.size() < 2) throw ArgumentError("fewer than 2 samples remain after filtering");
    if (cols.size() < 2) throw ArgumentError("fewer than 2 taxa remain after filtering");

    CountMatrix counts(static_cast<Index>(rows.size()), static_cast<Index>(cols.size()));
    std::vector<std::string> taxa;
    std::vector<std::string> ids;
    for (std::size_t c = 0; c < cols.size(); ++c) taxa.push_back(raw.taxa[static_cast<std::size_t>(cols[c])]);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        ids.push_back(raw.sample_ids[static_cast<std::size_t>(rows[r])]);
        for (std::size_t c = 0; c < cols.size(); ++c)
            counts(static_cast<Index>(r), static_cast<Index>(c)) = raw.counts(rows[r], cols[c]);
    }

    Index ref = -1;
    if (opts.reference == "auto") {
        Vector mean_rel = Vector::Zero(counts.cols());
        for (Index i = 0; i < counts.rows(); ++i) {
            const double depth = static_cast<double>(counts.row(i).sum());
            mean_rel += counts.row(i).cast<double>().transpose() / depth;
        }
        mean_rel.maxCoeff(&ref);
    } else {
        for (std::size_t c = 0; c < taxa.size(); ++c)
            if (taxa[c] == opts.reference) ref = static_cast<Index>(c);
        if (ref < 0) {
            bool present = false;
            for (const auto& t : raw.taxa) present |= (t == opts.reference);
            throw ArgumentError(present ? "reference taxon '" + opts.reference + "' was removed by filtering"
                                        : "reference taxon '" + opts.reference + "' is not in the table");
        }
    }
    return CountTable(counts, std::move(taxa), ref, std::move(ids));
}

inline CountTable ingest_file(const std::string& path, const IngestOptions& opts) {
    return ingest(io::read_count_table_file(path), opts);
}

}  // namespace cglasso
