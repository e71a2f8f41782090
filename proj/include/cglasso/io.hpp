#pragma once

#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "cglasso/core.hpp"

namespace cglasso::io {

/// Count table as read from disk, before filtering or reference selection.
struct RawCountTable {
    std::vector<std::string> sample_ids;
    std::vector<std::string> taxa;
    CountMatrix counts;
};

/// Shortest round-trip-safe text for a double: 17 significant digits.
inline std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline std::vector<std::string> split_tabs(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t tab = line.find('\t', start);
        out.push_back(line.substr(start, tab == std::string::npos ? std::string::npos : tab - start));
        if (tab == std::string::npos) break;
        start = tab + 1;
    }
    return out;
}

inline bool read_line(std::istream& in, std::string& line) {
    if (!std::getline(in, line)) return false;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
}

/**
 * Reads a count table: the header row holds a label for the sample column
 * followed by taxon names; every other row holds a sample id followed by
 * non-negative integer counts. Blank lines are ignored.
 */
inline RawCountTable read_count_table(std::istream& in, const std::string& source = "<stream>") {
    std::string line;
    if (!read_line(in, line)) throw ArgumentError(source + ": empty count table");
    auto header = split_tabs(line);
    if (header.size() < 3) throw ArgumentError(source + ": header needs a sample column and at least 2 taxa");
    RawCountTable t;
    t.taxa.assign(header.begin() + 1, header.end());
    std::vector<std::vector<std::int64_t>> rows;
    std::size_t line_no = 1;
    while (read_line(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        auto cells = split_tabs(line);
        if (cells.size() != header.size()) {
            std::ostringstream msg;
            msg << source << ":" << line_no << ": expected " << header.size() << " cells, found " << cells.size();
            throw ArgumentError(msg.str());
        }
        std::vector<std::int64_t> row;
        for (std::size_t c = 1; c < cells.size(); ++c) {
            const std::string& cell = cells[c];
            std::int64_t v = 0;
            const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
            if (ec != std::errc() || ptr != cell.data() + cell.size() || cell.empty() || v < 0) {
                std::ostringstream msg;
                msg << source << ":" << line_no << ": column '" << header[c] << "' has malformed count '" << cell
                    << "' (expected a non-negative integer)";
                throw ArgumentError(msg.str());
            }
            row.push_back(v);
        }
        t.sample_ids.push_back(cells[0]);
        rows.push_back(std::move(row));
    }
    t.counts.resize(static_cast<Index>(rows.size()), static_cast<Index>(t.taxa.size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t k = 0; k < rows[i].size(); ++k)
            t.counts(static_cast<Index>(i), static_cast<Index>(k)) = rows[i][k];
    return t;
}

inline RawCountTable read_count_table_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ArgumentError("cannot open count table: " + path);
    return read_count_table(in, path);
}

/// Writes counts in the caller's original taxon order.
inline void write_count_table(std::ostream& out, const CountTable& x, const std::string& sample_label = "sample") {
    const auto taxa = x.original_taxa();
    const CountMatrix c = x.original_counts();
    out << sample_label;
    for (const auto& t : taxa) out << '\t' << t;
    out << '\n';
    for (Index i = 0; i < c.rows(); ++i) {
        out << x.sample_ids()[static_cast<std::size_t>(i)];
        for (Index k = 0; k < c.cols(); ++k) out << '\t' << c(i, k);
        out << '\n';
    }
}

/// Matrix as TSV with a header of column names; rows prefixed by row names.
inline void write_matrix(std::ostream& out, const Matrix& m, const std::vector<std::string>& row_names,
                         const std::vector<std::string>& col_names, const std::string& corner = "") {
    out << corner;
    for (const auto& c : col_names) out << '\t' << c;
    out << '\n';
    for (Index i = 0; i < m.rows(); ++i) {
        out << row_names[static_cast<std::size_t>(i)];
        for (Index j = 0; j < m.cols(); ++j) out << '\t' << format_double(m(i, j));
        out << '\n';
    }
}

/// Inverse of write_matrix; returns the matrix with its row and column names.
struct NamedMatrix {
    Matrix values;
    std::vector<std::string> row_names;
    std::vector<std::string> col_names;
};

inline NamedMatrix read_matrix(std::istream& in, const std::string& source = "<stream>") {
    std::string line;
    if (!read_line(in, line)) throw ArgumentError(source + ": empty matrix file");
    NamedMatrix m;
    auto header = split_tabs(line);
    m.col_names.assign(header.begin() + 1, header.end());
    std::vector<std::vector<double>> rows;
    std::size_t line_no = 1;
    while (read_line(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        auto cells = split_tabs(line);
        if (cells.size() != header.size())
            throw ArgumentError(source + ":" + std::to_string(line_no) + ": wrong number of cells");
        std::vector<double> row;
        for (std::size_t c = 1; c < cells.size(); ++c) {
            try {
                std::size_t used = 0;
                row.push_back(std::stod(cells[c], &used));
                if (used != cells[c].size()) throw std::invalid_argument("trailing characters");
            } catch (const std::exception&) {
                throw ArgumentError(source + ":" + std::to_string(line_no) + ": malformed number '" + cells[c] + "'");
            }
        }
        m.row_names.push_back(cells[0]);
        rows.push_back(std::move(row));
    }
    m.values.resize(static_cast<Index>(rows.size()), static_cast<Index>(m.col_names.size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows[i].size(); ++j) m.values(static_cast<Index>(i), static_cast<Index>(j)) = rows[i][j];
    return m;
}

/// Two-column TSV of taxon pairs (extra columns ignored, '#' lines skipped).
inline std::vector<std::pair<std::string, std::string>> read_edge_list(std::istream& in,
                                                                       const std::string& source = "<stream>") {
    std::vector<std::pair<std::string, std::string>> out;
    std::string line;
    std::size_t line_no = 0;
    while (read_line(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        auto cells = split_tabs(line);
        if (cells.size() < 2)
            throw ArgumentError(source + ":" + std::to_string(line_no) + ": edge line needs two taxon names");
        out.emplace_back(cells[0], cells[1]);
    }
    return out;
}

}  // namespace cglasso::io
