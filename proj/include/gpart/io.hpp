#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "gpart/graph.hpp"

namespace gpart {

namespace detail {

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::invalid_argument("cannot open file: " + path);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Splits one line into numeric fields; returns how many were found (max 3).
inline int split_fields(const char* begin, const char* end, double out[3], const std::string& path,
                        std::int64_t lineno) {
    int count = 0;
    const char* p = begin;
    while (p < end) {
        while (p < end && (*p == ' ' || *p == '\t' || *p == '\r')) ++p;
        if (p == end) break;
        if (count == 3) {
            throw std::invalid_argument(path + ":" + std::to_string(lineno) +
                                        ": more than three columns");
        }
        double value = 0.0;
        const auto [next, ec] = std::from_chars(p, end, value);
        if (ec != std::errc()) {
            throw std::invalid_argument(path + ":" + std::to_string(lineno) +
                                        ": cannot parse numeric field");
        }
        out[count++] = value;
        p = next;
    }
    return count;
}

inline void write_number(std::string& out, double w) {
    if (w == std::floor(w) && std::abs(w) < 9.0e15) {
        out += std::to_string(static_cast<long long>(w));
    } else {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.17g", w);
        out += buf;
    }
}

}  // namespace detail

// Edge-list TSV: two integer ids per line, optional third weight column.
// Lines with a weight make the whole graph weighted (self-loops allowed);
// two-column files build a simple unweighted graph.
inline Graph read_edge_tsv(const std::string& path, bool one_based, std::int64_t n_hint = -1,
                           EdgeListStats* stats = nullptr) {
    const std::string text = detail::read_file(path);
    std::vector<std::pair<NodeId, NodeId>> pairs;
    std::vector<Edge> weighted_edges;
    int ncols = 0;
    const std::int64_t shift = one_based ? 1 : 0;

    const char* p = text.data();
    const char* end = p + text.size();
    std::int64_t lineno = 0;
    while (p < end) {
        const char* nl = std::find(p, end, '\n');
        ++lineno;
        double fields[3];
        const int count = detail::split_fields(p, nl, fields, path, lineno);
        p = nl < end ? nl + 1 : end;
        if (count == 0) continue;  // blank line
        if (count == 1) {
            throw std::invalid_argument(path + ":" + std::to_string(lineno) + ": lone field");
        }
        if (ncols == 0) ncols = count;
        if (count != ncols) {
            throw std::invalid_argument(path + ":" + std::to_string(lineno) +
                                        ": inconsistent column count");
        }
        const auto u = static_cast<std::int64_t>(fields[0]) - shift;
        const auto v = static_cast<std::int64_t>(fields[1]) - shift;
        if (u < 0 || v < 0) {
            throw std::invalid_argument(path + ":" + std::to_string(lineno) +
                                        ": node id below the id base");
        }
        if (ncols == 2) {
            pairs.emplace_back(static_cast<NodeId>(u), static_cast<NodeId>(v));
        } else {
            weighted_edges.push_back({static_cast<NodeId>(u), static_cast<NodeId>(v), fields[2]});
        }
    }
    if (ncols == 3) return Graph::from_weighted_edge_list(weighted_edges, n_hint);
    return Graph::from_edge_list(pairs, n_hint, stats);
}

// Canonical writer: unique edges ascending by (u, v); weight column only for
// weighted graphs, integral weights printed without a decimal point.
inline void write_edge_tsv(const std::string& path, const Graph& g, bool one_based) {
    std::string out;
    const std::int64_t shift = one_based ? 1 : 0;
    for (const auto& e : g.edges()) {
        out += std::to_string(e.u + shift);
        out += '\t';
        out += std::to_string(e.v + shift);
        if (g.weighted()) {
            out += '\t';
            detail::write_number(out, e.w);
        }
        out += '\n';
    }
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw std::invalid_argument("cannot open file for writing: " + path);
    f.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!f) throw std::runtime_error("write failed: " + path);
}

// Partition TSV: node_id <TAB> block_id. Every node must appear exactly once.
// Block labels may be arbitrary; they are compacted to [0, K) preserving
// numeric order, so files with contiguous labels round-trip unchanged.
inline Partition read_partition_tsv(const std::string& path, bool one_based,
                                    std::int64_t expected_n = -1) {
    const std::string text = detail::read_file(path);
    const std::int64_t shift = one_based ? 1 : 0;
    std::vector<std::pair<std::int64_t, std::int64_t>> rows;
    const char* p = text.data();
    const char* end = p + text.size();
    std::int64_t lineno = 0;
    while (p < end) {
        const char* nl = std::find(p, end, '\n');
        ++lineno;
        double fields[3];
        const int count = detail::split_fields(p, nl, fields, path, lineno);
        p = nl < end ? nl + 1 : end;
        if (count == 0) continue;
        if (count != 2) {
            throw std::invalid_argument(path + ":" + std::to_string(lineno) +
                                        ": expected node_id<TAB>block_id");
        }
        rows.emplace_back(static_cast<std::int64_t>(fields[0]) - shift,
                          static_cast<std::int64_t>(fields[1]) - shift);
    }
    if (rows.empty()) throw std::invalid_argument(path + ": empty partition file");

    std::int64_t n = expected_n;
    if (n < 0) {
        n = 0;
        for (const auto& [node, block] : rows) n = std::max(n, node + 1);
    }
    std::vector<std::int64_t> raw(static_cast<std::size_t>(n), -1);
    for (const auto& [node, block] : rows) {
        if (node < 0 || node >= n) {
            throw std::invalid_argument(path + ": node id " + std::to_string(node + shift) +
                                        " out of range");
        }
        if (block < 0) throw std::invalid_argument(path + ": negative block id");
        if (raw[node] != -1) {
            throw std::invalid_argument(path + ": node " + std::to_string(node + shift) +
                                        " assigned twice");
        }
        raw[node] = block;
    }
    std::vector<std::int64_t> labels;
    for (std::int64_t node = 0; node < n; ++node) {
        if (raw[node] < 0) {
            throw std::invalid_argument(path + ": node " + std::to_string(node + shift) +
                                        " has no block assignment");
        }
        labels.push_back(raw[node]);
    }
    std::vector<std::int64_t> uniq = labels;
    std::sort(uniq.begin(), uniq.end());
    uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
    Partition part;
    part.assign.resize(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) {
        part.assign[i] = static_cast<NodeId>(
            std::lower_bound(uniq.begin(), uniq.end(), labels[i]) - uniq.begin());
    }
    part.k = static_cast<NodeId>(uniq.size());
    return part;
}

inline void write_partition_tsv(const std::string& path, const Partition& p, bool one_based) {
    std::string out;
    const std::int64_t shift = one_based ? 1 : 0;
    for (std::size_t i = 0; i < p.assign.size(); ++i) {
        out += std::to_string(static_cast<std::int64_t>(i) + shift);
        out += '\t';
        out += std::to_string(p.assign[i] + shift);
        out += '\n';
    }
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw std::invalid_argument("cannot open file for writing: " + path);
    f.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!f) throw std::runtime_error("write failed: " + path);
}

}  // namespace gpart
