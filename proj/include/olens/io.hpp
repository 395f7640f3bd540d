#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "olens/independence.hpp"

namespace olens {

inline constexpr char kEmbeddingMagic[8] = {'O', 'L', 'N', 'S', '0', '0', '0', '1'};

namespace detail {

inline void put_u32_le(std::string& out, std::uint32_t v) {
    out.push_back(static_cast<char>(v & 0xff));
    out.push_back(static_cast<char>((v >> 8) & 0xff));
    out.push_back(static_cast<char>((v >> 16) & 0xff));
    out.push_back(static_cast<char>((v >> 24) & 0xff));
}

inline std::uint32_t get_u32_le(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

inline std::string read_file_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw invalid_input_error("cannot open file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return std::move(buf).str();
}

}  // namespace detail

// Text format: one record per line, `label<TAB>f1 f2 ... fd`. Coordinates
// are parsed as 32-bit floats and widened, so a table loaded from text is
// bitwise identical to the same table loaded from the binary format.
inline EmbeddingTable load_table_text(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw invalid_input_error("cannot open file: " + path);

    std::vector<std::string> labels;
    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const std::size_t tab = line.find('\t');
        if (tab == std::string::npos)
            throw parse_error("missing tab separator in " + path, lineno);
        if (tab == 0) throw parse_error("empty label in " + path, lineno);
        const std::string label = line.substr(0, tab);

        std::vector<double> coords;
        const char* p = line.c_str() + tab + 1;
        while (*p) {
            while (*p == ' ') ++p;
            if (!*p) break;
            char* end = nullptr;
            const float f = std::strtof(p, &end);
            if (end == p)
                throw parse_error("malformed coordinate for '" + label + "' in " + path, lineno,
                                  static_cast<std::size_t>(p - line.c_str()));
            if (!std::isfinite(f))
                throw parse_error("non-finite coordinate in record '" + label + "' in " + path,
                                  lineno);
            coords.push_back(static_cast<double>(f));
            p = end;
        }
        if (coords.empty())
            throw parse_error("record '" + label + "' has no coordinates in " + path, lineno);
        if (!rows.empty() && coords.size() != rows.front().size())
            throw parse_error("record '" + label + "' has " + std::to_string(coords.size()) +
                                  " coordinates, expected " +
                                  std::to_string(rows.front().size()) + " in " + path,
                              lineno);
        labels.push_back(label);
        rows.push_back(std::move(coords));
    }
    if (labels.empty()) throw parse_error("no records in " + path, lineno);

    Mat m(static_cast<Eigen::Index>(rows.front().size()), static_cast<Eigen::Index>(rows.size()));
    for (std::size_t c = 0; c < rows.size(); ++c)
        for (std::size_t r = 0; r < rows[c].size(); ++r)
            m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[c][r];
    return EmbeddingTable(std::move(labels), std::move(m));
}

// Binary format: magic "OLNS0001", little-endian u32 n, u32 d, then n
// records of (u32 label byte length, label bytes, d little-endian f32).
inline EmbeddingTable load_table_binary(const std::string& path) {
    const std::string bytes = detail::read_file_bytes(path);
    const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
    const std::size_t size = bytes.size();
    std::size_t off = 0;

    auto need = [&](std::size_t n, const char* what) {
        if (off + n > size)
            throw parse_error(std::string("truncated file (") + what + ") in " + path, 0, off);
    };

    need(8, "magic");
    if (std::memcmp(p, kEmbeddingMagic, 8) != 0)
        throw parse_error("bad magic bytes in " + path, 0, 0);
    off = 8;

    need(8, "header");
    const std::uint32_t n = detail::get_u32_le(p + off);
    const std::uint32_t d = detail::get_u32_le(p + off + 4);
    off += 8;
    if (n == 0 || d == 0) throw parse_error("empty table in " + path, 0, 8);

    std::vector<std::string> labels;
    Mat m(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(n));
    for (std::uint32_t i = 0; i < n; ++i) {
        need(4, "label length");
        const std::uint32_t len = detail::get_u32_le(p + off);
        off += 4;
        if (len > (1u << 20)) throw parse_error("label length too large in " + path, 0, off - 4);
        need(len, "label bytes");
        labels.emplace_back(bytes.data() + off, len);
        off += len;
        need(4u * d, "coordinates");
        for (std::uint32_t r = 0; r < d; ++r) {
            const std::uint32_t u = detail::get_u32_le(p + off);
            off += 4;
            const float f = std::bit_cast<float>(u);
            if (!std::isfinite(f))
                throw parse_error("non-finite coordinate in record '" + labels.back() + "' in " +
                                      path,
                                  0, off - 4);
            m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(i)) =
                static_cast<double>(f);
        }
    }
    if (off != size) throw parse_error("trailing bytes in " + path, 0, off);
    return EmbeddingTable(std::move(labels), std::move(m));
}

inline EmbeddingTable load_table(const std::string& path, const std::string& format) {
    if (format == "text") return load_table_text(path);
    if (format == "binary") return load_table_binary(path);
    throw invalid_input_error("unknown table format: " + format);
}

// Coordinates are narrowed to f32 on write; %.9g round-trips every f32.
inline void save_table_text(const EmbeddingTable& table, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw invalid_input_error("cannot open file for writing: " + path);
    char buf[40];
    for (std::size_t i = 0; i < table.size(); ++i) {
        out << table.label(i) << '\t';
        for (Eigen::Index r = 0; r < table.dim(); ++r) {
            const float f = static_cast<float>(table.coords()(r, static_cast<Eigen::Index>(i)));
            std::snprintf(buf, sizeof buf, "%.9g", static_cast<double>(f));
            out << (r ? " " : "") << buf;
        }
        out << '\n';
    }
    if (!out) throw invalid_input_error("write failed: " + path);
}

inline void save_table_binary(const EmbeddingTable& table, const std::string& path) {
    std::string bytes(kEmbeddingMagic, 8);
    detail::put_u32_le(bytes, static_cast<std::uint32_t>(table.size()));
    detail::put_u32_le(bytes, static_cast<std::uint32_t>(table.dim()));
    for (std::size_t i = 0; i < table.size(); ++i) {
        const std::string& label = table.label(i);
        detail::put_u32_le(bytes, static_cast<std::uint32_t>(label.size()));
        bytes += label;
        for (Eigen::Index r = 0; r < table.dim(); ++r) {
            const float f = static_cast<float>(table.coords()(r, static_cast<Eigen::Index>(i)));
            detail::put_u32_le(bytes, std::bit_cast<std::uint32_t>(f));
        }
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw invalid_input_error("cannot open file for writing: " + path);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw invalid_input_error("write failed: " + path);
}

inline void save_table(const EmbeddingTable& table, const std::string& path,
                       const std::string& format) {
    if (format == "text") return save_table_text(table, path);
    if (format == "binary") return save_table_binary(table, path);
    throw invalid_input_error("unknown table format: " + format);
}

// Graph text format: first significant line is the vertex count, each
// following significant line is an edge "i j" with 0-based endpoints.
// Lines starting with '#' and blank lines are ignored.
inline UndirectedGraph load_graph(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw invalid_input_error("cannot open file: " + path);
    std::string line;
    std::size_t lineno = 0;
    bool have_n = false;
    UndirectedGraph g;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::istringstream ls(line);
        std::string first;
        if (!(ls >> first) || first[0] == '#') continue;
        if (!have_n) {
            char* end = nullptr;
            const unsigned long n = std::strtoul(first.c_str(), &end, 10);
            std::string extra;
            if (*end != '\0' || (ls >> extra))
                throw parse_error("expected a vertex count in " + path, lineno);
            g = UndirectedGraph(static_cast<std::size_t>(n));
            have_n = true;
            continue;
        }
        std::string second, extra;
        if (!(ls >> second) || (ls >> extra))
            throw parse_error("expected an edge 'i j' in " + path, lineno);
        char *e1 = nullptr, *e2 = nullptr;
        const unsigned long a = std::strtoul(first.c_str(), &e1, 10);
        const unsigned long b = std::strtoul(second.c_str(), &e2, 10);
        if (*e1 != '\0' || *e2 != '\0')
            throw parse_error("malformed edge endpoints in " + path, lineno);
        try {
            g.add_edge(static_cast<std::size_t>(a), static_cast<std::size_t>(b));
        } catch (const invalid_input_error& e) {
            throw parse_error(std::string(e.what()) + " in " + path, lineno);
        }
    }
    if (!have_n) throw parse_error("no vertex count in " + path, lineno);
    return g;
}

inline void save_graph(const UndirectedGraph& g, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw invalid_input_error("cannot open file for writing: " + path);
    out << g.vertex_count() << '\n';
    for (const auto& [a, b] : g.edges()) out << a << ' ' << b << '\n';
    if (!out) throw invalid_input_error("write failed: " + path);
}

}  // namespace olens
