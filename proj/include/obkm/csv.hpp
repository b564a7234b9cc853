#pragma once

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "obkm/matrix.hpp"

namespace obkm {

// Shortest round-trip decimal form (std::to_chars), so equal values always
// print the same bytes and parse back bit-exactly.
inline std::string format_double(double v) {
    char buf[40];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

inline std::string format_int(std::int64_t v) {
    char buf[24];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view s) {
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
        throw std::invalid_argument("not a number: '" + std::string(s) + "'");
    return v;
}

inline std::vector<std::string_view> split_fields(std::string_view line, char sep = ',') {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= line.size(); ++i) {
        if (i == line.size() || line[i] == sep) {
            out.push_back(line.substr(start, i - start));
            start = i + 1;
        }
    }
    return out;
}

// Write-temp-then-rename, so readers never observe a partial file.
inline void atomic_write_text(const std::filesystem::path& path, std::string_view content) {
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open '" + tmp.string() + "' for writing");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw std::runtime_error("write failed for '" + tmp.string() + "'");
    }
    std::filesystem::rename(tmp, path);
}

// Dataset CSV: header row x0,...,x{d-1}, decimal reals, LF line endings.
inline std::string dataset_csv(const Matrix& data) {
    std::string out;
    for (std::size_t j = 0; j < data.cols(); ++j) {
        if (j) out += ',';
        out += 'x';
        out += format_int(static_cast<std::int64_t>(j));
    }
    out += '\n';
    for (std::size_t i = 0; i < data.rows(); ++i) {
        for (std::size_t j = 0; j < data.cols(); ++j) {
            if (j) out += ',';
            out += format_double(data(i, j));
        }
        out += '\n';
    }
    return out;
}

inline void write_dataset_csv(const std::filesystem::path& path, const Matrix& data) {
    atomic_write_text(path, dataset_csv(data));
}

// Reads a dataset CSV. A leading header row (any non-numeric first field) is
// skipped; all data rows must have the same width.
inline Matrix read_dataset_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
    Matrix out;
    std::string line;
    bool first = true;
    std::vector<double> row;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto fields = split_fields(line);
        if (first) {
            first = false;
            bool header = false;
            try {
                parse_double(fields[0]);
            } catch (const std::invalid_argument&) {
                header = true;
            }
            if (header) continue;
        }
        row.clear();
        row.reserve(fields.size());
        for (const auto f : fields) row.push_back(parse_double(f));
        out.append_row(row);
    }
    if (out.rows() == 0) throw std::runtime_error("'" + path.string() + "' has no data rows");
    return out;
}

} // namespace obkm
