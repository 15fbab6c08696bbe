#pragma once
// Number formatting for CSV (round-trip exact) and human tables (6 significant digits).

#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <string>
#include <string_view>
#include <vector>

namespace cvqn {

/// Shortest decimal string that parses back to exactly `v`.
inline std::string csv_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    std::array<char, 32> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), res.ptr);
}

inline std::string table_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    std::array<char, 32> buf{};
    std::snprintf(buf.data(), buf.size(), "%.6g", v);
    return buf.data();
}

inline std::string csv_line(const std::vector<std::string>& cells) {
    std::string out;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) out += ',';
        out += cells[i];
    }
    out += '\n';
    return out;
}

/// Right-aligned fixed-width text table.
class TextTable {
public:
    explicit TextTable(std::vector<std::string> header) : rows_{std::move(header)} {}

    void add(std::vector<std::string> row) { rows_.push_back(std::move(row)); }

    std::string str() const {
        std::vector<std::size_t> width;
        for (const auto& r : rows_)
            for (std::size_t c = 0; c < r.size(); ++c) {
                if (width.size() <= c) width.push_back(0);
                width[c] = std::max(width[c], r[c].size());
            }
        std::string out;
        for (std::size_t i = 0; i < rows_.size(); ++i) {
            for (std::size_t c = 0; c < rows_[i].size(); ++c) {
                if (c) out += "  ";
                out += std::string(width[c] - rows_[i][c].size(), ' ') + rows_[i][c];
            }
            out += '\n';
            if (i == 0) {
                std::size_t total = 0;
                for (auto w : width) total += w;
                out += std::string(total + 2 * (width.size() - 1), '-') + '\n';
            }
        }
        return out;
    }

private:
    std::vector<std::vector<std::string>> rows_;
};

}  // namespace cvqn
