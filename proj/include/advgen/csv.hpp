#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace advgen {

// Shortest round-trip decimal form. All report files go through this so
// re-runs are byte-identical and values parse back exactly.
inline std::string format_double(double v) {
    char buf[40];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

class CsvWriter {
public:
    explicit CsvWriter(const std::string& path) : out_(path, std::ios::binary) {
        if (!out_) throw std::runtime_error("cannot open for writing: " + path);
    }

    void row(const std::vector<std::string>& cells) {
        for (size_t i = 0; i < cells.size(); ++i) {
            if (i) out_ << ',';
            out_ << cells[i];
        }
        out_ << '\n';
    }

    // convenience: header then typed rows via cell()
    static std::string cell(double v) { return format_double(v); }
    static std::string cell(int v) { return std::to_string(v); }
    static std::string cell(uint64_t v) { return std::to_string(v); }
    static std::string cell(const std::string& v) { return v; }

private:
    std::ofstream out_;
};

}  // namespace advgen
