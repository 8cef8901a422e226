#pragma once

// Deterministic data products: CSV tables printed at 17 significant digits
// and JSON manifests. Identical inputs must give identical bytes.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "epdyn/errors.hpp"

namespace epdyn {

// Shortest round-trip-exact decimal form, locale-independent.
inline std::string format_value(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

class CsvWriter {
  public:
    CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& columns)
        : out_(path, std::ios::binary) {
        if (!out_) throw ConfigError("cannot open for writing: " + path.string());
        for (std::size_t i = 0; i < columns.size(); ++i) {
            if (i) out_ << ',';
            out_ << columns[i];
        }
        out_ << '\n';
        width_ = columns.size();
    }

    void row(const std::vector<double>& values) {
        if (values.size() != width_)
            throw DomainError("CsvWriter: row width does not match header");
        for (std::size_t i = 0; i < values.size(); ++i) {
            if (i) out_ << ',';
            out_ << format_value(values[i]);
        }
        out_ << '\n';
    }

    void flush() { out_.flush(); }

  private:
    std::ofstream out_;
    std::size_t width_;
};

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot open for writing: " + path.string());
    out << text;
}

inline std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open for reading: " + path.string());
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

}  // namespace epdyn
