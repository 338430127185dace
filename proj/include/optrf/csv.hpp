#pragma once

#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>

namespace optrf {

/// Shortest round-trip decimal form; identical doubles format identically, so
/// seeded reruns produce byte-identical files.
inline std::string format_double(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    // trim to the shortest representation that still round-trips
    for (int prec = 1; prec < 17; ++prec) {
        char probe[64];
        std::snprintf(probe, sizeof(probe), "%.*g", prec, x);
        double back = 0.0;
        std::sscanf(probe, "%lf", &back);
        if (back == x) return probe;
    }
    return buf;
}

class CsvWriter {
  public:
    explicit CsvWriter(const std::string& path) : out_(path, std::ios::binary) {
        if (!out_) throw std::runtime_error("cannot open for writing: " + path);
    }

    void field(const std::string& s) {
        if (!first_) out_ << ',';
        out_ << s;
        first_ = false;
    }
    void field(double x) { field(format_double(x)); }
    void field(long long x) { field(std::to_string(x)); }
    void field(int x) { field(std::to_string(x)); }
    void field(std::size_t x) { field(std::to_string(x)); }
    void endrow() {
        out_ << '\n';
        first_ = true;
    }

  private:
    std::ofstream out_;
    bool first_ = true;
};

}  // namespace optrf
