// csv.hpp: CSV emission with '#' provenance comments

#pragma once

#include <cstdint>
#include <cstdio>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace resdyn {

inline constexpr std::string_view version = "0.1.0";

inline std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    char buf[24];
    std::snprintf(buf, sizeof buf, "0x%016llx", static_cast<unsigned long long>(v));
    return buf;
}

inline std::string format_number(double v) {
    if (v == 0.0) return "0"; // no "-0"
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

class CsvWriter {
public:
    explicit CsvWriter(std::ostream& os) : os_(os) {}

    void comment(const std::string& line) { os_ << "# " << line << '\n'; }

    void header(const std::vector<std::string>& cols) { write(cols); }

    void row(const std::vector<std::string>& cells) { write(cells); }

    static std::string cell(double v) { return format_number(v); }
    static std::string cell(long long v) { return std::to_string(v); }
    static std::string cell(const std::string& s) {
        if (s.find_first_of(",\"\n") == std::string::npos) return s;
        std::string q = "\"";
        for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
        return q + "\"";
    }

private:
    void write(const std::vector<std::string>& cells) {
        for (std::size_t k = 0; k < cells.size(); ++k) os_ << (k ? "," : "") << cells[k];
        os_ << '\n';
    }

    std::ostream& os_;
};

} // namespace resdyn
