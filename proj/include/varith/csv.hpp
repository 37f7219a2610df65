#pragma once

#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "error.hpp"

namespace varith::csv {

// Shortest decimal that reads back to the same double.
inline std::string num(double v) {
    char buf[64];
    auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

inline std::string num(long long v) { return std::to_string(v); }
inline std::string num(int v) { return std::to_string(v); }
inline std::string num(std::size_t v) { return std::to_string(v); }

class Writer {
public:
    explicit Writer(std::ostream& os) : os_(os) {}

    void header(std::initializer_list<std::string_view> cols) {
        bool first = true;
        for (auto c : cols) {
            if (!first) os_ << ',';
            os_ << c;
            first = false;
        }
        os_ << '\n';
    }

    template <class... Ts>
    void row(const Ts&... cells) {
        bool first = true;
        ((os_ << (first ? "" : ",") << cell(cells), first = false), ...);
        os_ << '\n';
    }

private:
    static std::string cell(const std::string& s) { return s; }
    static std::string cell(const char* s) { return s; }
    static std::string cell(double v) { return num(v); }
    static std::string cell(int v) { return num(v); }
    static std::string cell(long long v) { return num(v); }
    static std::string cell(std::size_t v) { return num(v); }
    static std::string cell(bool v) { return v ? "1" : "0"; }
    std::ostream& os_;
};

inline std::vector<std::string> split(std::string_view line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t p = line.find(',', start);
        out.emplace_back(line.substr(start, p == std::string_view::npos ? std::string_view::npos : p - start));
        if (p == std::string_view::npos) break;
        start = p + 1;
    }
    for (auto& s : out) {
        while (!s.empty() && (s.back() == '\r' || s.back() == ' ')) s.pop_back();
        while (!s.empty() && s.front() == ' ') s.erase(s.begin());
    }
    return out;
}

inline double to_double(const std::string& s) {
    double v = 0.0;
    auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc() || r.ptr != s.data() + s.size()) throw Error(Errc::ParseError, "bad number '" + s + "'");
    return v;
}

// Rows of a headed CSV; the header must match `expected`.
inline std::vector<std::vector<std::string>> read(std::istream& is, std::initializer_list<std::string_view> expected) {
    std::string line;
    if (!std::getline(is, line)) throw Error(Errc::ParseError, "missing header");
    const auto head = split(line);
    if (head.size() != expected.size()) throw Error(Errc::ParseError, "unexpected header '" + line + "'");
    std::size_t i = 0;
    for (auto e : expected)
        if (head[i++] != e) throw Error(Errc::ParseError, "unexpected header '" + line + "'");
    std::vector<std::vector<std::string>> rows;
    while (std::getline(is, line)) {
        if (line.empty() || line == "\r") continue;
        auto cells = split(line);
        if (cells.size() != expected.size()) throw Error(Errc::ParseError, "wrong column count in '" + line + "'");
        rows.push_back(std::move(cells));
    }
    return rows;
}

} // namespace varith::csv
