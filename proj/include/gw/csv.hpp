#pragma once

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace gw::csv {

// Splits one CSV line on commas. The dataset files carry no quoting or
// escapes, so a plain scan is enough.
inline void split_line(std::string_view line, std::vector<std::string_view>& out) {
    out.clear();
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find(',', start);
        if (pos == std::string_view::npos) {
            out.push_back(line.substr(start));
            return;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
}

inline std::string_view strip(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

inline bool parse_int64(std::string_view s, std::int64_t& out) {
    s = strip(s);
    const auto* first = s.data();
    const auto* last = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc{} && ptr == last && !s.empty();
}

inline bool parse_double(std::string_view s, double& out) {
    s = strip(s);
    const auto* first = s.data();
    const auto* last = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc{} && ptr == last && !s.empty();
}

// 17 significant digits: enough for exact double round-trips through text.
inline void append_double(std::string& buf, double v) {
    char tmp[40];
    const int n = std::snprintf(tmp, sizeof(tmp), "%.17g", v);
    buf.append(tmp, static_cast<std::size_t>(n));
}

// Calls fn(line_number, line) for every line of the file; line excludes the
// trailing newline. Throws on missing file.
template <typename Fn>
void for_each_line(const std::string& path, Fn&& fn) {
    FILE* f = std::fopen(path.c_str(), "rb");
    if (!f) throw std::runtime_error("cannot open file: " + path);
    std::string content;
    std::fseek(f, 0, SEEK_END);
    const long size = std::ftell(f);
    std::fseek(f, 0, SEEK_SET);
    content.resize(static_cast<std::size_t>(size));
    if (size > 0 && std::fread(content.data(), 1, content.size(), f) != content.size()) {
        std::fclose(f);
        throw std::runtime_error("read failed: " + path);
    }
    std::fclose(f);

    std::size_t line_no = 0;
    std::size_t start = 0;
    const std::string_view all(content);
    while (start < all.size()) {
        std::size_t end = all.find('\n', start);
        if (end == std::string_view::npos) end = all.size();
        std::string_view line = all.substr(start, end - start);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        ++line_no;
        if (!line.empty()) fn(line_no, line);
        start = end + 1;
    }
}

} // namespace gw::csv
