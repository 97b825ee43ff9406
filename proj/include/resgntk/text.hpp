#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace resgntk::text {

/// Shortest decimal form that parses back to the identical double.
std::string format_double(double value);

/// Strict parse of a whole token; returns false on trailing garbage or overflow.
bool parse_double(std::string_view token, double& out);
bool parse_size(std::string_view token, std::size_t& out);
bool parse_int(std::string_view token, long long& out);

std::string_view trim(std::string_view s);
std::vector<std::string_view> split_whitespace(std::string_view s);
std::vector<std::string_view> split(std::string_view s, char sep);

/// Calls f(line_number, line) for every line, 1-based, without the trailing '\n' or '\r'.
template <class F>
void for_each_line(std::string_view text, F&& f) {
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(pos, end - pos);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        f(++line_no, line);
        pos = end + 1;
    }
}

}  // namespace resgntk::text
