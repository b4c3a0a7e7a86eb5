#include "bison/text_io.hpp"

#include "bison/types.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <sstream>

namespace bison {

std::string format_real(double v) {
    std::array<char, 64> buf{};
    auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), end);
}

std::vector<std::string_view> split_fields(std::string_view line, std::string_view delims) {
    std::vector<std::string_view> out;
    std::size_t pos = 0;
    while (pos < line.size()) {
        const std::size_t start = line.find_first_not_of(delims, pos);
        if (start == std::string_view::npos) break;
        std::size_t stop = line.find_first_of(delims, start);
        if (stop == std::string_view::npos) stop = line.size();
        out.push_back(line.substr(start, stop - start));
        pos = stop;
    }
    return out;
}

std::vector<std::string_view> split_csv(std::string_view line, char delim) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t stop = line.find(delim, start);
        if (stop == std::string_view::npos) {
            out.push_back(trim(line.substr(start)));
            break;
        }
        out.push_back(trim(line.substr(start, stop - start)));
        start = stop + 1;
    }
    return out;
}

std::string_view trim(std::string_view s) {
    const auto ws = " \t\r\n";
    const std::size_t a = s.find_first_not_of(ws);
    if (a == std::string_view::npos) return {};
    const std::size_t b = s.find_last_not_of(ws);
    return s.substr(a, b - a + 1);
}

double parse_real(std::string_view s, std::string_view what) {
    s = trim(s);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
        throw InputError("cannot parse " + std::string(what) + " '" + std::string(s) + "'");
    return v;
}

long long parse_integer(std::string_view s, std::string_view what) {
    s = trim(s);
    long long v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
        throw InputError("cannot parse " + std::string(what) + " '" + std::string(s) +
                         "' as an integer");
    return v;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace bison
