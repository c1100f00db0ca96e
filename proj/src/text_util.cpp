#include "granuscore/text_util.hpp"

#include <cctype>

namespace granuscore {

static bool is_space(unsigned char c) { return std::isspace(c) != 0; }

std::string trim(const std::string& s) {
    size_t b = 0;
    size_t e = s.size();
    while (b < e && is_space(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && is_space(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

std::string ascii_lower(const std::string& s) {
    std::string out = s;
    for (char& c : out) {
        unsigned char u = static_cast<unsigned char>(c);
        if (u < 0x80) c = static_cast<char>(std::tolower(u));
    }
    return out;
}

std::string normalize_key(const std::string& s) {
    std::string t = ascii_lower(trim(s));
    std::string out;
    out.reserve(t.size());
    bool in_ws = false;
    for (char c : t) {
        if (is_space(static_cast<unsigned char>(c))) {
            in_ws = true;
            continue;
        }
        if (in_ws && !out.empty()) out.push_back(' ');
        in_ws = false;
        out.push_back(c);
    }
    return out;
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    size_t start = 0;
    for (size_t i = 0; i <= s.size(); ++i) {
        if (i == s.size() || s[i] == sep) {
            out.push_back(s.substr(start, i - start));
            start = i + 1;
        }
    }
    return out;
}

size_t whitespace_token_count(const std::string& s) {
    size_t n = 0;
    bool in_tok = false;
    for (char c : s) {
        bool ws = is_space(static_cast<unsigned char>(c));
        if (!ws && !in_tok) ++n;
        in_tok = !ws;
    }
    return n;
}

} // namespace granuscore
