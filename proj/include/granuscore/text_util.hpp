#pragma once

#include <string>
#include <vector>

namespace granuscore {

std::string trim(const std::string& s);

// ASCII lowercasing; multi-byte UTF-8 sequences pass through untouched.
std::string ascii_lower(const std::string& s);

// trim + ascii_lower + inner whitespace runs collapsed to single spaces.
std::string normalize_key(const std::string& s);

std::vector<std::string> split(const std::string& s, char sep);

size_t whitespace_token_count(const std::string& s);

} // namespace granuscore
