#include "phrasedef/common.hpp"

#include <bit>
#include <charconv>
#include <cstdio>

namespace phrasedef {

std::string join_tokens(std::span<const Token> tokens) {
    std::string out;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (i) out.push_back(' ');
        out += tokens[i];
    }
    return out;
}

std::vector<Token> split_tokens(std::string_view key) {
    std::vector<Token> out;
    std::size_t start = 0;
    while (start <= key.size()) {
        const std::size_t space = key.find(' ', start);
        const std::size_t stop = space == std::string_view::npos ? key.size() : space;
        if (stop > start) out.emplace_back(key.substr(start, stop - start));
        if (space == std::string_view::npos) break;
        start = space + 1;
    }
    return out;
}

int key_length(std::string_view key) {
    if (key.empty()) return 0;
    int n = 1;
    for (char c : key) n += (c == ' ');
    return n;
}

Fnv1a& Fnv1a::add(std::string_view bytes) {
    for (char c : bytes) {
        m_state ^= static_cast<unsigned char>(c);
        m_state *= 0x100000001b3ull;
    }
    // Length terminator so ("ab","c") and ("a","bc") differ.
    return add(static_cast<std::uint64_t>(bytes.size()));
}

Fnv1a& Fnv1a::add(std::uint64_t value) {
    for (int i = 0; i < 8; ++i) {
        m_state ^= (value >> (8 * i)) & 0xff;
        m_state *= 0x100000001b3ull;
    }
    return *this;
}

Fnv1a& Fnv1a::add(double value) {
    return add(std::bit_cast<std::uint64_t>(value));
}

std::string hex_digest(std::uint64_t value) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(value));
    return buf;
}

std::string format_real(double value, int digits) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::general, digits);
    if (ec != std::errc{}) return std::to_string(value);
    return std::string(buf, ptr);
}

}  // namespace phrasedef
