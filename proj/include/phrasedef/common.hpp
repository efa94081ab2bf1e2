#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace phrasedef {

/// Lowercased, whitespace-free word.
using Token = std::string;
/// Maximal token run between clause delimiters.
using Clause = std::vector<Token>;
/// Ordered token sequence; the unit that gets counted, contextualized and scored.
using Phrase = std::vector<Token>;

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An upstream artifact a stage depends on is not on disk.
class MissingArtifact : public Error {
public:
    using Error::Error;
};

/// Parameters recorded with an artifact disagree with the ones requested.
class ConfigMismatch : public Error {
public:
    using Error::Error;
};

/// Space-joined phrase key.
std::string join_tokens(std::span<const Token> tokens);
std::vector<Token> split_tokens(std::string_view key);
/// Number of tokens in a space-joined key.
int key_length(std::string_view key);

/// 64-bit FNV-1a, used for parameter digests that must be stable across platforms.
class Fnv1a {
public:
    Fnv1a& add(std::string_view bytes);
    Fnv1a& add(std::uint64_t value);
    Fnv1a& add(double value);
    std::uint64_t value() const { return m_state; }

private:
    std::uint64_t m_state = 0xcbf29ce484222325ull;
};

std::string hex_digest(std::uint64_t value);

/// Formats with `digits` significant digits in %g style.
std::string format_real(double value, int digits);

}  // namespace phrasedef
