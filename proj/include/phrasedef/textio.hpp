#pragma once

#include <functional>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "phrasedef/common.hpp"

namespace phrasedef {

/// Character classes that drive tokenization. Both sets hold Unicode code points.
struct TextConfig {
    std::unordered_set<char32_t> delimiters;
    std::unordered_set<char32_t> strip;

    /// `. , ; : ! ? " ( )` and newline.
    static std::unordered_set<char32_t> default_delimiters();
    /// ASCII punctuation except `#`, `@` and `_`, plus common typographic quotes,
    /// dashes and the ellipsis.
    static std::unordered_set<char32_t> default_strip();
    static TextConfig defaults();
    /// Delimiter set from a UTF-8 string; the two-character escapes `\n` and `\t`
    /// are recognised.
    static std::unordered_set<char32_t> parse_delimiters(std::string_view chars);
};

/// Decodes UTF-8, replacing each invalid or truncated sequence with U+FFFD.
std::u32string decode_utf8(std::string_view bytes);
void append_utf8(std::string& out, char32_t cp);
std::string encode_utf8(std::u32string_view cps);

bool is_unicode_space(char32_t cp);
/// Simple case folding for ASCII, Latin-1, Latin Extended-A, Greek and Cyrillic.
char32_t to_lower(char32_t cp);

/// Lowercases and strips strip-set characters from both ends. Returns nullopt when
/// nothing is left.
std::optional<Token> normalize_token(std::string_view raw, const TextConfig& config);
std::optional<Token> normalize_token(std::string_view raw);

/// Incremental clause segmenter. Text may be fed in pieces as long as every piece
/// ends on a code-point boundary; a clause still open at the end of one piece
/// continues into the next.
class ClauseSegmenter {
public:
    using Sink = std::function<void(Clause&&)>;

    explicit ClauseSegmenter(TextConfig config = TextConfig::defaults());

    void feed(std::string_view text, const Sink& sink);
    /// Flushes the trailing clause, if any.
    void finish(const Sink& sink);

private:
    void end_token();
    void end_clause(const Sink& sink);

    TextConfig m_config;
    std::string m_raw;
    Clause m_current;
};

std::vector<Clause> segment_clauses(std::string_view text, const TextConfig& config);
std::vector<Clause> segment_clauses(std::string_view text);

/// Streams `in` line by line through a segmenter.
void read_clauses(std::istream& in, const TextConfig& config, const ClauseSegmenter::Sink& sink);

}  // namespace phrasedef
