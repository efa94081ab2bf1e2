#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "phrasedef/partition.hpp"

namespace phrasedef {

/// Lexicon-side phrase normalization: underscores become spaces, each word goes through
/// normalize_token, empty words are dropped and the rest are joined by single spaces.
/// Idempotent, and a no-op on phrases produced by the clause segmenter.
std::string normalize_phrase(std::string_view text);

/// Binary dictionary indicator D over normalized phrase keys.
class DictionaryIndicator {
public:
    DictionaryIndicator() = default;

    /// Reads `phrase` or `phrase<TAB>redirect` lines; redirects count as entries.
    /// Throws Error when the file cannot be read. An empty result only warns.
    static DictionaryIndicator load(const std::filesystem::path& path);

    template <typename Range>
    static DictionaryIndicator from_phrases(const Range& phrases, std::string source = "inline") {
        DictionaryIndicator d;
        d.m_source = std::move(source);
        for (const auto& phrase : phrases) d.insert(phrase);
        return d;
    }

    /// Normalizes `phrase`, then tests membership.
    bool contains(std::string_view phrase) const;
    /// Exact lookup for keys that are already normalized (segmenter output).
    bool contains_key(std::string_view key) const { return m_defined.contains(key); }
    int operator()(std::string_view phrase) const { return contains(phrase) ? 1 : 0; }

    std::size_t size() const { return m_defined.size(); }
    const std::string& source() const { return m_source; }
    /// Order-independent digest of the defined set.
    std::uint64_t identity() const;
    /// Defined phrases, sorted.
    std::vector<std::string> sorted() const;

    void insert(std::string_view phrase);

private:
    std::unordered_set<std::string, StringHash, std::equal_to<>> m_defined;
    std::string m_source;
};

}  // namespace phrasedef
