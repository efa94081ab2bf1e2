#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "phrasedef/common.hpp"
#include "phrasedef/partition.hpp"

namespace phrasedef {

/// Star pattern left after removing words gap_start..gap_end (1-based, inclusive) from a
/// phrase of `length` words. `fixed` holds the surviving words in order.
struct Context {
    int length = 0;
    int gap_start = 0;
    int gap_end = 0;
    std::vector<Token> fixed;

    bool operator==(const Context&) const = default;
    auto operator<=>(const Context&) const = default;
};

Context make_context(std::span<const Token> phrase, int gap_start, int gap_end);

/// Canonical rendering: space-joined words with `*` at removed positions. Literal `*`
/// and `\` inside words are written as `\*` and `\\`.
std::string context_key(const Context& context);
/// Inverse of context_key. Throws Error on a malformed key (no star, or stars that are
/// not one contiguous run).
Context parse_context_key(std::string_view key);

/// P(c_ij | s) = (j-i+1)/len * P_q(s_ij | s).
double context_weight(int length, int gap_start, int gap_end, double q);

struct WeightedContext {
    Context context;
    double weight = 0.0;
};

/// Every internal context of `phrase`, ordered by removed length and then by gap start
/// (the column order of the usual context table). The all-star context comes last.
std::vector<WeightedContext> enumerate_contexts(std::span<const Token> phrase, double q);

/// Number of contexts of a phrase of `length` words, all-star included.
constexpr std::size_t context_count(int length) {
    return static_cast<std::size_t>(length) * (length + 1) / 2;
}

/// Gap of the k-th context slot in enumerate_contexts order.
std::pair<int, int> context_slot_gap(int length, std::size_t slot);
std::size_t context_slot(int length, int gap_start, int gap_end);

/// Inverted index from contexts to the same-length phrases that share them.
///
/// Phrases are stored sorted by key and addressed by dense ids. Each context is stored as
/// its gap plus a representative phrase, so its words are never copied. Postings hold
/// phrase ids only; the joint weight f(c,s) = P(c|s) f(s) is recomputed on demand.
/// The all-star context links every phrase of the length and is kept as an aggregate.
class ContextIndex {
public:
    using PhraseId = std::uint32_t;
    using ContextId = std::uint32_t;

    struct Posting {
        PhraseId phrase;
        double joint_weight;
    };

    ContextIndex() = default;

    /// Builds the index for one phrase length. Phrases with f(s) = 0 are skipped.
    static ContextIndex build(const PhraseFrequencyTable& table, int length, double q, unsigned threads = 1);

    /// Context groups in compressed form: group g has gap gaps[g] and members
    /// members[offsets[g] .. offsets[g+1]).
    struct Groups {
        std::vector<std::pair<std::uint8_t, std::uint8_t>> gaps;
        std::vector<std::uint64_t> offsets{0};
        std::vector<PhraseId> members;

        void open(int gap_start, int gap_end);
        void add(PhraseId phrase);
        std::size_t size() const { return gaps.size(); }
    };

    /// Assembles an index from explicit context groups, e.g. when reading a persisted
    /// index. `phrases` must be sorted and unique; every group lists phrase ids whose
    /// rendering under the group's gap equals the group's key. Throws Error when a
    /// phrase does not end up with exactly one context per slot.
    static ContextIndex assemble(int length, double q, std::vector<std::string> phrases,
                                 std::vector<double> frequencies, Groups groups);

    int length() const { return m_length; }
    double q() const { return m_q; }
    /// Digest of (q, length); likelihood tables built on this index carry it.
    std::uint64_t params_hash() const;

    std::size_t phrase_count() const { return m_phrases.size(); }
    const std::string& phrase(PhraseId id) const { return m_phrases[id]; }
    double frequency(PhraseId id) const { return m_frequencies[id]; }
    std::span<const std::string> phrases() const { return m_phrases; }
    std::span<const double> frequencies() const { return m_frequencies; }
    std::optional<PhraseId> find_phrase(std::string_view key) const;

    /// Contexts excluding the all-star aggregate.
    std::size_t context_count() const { return m_contexts.size(); }
    Context context(ContextId id) const;
    std::string key(ContextId id) const;
    std::pair<int, int> gap(ContextId id) const { return {m_contexts[id].gap_start, m_contexts[id].gap_end}; }
    std::span<const PhraseId> members(ContextId id) const;
    /// Members with their joint weights.
    std::vector<Posting> postings(ContextId id) const;
    double joint_weight(ContextId id, PhraseId phrase) const;
    /// Linear scan; meant for inspection and tests.
    std::optional<ContextId> find_context(std::string_view key) const;
    /// Context ids ordered by rendered key, as written to disk.
    std::vector<ContextId> contexts_by_key() const;

    /// Non-aggregate contexts of a phrase, in slot order (all-star excluded).
    std::span<const ContextId> contexts_of(PhraseId phrase) const;
    /// Non-aggregate context slots per phrase: len(len+1)/2 - 1.
    std::size_t slots_per_phrase() const { return m_slots; }

    /// Weight of the all-star context for any phrase of this length: (1-q)^(len-1).
    double all_star_weight() const;
    /// Sum over phrases of their all-star joint weight.
    double all_star_mass() const;
    /// Sum over contexts (all-star included) of f(c,s) for one phrase. Equals f(s).
    double joint_mass(PhraseId phrase) const;
    /// Sum over all phrases and contexts of f(c,s): the joint normalizer.
    double total_mass() const;
    /// Sum over member postings of f(c,s) for one context.
    double context_mass(ContextId id) const;

private:
    struct ContextRef {
        PhraseId representative;
        std::uint8_t gap_start;
        std::uint8_t gap_end;
    };

    int m_length = 0;
    double m_q = 0.5;
    std::size_t m_slots = 0;
    std::vector<std::string> m_phrases;
    std::vector<double> m_frequencies;
    std::vector<ContextRef> m_contexts;
    std::vector<std::uint64_t> m_offsets{0};
    std::vector<PhraseId> m_members;
    // m_phrase_contexts[p * m_slots + k] is the context of phrase p in slot k.
    std::vector<ContextId> m_phrase_contexts;
    // P(c|s) per slot, all-star last.
    std::vector<double> m_slot_weights;
};

/// Word-level external context model: f(w, c) where c is a phrase with one position starred.
class WordContextModel {
public:
    /// Keyed by word, then by context key.
    using Map = std::map<std::string, std::map<std::string, double>>;

    const Map& entries() const { return m_entries; }
    double frequency(std::string_view word, std::string_view context) const;
    /// Sum over contexts of f(w, c).
    double marginal(std::string_view word) const;
    bool empty() const { return m_entries.empty(); }

    void add(const std::string& word, const std::string& context, double f) { m_entries[word][context] += f; }

private:
    Map m_entries;
};

/// For every phrase s and position p, adds f(s) to (word at p, s with p starred).
WordContextModel external_word_contexts(const PhraseFrequencyTable& table);

/// Sum over phrases of occurrences(w in s) * f(s), the page frequency the external model
/// must reproduce.
double phrase_word_frequency(const PhraseFrequencyTable& table, std::string_view word);

}  // namespace phrasedef
