#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "phrasedef/context.hpp"
#include "phrasedef/lexicon.hpp"

namespace phrasedef {

/// D-bar(c|S) for every context of one index: the frequency-weighted share of defined
/// phrases among the context's members, the scored phrase itself included.
struct ContextScores {
    int length = 0;
    double q = 0.0;
    /// ContextIndex::params_hash of the index the scores came from.
    std::uint64_t index_hash = 0;
    /// Digest of (q, length, labels).
    std::uint64_t params_hash = 0;
    std::vector<double> by_context;
    /// Score of the all-star context, which equals D-bar(S).
    double all_star = 0.0;
};

/// D(s) for every phrase of the index, from exact lookups of the phrase keys.
std::vector<std::uint8_t> dictionary_labels(const ContextIndex& index, const DictionaryIndicator& dictionary);

/// `label_identity` distinguishes label sets in params_hash (lexicon identity, fold number...).
ContextScores context_likelihood(const ContextIndex& index, std::span<const std::uint8_t> labels,
                                 std::uint64_t label_identity);
ContextScores context_likelihood(const ContextIndex& index, const DictionaryIndicator& dictionary);

/// D-bar(C|s) = sum over contexts of P(c|s) D-bar(c|S), for every phrase of the index.
/// Throws ConfigMismatch when the scores were computed on a different index or q.
std::vector<double> phrase_likelihood(const ContextIndex& index, const ContextScores& scores, double q);

/// Everything the scoring stage produces for one phrase length.
struct LikelihoodTable {
    int length = 0;
    std::uint64_t params_hash = 0;
    ContextScores contexts;
    std::vector<double> phrase_scores;
    std::vector<std::uint8_t> defined;
};

LikelihoodTable score_phrases(const ContextIndex& index, const DictionaryIndicator& dictionary);

/// D-bar(S) = sum over phrases of D(t) P(t).
double expected_definition(const ContextIndex& index, std::span<const std::uint8_t> labels);
/// Sum over phrases of P(s) D-bar(C|s). Equal to expected_definition by construction.
double mean_phrase_likelihood(const ContextIndex& index, std::span<const double> phrase_scores);

/// One scored phrase, as persisted by the scoring stage.
struct ScoreRow {
    std::string phrase;
    int length = 0;
    double frequency = 0.0;
    double likelihood = 0.0;
    bool defined = false;
};

std::vector<ScoreRow> score_rows(const ContextIndex& index, const LikelihoodTable& table);

/// Frequency descending, then phrase ascending.
bool frequency_before(const ScoreRow& a, const ScoreRow& b);
/// Likelihood descending, then frequency descending, then phrase ascending.
bool likelihood_before(const ScoreRow& a, const ScoreRow& b);

struct ShortlistEntry {
    std::size_t rank = 0;
    std::string phrase;
    double frequency = 0.0;
    double likelihood = 0.0;
    bool defined = false;
};

struct Shortlist {
    std::vector<ShortlistEntry> entries;
    /// Fewer than k undefined phrases were available.
    bool truncated = false;
};

/// Top `top_n` rows by frequency, re-ranked by likelihood, undefined only, first `k`.
/// Requires top_n >= k >= 1.
Shortlist double_sort_shortlist(std::span<const ScoreRow> rows, std::size_t top_n, std::size_t k);
/// Frequency-only baseline with the same tie-breaks and the same D = 0 filter.
Shortlist frequency_shortlist(std::span<const ScoreRow> rows, std::size_t k);
/// Baseline straight from a frequency table; likelihood is reported as NaN.
Shortlist frequency_shortlist(const PhraseFrequencyTable& table, const DictionaryIndicator& dictionary, int length,
                              std::size_t k);

}  // namespace phrasedef
