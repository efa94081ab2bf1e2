#include "phrasedef/likelihood.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace phrasedef {

std::vector<std::uint8_t> dictionary_labels(const ContextIndex& index, const DictionaryIndicator& dictionary) {
    std::vector<std::uint8_t> labels(index.phrase_count());
    for (std::size_t p = 0; p < labels.size(); ++p) {
        labels[p] = dictionary.contains_key(index.phrase(static_cast<ContextIndex::PhraseId>(p))) ? 1 : 0;
    }
    return labels;
}

ContextScores context_likelihood(const ContextIndex& index, std::span<const std::uint8_t> labels,
                                 std::uint64_t label_identity) {
    if (labels.size() != index.phrase_count()) {
        throw std::invalid_argument("label vector does not match the index");
    }
    ContextScores out;
    out.length = index.length();
    out.q = index.q();
    out.index_hash = index.params_hash();
    out.params_hash = Fnv1a{}.add(out.index_hash).add(label_identity).value();
    out.by_context.resize(index.context_count());
    const auto freq = index.frequencies();
    // Members of a context share one slot weight, so P(t|c) reduces to f(t) / sum f.
    for (std::size_t c = 0; c < index.context_count(); ++c) {
        double defined = 0.0;
        double total = 0.0;
        for (auto p : index.members(static_cast<ContextIndex::ContextId>(c))) {
            total += freq[p];
            if (labels[p]) defined += freq[p];
        }
        out.by_context[c] = total > 0.0 ? defined / total : 0.0;
    }
    out.all_star = expected_definition(index, labels);
    return out;
}

ContextScores context_likelihood(const ContextIndex& index, const DictionaryIndicator& dictionary) {
    return context_likelihood(index, dictionary_labels(index, dictionary), dictionary.identity());
}

std::vector<double> phrase_likelihood(const ContextIndex& index, const ContextScores& scores, double q) {
    if (scores.index_hash != index.params_hash() || scores.length != index.length()) {
        throw ConfigMismatch("context scores were computed on a different context index");
    }
    if (q != index.q() || q != scores.q) {
        throw ConfigMismatch("partition q " + format_real(q, 12) + " does not match the context index (q = " +
                             format_real(index.q(), 12) + ")");
    }
    if (scores.by_context.size() != index.context_count()) {
        throw ConfigMismatch("context score vector does not match the index");
    }
    const int len = index.length();
    std::vector<double> slot_weight(index.slots_per_phrase());
    for (std::size_t k = 0; k < slot_weight.size(); ++k) {
        auto [i, j] = context_slot_gap(len, k);
        slot_weight[k] = context_weight(len, i, j, q);
    }
    // The weights sum to one analytically. Dividing by their floating-point sum, taken in the
    // same order as the score sum, makes all-defined and all-undefined neighbourhoods come
    // out as exactly 1 and 0.
    double weight_total = 0.0;
    for (double w : slot_weight) weight_total += w;
    weight_total += index.all_star_weight();
    const double star = index.all_star_weight() * scores.all_star;
    std::vector<double> out(index.phrase_count());
    for (std::size_t p = 0; p < out.size(); ++p) {
        const auto contexts = index.contexts_of(static_cast<ContextIndex::PhraseId>(p));
        double sum = 0.0;
        for (std::size_t k = 0; k < contexts.size(); ++k) sum += slot_weight[k] * scores.by_context[contexts[k]];
        out[p] = std::clamp((sum + star) / weight_total, 0.0, 1.0);
    }
    return out;
}

LikelihoodTable score_phrases(const ContextIndex& index, const DictionaryIndicator& dictionary) {
    LikelihoodTable table;
    table.length = index.length();
    table.defined = dictionary_labels(index, dictionary);
    table.contexts = context_likelihood(index, table.defined, dictionary.identity());
    table.params_hash = table.contexts.params_hash;
    table.phrase_scores = phrase_likelihood(index, table.contexts, index.q());
    return table;
}

double expected_definition(const ContextIndex& index, std::span<const std::uint8_t> labels) {
    const auto freq = index.frequencies();
    double defined = 0.0;
    double total = 0.0;
    for (std::size_t p = 0; p < freq.size(); ++p) {
        total += freq[p];
        if (labels[p]) defined += freq[p];
    }
    return total > 0.0 ? defined / total : 0.0;
}

double mean_phrase_likelihood(const ContextIndex& index, std::span<const double> phrase_scores) {
    const auto freq = index.frequencies();
    double weighted = 0.0;
    double total = 0.0;
    for (std::size_t p = 0; p < freq.size(); ++p) {
        total += freq[p];
        weighted += freq[p] * phrase_scores[p];
    }
    return total > 0.0 ? weighted / total : 0.0;
}

std::vector<ScoreRow> score_rows(const ContextIndex& index, const LikelihoodTable& table) {
    std::vector<ScoreRow> rows;
    rows.reserve(index.phrase_count());
    for (std::size_t p = 0; p < index.phrase_count(); ++p) {
        const auto id = static_cast<ContextIndex::PhraseId>(p);
        rows.push_back({index.phrase(id), index.length(), index.frequency(id), table.phrase_scores[p],
                        table.defined[p] != 0});
    }
    return rows;
}

bool frequency_before(const ScoreRow& a, const ScoreRow& b) {
    if (a.frequency != b.frequency) return a.frequency > b.frequency;
    return a.phrase < b.phrase;
}

bool likelihood_before(const ScoreRow& a, const ScoreRow& b) {
    if (a.likelihood != b.likelihood) return a.likelihood > b.likelihood;
    return frequency_before(a, b);
}

namespace {

Shortlist take_undefined(const std::vector<const ScoreRow*>& ranked, std::size_t k) {
    Shortlist out;
    for (const ScoreRow* row : ranked) {
        if (out.entries.size() == k) break;
        if (row->defined) continue;
        out.entries.push_back({out.entries.size() + 1, row->phrase, row->frequency, row->likelihood, false});
    }
    out.truncated = out.entries.size() < k;
    return out;
}

std::vector<const ScoreRow*> by_frequency(std::span<const ScoreRow> rows) {
    std::vector<const ScoreRow*> ranked;
    ranked.reserve(rows.size());
    for (const ScoreRow& row : rows) ranked.push_back(&row);
    std::sort(ranked.begin(), ranked.end(), [](const ScoreRow* a, const ScoreRow* b) { return frequency_before(*a, *b); });
    return ranked;
}

}  // namespace

Shortlist double_sort_shortlist(std::span<const ScoreRow> rows, std::size_t top_n, std::size_t k) {
    if (k < 1 || top_n < k) throw std::invalid_argument("shortlist needs top_n >= k >= 1");
    std::vector<const ScoreRow*> ranked = by_frequency(rows);
    if (ranked.size() > top_n) ranked.resize(top_n);
    std::stable_sort(ranked.begin(), ranked.end(),
                     [](const ScoreRow* a, const ScoreRow* b) { return likelihood_before(*a, *b); });
    return take_undefined(ranked, k);
}

Shortlist frequency_shortlist(std::span<const ScoreRow> rows, std::size_t k) {
    if (k < 1) throw std::invalid_argument("shortlist needs k >= 1");
    return take_undefined(by_frequency(rows), k);
}

Shortlist frequency_shortlist(const PhraseFrequencyTable& table, const DictionaryIndicator& dictionary, int length,
                              std::size_t k) {
    std::vector<ScoreRow> rows;
    for (const auto& [key, f] : table.phrases(length)) {
        if (f <= 0.0) continue;
        rows.push_back({key, length, f, std::numeric_limits<double>::quiet_NaN(), dictionary.contains_key(key)});
    }
    return frequency_shortlist(rows, k);
}

}  // namespace phrasedef
