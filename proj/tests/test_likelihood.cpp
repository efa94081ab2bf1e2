#include <gtest/gtest.h>

#include "phrasedef/likelihood.hpp"
#include "phrasedef/textio.hpp"
#include "support.hpp"

using namespace phrasedef;

namespace {

struct ContraryPair {
    PhraseFrequencyTable table = expected_phrase_frequencies(segment_clauses("in the contrary\non the contrary"), {});
    ContextIndex index = ContextIndex::build(table, 3, 0.5);
    DictionaryIndicator dictionary = DictionaryIndicator::from_phrases(std::vector<std::string>{"on the contrary"});
};

double context_score(const ContextIndex& index, const ContextScores& scores, const std::string& key) {
    if (key == "* * *") return scores.all_star;
    const auto id = index.find_context(key);
    if (!id) throw std::runtime_error("no context " + key);
    return scores.by_context[*id];
}

std::map<std::string, double> as_map(const PhraseFrequencyTable& table, int length) {
    std::map<std::string, double> out;
    for (const auto& [k, f] : table.phrases(length)) out[k] = f;
    return out;
}

std::vector<std::uint8_t> random_labels(std::mt19937_64& rng, std::size_t n, double p) {
    std::bernoulli_distribution coin(p);
    std::vector<std::uint8_t> labels(n);
    for (auto& l : labels) l = coin(rng) ? 1 : 0;
    return labels;
}

}  // namespace

TEST(ContextLikelihood, ContraryPairContextScores) {
    ContraryPair fig;
    const auto scores = context_likelihood(fig.index, fig.dictionary);
    const std::map<std::string, double> expected{
        {"* the contrary", 0.5}, {"* * contrary", 0.5}, {"* * *", 0.5},     {"on * *", 1.0},    {"on * contrary", 1.0},
        {"on the *", 1.0},       {"in * *", 0.0},       {"in * contrary", 0.0}, {"in the *", 0.0}};
    for (const auto& [key, value] : expected) EXPECT_NEAR(context_score(fig.index, scores, key), value, 1e-12) << key;
}

TEST(PhraseLikelihood, ContraryPairPhraseScores) {
    ContraryPair fig;
    const auto table = score_phrases(fig.index, fig.dictionary);
    const auto in_id = *fig.index.find_phrase("in the contrary");
    const auto on_id = *fig.index.find_phrase("on the contrary");
    EXPECT_NEAR(table.phrase_scores[in_id], 7.0 / 24, 1e-12);
    EXPECT_NEAR(table.phrase_scores[on_id], 17.0 / 24, 1e-12);
    EXPECT_NEAR(mean_phrase_likelihood(fig.index, table.phrase_scores), 0.5, 1e-12);
    EXPECT_NEAR(expected_definition(fig.index, table.defined), 0.5, 1e-12);
}

TEST(PhraseLikelihood, RejectsScoresFromAnotherQ) {
    ContraryPair fig;
    const auto scores = context_likelihood(fig.index, fig.dictionary);
    EXPECT_THROW(phrase_likelihood(fig.index, scores, 0.3), ConfigMismatch);
    const auto other = ContextIndex::build(fig.table, 3, 0.3);
    EXPECT_THROW(phrase_likelihood(other, scores, 0.3), ConfigMismatch);
    const auto longer = ContextIndex::build(fig.table, 2, 0.5);
    EXPECT_THROW(phrase_likelihood(longer, scores, 0.5), ConfigMismatch);
}

TEST(PhraseLikelihood, ParamsHashTracksLabels) {
    ContraryPair fig;
    const auto a = context_likelihood(fig.index, fig.dictionary);
    const auto b = context_likelihood(fig.index, DictionaryIndicator::from_phrases(std::vector<std::string>{"x"}));
    EXPECT_NE(a.params_hash, b.params_hash);
    EXPECT_EQ(a.params_hash, context_likelihood(fig.index, fig.dictionary).params_hash);
}

TEST(PhraseLikelihood, MatchesBruteForceOracle) {
    std::mt19937_64 rng(31);
    for (double q : {0.1, 0.5, 0.9}) {
        PartitionParams params;
        params.q = q;
        const auto table = expected_phrase_frequencies(oracle::random_corpus(rng, 150, 8, 7), params);
        for (int len = 2; len <= 4; ++len) {
            const auto index = ContextIndex::build(table, len, q);
            const auto labels = random_labels(rng, index.phrase_count(), 0.3);
            std::map<std::string, int> named;
            for (ContextIndex::PhraseId p = 0; p < index.phrase_count(); ++p) named[index.phrase(p)] = labels[p];
            const auto expected = oracle::likelihood(as_map(table, len), named, len, q);
            const auto ctx = context_likelihood(index, labels, 1);
            for (ContextIndex::ContextId c = 0; c < index.context_count(); ++c) {
                EXPECT_NEAR(ctx.by_context[c], expected.contexts.at(index.key(c)), 1e-12);
            }
            const auto scores = phrase_likelihood(index, ctx, q);
            for (ContextIndex::PhraseId p = 0; p < index.phrase_count(); ++p) {
                EXPECT_NEAR(scores[p], expected.phrases.at(index.phrase(p)), 1e-12) << index.phrase(p);
            }
        }
    }
}

TEST(PhraseLikelihood, GlobalIdentityOnRandomCorpora) {
    std::mt19937_64 rng(37);
    for (int trial = 0; trial < 20; ++trial) {
        const double q = std::array{0.1, 0.5, 0.9}[trial % 3];
        PartitionParams params;
        params.q = q;
        const auto table = expected_phrase_frequencies(oracle::random_corpus(rng, 100, 10, 8), params);
        for (int len = 2; len <= 5; ++len) {
            const auto index = ContextIndex::build(table, len, q);
            const auto labels = random_labels(rng, index.phrase_count(), 0.4);
            const auto scores = phrase_likelihood(index, context_likelihood(index, labels, 0), q);
            EXPECT_TRUE(oracle::close(mean_phrase_likelihood(index, scores), expected_definition(index, labels), 1e-9));
            for (double s : scores) {
                EXPECT_GE(s, 0.0);
                EXPECT_LE(s, 1.0);
            }
        }
    }
}

TEST(PhraseLikelihood, AllDefinedAndAllUndefinedAreExact) {
    std::mt19937_64 rng(41);
    const auto table = expected_phrase_frequencies(oracle::random_corpus(rng, 200, 9, 7), {});
    for (int len = 2; len <= 4; ++len) {
        const auto index = ContextIndex::build(table, len, 0.5);
        const std::vector<std::uint8_t> ones(index.phrase_count(), 1);
        const std::vector<std::uint8_t> zeros(index.phrase_count(), 0);
        for (double s : phrase_likelihood(index, context_likelihood(index, ones, 0), 0.5)) EXPECT_EQ(s, 1.0);
        for (double s : phrase_likelihood(index, context_likelihood(index, zeros, 0), 0.5)) EXPECT_EQ(s, 0.0);
    }
}

TEST(PhraseLikelihood, IsolatedUndefinedNeighbourhoodScoresZero) {
    PhraseFrequencyTable table(3);
    table.add_phrase("a b c", 3, 1.0);
    table.add_phrase("a b d", 3, 1.0);
    const auto index = ContextIndex::build(table, 3, 0.5);
    const std::vector<std::uint8_t> none(2, 0);
    const auto scores = phrase_likelihood(index, context_likelihood(index, none, 0), 0.5);
    EXPECT_EQ(scores[0], 0.0);
    EXPECT_EQ(scores[1], 0.0);
    // a context holding only undefined phrases scores 0 even when others are defined
    const std::vector<std::uint8_t> one{1, 0};
    const auto ctx = context_likelihood(index, one, 0);
    EXPECT_EQ(ctx.by_context[*index.find_context("a b *")], 0.5);
    EXPECT_EQ(ctx.by_context[*index.find_context("* * d")], 0.0);
}

TEST(PhraseLikelihood, AddingADefinedMateNeverLowersScores) {
    std::mt19937_64 rng(43);
    const auto table = expected_phrase_frequencies(oracle::random_corpus(rng, 300, 10, 7), {});
    const auto index = ContextIndex::build(table, 3, 0.5);
    auto labels = random_labels(rng, index.phrase_count(), 0.2);
    auto before = phrase_likelihood(index, context_likelihood(index, labels, 0), 0.5);
    for (int step = 0; step < 25; ++step) {
        std::vector<std::size_t> undefined;
        for (std::size_t p = 0; p < labels.size(); ++p) {
            if (!labels[p]) undefined.push_back(p);
        }
        if (undefined.empty()) break;
        labels[undefined[rng() % undefined.size()]] = 1;
        const auto after = phrase_likelihood(index, context_likelihood(index, labels, 0), 0.5);
        for (std::size_t p = 0; p < after.size(); ++p) EXPECT_GE(after[p], before[p] - 1e-15);
        before = after;
    }
}

TEST(PhraseLikelihood, ScaleInvariance) {
    std::mt19937_64 rng(47);
    const auto corpus = oracle::random_corpus(rng, 200, 9, 7);
    const auto table = expected_phrase_frequencies(corpus, {});
    PhraseFrequencyTable scaled(table.max_len());
    for (int len = 1; len <= table.max_len(); ++len) {
        for (const auto& [k, f] : table.phrases(len)) scaled.add_phrase(k, len, f * 8.0);  // exact in binary
    }
    const auto a = ContextIndex::build(table, 3, 0.5);
    const auto b = ContextIndex::build(scaled, 3, 0.5);
    const auto labels = random_labels(rng, a.phrase_count(), 0.3);
    const auto ca = context_likelihood(a, labels, 0);
    const auto cb = context_likelihood(b, labels, 0);
    EXPECT_EQ(ca.by_context, cb.by_context);
    EXPECT_EQ(ca.all_star, cb.all_star);
    const auto sa = phrase_likelihood(a, ca, 0.5);
    const auto sb = phrase_likelihood(b, cb, 0.5);
    EXPECT_EQ(sa, sb);

    const auto d = DictionaryIndicator::from_phrases(std::vector<std::string>{std::string(a.phrase(0))});
    const auto ra = score_rows(a, score_phrases(a, d));
    const auto rb = score_rows(b, score_phrases(b, d));
    const auto la = double_sort_shortlist(ra, 50, 10);
    const auto lb = double_sort_shortlist(rb, 50, 10);
    ASSERT_EQ(la.entries.size(), lb.entries.size());
    for (std::size_t k = 0; k < la.entries.size(); ++k) EXPECT_EQ(la.entries[k].phrase, lb.entries[k].phrase);
}

TEST(Shortlist, ContraryPair) {
    ContraryPair fig;
    const auto rows = score_rows(fig.index, score_phrases(fig.index, fig.dictionary));
    const auto list = double_sort_shortlist(rows, 2, 1);
    ASSERT_EQ(list.entries.size(), 1u);
    EXPECT_EQ(list.entries[0].rank, 1u);
    EXPECT_EQ(list.entries[0].phrase, "in the contrary");
    EXPECT_NEAR(list.entries[0].likelihood, 7.0 / 24, 1e-12);
    EXPECT_FALSE(list.entries[0].defined);
    EXPECT_FALSE(list.truncated);

    const auto baseline = frequency_shortlist(fig.table, fig.dictionary, 3, 1);
    ASSERT_EQ(baseline.entries.size(), 1u);
    EXPECT_EQ(baseline.entries[0].phrase, "in the contrary");
}

TEST(Shortlist, AllDefinedGivesEmptyTruncatedList) {
    const std::vector<ScoreRow> rows{{"a b", 2, 3.0, 0.9, true}, {"c d", 2, 2.0, 0.8, true}};
    const auto list = double_sort_shortlist(rows, 2, 1);
    EXPECT_TRUE(list.entries.empty());
    EXPECT_TRUE(list.truncated);
    EXPECT_TRUE(frequency_shortlist(std::vector<ScoreRow>{}, 3).entries.empty());
}

TEST(Shortlist, TieBreaks) {
    const std::vector<ScoreRow> rows{{"b x", 2, 1.0, 0.5, false},
                                     {"a x", 2, 1.0, 0.5, false},
                                     {"c x", 2, 2.0, 0.5, false},
                                     {"d x", 2, 0.5, 0.7, false}};
    const auto list = double_sort_shortlist(rows, 4, 4);
    std::vector<std::string> got;
    for (const auto& e : list.entries) got.push_back(e.phrase);
    EXPECT_EQ(got, (std::vector<std::string>{"d x", "c x", "a x", "b x"}));
}

TEST(Shortlist, FrequencyCutComesFirst) {
    // The most likely phrase is outside the top-2 by frequency, so it is never seen.
    const std::vector<ScoreRow> rows{{"a a", 2, 5.0, 0.1, false}, {"b b", 2, 4.0, 0.2, false}, {"c c", 2, 1.0, 0.9, false}};
    const auto list = double_sort_shortlist(rows, 2, 2);
    ASSERT_EQ(list.entries.size(), 2u);
    EXPECT_EQ(list.entries[0].phrase, "b b");
    EXPECT_EQ(list.entries[1].phrase, "a a");
    EXPECT_THROW(double_sort_shortlist(rows, 1, 2), std::invalid_argument);
}

TEST(Shortlist, FrequencyBaselinePutsCommonPhrasesFirst) {
    const auto table = expected_phrase_frequencies(
        segment_clauses("in the house\nin the garden\nin the end\nof the day\nin the"), {});
    const auto d = DictionaryIndicator::from_phrases(std::vector<std::string>{"the end"});
    const auto list = frequency_shortlist(table, d, 2, 3);
    ASSERT_FALSE(list.entries.empty());
    EXPECT_EQ(list.entries[0].phrase, "in the");
    EXPECT_TRUE(std::isnan(list.entries[0].likelihood));
}
