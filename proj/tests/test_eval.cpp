#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include "phrasedef/eval.hpp"
#include "phrasedef/likelihood.hpp"
#include "support.hpp"

using namespace phrasedef;
namespace fs = std::filesystem;

namespace {

std::vector<std::string> names(std::size_t n) {
    std::vector<std::string> out;
    for (std::size_t k = 0; k < n; ++k) out.push_back("p" + std::to_string(k));
    return out;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Phrase "t<k> a" for k < n with frequency n - k; returns the index and labels with
// every `stride`-th phrase defined.
struct Pool {
    ContextIndex index;
    std::vector<std::uint8_t> labels;
};

Pool make_pool(std::size_t n, std::size_t stride) {
    PhraseFrequencyTable table(2);
    for (std::size_t k = 0; k < n; ++k) table.add_phrase("t" + std::to_string(k) + " a", 2, static_cast<double>(n - k));
    Pool pool{ContextIndex::build(table, 2, 0.5), {}};
    pool.labels.resize(pool.index.phrase_count());
    for (std::size_t k = 0; k < n; ++k) {
        if (k % stride == 0) pool.labels[*pool.index.find_phrase("t" + std::to_string(k) + " a")] = 1;
    }
    return pool;
}

}  // namespace

TEST(KFold, SingletonFolds) {
    const auto plan = kfold_split(names(10), 10, 1);
    ASSERT_EQ(plan.folds.size(), 10u);
    for (const auto& fold : plan.folds) EXPECT_EQ(fold.size(), 1u);
}

TEST(KFold, BalancedDisjointCover) {
    const auto plan = kfold_split(names(23), 10, 5);
    std::multiset<std::size_t> sizes;
    std::set<std::string> seen;
    for (const auto& fold : plan.folds) {
        sizes.insert(fold.size());
        for (const auto& p : fold) EXPECT_TRUE(seen.insert(p).second);
    }
    EXPECT_EQ(sizes, (std::multiset<std::size_t>{3, 3, 3, 2, 2, 2, 2, 2, 2, 2}));
    EXPECT_EQ(seen.size(), 23u);
}

TEST(KFold, DeterministicAndOrderIndependent) {
    auto shuffled = names(40);
    std::reverse(shuffled.begin(), shuffled.end());
    EXPECT_EQ(kfold_split(names(40), 7, 99).folds, kfold_split(shuffled, 7, 99).folds);
    EXPECT_NE(kfold_split(names(40), 7, 99).folds, kfold_split(names(40), 7, 100).folds);
    EXPECT_THROW(kfold_split(names(3), 4, 0), std::invalid_argument);
}

TEST(RocAuc, HandValues) {
    EXPECT_DOUBLE_EQ(roc_auc(std::vector<RocPoint>{{0, 0, 0, 0}, {1, 1, 0, 0}, {2, 1, 1, 0}}), 1.0);
    EXPECT_DOUBLE_EQ(roc_auc(std::vector<RocPoint>{{0, 0, 0, 0}, {1, 1, 1, 0}}), 0.5);
    EXPECT_DOUBLE_EQ(roc_auc(std::vector<RocPoint>{{0, 0, 0, 0}, {1, 0.25, 0.5, 0}, {2, 1, 1, 0}}), 0.375);
    EXPECT_DOUBLE_EQ(roc_auc(std::vector<RocPoint>{{1, 0.25, 0.5, 0}}), 0.375);  // endpoints added
    EXPECT_THROW(roc_auc(std::vector<RocPoint>{{0, 0, 0.5, 0}, {1, 1, 0.2, 0}}), std::invalid_argument);
}

TEST(RankingAuc, EqualsTrapezoidOfFullRoc) {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 50; ++trial) {
        RankedLabels ranked(2 + rng() % 60);
        for (auto& l : ranked) l = rng() % 3 == 0;
        ranked.front() = 1;
        ranked.back() = 0;
        EXPECT_NEAR(ranking_auc(ranked), roc_auc(full_roc(ranked)), 1e-12);
    }
    EXPECT_EQ(ranking_auc({1, 1, 0, 0, 0}), 1.0);
    EXPECT_EQ(ranking_auc({0, 0, 1, 1}), 0.0);
    EXPECT_THROW(ranking_auc({1, 1}), std::invalid_argument);
}

TEST(Cutoffs, LogSpacedDistinctWithEndpoints) {
    const auto c = log_spaced_cutoffs(10000, 1000);
    EXPECT_EQ(c.front(), 1u);
    EXPECT_EQ(c.back(), 10000u);
    EXPECT_LE(c.size(), 1000u);
    for (std::size_t k = 1; k < c.size(); ++k) EXPECT_LT(c[k - 1], c[k]);
    EXPECT_EQ(log_spaced_cutoffs(5, 1000), (std::vector<std::size_t>{1, 2, 3, 4, 5}));
    EXPECT_EQ(log_spaced_cutoffs(1, 10), (std::vector<std::size_t>{1}));
    EXPECT_TRUE(log_spaced_cutoffs(0, 10).empty());
}

TEST(AverageRoc, MonotoneAndTerminal) {
    const std::vector<RankedLabels> folds{{1, 0, 1, 0, 0}, {0, 1, 0, 0, 1, 0}};
    const auto cutoffs = log_spaced_cutoffs(6, 100);
    const auto roc = average_roc(folds, cutoffs);
    for (std::size_t k = 1; k < roc.size(); ++k) {
        EXPECT_GE(roc[k].tpr, roc[k - 1].tpr);
        EXPECT_GE(roc[k].fpr, roc[k - 1].fpr);
    }
    EXPECT_EQ(roc.back().tpr, 1.0);
    EXPECT_EQ(roc.back().fpr, 1.0);
    EXPECT_DOUBLE_EQ(mean_discovered(folds, 2), 1.0);
    EXPECT_DOUBLE_EQ(roc[1].discovered, 1.0);
}

TEST(CrossVal, OracleAndInvertedOracle) {
    const Pool pool = make_pool(500, 5);
    CrossValParams params;
    params.top_n = 500;
    params.seed = 3;
    const FoldScorer oracle_scorer = [&](std::span<const std::uint8_t>, std::size_t) {
        std::vector<double> s(pool.labels.begin(), pool.labels.end());
        return s;
    };
    const auto best = run_crossval(pool.index, pool.labels, params, oracle_scorer);
    EXPECT_EQ(best.likelihood.auc, 1.0);
    EXPECT_EQ(best.pool_size, 500u);
    EXPECT_EQ(best.defined_in_pool, 100u);
    const FoldScorer inverted = [&](std::span<const std::uint8_t>, std::size_t) {
        std::vector<double> s(pool.labels.size());
        for (std::size_t p = 0; p < s.size(); ++p) s[p] = pool.labels[p] ? 0.0 : 1.0;
        return s;
    };
    EXPECT_EQ(run_crossval(pool.index, pool.labels, params, inverted).likelihood.auc, 0.0);
    // frequency ranking: defined phrases sit at every fifth rank
    EXPECT_GT(best.frequency.auc, 0.4);
    EXPECT_LT(best.frequency.auc, 0.6);
}

TEST(CrossVal, TrainingLabelsWithholdTheFold) {
    const Pool pool = make_pool(100, 4);
    CrossValParams params;
    params.top_n = 100;
    params.folds = 5;
    std::vector<std::size_t> withheld_counts(params.folds);
    const FoldScorer check = [&](std::span<const std::uint8_t> training, std::size_t fold) {
        std::size_t hidden = 0;
        for (std::size_t p = 0; p < training.size(); ++p) hidden += pool.labels[p] && !training[p];
        withheld_counts[fold] = hidden;
        return std::vector<double>(training.size(), 0.0);
    };
    run_crossval(pool.index, pool.labels, params, check);
    for (auto n : withheld_counts) EXPECT_EQ(n, 5u);
}

TEST(CrossVal, RandomScorerIsNearHalf) {
    const Pool pool = make_pool(1000, 4);
    CrossValParams params;
    params.top_n = 1000;
    double mean = 0.0;
    for (int trial = 0; trial < 30; ++trial) {
        std::mt19937_64 rng(1000 + trial);
        const FoldScorer random = [&](std::span<const std::uint8_t> training, std::size_t) {
            std::vector<double> s(training.size());
            for (auto& v : s) v = unit_uniform(rng);
            return s;
        };
        mean += run_crossval(pool.index, pool.labels, params, random).likelihood.auc / 30;
    }
    EXPECT_NEAR(mean, 0.5, 0.05);
}

TEST(CrossVal, DegeneratePools) {
    const Pool few = make_pool(30, 10);  // 3 defined
    CrossValParams params;
    params.top_n = 30;
    EXPECT_THROW(run_crossval(few.index, DictionaryIndicator{}, params), Error);
    std::vector<std::uint8_t> all(few.labels.size(), 1);
    const FoldScorer zero = [](std::span<const std::uint8_t> t, std::size_t) { return std::vector<double>(t.size()); };
    EXPECT_THROW(run_crossval(few.index, all, params, zero), Error);
    params.folds = 3;
    EXPECT_NO_THROW(run_crossval(few.index, few.labels, params, zero));
}

TEST(CrossVal, ThreadsDoNotChangeResults) {
    std::mt19937_64 rng(7);
    const auto table = expected_phrase_frequencies(oracle::random_corpus(rng, 2000, 25, 6), {});
    const auto index = ContextIndex::build(table, 2, 0.5);
    std::vector<std::string> defined;
    for (std::size_t p = 0; p < index.phrase_count(); p += 3) defined.push_back(index.phrase(p));
    const auto d = DictionaryIndicator::from_phrases(defined);
    CrossValParams params;
    params.top_n = 300;
    const auto a = run_crossval(index, d, params);
    params.threads = 3;
    const auto b = run_crossval(index, d, params);
    EXPECT_EQ(a.likelihood.auc, b.likelihood.auc);
    EXPECT_EQ(a.likelihood.mean_discovered_at, b.likelihood.mean_discovered_at);
    ASSERT_EQ(a.likelihood.roc.size(), b.likelihood.roc.size());
    for (std::size_t k = 0; k < a.likelihood.roc.size(); ++k) EXPECT_EQ(a.likelihood.roc[k].tpr, b.likelihood.roc[k].tpr);
}

TEST(EmitReport, FilesAndDeterminism) {
    const Pool pool = make_pool(200, 4);
    CrossValParams params;
    params.top_n = 200;
    params.k_list = {20};
    const FoldScorer freq = [&](std::span<const std::uint8_t> t, std::size_t) { return std::vector<double>(t.size()); };
    CrossValReport report;
    report.params = params;
    auto two = run_crossval(pool.index, pool.labels, params, freq);
    two.length = 2;
    auto three = two;
    three.length = 3;
    report.lengths = {two, three};
    report.skipped[4] = "too small";
    const fs::path dir = fs::temp_directory_path() / "phrasedef_emit_report";
    fs::remove_all(dir);
    emit_report(report, dir);
    for (const char* name : {"roc_L2_likelihood.csv", "roc_L2_frequency.csv", "roc_L3_likelihood.csv",
                             "roc_L3_frequency.csv", "summary.json"}) {
        EXPECT_TRUE(fs::exists(dir / name)) << name;
    }
    const std::string summary = slurp(dir / "summary.json");
    EXPECT_NE(summary.find("mean_discovered_at_20"), std::string::npos);
    EXPECT_NE(summary.find("too small"), std::string::npos);
    const std::string csv = slurp(dir / "roc_L2_likelihood.csv");
    EXPECT_EQ(csv.rfind("cutoff,tpr,fpr,discovered\n", 0), 0u);
    emit_report(report, dir);
    EXPECT_EQ(slurp(dir / "summary.json"), summary);
    EXPECT_EQ(slurp(dir / "roc_L2_likelihood.csv"), csv);
    fs::remove_all(dir);

    // a regular file where the directory should go
    const fs::path blocked = fs::temp_directory_path() / "phrasedef_emit_blocked";
    std::ofstream(blocked) << "x";
    EXPECT_THROW(emit_report(report, blocked / "sub"), Error);
    fs::remove(blocked);
}
