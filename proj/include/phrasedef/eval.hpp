#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "phrasedef/context.hpp"
#include "phrasedef/lexicon.hpp"

namespace phrasedef {

struct FoldPlan {
    std::size_t k = 0;
    std::uint64_t seed = 0;
    std::vector<std::vector<std::string>> folds;
};

/// Sorts the phrases, shuffles them with a seeded Fisher-Yates pass and deals them
/// round-robin into k folds. Throws std::invalid_argument when there are fewer phrases
/// than folds.
FoldPlan kfold_split(std::vector<std::string> defined, std::size_t k, std::uint64_t seed);

struct RocPoint {
    std::size_t cutoff = 0;
    double tpr = 0.0;
    double fpr = 0.0;
    /// Withheld defined phrases inside the cutoff (mean over folds).
    double discovered = 0.0;
};

/// Trapezoidal area under (fpr, tpr). Points must be ordered by non-decreasing fpr
/// (std::invalid_argument otherwise); (0,0) and (1,1) are added when missing.
double roc_auc(std::span<const RocPoint> points);

/// Up to `count` distinct integers, geometrically spaced from 1 to `max_cutoff`, both
/// endpoints included.
std::vector<std::size_t> log_spaced_cutoffs(std::size_t max_cutoff, std::size_t count);

/// A ranked candidate list for one fold: 1 marks a withheld defined phrase, 0 an
/// undefined one.
using RankedLabels = std::vector<std::uint8_t>;

/// ROC at every cutoff 0..size of a single ranked list.
std::vector<RocPoint> full_roc(const RankedLabels& ranked);
/// Fraction of (positive, negative) pairs ranked in the right order. Equals the
/// trapezoidal area of full_roc, computed with integer counts.
double ranking_auc(const RankedLabels& ranked);
/// Fold-averaged ROC at the given cutoffs. A cutoff past the end of a fold's list accepts
/// the whole list.
std::vector<RocPoint> average_roc(std::span<const RankedLabels> folds, std::span<const std::size_t> cutoffs);
double mean_discovered(std::span<const RankedLabels> folds, std::size_t cutoff);

struct CrossValParams {
    double q = 0.5;
    std::size_t top_n = 100000;
    /// Shortlist sizes at which discovered counts are summarized.
    std::vector<std::size_t> k_list{20};
    std::size_t folds = 10;
    std::uint64_t seed = 0;
    std::size_t cutoffs = 1000;
    unsigned threads = 1;
};

struct FilterReport {
    std::vector<RocPoint> roc;
    /// Mean over folds of the full-resolution ROC area.
    double auc = 0.0;
    /// Trapezoidal area of the fold-averaged curve in `roc`. Coarser than `auc`: straight
    /// segments between sparse cutoffs cut corners.
    double curve_auc = 0.0;
    std::map<std::size_t, double> mean_discovered_at;
};

struct LengthReport {
    int length = 0;
    std::size_t pool_size = 0;
    std::size_t defined_in_pool = 0;
    std::size_t undefined_in_pool = 0;
    FilterReport likelihood;
    FilterReport frequency;
};

struct CrossValReport {
    CrossValParams params;
    std::vector<LengthReport> lengths;
    /// Lengths that could not be evaluated, with the reason.
    std::map<int, std::string> skipped;
};

/// Replacement for the likelihood filter: receives the training labels of one fold (all
/// withheld phrases forced to 0) and returns one score per index phrase.
using FoldScorer = std::function<std::vector<double>(std::span<const std::uint8_t> training_labels, std::size_t fold)>;

/// Cross-validates the likelihood filter against the frequency baseline on the top_n
/// most frequent phrases of the index. Throws Error on a degenerate pool.
LengthReport run_crossval(const ContextIndex& index, const DictionaryIndicator& dictionary,
                          const CrossValParams& params);
LengthReport run_crossval(const ContextIndex& index, std::span<const std::uint8_t> labels,
                          const CrossValParams& params, const FoldScorer& scorer);

/// Writes roc_L{length}_{likelihood,frequency}.csv and summary.json into `dir`.
void emit_report(const CrossValReport& report, const std::filesystem::path& dir);

}  // namespace phrasedef
