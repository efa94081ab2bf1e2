#include "phrasedef/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "phrasedef/likelihood.hpp"

namespace phrasedef {

namespace {

// Unbiased draw from [0, n) by rejection; std::uniform_int_distribution is not portable.
std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t n) {
    const std::uint64_t threshold = (0 - n) % n;
    while (true) {
        const std::uint64_t r = rng();
        if (r >= threshold) return r % n;
    }
}

}  // namespace

FoldPlan kfold_split(std::vector<std::string> defined, std::size_t k, std::uint64_t seed) {
    if (k == 0) throw std::invalid_argument("fold count must be positive");
    if (defined.size() < k) {
        throw std::invalid_argument("cannot split " + std::to_string(defined.size()) + " phrases into " +
                                    std::to_string(k) + " folds");
    }
    std::sort(defined.begin(), defined.end());
    std::mt19937_64 rng(seed);
    for (std::size_t i = defined.size() - 1; i > 0; --i) {
        std::swap(defined[i], defined[bounded(rng, i + 1)]);
    }
    FoldPlan plan{k, seed, std::vector<std::vector<std::string>>(k)};
    for (std::size_t i = 0; i < defined.size(); ++i) plan.folds[i % k].push_back(std::move(defined[i]));
    return plan;
}

double roc_auc(std::span<const RocPoint> points) {
    std::vector<std::pair<double, double>> curve;
    curve.reserve(points.size() + 2);
    if (points.empty() || points.front().fpr != 0.0 || points.front().tpr != 0.0) curve.emplace_back(0.0, 0.0);
    for (const RocPoint& p : points) {
        if (!curve.empty() && p.fpr < curve.back().first) {
            throw std::invalid_argument("ROC points are not ordered by false positive rate");
        }
        curve.emplace_back(p.fpr, p.tpr);
    }
    if (curve.back().first != 1.0 || curve.back().second != 1.0) {
        if (curve.back().first > 1.0) throw std::invalid_argument("false positive rate above 1");
        curve.emplace_back(1.0, 1.0);
    }
    double area = 0.0;
    for (std::size_t i = 1; i < curve.size(); ++i) {
        area += (curve[i].first - curve[i - 1].first) * (curve[i].second + curve[i - 1].second) / 2.0;
    }
    return area;
}

std::vector<std::size_t> log_spaced_cutoffs(std::size_t max_cutoff, std::size_t count) {
    std::vector<std::size_t> out;
    if (max_cutoff == 0 || count == 0) return out;
    if (count == 1) return {max_cutoff};
    const double top = std::log(static_cast<double>(max_cutoff));
    for (std::size_t t = 0; t < count; ++t) {
        const double x = std::exp(top * static_cast<double>(t) / static_cast<double>(count - 1));
        auto c = static_cast<std::size_t>(std::llround(x));
        c = std::clamp<std::size_t>(c, 1, max_cutoff);
        if (out.empty() || c > out.back()) out.push_back(c);
    }
    out.front() = 1;
    if (out.back() != max_cutoff) out.push_back(max_cutoff);
    return out;
}

std::vector<RocPoint> full_roc(const RankedLabels& ranked) {
    const auto positives = static_cast<std::size_t>(std::count(ranked.begin(), ranked.end(), 1));
    const std::size_t negatives = ranked.size() - positives;
    std::vector<RocPoint> out;
    out.reserve(ranked.size() + 1);
    std::size_t tp = 0;
    for (std::size_t c = 0; c <= ranked.size(); ++c) {
        if (c > 0 && ranked[c - 1]) ++tp;
        const std::size_t fp = c - tp;
        out.push_back({c, positives ? static_cast<double>(tp) / positives : 0.0,
                       negatives ? static_cast<double>(fp) / negatives : 0.0, static_cast<double>(tp)});
    }
    return out;
}

double ranking_auc(const RankedLabels& ranked) {
    std::uint64_t positives_seen = 0;
    std::uint64_t ordered_pairs = 0;
    std::uint64_t negatives = 0;
    for (std::uint8_t label : ranked) {
        if (label) {
            ++positives_seen;
        } else {
            ++negatives;
            ordered_pairs += positives_seen;
        }
    }
    if (positives_seen == 0 || negatives == 0) throw std::invalid_argument("AUC needs both classes");
    return static_cast<double>(ordered_pairs) / (static_cast<double>(positives_seen) * static_cast<double>(negatives));
}

std::vector<RocPoint> average_roc(std::span<const RankedLabels> folds, std::span<const std::size_t> cutoffs) {
    std::vector<RocPoint> out;
    if (folds.empty()) return out;
    // Prefix counts of positives per fold.
    std::vector<std::vector<std::uint32_t>> prefix(folds.size());
    std::vector<std::size_t> positives(folds.size());
    for (std::size_t f = 0; f < folds.size(); ++f) {
        prefix[f].resize(folds[f].size() + 1, 0);
        for (std::size_t i = 0; i < folds[f].size(); ++i) prefix[f][i + 1] = prefix[f][i] + folds[f][i];
        positives[f] = prefix[f].back();
        if (positives[f] == 0 || positives[f] == folds[f].size()) {
            throw std::invalid_argument("every fold needs withheld and undefined candidates");
        }
    }
    const double n = static_cast<double>(folds.size());
    for (std::size_t cutoff : cutoffs) {
        RocPoint point{cutoff, 0.0, 0.0, 0.0};
        for (std::size_t f = 0; f < folds.size(); ++f) {
            const std::size_t m = std::min(cutoff, folds[f].size());
            const std::size_t tp = prefix[f][m];
            point.tpr += static_cast<double>(tp) / positives[f];
            point.fpr += static_cast<double>(m - tp) / (folds[f].size() - positives[f]);
            point.discovered += static_cast<double>(tp);
        }
        point.tpr /= n;
        point.fpr /= n;
        point.discovered /= n;
        out.push_back(point);
    }
    return out;
}

double mean_discovered(std::span<const RankedLabels> folds, std::size_t cutoff) {
    if (folds.empty()) return 0.0;
    double total = 0.0;
    for (const RankedLabels& fold : folds) {
        const std::size_t m = std::min(cutoff, fold.size());
        total += static_cast<double>(std::count(fold.begin(), fold.begin() + static_cast<std::ptrdiff_t>(m), 1));
    }
    return total / static_cast<double>(folds.size());
}

// --- cross-validation ---------------------------------------------------------------

namespace {

using PhraseId = ContextIndex::PhraseId;

FilterReport summarize(const std::vector<RankedLabels>& folds, const CrossValParams& params) {
    std::size_t longest = 0;
    for (const auto& fold : folds) longest = std::max(longest, fold.size());
    FilterReport report;
    const auto cutoffs = log_spaced_cutoffs(longest, params.cutoffs);
    report.roc = average_roc(folds, cutoffs);
    report.curve_auc = roc_auc(report.roc);
    double auc = 0.0;
    for (const auto& fold : folds) auc += ranking_auc(fold);
    report.auc = auc / static_cast<double>(folds.size());
    for (std::size_t k : params.k_list) report.mean_discovered_at[k] = mean_discovered(folds, k);
    return report;
}

}  // namespace

LengthReport run_crossval(const ContextIndex& index, std::span<const std::uint8_t> labels,
                          const CrossValParams& params, const FoldScorer& scorer) {
    if (labels.size() != index.phrase_count()) throw std::invalid_argument("label vector does not match the index");
    if (params.top_n == 0) throw std::invalid_argument("top_n must be positive");
    const auto freq = index.frequencies();

    // Ranking pool: top_n by frequency; phrase ids follow key order, so ids break ties.
    std::vector<PhraseId> pool(index.phrase_count());
    std::iota(pool.begin(), pool.end(), PhraseId{0});
    auto by_frequency = [&](PhraseId a, PhraseId b) {
        if (freq[a] != freq[b]) return freq[a] > freq[b];
        return a < b;
    };
    std::sort(pool.begin(), pool.end(), by_frequency);
    if (pool.size() > params.top_n) pool.resize(params.top_n);

    std::vector<std::string> defined;
    std::vector<PhraseId> undefined;
    for (PhraseId p : pool) {
        if (labels[p]) {
            defined.push_back(index.phrase(p));
        } else {
            undefined.push_back(p);
        }
    }
    const std::string where = "length " + std::to_string(index.length()) + ": ";
    if (undefined.empty()) throw Error(where + "ranking pool has no undefined phrases");
    if (defined.size() < params.folds) {
        throw Error(where + "ranking pool has " + std::to_string(defined.size()) + " defined phrases, fewer than " +
                    std::to_string(params.folds) + " folds");
    }

    LengthReport report;
    report.length = index.length();
    report.pool_size = pool.size();
    report.defined_in_pool = defined.size();
    report.undefined_in_pool = undefined.size();

    const FoldPlan plan = kfold_split(defined, params.folds, params.seed);
    std::vector<RankedLabels> by_score(params.folds);
    std::vector<RankedLabels> by_freq(params.folds);

    auto run_fold = [&](std::size_t f) {
        std::vector<PhraseId> withheld;
        for (const auto& key : plan.folds[f]) withheld.push_back(*index.find_phrase(key));
        std::vector<std::uint8_t> training(labels.begin(), labels.end());
        for (PhraseId p : withheld) training[p] = 0;
        const std::vector<double> scores = scorer(training, f);
        if (scores.size() != index.phrase_count()) throw Error("fold scorer returned the wrong number of scores");

        std::vector<PhraseId> candidates = undefined;
        candidates.insert(candidates.end(), withheld.begin(), withheld.end());
        std::vector<std::uint8_t> positive(index.phrase_count(), 0);
        for (PhraseId p : withheld) positive[p] = 1;

        auto to_labels = [&](const std::vector<PhraseId>& ranked) {
            RankedLabels out(ranked.size());
            for (std::size_t i = 0; i < ranked.size(); ++i) out[i] = positive[ranked[i]];
            return out;
        };
        std::sort(candidates.begin(), candidates.end(), [&](PhraseId a, PhraseId b) {
            if (scores[a] != scores[b]) return scores[a] > scores[b];
            return by_frequency(a, b);
        });
        by_score[f] = to_labels(candidates);
        std::sort(candidates.begin(), candidates.end(), by_frequency);
        by_freq[f] = to_labels(candidates);
    };

    const unsigned workers = std::max(1u, std::min<unsigned>(params.threads, static_cast<unsigned>(params.folds)));
    if (workers == 1) {
        for (std::size_t f = 0; f < params.folds; ++f) run_fold(f);
    } else {
        std::vector<std::thread> pool_threads;
        std::vector<std::exception_ptr> errors(workers);
        for (unsigned w = 0; w < workers; ++w) {
            pool_threads.emplace_back([&, w] {
                try {
                    for (std::size_t f = w; f < params.folds; f += workers) run_fold(f);
                } catch (...) {
                    errors[w] = std::current_exception();
                }
            });
        }
        for (auto& t : pool_threads) t.join();
        for (auto& e : errors) {
            if (e) std::rethrow_exception(e);
        }
    }

    report.likelihood = summarize(by_score, params);
    report.frequency = summarize(by_freq, params);
    return report;
}

LengthReport run_crossval(const ContextIndex& index, const DictionaryIndicator& dictionary,
                          const CrossValParams& params) {
    if (params.q != index.q()) {
        throw ConfigMismatch("cross-validation q " + format_real(params.q, 12) + " does not match the index (q = " +
                             format_real(index.q(), 12) + ")");
    }
    const std::vector<std::uint8_t> labels = dictionary_labels(index, dictionary);
    const std::uint64_t base = dictionary.identity();
    const FoldScorer likelihood = [&](std::span<const std::uint8_t> training, std::size_t fold) {
        const std::uint64_t identity = Fnv1a{}.add(base).add(params.seed).add(static_cast<std::uint64_t>(fold)).value();
        const ContextScores contexts = context_likelihood(index, training, identity);
        return phrase_likelihood(index, contexts, index.q());
    };
    return run_crossval(index, labels, params, likelihood);
}

// --- report files -------------------------------------------------------------------

namespace {

double round6(double v) {
    return std::stod(format_real(v, 6));
}

nlohmann::json filter_summary(const FilterReport& f) {
    nlohmann::json out;
    out["auc"] = round6(f.auc);
    out["curve_auc"] = round6(f.curve_auc);
    for (const auto& [k, v] : f.mean_discovered_at) out["mean_discovered_at_" + std::to_string(k)] = round6(v);
    return out;
}

void write_roc(const std::filesystem::path& path, const std::vector<RocPoint>& roc) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << "cutoff,tpr,fpr,discovered\n";
    for (const RocPoint& p : roc) {
        out << p.cutoff << ',' << format_real(p.tpr, 6) << ',' << format_real(p.fpr, 6) << ','
            << format_real(p.discovered, 6) << '\n';
    }
    if (!out) throw Error("error while writing " + path.string());
}

}  // namespace

void emit_report(const CrossValReport& report, const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec || !std::filesystem::is_directory(dir)) throw Error("cannot create report directory " + dir.string());

    nlohmann::json summary;
    summary["q"] = report.params.q;
    summary["top_n"] = report.params.top_n;
    summary["folds"] = report.params.folds;
    summary["seed"] = report.params.seed;
    summary["cutoffs"] = report.params.cutoffs;
    summary["k_list"] = report.params.k_list;
    summary["lengths"] = nlohmann::json::object();
    for (const LengthReport& length : report.lengths) {
        const std::string tag = "L" + std::to_string(length.length);
        write_roc(dir / ("roc_" + tag + "_likelihood.csv"), length.likelihood.roc);
        write_roc(dir / ("roc_" + tag + "_frequency.csv"), length.frequency.roc);
        nlohmann::json entry;
        entry["pool_size"] = length.pool_size;
        entry["defined_in_pool"] = length.defined_in_pool;
        entry["undefined_in_pool"] = length.undefined_in_pool;
        entry["likelihood"] = filter_summary(length.likelihood);
        entry["frequency"] = filter_summary(length.frequency);
        summary["lengths"][std::to_string(length.length)] = entry;
    }
    if (!report.skipped.empty()) {
        for (const auto& [length, reason] : report.skipped) summary["skipped"][std::to_string(length)] = reason;
    }
    const auto path = dir / "summary.json";
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << summary.dump(2) << '\n';
    if (!out) throw Error("error while writing " + path.string());
}

}  // namespace phrasedef
