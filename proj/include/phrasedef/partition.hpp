#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "phrasedef/common.hpp"

namespace phrasedef {

enum class PartitionMode { expected, sampled };

struct PartitionParams {
    /// Probability that any gap between adjacent words receives a boundary.
    double q = 0.5;
    int max_len = 5;
    PartitionMode mode = PartitionMode::expected;
    /// Only used in sampled mode.
    std::uint64_t seed = 0;
    /// Also accumulate sub-phrase mass past max_len, for the balance check.
    bool track_full_mass = false;
    /// Clauses per shard. Shards are the unit of parallelism and of reduction order,
    /// so results depend on this but not on the thread count.
    std::size_t shard_size = 1 << 15;
    unsigned threads = 1;

    /// Throws std::invalid_argument.
    void validate() const;
};

/// Probability that random partitioning of an `len`-word phrase cuts out exactly the
/// words i..j (1-based, inclusive): q^([i>1] + [j<len]) * (1-q)^(j-i).
double subphrase_partition_probability(int len, int i, int j, double q);

struct StringHash {
    using is_transparent = void;
    std::size_t operator()(std::string_view s) const noexcept { return std::hash<std::string_view>{}(s); }
};

using FrequencyMap = std::unordered_map<std::string, double, StringHash, std::equal_to<>>;

/// Expected partition frequencies, one map per phrase length, plus raw word counts.
class PhraseFrequencyTable {
public:
    explicit PhraseFrequencyTable(int max_len = 5);

    int max_len() const { return m_max_len; }

    const FrequencyMap& phrases(int length) const;
    /// Raw occurrence counts f(w).
    const FrequencyMap& words() const { return m_words; }

    double frequency(std::string_view phrase) const;
    double word_frequency(std::string_view word) const;
    /// Sum of f(w), i.e. number of tokens seen.
    double total_words() const { return m_total_words; }
    /// Sum of len * f(s) over stored phrases of every length.
    double length_mass() const;
    /// Sum of len * f(s) over all sub-phrase lengths, including those beyond max_len.
    /// Zero unless the table was built with track_full_mass.
    double full_length_mass() const { return m_full_mass; }

    void add_phrase(std::string_view phrase, int length, double f);
    void add_word(std::string_view word, double count);
    void add_full_mass(double mass) { m_full_mass += mass; }

    /// Adds every entry of `other` into this table. Callers merge shards in a fixed order.
    void merge(const PhraseFrequencyTable& other);

    /// Phrases of one length, descending frequency then ascending key.
    std::vector<std::pair<std::string, double>> ranked(int length) const;

private:
    FrequencyMap& slot(int length);

    int m_max_len;
    std::vector<FrequencyMap> m_phrases;
    FrequencyMap m_words;
    double m_total_words = 0.0;
    double m_full_mass = 0.0;
};

/// Adds the contributions of one clause into `table`. In sampled mode `rng` draws one
/// partition; in expected mode it is unused.
void accumulate_clause(const Clause& clause, const PartitionParams& params, PhraseFrequencyTable& table,
                       std::mt19937_64* rng = nullptr);

PhraseFrequencyTable expected_phrase_frequencies(std::span<const Clause> clauses, const PartitionParams& params);

/// Streaming front end: clauses are buffered into shards, each shard is counted into its
/// own table, and shard tables are merged in arrival order.
class PhraseCounter {
public:
    explicit PhraseCounter(PartitionParams params);

    void add(Clause clause);
    PhraseFrequencyTable finish();

private:
    void flush();

    PartitionParams m_params;
    PhraseFrequencyTable m_table;
    std::vector<std::vector<Clause>> m_pending;
    std::uint64_t m_shard_index = 0;
};

/// Draws one random partition: each internal gap independently gets a boundary with
/// probability q. Returns every piece, with no length cap.
std::vector<Phrase> sample_partition(const Clause& clause, double q, std::mt19937_64& rng);

/// Uniform double in [0,1) from the top 53 bits; portable across standard libraries.
inline double unit_uniform(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace phrasedef
