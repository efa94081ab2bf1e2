#include "phrasedef/partition.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <thread>

namespace phrasedef {

void PartitionParams::validate() const {
    if (!(q > 0.0 && q <= 1.0)) {
        throw std::invalid_argument("partition q must lie in (0,1], got " + std::to_string(q));
    }
    if (max_len < 1) {
        throw std::invalid_argument("max_len must be at least 1, got " + std::to_string(max_len));
    }
    if (shard_size == 0) throw std::invalid_argument("shard_size must be positive");
    if (threads == 0) throw std::invalid_argument("threads must be positive");
}

double subphrase_partition_probability(int len, int i, int j, double q) {
    if (len < 1 || i < 1 || j < i || j > len) {
        throw std::invalid_argument("sub-phrase [" + std::to_string(i) + ".." + std::to_string(j) +
                                    "] out of range for length " + std::to_string(len));
    }
    const int edges = (i > 1 ? 1 : 0) + (j < len ? 1 : 0);
    double p = 1.0;
    for (int k = 0; k < edges; ++k) p *= q;
    for (int k = 0; k < j - i; ++k) p *= 1.0 - q;
    return p;
}

PhraseFrequencyTable::PhraseFrequencyTable(int max_len) : m_max_len(max_len), m_phrases(max_len + 1) {
    if (max_len < 1) throw std::invalid_argument("max_len must be at least 1");
}

const FrequencyMap& PhraseFrequencyTable::phrases(int length) const {
    static const FrequencyMap empty;
    if (length < 1 || length > m_max_len) return empty;
    return m_phrases[length];
}

FrequencyMap& PhraseFrequencyTable::slot(int length) {
    if (length < 1 || length > m_max_len) {
        throw std::invalid_argument("phrase length " + std::to_string(length) + " outside 1.." +
                                    std::to_string(m_max_len));
    }
    return m_phrases[length];
}

double PhraseFrequencyTable::frequency(std::string_view phrase) const {
    const FrequencyMap& map = phrases(key_length(phrase));
    auto it = map.find(phrase);
    return it == map.end() ? 0.0 : it->second;
}

double PhraseFrequencyTable::word_frequency(std::string_view word) const {
    auto it = m_words.find(word);
    return it == m_words.end() ? 0.0 : it->second;
}

double PhraseFrequencyTable::length_mass() const {
    double total = 0.0;
    for (int len = 1; len <= m_max_len; ++len) {
        double sum = 0.0;
        for (const auto& [key, f] : m_phrases[len]) sum += f;
        total += len * sum;
    }
    return total;
}

void PhraseFrequencyTable::add_phrase(std::string_view phrase, int length, double f) {
    FrequencyMap& map = slot(length);
    auto it = map.find(phrase);
    if (it == map.end()) {
        map.emplace(std::string(phrase), f);
    } else {
        it->second += f;
    }
}

void PhraseFrequencyTable::add_word(std::string_view word, double count) {
    auto it = m_words.find(word);
    if (it == m_words.end()) {
        m_words.emplace(std::string(word), count);
    } else {
        it->second += count;
    }
    m_total_words += count;
}

void PhraseFrequencyTable::merge(const PhraseFrequencyTable& other) {
    if (other.m_max_len != m_max_len) throw std::invalid_argument("cannot merge tables with different max_len");
    for (int len = 1; len <= m_max_len; ++len) {
        FrequencyMap& mine = m_phrases[len];
        mine.reserve(mine.size() + other.m_phrases[len].size() / 2);
        for (const auto& [key, f] : other.m_phrases[len]) {
            auto [it, inserted] = mine.try_emplace(key, f);
            if (!inserted) it->second += f;
        }
    }
    for (const auto& [key, f] : other.m_words) {
        auto [it, inserted] = m_words.try_emplace(key, f);
        if (!inserted) it->second += f;
    }
    m_total_words += other.m_total_words;
    m_full_mass += other.m_full_mass;
}

std::vector<std::pair<std::string, double>> PhraseFrequencyTable::ranked(int length) const {
    const FrequencyMap& map = phrases(length);
    std::vector<std::pair<std::string, double>> out(map.begin(), map.end());
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    return out;
}

namespace {

void accumulate_expected(const Clause& clause, const PartitionParams& params, PhraseFrequencyTable& table) {
    const int len = static_cast<int>(clause.size());
    const double q = params.q;
    // q^0..q^2 and (1-q)^0..(1-q)^(len-1)
    const double edge_pow[3] = {1.0, q, q * q};
    std::vector<double> inner_pow(static_cast<std::size_t>(len), 1.0);
    for (int k = 1; k < len; ++k) inner_pow[k] = inner_pow[k - 1] * (1.0 - q);

    std::string key;
    for (int i = 0; i < len; ++i) {
        key.clear();
        const int longest = std::min(params.max_len, len - i);
        for (int m = 1; m <= longest; ++m) {
            if (m > 1) key.push_back(' ');
            key += clause[i + m - 1];
            const int edges = (i > 0 ? 1 : 0) + (i + m < len ? 1 : 0);
            const double p = edge_pow[edges] * inner_pow[m - 1];
            if (p > 0.0) table.add_phrase(key, m, p);
        }
    }
    if (params.track_full_mass) {
        double mass = 0.0;
        for (int i = 0; i < len; ++i) {
            for (int m = 1; m <= len - i; ++m) {
                const int edges = (i > 0 ? 1 : 0) + (i + m < len ? 1 : 0);
                mass += m * edge_pow[edges] * inner_pow[m - 1];
            }
        }
        table.add_full_mass(mass);
    }
}

void accumulate_sampled(const Clause& clause, const PartitionParams& params, PhraseFrequencyTable& table,
                        std::mt19937_64& rng) {
    std::string key;
    for (const Phrase& piece : sample_partition(clause, params.q, rng)) {
        const int m = static_cast<int>(piece.size());
        if (params.track_full_mass) table.add_full_mass(m);
        if (m > params.max_len) continue;
        key = join_tokens(piece);
        table.add_phrase(key, m, 1.0);
    }
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

PhraseFrequencyTable count_shard(const std::vector<Clause>& shard, const PartitionParams& params,
                                 std::uint64_t shard_index) {
    PhraseFrequencyTable table(params.max_len);
    std::mt19937_64 rng(splitmix64(params.seed ^ splitmix64(shard_index)));
    for (const Clause& clause : shard) accumulate_clause(clause, params, table, &rng);
    return table;
}

}  // namespace

void accumulate_clause(const Clause& clause, const PartitionParams& params, PhraseFrequencyTable& table,
                       std::mt19937_64* rng) {
    if (clause.empty()) return;
    for (const Token& token : clause) table.add_word(token, 1.0);
    if (params.mode == PartitionMode::expected) {
        accumulate_expected(clause, params, table);
    } else {
        if (rng == nullptr) throw std::invalid_argument("sampled partitioning needs a generator");
        accumulate_sampled(clause, params, table, *rng);
    }
}

PhraseCounter::PhraseCounter(PartitionParams params) : m_params(params), m_table(params.max_len) {
    m_params.validate();
    m_pending.emplace_back();
}

void PhraseCounter::add(Clause clause) {
    if (clause.empty()) return;
    m_pending.back().push_back(std::move(clause));
    if (m_pending.back().size() >= m_params.shard_size) {
        if (m_pending.size() >= m_params.threads) {
            flush();
        } else {
            m_pending.emplace_back();
        }
    }
}

void PhraseCounter::flush() {
    std::vector<PhraseFrequencyTable> partial(m_pending.size(), PhraseFrequencyTable(m_params.max_len));
    if (m_pending.size() == 1) {
        partial[0] = count_shard(m_pending[0], m_params, m_shard_index);
    } else {
        std::vector<std::thread> workers;
        workers.reserve(m_pending.size());
        for (std::size_t s = 0; s < m_pending.size(); ++s) {
            workers.emplace_back([this, s, &partial] {
                partial[s] = count_shard(m_pending[s], m_params, m_shard_index + s);
            });
        }
        for (auto& worker : workers) worker.join();
    }
    for (std::size_t s = 0; s < partial.size(); ++s) {
        if (!m_pending[s].empty()) ++m_shard_index;
        m_table.merge(partial[s]);
    }
    m_pending.clear();
    m_pending.emplace_back();
}

PhraseFrequencyTable PhraseCounter::finish() {
    if (!m_pending.back().empty() || m_pending.size() > 1) flush();
    PhraseFrequencyTable out = std::move(m_table);
    m_table = PhraseFrequencyTable(m_params.max_len);
    return out;
}

PhraseFrequencyTable expected_phrase_frequencies(std::span<const Clause> clauses, const PartitionParams& params) {
    PhraseCounter counter(params);
    for (const Clause& clause : clauses) counter.add(clause);
    return counter.finish();
}

std::vector<Phrase> sample_partition(const Clause& clause, double q, std::mt19937_64& rng) {
    if (!(q > 0.0 && q <= 1.0)) throw std::invalid_argument("partition q must lie in (0,1]");
    std::vector<Phrase> pieces;
    if (clause.empty()) return pieces;
    Phrase current{clause.front()};
    for (std::size_t k = 1; k < clause.size(); ++k) {
        if (unit_uniform(rng) < q) {
            pieces.push_back(std::move(current));
            current.clear();
        }
        current.push_back(clause[k]);
    }
    pieces.push_back(std::move(current));
    return pieces;
}

}  // namespace phrasedef
