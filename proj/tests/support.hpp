#pragma once

// Brute-force oracles and corpus generators shared by the unit tests and the acceptance
// runner. Everything here works straight from the definitions, with ordered maps and
// explicit enumeration, and shares no code with the library beyond the phrase key format.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "phrasedef/common.hpp"

namespace oracle {

using phrasedef::Clause;

inline std::string join(const std::vector<std::string>& words, std::size_t from, std::size_t to) {
    std::string out;
    for (std::size_t k = from; k < to; ++k) {
        if (k > from) out += ' ';
        out += words[k];
    }
    return out;
}

inline int words_in(const std::string& key) {
    int n = 1;
    for (char c : key) n += c == ' ';
    return n;
}

// Expected partition frequencies by enumerating every boundary configuration of every
// clause: 2^(len-1) partitions, each weighted by q^cuts (1-q)^joins.
inline std::map<std::string, double> enumerate_partitions(const std::vector<Clause>& clauses, double q,
                                                          int max_len) {
    std::map<std::string, double> f;
    for (const Clause& clause : clauses) {
        const std::size_t n = clause.size();
        if (n == 0) continue;
        const std::uint64_t configs = std::uint64_t{1} << (n - 1);
        for (std::uint64_t mask = 0; mask < configs; ++mask) {
            double p = 1.0;
            for (std::size_t g = 0; g + 1 < n; ++g) p *= (mask >> g & 1) ? q : 1.0 - q;
            if (p == 0.0) continue;
            std::size_t start = 0;
            for (std::size_t g = 0; g < n; ++g) {
                const bool cut = g + 1 == n || (mask >> g & 1);
                if (!cut) continue;
                if (static_cast<int>(g + 1 - start) <= max_len) f[join(clause, start, g + 1)] += p;
                start = g + 1;
            }
        }
    }
    return f;
}

// P(c_ij | s) by enumeration over the internal gaps of the phrase: the removed block must
// be cut out exactly, so the gaps around it are boundaries and the gaps inside are not.
inline double context_weight(int len, int i, int j, double q) {
    double p = 1.0;
    for (int g = 1; g < len; ++g) {  // gap g sits between words g and g+1
        if (g == i - 1 || g == j) {
            p *= q;
        } else if (g >= i && g < j) {
            p *= 1.0 - q;
        }
    }
    return static_cast<double>(j - i + 1) / len * p;
}

inline std::string star_key(const std::vector<std::string>& words, int i, int j) {
    std::string out;
    for (int p = 1; p <= static_cast<int>(words.size()); ++p) {
        if (p > 1) out += ' ';
        if (p >= i && p <= j) {
            out += '*';
        } else {
            for (char c : words[p - 1]) {
                if (c == '*' || c == '\\') out += '\\';
                out += c;
            }
        }
    }
    return out;
}

inline std::vector<std::string> split(const std::string& key) {
    std::vector<std::string> out(1);
    for (char c : key) {
        if (c == ' ') {
            out.emplace_back();
        } else {
            out.back() += c;
        }
    }
    return out;
}

struct Likelihood {
    std::map<std::string, double> contexts;  // keyed by star pattern
    std::map<std::string, double> phrases;
    double defined_share = 0.0;              // D-bar(S)
};

// Definition likelihood straight from the formulas, joint weights included in both the
// numerator and the denominator of D-bar(c|S).
inline Likelihood likelihood(const std::map<std::string, double>& freq, const std::map<std::string, int>& labels,
                             int length, double q) {
    Likelihood out;
    std::map<std::string, std::pair<double, double>> acc;  // defined mass, total mass
    double total = 0.0;
    double defined = 0.0;
    for (const auto& [phrase, f] : freq) {
        if (words_in(phrase) != length || f <= 0.0) continue;
        const auto words = split(phrase);
        const int d = labels.count(phrase) ? labels.at(phrase) : 0;
        total += f;
        defined += d * f;
        for (int i = 1; i <= length; ++i) {
            for (int j = i; j <= length; ++j) {
                const double joint = context_weight(length, i, j, q) * f;
                auto& slot = acc[star_key(words, i, j)];
                slot.first += d * joint;
                slot.second += joint;
            }
        }
    }
    for (const auto& [key, mass] : acc) out.contexts[key] = mass.second > 0.0 ? mass.first / mass.second : 0.0;
    out.defined_share = total > 0.0 ? defined / total : 0.0;
    for (const auto& [phrase, f] : freq) {
        if (words_in(phrase) != length || f <= 0.0) continue;
        const auto words = split(phrase);
        double score = 0.0;
        for (int i = 1; i <= length; ++i) {
            for (int j = i; j <= length; ++j) score += context_weight(length, i, j, q) * out.contexts[star_key(words, i, j)];
        }
        out.phrases[phrase] = score;
    }
    return out;
}

// Random clauses over a small Zipf-like vocabulary, so phrases repeat and share contexts.
inline std::vector<Clause> random_corpus(std::mt19937_64& rng, std::size_t clauses, std::size_t vocab,
                                         int max_clause) {
    std::vector<double> weights(vocab);
    for (std::size_t w = 0; w < vocab; ++w) weights[w] = 1.0 / static_cast<double>(w + 1);
    std::discrete_distribution<std::size_t> word(weights.begin(), weights.end());
    std::uniform_int_distribution<int> size(1, max_clause);
    std::vector<Clause> out(clauses);
    for (Clause& clause : out) {
        const int n = size(rng);
        for (int k = 0; k < n; ++k) clause.push_back("w" + std::to_string(word(rng)));
    }
    return out;
}

inline bool close(double a, double b, double rel) {
    return std::abs(a - b) <= rel * std::max({1e-300, std::abs(a), std::abs(b)});
}

}  // namespace oracle
