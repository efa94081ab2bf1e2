#include "phrasedef/context.hpp"

#include <algorithm>
#include <cstring>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <thread>
#include <unordered_map>

namespace phrasedef {

namespace {

constexpr std::uint32_t kUnassigned = std::numeric_limits<std::uint32_t>::max();

void append_escaped(std::string& out, std::string_view token) {
    for (char c : token) {
        if (c == '*' || c == '\\') out.push_back('\\');
        out.push_back(c);
    }
}

std::string unescape(std::string_view piece) {
    std::string out;
    out.reserve(piece.size());
    for (std::size_t i = 0; i < piece.size(); ++i) {
        if (piece[i] == '\\' && i + 1 < piece.size()) ++i;
        out.push_back(piece[i]);
    }
    return out;
}

std::vector<std::string_view> split_views(std::string_view key) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t space = key.find(' ', start);
        if (space == std::string_view::npos) {
            out.push_back(key.substr(start));
            break;
        }
        out.push_back(key.substr(start, space - start));
        start = space + 1;
    }
    return out;
}

void render_key(std::string& out, std::string_view phrase, int gap_start, int gap_end) {
    out.clear();
    int position = 1;
    std::size_t start = 0;
    while (true) {
        const std::size_t space = phrase.find(' ', start);
        const std::string_view word =
            phrase.substr(start, space == std::string_view::npos ? std::string_view::npos : space - start);
        if (position > 1) out.push_back(' ');
        if (position >= gap_start && position <= gap_end) {
            out.push_back('*');
        } else {
            append_escaped(out, word);
        }
        if (space == std::string_view::npos) break;
        start = space + 1;
        ++position;
    }
}

}  // namespace

Context make_context(std::span<const Token> phrase, int gap_start, int gap_end) {
    const int len = static_cast<int>(phrase.size());
    if (gap_start < 1 || gap_end < gap_start || gap_end > len) {
        throw std::invalid_argument("context gap out of range");
    }
    Context c{len, gap_start, gap_end, {}};
    for (int p = 1; p <= len; ++p) {
        if (p < gap_start || p > gap_end) c.fixed.push_back(phrase[p - 1]);
    }
    return c;
}

std::string context_key(const Context& context) {
    std::string out;
    std::size_t next_fixed = 0;
    for (int p = 1; p <= context.length; ++p) {
        if (p > 1) out.push_back(' ');
        if (p >= context.gap_start && p <= context.gap_end) {
            out.push_back('*');
        } else {
            append_escaped(out, context.fixed.at(next_fixed++));
        }
    }
    return out;
}

Context parse_context_key(std::string_view key) {
    if (key.empty()) throw Error("empty context key");
    Context c;
    const auto pieces = split_views(key);
    c.length = static_cast<int>(pieces.size());
    for (int p = 1; p <= c.length; ++p) {
        const std::string_view piece = pieces[p - 1];
        if (piece.empty()) throw Error("malformed context key '" + std::string(key) + "'");
        if (piece == "*") {
            if (c.gap_start == 0) {
                c.gap_start = p;
            } else if (c.gap_end != p - 1) {
                throw Error("context key '" + std::string(key) + "' has more than one gap");
            }
            c.gap_end = p;
        } else {
            c.fixed.push_back(unescape(piece));
        }
    }
    if (c.gap_start == 0) throw Error("context key '" + std::string(key) + "' has no gap");
    return c;
}

double context_weight(int length, int gap_start, int gap_end, double q) {
    return static_cast<double>(gap_end - gap_start + 1) / length *
           subphrase_partition_probability(length, gap_start, gap_end, q);
}

std::pair<int, int> context_slot_gap(int length, std::size_t slot) {
    std::size_t k = 0;
    for (int removed = 1; removed <= length; ++removed) {
        for (int i = 1; i + removed - 1 <= length; ++i, ++k) {
            if (k == slot) return {i, i + removed - 1};
        }
    }
    throw std::invalid_argument("context slot out of range");
}

std::size_t context_slot(int length, int gap_start, int gap_end) {
    if (gap_start < 1 || gap_end < gap_start || gap_end > length) {
        throw std::invalid_argument("context gap out of range");
    }
    std::size_t k = 0;
    for (int removed = 1; removed < gap_end - gap_start + 1; ++removed) k += length - removed + 1;
    return k + (gap_start - 1);
}

std::vector<WeightedContext> enumerate_contexts(std::span<const Token> phrase, double q) {
    const int len = static_cast<int>(phrase.size());
    if (len < 1) throw std::invalid_argument("cannot enumerate contexts of an empty phrase");
    std::vector<WeightedContext> out;
    out.reserve(context_count(len));
    for (int removed = 1; removed <= len; ++removed) {
        for (int i = 1; i + removed - 1 <= len; ++i) {
            const int j = i + removed - 1;
            out.push_back({make_context(phrase, i, j), context_weight(len, i, j, q)});
        }
    }
    return out;
}

// --- ContextIndex ---------------------------------------------------------------

namespace {

struct SlotResult {
    std::vector<std::uint32_t> representatives;
    std::vector<std::uint64_t> sizes;
    std::vector<std::uint32_t> members;
    // Local context id per phrase.
    std::vector<std::uint32_t> assignment;
};

SlotResult group_slot(const std::vector<std::uint32_t>& tokens, std::size_t n, int len, int gap_start,
                      int gap_end) {
    std::vector<int> kept;
    for (int p = 1; p <= len; ++p) {
        if (p < gap_start || p > gap_end) kept.push_back(p - 1);
    }
    auto same = [&](std::uint32_t a, std::uint32_t b) {
        for (int p : kept) {
            if (tokens[std::size_t{a} * len + p] != tokens[std::size_t{b} * len + p]) return false;
        }
        return true;
    };
    std::vector<std::uint32_t> order(n);
    std::iota(order.begin(), order.end(), 0u);
    std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
        for (int p : kept) {
            const auto ta = tokens[std::size_t{a} * len + p];
            const auto tb = tokens[std::size_t{b} * len + p];
            if (ta != tb) return ta < tb;
        }
        return a < b;
    });
    SlotResult out;
    out.members = std::move(order);
    out.assignment.assign(n, kUnassigned);
    for (std::size_t k = 0; k < n; ++k) {
        const std::uint32_t phrase = out.members[k];
        if (k == 0 || !same(out.members[k - 1], phrase)) {
            out.representatives.push_back(phrase);
            out.sizes.push_back(0);
        }
        ++out.sizes.back();
        out.assignment[phrase] = static_cast<std::uint32_t>(out.representatives.size() - 1);
    }
    return out;
}

}  // namespace

ContextIndex ContextIndex::build(const PhraseFrequencyTable& table, int length, double q, unsigned threads) {
    if (length < 1) throw std::invalid_argument("context index length must be positive");
    if (length > 255) throw Error("phrase length too large for the index");
    if (!(q > 0.0 && q <= 1.0)) throw std::invalid_argument("partition q must lie in (0,1]");

    std::vector<std::pair<std::string, double>> entries;
    for (const auto& [key, f] : table.phrases(length)) {
        if (f > 0.0) entries.emplace_back(key, f);
    }
    std::sort(entries.begin(), entries.end());

    ContextIndex index;
    index.m_length = length;
    index.m_q = q;
    index.m_slots = phrasedef::context_count(length) - 1;
    for (std::size_t k = 0; k <= index.m_slots; ++k) {
        auto [i, j] = context_slot_gap(length, k);
        index.m_slot_weights.push_back(context_weight(length, i, j, q));
    }
    index.m_phrases.reserve(entries.size());
    index.m_frequencies.reserve(entries.size());
    for (auto& [key, f] : entries) {
        index.m_phrases.push_back(std::move(key));
        index.m_frequencies.push_back(f);
    }
    entries.clear();
    entries.shrink_to_fit();

    const std::size_t n = index.m_phrases.size();
    if (n > kUnassigned) throw Error("too many phrases for a 32-bit index");
    if (n == 0 || index.m_slots == 0) return index;

    // Intern words; ids only need to be consistent, not ordered.
    std::vector<std::uint32_t> tokens(n * length);
    {
        std::unordered_map<std::string_view, std::uint32_t> vocab;
        for (std::size_t p = 0; p < n; ++p) {
            const auto words = split_views(index.m_phrases[p]);
            if (static_cast<int>(words.size()) != length) {
                throw Error("phrase '" + index.m_phrases[p] + "' is not of length " + std::to_string(length));
            }
            for (int w = 0; w < length; ++w) {
                auto [it, inserted] = vocab.try_emplace(words[w], static_cast<std::uint32_t>(vocab.size()));
                tokens[p * length + w] = it->second;
            }
        }
    }

    std::vector<SlotResult> slots(index.m_slots);
    auto work = [&](unsigned worker, unsigned workers) {
        for (std::size_t k = worker; k < index.m_slots; k += workers) {
            auto [i, j] = context_slot_gap(length, k);
            slots[k] = group_slot(tokens, n, length, i, j);
        }
    };
    const unsigned workers = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(index.m_slots)));
    if (workers == 1) {
        work(0, 1);
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work, w, workers);
        for (auto& t : pool) t.join();
    }
    tokens.clear();
    tokens.shrink_to_fit();

    index.m_members.reserve(n * index.m_slots);
    index.m_phrase_contexts.assign(n * index.m_slots, kUnassigned);
    for (std::size_t k = 0; k < index.m_slots; ++k) {
        SlotResult& slot = slots[k];
        auto [i, j] = context_slot_gap(length, k);
        const auto base = static_cast<std::uint32_t>(index.m_contexts.size());
        if (index.m_contexts.size() + slot.representatives.size() > kUnassigned) {
            throw Error("too many contexts for a 32-bit index");
        }
        for (std::size_t c = 0; c < slot.representatives.size(); ++c) {
            index.m_contexts.push_back(
                {slot.representatives[c], static_cast<std::uint8_t>(i), static_cast<std::uint8_t>(j)});
            index.m_offsets.push_back(index.m_offsets.back() + slot.sizes[c]);
        }
        index.m_members.insert(index.m_members.end(), slot.members.begin(), slot.members.end());
        for (std::size_t p = 0; p < n; ++p) index.m_phrase_contexts[p * index.m_slots + k] = base + slot.assignment[p];
        slot = SlotResult{};
    }
    return index;
}

void ContextIndex::Groups::open(int gap_start, int gap_end) {
    if (gap_start < 1 || gap_end < gap_start || gap_end > 255) throw std::invalid_argument("bad context gap");
    gaps.emplace_back(static_cast<std::uint8_t>(gap_start), static_cast<std::uint8_t>(gap_end));
    offsets.push_back(offsets.back());
}

void ContextIndex::Groups::add(PhraseId phrase) {
    if (gaps.empty()) throw std::logic_error("context member added before any group");
    members.push_back(phrase);
    ++offsets.back();
}

ContextIndex ContextIndex::assemble(int length, double q, std::vector<std::string> phrases,
                                    std::vector<double> frequencies, Groups groups) {
    if (length < 1) throw std::invalid_argument("context index length must be positive");
    if (phrases.size() != frequencies.size()) throw std::invalid_argument("phrase and frequency counts differ");
    if (length > 255) throw Error("phrase length too large for the index");
    if (groups.offsets.size() != groups.gaps.size() + 1 || groups.offsets.back() != groups.members.size()) {
        throw std::invalid_argument("inconsistent context groups");
    }
    ContextIndex index;
    index.m_length = length;
    index.m_q = q;
    index.m_slots = phrasedef::context_count(length) - 1;
    for (std::size_t k = 0; k <= index.m_slots; ++k) {
        auto [i, j] = context_slot_gap(length, k);
        index.m_slot_weights.push_back(context_weight(length, i, j, q));
    }
    if (!std::is_sorted(phrases.begin(), phrases.end()) ||
        std::adjacent_find(phrases.begin(), phrases.end()) != phrases.end()) {
        throw Error("index phrases must be sorted and unique");
    }
    index.m_phrases = std::move(phrases);
    index.m_frequencies = std::move(frequencies);
    const std::size_t n = index.m_phrases.size();
    if (n > kUnassigned || groups.size() > kUnassigned) throw Error("too many entries for a 32-bit index");
    index.m_phrase_contexts.assign(n * index.m_slots, kUnassigned);

    // Empty groups occupy no member range, so skipping them keeps the offsets valid.
    index.m_contexts.reserve(groups.size());
    index.m_offsets.reserve(groups.size() + 1);
    for (std::size_t g = 0; g < groups.size(); ++g) {
        const auto begin = groups.members.begin() + static_cast<std::ptrdiff_t>(groups.offsets[g]);
        const auto end = groups.members.begin() + static_cast<std::ptrdiff_t>(groups.offsets[g + 1]);
        if (begin == end) continue;
        const auto [gap_start, gap_end] = groups.gaps[g];
        if (gap_end > length) throw Error("context gap outside the phrase");
        if (gap_start == 1 && gap_end == length) throw Error("all-star context is implicit");
        const std::size_t k = context_slot(length, gap_start, gap_end);
        std::sort(begin, end);
        const auto id = static_cast<std::uint32_t>(index.m_contexts.size());
        for (auto it = begin; it != end; ++it) {
            if (*it >= n) throw Error("context member out of range");
            std::uint32_t& cell = index.m_phrase_contexts[std::size_t{*it} * index.m_slots + k];
            if (cell != kUnassigned) {
                throw Error("phrase '" + index.m_phrases[*it] + "' appears in two contexts of the same slot");
            }
            cell = id;
        }
        index.m_contexts.push_back({*begin, gap_start, gap_end});
        index.m_offsets.push_back(groups.offsets[g + 1]);
    }
    index.m_members = std::move(groups.members);
    for (std::size_t p = 0; p < n; ++p) {
        for (std::size_t k = 0; k < index.m_slots; ++k) {
            if (index.m_phrase_contexts[p * index.m_slots + k] == kUnassigned) {
                auto [i, j] = context_slot_gap(length, k);
                throw Error("phrase '" + index.m_phrases[p] + "' has no context for gap " + std::to_string(i) +
                            ".." + std::to_string(j));
            }
        }
    }
    return index;
}

std::uint64_t ContextIndex::params_hash() const {
    return Fnv1a{}.add(std::string_view("context-index")).add(m_q).add(static_cast<std::uint64_t>(m_length)).value();
}

std::optional<ContextIndex::PhraseId> ContextIndex::find_phrase(std::string_view key) const {
    auto it = std::lower_bound(m_phrases.begin(), m_phrases.end(), key,
                               [](const std::string& a, std::string_view b) { return a < b; });
    if (it == m_phrases.end() || *it != key) return std::nullopt;
    return static_cast<PhraseId>(it - m_phrases.begin());
}

Context ContextIndex::context(ContextId id) const {
    const ContextRef& ref = m_contexts.at(id);
    const auto words = split_tokens(m_phrases[ref.representative]);
    return make_context(words, ref.gap_start, ref.gap_end);
}

std::string ContextIndex::key(ContextId id) const {
    const ContextRef& ref = m_contexts.at(id);
    std::string out;
    render_key(out, m_phrases[ref.representative], ref.gap_start, ref.gap_end);
    return out;
}

std::span<const ContextIndex::PhraseId> ContextIndex::members(ContextId id) const {
    return {m_members.data() + m_offsets[id], m_members.data() + m_offsets[id + 1]};
}

std::vector<ContextIndex::Posting> ContextIndex::postings(ContextId id) const {
    const ContextRef& ref = m_contexts.at(id);
    const double weight = m_slot_weights[context_slot(m_length, ref.gap_start, ref.gap_end)];
    std::vector<Posting> out;
    for (PhraseId p : members(id)) out.push_back({p, weight * m_frequencies[p]});
    return out;
}

double ContextIndex::joint_weight(ContextId id, PhraseId phrase) const {
    const auto list = members(id);
    if (!std::binary_search(list.begin(), list.end(), phrase)) return 0.0;
    const ContextRef& ref = m_contexts[id];
    return m_slot_weights[context_slot(m_length, ref.gap_start, ref.gap_end)] * m_frequencies[phrase];
}

std::optional<ContextIndex::ContextId> ContextIndex::find_context(std::string_view key) const {
    std::string buffer;
    for (std::size_t c = 0; c < m_contexts.size(); ++c) {
        render_key(buffer, m_phrases[m_contexts[c].representative], m_contexts[c].gap_start, m_contexts[c].gap_end);
        if (buffer == key) return static_cast<ContextId>(c);
    }
    return std::nullopt;
}

std::vector<ContextIndex::ContextId> ContextIndex::contexts_by_key() const {
    // Sort on an 8-byte big-endian key prefix and render full keys only on prefix ties.
    const std::size_t n = m_contexts.size();
    std::vector<std::uint64_t> prefix(n);
    std::string buffer;
    for (std::size_t c = 0; c < n; ++c) {
        render_key(buffer, m_phrases[m_contexts[c].representative], m_contexts[c].gap_start, m_contexts[c].gap_end);
        std::uint64_t v = 0;
        for (std::size_t b = 0; b < 8; ++b) {
            v = (v << 8) | (b < buffer.size() ? static_cast<unsigned char>(buffer[b]) : 0u);
        }
        prefix[c] = v;
    }
    std::vector<ContextId> order(n);
    std::iota(order.begin(), order.end(), 0u);
    std::string left;
    std::string right;
    std::sort(order.begin(), order.end(), [&](ContextId a, ContextId b) {
        if (prefix[a] != prefix[b]) return prefix[a] < prefix[b];
        render_key(left, m_phrases[m_contexts[a].representative], m_contexts[a].gap_start, m_contexts[a].gap_end);
        render_key(right, m_phrases[m_contexts[b].representative], m_contexts[b].gap_start, m_contexts[b].gap_end);
        if (left != right) return left < right;
        return a < b;
    });
    return order;
}

std::span<const ContextIndex::ContextId> ContextIndex::contexts_of(PhraseId phrase) const {
    return {m_phrase_contexts.data() + phrase * m_slots, m_slots};
}

double ContextIndex::all_star_weight() const {
    return m_slot_weights.empty() ? 0.0 : m_slot_weights.back();
}

double ContextIndex::all_star_mass() const {
    double sum = 0.0;
    for (double f : m_frequencies) sum += f;
    return all_star_weight() * sum;
}

double ContextIndex::joint_mass(PhraseId phrase) const {
    double mass = 0.0;
    for (ContextId c : contexts_of(phrase)) mass += joint_weight(c, phrase);
    return mass + all_star_weight() * m_frequencies[phrase];
}

double ContextIndex::context_mass(ContextId id) const {
    double sum = 0.0;
    for (PhraseId p : members(id)) sum += m_frequencies[p];
    const ContextRef& ref = m_contexts[id];
    return m_slot_weights[context_slot(m_length, ref.gap_start, ref.gap_end)] * sum;
}

double ContextIndex::total_mass() const {
    double total = all_star_mass();
    for (std::size_t c = 0; c < m_contexts.size(); ++c) total += context_mass(static_cast<ContextId>(c));
    return total;
}

// --- external word contexts -------------------------------------------------------

double WordContextModel::frequency(std::string_view word, std::string_view context) const {
    auto w = m_entries.find(std::string(word));
    if (w == m_entries.end()) return 0.0;
    auto c = w->second.find(std::string(context));
    return c == w->second.end() ? 0.0 : c->second;
}

double WordContextModel::marginal(std::string_view word) const {
    auto w = m_entries.find(std::string(word));
    if (w == m_entries.end()) return 0.0;
    double sum = 0.0;
    for (const auto& [context, f] : w->second) sum += f;
    return sum;
}

WordContextModel external_word_contexts(const PhraseFrequencyTable& table) {
    WordContextModel model;
    for (int len = 1; len <= table.max_len(); ++len) {
        for (const auto& [key, f] : table.phrases(len)) {
            if (f <= 0.0) continue;
            const auto words = split_tokens(key);
            for (int p = 1; p <= static_cast<int>(words.size()); ++p) {
                model.add(words[p - 1], context_key(make_context(words, p, p)), f);
            }
        }
    }
    return model;
}

double phrase_word_frequency(const PhraseFrequencyTable& table, std::string_view word) {
    double total = 0.0;
    for (int len = 1; len <= table.max_len(); ++len) {
        for (const auto& [key, f] : table.phrases(len)) {
            for (const auto& w : split_tokens(key)) {
                if (w == word) total += f;
            }
        }
    }
    return total;
}

}  // namespace phrasedef
