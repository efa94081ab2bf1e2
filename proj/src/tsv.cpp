#include "phrasedef/tsv.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <unordered_map>

namespace phrasedef {

namespace {

constexpr const char* kPhraseHeader = "phrase\tlength\tfrequency";
constexpr const char* kContextHeader = "context_key\tphrase\tjoint_weight";
constexpr const char* kScoreHeader = "phrase\tlength\tfrequency\tlikelihood\tdefined";
constexpr const char* kShortlistHeader = "rank\tphrase\tlength\tfrequency\tlikelihood\tdefined";
constexpr const char* kAllStar = "__ALL__";
constexpr int kDigits = 12;

// Buffers rows and writes them in large blocks.
class TsvWriter {
public:
    TsvWriter(const std::filesystem::path& path, const char* header) : m_path(path), m_out(path, std::ios::binary) {
        if (!m_out) throw Error("cannot write " + path.string());
        m_buffer.reserve(1 << 20);
        m_buffer += header;
        m_buffer += '\n';
    }

    TsvWriter& field(std::string_view text) {
        if (!m_line_start) m_buffer += '\t';
        m_buffer += text;
        m_line_start = false;
        return *this;
    }
    TsvWriter& field(double value) { return field(format_real(value, kDigits)); }
    TsvWriter& field(std::size_t value) { return field(std::to_string(value)); }
    TsvWriter& field(int value) { return field(std::to_string(value)); }

    void end_row() {
        m_buffer += '\n';
        m_line_start = true;
        if (m_buffer.size() >= (1u << 20)) drain();
    }

    void close() {
        drain();
        m_out.close();
        if (!m_out) throw Error("error while writing " + m_path.string());
    }

private:
    void drain() {
        m_out.write(m_buffer.data(), static_cast<std::streamsize>(m_buffer.size()));
        m_buffer.clear();
        if (!m_out) throw Error("error while writing " + m_path.string());
    }

    std::filesystem::path m_path;
    std::ofstream m_out;
    std::string m_buffer;
    bool m_line_start = true;
};

class TsvReader {
public:
    TsvReader(const std::filesystem::path& path, const char* header) : m_path(path) {
        if (!std::filesystem::exists(path)) throw MissingArtifact("missing artifact: " + path.string());
        m_in.open(path, std::ios::binary);
        if (!m_in) throw Error("cannot read " + path.string());
        if (std::getline(m_in, m_line)) {
            ++m_line_no;
            strip_cr();
            m_pending = m_line != header;
        }
    }

    // Splits the next data row into exactly `n` tab-separated fields.
    bool next(std::vector<std::string_view>& fields, std::size_t n) {
        while (true) {
            if (m_pending) {
                m_pending = false;
            } else {
                if (!std::getline(m_in, m_line)) return false;
                ++m_line_no;
                strip_cr();
            }
            if (m_line.empty()) continue;
            fields.clear();
            std::string_view rest = m_line;
            while (true) {
                const auto tab = rest.find('\t');
                fields.push_back(rest.substr(0, tab));
                if (tab == std::string_view::npos) break;
                rest.remove_prefix(tab + 1);
            }
            if (fields.size() != n) fail("expected " + std::to_string(n) + " fields");
            return true;
        }
    }

    [[noreturn]] void fail(const std::string& what) const {
        throw Error(m_path.string() + ":" + std::to_string(m_line_no) + ": " + what);
    }

    double real(std::string_view text) const {
        double v = 0.0;
        const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
        if (ec != std::errc{} || ptr != text.data() + text.size()) fail("bad number '" + std::string(text) + "'");
        return v;
    }

    long long integer(std::string_view text) const {
        long long v = 0;
        const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
        if (ec != std::errc{} || ptr != text.data() + text.size()) fail("bad integer '" + std::string(text) + "'");
        return v;
    }

    bool flag(std::string_view text) const {
        if (text == "1") return true;
        if (text == "0") return false;
        fail("bad 0/1 flag '" + std::string(text) + "'");
    }

private:
    void strip_cr() {
        if (!m_line.empty() && m_line.back() == '\r') m_line.pop_back();
    }

    std::filesystem::path m_path;
    std::ifstream m_in;
    std::string m_line;
    std::size_t m_line_no = 0;
    bool m_pending = false;
};

bool close_enough(double a, double b) {
    return std::abs(a - b) <= 1e-9 * std::max(std::abs(a), std::abs(b));
}

std::string all_star_key(int length) {
    std::string key;
    for (int i = 0; i < length; ++i) {
        if (i) key += ' ';
        key += '*';
    }
    return key;
}

}  // namespace

void write_phrase_table(const PhraseFrequencyTable& table, const std::filesystem::path& path) {
    TsvWriter out(path, kPhraseHeader);
    for (int len = 1; len <= table.max_len(); ++len) {
        for (const auto& [key, f] : table.ranked(len)) {
            if (f <= 0.0) continue;
            out.field(key).field(len).field(f).end_row();
        }
    }
    out.close();
}

void write_word_table(const PhraseFrequencyTable& table, const std::filesystem::path& path) {
    std::vector<std::pair<std::string_view, double>> words(table.words().begin(), table.words().end());
    std::sort(words.begin(), words.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    TsvWriter out(path, kPhraseHeader);
    for (const auto& [word, f] : words) out.field(word).field(1).field(f).end_row();
    out.close();
}

PhraseRows read_phrase_rows(const std::filesystem::path& path, int length) {
    TsvReader in(path, kPhraseHeader);
    PhraseRows rows;
    std::vector<std::string_view> fields;
    while (in.next(fields, 3)) {
        const auto len = in.integer(fields[1]);
        if (len != length) continue;
        if (key_length(fields[0]) != length) in.fail("phrase does not have " + std::to_string(length) + " words");
        rows.emplace_back(std::string(fields[0]), in.real(fields[2]));
    }
    return rows;
}

PhraseFrequencyTable read_phrase_table(const std::filesystem::path& phrases, const std::filesystem::path& words,
                                       int max_len) {
    PhraseFrequencyTable table(max_len);
    std::vector<std::string_view> fields;
    {
        TsvReader in(phrases, kPhraseHeader);
        while (in.next(fields, 3)) {
            const auto len = in.integer(fields[1]);
            if (len < 1 || len > max_len) in.fail("phrase length out of range");
            if (key_length(fields[0]) != len) in.fail("length column disagrees with the phrase");
            table.add_phrase(fields[0], static_cast<int>(len), in.real(fields[2]));
        }
    }
    TsvReader in(words, kPhraseHeader);
    while (in.next(fields, 3)) table.add_word(fields[0], in.real(fields[2]));
    return table;
}

void write_context_index(const ContextIndex& index, const std::filesystem::path& path) {
    TsvWriter out(path, kContextHeader);
    for (ContextIndex::ContextId c : index.contexts_by_key()) {
        const std::string key = index.key(c);
        for (const auto& posting : index.postings(c)) {
            out.field(key).field(index.phrase(posting.phrase)).field(posting.joint_weight).end_row();
        }
    }
    if (index.phrase_count() > 0) out.field(all_star_key(index.length())).field(kAllStar).field(index.all_star_mass()).end_row();
    out.close();
}

ContextIndex read_context_index(const std::filesystem::path& path, int length, double q, PhraseRows phrases) {
    if (length < 1 || length > 255) throw std::invalid_argument("bad context index length");
    std::sort(phrases.begin(), phrases.end());
    std::vector<std::string> keys;
    std::vector<double> freqs;
    keys.reserve(phrases.size());
    freqs.reserve(phrases.size());
    for (auto& [key, f] : phrases) {
        if (!keys.empty() && keys.back() == key) throw Error("duplicate phrase '" + key + "' in the phrase table");
        keys.push_back(std::move(key));
        freqs.push_back(f);
    }
    phrases.clear();
    phrases.shrink_to_fit();
    std::unordered_map<std::string_view, ContextIndex::PhraseId> ids;
    ids.reserve(keys.size());
    for (std::size_t p = 0; p < keys.size(); ++p) ids.emplace(keys[p], static_cast<ContextIndex::PhraseId>(p));

    std::vector<double> slot_weight(context_count(length));
    for (std::size_t k = 0; k < slot_weight.size(); ++k) {
        auto [i, j] = context_slot_gap(length, k);
        slot_weight[k] = context_weight(length, i, j, q);
    }

    TsvReader in(path, kContextHeader);
    ContextIndex::Groups groups;
    std::string current;
    Context context;
    std::size_t slot = 0;
    std::optional<double> star_mass;
    std::vector<std::string_view> fields;
    std::vector<std::string_view> words;
    while (in.next(fields, 3)) {
        if (star_mass) in.fail("rows after the all-star aggregate");
        const double weight = in.real(fields[2]);
        if (fields[1] == kAllStar) {
            if (fields[0] != all_star_key(length)) in.fail("all-star row has the wrong pattern");
            star_mass = weight;
            continue;
        }
        if (groups.size() == 0 || fields[0] != current) {
            if (groups.size() != 0 && fields[0] < current) in.fail("context keys are not sorted");
            current = std::string(fields[0]);
            try {
                context = parse_context_key(current);
            } catch (const Error& e) {
                in.fail(e.what());
            }
            if (context.length != length) in.fail("context is not of length " + std::to_string(length));
            if (context.gap_start == 1 && context.gap_end == length) in.fail("all-star context outside the aggregate row");
            slot = context_slot(length, context.gap_start, context.gap_end);
            groups.open(context.gap_start, context.gap_end);
        }
        const auto it = ids.find(fields[1]);
        if (it == ids.end()) in.fail("phrase '" + std::string(fields[1]) + "' is not in the phrase table");
        words.clear();
        std::string_view rest = fields[1];
        while (true) {
            const auto space = rest.find(' ');
            words.push_back(rest.substr(0, space));
            if (space == std::string_view::npos) break;
            rest.remove_prefix(space + 1);
        }
        std::size_t kept = 0;
        for (int pos = 1; pos <= length; ++pos) {
            if (pos >= context.gap_start && pos <= context.gap_end) continue;
            if (words[pos - 1] != context.fixed[kept++]) in.fail("phrase does not match its context key");
        }
        if (!close_enough(weight, slot_weight[slot] * freqs[it->second])) {
            in.fail("joint weight disagrees with q = " + format_real(q, kDigits));
        }
        groups.add(it->second);
    }
    ContextIndex index = ContextIndex::assemble(length, q, std::move(keys), std::move(freqs), std::move(groups));
    if (index.phrase_count() > 0) {
        if (!star_mass) throw Error(path.string() + ": missing all-star aggregate row");
        if (!close_enough(*star_mass, index.all_star_mass())) {
            throw Error(path.string() + ": all-star mass disagrees with the phrase table");
        }
    }
    return index;
}

void write_scores(std::vector<ScoreRow> rows, const std::filesystem::path& path) {
    std::sort(rows.begin(), rows.end(), likelihood_before);
    TsvWriter out(path, kScoreHeader);
    for (const ScoreRow& row : rows) {
        out.field(row.phrase).field(row.length).field(row.frequency).field(row.likelihood);
        out.field(row.defined ? "1" : "0").end_row();
    }
    out.close();
}

std::vector<ScoreRow> read_scores(const std::filesystem::path& path) {
    TsvReader in(path, kScoreHeader);
    std::vector<ScoreRow> rows;
    std::vector<std::string_view> fields;
    while (in.next(fields, 5)) {
        rows.push_back({std::string(fields[0]), static_cast<int>(in.integer(fields[1])), in.real(fields[2]),
                        in.real(fields[3]), in.flag(fields[4])});
    }
    return rows;
}

void write_shortlist(const Shortlist& list, int length, const std::filesystem::path& path) {
    TsvWriter out(path, kShortlistHeader);
    for (const ShortlistEntry& e : list.entries) {
        out.field(e.rank).field(e.phrase).field(length).field(e.frequency).field(e.likelihood);
        out.field(e.defined ? "1" : "0").end_row();
    }
    out.close();
}

std::vector<ShortlistEntry> read_shortlist(const std::filesystem::path& path) {
    TsvReader in(path, kShortlistHeader);
    std::vector<ShortlistEntry> rows;
    std::vector<std::string_view> fields;
    while (in.next(fields, 6)) {
        rows.push_back({static_cast<std::size_t>(in.integer(fields[0])), std::string(fields[1]), in.real(fields[3]),
                        in.real(fields[4]), in.flag(fields[5])});
    }
    return rows;
}

}  // namespace phrasedef
