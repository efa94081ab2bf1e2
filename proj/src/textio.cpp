#include "phrasedef/textio.hpp"

namespace phrasedef {

std::unordered_set<char32_t> TextConfig::default_delimiters() {
    return {U'.', U',', U';', U':', U'!', U'?', U'"', U'(', U')', U'\n'};
}

std::unordered_set<char32_t> TextConfig::default_strip() {
    std::unordered_set<char32_t> out;
    for (char c : std::string_view("!\"$%&'()*+,-./:;<=>?[\\]^`{|}~")) {
        out.insert(static_cast<char32_t>(c));
    }
    for (char32_t c : std::u32string_view(U"¡¿«»‘’‚‛"
                                          U"“”„…–—‹›")) {
        out.insert(c);
    }
    return out;
}

TextConfig TextConfig::defaults() {
    return TextConfig{default_delimiters(), default_strip()};
}

std::unordered_set<char32_t> TextConfig::parse_delimiters(std::string_view chars) {
    std::unordered_set<char32_t> out;
    const std::u32string cps = decode_utf8(chars);
    for (std::size_t i = 0; i < cps.size(); ++i) {
        if (cps[i] == U'\\' && i + 1 < cps.size()) {
            if (cps[i + 1] == U'n') {
                out.insert(U'\n');
                ++i;
                continue;
            }
            if (cps[i + 1] == U't') {
                out.insert(U'\t');
                ++i;
                continue;
            }
        }
        out.insert(cps[i]);
    }
    return out;
}

std::u32string decode_utf8(std::string_view bytes) {
    std::u32string out;
    out.reserve(bytes.size());
    std::size_t i = 0;
    const std::size_t n = bytes.size();
    while (i < n) {
        const auto b0 = static_cast<unsigned char>(bytes[i]);
        if (b0 < 0x80) {
            out.push_back(b0);
            ++i;
            continue;
        }
        int extra = 0;
        char32_t cp = 0;
        char32_t min_cp = 0;
        if ((b0 & 0xe0) == 0xc0) {
            extra = 1;
            cp = b0 & 0x1f;
            min_cp = 0x80;
        } else if ((b0 & 0xf0) == 0xe0) {
            extra = 2;
            cp = b0 & 0x0f;
            min_cp = 0x800;
        } else if ((b0 & 0xf8) == 0xf0) {
            extra = 3;
            cp = b0 & 0x07;
            min_cp = 0x10000;
        } else {
            out.push_back(0xfffd);
            ++i;
            continue;
        }
        std::size_t j = i + 1;
        bool ok = true;
        for (int k = 0; k < extra; ++k, ++j) {
            if (j >= n || (static_cast<unsigned char>(bytes[j]) & 0xc0) != 0x80) {
                ok = false;
                break;
            }
            cp = (cp << 6) | (static_cast<unsigned char>(bytes[j]) & 0x3f);
        }
        if (!ok || cp < min_cp || cp > 0x10ffff || (cp >= 0xd800 && cp <= 0xdfff)) {
            // Resynchronise at the first byte that did not continue the sequence.
            out.push_back(0xfffd);
            i = ok ? j : std::max(j, i + 1);
            continue;
        }
        out.push_back(cp);
        i = j;
    }
    return out;
}

void append_utf8(std::string& out, char32_t cp) {
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xc0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xe0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3f)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
    } else {
        out.push_back(static_cast<char>(0xf0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3f)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3f)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
    }
}

std::string encode_utf8(std::u32string_view cps) {
    std::string out;
    out.reserve(cps.size());
    for (char32_t cp : cps) append_utf8(out, cp);
    return out;
}

bool is_unicode_space(char32_t cp) {
    // C0 controls and DEL never belong inside a token.
    if (cp <= 0x20 || cp == 0x7f) return true;
    switch (cp) {
    case 0x85:
    case 0xa0:
    case 0x1680:
    case 0x2028:
    case 0x2029:
    case 0x202f:
    case 0x205f:
    case 0x3000:
    case 0xfeff:
        return true;
    default:
        return cp >= 0x2000 && cp <= 0x200b;
    }
}

char32_t to_lower(char32_t cp) {
    if (cp < 0x80) {
        return (cp >= U'A' && cp <= U'Z') ? cp + 32 : cp;
    }
    if (cp >= 0xc0 && cp <= 0xde && cp != 0xd7) return cp + 32;
    if (cp >= 0x100 && cp <= 0x17f) {
        if (cp == 0x130) return U'i';
        if (cp == 0x178) return 0xff;
        if ((cp >= 0x100 && cp <= 0x137) || (cp >= 0x14a && cp <= 0x177)) {
            return (cp % 2 == 0) ? cp + 1 : cp;
        }
        if ((cp >= 0x139 && cp <= 0x148) || (cp >= 0x179 && cp <= 0x17e)) {
            return (cp % 2 == 1) ? cp + 1 : cp;
        }
        return cp;
    }
    if (cp >= 0x391 && cp <= 0x3ab && cp != 0x3a2) return cp + 32;
    if (cp == 0x386) return 0x3ac;
    if (cp >= 0x388 && cp <= 0x38a) return cp + 37;
    if (cp == 0x38c) return 0x3cc;
    if (cp == 0x38e || cp == 0x38f) return cp + 63;
    if (cp >= 0x410 && cp <= 0x42f) return cp + 32;
    if (cp >= 0x400 && cp <= 0x40f) return cp + 80;
    return cp;
}

namespace {

// Curly single quotes fold to the ASCII apostrophe inside tokens ("don’t" == "don't").
char32_t fold_inner(char32_t cp) {
    if (cp == 0x2018 || cp == 0x2019) return U'\'';
    return cp;
}

}  // namespace

std::optional<Token> normalize_token(std::string_view raw, const TextConfig& config) {
    const std::u32string cps = decode_utf8(raw);
    std::size_t begin = 0;
    std::size_t end = cps.size();
    while (begin < end && (config.strip.contains(cps[begin]) || is_unicode_space(cps[begin]))) {
        ++begin;
    }
    while (end > begin && (config.strip.contains(cps[end - 1]) || is_unicode_space(cps[end - 1]))) {
        --end;
    }
    if (begin == end) return std::nullopt;
    std::string out;
    out.reserve(end - begin);
    for (std::size_t i = begin; i < end; ++i) {
        append_utf8(out, to_lower(fold_inner(cps[i])));
    }
    return out;
}

std::optional<Token> normalize_token(std::string_view raw) {
    static const TextConfig defaults = TextConfig::defaults();
    return normalize_token(raw, defaults);
}

ClauseSegmenter::ClauseSegmenter(TextConfig config) : m_config(std::move(config)) {}

void ClauseSegmenter::end_token() {
    if (m_raw.empty()) return;
    if (auto token = normalize_token(m_raw, m_config)) {
        m_current.push_back(std::move(*token));
    }
    m_raw.clear();
}

void ClauseSegmenter::end_clause(const Sink& sink) {
    end_token();
    if (!m_current.empty()) {
        sink(std::move(m_current));
        m_current = Clause{};
    }
}

void ClauseSegmenter::feed(std::string_view text, const Sink& sink) {
    // ASCII fast path; anything else goes through the decoder one code point at a time.
    std::size_t i = 0;
    while (i < text.size()) {
        const auto byte = static_cast<unsigned char>(text[i]);
        char32_t cp;
        std::size_t width = 1;
        if (byte < 0x80) {
            cp = byte;
        } else {
            width = (byte & 0xe0) == 0xc0 ? 2 : (byte & 0xf0) == 0xe0 ? 3 : (byte & 0xf8) == 0xf0 ? 4 : 1;
            width = std::min(width, text.size() - i);
            const std::u32string decoded = decode_utf8(text.substr(i, width));
            cp = decoded.front();
            if (cp == 0xfffd) width = 1;
        }
        if (m_config.delimiters.contains(cp)) {
            end_clause(sink);
        } else if (is_unicode_space(cp)) {
            end_token();
        } else {
            append_utf8(m_raw, cp);
        }
        i += width;
    }
}

void ClauseSegmenter::finish(const Sink& sink) {
    end_clause(sink);
}

std::vector<Clause> segment_clauses(std::string_view text, const TextConfig& config) {
    std::vector<Clause> out;
    ClauseSegmenter segmenter(config);
    const ClauseSegmenter::Sink sink = [&out](Clause&& clause) { out.push_back(std::move(clause)); };
    segmenter.feed(text, sink);
    segmenter.finish(sink);
    return out;
}

std::vector<Clause> segment_clauses(std::string_view text) {
    return segment_clauses(text, TextConfig::defaults());
}

void read_clauses(std::istream& in, const TextConfig& config, const ClauseSegmenter::Sink& sink) {
    ClauseSegmenter segmenter(config);
    std::string line;
    while (std::getline(in, line)) {
        line.push_back('\n');
        segmenter.feed(line, sink);
    }
    segmenter.finish(sink);
}

}  // namespace phrasedef
