#include "phrasedef/lexicon.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>

#include "phrasedef/textio.hpp"

namespace phrasedef {

// Token rules apply to the phrase as a whole: punctuation is stripped at the phrase
// edges only, so entries like "rock 'n' roll" keep their inner apostrophes.
std::string normalize_phrase(std::string_view text) {
    std::string spaced;
    bool gap = false;
    for (char32_t cp : decode_utf8(text)) {
        if (cp == U'_' || is_unicode_space(cp)) {
            gap = !spaced.empty();
            continue;
        }
        if (gap) spaced.push_back(' ');
        gap = false;
        append_utf8(spaced, cp);
    }
    if (spaced.empty()) return {};
    return normalize_token(spaced).value_or(std::string());
}

DictionaryIndicator DictionaryIndicator::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot read lexicon " + path.string());
    DictionaryIndicator d;
    d.m_source = path.string();
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const std::size_t tab = line.find('\t');
        d.insert(std::string_view(line).substr(0, tab));
    }
    if (in.bad()) throw Error("error while reading lexicon " + path.string());
    if (d.m_defined.empty()) std::clog << "warning: lexicon " << path.string() << " has no usable entries\n";
    return d;
}

bool DictionaryIndicator::contains(std::string_view phrase) const {
    if (m_defined.contains(phrase)) return true;
    const std::string normalized = normalize_phrase(phrase);
    return normalized != phrase && m_defined.contains(normalized);
}

void DictionaryIndicator::insert(std::string_view phrase) {
    std::string key = normalize_phrase(phrase);
    if (!key.empty()) m_defined.insert(std::move(key));
}

std::uint64_t DictionaryIndicator::identity() const {
    Fnv1a h;
    h.add(std::string_view("lexicon"));
    for (const auto& key : sorted()) h.add(key);
    return h.value();
}

std::vector<std::string> DictionaryIndicator::sorted() const {
    std::vector<std::string> out(m_defined.begin(), m_defined.end());
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace phrasedef
