#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "phrasedef/context.hpp"
#include "phrasedef/likelihood.hpp"
#include "phrasedef/partition.hpp"

namespace phrasedef {

using PhraseRows = std::vector<std::pair<std::string, double>>;

/// phrase<TAB>length<TAB>frequency, sorted by length, descending frequency, then phrase.
void write_phrase_table(const PhraseFrequencyTable& table, const std::filesystem::path& path);
/// Raw word counts in the same layout, with length 1.
void write_word_table(const PhraseFrequencyTable& table, const std::filesystem::path& path);
/// Rows of one length, in file order. Throws MissingArtifact when the file is absent.
PhraseRows read_phrase_rows(const std::filesystem::path& path, int length);
/// Whole phrase and word files back into a table.
PhraseFrequencyTable read_phrase_table(const std::filesystem::path& phrases, const std::filesystem::path& words,
                                       int max_len);

/// context_key<TAB>phrase<TAB>joint_weight, sorted by key then phrase, followed by the
/// all-star aggregate row.
void write_context_index(const ContextIndex& index, const std::filesystem::path& path);
/// Rebuilds an index from a contexts file and the phrase rows of the same length. Every
/// row is checked against the phrase it names: the key must be that phrase with its gap
/// starred, and the joint weight must match P(c|s) f(s) under `q`.
ContextIndex read_context_index(const std::filesystem::path& path, int length, double q, PhraseRows phrases);

/// phrase<TAB>length<TAB>frequency<TAB>likelihood<TAB>defined, ranked by likelihood.
void write_scores(std::vector<ScoreRow> rows, const std::filesystem::path& path);
std::vector<ScoreRow> read_scores(const std::filesystem::path& path);

/// rank<TAB>phrase<TAB>length<TAB>frequency<TAB>likelihood<TAB>defined
void write_shortlist(const Shortlist& list, int length, const std::filesystem::path& path);
std::vector<ShortlistEntry> read_shortlist(const std::filesystem::path& path);

}  // namespace phrasedef
