#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace phrasedef {

struct PipelineConfig {
    /// Corpus files read in order; "-" is standard input.
    std::vector<std::string> corpus;
    std::string lexicon;
    double q = 0.5;
    int max_len = 5;
    std::vector<int> lengths{2, 3, 4, 5};
    std::size_t top_n = 100000;
    std::size_t k = 20;
    std::size_t folds = 10;
    std::size_t cutoffs = 1000;
    std::uint64_t seed = 0;
    /// Clause delimiters as typed on the command line; empty selects the default set.
    std::string delims;
    std::string out = "out";
    unsigned threads = 1;

    /// Throws std::invalid_argument.
    void validate() const;

    std::string to_json() const;
    /// Fields absent from `text` keep the values already in `base`.
    static PipelineConfig from_json(std::string_view text, PipelineConfig base);
};

enum class Stage { frequencies, contexts, score, shortlist, crossval, all };

Stage parse_stage(std::string_view name);
const char* stage_name(Stage stage);

/// Artifact paths inside an output directory.
namespace artifacts {
std::filesystem::path config(const std::filesystem::path& out);
std::filesystem::path phrases(const std::filesystem::path& out);
std::filesystem::path words(const std::filesystem::path& out);
std::filesystem::path frequency_stats(const std::filesystem::path& out);
std::filesystem::path contexts(const std::filesystem::path& out, int length);
std::filesystem::path scores(const std::filesystem::path& out, int length);
std::filesystem::path shortlist(const std::filesystem::path& out, int length);
std::filesystem::path frequency_shortlist(const std::filesystem::path& out, int length);
std::filesystem::path crossval(const std::filesystem::path& out);
}  // namespace artifacts

/// Runs one stage (or every stage, in order) against the files in config.out. Missing
/// upstream files raise MissingArtifact; upstream files produced under different
/// parameters raise ConfigMismatch. Progress goes to `log` when it is not null.
void run_stage(Stage stage, const PipelineConfig& config, std::ostream* log = nullptr);

}  // namespace phrasedef
