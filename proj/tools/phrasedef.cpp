// Command-line front end: one subcommand per pipeline stage plus `all`.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>

#include <CLI11.hpp>
#include <json.hpp>

#include "phrasedef/common.hpp"
#include "phrasedef/pipeline.hpp"

namespace {

struct Flags {
    std::vector<std::string> corpus;
    std::string lexicon;
    double q = 0.5;
    int max_len = 5;
    std::vector<int> lengths;
    int length = 0;
    std::size_t top_n = 0;
    std::size_t k = 0;
    std::size_t folds = 0;
    std::size_t cutoffs = 0;
    std::uint64_t seed = 0;
    std::string delims;
    std::string out;
    unsigned threads = 1;
};

struct Options {
    CLI::Option* corpus;
    CLI::Option* lexicon;
    CLI::Option* q;
    CLI::Option* max_len;
    CLI::Option* lengths;
    CLI::Option* length;
    CLI::Option* top_n;
    CLI::Option* k;
    CLI::Option* folds;
    CLI::Option* cutoffs;
    CLI::Option* seed;
    CLI::Option* delims;
    CLI::Option* out;
    CLI::Option* threads;
};

Options add_options(CLI::App& app, Flags& f) {
    Options o{};
    o.corpus = app.add_option("--corpus", f.corpus, "Corpus files, '-' for standard input")->envname("PHRASEDEF_CORPUS");
    o.lexicon = app.add_option("--lexicon", f.lexicon, "Dictionary title list")->envname("PHRASEDEF_LEXICON");
    o.q = app.add_option("--q", f.q, "Boundary probability of random partitioning (default 0.5)")
              ->envname("PHRASEDEF_Q");
    o.max_len = app.add_option("--max-len", f.max_len, "Longest phrase counted (default 5)")
                    ->envname("PHRASEDEF_MAX_LEN");
    o.lengths = app.add_option("--lengths", f.lengths, "Phrase lengths to index and score (default 2,3,4,5)")
                    ->delimiter(',')
                    ->envname("PHRASEDEF_LENGTHS");
    o.length = app.add_option("--length", f.length, "Single phrase length; shorthand for --lengths L")
                   ->envname("PHRASEDEF_LENGTH");
    o.top_n = app.add_option("--top-n", f.top_n, "Frequency cut N (default 100000)")->envname("PHRASEDEF_TOP_N");
    o.k = app.add_option("--k", f.k, "Shortlist size (default 20)")->envname("PHRASEDEF_K");
    o.folds = app.add_option("--folds", f.folds, "Cross-validation folds (default 10)")->envname("PHRASEDEF_FOLDS");
    o.cutoffs = app.add_option("--cutoffs", f.cutoffs, "ROC cutoffs (default 1000)")->envname("PHRASEDEF_CUTOFFS");
    o.seed = app.add_option("--seed", f.seed, "Fold assignment seed (default 0)")->envname("PHRASEDEF_SEED");
    o.delims = app.add_option("--delims", f.delims, "Clause delimiter characters; \\n and \\t are escapes")
                   ->envname("PHRASEDEF_DELIMS");
    o.out = app.add_option("--out", f.out, "Output directory (default out)")->envname("PHRASEDEF_OUT");
    o.threads = app.add_option("--threads", f.threads, "Worker threads (default 1)")->envname("PHRASEDEF_THREADS");
    return o;
}

// Defaults, then the configuration recorded in the output directory, then environment
// and flags.
phrasedef::PipelineConfig resolve(const Flags& f, const Options& o) {
    phrasedef::PipelineConfig config;
    const std::string out = o.out->count() ? f.out : config.out;
    const auto recorded = phrasedef::artifacts::config(out);
    if (std::filesystem::exists(recorded)) {
        std::ifstream in(recorded, std::ios::binary);
        nlohmann::json manifest;
        try {
            manifest = nlohmann::json::parse(in);
        } catch (const nlohmann::json::exception& e) {
            throw phrasedef::Error("malformed " + recorded.string() + ": " + e.what());
        }
        if (manifest.contains("config")) {
            config = phrasedef::PipelineConfig::from_json(manifest["config"].dump(), config);
        }
    }
    config.out = out;
    if (o.corpus->count()) config.corpus = f.corpus;
    if (o.lexicon->count()) config.lexicon = f.lexicon;
    if (o.q->count()) config.q = f.q;
    if (o.max_len->count()) config.max_len = f.max_len;
    if (o.lengths->count()) config.lengths = f.lengths;
    if (o.length->count()) config.lengths = {f.length};
    if (o.top_n->count()) config.top_n = f.top_n;
    if (o.k->count()) config.k = f.k;
    if (o.folds->count()) config.folds = f.folds;
    if (o.cutoffs->count()) config.cutoffs = f.cutoffs;
    if (o.seed->count()) config.seed = f.seed;
    if (o.delims->count()) config.delims = f.delims;
    if (o.threads->count()) config.threads = f.threads;
    std::sort(config.lengths.begin(), config.lengths.end());
    config.lengths.erase(std::unique(config.lengths.begin(), config.lengths.end()), config.lengths.end());
    return config;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Phrase frequency, context and definition-likelihood pipeline"};
    app.require_subcommand(1);
    Flags flags;
    const Options options = add_options(app, flags);
    const std::pair<const char*, const char*> commands[] = {
        {"frequencies", "Count expected phrase frequencies under random partitioning"},
        {"contexts", "Build the star-pattern context index per phrase length"},
        {"score", "Score phrases with the dictionary-definition likelihood"},
        {"shortlist", "Emit double-sorted shortlists of undefined phrases"},
        {"crossval", "Cross-validate the likelihood filter against the frequency baseline"},
        {"all", "Run every stage in order"},
    };
    for (const auto& [name, help] : commands) app.add_subcommand(name, help)->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        const auto stage = phrasedef::parse_stage(app.get_subcommands().front()->get_name());
        const phrasedef::PipelineConfig config = resolve(flags, options);
        phrasedef::run_stage(stage, config, &std::cerr);
    } catch (const std::invalid_argument& e) {
        std::cerr << "phrasedef: invalid argument: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "phrasedef: error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
