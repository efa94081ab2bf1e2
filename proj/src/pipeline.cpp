#include "phrasedef/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "phrasedef/context.hpp"
#include "phrasedef/eval.hpp"
#include "phrasedef/lexicon.hpp"
#include "phrasedef/likelihood.hpp"
#include "phrasedef/partition.hpp"
#include "phrasedef/textio.hpp"
#include "phrasedef/tsv.hpp"

namespace phrasedef {

using nlohmann::json;
namespace fs = std::filesystem;

void PipelineConfig::validate() const {
    auto fail = [](const std::string& what) { throw std::invalid_argument(what); };
    if (!(q > 0.0 && q <= 1.0)) fail("q must lie in (0, 1]");
    if (max_len < 1 || max_len > 255) fail("max-len must lie in 1..255");
    if (lengths.empty()) fail("at least one phrase length is required");
    for (std::size_t i = 0; i < lengths.size(); ++i) {
        if (lengths[i] < 2 || lengths[i] > max_len) {
            fail("phrase length " + std::to_string(lengths[i]) + " is outside 2.." + std::to_string(max_len));
        }
        if (i > 0 && lengths[i] <= lengths[i - 1]) fail("lengths must be increasing and distinct");
    }
    if (k < 1) fail("k must be at least 1");
    if (top_n < k) fail("top-n must be at least k");
    if (folds < 2) fail("folds must be at least 2");
    if (cutoffs < 2) fail("cutoffs must be at least 2");
    if (threads < 1) fail("threads must be at least 1");
    if (out.empty()) fail("output directory must not be empty");
    TextConfig::parse_delimiters(delims);
}

std::string PipelineConfig::to_json() const {
    json j;
    j["corpus"] = corpus;
    j["lexicon"] = lexicon;
    j["q"] = q;
    j["max_len"] = max_len;
    j["lengths"] = lengths;
    j["top_n"] = top_n;
    j["k"] = k;
    j["folds"] = folds;
    j["cutoffs"] = cutoffs;
    j["seed"] = seed;
    j["delims"] = delims;
    j["out"] = out;
    j["threads"] = threads;
    return j.dump(2);
}

PipelineConfig PipelineConfig::from_json(std::string_view text, PipelineConfig base) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw Error(std::string("malformed configuration: ") + e.what());
    }
    if (!j.is_object()) throw Error("configuration must be a JSON object");
    try {
        auto take = [&](const char* name, auto& field) {
            if (j.contains(name)) j.at(name).get_to(field);
        };
        take("corpus", base.corpus);
        take("lexicon", base.lexicon);
        take("q", base.q);
        take("max_len", base.max_len);
        take("lengths", base.lengths);
        take("top_n", base.top_n);
        take("k", base.k);
        take("folds", base.folds);
        take("cutoffs", base.cutoffs);
        take("seed", base.seed);
        take("delims", base.delims);
        take("out", base.out);
        take("threads", base.threads);
    } catch (const json::exception& e) {
        throw Error(std::string("bad configuration field: ") + e.what());
    }
    return base;
}

Stage parse_stage(std::string_view name) {
    for (Stage s : {Stage::frequencies, Stage::contexts, Stage::score, Stage::shortlist, Stage::crossval, Stage::all}) {
        if (name == stage_name(s)) return s;
    }
    throw std::invalid_argument("unknown command '" + std::string(name) + "'");
}

const char* stage_name(Stage stage) {
    switch (stage) {
        case Stage::frequencies: return "frequencies";
        case Stage::contexts: return "contexts";
        case Stage::score: return "score";
        case Stage::shortlist: return "shortlist";
        case Stage::crossval: return "crossval";
        case Stage::all: return "all";
    }
    return "?";
}

namespace artifacts {
fs::path config(const fs::path& out) { return out / "config.json"; }
fs::path phrases(const fs::path& out) { return out / "phrases.tsv"; }
fs::path words(const fs::path& out) { return out / "words.tsv"; }
fs::path frequency_stats(const fs::path& out) { return out / "frequencies.json"; }
fs::path contexts(const fs::path& out, int length) { return out / ("contexts_L" + std::to_string(length) + ".tsv"); }
fs::path scores(const fs::path& out, int length) { return out / ("scores_L" + std::to_string(length) + ".tsv"); }
fs::path shortlist(const fs::path& out, int length) { return out / ("shortlist_L" + std::to_string(length) + ".tsv"); }
fs::path frequency_shortlist(const fs::path& out, int length) {
    return out / ("shortlist_frequency_L" + std::to_string(length) + ".tsv");
}
fs::path crossval(const fs::path& out) { return out / "crossval"; }
}  // namespace artifacts

namespace {

// --- stage bookkeeping --------------------------------------------------------------
//
// config.json holds the current configuration and one record per stage that has run:
// a digest of every parameter the stage's output depends on (upstream digests included)
// and the phrase lengths it covered. A downstream stage recomputes the digest it expects
// from its own configuration and refuses to read artifacts recorded under another.

const Stage kOrder[] = {Stage::frequencies, Stage::contexts, Stage::score, Stage::shortlist, Stage::crossval};

json stage_params(Stage stage, const PipelineConfig& c) {
    switch (stage) {
        case Stage::frequencies: return {{"corpus", c.corpus}, {"q", c.q}, {"max_len", c.max_len}, {"delims", c.delims}};
        case Stage::contexts: return {{"q", c.q}};
        case Stage::score: return {{"lexicon", c.lexicon}};
        case Stage::shortlist: return {{"top_n", c.top_n}, {"k", c.k}};
        case Stage::crossval:
            return {{"lexicon", c.lexicon}, {"top_n", c.top_n}, {"k", c.k}, {"folds", c.folds},
                    {"cutoffs", c.cutoffs}, {"seed", c.seed}};
        case Stage::all: break;
    }
    return json::object();
}

std::uint64_t stage_hash(Stage stage, const PipelineConfig& c) {
    Fnv1a h;
    h.add(std::string_view(stage_name(stage)));
    switch (stage) {
        case Stage::frequencies:
            for (const auto& path : c.corpus) h.add(std::string_view(path));
            h.add(static_cast<std::uint64_t>(c.corpus.size())).add(c.q);
            h.add(static_cast<std::uint64_t>(c.max_len)).add(std::string_view(c.delims));
            break;
        case Stage::contexts: h.add(stage_hash(Stage::frequencies, c)); break;
        case Stage::score: h.add(stage_hash(Stage::contexts, c)).add(std::string_view(c.lexicon)); break;
        case Stage::shortlist:
            h.add(stage_hash(Stage::score, c)).add(static_cast<std::uint64_t>(c.top_n));
            h.add(static_cast<std::uint64_t>(c.k));
            break;
        case Stage::crossval:
            h.add(stage_hash(Stage::contexts, c)).add(std::string_view(c.lexicon));
            h.add(static_cast<std::uint64_t>(c.top_n)).add(static_cast<std::uint64_t>(c.k));
            h.add(static_cast<std::uint64_t>(c.folds)).add(static_cast<std::uint64_t>(c.cutoffs)).add(c.seed);
            break;
        case Stage::all: break;
    }
    return h.value();
}

json read_manifest(const fs::path& out) {
    const fs::path path = artifacts::config(out);
    if (!fs::exists(path)) return json::object();
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot read " + path.string());
    try {
        json j = json::parse(in);
        if (!j.is_object()) throw Error(path.string() + " is not a JSON object");
        return j;
    } catch (const json::exception& e) {
        throw Error("malformed " + path.string() + ": " + e.what());
    }
}

void write_manifest(const fs::path& out, const json& manifest) {
    const fs::path path = artifacts::config(out);
    const fs::path tmp = out / "config.json.tmp";
    {
        std::ofstream file(tmp, std::ios::binary);
        if (!file) throw Error("cannot write " + tmp.string());
        file << manifest.dump(2) << '\n';
        if (!file) throw Error("error while writing " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) throw Error("cannot replace " + path.string() + ": " + ec.message());
}

void record_stage(Stage stage, const PipelineConfig& config) {
    const fs::path out = config.out;
    json manifest = read_manifest(out);
    manifest["config"] = json::parse(config.to_json());
    json& stages = manifest["stages"];
    if (!stages.is_object()) stages = json::object();
    const std::string name = stage_name(stage);
    const std::string hash = hex_digest(stage_hash(stage, config));

    std::vector<int> lengths = config.lengths;
    if (stage != Stage::frequencies) {
        // Lengths accumulate across runs made under the same parameters.
        if (stages.contains(name) && stages[name].value("hash", "") == hash) {
            for (int l : stages[name].value("lengths", std::vector<int>{})) lengths.push_back(l);
            std::sort(lengths.begin(), lengths.end());
            lengths.erase(std::unique(lengths.begin(), lengths.end()), lengths.end());
        }
    }
    const bool changed = !stages.contains(name) || stages[name].value("hash", "") != hash;
    json record = {{"hash", hash}, {"params", stage_params(stage, config)}};
    if (stage != Stage::frequencies) record["lengths"] = lengths;
    stages[name] = record;
    if (changed) {
        // Downstream records no longer describe artifacts built on this output.
        bool after = false;
        for (Stage s : kOrder) {
            if (after) stages.erase(stage_name(s));
            if (s == stage) after = true;
        }
    }
    write_manifest(out, manifest);
}

void require_file(const fs::path& path) {
    if (!fs::exists(path)) throw MissingArtifact("missing artifact: " + path.string());
}

void require_stage(Stage upstream, const PipelineConfig& config, int length = 0) {
    const json manifest = read_manifest(config.out);
    const std::string name = stage_name(upstream);
    const json stages = manifest.value("stages", json::object());
    if (!stages.contains(name)) {
        throw ConfigMismatch("no '" + name + "' stage is recorded in " + artifacts::config(config.out).string() +
                             "; rerun it");
    }
    const json& record = stages[name];
    if (record.value("hash", "") != hex_digest(stage_hash(upstream, config))) {
        throw ConfigMismatch("'" + name + "' artifacts were produced with different parameters (recorded " +
                             record.value("params", json::object()).dump() + "); rerun it");
    }
    if (length > 0) {
        const auto lengths = record.value("lengths", std::vector<int>{});
        if (std::find(lengths.begin(), lengths.end(), length) == lengths.end()) {
            throw ConfigMismatch("'" + name + "' did not record length " + std::to_string(length) + "; rerun it");
        }
    }
}

void ensure_out(const PipelineConfig& config) {
    std::error_code ec;
    fs::create_directories(config.out, ec);
    if (ec || !fs::is_directory(config.out)) throw Error("cannot create output directory " + config.out);
}

void require_lexicon(const PipelineConfig& config) {
    if (config.lexicon.empty()) throw std::invalid_argument("a lexicon is required (--lexicon)");
    if (!fs::exists(config.lexicon)) throw MissingArtifact("missing lexicon: " + config.lexicon);
}

DictionaryIndicator load_lexicon(const PipelineConfig& config) {
    require_lexicon(config);
    return DictionaryIndicator::load(config.lexicon);
}

ContextIndex load_index(const PipelineConfig& config, int length) {
    const fs::path out = config.out;
    require_file(artifacts::contexts(out, length));
    require_file(artifacts::phrases(out));
    require_stage(Stage::contexts, config, length);
    return read_context_index(artifacts::contexts(out, length), length, config.q,
                              read_phrase_rows(artifacts::phrases(out), length));
}

double rounded(double v) {
    return std::stod(format_real(v, 12));
}

// --- stages -------------------------------------------------------------------------

void run_frequencies(const PipelineConfig& config, std::ostream* log) {
    if (config.corpus.empty()) throw std::invalid_argument("no corpus given (--corpus)");
    for (const auto& path : config.corpus) {
        if (path != "-" && !fs::exists(path)) throw MissingArtifact("missing corpus file: " + path);
    }
    ensure_out(config);
    TextConfig text = TextConfig::defaults();
    if (!config.delims.empty()) text.delimiters = TextConfig::parse_delimiters(config.delims);

    PartitionParams params;
    params.q = config.q;
    params.max_len = config.max_len;
    params.track_full_mass = true;
    params.threads = config.threads;
    PhraseCounter counter(params);
    std::uint64_t clauses = 0;
    const ClauseSegmenter::Sink sink = [&](Clause&& clause) {
        ++clauses;
        counter.add(std::move(clause));
    };
    for (const auto& path : config.corpus) {
        if (path == "-") {
            read_clauses(std::cin, text, sink);
        } else {
            std::ifstream in(path, std::ios::binary);
            if (!in) throw Error("cannot read corpus file " + path);
            read_clauses(in, text, sink);
        }
    }
    const PhraseFrequencyTable table = counter.finish();
    const fs::path out = config.out;
    write_phrase_table(table, artifacts::phrases(out));
    write_word_table(table, artifacts::words(out));

    json stats;
    stats["clauses"] = clauses;
    stats["tokens"] = rounded(table.total_words());
    stats["distinct_words"] = table.words().size();
    stats["stored_length_mass"] = rounded(table.length_mass());
    stats["full_length_mass"] = rounded(table.full_length_mass());
    json per_length = json::object();
    for (int len = 1; len <= table.max_len(); ++len) {
        per_length[std::to_string(len)] = {{"phrases", table.phrases(len).size()}};
    }
    stats["lengths"] = per_length;
    {
        std::ofstream file(artifacts::frequency_stats(out), std::ios::binary);
        if (!file) throw Error("cannot write " + artifacts::frequency_stats(out).string());
        file << stats.dump(2) << '\n';
    }
    const double gap = std::abs(table.full_length_mass() - table.total_words());
    if (gap > 1e-9 * std::max(1.0, table.total_words()) && log) {
        *log << "warning: partition mass " << format_real(table.full_length_mass(), 12) << " differs from "
             << format_real(table.total_words(), 12) << " tokens\n";
    }
    if (log) {
        *log << "frequencies: " << clauses << " clauses, " << format_real(table.total_words(), 12) << " tokens\n";
    }
    record_stage(Stage::frequencies, config);
}

void run_contexts(const PipelineConfig& config, std::ostream* log) {
    const fs::path out = config.out;
    require_file(artifacts::phrases(out));
    require_stage(Stage::frequencies, config);
    for (int length : config.lengths) {
        PhraseFrequencyTable table(length);
        for (auto& [key, f] : read_phrase_rows(artifacts::phrases(out), length)) table.add_phrase(key, length, f);
        const ContextIndex index = ContextIndex::build(table, length, config.q, config.threads);
        write_context_index(index, artifacts::contexts(out, length));
        if (log) {
            *log << "contexts: length " << length << ", " << index.phrase_count() << " phrases, "
                 << index.context_count() << " contexts\n";
        }
    }
    record_stage(Stage::contexts, config);
}

void run_score(const PipelineConfig& config, std::ostream* log) {
    const fs::path out = config.out;
    for (int length : config.lengths) require_file(artifacts::contexts(out, length));
    const DictionaryIndicator dictionary = load_lexicon(config);
    for (int length : config.lengths) {
        const ContextIndex index = load_index(config, length);
        const LikelihoodTable table = score_phrases(index, dictionary);
        write_scores(score_rows(index, table), artifacts::scores(out, length));
        if (log) {
            const std::size_t defined = static_cast<std::size_t>(std::count(table.defined.begin(), table.defined.end(), 1));
            *log << "score: length " << length << ", " << index.phrase_count() << " phrases, " << defined
                 << " defined, mean likelihood " << format_real(mean_phrase_likelihood(index, table.phrase_scores), 6)
                 << "\n";
        }
    }
    record_stage(Stage::score, config);
}

void run_shortlist(const PipelineConfig& config, std::ostream* log) {
    const fs::path out = config.out;
    for (int length : config.lengths) {
        require_file(artifacts::scores(out, length));
        require_stage(Stage::score, config, length);
    }
    for (int length : config.lengths) {
        const std::vector<ScoreRow> rows = read_scores(artifacts::scores(out, length));
        const Shortlist filtered = double_sort_shortlist(rows, config.top_n, config.k);
        const Shortlist baseline = frequency_shortlist(rows, config.k);
        write_shortlist(filtered, length, artifacts::shortlist(out, length));
        write_shortlist(baseline, length, artifacts::frequency_shortlist(out, length));
        if (log) {
            *log << "shortlist: length " << length << ", " << filtered.entries.size() << " candidates";
            if (filtered.truncated) *log << " (fewer than " << config.k << " undefined phrases available)";
            *log << "\n";
        }
    }
    record_stage(Stage::shortlist, config);
}

void run_crossval_stage(const PipelineConfig& config, bool skip_degenerate, std::ostream* log) {
    const fs::path out = config.out;
    for (int length : config.lengths) require_file(artifacts::contexts(out, length));
    const DictionaryIndicator dictionary = load_lexicon(config);
    CrossValReport report;
    report.params.q = config.q;
    report.params.top_n = config.top_n;
    report.params.k_list = {config.k};
    report.params.folds = config.folds;
    report.params.seed = config.seed;
    report.params.cutoffs = config.cutoffs;
    report.params.threads = config.threads;
    for (int length : config.lengths) {
        const ContextIndex index = load_index(config, length);
        try {
            report.lengths.push_back(run_crossval(index, dictionary, report.params));
        } catch (const ConfigMismatch&) {
            throw;
        } catch (const MissingArtifact&) {
            throw;
        } catch (const Error& e) {
            if (!skip_degenerate) throw;
            report.skipped[length] = e.what();
            if (log) *log << "crossval: skipped " << e.what() << "\n";
            continue;
        }
        if (log) {
            const LengthReport& r = report.lengths.back();
            *log << "crossval: length " << length << ", AUC " << format_real(r.likelihood.auc, 6) << " (likelihood) vs "
                 << format_real(r.frequency.auc, 6) << " (frequency)\n";
        }
    }
    emit_report(report, artifacts::crossval(out));
    record_stage(Stage::crossval, config);
}

}  // namespace

void run_stage(Stage stage, const PipelineConfig& config, std::ostream* log) {
    config.validate();
    if (stage != Stage::frequencies && stage != Stage::all && !fs::is_directory(config.out)) {
        throw MissingArtifact("missing output directory: " + config.out);
    }
    switch (stage) {
        case Stage::frequencies: run_frequencies(config, log); break;
        case Stage::contexts: run_contexts(config, log); break;
        case Stage::score: run_score(config, log); break;
        case Stage::shortlist: run_shortlist(config, log); break;
        case Stage::crossval: run_crossval_stage(config, false, log); break;
        case Stage::all:
            // Fail on a missing lexicon before the expensive stages.
            require_lexicon(config);
            run_frequencies(config, log);
            run_contexts(config, log);
            run_score(config, log);
            run_shortlist(config, log);
            run_crossval_stage(config, true, log);
            break;
    }
}

}  // namespace phrasedef
