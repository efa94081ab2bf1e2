// Drives the phrasedef executable end to end.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <sys/wait.h>

#include <gtest/gtest.h>

#include "phrasedef/pipeline.hpp"
#include "phrasedef/tsv.hpp"

namespace fs = std::filesystem;

namespace {

class CliTest : public ::testing::Test {
protected:
    void SetUp() override {
        dir = fs::temp_directory_path() /
              ("phrasedef_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir);
        fs::create_directories(dir);
        spit(dir / "corpus.txt", "in the contrary\non the contrary\n");
        spit(dir / "lexicon.txt", "on the contrary\n");
    }
    void TearDown() override { fs::remove_all(dir); }

    static void spit(const fs::path& path, const std::string& text) { std::ofstream(path, std::ios::binary) << text; }
    static std::string slurp(const fs::path& path) {
        std::ifstream in(path, std::ios::binary);
        std::stringstream ss;
        ss << in.rdbuf();
        return ss.str();
    }

    // Runs the CLI inside `dir`; returns the exit status and keeps stderr in `err`.
    int run(const std::string& args, const std::string& env = "") {
        const std::string command = "cd '" + dir.string() + "' && " + env + " '" PHRASEDEF_CLI "' " + args +
                                    " > stdout.txt 2> stderr.txt";
        const int status = std::system(command.c_str());
        err = slurp(dir / "stderr.txt");
        return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    }

    fs::path dir;
    std::string err;
};

}  // namespace

TEST_F(CliTest, AllOnTheTwoLineCorpus) {
    ASSERT_EQ(run("all --corpus corpus.txt --lexicon lexicon.txt --q 0.5 --lengths 3 --k 1 --out out"), 0) << err;
    const auto list = phrasedef::read_shortlist(dir / "out" / "shortlist_L3.tsv");
    ASSERT_EQ(list.size(), 1u);
    EXPECT_EQ(list[0].phrase, "in the contrary");
    EXPECT_NEAR(list[0].likelihood, 7.0 / 24, 1e-11);
    for (const char* name : {"config.json", "phrases.tsv", "words.tsv", "frequencies.json", "contexts_L3.tsv",
                             "scores_L3.tsv", "shortlist_frequency_L3.tsv", "crossval/summary.json"}) {
        EXPECT_TRUE(fs::exists(dir / "out" / name)) << name;
    }
    // two phrases cannot fill ten folds; `all` records the skip instead of failing
    EXPECT_NE(slurp(dir / "out" / "crossval" / "summary.json").find("skipped"), std::string::npos);
}

TEST_F(CliTest, ScoreWithoutContextsNamesTheMissingFile) {
    ASSERT_EQ(run("frequencies --corpus corpus.txt --lengths 3 --out out"), 0) << err;
    EXPECT_NE(run("score --lexicon lexicon.txt --out out"), 0);
    EXPECT_NE(err.find("contexts_L3.tsv"), std::string::npos) << err;
}

TEST_F(CliTest, StagesRunSeparately) {
    ASSERT_EQ(run("frequencies --corpus corpus.txt --lengths 3 --out out"), 0) << err;
    ASSERT_EQ(run("contexts --out out"), 0) << err;
    ASSERT_EQ(run("score --lexicon lexicon.txt --out out"), 0) << err;
    ASSERT_EQ(run("shortlist --length 3 --k 1 --top-n 2 --out out"), 0) << err;
    const auto list = phrasedef::read_shortlist(dir / "out" / "shortlist_L3.tsv");
    ASSERT_EQ(list.size(), 1u);
    EXPECT_EQ(list[0].phrase, "in the contrary");
}

TEST_F(CliTest, MismatchedQIsRefused) {
    ASSERT_EQ(run("frequencies --corpus corpus.txt --lengths 3 --out out"), 0) << err;
    EXPECT_NE(run("contexts --q 0.3 --out out"), 0);
    EXPECT_NE(err.find("different parameters"), std::string::npos) << err;
}

TEST_F(CliTest, EnvironmentFallsBehindFlags) {
    ASSERT_EQ(run("frequencies --corpus corpus.txt --lengths 3 --out out", "PHRASEDEF_Q=0.25"), 0) << err;
    EXPECT_NE(slurp(dir / "out" / "config.json").find("\"q\": 0.25"), std::string::npos);
    ASSERT_EQ(run("frequencies --corpus corpus.txt --lengths 3 --out out --q 0.75", "PHRASEDEF_Q=0.25"), 0) << err;
    EXPECT_NE(slurp(dir / "out" / "config.json").find("\"q\": 0.75"), std::string::npos);
}

TEST_F(CliTest, InvalidArgumentsFail) {
    EXPECT_NE(run("frequencies --corpus corpus.txt --q 1.5 --out out"), 0);
    EXPECT_NE(run("frequencies --corpus missing.txt --out out"), 0);
    EXPECT_NE(err.find("missing.txt"), std::string::npos);
    EXPECT_NE(run("bogus"), 0);
    EXPECT_NE(run("shortlist --k 30 --top-n 10 --out out"), 0);
}

TEST_F(CliTest, CrossvalIsByteStable) {
    std::string corpus;
    std::string lexicon;
    // 40 templates "x<k> of y", half defined, plus their siblings "x<k> of z".
    for (int k = 0; k < 40; ++k) {
        const std::string x = "x" + std::to_string(k);
        for (int r = 0; r < 1 + k % 5; ++r) corpus += x + " of y\n" + x + " of z\n";
        if (k % 2 == 0) lexicon += x + " of y\n";
    }
    spit(dir / "corpus.txt", corpus);
    spit(dir / "lexicon.txt", lexicon);
    ASSERT_EQ(run("all --corpus corpus.txt --lexicon lexicon.txt --lengths 3 --folds 5 --seed 4 --out out"), 0) << err;
    const std::string first = slurp(dir / "out" / "crossval" / "summary.json");
    ASSERT_EQ(run("crossval --out out"), 0) << err;
    EXPECT_EQ(slurp(dir / "out" / "crossval" / "summary.json"), first);
    ASSERT_EQ(run("crossval --out out --threads 3"), 0) << err;
    EXPECT_EQ(slurp(dir / "out" / "crossval" / "summary.json"), first);
    EXPECT_EQ(first.find("skipped"), std::string::npos);
}

TEST_F(CliTest, StandardInputCorpus) {
    ASSERT_EQ(run("frequencies --corpus - --lengths 3 --out out < corpus.txt"), 0) << err;
    EXPECT_NE(slurp(dir / "out" / "phrases.tsv").find("in the contrary\t3\t0.25"), std::string::npos);
}
