#include "veridict/transform.hpp"

#include "veridict/error.hpp"

#include <doctest.h>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>

using namespace veridict;

namespace {

std::string temp_file(const char* name, const std::string& contents) {
    std::string path = (std::filesystem::temp_directory_path() / name).string();
    std::ofstream(path) << contents;
    return path;
}

// Hand oracle: every adjacent swap of `word`, deduplicated, identity removed.
std::set<std::string> swap_oracle(const std::string& word) {
    std::set<std::string> out;
    for (std::size_t i = 0; i + 1 < word.size(); ++i) {
        std::string s = word;
        std::swap(s[i], s[i + 1]);
        if (s != word) out.insert(s);
    }
    return out;
}

}  // namespace

TEST_CASE("lexicon: case restoration follows the source word") {
    auto lex = std::make_shared<SynonymLexicon>();
    lex->add("good", {"great", "fine"});
    auto provider = TransformationProvider::make_lexicon(lex);
    CHECK(provider.candidates("Good") == std::vector<std::string>{"Great", "Fine"});
    CHECK(provider.candidates("good") == std::vector<std::string>{"great", "fine"});
    CHECK(provider.candidates("GOOD") == std::vector<std::string>{"GREAT", "FINE"});
}

TEST_CASE("lexicon: unknown word yields empty candidates") {
    auto lex = std::make_shared<SynonymLexicon>();
    lex->add("good", {"great"});
    auto provider = TransformationProvider::make_lexicon(lex);
    CHECK(provider.candidates("zzz").empty());
}

TEST_CASE("lexicon: self-synonyms are dropped and duplicates removed") {
    SynonymLexicon lex;
    lex.add("good", {"good", "great", "great", "fine"});
    CHECK(lex.lookup("good") == std::vector<std::string>{"great", "fine"});
    lex.add("solo", {"solo"});
    CHECK(lex.lookup("solo").empty());
}

TEST_CASE("load_lexicon: basic file") {
    std::string path = temp_file("veridict_lex.tsv", "good\tgreat,fine\n# comment\n");
    auto lex = SynonymLexicon::load(path);
    CHECK(lex->size() == 1);
    CHECK(lex->lookup("good") == std::vector<std::string>{"great", "fine"});
    std::remove(path.c_str());
}

TEST_CASE("load_lexicon: self-synonym dropped per invariant") {
    std::string path = temp_file("veridict_lex2.tsv", "good\tgood,great\n");
    auto lex = SynonymLexicon::load(path);
    CHECK(lex->lookup("good") == std::vector<std::string>{"great"});
    std::remove(path.c_str());
}

TEST_CASE("load_lexicon: malformed line reported with its line number") {
    std::string path = temp_file("veridict_lex3.tsv", "good\tgreat\nbroken-line-no-tab\n");
    try {
        SynonymLexicon::load(path);
        FAIL("expected FormatError");
    } catch (const FormatError& e) {
        CHECK(std::string(e.what()).find("2") != std::string::npos);
    }
    std::remove(path.c_str());
    CHECK_THROWS_AS(SynonymLexicon::load("/nonexistent/lex.tsv"), IoError);
}

TEST_CASE("load_lexicon: generated 10k-line lexicon has one key per distinct first column") {
    std::mt19937_64 rng(17);
    std::string contents;
    std::set<std::string> distinct;  // independent count
    for (int i = 0; i < 10000; ++i) {
        std::string word = "w" + std::to_string(rng() % 8000);
        distinct.insert(word);
        contents += word + "\tsyn" + std::to_string(i) + ",syn" + std::to_string(i + 1) + "\n";
    }
    std::string path = temp_file("veridict_lex_big.tsv", contents);
    auto lex = SynonymLexicon::load(path);
    CHECK(lex->size() == distinct.size());
    std::remove(path.c_str());
}

TEST_CASE("char ops: swap-only candidates match the hand oracle") {
    CharOpConfig config;
    config.substitute = config.erase = config.insert = false;
    auto provider = TransformationProvider::make_char_ops(config);
    auto got = provider.candidates("abc");
    CHECK(std::set<std::string>(got.begin(), got.end()) ==
          std::set<std::string>{"bac", "acb"});
}

TEST_CASE("char ops: swap completeness on distinct-letter words") {
    CharOpConfig config;
    config.substitute = config.erase = config.insert = false;
    auto provider = TransformationProvider::make_char_ops(config, /*cap=*/64);
    for (const std::string word : {"ab", "abcd", "abcdefgh", "qwertyuiopasd"}) {
        auto got = provider.candidates(word);
        CHECK(got.size() == word.size() - 1);
        CHECK(std::set<std::string>(got.begin(), got.end()) == swap_oracle(word));
    }
}

TEST_CASE("char ops: candidates never contain the word, capped and deterministic") {
    CharOpConfig config;
    config.rng_seed = 99;
    auto provider = TransformationProvider::make_char_ops(config, /*cap=*/20);
    for (const std::string word : {"hello", "Weather", "abcdefghij"}) {
        auto a = provider.candidates(word);
        auto b = provider.candidates(word);
        CHECK(a == b);  // deterministic for fixed seed
        CHECK(a.size() <= 20);
        CHECK(std::find(a.begin(), a.end(), word) == a.end());
        std::set<std::string> dedup(a.begin(), a.end());
        CHECK(dedup.size() == a.size());
    }
}

TEST_CASE("char ops: different seeds reorder the capped sample") {
    CharOpConfig a_cfg;
    a_cfg.rng_seed = 1;
    CharOpConfig b_cfg;
    b_cfg.rng_seed = 2;
    auto a = TransformationProvider::make_char_ops(a_cfg).candidates("resonance");
    auto b = TransformationProvider::make_char_ops(b_cfg).candidates("resonance");
    CHECK(a != b);
}

TEST_CASE("char ops: at least one op must be enabled") {
    CharOpConfig config;
    config.swap_adjacent = config.substitute = config.erase = config.insert = false;
    CHECK_THROWS_AS(TransformationProvider::make_char_ops(config), ConfigError);
}

TEST_CASE("deletion provider: single empty-string sentinel") {
    auto provider = TransformationProvider::make_deletion();
    CHECK(provider.candidates("anything") == std::vector<std::string>{""});
}

TEST_CASE("constraint: stopword positions are never editable") {
    SimilarityConstraint constraint;
    Text t = tokenize("the film was tedious");
    Text edited = apply_edit(t, {EditKind::replace, 0, "a"});
    CHECK(!constraint.check(t, edited, {0}));  // "the" is a stopword
    Text fine = apply_edit(t, {EditKind::replace, 3, "dull"});
    CHECK(constraint.check(t, fine, {3}));
}

TEST_CASE("constraint: zero edits always pass") {
    SimilarityConstraint constraint;
    Text t = tokenize("some words here");
    CHECK(constraint.check(t, t, {}));
}

TEST_CASE("constraint: perturbed ratio cap") {
    SimilarityConstraint constraint;
    constraint.max_perturbed_ratio = 0.2;
    Text t = tokenize("alpha bravo charlie delta echo foxtrot golf hotel india juliet");
    REQUIRE(t.word_count() == 10);
    // 3 edits in a 10-word text: 0.3 > 0.2 -> reject.
    CHECK(!constraint.check(t, t, {1, 2, 3}));
    CHECK(constraint.check(t, t, {1, 2}));
}

TEST_CASE("constraint: min word length blocks short words") {
    SimilarityConstraint constraint;
    constraint.min_word_length = 4;
    constraint.max_perturbed_ratio = 1.0;
    Text t = tokenize("ox stampede runs"); // "ox" too short, "runs" exactly 4
    CHECK(!constraint.check(t, t, {0}));
    CHECK(constraint.check(t, t, {1}));
    CHECK(constraint.check(t, t, {2}));
}

TEST_CASE("constraint: monotone in the perturbed set") {
    SimilarityConstraint constraint;
    constraint.max_perturbed_ratio = 0.5;
    Text t = tokenize("alpha bravo charlie delta echo foxtrot");
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 200; ++trial) {
        std::set<std::size_t> positions;
        for (std::size_t p = 0; p < t.word_count(); ++p) {
            if (rng() % 2) positions.insert(p);
        }
        if (!constraint.check(t, t, positions)) continue;
        std::set<std::size_t> subset;
        for (std::size_t p : positions) {
            if (rng() % 2) subset.insert(p);
        }
        CHECK(constraint.check(t, t, subset));
    }
}

TEST_CASE("stopword file loader matches the builtin list") {
    std::string contents = "# comment line\n";
    for (const auto& w : builtin_stopword_list()) contents += w + "\n";
    std::string path = temp_file("veridict_stops.txt", contents);
    StopwordSet set = StopwordSet::load(path);
    CHECK(set.size() == StopwordSet::builtin().size());
    for (const auto& w : builtin_stopword_list()) CHECK(set.contains(w));
    std::remove(path.c_str());
}

TEST_CASE("bundled stopword data file mirrors the builtin list") {
#ifdef VERIDICT_SOURCE_DIR
    StopwordSet bundled = StopwordSet::load(std::string(VERIDICT_SOURCE_DIR) +
                                            "/data/stopwords_en.txt");
    CHECK(bundled.size() == StopwordSet::builtin().size());
    for (const auto& w : builtin_stopword_list()) CHECK(bundled.contains(w));
#endif
}
