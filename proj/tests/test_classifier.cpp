#include "veridict/classifier.hpp"

#include "veridict/error.hpp"
#include "veridict/harness.hpp"

#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>

using namespace veridict;

namespace {

std::vector<LabeledText> toy_corpus() {
    std::vector<LabeledText> corpus;
    for (int i = 0; i < 50; ++i) corpus.push_back({"pos", tokenize("good")});
    for (int i = 0; i < 50; ++i) corpus.push_back({"neg", tokenize("bad")});
    return corpus;
}

// Closed-form naive Bayes posterior for the toy corpus. Classes sorted:
// {neg, pos}. Vocab = {<unk>, good, bad}, 50 tokens per class, Laplace 1:
//   P(good|pos) = 51/53, P(good|neg) = 1/53, priors equal
//   => P(pos|"good") = 51/52.
constexpr double kToyPosGivenGood = 51.0 / 52.0;

std::string temp_path(const char* name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_CASE("train: toy corpus posterior matches the closed-form oracle") {
    auto model = TrainedModel::train(toy_corpus(), {});
    REQUIRE(model->class_names() == std::vector<std::string>{"neg", "pos"});

    ProbVector p = model->predict_soft(tokenize("good"));
    REQUIRE(p.probs.size() == 2);
    CHECK(p.probs[1] == doctest::Approx(kToyPosGivenGood).epsilon(1e-12));
    CHECK(p.probs[1] > 0.9);
    CHECK(model->predict_hard(tokenize("good")).class_name == "pos");
}

TEST_CASE("train: single-class corpus is a configuration error") {
    std::vector<LabeledText> corpus;
    for (int i = 0; i < 10; ++i) corpus.push_back({"only", tokenize("word")});
    CHECK_THROWS_AS(TrainedModel::train(corpus, {}), ConfigError);
    CHECK_THROWS_AS(TrainedModel::train({}, {}), ConfigError);
}

TEST_CASE("predict_soft: empty text returns the class prior for naive Bayes") {
    std::vector<LabeledText> corpus;
    for (int i = 0; i < 30; ++i) corpus.push_back({"pos", tokenize("good")});
    for (int i = 0; i < 10; ++i) corpus.push_back({"neg", tokenize("bad")});
    auto model = TrainedModel::train(corpus, {});
    ProbVector p = model->predict_soft(Text{});
    CHECK(p.probs[0] == doctest::Approx(0.25).epsilon(1e-12));  // neg
    CHECK(p.probs[1] == doctest::Approx(0.75).epsilon(1e-12));  // pos
}

TEST_CASE("predict_soft: probabilities always sum to one") {
    auto model = TrainedModel::train(toy_corpus(), {});
    std::mt19937_64 rng(5);
    for (int i = 0; i < 100; ++i) {
        std::string s;
        for (int w = 0; w < static_cast<int>(rng() % 12); ++w) {
            s += (rng() % 3 == 0) ? "good " : ((rng() % 2) ? "bad " : "zzz ");
        }
        ProbVector p = model->predict_soft(tokenize(s));
        double sum = 0;
        for (double x : p.probs) sum += x;
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-6));
    }
}

TEST_CASE("predict_hard equals argmax of predict_soft on random texts") {
    auto model = TrainedModel::train(toy_corpus(), {});
    std::mt19937_64 rng(11);
    for (int i = 0; i < 100; ++i) {
        std::string s;
        for (int w = 0; w < 1 + static_cast<int>(rng() % 8); ++w) {
            const char* pool[] = {"good", "bad", "fine", "zzz", "q"};
            s += pool[rng() % 5];
            s += ' ';
        }
        Text t = tokenize(s);
        CHECK(model->predict_hard(t).class_id == model->predict_soft(t).argmax());
    }
}

TEST_CASE("argmax tie-break picks the lowest index") {
    ProbVector tied{{0.5, 0.5}};
    CHECK(tied.argmax() == 0);
    ProbVector clear{{0.2, 0.8}};
    CHECK(clear.argmax() == 1);
}

TEST_CASE("determinism: identical text gives bit-identical predictions") {
    auto model = TrainedModel::train(toy_corpus(), {});
    Text t = tokenize("good bad zzz good");
    ProbVector a = model->predict_soft(t);
    ProbVector b = model->predict_soft(t);
    CHECK(a.probs == b.probs);  // exact, not approximate
}

TEST_CASE("query counter: each prediction adds one, batch adds k") {
    auto model = TrainedModel::train(toy_corpus(), {});
    model->reset_queries();
    Text t = tokenize("good");
    model->predict_soft(t);
    model->predict_hard(t);
    CHECK(model->queries_used() == 2);
    std::vector<Text> batch(5, t);
    model->predict_hard_batch(batch);
    CHECK(model->queries_used() == 7);
}

TEST_CASE("save/load round-trips bit-identical predictions") {
    auto model = TrainedModel::train(toy_corpus(), {});
    std::string path = temp_path("veridict_test_model.vmodel.json");
    model->save(path);
    auto loaded = TrainedModel::load(path);

    std::mt19937_64 rng(3);
    for (int i = 0; i < 50; ++i) {
        std::string s;
        for (int w = 0; w < 1 + static_cast<int>(rng() % 6); ++w) {
            const char* pool[] = {"good", "bad", "unknown", "words"};
            s += pool[rng() % 4];
            s += ' ';
        }
        Text t = tokenize(s);
        CHECK(model->predict_soft(t).probs == loaded->predict_soft(t).probs);
    }
    std::remove(path.c_str());
}

TEST_CASE("load: truncated file is a format error") {
    auto model = TrainedModel::train(toy_corpus(), {});
    std::string full = model->to_json_string();
    std::string path = temp_path("veridict_truncated.vmodel.json");
    std::ofstream(path) << full.substr(0, full.size() / 2);
    CHECK_THROWS_AS(TrainedModel::load(path), FormatError);
    std::remove(path.c_str());
}

TEST_CASE("load: version mismatch names expected and found versions") {
    auto model = TrainedModel::train(toy_corpus(), {});
    std::string text = model->to_json_string();
    auto pos = text.find("\"format_version\":1");
    REQUIRE(pos != std::string::npos);
    text.replace(pos, strlen("\"format_version\":1"), "\"format_version\":9");
    try {
        TrainedModel::from_json_string(text);
        FAIL("expected FormatError");
    } catch (const FormatError& e) {
        std::string msg = e.what();
        CHECK(msg.find("1") != std::string::npos);
        CHECK(msg.find("9") != std::string::npos);
    }
}

TEST_CASE("load: missing file is an io error") {
    CHECK_THROWS_AS(TrainedModel::load("/nonexistent/veridict.vmodel.json"), IoError);
}

TEST_CASE("logistic regression: deterministic and better than chance") {
    auto corpus = toy_corpus();
    TrainingConfig config;
    config.kind = ModelKind::logistic_regression;
    config.seed = 7;
    auto a = TrainedModel::train(corpus, config);
    auto b = TrainedModel::train(corpus, config);
    CHECK(a->predict_soft(tokenize("good")).probs == b->predict_soft(tokenize("good")).probs);

    int correct = 0;
    for (const auto& doc : corpus) {
        if (a->predict_hard(doc.text).class_name == doc.label) ++correct;
    }
    CHECK(correct == 100);  // separable toy corpus
}

TEST_CASE("4-class synthetic corpus: held-out accuracy at least 0.9") {
    CorpusGenConfig config;
    config.train_docs_per_class = 150;  // smaller for unit-test speed
    config.test_docs_per_class = 40;
    config.seed = 2024;
    GeneratedCorpus corpus = generate_corpus(config);
    auto model = TrainedModel::train(corpus.train, {});
    int correct = 0;
    for (const auto& doc : corpus.test) {
        if (model->predict_hard(doc.text).class_name == doc.label) ++correct;
    }
    double accuracy = static_cast<double>(correct) / static_cast<double>(corpus.test.size());
    CHECK(accuracy >= 0.9);
}
