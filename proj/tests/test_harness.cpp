#include "veridict/harness.hpp"

#include "veridict/error.hpp"

#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

using namespace veridict;

namespace {

std::string temp_path(const char* name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

// Small deterministic fixture shared by the harness tests: a trained target,
// its lexicon components, and a handful of eval pairs.
struct Fixture {
    GeneratedCorpus corpus;
    std::shared_ptr<TrainedModel> target;
    AttackComponents components;
    BalancedEvalSet set;

    explicit Fixture(std::size_t pairs = 20) {
        CorpusGenConfig config;
        config.train_docs_per_class = 120;
        config.test_docs_per_class = 30;
        config.seed = 1234;
        corpus = generate_corpus(config);
        target = TrainedModel::train(corpus.train, {});
        components = AttackComponents{TransformationProvider::make_lexicon(corpus.lexicon),
                                      SimilarityConstraint{},
                                      ImportanceScorerKind::unk_substitution};
        set = build_eval_set(
            *target, corpus.test,
            [&](const Text& text, int gold) {
                return greedy_word_attack(*target, text, gold, components, {});
            },
            pairs);
    }

    DetectorConfig detector() const {
        DetectorConfig config;
        config.components = components;
        return config;
    }
};

Fixture& fixture() {
    static Fixture f;
    return f;
}

}  // namespace

TEST_CASE("corpus csv: round-trip including quoting") {
    std::vector<LabeledText> corpus = {
        {"pos", tokenize("plain words")},
        {"neg", tokenize("commas, \"quotes\" and\nnewlines survive")},
        {"pos", tokenize("")},
    };
    std::string path = temp_path("veridict_corpus.csv");
    save_corpus_csv(path, corpus);
    auto loaded = load_corpus_csv(path);
    REQUIRE(loaded.size() == corpus.size());
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        CHECK(loaded[i].label == corpus[i].label);
        CHECK(loaded[i].text.raw() == corpus[i].text.raw());
    }
    std::remove(path.c_str());
}

TEST_CASE("corpus csv: header and field-count validation") {
    std::string path = temp_path("veridict_bad.csv");
    std::ofstream(path) << "text,label\nx,y\n";
    CHECK_THROWS_AS(load_corpus_csv(path), FormatError);
    std::ofstream(path) << "label,text\na,b,c\n";
    CHECK_THROWS_AS(load_corpus_csv(path), FormatError);
    std::remove(path.c_str());
    CHECK_THROWS_AS(load_corpus_csv("/nonexistent.csv"), IoError);
}

TEST_CASE("attack records: jsonl round-trip") {
    std::vector<AttackRecord> records(2);
    records[0].id = 0;
    records[0].original = "good film";
    records[0].adversarial = "bad film";
    records[0].gold_label = "pos";
    records[0].flipped_label = "neg";
    records[0].perturbed_positions = {0};
    records[0].queries = 7;
    records[1].id = 1;
    records[1].original = "fine movie";
    records[1].gold_label = "pos";
    records[1].queries = 40;

    std::string jsonl = attack_records_to_jsonl(records);
    auto loaded = attack_records_from_jsonl(jsonl);
    REQUIRE(loaded.size() == 2);
    CHECK(loaded[0].adversarial == records[0].adversarial);
    CHECK(loaded[0].flipped_label == records[0].flipped_label);
    CHECK(loaded[0].perturbed_positions == records[0].perturbed_positions);
    CHECK(!loaded[1].adversarial.has_value());
    CHECK(loaded[1].queries == 40);

    CHECK_THROWS_AS(attack_records_from_jsonl("{not json}\n"), FormatError);
}

TEST_CASE("build_eval_set: size zero yields an empty set") {
    auto& f = fixture();
    auto set = build_eval_set(
        *f.target, f.corpus.test,
        [&](const Text& text, int gold) {
            return greedy_word_attack(*f.target, text, gold, f.components, {});
        },
        0);
    CHECK(set.pairs.empty());
    CHECK(!set.partial());
}

TEST_CASE("build_eval_set: unattackable corpus gives a partial set with zero pairs") {
    auto& f = fixture();
    auto empty_lex = std::make_shared<SynonymLexicon>();
    AttackComponents hollow{TransformationProvider::make_lexicon(empty_lex),
                            SimilarityConstraint{}, ImportanceScorerKind::unk_substitution};
    auto set = build_eval_set(
        *f.target, f.corpus.test,
        [&](const Text& text, int gold) {
            return greedy_word_attack(*f.target, text, gold, hollow, {});
        },
        10);
    CHECK(set.pairs.empty());
    CHECK(set.partial());
    CHECK(set.attack_success_rate() == 0.0);
}

TEST_CASE("build_eval_set: invariants hold on a real collection") {
    auto& f = fixture();
    CHECK(f.set.pairs.size() == 20);  // full set collected
    for (const auto& pair : f.set.pairs) {
        CHECK(f.target->predict_hard(pair.original).class_id == pair.gold_class);
        int flipped = f.target->predict_hard(pair.adversarial).class_id;
        CHECK(flipped != pair.gold_class);
        CHECK(flipped == pair.flipped_class);
    }
}

TEST_CASE("eval set records: jsonl round-trip preserves pairs") {
    auto& f = fixture();
    auto records = records_from_eval_set(f.set, f.target->class_names());
    auto rebuilt = eval_set_from_records(records, f.target->class_names());
    REQUIRE(rebuilt.pairs.size() == f.set.pairs.size());
    for (std::size_t i = 0; i < rebuilt.pairs.size(); ++i) {
        CHECK(rebuilt.pairs[i].original.raw() == f.set.pairs[i].original.raw());
        CHECK(rebuilt.pairs[i].adversarial.raw() == f.set.pairs[i].adversarial.raw());
        CHECK(rebuilt.pairs[i].gold_class == f.set.pairs[i].gold_class);
    }
    CHECK_THROWS_AS(eval_set_from_records(records, {"alien", "labels"}), ConfigError);
}

TEST_CASE("evaluate: perfect and degenerate detectors") {
    auto& f = fixture();
    EvalReport report = evaluate(f.detector(), *f.target, f.set);
    // Metric recomputability from counts.
    double p = double(report.tp) / double(report.tp + report.fp);
    double r = double(report.tp) / double(report.tp + report.fn);
    CHECK(report.precision == doctest::Approx(p).epsilon(1e-9));
    CHECK(report.recall == doctest::Approx(r).epsilon(1e-9));
    CHECK(report.f1 == doctest::Approx(2 * p * r / (p + r)).epsilon(1e-9));
    CHECK(report.tp + report.fn == static_cast<long>(f.set.pairs.size()));
    CHECK(report.fp + report.tn == static_cast<long>(f.set.pairs.size()));

    // All-"original" detector (empty lexicon): recall 0, f1 0.
    DetectorConfig blind = f.detector();
    blind.components.provider =
        TransformationProvider::make_lexicon(std::make_shared<SynonymLexicon>());
    EvalReport zero = evaluate(blind, *f.target, f.set);
    CHECK(zero.recall == 0.0);
    CHECK(zero.f1 == 0.0);
    CHECK(zero.tp == 0);
}

TEST_CASE("evaluate: hand-built 4-pair set matches the manual confusion matrix") {
    auto& f = fixture();
    REQUIRE(f.set.pairs.size() >= 4);
    BalancedEvalSet four;
    four.requested = 4;
    for (int i = 0; i < 4; ++i) four.pairs.push_back(f.set.pairs[std::size_t(i)]);

    // Manual oracle: run detect per text and count by hand.
    long tp = 0, fp = 0, fn = 0, tn = 0;
    for (const auto& pair : four.pairs) {
        if (detect(f.detector(), *f.target, pair.adversarial).is_adversarial) ++tp; else ++fn;
        if (detect(f.detector(), *f.target, pair.original).is_adversarial) ++fp; else ++tn;
    }
    EvalReport report = evaluate(f.detector(), *f.target, four);
    CHECK(report.tp == tp);
    CHECK(report.fp == fp);
    CHECK(report.fn == fn);
    CHECK(report.tn == tn);
}

TEST_CASE("sweep_alpha: single-point grid equals evaluate; queries nondecreasing") {
    auto& f = fixture();
    auto one = sweep_alpha(f.detector(), *f.target, f.set, {1.0});
    REQUIRE(one.size() == 1);
    EvalReport direct = evaluate(f.detector(), *f.target, f.set);
    CHECK(one[0].second.f1 == direct.f1);
    CHECK(one[0].second.mean_queries_orig == direct.mean_queries_orig);

    auto graded = sweep_alpha(f.detector(), *f.target, f.set,
                              {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0});
    double prev = -1.0;
    for (const auto& [alpha, report] : graded) {
        double mean = (report.mean_queries_adv + report.mean_queries_orig) / 2.0;
        CHECK(mean >= prev - 1e-9);
        prev = mean;
    }
}

TEST_CASE("max_rate_histogram: hand-computable cases") {
    auto& f = fixture();
    // No candidates anywhere -> rate 0.
    auto empty_provider =
        TransformationProvider::make_lexicon(std::make_shared<SynonymLexicon>());
    auto zero = max_rate_histogram(*f.target, empty_provider,
                                   {f.set.pairs[0].original});
    REQUIRE(zero.max_rates.size() == 1);
    CHECK(zero.max_rates[0] == 0.0);
    CHECK(zero.histogram[0] == 1);

    // Single word with candidates [flip, flip, keep] -> 2/3.
    std::vector<LabeledText> toy;
    for (int i = 0; i < 20; ++i) toy.push_back({"pos", tokenize("good")});
    for (int i = 0; i < 20; ++i) toy.push_back({"neg", tokenize("bad")});
    auto model = TrainedModel::train(toy, {});
    auto lex = std::make_shared<SynonymLexicon>();
    lex->add("good", {"bad", "badly", "fine"});  // bad flips; badly/fine are oov
    // oov candidates keep the prior argmax = neg... compute: "good" is pos;
    // replacing with oov -> prior tie -> argmax neg (class 0 = neg) -> flip!
    // So candidates [bad->neg, badly->neg, fine->neg]: rate 3/3.
    auto rates = max_rate_histogram(*f.target, TransformationProvider::make_lexicon(lex),
                                    {tokenize("good")});
    // note: f.target has 4 classes and no such words; rate must be 0 there
    CHECK(rates.max_rates[0] == 0.0);
    auto toy_rates = max_rate_histogram(*model, TransformationProvider::make_lexicon(lex),
                                        {tokenize("good")});
    REQUIRE(toy_rates.max_rates.size() == 1);
    CHECK(toy_rates.max_rates[0] == doctest::Approx(1.0));
    CHECK(toy_rates.histogram[9] == 1);  // top bin

    // A candidate set where only some flip: with a pos-heavy prior, oov
    // candidates keep pos while the in-vocab neg keywords flip.
    std::vector<LabeledText> skewed;
    for (int i = 0; i < 60; ++i) skewed.push_back({"pos", tokenize("good")});
    for (int i = 0; i < 10; ++i) skewed.push_back({"neg", tokenize("bad")});
    for (int i = 0; i < 10; ++i) skewed.push_back({"neg", tokenize("poor")});
    auto skewed_model = TrainedModel::train(skewed, {});

    auto lex2 = std::make_shared<SynonymLexicon>();
    lex2->add("good", {"goodish", "bad", "fine"});  // [keep, flip, keep]
    auto partial = max_rate_histogram(*skewed_model, TransformationProvider::make_lexicon(lex2),
                                      {tokenize("good")});
    REQUIRE(partial.max_rates.size() == 1);
    CHECK(partial.max_rates[0] == doctest::Approx(1.0 / 3.0));

    auto lex3 = std::make_shared<SynonymLexicon>();
    lex3->add("good", {"bad", "poor", "fine"});  // [flip, flip, keep] -> 2/3
    auto two_thirds = max_rate_histogram(*skewed_model,
                                         TransformationProvider::make_lexicon(lex3),
                                         {tokenize("good")});
    REQUIRE(two_thirds.max_rates.size() == 1);
    CHECK(two_thirds.max_rates[0] == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("importance_ablation: alpha=1 orderings give identical verdicts") {
    auto& f = fixture();
    auto rows = importance_ablation(f.detector(), *f.target, f.set, {1.0}, {9, 10});
    REQUIRE(rows.size() == 1);
    for (const auto& [seed, report] : rows[0].random_runs) {
        CHECK(report.tp == rows[0].importance.tp);
        CHECK(report.fp == rows[0].importance.fp);
        CHECK(report.recall == rows[0].importance.recall);
    }
    CHECK(rows[0].random_runs.size() == 2);  // schema includes every seed
}

TEST_CASE("prediction_count_report: measured within the theoretical bound") {
    auto& f = fixture();
    BudgetReport report = prediction_count_report(f.detector(), *f.target, f.set);
    CHECK(report.all_within_bound);
    CHECK(report.measured_mean_adv <= report.theoretical_mean_adv);
    CHECK(report.measured_mean_orig <= report.theoretical_mean_orig);
    CHECK(report.reduction_pct_adv > 0.0);

    // Empty-lexicon run: about one query per text (the initial label).
    DetectorConfig blind = f.detector();
    blind.components.provider =
        TransformationProvider::make_lexicon(std::make_shared<SynonymLexicon>());
    blind.components.scorer = ImportanceScorerKind::none;
    BudgetReport empty = prediction_count_report(blind, *f.target, f.set);
    CHECK(empty.measured_mean_adv == doctest::Approx(1.0));
    CHECK(empty.measured_mean_orig == doctest::Approx(1.0));
}

TEST_CASE("confidence_sweep: higher floors never raise the success rate") {
    auto& f = fixture();
    DetectorConfig detector = f.detector();
    auto rows = confidence_sweep(*f.target, f.corpus.test, f.components, detector,
                                 {0.6, 0.9}, 40, 3000);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].floor == 0.6);
    // Per text, reaching 0.9 implies the 0.6 floor was crossed on the way up,
    // so the 0.9 yield can never exceed the 0.6 yield.
    CHECK(rows[1].successes <= rows[0].successes);
    CHECK(rows[0].successes > 0);
}

TEST_CASE("binary corpus preset trains an accurate model") {
    CorpusGenConfig config = binary_corpus_config();
    config.train_docs_per_class = 150;
    config.test_docs_per_class = 40;
    config.seed = 31;
    GeneratedCorpus corpus = generate_corpus(config);
    CHECK(corpus.class_names == std::vector<std::string>{"negative", "positive"});
    auto model = TrainedModel::train(corpus.train, {});
    int correct = 0;
    for (const auto& doc : corpus.test) {
        if (model->predict_hard(doc.text).class_name == doc.label) ++correct;
    }
    CHECK(double(correct) / corpus.test.size() >= 0.9);
}

TEST_CASE("default_seed honors VERIDICT_SEED") {
    // setenv is process-global; restore afterwards.
    const char* old = std::getenv("VERIDICT_SEED");
    setenv("VERIDICT_SEED", "123456", 1);
    CHECK(default_seed() == 123456);
    setenv("VERIDICT_SEED", "not-a-number", 1);
    CHECK(default_seed() == 42);
    if (old) setenv("VERIDICT_SEED", old, 1); else unsetenv("VERIDICT_SEED");
}
