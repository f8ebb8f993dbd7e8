#include "veridict/attack.hpp"

#include "model_probe.hpp"
#include "veridict/error.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>

using namespace veridict;
using veridict_test::ShadowModel;

namespace {

// Sentiment-flavoured toy corpus: "good"/"fine" mark pos, "bad"/"poor" mark
// neg, "film" is shared. Posteriors are hand-computable.
std::vector<LabeledText> toy_corpus() {
    std::vector<LabeledText> corpus;
    for (int i = 0; i < 40; ++i) corpus.push_back({"pos", tokenize("good film")});
    for (int i = 0; i < 10; ++i) corpus.push_back({"pos", tokenize("fine film")});
    for (int i = 0; i < 40; ++i) corpus.push_back({"neg", tokenize("bad film")});
    for (int i = 0; i < 10; ++i) corpus.push_back({"neg", tokenize("poor film")});
    return corpus;
}

AttackComponents toy_components() {
    auto lex = std::make_shared<SynonymLexicon>();
    lex->add("good", {"bad", "fine"});
    lex->add("bad", {"good", "poor"});
    SimilarityConstraint constraint;
    constraint.max_perturbed_ratio = 1.0;
    return AttackComponents{TransformationProvider::make_lexicon(lex), constraint,
                            ImportanceScorerKind::unk_substitution};
}

int class_id(const Model& m, const std::string& name) {
    const auto& names = m.class_names();
    return static_cast<int>(std::find(names.begin(), names.end(), name) - names.begin());
}

}  // namespace

TEST_CASE("importance_unk: single-word text matches the closed-form NB delta") {
    // Same corpus as the classifier toy oracle: P(pos|"good") = 51/52 and
    // P(pos|"<unk>") = 1/2, so the importance of "good" is 51/52 - 1/2.
    std::vector<LabeledText> corpus;
    for (int i = 0; i < 50; ++i) corpus.push_back({"pos", tokenize("good")});
    for (int i = 0; i < 50; ++i) corpus.push_back({"neg", tokenize("bad")});
    auto model = TrainedModel::train(corpus, {});

    auto scores = importance_unk(*model, tokenize("good"), StopwordSet::builtin());
    REQUIRE(scores.size() == 1);
    CHECK(scores[0].position == 0);
    CHECK(scores[0].score == doctest::Approx(51.0 / 52.0 - 0.5).epsilon(1e-12));
}

TEST_CASE("importance_unk: out-of-vocabulary word scores zero") {
    auto model = TrainedModel::train(toy_corpus(), {});
    auto scores = importance_unk(*model, tokenize("zzzunknown film"), StopwordSet::builtin());
    REQUIRE(scores.size() == 2);
    CHECK(scores[0].score == doctest::Approx(0.0));  // oov -> <unk> changes nothing
}

TEST_CASE("importance_unk: k attackable words consume exactly k+1 queries") {
    auto model = TrainedModel::train(toy_corpus(), {});
    ShadowModel shadow(*model);
    Text text = tokenize("the good film was fine");  // "the"/"was" are stopwords
    auto pool = attackable_positions(text, StopwordSet::builtin());
    REQUIRE(pool.size() == 3);
    importance_unk(shadow, text, StopwordSet::builtin());
    CHECK(shadow.queries_used() == pool.size() + 1);
}

TEST_CASE("importance_deletion: the class keyword scores highest") {
    auto model = TrainedModel::train(toy_corpus(), {});
    Text text = tokenize("good film");
    auto scores = importance_deletion(*model, text, StopwordSet::builtin());
    REQUIRE(scores.size() == 2);
    // Enumerated deletions: dropping "good" must lose more P(pos) than
    // dropping the shared word "film".
    CHECK(scores[0].score > scores[1].score);
    CHECK(scores[0].position == 0);
}

TEST_CASE("importance_deletion: duplicate words scored per position") {
    auto model = TrainedModel::train(toy_corpus(), {});
    Text text = tokenize("good good");
    auto scores = importance_deletion(*model, text, StopwordSet::builtin());
    REQUIRE(scores.size() == 2);
    CHECK(scores[0].position == 0);
    CHECK(scores[1].position == 1);
    CHECK(scores[0].score == doctest::Approx(scores[1].score));
}

TEST_CASE("importance: all-stopword text yields an empty score list") {
    auto model = TrainedModel::train(toy_corpus(), {});
    auto scores = importance_unk(*model, tokenize("the was of"), StopwordSet::builtin());
    CHECK(scores.empty());
}

TEST_CASE("greedy_word_attack: flips the toy model with one substitution") {
    auto model = TrainedModel::train(toy_corpus(), {});
    auto components = toy_components();
    Text text = tokenize("good film");
    int pos = class_id(*model, "pos");

    AttackResult result = greedy_word_attack(*model, text, pos, components);
    REQUIRE(result.success);
    REQUIRE(result.adversarial.has_value());
    CHECK(result.perturbed_positions == std::set<std::size_t>{0});
    // Brute force over the lexicon: replacing good->bad is the only flip.
    CHECK(result.adversarial->tokens[0] == "bad");
    CHECK(model->predict_hard(*result.adversarial).class_id != pos);
    CHECK(result.flipped_class == class_id(*model, "neg"));
}

TEST_CASE("greedy_word_attack: empty candidate sets everywhere mean failure") {
    auto model = TrainedModel::train(toy_corpus(), {});
    auto empty_lex = std::make_shared<SynonymLexicon>();
    AttackComponents components{TransformationProvider::make_lexicon(empty_lex),
                                SimilarityConstraint{}, ImportanceScorerKind::unk_substitution};
    AttackResult result =
        greedy_word_attack(*model, tokenize("good film"), class_id(*model, "pos"), components);
    CHECK(!result.success);
    CHECK(!result.adversarial.has_value());
}

TEST_CASE("greedy_word_attack: success postconditions re-checked") {
    auto model = TrainedModel::train(toy_corpus(), {});
    auto components = toy_components();
    Text text = tokenize("good film");
    AttackResult result =
        greedy_word_attack(*model, text, class_id(*model, "pos"), components);
    REQUIRE(result.success);
    CHECK(components.constraint.check(text, *result.adversarial, result.perturbed_positions));
    CHECK(model->predict_hard(*result.adversarial).class_id !=
          model->predict_hard(text).class_id);
}

TEST_CASE("greedy_word_attack: misclassified input is rejected") {
    auto model = TrainedModel::train(toy_corpus(), {});
    CHECK_THROWS_AS(greedy_word_attack(*model, tokenize("good film"),
                                       class_id(*model, "neg"), toy_components()),
                    ArgumentError);
}

TEST_CASE("greedy_word_attack: query honesty against a shadow counter") {
    auto model = TrainedModel::train(toy_corpus(), {});
    ShadowModel shadow(*model);
    AttackResult result = greedy_word_attack(shadow, tokenize("good film"),
                                             class_id(*model, "pos"), toy_components());
    CHECK(result.queries_used == shadow.queries_used());
}

TEST_CASE("greedy_word_attack: deterministic across runs") {
    auto model = TrainedModel::train(toy_corpus(), {});
    Text text = tokenize("good fine film");
    auto a = greedy_word_attack(*model, text, class_id(*model, "pos"), toy_components());
    auto b = greedy_word_attack(*model, text, class_id(*model, "pos"), toy_components());
    CHECK(a.success == b.success);
    CHECK(a.perturbed_positions == b.perturbed_positions);
    CHECK(a.queries_used == b.queries_used);
    if (a.success) CHECK(a.adversarial->raw() == b.adversarial->raw());
}

TEST_CASE("char_attack: single swap flips the toy model") {
    auto model = TrainedModel::train(toy_corpus(), {});
    CharOpConfig ops;
    ops.substitute = ops.erase = ops.insert = false;  // swap only
    SimilarityConstraint constraint;
    constraint.max_perturbed_ratio = 1.0;
    constraint.min_word_length = 4;
    AttackComponents components{TransformationProvider::make_char_ops(ops), constraint,
                                ImportanceScorerKind::deletion_delta};

    // Enumerated swaps of "good": godo/ogod/godo... all map to <unk>;
    // removing the pos keyword flips to neg via the priors on "film".
    AttackResult result =
        char_attack(*model, tokenize("good film"), class_id(*model, "pos"), components);
    REQUIRE(result.success);
    CHECK(result.perturbed_positions.count(0) == 1);
    // The committed token is a single swap of "good".
    std::string got = result.adversarial->tokens[0];
    std::set<std::string> swaps = {"ogod", "godo", "giod", "gdoo", "oogd"};
    CHECK(got != "good");
    CHECK(got.size() == 4);
}

TEST_CASE("char_attack: min word length skips short words") {
    auto model = TrainedModel::train(toy_corpus(), {});
    CharOpConfig ops;
    SimilarityConstraint constraint;
    constraint.max_perturbed_ratio = 1.0;
    constraint.min_word_length = 4;
    AttackComponents components{TransformationProvider::make_char_ops(ops), constraint,
                                ImportanceScorerKind::deletion_delta};
    // "bad" is only 3 chars: nothing can be edited, attack must fail.
    AttackResult result =
        char_attack(*model, tokenize("bad"), class_id(*model, "neg"), components);
    CHECK(!result.success);
    CHECK(result.perturbed_positions.empty());
}

TEST_CASE("attacks respect the query budget") {
    auto model = TrainedModel::train(toy_corpus(), {});
    for (std::uint64_t budget : {0ull, 1ull, 2ull, 5ull, 50ull}) {
        AttackOptions options;
        options.budget = budget;
        ShadowModel shadow(*model);
        AttackResult result = greedy_word_attack(shadow, tokenize("good fine film"),
                                                 class_id(*model, "pos"), toy_components(),
                                                 options);
        CHECK(result.queries_used <= budget);
        CHECK(result.queries_used == shadow.queries_used());
    }
}

TEST_CASE("input_reduction: flips once the discriminative evidence is deleted") {
    // Prior favours neg (60 "bad" vs 40 "good" docs); "good good" stays pos
    // until every keyword is gone. The exhaustive deletion-order oracle on
    // this 2-word text: every order flips exactly at the empty text, so the
    // result must delete both positions and succeed with label neg.
    std::vector<LabeledText> corpus;
    for (int i = 0; i < 60; ++i) corpus.push_back({"neg", tokenize("bad")});
    for (int i = 0; i < 40; ++i) corpus.push_back({"pos", tokenize("good")});
    auto model = TrainedModel::train(corpus, {});
    {
        // Oracle: enumerate all 4 subsets of positions and record which flip.
        Text text = tokenize("good good");
        auto flips = [&](std::vector<std::size_t> keep) {
            Text t;
            for (std::size_t p : keep) t = apply_edit(t, {EditKind::insert, t.word_count(),
                                                          text.tokens[p]});
            return model->predict_hard(t).class_name != "pos";
        };
        CHECK(!flips({0, 1}));
        CHECK(!flips({0}));
        CHECK(!flips({1}));
        CHECK(flips({}));  // only the empty text flips (prior argmax = neg)
    }
    ShadowModel shadow(*model);
    AttackResult result =
        input_reduction(shadow, tokenize("good good"), class_id(*model, "pos"), 500);
    REQUIRE(result.success);
    CHECK(result.perturbed_positions == std::set<std::size_t>{0, 1});
    CHECK(result.adversarial->word_count() == 0);
    CHECK(result.flipped_class == class_id(*model, "neg"));
    // Iterations: (1+2) + (1+1) + final check = 6 queries.
    CHECK(result.queries_used == 6);
    CHECK(result.queries_used == shadow.queries_used());
}

TEST_CASE("input_reduction: empty text reached without flip is a failure") {
    // Prior-balanced corpus: the empty text predicts the tie-break class 0
    // (neg); a neg-labelled input can never flip by deletion alone.
    std::vector<LabeledText> corpus;
    for (int i = 0; i < 50; ++i) corpus.push_back({"neg", tokenize("bad thing")});
    for (int i = 0; i < 50; ++i) corpus.push_back({"pos", tokenize("good thing")});
    auto model = TrainedModel::train(corpus, {});
    AttackResult result = input_reduction(*model, tokenize("bad"), 0, 500);
    CHECK(!result.success);
}

TEST_CASE("input_reduction: each iteration costs remaining words + 1 queries") {
    std::vector<LabeledText> corpus;
    for (int i = 0; i < 50; ++i) corpus.push_back({"neg", tokenize("bad thing")});
    for (int i = 0; i < 50; ++i) corpus.push_back({"pos", tokenize("good thing")});
    auto model = TrainedModel::train(corpus, {});
    ShadowModel shadow(*model);
    Text text = tokenize("bad thing here");  // 3 words, never flips to pos
    AttackResult result = input_reduction(shadow, text, 0, 10000);
    CHECK(!result.success);
    // Iterations: (1+3) + (1+2) + (1+1) + final check on empty text = 10.
    CHECK(shadow.queries_used() == 10);
    CHECK(result.queries_used == shadow.queries_used());
}

TEST_CASE("attack_until_confidence: floor at 0.5 on a binary task equals a plain flip") {
    auto model = TrainedModel::train(toy_corpus(), {});
    Text text = tokenize("good film");
    int pos = class_id(*model, "pos");
    auto plain = greedy_word_attack(*model, text, pos, toy_components());
    auto floored = attack_until_confidence(*model, text, pos, toy_components(), 0.5 + 1e-9, 2000);
    CHECK(plain.success == floored.success);
    if (plain.success) {
        CHECK(floored.final_confidence >= 0.5);
        CHECK(plain.adversarial->raw() == floored.adversarial->raw());
    }
}

TEST_CASE("attack_until_confidence: unreachable floor is a configuration error") {
    auto model = TrainedModel::train(toy_corpus(), {});
    CHECK_THROWS_AS(attack_until_confidence(*model, tokenize("good film"),
                                            class_id(*model, "pos"), toy_components(), 0.5, 100),
                    ConfigError);  // 0.5 == 1/2 for the binary task
}

TEST_CASE("adaptive_attack: a detector that never flags reduces to the plain attack") {
    auto model = TrainedModel::train(toy_corpus(), {});
    Text text = tokenize("good film");
    int pos = class_id(*model, "pos");
    DetectorOracle never = [](const Text&) { return DetectorProbe{false, 0}; };
    auto plain = greedy_word_attack(*model, text, pos, toy_components());
    auto adaptive = adaptive_attack(*model, never, text, pos, toy_components());
    CHECK(plain.success == adaptive.success);
    if (plain.success) CHECK(plain.adversarial->raw() == adaptive.adversarial->raw());
}

TEST_CASE("adaptive_attack: a detector that always flags forces failure") {
    auto model = TrainedModel::train(toy_corpus(), {});
    DetectorOracle always = [](const Text&) { return DetectorProbe{true, 0}; };
    auto result = adaptive_attack(*model, always, tokenize("good film"),
                                  class_id(*model, "pos"), toy_components());
    CHECK(!result.success);
}
