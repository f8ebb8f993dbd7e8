#include "veridict.h"

#include "veridict/error.hpp"
#include "veridict/harness.hpp"

#include <json.hpp>

#include <cstring>
#include <memory>
#include <string>

using namespace veridict;
using nlohmann::json;

// Opaque handle definitions.
struct vd_model {
    std::shared_ptr<TrainedModel> model;
};
struct vd_components {
    AttackComponents components;
};
struct vd_detector {
    const vd_model* target = nullptr;
    DetectorConfig config;
};
struct vd_evalset {
    std::vector<AttackRecord> records;
};

namespace {

struct ThreadError {
    int code = VD_OK;
    std::string message;
};

ThreadError& tl_error() {
    thread_local ThreadError err;
    return err;
}

void set_error(int code, const std::string& message) {
    tl_error().code = code;
    tl_error().message = message;
}

void clear_error() { set_error(VD_OK, ""); }

// Runs `fn`, translating exceptions into the thread-local error state.
template <typename T, typename Fn>
T guarded(T fail_value, Fn&& fn) {
    clear_error();
    try {
        return fn();
    } catch (const ConfigError& e) {
        set_error(VD_ERR_CONFIG, e.what());
    } catch (const ArgumentError& e) {
        set_error(VD_ERR_ARGUMENT, e.what());
    } catch (const IoError& e) {
        set_error(VD_ERR_IO, e.what());
    } catch (const FormatError& e) {
        set_error(VD_ERR_FORMAT, e.what());
    } catch (const json::exception& e) {
        set_error(VD_ERR_FORMAT, e.what());
    } catch (const std::exception& e) {
        set_error(VD_ERR_INTERNAL, e.what());
    }
    return fail_value;
}

char* dup_string(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (out == nullptr) return nullptr;
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

json parse_config(const char* config_json, const char* what) {
    if (config_json == nullptr || *config_json == '\0') return json::object();
    json j = json::parse(config_json, nullptr, true);
    if (!j.is_object()) throw ConfigError(std::string(what) + " config must be a JSON object");
    return j;
}

template <typename H>
void require(const H* handle, const char* what) {
    if (handle == nullptr) throw ArgumentError(std::string("null ") + what + " handle");
}

TrainingConfig training_config_from_json(const json& j) {
    TrainingConfig config;
    std::string kind = j.value("kind", "naive-bayes");
    if (kind == "naive-bayes") {
        config.kind = ModelKind::naive_bayes;
    } else if (kind == "logistic-regression") {
        config.kind = ModelKind::logistic_regression;
    } else {
        throw ConfigError("unknown model kind '" + kind + "'");
    }
    std::string features = j.value("features", "bow");
    if (features == "bow") {
        config.features = FeatureMode::bow;
    } else if (features == "bow+char3") {
        config.features = FeatureMode::bow_char3;
    } else {
        throw ConfigError("unknown feature mode '" + features + "'");
    }
    config.smoothing = j.value("smoothing", 1.0);
    config.learning_rate = j.value("learning_rate", 0.1);
    config.epochs = j.value("epochs", 30);
    config.seed = j.value("seed", default_seed());
    return config;
}

AttackComponents components_from_json(const json& j) {
    const json provider_j = j.contains("provider") ? j.at("provider") : json::object();
    std::string kind = provider_j.value("kind", "lexicon");
    std::size_t cap = provider_j.value("cap", 20u);

    TransformationProvider provider;
    std::size_t default_min_word_length = 0;
    if (kind == "lexicon") {
        if (!provider_j.contains("lexicon_path")) {
            throw ConfigError("lexicon provider needs lexicon_path");
        }
        provider = TransformationProvider::make_lexicon(
            SynonymLexicon::load(provider_j.at("lexicon_path").get<std::string>()), cap);
    } else if (kind == "char-ops") {
        CharOpConfig ops;
        if (provider_j.contains("ops")) {
            ops.swap_adjacent = ops.substitute = ops.erase = ops.insert = false;
            for (const auto& op : provider_j.at("ops")) {
                std::string name = op.get<std::string>();
                if (name == "swap") ops.swap_adjacent = true;
                else if (name == "substitute") ops.substitute = true;
                else if (name == "delete") ops.erase = true;
                else if (name == "insert") ops.insert = true;
                else throw ConfigError("unknown char op '" + name + "'");
            }
        }
        std::string alphabet = provider_j.value("alphabet", "qwerty");
        if (alphabet == "qwerty") ops.alphabet = CharAlphabet::qwerty_neighbors;
        else if (alphabet == "letters") ops.alphabet = CharAlphabet::lowercase_letters;
        else throw ConfigError("unknown alphabet '" + alphabet + "'");
        ops.rng_seed = provider_j.value("seed", default_seed());
        provider = TransformationProvider::make_char_ops(ops, cap);
        default_min_word_length = 4;
    } else if (kind == "deletion") {
        provider = TransformationProvider::make_deletion();
    } else {
        throw ConfigError("unknown provider kind '" + kind + "'");
    }

    SimilarityConstraint constraint;
    const json constraint_j = j.contains("constraint") ? j.at("constraint") : json::object();
    if (constraint_j.contains("stopwords_path") && !constraint_j["stopwords_path"].is_null()) {
        constraint.stopwords =
            StopwordSet::load(constraint_j["stopwords_path"].get<std::string>());
    }
    constraint.max_perturbed_ratio = constraint_j.value("max_perturbed_ratio", 0.4);
    constraint.min_word_length =
        constraint_j.value("min_word_length", default_min_word_length);

    std::string scorer = j.value("scorer", "unk");
    ImportanceScorerKind scorer_kind;
    if (scorer == "unk") scorer_kind = ImportanceScorerKind::unk_substitution;
    else if (scorer == "deletion") scorer_kind = ImportanceScorerKind::deletion_delta;
    else if (scorer == "none") scorer_kind = ImportanceScorerKind::none;
    else throw ConfigError("unknown scorer '" + scorer + "'");

    return AttackComponents{std::move(provider), std::move(constraint), scorer_kind};
}

struct ParsedAttackOptions {
    std::string kind = "greedy";
    AttackOptions options;
    std::size_t limit = 0;
    std::size_t max_success = 0;
};

ParsedAttackOptions attack_options_from_json(const json& j) {
    ParsedAttackOptions parsed;
    parsed.kind = j.value("kind", "greedy");
    if (parsed.kind != "greedy" && parsed.kind != "char" && parsed.kind != "input-reduction") {
        throw ConfigError("unknown attack kind '" + parsed.kind + "'");
    }
    parsed.options.budget = j.value("budget", 2000u);
    parsed.options.min_confidence = j.value("min_confidence", 0.0);
    parsed.limit = j.value("limit", 0u);
    parsed.max_success = j.value("max_success", 0u);
    return parsed;
}

int class_id_for(const TrainedModel& model, const std::string& label) {
    const auto& names = model.class_names();
    auto it = std::find(names.begin(), names.end(), label);
    if (it == names.end()) {
        throw ConfigError("label '" + label + "' is not one of the model's classes");
    }
    return static_cast<int>(it - names.begin());
}

AttackResult run_attack(const TrainedModel& target, const AttackComponents& components,
                        const vd_detector* adaptive, const Text& text, int gold,
                        const ParsedAttackOptions& parsed) {
    if (adaptive != nullptr) {
        DetectorOracle oracle = make_detector_oracle(adaptive->config, *adaptive->target->model);
        return adaptive_attack(target, oracle, text, gold, components, parsed.options);
    }
    if (parsed.kind == "char") return char_attack(target, text, gold, components, parsed.options);
    if (parsed.kind == "input-reduction") {
        return input_reduction(target, text, gold, parsed.options.budget);
    }
    if (parsed.options.min_confidence > 0.0) {
        return attack_until_confidence(target, text, gold, components,
                                       parsed.options.min_confidence, parsed.options.budget);
    }
    return greedy_word_attack(target, text, gold, components, parsed.options);
}

AttackRecord record_of(std::size_t id, const Text& original, const std::string& gold_label,
                       const TrainedModel& target, const AttackResult& result) {
    AttackRecord record;
    record.id = id;
    record.original = original.raw();
    record.gold_label = gold_label;
    record.queries = result.queries_used;
    record.perturbed_positions.assign(result.perturbed_positions.begin(),
                                      result.perturbed_positions.end());
    if (result.success) {
        record.adversarial = result.adversarial->raw();
        record.flipped_label =
            target.class_names()[static_cast<std::size_t>(result.flipped_class)];
    }
    return record;
}

BalancedEvalSet resolve_eval_set(const vd_evalset& set, const TrainedModel& target) {
    return eval_set_from_records(set.records, target.class_names());
}

}  // namespace

extern "C" {

const char* vd_version(void) { return "0.1.0"; }

int vd_last_error_code(void) { return tl_error().code; }

const char* vd_last_error(void) { return tl_error().message.c_str(); }

void vd_string_free(char* s) { std::free(s); }

// ----------------------------------------------------------------- models

vd_model* vd_model_train_csv(const char* corpus_csv_path, const char* config_json) {
    return guarded<vd_model*>(nullptr, [&]() {
        if (corpus_csv_path == nullptr) throw ArgumentError("null corpus path");
        auto corpus = load_corpus_csv(corpus_csv_path);
        auto config = training_config_from_json(parse_config(config_json, "training"));
        return new vd_model{TrainedModel::train(corpus, config)};
    });
}

vd_model* vd_model_load(const char* path) {
    return guarded<vd_model*>(nullptr, [&]() {
        if (path == nullptr) throw ArgumentError("null model path");
        return new vd_model{TrainedModel::load(path)};
    });
}

int vd_model_save(const vd_model* model, const char* path) {
    guarded<int>(0, [&]() {
        require(model, "model");
        if (path == nullptr) throw ArgumentError("null model path");
        model->model->save(path);
        return 0;
    });
    return vd_last_error_code();
}

void vd_model_free(vd_model* model) { delete model; }

char* vd_model_predict(const vd_model* model, const char* text) {
    return guarded<char*>(nullptr, [&]() {
        require(model, "model");
        if (text == nullptr) throw ArgumentError("null text");
        ProbVector probs = model->model->predict_soft(tokenize(text));
        int id = probs.argmax();
        json j = {{"class_id", id},
                  {"class_name", model->model->class_names()[static_cast<std::size_t>(id)]},
                  {"probs", probs.probs}};
        return dup_string(j.dump());
    });
}

char* vd_model_info(const vd_model* model) {
    return guarded<char*>(nullptr, [&]() {
        require(model, "model");
        const auto& config = model->model->config();
        json j = {{"kind", model->model->kind() == ModelKind::naive_bayes
                               ? "naive-bayes"
                               : "logistic-regression"},
                  {"classes", model->model->class_names()},
                  {"features",
                   config.features == FeatureMode::bow ? "bow" : "bow+char3"}};
        return dup_string(j.dump());
    });
}

uint64_t vd_model_queries(const vd_model* model) {
    return model == nullptr ? 0 : model->model->queries_used();
}

void vd_model_reset_queries(const vd_model* model) {
    if (model != nullptr) model->model->reset_queries();
}

// ------------------------------------------------------------- components

vd_components* vd_components_create(const char* config_json) {
    return guarded<vd_components*>(nullptr, [&]() {
        json j = parse_config(config_json, "components");
        return new vd_components{components_from_json(j)};
    });
}

void vd_components_free(vd_components* components) { delete components; }

// --------------------------------------------------------------- detector

vd_detector* vd_detector_create(const vd_model* target, const vd_components* components,
                                const char* config_json) {
    return guarded<vd_detector*>(nullptr, [&]() {
        require(target, "model");
        require(components, "components");
        json j = parse_config(config_json, "detector");
        auto detector = std::make_unique<vd_detector>();
        detector->target = target;
        detector->config.components = components->components;
        detector->config.word_ratio = j.value("alpha", 1.0);
        detector->config.early_stop = j.value("early_stop", true);
        std::string order = j.value("order", "importance");
        if (order == "importance") {
            detector->config.order = WordOrder::by_scorer;
        } else if (order == "random") {
            detector->config.order = WordOrder::random;
        } else {
            throw ConfigError("unknown word order '" + order + "'");
        }
        detector->config.random_order_seed = j.value("random_seed", 0u);
        if (!(detector->config.word_ratio > 0.0) || detector->config.word_ratio > 1.0) {
            throw ConfigError("alpha must lie in (0,1]");
        }
        return detector.release();
    });
}

int vd_detector_add_support(vd_detector* detector, const vd_model* support) {
    guarded<int>(0, [&]() {
        require(detector, "detector");
        require(support, "support model");
        if (support->model->class_names() != detector->target->model->class_names()) {
            throw ConfigError("support model class set differs from the target's");
        }
        detector->config.supports.push_back(support->model);
        return 0;
    });
    return vd_last_error_code();
}

char* vd_detect(const vd_detector* detector, const char* text) {
    return guarded<char*>(nullptr, [&]() {
        require(detector, "detector");
        if (text == nullptr) throw ArgumentError("null text");
        Verdict verdict = detect(detector->config, *detector->target->model, tokenize(text));
        return dup_string(verdict_to_json(verdict, *detector->target->model));
    });
}

void vd_detector_free(vd_detector* detector) { delete detector; }

// ----------------------------------------------------------------- attacks

char* vd_attack_text(const vd_model* target, const vd_components* components,
                     const vd_detector* adaptive_detector, const char* text,
                     const char* gold_label, const char* options_json) {
    return guarded<char*>(nullptr, [&]() {
        require(target, "model");
        require(components, "components");
        if (text == nullptr || gold_label == nullptr) {
            throw ArgumentError("null text or gold label");
        }
        auto parsed = attack_options_from_json(parse_config(options_json, "attack"));
        Text input = tokenize(text);
        int gold = class_id_for(*target->model, gold_label);
        AttackResult result = run_attack(*target->model, components->components,
                                         adaptive_detector, input, gold, parsed);
        AttackRecord record = record_of(0, input, gold_label, *target->model, result);
        auto jsonl = attack_records_to_jsonl({record});
        if (!jsonl.empty() && jsonl.back() == '\n') jsonl.pop_back();
        return dup_string(jsonl);
    });
}

char* vd_attack_corpus(const vd_model* target, const vd_components* components,
                       const vd_detector* adaptive_detector, const char* corpus_csv_path,
                       const char* options_json) {
    return guarded<char*>(nullptr, [&]() {
        require(target, "model");
        require(components, "components");
        if (corpus_csv_path == nullptr) throw ArgumentError("null corpus path");
        auto parsed = attack_options_from_json(parse_config(options_json, "attack"));
        auto corpus = load_corpus_csv(corpus_csv_path);

        std::vector<AttackRecord> records;
        std::size_t successes = 0;
        for (std::size_t i = 0; i < corpus.size(); ++i) {
            if (parsed.limit > 0 && i >= parsed.limit) break;
            if (parsed.max_success > 0 && successes >= parsed.max_success) break;
            const auto& doc = corpus[i];
            int gold = class_id_for(*target->model, doc.label);
            if (target->model->predict_hard(doc.text).class_id != gold) {
                AttackRecord skip;
                skip.id = i;
                skip.original = doc.text.raw();
                skip.gold_label = doc.label;
                skip.queries = 1;  // the misclassification check
                records.push_back(std::move(skip));
                continue;
            }
            AttackResult result = run_attack(*target->model, components->components,
                                             adaptive_detector, doc.text, gold, parsed);
            if (result.success) ++successes;
            records.push_back(record_of(i, doc.text, doc.label, *target->model, result));
        }
        return dup_string(attack_records_to_jsonl(records));
    });
}

// --------------------------------------------------------------- eval sets

vd_evalset* vd_evalset_load_jsonl(const char* path) {
    return guarded<vd_evalset*>(nullptr, [&]() {
        if (path == nullptr) throw ArgumentError("null path");
        return new vd_evalset{load_attack_jsonl(path)};
    });
}

vd_evalset* vd_evalset_from_jsonl(const char* jsonl) {
    return guarded<vd_evalset*>(nullptr, [&]() {
        if (jsonl == nullptr) throw ArgumentError("null jsonl");
        return new vd_evalset{attack_records_from_jsonl(jsonl)};
    });
}

size_t vd_evalset_size(const vd_evalset* set) {
    if (set == nullptr) return 0;
    size_t pairs = 0;
    for (const auto& r : set->records) {
        if (r.adversarial) ++pairs;
    }
    return pairs;
}

void vd_evalset_free(vd_evalset* set) { delete set; }

// ----------------------------------------------------------------- reports

char* vd_evaluate(const vd_detector* detector, const vd_evalset* set, int include_wall_time) {
    return guarded<char*>(nullptr, [&]() {
        require(detector, "detector");
        require(set, "eval set");
        BalancedEvalSet pairs = resolve_eval_set(*set, *detector->target->model);
        if (pairs.pairs.empty()) throw ConfigError("eval set has no successful adversarials");
        EvalReport report = evaluate(detector->config, *detector->target->model, pairs);
        return dup_string(report_to_json(report, include_wall_time != 0));
    });
}

char* vd_max_rate_histogram(const vd_model* target, const vd_components* components,
                            const vd_evalset* set) {
    return guarded<char*>(nullptr, [&]() {
        require(target, "model");
        require(components, "components");
        require(set, "eval set");
        BalancedEvalSet pairs = resolve_eval_set(*set, *target->model);
        std::vector<Text> advs, origs;
        for (const auto& pair : pairs.pairs) {
            advs.push_back(pair.adversarial);
            origs.push_back(pair.original);
        }
        auto side_json = [&](const std::vector<Text>& texts) {
            MaxRateResult result =
                max_rate_histogram(*target->model, components->components.provider, texts);
            double mean = 0.0;
            for (double r : result.max_rates) mean += r;
            if (!result.max_rates.empty()) mean /= static_cast<double>(result.max_rates.size());
            return json{{"mean", mean},
                        {"rates", result.max_rates},
                        {"histogram", result.histogram}};
        };
        json j = {{"adv", side_json(advs)}, {"orig", side_json(origs)}};
        return dup_string(j.dump());
    });
}

char* vd_prediction_report(const vd_detector* detector, const vd_evalset* set) {
    return guarded<char*>(nullptr, [&]() {
        require(detector, "detector");
        require(set, "eval set");
        BalancedEvalSet pairs = resolve_eval_set(*set, *detector->target->model);
        BudgetReport report =
            prediction_count_report(detector->config, *detector->target->model, pairs);
        json j = {{"theoretical_mean",
                   {{"adv", report.theoretical_mean_adv}, {"orig", report.theoretical_mean_orig}}},
                  {"measured_mean",
                   {{"adv", report.measured_mean_adv}, {"orig", report.measured_mean_orig}}},
                  {"reduction_pct",
                   {{"adv", report.reduction_pct_adv}, {"orig", report.reduction_pct_orig}}},
                  {"all_within_bound", report.all_within_bound}};
        return dup_string(j.dump());
    });
}

// ------------------------------------------------------------------ corpus

char* vd_corpus_generate(const char* config_json, const char* train_csv_path,
                         const char* test_csv_path, const char* lexicon_tsv_path) {
    return guarded<char*>(nullptr, [&]() {
        if (train_csv_path == nullptr || test_csv_path == nullptr ||
            lexicon_tsv_path == nullptr) {
            throw ArgumentError("null output path");
        }
        json j = parse_config(config_json, "corpus");
        CorpusGenConfig config;
        if (j.value("preset", "") == "binary") config = binary_corpus_config();
        config.classes = j.value("classes", config.classes);
        config.groups_per_class = j.value("groups_per_class", config.groups_per_class);
        config.variants_per_group = j.value("variants_per_group", config.variants_per_group);
        config.train_docs_per_class = j.value("train_docs_per_class", config.train_docs_per_class);
        config.test_docs_per_class = j.value("test_docs_per_class", config.test_docs_per_class);
        config.filler_words = j.value("filler_words", config.filler_words);
        config.filler_synonym_groups =
            j.value("filler_synonym_groups", config.filler_synonym_groups);
        config.min_keywords = j.value("min_keywords", config.min_keywords);
        config.max_keywords = j.value("max_keywords", config.max_keywords);
        config.min_away_keywords = j.value("min_away_keywords", config.min_away_keywords);
        config.max_away_keywords = j.value("max_away_keywords", config.max_away_keywords);
        config.min_variants = j.value("min_variants", config.min_variants);
        config.max_variants = j.value("max_variants", config.max_variants);
        config.min_fillers = j.value("min_fillers", config.min_fillers);
        config.max_fillers = j.value("max_fillers", config.max_fillers);
        config.stopword_rate = j.value("stopword_rate", config.stopword_rate);
        config.seed = j.value("seed", default_seed());

        GeneratedCorpus corpus = generate_corpus(config);
        save_corpus_csv(train_csv_path, corpus.train);
        save_corpus_csv(test_csv_path, corpus.test);
        corpus.lexicon->save(lexicon_tsv_path);
        json summary = {{"classes", corpus.class_names},
                        {"train_docs", corpus.train.size()},
                        {"test_docs", corpus.test.size()},
                        {"lexicon_entries", corpus.lexicon->size()},
                        {"seed", config.seed}};
        return dup_string(summary.dump());
    });
}

}  // extern "C"
