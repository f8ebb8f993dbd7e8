// veridict command-line interface. Everything runs through the C API in
// libveridict; this translation unit only parses arguments, shuttles JSON,
// and writes output files.

#include <veridict.h>

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitIo = 2;

int exit_code_for(int vd_code) {
    switch (vd_code) {
        case VD_OK:
            return kExitOk;
        case VD_ERR_IO:
        case VD_ERR_FORMAT:
            return kExitIo;
        default:
            return kExitConfig;
    }
}

[[noreturn]] void die_on_error() {
    std::cerr << "error: " << vd_last_error() << "\n";
    std::exit(exit_code_for(vd_last_error_code()));
}

// RAII for C API strings and handles.
struct CString {
    char* ptr = nullptr;
    ~CString() { vd_string_free(ptr); }
    std::string str() const { return ptr ? std::string(ptr) : std::string(); }
};

template <typename T, void (*Free)(T*)>
struct Handle {
    T* ptr = nullptr;
    Handle() = default;
    explicit Handle(T* p) : ptr(p) {}
    Handle(const Handle&) = delete;
    Handle& operator=(const Handle&) = delete;
    Handle(Handle&& other) noexcept : ptr(other.ptr) { other.ptr = nullptr; }
    Handle& operator=(Handle&& other) noexcept {
        if (this != &other) {
            if (ptr) Free(ptr);
            ptr = other.ptr;
            other.ptr = nullptr;
        }
        return *this;
    }
    ~Handle() {
        if (ptr) Free(ptr);
    }
    T* get() const { return ptr; }
    explicit operator bool() const { return ptr != nullptr; }
};

using ModelHandle = Handle<vd_model, vd_model_free>;
using ComponentsHandle = Handle<vd_components, vd_components_free>;
using DetectorHandle = Handle<vd_detector, vd_detector_free>;
using EvalsetHandle = Handle<vd_evalset, vd_evalset_free>;

void write_file(const std::string& path, const std::string& contents) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        std::cerr << "error: cannot open '" << path << "' for writing\n";
        std::exit(kExitIo);
    }
    out << contents;
    if (!out) {
        std::cerr << "error: write failed for '" << path << "'\n";
        std::exit(kExitIo);
    }
}

void emit(const std::string& contents, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << contents;
        if (contents.empty() || contents.back() != '\n') std::cout << '\n';
    } else {
        std::string body = contents;
        if (body.empty() || body.back() != '\n') body += '\n';
        write_file(out_path, body);
    }
}

// -------------------------------------------------------------------------
// Shared option groups
// -------------------------------------------------------------------------

struct ComponentOptions {
    std::string provider = "lexicon";
    std::string lexicon_path;
    std::string ops = "swap,substitute,delete,insert";
    std::string alphabet = "qwerty";
    std::size_t cap = 20;
    std::string scorer = "unk";
    std::string stopwords_path;
    double epsilon = 0.4;
    int min_word_length = -1;  // -1: provider default (4 for char-ops, 0 otherwise)
    std::optional<std::uint64_t> seed;

    void attach(CLI::App* cmd) {
        cmd->add_option("--provider", provider, "Transformation provider")
            ->check(CLI::IsMember({"lexicon", "char-ops", "deletion"}))
            ->capture_default_str();
        cmd->add_option("--lexicon", lexicon_path, "Synonym lexicon TSV (lexicon provider)");
        cmd->add_option("--ops", ops, "Enabled char ops, comma separated")
            ->capture_default_str();
        cmd->add_option("--alphabet", alphabet, "Char substitution alphabet")
            ->check(CLI::IsMember({"qwerty", "letters"}))
            ->capture_default_str();
        cmd->add_option("--cap", cap, "Max candidates per word")->capture_default_str();
        cmd->add_option("--scorer", scorer, "Word importance scorer")
            ->check(CLI::IsMember({"unk", "deletion", "none"}))
            ->capture_default_str();
        cmd->add_option("--stopwords", stopwords_path,
                        "Stopword list path (default: bundled English list)");
        cmd->add_option("--epsilon", epsilon, "Max perturbed word ratio")
            ->capture_default_str();
        cmd->add_option("--min-word-len", min_word_length,
                        "Min word length for edits (default 4 for char-ops, else 0)");
    }

    std::string to_json(std::optional<std::uint64_t> global_seed) const {
        json provider_j;
        provider_j["kind"] = provider;
        provider_j["cap"] = cap;
        if (provider == "lexicon") {
            if (lexicon_path.empty()) {
                std::cerr << "error: --lexicon is required with the lexicon provider\n";
                std::exit(kExitConfig);
            }
            provider_j["lexicon_path"] = lexicon_path;
        } else if (provider == "char-ops") {
            json op_list = json::array();
            std::stringstream ss(ops);
            std::string op;
            while (std::getline(ss, op, ',')) {
                if (!op.empty()) op_list.push_back(op);
            }
            provider_j["ops"] = op_list;
            provider_j["alphabet"] = alphabet;
            if (global_seed) provider_j["seed"] = *global_seed;
        }
        json constraint_j;
        constraint_j["max_perturbed_ratio"] = epsilon;
        if (!stopwords_path.empty()) constraint_j["stopwords_path"] = stopwords_path;
        if (min_word_length >= 0) constraint_j["min_word_length"] = min_word_length;
        return json{{"provider", provider_j},
                    {"scorer", scorer},
                    {"constraint", constraint_j}}
            .dump();
    }
};

struct DetectorOptions {
    double alpha = 1.0;
    bool no_early_stop = false;
    std::string order = "importance";
    std::uint64_t random_seed = 0;
    std::vector<std::string> support_paths;

    void attach(CLI::App* cmd) {
        cmd->add_option("--alpha", alpha, "Word ratio in (0,1]")->capture_default_str();
        cmd->add_flag("--no-early-stop", no_early_stop, "Process every word before deciding");
        cmd->add_option("--order", order, "Word processing order")
            ->check(CLI::IsMember({"importance", "random"}))
            ->capture_default_str();
        cmd->add_option("--random-seed", random_seed, "Seed for --order random");
        cmd->add_option("--support", support_paths, "Support model file (repeatable)");
    }

    std::string to_json() const {
        return json{{"alpha", alpha},
                    {"early_stop", !no_early_stop},
                    {"order", order},
                    {"random_seed", random_seed}}
            .dump();
    }
};

ModelHandle load_model_or_die(const std::string& path) {
    ModelHandle model(vd_model_load(path.c_str()));
    if (!model) die_on_error();
    return model;
}

ComponentsHandle make_components_or_die(const ComponentOptions& options,
                                        std::optional<std::uint64_t> seed) {
    ComponentsHandle components(vd_components_create(options.to_json(seed).c_str()));
    if (!components) die_on_error();
    return components;
}

struct DetectorBundle {
    DetectorHandle detector;
    std::vector<ModelHandle> supports;  // keep alive with the detector
};

DetectorBundle make_detector_or_die(const ModelHandle& target,
                                    const ComponentsHandle& components,
                                    const DetectorOptions& options) {
    DetectorBundle bundle;
    bundle.detector =
        DetectorHandle(vd_detector_create(target.get(), components.get(),
                                          options.to_json().c_str()));
    if (!bundle.detector) die_on_error();
    for (const auto& path : options.support_paths) {
        bundle.supports.push_back(load_model_or_die(path));
        if (vd_detector_add_support(bundle.detector.get(),
                                    bundle.supports.back().get()) != VD_OK) {
            die_on_error();
        }
    }
    return bundle;
}

std::vector<double> parse_grid(const std::string& csv, const char* what) {
    std::vector<double> out;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        try {
            out.push_back(std::stod(item));
        } catch (...) {
            std::cerr << "error: bad " << what << " value '" << item << "'\n";
            std::exit(kExitConfig);
        }
    }
    if (out.empty()) {
        std::cerr << "error: empty " << what << " grid\n";
        std::exit(kExitConfig);
    }
    return out;
}

std::vector<std::uint64_t> parse_seeds(const std::string& csv) {
    std::vector<std::uint64_t> out;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(std::strtoull(item.c_str(), nullptr, 10));
    }
    if (out.empty()) {
        std::cerr << "error: empty seed list\n";
        std::exit(kExitConfig);
    }
    return out;
}

std::string report_csv(const std::vector<std::pair<std::string, json>>& rows) {
    std::string out =
        "key,f1,recall,precision,tp,fp,fn,tn,mean_queries_adv,mean_queries_orig\n";
    char line[512];
    for (const auto& [key, r] : rows) {
        std::snprintf(line, sizeof line, "%s,%.6f,%.6f,%.6f,%ld,%ld,%ld,%ld,%.3f,%.3f\n",
                      key.c_str(), r.at("f1").get<double>(), r.at("recall").get<double>(),
                      r.at("precision").get<double>(), r.at("counts").at("tp").get<long>(),
                      r.at("counts").at("fp").get<long>(), r.at("counts").at("fn").get<long>(),
                      r.at("counts").at("tn").get<long>(),
                      r.at("mean_queries").at("adv").get<double>(),
                      r.at("mean_queries").at("orig").get<double>());
        out += line;
    }
    return out;
}

double attack_success_rate(const std::string& jsonl, std::size_t* attempted_out = nullptr,
                           std::size_t* success_out = nullptr) {
    std::stringstream ss(jsonl);
    std::string line;
    std::size_t attempted = 0;
    std::size_t successes = 0;
    while (std::getline(ss, line)) {
        if (line.empty()) continue;
        json record = json::parse(line);
        // Records with positions/queries==1 and no adversarial are
        // misclassified inputs that were never attacked.
        bool attacked = !(record["adversarial"].is_null() &&
                          record.value("queries", 0u) <= 1u &&
                          record["perturbed_positions"].empty());
        if (!attacked) continue;
        ++attempted;
        if (!record["adversarial"].is_null()) ++successes;
    }
    if (attempted_out) *attempted_out = attempted;
    if (success_out) *success_out = successes;
    return attempted ? static_cast<double>(successes) / static_cast<double>(attempted) : 0.0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"veridict: training-free adversarial-text detection toolkit"};
    app.require_subcommand(1);
    app.fallthrough();  // --seed may follow the subcommand name
    app.set_version_flag("--version", vd_version());
    app.failure_message([](const CLI::App* a, const CLI::Error& e) {
        return CLI::FailureMessage::help(a, e);
    });

    std::optional<std::uint64_t> seed;
    app.add_option("--seed", seed,
                   "Global seed (default: VERIDICT_SEED env var, else 42)");

    // ---------------------------------------------------------------- gen
    auto* gen = app.add_subcommand("gen", "Generate a synthetic corpus and demo lexicon");
    std::string gen_dir = ".";
    std::string gen_preset;
    int gen_classes = 0;
    int gen_train_docs = 0, gen_test_docs = 0;
    gen->add_option("--out-dir", gen_dir, "Output directory")->capture_default_str();
    gen->add_option("--preset", gen_preset, "Corpus preset")
        ->check(CLI::IsMember({"binary"}));
    gen->add_option("--classes", gen_classes, "Number of classes (default 4)");
    gen->add_option("--train-per-class", gen_train_docs, "Training docs per class");
    gen->add_option("--test-per-class", gen_test_docs, "Test docs per class");

    // -------------------------------------------------------------- train
    auto* train = app.add_subcommand("train", "Train a classifier from a corpus CSV");
    std::string train_corpus, train_out;
    std::string train_kind = "naive-bayes", train_features = "bow";
    double train_lr = 0.1, train_smoothing = 1.0;
    int train_epochs = 30;
    train->add_option("--corpus", train_corpus, "Corpus CSV (label,text)")->required();
    train->add_option("--out", train_out, "Output model file (.vmodel.json)")->required();
    train->add_option("--kind", train_kind, "Model kind")
        ->check(CLI::IsMember({"naive-bayes", "logistic-regression"}))
        ->capture_default_str();
    train->add_option("--features", train_features, "Feature mode")
        ->check(CLI::IsMember({"bow", "bow+char3"}))
        ->capture_default_str();
    train->add_option("--epochs", train_epochs, "Epochs (logistic regression)")
        ->capture_default_str();
    train->add_option("--learning-rate", train_lr, "Learning rate (logistic regression)")
        ->capture_default_str();
    train->add_option("--smoothing", train_smoothing, "Laplace smoothing (naive Bayes)")
        ->capture_default_str();

    // ------------------------------------------------------------- attack
    auto* attack = app.add_subcommand("attack", "Attack a corpus, emitting JSONL records");
    std::string attack_model, attack_corpus, attack_out;
    std::string attack_kind = "greedy";
    std::uint64_t attack_budget = 2000;
    double attack_min_confidence = 0.0;
    std::size_t attack_limit = 0, attack_max_success = 0;
    ComponentOptions attack_components;
    attack->add_option("--model", attack_model, "Target model file")->required();
    attack->add_option("--corpus", attack_corpus, "Corpus CSV to attack")->required();
    attack->add_option("--out", attack_out, "Output JSONL (default stdout)");
    attack->add_option("--kind", attack_kind, "Attack kind")
        ->check(CLI::IsMember({"greedy", "char", "input-reduction"}))
        ->capture_default_str();
    attack->add_option("--budget", attack_budget, "Query budget per text")
        ->capture_default_str();
    attack->add_option("--min-confidence", attack_min_confidence,
                       "Keep attacking until the flipped label reaches this probability");
    attack->add_option("--limit", attack_limit, "Attack at most this many corpus rows");
    attack->add_option("--max-success", attack_max_success,
                       "Stop after this many successful adversarials");
    attack_components.attach(attack);

    // ------------------------------------------------------------- detect
    auto* detect_cmd = app.add_subcommand("detect", "Detect whether texts are adversarial");
    std::string detect_model, detect_text, detect_input, detect_out;
    ComponentOptions detect_components;
    DetectorOptions detect_detector;
    detect_cmd->add_option("--model", detect_model, "Target model file")->required();
    detect_cmd->add_option("--text", detect_text, "Single text to check");
    detect_cmd->add_option("--input", detect_input, "File with one text per line");
    detect_cmd->add_option("--out", detect_out, "Output file (default stdout)");
    detect_components.attach(detect_cmd);
    detect_detector.attach(detect_cmd);

    // ----------------------------------------------------------- evaluate
    auto* evaluate_cmd = app.add_subcommand("evaluate", "Score detection on attack pairs");
    std::string eval_model, eval_pairs, eval_out, eval_csv;
    bool eval_timing = false;
    ComponentOptions eval_components;
    DetectorOptions eval_detector;
    evaluate_cmd->add_option("--model", eval_model, "Target model file")->required();
    evaluate_cmd->add_option("--pairs", eval_pairs, "Attack JSONL with adversarial pairs")
        ->required();
    evaluate_cmd->add_option("--out", eval_out, "Report JSON (default stdout)");
    evaluate_cmd->add_option("--csv", eval_csv, "Also write the report as CSV");
    evaluate_cmd->add_flag("--timing", eval_timing,
                           "Include wall time (makes reports non-reproducible)");
    eval_components.attach(evaluate_cmd);
    eval_detector.attach(evaluate_cmd);

    // -------------------------------------------------------------- sweep
    auto* sweep_cmd = app.add_subcommand("sweep", "Evaluate across a word-ratio grid");
    std::string sweep_model, sweep_pairs, sweep_out, sweep_csv, sweep_dat;
    std::string sweep_alphas = "0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9,1.0";
    ComponentOptions sweep_components;
    DetectorOptions sweep_detector;
    sweep_cmd->add_option("--model", sweep_model, "Target model file")->required();
    sweep_cmd->add_option("--pairs", sweep_pairs, "Attack JSONL")->required();
    sweep_cmd->add_option("--alphas", sweep_alphas, "Comma-separated ratio grid")
        ->capture_default_str();
    sweep_cmd->add_option("--out", sweep_out, "Report JSON (default stdout)");
    sweep_cmd->add_option("--csv", sweep_csv, "Also write rows as CSV");
    sweep_cmd->add_option("--dat", sweep_dat, "Also write a gnuplot-style data file");
    sweep_components.attach(sweep_cmd);
    sweep_detector.attach(sweep_cmd);

    // ---------------------------------------------------------- histogram
    auto* hist_cmd =
        app.add_subcommand("histogram", "Max one-word prediction-change rates per text");
    std::string hist_model, hist_pairs, hist_out, hist_dat;
    ComponentOptions hist_components;
    hist_cmd->add_option("--model", hist_model, "Target model file")->required();
    hist_cmd->add_option("--pairs", hist_pairs, "Attack JSONL")->required();
    hist_cmd->add_option("--out", hist_out, "Report JSON (default stdout)");
    hist_cmd->add_option("--dat", hist_dat, "Also write binned counts as a data file");
    hist_components.attach(hist_cmd);

    // ------------------------------------------------------------- ablate
    auto* ablate_cmd =
        app.add_subcommand("ablate", "Importance ordering vs seeded random ordering");
    std::string ablate_model, ablate_pairs, ablate_out;
    std::string ablate_alphas = "0.2,0.5,1.0";
    std::string ablate_seeds = "1,2,3,4,5";
    ComponentOptions ablate_components;
    DetectorOptions ablate_detector;
    ablate_cmd->add_option("--model", ablate_model, "Target model file")->required();
    ablate_cmd->add_option("--pairs", ablate_pairs, "Attack JSONL")->required();
    ablate_cmd->add_option("--alphas", ablate_alphas, "Comma-separated ratio grid")
        ->capture_default_str();
    ablate_cmd->add_option("--seeds", ablate_seeds, "Random-order seeds")
        ->capture_default_str();
    ablate_cmd->add_option("--out", ablate_out, "Report JSON (default stdout)");
    ablate_components.attach(ablate_cmd);
    ablate_detector.attach(ablate_cmd);

    // ----------------------------------------------------------- adaptive
    auto* adaptive_cmd =
        app.add_subcommand("adaptive", "Attack success with and without the detector");
    std::string adaptive_model, adaptive_corpus, adaptive_out;
    std::size_t adaptive_size = 100;
    std::uint64_t adaptive_plain_budget = 2000, adaptive_budget = 50000;
    ComponentOptions adaptive_components;
    DetectorOptions adaptive_detector;
    adaptive_cmd->add_option("--model", adaptive_model, "Target model file")->required();
    adaptive_cmd->add_option("--corpus", adaptive_corpus, "Corpus CSV to attack")->required();
    adaptive_cmd->add_option("--size", adaptive_size, "Inputs to attack")
        ->capture_default_str();
    adaptive_cmd->add_option("--budget", adaptive_plain_budget, "Plain attack budget")
        ->capture_default_str();
    adaptive_cmd->add_option("--adaptive-budget", adaptive_budget,
                             "Adaptive attack budget (detector probes included)")
        ->capture_default_str();
    adaptive_cmd->add_option("--out", adaptive_out, "Report JSON (default stdout)");
    adaptive_components.attach(adaptive_cmd);
    adaptive_detector.attach(adaptive_cmd);

    // --------------------------------------------------------- confidence
    auto* confidence_cmd = app.add_subcommand(
        "confidence", "Attack yield and detection quality per minimum-confidence floor");
    std::string conf_model, conf_corpus, conf_out;
    std::string conf_floors = "0.6,0.7,0.8,0.9";
    std::size_t conf_size = 100;
    std::uint64_t conf_budget = 4000;
    ComponentOptions conf_components;
    DetectorOptions conf_detector;
    confidence_cmd->add_option("--model", conf_model, "Target model file")->required();
    confidence_cmd->add_option("--corpus", conf_corpus, "Corpus CSV to attack")->required();
    confidence_cmd->add_option("--floors", conf_floors, "Comma-separated confidence floors")
        ->capture_default_str();
    confidence_cmd->add_option("--size", conf_size, "Successes to collect per floor")
        ->capture_default_str();
    confidence_cmd->add_option("--budget", conf_budget, "Attack budget per text")
        ->capture_default_str();
    confidence_cmd->add_option("--out", conf_out, "Report JSON (default stdout)");
    conf_components.attach(confidence_cmd);
    conf_detector.attach(confidence_cmd);

    // ------------------------------------------------------------- budget
    auto* budget_cmd =
        app.add_subcommand("budget", "Measured queries against the worst-case bound");
    std::string budget_model, budget_pairs, budget_out;
    ComponentOptions budget_components;
    DetectorOptions budget_detector;
    budget_cmd->add_option("--model", budget_model, "Target model file")->required();
    budget_cmd->add_option("--pairs", budget_pairs, "Attack JSONL")->required();
    budget_cmd->add_option("--out", budget_out, "Report JSON (default stdout)");
    budget_components.attach(budget_cmd);
    budget_detector.attach(budget_cmd);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);  // --help: exit 0
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);  // --version: exit 0
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;  // usage problems are configuration errors
    }

    if (gen->parsed()) {
        json config = json::object();
        if (!gen_preset.empty()) config["preset"] = gen_preset;
        if (gen_classes > 0) config["classes"] = gen_classes;
        if (gen_train_docs > 0) config["train_docs_per_class"] = gen_train_docs;
        if (gen_test_docs > 0) config["test_docs_per_class"] = gen_test_docs;
        if (seed) config["seed"] = *seed;
        std::string train_path = gen_dir + "/train.csv";
        std::string test_path = gen_dir + "/test.csv";
        std::string lexicon_path = gen_dir + "/lexicon.tsv";
        CString summary{vd_corpus_generate(config.dump().c_str(), train_path.c_str(),
                                           test_path.c_str(), lexicon_path.c_str())};
        if (!summary.ptr) die_on_error();
        std::cout << summary.str() << "\n";
        return kExitOk;
    }

    if (train->parsed()) {
        json config = {{"kind", train_kind},
                       {"features", train_features},
                       {"epochs", train_epochs},
                       {"learning_rate", train_lr},
                       {"smoothing", train_smoothing}};
        if (seed) config["seed"] = *seed;
        ModelHandle model(vd_model_train_csv(train_corpus.c_str(), config.dump().c_str()));
        if (!model) die_on_error();
        if (vd_model_save(model.get(), train_out.c_str()) != VD_OK) die_on_error();
        CString info{vd_model_info(model.get())};
        std::cerr << "trained " << info.str() << " -> " << train_out << "\n";
        return kExitOk;
    }

    if (attack->parsed()) {
        ModelHandle model = load_model_or_die(attack_model);
        ComponentsHandle components = make_components_or_die(attack_components, seed);
        json options = {{"kind", attack_kind},
                        {"budget", attack_budget},
                        {"min_confidence", attack_min_confidence},
                        {"limit", attack_limit},
                        {"max_success", attack_max_success}};
        CString jsonl{vd_attack_corpus(model.get(), components.get(), nullptr,
                                       attack_corpus.c_str(), options.dump().c_str())};
        if (!jsonl.ptr) die_on_error();
        emit(jsonl.str(), attack_out);
        std::size_t attempted = 0, successes = 0;
        attack_success_rate(jsonl.str(), &attempted, &successes);
        std::cerr << "attacked " << attempted << " correctly classified inputs, "
                  << successes << " adversarial successes\n";
        return kExitOk;
    }

    if (detect_cmd->parsed()) {
        if (detect_text.empty() == detect_input.empty()) {
            std::cerr << "error: pass exactly one of --text or --input\n";
            return kExitConfig;
        }
        ModelHandle model = load_model_or_die(detect_model);
        ComponentsHandle components = make_components_or_die(detect_components, seed);
        DetectorBundle bundle = make_detector_or_die(model, components, detect_detector);

        std::vector<std::string> texts;
        if (!detect_text.empty()) {
            texts.push_back(detect_text);
        } else {
            std::ifstream in(detect_input);
            if (!in) {
                std::cerr << "error: cannot open '" << detect_input << "'\n";
                return kExitIo;
            }
            std::string line;
            while (std::getline(in, line)) {
                if (!line.empty()) texts.push_back(line);
            }
        }
        std::string out;
        for (std::size_t i = 0; i < texts.size(); ++i) {
            CString verdict{vd_detect(bundle.detector.get(), texts[i].c_str())};
            if (!verdict.ptr) die_on_error();
            json j = json::parse(verdict.str());
            j["id"] = i;
            out += j.dump();
            out += '\n';
        }
        emit(out, detect_out);
        return kExitOk;
    }

    if (evaluate_cmd->parsed()) {
        ModelHandle model = load_model_or_die(eval_model);
        ComponentsHandle components = make_components_or_die(eval_components, seed);
        DetectorBundle bundle = make_detector_or_die(model, components, eval_detector);
        EvalsetHandle set(vd_evalset_load_jsonl(eval_pairs.c_str()));
        if (!set) die_on_error();
        CString report{vd_evaluate(bundle.detector.get(), set.get(), eval_timing ? 1 : 0)};
        if (!report.ptr) die_on_error();
        emit(report.str(), eval_out);
        if (!eval_csv.empty()) {
            write_file(eval_csv, report_csv({{"all", json::parse(report.str())}}));
        }
        return kExitOk;
    }

    if (sweep_cmd->parsed()) {
        ModelHandle model = load_model_or_die(sweep_model);
        ComponentsHandle components = make_components_or_die(sweep_components, seed);
        EvalsetHandle set(vd_evalset_load_jsonl(sweep_pairs.c_str()));
        if (!set) die_on_error();

        json rows = json::array();
        std::vector<std::pair<std::string, json>> csv_rows;
        std::string dat = "# alpha f1 recall precision mean_queries_adv mean_queries_orig\n";
        for (double alpha : parse_grid(sweep_alphas, "alpha")) {
            DetectorOptions per_alpha = sweep_detector;
            per_alpha.alpha = alpha;
            DetectorBundle bundle = make_detector_or_die(model, components, per_alpha);
            CString report{vd_evaluate(bundle.detector.get(), set.get(), 0)};
            if (!report.ptr) die_on_error();
            json r = json::parse(report.str());
            rows.push_back({{"alpha", alpha}, {"report", r}});
            char key[32];
            std::snprintf(key, sizeof key, "%.3f", alpha);
            csv_rows.emplace_back(key, r);
            char line[256];
            std::snprintf(line, sizeof line, "%.3f %.6f %.6f %.6f %.3f %.3f\n", alpha,
                          r["f1"].get<double>(), r["recall"].get<double>(),
                          r["precision"].get<double>(),
                          r["mean_queries"]["adv"].get<double>(),
                          r["mean_queries"]["orig"].get<double>());
            dat += line;
        }
        emit(json{{"sweep", rows}}.dump(), sweep_out);
        if (!sweep_csv.empty()) write_file(sweep_csv, report_csv(csv_rows));
        if (!sweep_dat.empty()) write_file(sweep_dat, dat);
        return kExitOk;
    }

    if (hist_cmd->parsed()) {
        ModelHandle model = load_model_or_die(hist_model);
        ComponentsHandle components = make_components_or_die(hist_components, seed);
        EvalsetHandle set(vd_evalset_load_jsonl(hist_pairs.c_str()));
        if (!set) die_on_error();
        CString report{vd_max_rate_histogram(model.get(), components.get(), set.get())};
        if (!report.ptr) die_on_error();
        emit(report.str(), hist_out);
        if (!hist_dat.empty()) {
            json j = json::parse(report.str());
            std::string dat = "# bin_low bin_high adv_count orig_count\n";
            for (int b = 0; b < 10; ++b) {
                char line[128];
                std::snprintf(line, sizeof line, "%.1f %.1f %llu %llu\n", b / 10.0,
                              (b + 1) / 10.0,
                              j["adv"]["histogram"][b].get<unsigned long long>(),
                              j["orig"]["histogram"][b].get<unsigned long long>());
                dat += line;
            }
            write_file(hist_dat, dat);
        }
        return kExitOk;
    }

    if (ablate_cmd->parsed()) {
        ModelHandle model = load_model_or_die(ablate_model);
        ComponentsHandle components = make_components_or_die(ablate_components, seed);
        EvalsetHandle set(vd_evalset_load_jsonl(ablate_pairs.c_str()));
        if (!set) die_on_error();

        auto seeds = parse_seeds(ablate_seeds);
        json rows = json::array();
        for (double alpha : parse_grid(ablate_alphas, "alpha")) {
            DetectorOptions importance = ablate_detector;
            importance.alpha = alpha;
            importance.order = "importance";
            DetectorBundle by_importance = make_detector_or_die(model, components, importance);
            CString imp_report{vd_evaluate(by_importance.detector.get(), set.get(), 0)};
            if (!imp_report.ptr) die_on_error();

            json random_runs = json::array();
            double recall_sum = 0.0, f1_sum = 0.0;
            for (std::uint64_t s : seeds) {
                DetectorOptions randomized = ablate_detector;
                randomized.alpha = alpha;
                randomized.order = "random";
                randomized.random_seed = s;
                DetectorBundle by_random = make_detector_or_die(model, components, randomized);
                CString report{vd_evaluate(by_random.detector.get(), set.get(), 0)};
                if (!report.ptr) die_on_error();
                json r = json::parse(report.str());
                recall_sum += r["recall"].get<double>();
                f1_sum += r["f1"].get<double>();
                random_runs.push_back({{"seed", s}, {"report", r}});
            }
            rows.push_back({{"alpha", alpha},
                            {"importance", json::parse(imp_report.str())},
                            {"random", random_runs},
                            {"random_mean",
                             {{"recall", recall_sum / seeds.size()},
                              {"f1", f1_sum / seeds.size()}}}});
        }
        emit(json{{"seeds", seeds}, {"ablation", rows}}.dump(), ablate_out);
        return kExitOk;
    }

    if (adaptive_cmd->parsed()) {
        ModelHandle model = load_model_or_die(adaptive_model);
        ComponentsHandle components = make_components_or_die(adaptive_components, seed);
        DetectorBundle bundle = make_detector_or_die(model, components, adaptive_detector);

        json plain_options = {{"kind", "greedy"},
                              {"budget", adaptive_plain_budget},
                              {"limit", 0},
                              {"max_success", 0}};
        json adaptive_options = plain_options;
        adaptive_options["budget"] = adaptive_budget;

        CString plain{vd_attack_corpus(model.get(), components.get(), nullptr,
                                       adaptive_corpus.c_str(), plain_options.dump().c_str())};
        if (!plain.ptr) die_on_error();
        CString adaptive{vd_attack_corpus(model.get(), components.get(), bundle.detector.get(),
                                          adaptive_corpus.c_str(),
                                          adaptive_options.dump().c_str())};
        if (!adaptive.ptr) die_on_error();

        auto truncate_rates = [&](const std::string& jsonl) {
            std::stringstream ss(jsonl);
            std::string line;
            std::size_t attempted = 0, successes = 0;
            while (std::getline(ss, line) && attempted < adaptive_size) {
                if (line.empty()) continue;
                json record = json::parse(line);
                bool attacked = !(record["adversarial"].is_null() &&
                                  record.value("queries", 0u) <= 1u &&
                                  record["perturbed_positions"].empty());
                if (!attacked) continue;
                ++attempted;
                if (!record["adversarial"].is_null()) ++successes;
            }
            return std::pair<std::size_t, std::size_t>(attempted, successes);
        };
        auto [plain_attempted, plain_successes] = truncate_rates(plain.str());
        auto [adaptive_attempted, adaptive_successes] = truncate_rates(adaptive.str());
        double plain_rate =
            plain_attempted ? double(plain_successes) / double(plain_attempted) : 0.0;
        double adaptive_rate =
            adaptive_attempted ? double(adaptive_successes) / double(adaptive_attempted) : 0.0;
        json report = {{"attempted", plain_attempted},
                       {"plain", {{"successes", plain_successes}, {"rate", plain_rate}}},
                       {"adaptive",
                        {{"successes", adaptive_successes}, {"rate", adaptive_rate}}}};
        emit(report.dump(), adaptive_out);
        return kExitOk;
    }

    if (confidence_cmd->parsed()) {
        ModelHandle model = load_model_or_die(conf_model);
        ComponentsHandle components = make_components_or_die(conf_components, seed);
        DetectorBundle bundle = make_detector_or_die(model, components, conf_detector);

        json rows = json::array();
        for (double floor : parse_grid(conf_floors, "floor")) {
            json options = {{"kind", "greedy"},
                            {"budget", conf_budget},
                            {"min_confidence", floor},
                            {"max_success", conf_size}};
            CString jsonl{vd_attack_corpus(model.get(), components.get(), nullptr,
                                           conf_corpus.c_str(), options.dump().c_str())};
            if (!jsonl.ptr) die_on_error();
            std::size_t attempted = 0, successes = 0;
            attack_success_rate(jsonl.str(), &attempted, &successes);
            json row = {{"floor", floor},
                        {"attempted", attempted},
                        {"successes", successes}};
            if (successes > 0) {
                EvalsetHandle set(vd_evalset_from_jsonl(jsonl.ptr));
                if (!set) die_on_error();
                CString report{vd_evaluate(bundle.detector.get(), set.get(), 0)};
                if (!report.ptr) die_on_error();
                row["detection"] = json::parse(report.str());
            }
            rows.push_back(std::move(row));
        }
        emit(json{{"confidence", rows}}.dump(), conf_out);
        return kExitOk;
    }

    if (budget_cmd->parsed()) {
        ModelHandle model = load_model_or_die(budget_model);
        ComponentsHandle components = make_components_or_die(budget_components, seed);
        DetectorBundle bundle = make_detector_or_die(model, components, budget_detector);
        EvalsetHandle set(vd_evalset_load_jsonl(budget_pairs.c_str()));
        if (!set) die_on_error();
        CString report{vd_prediction_report(bundle.detector.get(), set.get())};
        if (!report.ptr) die_on_error();
        emit(report.str(), budget_out);
        return kExitOk;
    }

    return kExitOk;
}
