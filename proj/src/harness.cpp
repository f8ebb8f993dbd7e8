#include "veridict/harness.hpp"

#include "veridict/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace veridict {

using nlohmann::json;

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

namespace {

// RFC 4180 field writer: quote when the field contains comma, quote, or
// newline; double embedded quotes.
void write_csv_field(std::ostream& out, const std::string& field) {
    if (field.find_first_of(",\"\r\n") == std::string::npos) {
        out << field;
        return;
    }
    out << '"';
    for (char c : field) {
        if (c == '"') out << '"';
        out << c;
    }
    out << '"';
}

struct CsvParser {
    explicit CsvParser(std::string data) : data_(std::move(data)) {}

    // Reads one row; false at end of input.
    bool next_row(std::vector<std::string>& fields) {
        fields.clear();
        if (pos_ >= data_.size()) return false;
        std::string field;
        bool quoted = false;
        while (pos_ < data_.size()) {
            char c = data_[pos_];
            if (quoted) {
                if (c == '"') {
                    if (pos_ + 1 < data_.size() && data_[pos_ + 1] == '"') {
                        field += '"';
                        pos_ += 2;
                    } else {
                        quoted = false;
                        ++pos_;
                    }
                } else {
                    field += c;
                    ++pos_;
                }
            } else if (c == '"' && field.empty()) {
                quoted = true;
                ++pos_;
            } else if (c == ',') {
                fields.push_back(std::move(field));
                field.clear();
                ++pos_;
            } else if (c == '\n' || c == '\r') {
                if (c == '\r' && pos_ + 1 < data_.size() && data_[pos_ + 1] == '\n') ++pos_;
                ++pos_;
                fields.push_back(std::move(field));
                ++row_;
                return true;
            } else {
                field += c;
                ++pos_;
            }
        }
        if (quoted) throw FormatError("unterminated quoted CSV field", pos_);
        fields.push_back(std::move(field));
        ++row_;
        return true;
    }

    std::size_t row() const { return row_; }

private:
    std::string data_;
    std::size_t pos_ = 0;
    std::size_t row_ = 0;
};

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

}  // namespace

std::vector<LabeledText> load_corpus_csv(const std::string& path) {
    CsvParser parser(slurp(path));
    std::vector<std::string> fields;
    if (!parser.next_row(fields) || fields.size() < 2 || fields[0] != "label" ||
        fields[1] != "text") {
        throw FormatError("corpus CSV '" + path + "' must start with header label,text");
    }
    std::vector<LabeledText> corpus;
    while (parser.next_row(fields)) {
        if (fields.size() == 1 && fields[0].empty()) continue;  // trailing blank line
        if (fields.size() != 2) {
            throw FormatError("corpus CSV '" + path + "': row " + std::to_string(parser.row()) +
                              " has " + std::to_string(fields.size()) + " fields, expected 2");
        }
        corpus.push_back({fields[0], tokenize(fields[1])});
    }
    return corpus;
}

void save_corpus_csv(const std::string& path, const std::vector<LabeledText>& corpus) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << "label,text\n";
    for (const auto& doc : corpus) {
        write_csv_field(out, doc.label);
        out << ',';
        write_csv_field(out, doc.text.raw());
        out << '\n';
    }
    if (!out) throw IoError("write failed for '" + path + "'");
}

// ---------------------------------------------------------------------------
// Attack record JSONL
// ---------------------------------------------------------------------------

std::string attack_records_to_jsonl(const std::vector<AttackRecord>& records) {
    std::string out;
    for (const auto& r : records) {
        json j;
        j["id"] = r.id;
        j["original"] = r.original;
        j["adversarial"] = r.adversarial ? json(*r.adversarial) : json(nullptr);
        j["gold_label"] = r.gold_label;
        j["flipped_label"] = r.flipped_label ? json(*r.flipped_label) : json(nullptr);
        j["perturbed_positions"] = r.perturbed_positions;
        j["queries"] = r.queries;
        out += j.dump();
        out += '\n';
    }
    return out;
}

std::vector<AttackRecord> attack_records_from_jsonl(const std::string& jsonl) {
    std::vector<AttackRecord> records;
    std::stringstream in(jsonl);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error& e) {
            throw FormatError("attack JSONL line " + std::to_string(line_no) + ": " + e.what(),
                              e.byte);
        }
        AttackRecord r;
        r.id = j.value("id", line_no - 1);
        r.original = j.at("original").get<std::string>();
        if (j.contains("adversarial") && !j["adversarial"].is_null()) {
            r.adversarial = j["adversarial"].get<std::string>();
        }
        r.gold_label = j.at("gold_label").get<std::string>();
        if (j.contains("flipped_label") && !j["flipped_label"].is_null()) {
            r.flipped_label = j["flipped_label"].get<std::string>();
        }
        if (j.contains("perturbed_positions")) {
            r.perturbed_positions = j["perturbed_positions"].get<std::vector<std::size_t>>();
        }
        r.queries = j.value("queries", 0u);
        records.push_back(std::move(r));
    }
    return records;
}

std::vector<AttackRecord> load_attack_jsonl(const std::string& path) {
    return attack_records_from_jsonl(slurp(path));
}

void save_attack_jsonl(const std::string& path, const std::vector<AttackRecord>& records) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << attack_records_to_jsonl(records);
    if (!out) throw IoError("write failed for '" + path + "'");
}

std::string verdict_to_json(const Verdict& verdict, const Model& target,
                            std::optional<std::size_t> id) {
    json j;
    if (id) j["id"] = *id;
    j["is_adversarial"] = verdict.is_adversarial;
    j["trigger_index"] =
        verdict.trigger_word_index ? json(*verdict.trigger_word_index) : json(nullptr);
    j["queries"] = verdict.queries_used;
    j["words_processed"] = verdict.words_processed;
    json tallies = json::array();
    for (const auto& tally : verdict.tallies) {
        json counts = json::object();
        for (const auto& [cls, n] : tally.counts) {
            counts[target.class_names()[static_cast<std::size_t>(cls)]] = n;
        }
        tallies.push_back({{"word_index", tally.word_index}, {"counts", std::move(counts)}});
    }
    j["tallies"] = std::move(tallies);
    return j.dump();
}

// ---------------------------------------------------------------------------
// Eval sets
// ---------------------------------------------------------------------------

namespace {

int class_id_of(const std::string& label, const std::vector<std::string>& classes) {
    auto it = std::find(classes.begin(), classes.end(), label);
    if (it == classes.end()) {
        throw ConfigError("label '" + label + "' is not one of the model's classes");
    }
    return static_cast<int>(it - classes.begin());
}

}  // namespace

BalancedEvalSet build_eval_set(const Model& target, const std::vector<LabeledText>& corpus,
                               const AttackFn& attack, std::size_t size) {
    BalancedEvalSet set;
    set.requested = size;
    for (const auto& doc : corpus) {
        if (set.pairs.size() >= size) break;
        int gold = class_id_of(doc.label, target.class_names());
        if (target.predict_hard(doc.text).class_id != gold) continue;  // keep only correct
        set.attacked += 1;
        AttackResult result = attack(doc.text, gold);
        if (!result.success) continue;
        set.attack_successes += 1;
        set.pairs.push_back({doc.text, *result.adversarial, gold, result.flipped_class});
    }
    return set;
}

BalancedEvalSet eval_set_from_records(const std::vector<AttackRecord>& records,
                                      const std::vector<std::string>& class_names) {
    BalancedEvalSet set;
    for (const auto& r : records) {
        if (!r.adversarial) continue;
        EvalPair pair;
        pair.original = tokenize(r.original);
        pair.adversarial = tokenize(*r.adversarial);
        pair.gold_class = class_id_of(r.gold_label, class_names);
        pair.flipped_class = r.flipped_label ? class_id_of(*r.flipped_label, class_names) : -1;
        set.pairs.push_back(std::move(pair));
    }
    set.requested = set.pairs.size();
    set.attacked = records.size();
    set.attack_successes = set.pairs.size();
    return set;
}

std::vector<AttackRecord> records_from_eval_set(const BalancedEvalSet& set,
                                                const std::vector<std::string>& class_names) {
    std::vector<AttackRecord> records;
    records.reserve(set.pairs.size());
    for (std::size_t i = 0; i < set.pairs.size(); ++i) {
        const auto& pair = set.pairs[i];
        AttackRecord r;
        r.id = i;
        r.original = pair.original.raw();
        r.adversarial = pair.adversarial.raw();
        r.gold_label = class_names[static_cast<std::size_t>(pair.gold_class)];
        if (pair.flipped_class >= 0) {
            r.flipped_label = class_names[static_cast<std::size_t>(pair.flipped_class)];
        }
        records.push_back(std::move(r));
    }
    return records;
}

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

namespace {

std::string fingerprint(const DetectorConfig& config) {
    // FNV-1a over the knobs that change detector behaviour.
    std::uint64_t h = 1469598103934665603ull;
    auto mix = [&h](std::uint64_t v) {
        h ^= v;
        h *= 1099511628211ull;
    };
    mix(static_cast<std::uint64_t>(config.components.provider.kind()));
    mix(config.components.provider.cap());
    mix(static_cast<std::uint64_t>(config.components.scorer));
    mix(static_cast<std::uint64_t>(config.order));
    mix(config.random_order_seed);
    mix(static_cast<std::uint64_t>(config.word_ratio * 1e9));
    mix(static_cast<std::uint64_t>(config.components.constraint.max_perturbed_ratio * 1e9));
    mix(config.components.constraint.min_word_length);
    mix(config.supports.size());
    mix(config.early_stop ? 1 : 0);
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

void finalize_metrics(EvalReport& r) {
    const double tp = static_cast<double>(r.tp);
    const double fp = static_cast<double>(r.fp);
    const double fn = static_cast<double>(r.fn);
    r.precision = (tp + fp) > 0 ? tp / (tp + fp) : 0.0;
    r.recall = (tp + fn) > 0 ? tp / (tp + fn) : 0.0;
    r.f1 = (r.precision + r.recall) > 0
               ? 2.0 * r.precision * r.recall / (r.precision + r.recall)
               : 0.0;
}

}  // namespace

EvalReport evaluate(const DetectorConfig& config, const Model& target,
                    const BalancedEvalSet& set) {
    EvalReport report;
    report.config_fingerprint = fingerprint(config);
    const auto start = std::chrono::steady_clock::now();

    std::uint64_t adv_queries = 0;
    std::uint64_t orig_queries = 0;
    for (const auto& pair : set.pairs) {
        Verdict adv = detect(config, target, pair.adversarial);
        Verdict orig = detect(config, target, pair.original);
        adv_queries += adv.queries_used;
        orig_queries += orig.queries_used;
        if (adv.is_adversarial) ++report.tp; else ++report.fn;
        if (orig.is_adversarial) ++report.fp; else ++report.tn;
    }
    finalize_metrics(report);
    if (!set.pairs.empty()) {
        report.mean_queries_adv =
            static_cast<double>(adv_queries) / static_cast<double>(set.pairs.size());
        report.mean_queries_orig =
            static_cast<double>(orig_queries) / static_cast<double>(set.pairs.size());
    }
    report.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
}

std::string report_to_json(const EvalReport& report, bool include_wall_time) {
    json j;
    j["f1"] = report.f1;
    j["recall"] = report.recall;
    j["precision"] = report.precision;
    j["counts"] = {{"tp", report.tp}, {"fp", report.fp}, {"fn", report.fn}, {"tn", report.tn}};
    j["mean_queries"] = {{"adv", report.mean_queries_adv}, {"orig", report.mean_queries_orig}};
    if (include_wall_time) j["wall_time_s"] = report.wall_time_s;
    j["config_fingerprint"] = report.config_fingerprint;
    return j.dump();
}

std::vector<std::pair<double, EvalReport>> sweep_alpha(const DetectorConfig& config,
                                                       const Model& target,
                                                       const BalancedEvalSet& set,
                                                       const std::vector<double>& alphas) {
    std::vector<double> sorted = alphas;
    std::sort(sorted.begin(), sorted.end());
    std::vector<std::pair<double, EvalReport>> out;
    double prev_queries = -1.0;
    for (double alpha : sorted) {
        DetectorConfig c = config;
        c.word_ratio = alpha;
        out.emplace_back(alpha, evaluate(c, target, set));
        // Query cost must grow with the word ratio; a violation means the
        // cutoff lost its prefix property somewhere.
        const EvalReport& r = out.back().second;
        double queries = r.mean_queries_adv + r.mean_queries_orig;
        if (queries < prev_queries - 1e-9) {
            throw Error("sweep_alpha: mean queries decreased between ratios");
        }
        prev_queries = queries;
    }
    return out;
}

MaxRateResult max_rate_histogram(const Model& target, const TransformationProvider& provider,
                                 const std::vector<Text>& texts) {
    MaxRateResult result;
    result.max_rates.reserve(texts.size());
    for (const auto& text : texts) {
        int base = target.predict_hard(text).class_id;
        double max_rate = 0.0;
        for (std::size_t pos = 0; pos < text.word_count(); ++pos) {
            auto candidates = provider.candidates(text.tokens[pos]);
            if (candidates.empty()) continue;
            std::size_t flips = 0;
            for (const auto& cand : candidates) {
                WordEdit edit = cand.empty() ? WordEdit{EditKind::erase, pos, ""}
                                             : WordEdit{EditKind::replace, pos, cand};
                if (target.predict_hard(apply_edit(text, edit)).class_id != base) ++flips;
            }
            max_rate = std::max(max_rate, static_cast<double>(flips) /
                                              static_cast<double>(candidates.size()));
        }
        result.max_rates.push_back(max_rate);
        auto bin = static_cast<std::size_t>(max_rate * 10.0);
        if (bin >= result.histogram.size()) bin = result.histogram.size() - 1;
        result.histogram[bin] += 1;
    }
    return result;
}

double AblationRow::mean_random_recall() const {
    if (random_runs.empty()) return 0.0;
    double sum = 0.0;
    for (const auto& [seed, report] : random_runs) sum += report.recall;
    return sum / static_cast<double>(random_runs.size());
}

double AblationRow::mean_random_f1() const {
    if (random_runs.empty()) return 0.0;
    double sum = 0.0;
    for (const auto& [seed, report] : random_runs) sum += report.f1;
    return sum / static_cast<double>(random_runs.size());
}

std::vector<AblationRow> importance_ablation(const DetectorConfig& config, const Model& target,
                                             const BalancedEvalSet& set,
                                             const std::vector<double>& alphas,
                                             const std::vector<std::uint64_t>& seeds) {
    std::vector<AblationRow> rows;
    for (double alpha : alphas) {
        AblationRow row;
        row.alpha = alpha;
        DetectorConfig by_importance = config;
        by_importance.word_ratio = alpha;
        by_importance.order = WordOrder::by_scorer;
        row.importance = evaluate(by_importance, target, set);
        for (std::uint64_t seed : seeds) {
            DetectorConfig randomized = config;
            randomized.word_ratio = alpha;
            randomized.order = WordOrder::random;
            randomized.random_order_seed = seed;
            row.random_runs.emplace_back(seed, evaluate(randomized, target, set));
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

BudgetReport prediction_count_report(const DetectorConfig& config, const Model& target,
                                     const BalancedEvalSet& set) {
    BudgetReport report;
    double theo_adv = 0, theo_orig = 0, meas_adv = 0, meas_orig = 0;
    for (const auto& pair : set.pairs) {
        const std::uint64_t bound_adv = worst_case_queries(config, pair.adversarial);
        const std::uint64_t bound_orig = worst_case_queries(config, pair.original);
        Verdict adv = detect(config, target, pair.adversarial);
        Verdict orig = detect(config, target, pair.original);
        if (adv.queries_used > bound_adv || orig.queries_used > bound_orig) {
            report.all_within_bound = false;
        }
        theo_adv += static_cast<double>(bound_adv);
        theo_orig += static_cast<double>(bound_orig);
        meas_adv += static_cast<double>(adv.queries_used);
        meas_orig += static_cast<double>(orig.queries_used);
    }
    const auto n = static_cast<double>(set.pairs.size());
    if (n > 0) {
        report.theoretical_mean_adv = theo_adv / n;
        report.theoretical_mean_orig = theo_orig / n;
        report.measured_mean_adv = meas_adv / n;
        report.measured_mean_orig = meas_orig / n;
        if (theo_adv > 0) report.reduction_pct_adv = 100.0 * (1.0 - meas_adv / theo_adv);
        if (theo_orig > 0) report.reduction_pct_orig = 100.0 * (1.0 - meas_orig / theo_orig);
    }
    return report;
}

AdaptiveReport adaptive_comparison(const Model& target, const std::vector<LabeledText>& corpus,
                                   const AttackComponents& components,
                                   const DetectorConfig& detector_config, std::size_t size,
                                   const AttackOptions& plain_options,
                                   const AttackOptions& adaptive_options) {
    AdaptiveReport report;
    DetectorOracle oracle = make_detector_oracle(detector_config, target);
    for (const auto& doc : corpus) {
        if (report.attempted >= size) break;
        int gold = class_id_of(doc.label, target.class_names());
        if (target.predict_hard(doc.text).class_id != gold) continue;
        report.attempted += 1;
        if (greedy_word_attack(target, doc.text, gold, components, plain_options).success) {
            report.plain_successes += 1;
        }
        AttackResult adaptive =
            adaptive_attack(target, oracle, doc.text, gold, components, adaptive_options);
        if (adaptive.success) report.adaptive_successes += 1;
    }
    return report;
}

std::vector<ConfidenceRow> confidence_sweep(const Model& target,
                                            const std::vector<LabeledText>& corpus,
                                            const AttackComponents& components,
                                            const DetectorConfig& detector_config,
                                            const std::vector<double>& floors, std::size_t size,
                                            std::uint64_t budget) {
    std::vector<ConfidenceRow> rows;
    for (double floor : floors) {
        ConfidenceRow row;
        row.floor = floor;
        BalancedEvalSet set = build_eval_set(
            target, corpus,
            [&](const Text& text, int gold) {
                return attack_until_confidence(target, text, gold, components, floor, budget);
            },
            size);
        row.attempted = set.attacked;
        row.successes = set.attack_successes;
        if (!set.pairs.empty()) row.detection = evaluate(detector_config, target, set);
        rows.push_back(std::move(row));
    }
    return rows;
}

std::uint64_t default_seed() {
    if (const char* env = std::getenv("VERIDICT_SEED")) {
        char* end = nullptr;
        unsigned long long v = std::strtoull(env, &end, 10);
        if (end != env && *end == '\0') return v;
    }
    return 42;
}

}  // namespace veridict
