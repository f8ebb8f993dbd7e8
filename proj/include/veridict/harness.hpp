#pragma once

#include "veridict/attack.hpp"
#include "veridict/classifier.hpp"
#include "veridict/detector.hpp"
#include "veridict/transform.hpp"

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace veridict {

// ---------------------------------------------------------------------------
// Corpus and record I/O
// ---------------------------------------------------------------------------

// CSV with header `label,text`, RFC 4180 quoting, UTF-8.
std::vector<LabeledText> load_corpus_csv(const std::string& path);
void save_corpus_csv(const std::string& path, const std::vector<LabeledText>& corpus);

// One JSON object per line, one record per attacked input.
struct AttackRecord {
    std::size_t id = 0;
    std::string original;
    std::optional<std::string> adversarial;
    std::string gold_label;
    std::optional<std::string> flipped_label;
    std::vector<std::size_t> perturbed_positions;
    std::uint64_t queries = 0;
};

std::string attack_records_to_jsonl(const std::vector<AttackRecord>& records);
std::vector<AttackRecord> attack_records_from_jsonl(const std::string& jsonl);
std::vector<AttackRecord> load_attack_jsonl(const std::string& path);
void save_attack_jsonl(const std::string& path, const std::vector<AttackRecord>& records);

std::string verdict_to_json(const Verdict& verdict, const Model& target,
                            std::optional<std::size_t> id = std::nullopt);

// ---------------------------------------------------------------------------
// Balanced evaluation sets
// ---------------------------------------------------------------------------

struct EvalPair {
    Text original;
    Text adversarial;
    int gold_class = -1;
    int flipped_class = -1;
};

// Equal counts of correctly classified originals and their successful
// adversarials; `partial()` signals that the corpus ran out before `requested`
// pairs were collected.
struct BalancedEvalSet {
    std::vector<EvalPair> pairs;
    std::size_t requested = 0;
    std::size_t attacked = 0;
    std::size_t attack_successes = 0;

    bool partial() const { return pairs.size() < requested; }
    double attack_success_rate() const {
        return attacked == 0 ? 0.0
                             : static_cast<double>(attack_successes) /
                                   static_cast<double>(attacked);
    }
};

using AttackFn = std::function<AttackResult(const Text& text, int gold_class)>;

// Walks the corpus, keeps correctly classified texts, attacks each, and
// collects the first `size` successes with their originals.
BalancedEvalSet build_eval_set(const Model& target, const std::vector<LabeledText>& corpus,
                               const AttackFn& attack, std::size_t size);

BalancedEvalSet eval_set_from_records(const std::vector<AttackRecord>& records,
                                      const std::vector<std::string>& class_names);
std::vector<AttackRecord> records_from_eval_set(const BalancedEvalSet& set,
                                                const std::vector<std::string>& class_names);

// ---------------------------------------------------------------------------
// Metrics
// ---------------------------------------------------------------------------

// Adversarial is the positive class.
struct EvalReport {
    double f1 = 0.0;
    double recall = 0.0;
    double precision = 0.0;
    long tp = 0, fp = 0, fn = 0, tn = 0;
    double mean_queries_adv = 0.0;
    double mean_queries_orig = 0.0;
    double wall_time_s = 0.0;
    std::string config_fingerprint;
};

EvalReport evaluate(const DetectorConfig& config, const Model& target,
                    const BalancedEvalSet& set);
std::string report_to_json(const EvalReport& report, bool include_wall_time = false);

std::vector<std::pair<double, EvalReport>> sweep_alpha(const DetectorConfig& config,
                                                       const Model& target,
                                                       const BalancedEvalSet& set,
                                                       const std::vector<double>& alphas);

// Per text: the maximum, over words, of the fraction of one-word
// transformations that change the target's hard label.
struct MaxRateResult {
    std::vector<double> max_rates;            // one per input text
    std::array<std::size_t, 10> histogram{};  // 10 equal-width bins over [0,1]
};

MaxRateResult max_rate_histogram(const Model& target, const TransformationProvider& provider,
                                 const std::vector<Text>& texts);

// Importance ordering vs seeded random ordering, per alpha.
struct AblationRow {
    double alpha = 1.0;
    EvalReport importance;
    std::vector<std::pair<std::uint64_t, EvalReport>> random_runs;  // (seed, report)

    double mean_random_recall() const;
    double mean_random_f1() const;
};

std::vector<AblationRow> importance_ablation(const DetectorConfig& config, const Model& target,
                                             const BalancedEvalSet& set,
                                             const std::vector<double>& alphas,
                                             const std::vector<std::uint64_t>& seeds);

// Measured predictions against the worst-case budget bound.
struct BudgetReport {
    double theoretical_mean_adv = 0.0;
    double theoretical_mean_orig = 0.0;
    double measured_mean_adv = 0.0;
    double measured_mean_orig = 0.0;
    double reduction_pct_adv = 0.0;   // 100 * (1 - measured/theoretical)
    double reduction_pct_orig = 0.0;
    bool all_within_bound = true;
};

BudgetReport prediction_count_report(const DetectorConfig& config, const Model& target,
                                     const BalancedEvalSet& set);

// Plain attack success rate vs success rate when the attacker must also fool
// the detector on every committed candidate.
struct AdaptiveReport {
    std::size_t attempted = 0;
    std::size_t plain_successes = 0;
    std::size_t adaptive_successes = 0;

    double plain_rate() const {
        return attempted ? static_cast<double>(plain_successes) / attempted : 0.0;
    }
    double adaptive_rate() const {
        return attempted ? static_cast<double>(adaptive_successes) / attempted : 0.0;
    }
};

AdaptiveReport adaptive_comparison(const Model& target, const std::vector<LabeledText>& corpus,
                                   const AttackComponents& components,
                                   const DetectorConfig& detector_config, std::size_t size,
                                   const AttackOptions& plain_options,
                                   const AttackOptions& adaptive_options);

// Per minimum-confidence floor: attack yield and detection quality on the
// adversarials that clear the floor.
struct ConfidenceRow {
    double floor = 0.0;
    std::size_t attempted = 0;
    std::size_t successes = 0;
    EvalReport detection;
};

std::vector<ConfidenceRow> confidence_sweep(const Model& target,
                                            const std::vector<LabeledText>& corpus,
                                            const AttackComponents& components,
                                            const DetectorConfig& detector_config,
                                            const std::vector<double>& floors, std::size_t size,
                                            std::uint64_t budget);

// ---------------------------------------------------------------------------
// Synthetic corpus generator
// ---------------------------------------------------------------------------

// Seeded news-like corpus: per class, keyword groups whose primary form
// carries the class signal while its synonym variants appear only in the
// other classes' documents; shared filler vocabulary (with mild per-class
// tilts) and English stopwords in between. The matching lexicon maps every
// group member to the other members of its group.
struct CorpusGenConfig {
    int classes = 4;
    int groups_per_class = 20;
    int variants_per_group = 2;
    int train_docs_per_class = 400;
    int test_docs_per_class = 120;
    int filler_words = 200;
    int filler_synonym_groups = 40;
    int min_keywords = 7;        // gold-class primaries per document
    int max_keywords = 9;
    int min_away_keywords = 4;   // off-class primaries (keyword noise)
    int max_away_keywords = 6;
    int min_variants = 4;        // off-class variants per document
    int max_variants = 6;
    int min_fillers = 8;
    int max_fillers = 16;
    double stopword_rate = 0.35;  // stopword share of filler slots
    std::uint64_t seed = 42;
};

// Tuned two-class variant of the defaults (fewer classes concentrate the
// keyword noise, so it is injected more sparingly).
CorpusGenConfig binary_corpus_config();

struct GeneratedCorpus {
    std::vector<LabeledText> train;
    std::vector<LabeledText> test;
    std::shared_ptr<SynonymLexicon> lexicon;
    std::vector<std::string> class_names;
};

GeneratedCorpus generate_corpus(const CorpusGenConfig& config);

// Default seed: VERIDICT_SEED from the environment, else 42.
std::uint64_t default_seed();

}  // namespace veridict
