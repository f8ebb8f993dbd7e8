#pragma once

#include "veridict/attack.hpp"
#include "veridict/classifier.hpp"
#include "veridict/text.hpp"

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <vector>

namespace veridict {

// Per-word vote over the hard labels of its valid transformations.
struct VoteTally {
    std::size_t word_index = 0;
    std::map<int, std::size_t> counts;   // class id -> votes
    std::vector<int> majority;           // class ids attaining the max count, ascending
};

// Counts labels by class; the majority set is every class with maximal count.
VoteTally majority_vote(const std::vector<HardLabel>& labels);

enum class WordOrder {
    by_scorer,  // importance order from components.scorer (position order when none)
    random,     // seeded shuffle; used by the importance ablation
};

struct DetectorConfig {
    AttackComponents components;
    double word_ratio = 1.0;  // alpha in (0,1]
    std::vector<std::shared_ptr<const Model>> supports;
    bool early_stop = true;
    WordOrder order = WordOrder::by_scorer;
    std::uint64_t random_order_seed = 0;
};

struct Verdict {
    bool is_adversarial = false;
    std::optional<std::size_t> trigger_word_index;
    std::vector<VoteTally> tallies;  // one per processed word with a nonempty vote
    std::uint64_t queries_used = 0;
    std::size_t words_processed = 0;
};

// Positions ordered by descending score (ties: ascending position), cut to
// ceil(alpha * count) with a floor of one word. Throws ConfigError when alpha
// is outside (0, 1].
std::vector<std::size_t> select_top_words(const ImportanceScores& scores, double alpha);

// Training-free adversarial-text detection: compare the target's hard label
// on the input against majority votes over hard labels of per-word
// transformations. A word whose vote excludes the input label, or ties it
// with another class, flags the text.
Verdict detect(const DetectorConfig& config, const Model& target, const Text& text);

struct BatchDetection {
    std::vector<Verdict> verdicts;
    std::uint64_t total_queries = 0;
};

// Verdicts are identical to per-text detect(); threads > 1 fans texts out
// across workers (per-text work is independent).
BatchDetection detect_batch(const DetectorConfig& config, const Model& target,
                            const std::vector<Text>& texts, unsigned threads = 1);

// Adapter for adaptive_attack: runs detect() and reports the verdict plus its
// query cost.
DetectorOracle make_detector_oracle(const DetectorConfig& config, const Model& target);

// Worst-case query count for one text under this config: the initial query,
// one scorer query per attackable word, and a full candidate fan-out against
// the target and every support.
std::uint64_t worst_case_queries(const DetectorConfig& config, const Text& text);

}  // namespace veridict
