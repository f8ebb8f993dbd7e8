#pragma once

#include "veridict/classifier.hpp"
#include "veridict/text.hpp"
#include "veridict/transform.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <set>
#include <vector>

namespace veridict {

enum class ImportanceScorerKind { unk_substitution, deletion_delta, none };

// Importance scorer + transformation provider + similarity constraint: the
// three hooks an attack exposes. A detector built from the same bundle probes
// texts with exactly the machinery the attack used.
struct AttackComponents {
    TransformationProvider provider;
    SimilarityConstraint constraint;
    ImportanceScorerKind scorer = ImportanceScorerKind::unk_substitution;
};

struct WordScore {
    std::size_t position;
    double score;
};
using ImportanceScores = std::vector<WordScore>;

// Positions whose token is not a stopword. Importance scoring, the word
// ratio cutoff, and the greedy attacks all operate on this pool.
std::vector<std::size_t> attackable_positions(const Text& text, const StopwordSet& stopwords);

// score_i = P(Y|X) - P(Y|X with w_i -> <unk>), Y the model's hard label on X.
// Consumes exactly one query per attackable word plus one for the base text.
ImportanceScores importance_unk(const Model& model, const Text& text,
                                const StopwordSet& stopwords);

// score_i = P(Y|X) - P(Y|X without w_i); same query accounting.
ImportanceScores importance_deletion(const Model& model, const Text& text,
                                     const StopwordSet& stopwords);

struct AttackResult {
    bool success = false;
    std::optional<Text> adversarial;          // present iff success
    std::set<std::size_t> perturbed_positions;
    std::uint64_t queries_used = 0;
    double final_confidence = 0.0;            // probability of the final hard label
    int flipped_class = -1;                   // class id the target flipped to
};

struct AttackOptions {
    std::uint64_t budget = 2000;
    // When > 0, success additionally requires the flipped label's probability
    // to reach this floor; the search keeps pushing past the first flip.
    double min_confidence = 0.0;
};

// Verdict probe used by the adaptive attack; `queries` is what the probe cost
// so the attack can charge it against its budget.
struct DetectorProbe {
    bool flagged = false;
    std::uint64_t queries = 0;
};
using DetectorOracle = std::function<DetectorProbe(const Text&)>;

// Greedy word-substitution attack: words visited in descending unk-importance
// order; per word the constraint-passing candidate minimizing P(gold) is
// committed if it strictly decreases P(gold); stops at the first label flip.
// Throws ArgumentError if the target misclassifies the input already.
AttackResult greedy_word_attack(const Model& target, const Text& text, int gold_class,
                                const AttackComponents& components,
                                const AttackOptions& options = {});

// Same loop driven by deletion-delta importance and a char-op provider.
AttackResult char_attack(const Model& target, const Text& text, int gold_class,
                         const AttackComponents& components, const AttackOptions& options = {});

// Repeatedly deletes the word whose removal hurts the prediction least until
// the label changes. No constraint; perturbed_positions records the deleted
// original positions.
AttackResult input_reduction(const Model& target, const Text& text, int gold_class,
                             std::uint64_t budget = 2000);

// Greedy attack that keeps going until the flipped label's probability
// reaches min_confidence. min_confidence must exceed 1/num_classes.
AttackResult attack_until_confidence(const Model& target, const Text& text, int gold_class,
                                     const AttackComponents& components, double min_confidence,
                                     std::uint64_t budget = 2000);

// Greedy attack that must fool the detector as well: detector-flagged
// candidates are invalid commits, and success requires a label flip whose
// final text the detector calls original. Detector probe queries count
// against the budget.
AttackResult adaptive_attack(const Model& target, const DetectorOracle& detector,
                             const Text& text, int gold_class,
                             const AttackComponents& components,
                             const AttackOptions& options = {});

}  // namespace veridict
