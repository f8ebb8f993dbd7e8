#include "veridict/attack.hpp"

#include "veridict/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace veridict {

std::vector<std::size_t> attackable_positions(const Text& text, const StopwordSet& stopwords) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < text.word_count(); ++i) {
        if (!stopwords.contains(to_lower(text.tokens[i]))) out.push_back(i);
    }
    return out;
}

namespace {

// Shared scoring loop: one perturbed prediction per attackable position,
// reusing a precomputed base probability when the caller already has one.
ImportanceScores importance_from_base(const Model& model, const Text& text,
                                      const std::vector<std::size_t>& pool, int base_label,
                                      double base_prob, bool deletion) {
    ImportanceScores scores;
    scores.reserve(pool.size());
    for (std::size_t pos : pool) {
        WordEdit edit = deletion ? WordEdit{EditKind::erase, pos, ""}
                                 : WordEdit{EditKind::replace, pos, kUnkToken};
        ProbVector p = model.predict_soft(apply_edit(text, edit));
        scores.push_back({pos, base_prob - p.probs[static_cast<std::size_t>(base_label)]});
    }
    return scores;
}

ImportanceScores importance_impl(const Model& model, const Text& text,
                                 const StopwordSet& stopwords, bool deletion) {
    auto pool = attackable_positions(text, stopwords);
    ProbVector base = model.predict_soft(text);
    int label = base.argmax();
    return importance_from_base(model, text, pool, label,
                                base.probs[static_cast<std::size_t>(label)], deletion);
}

// Descending score, ties by ascending position.
void sort_by_importance(ImportanceScores& scores) {
    std::stable_sort(scores.begin(), scores.end(), [](const WordScore& a, const WordScore& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.position < b.position;
    });
}

class Budget {
public:
    explicit Budget(std::uint64_t limit) : limit_(limit) {}
    bool can_spend(std::uint64_t k = 1) const { return used_ + k <= limit_; }
    void spend(std::uint64_t k = 1) { used_ += k; }
    std::uint64_t used() const { return used_; }

private:
    std::uint64_t limit_;
    std::uint64_t used_ = 0;
};

AttackResult failure(const Budget& budget, std::set<std::size_t> perturbed, double confidence) {
    AttackResult r;
    r.success = false;
    r.perturbed_positions = std::move(perturbed);
    r.queries_used = budget.used();
    r.final_confidence = confidence;
    return r;
}

// Core greedy loop shared by the word, char, min-confidence, and adaptive
// attacks. Candidate evaluation is constraint-first so rejected edits cost no
// queries, mirroring how the budget behaves at detection time.
AttackResult run_greedy(const Model& target, const Text& text, int gold_class,
                        const AttackComponents& components, const AttackOptions& options,
                        const DetectorOracle* detector) {
    if (gold_class < 0 || gold_class >= target.num_classes()) {
        throw ArgumentError("gold class id " + std::to_string(gold_class) + " out of range");
    }
    if (text.empty()) throw ArgumentError("cannot attack an empty text");
    if (components.provider.kind() == ProviderKind::deletion) {
        throw ConfigError("greedy attack does not take a deletion provider; use input_reduction");
    }
    const bool want_confidence = options.min_confidence > 0.0;
    if (want_confidence &&
        options.min_confidence <= 1.0 / static_cast<double>(target.num_classes())) {
        throw ConfigError("min_confidence must exceed 1/num_classes to be reachable");
    }

    Budget budget(options.budget);
    const auto gold = static_cast<std::size_t>(gold_class);

    if (!budget.can_spend()) return failure(budget, {}, 0.0);
    budget.spend();
    ProbVector base = target.predict_soft(text);
    if (base.argmax() != gold_class) {
        throw ArgumentError("rejected input: target does not classify the text as its gold label");
    }

    auto pool = attackable_positions(text, components.constraint.stopwords);
    ImportanceScores scores;
    if (components.scorer == ImportanceScorerKind::none) {
        for (std::size_t pos : pool) scores.push_back({pos, 0.0});
    } else {
        const bool deletion = components.scorer == ImportanceScorerKind::deletion_delta;
        if (!budget.can_spend(pool.size())) {
            return failure(budget, {}, base.probs[gold]);
        }
        budget.spend(pool.size());
        scores = importance_from_base(target, text, pool, gold_class, base.probs[gold], deletion);
        sort_by_importance(scores);
    }

    Text current = text;
    std::set<std::size_t> perturbed;
    double gold_prob = base.probs[gold];
    bool flipped = false;
    int flipped_label = -1;
    double flipped_prob = 0.0;

    for (const WordScore& ws : scores) {
        const std::size_t pos = ws.position;
        auto candidates = components.provider.candidates(current.tokens[pos]);
        if (candidates.empty()) continue;

        std::set<std::size_t> trial_positions = perturbed;
        trial_positions.insert(pos);

        // Evaluate every constraint-passing candidate at this position.
        struct Scored {
            Text trial;
            ProbVector probs;
        };
        std::vector<Scored> evaluated;
        for (const auto& cand : candidates) {
            Text trial = apply_edit(current, WordEdit{EditKind::replace, pos, cand});
            if (!components.constraint.check(text, trial, trial_positions)) continue;
            if (!budget.can_spend()) {
                return failure(budget, perturbed, flipped ? flipped_prob : gold_prob);
            }
            budget.spend();
            ProbVector probs = target.predict_soft(trial);
            evaluated.push_back({std::move(trial), std::move(probs)});
        }
        if (evaluated.empty()) continue;

        // Objective: before the flip, minimize P(gold); once chasing a
        // confidence floor, maximize the flipped label's probability.
        auto objective = [&](const ProbVector& p) {
            if (flipped) return -p.probs[static_cast<std::size_t>(flipped_label)];
            return p.probs[gold];
        };
        std::sort(evaluated.begin(), evaluated.end(), [&](const Scored& a, const Scored& b) {
            return objective(a.probs) < objective(b.probs);
        });

        const Scored* commit = nullptr;
        for (const Scored& s : evaluated) {
            bool improves;
            if (!flipped) {
                improves = s.probs.probs[gold] < gold_prob;
            } else {
                improves = s.probs.probs[static_cast<std::size_t>(flipped_label)] > flipped_prob &&
                           s.probs.argmax() == flipped_label;
            }
            if (!improves) break;  // sorted by objective: nothing later improves either
            if (detector != nullptr) {
                DetectorProbe probe = (*detector)(s.trial);
                budget.spend(probe.queries);
                if (!budget.can_spend(0)) {
                    return failure(budget, perturbed, flipped ? flipped_prob : gold_prob);
                }
                if (probe.flagged) continue;  // invalid commit; try the next candidate
            }
            commit = &s;
            break;
        }
        if (commit == nullptr) continue;

        current = commit->trial;
        perturbed = trial_positions;
        int label = commit->probs.argmax();
        gold_prob = commit->probs.probs[gold];
        if (label != gold_class) {
            flipped = true;
            flipped_label = label;
            flipped_prob = commit->probs.probs[static_cast<std::size_t>(label)];
            bool satisfied = !want_confidence || flipped_prob >= options.min_confidence;
            if (satisfied) {
                AttackResult r;
                r.success = true;
                r.adversarial = current;
                r.perturbed_positions = perturbed;
                r.queries_used = budget.used();
                r.final_confidence = flipped_prob;
                r.flipped_class = label;
                return r;
            }
        } else if (flipped) {
            // A commit can only happen while flipped if it kept the flipped
            // label on top, so this branch is unreachable; keep state sane.
            flipped = false;
        }
    }
    return failure(budget, perturbed, flipped ? flipped_prob : gold_prob);
}

}  // namespace

ImportanceScores importance_unk(const Model& model, const Text& text,
                                const StopwordSet& stopwords) {
    return importance_impl(model, text, stopwords, /*deletion=*/false);
}

ImportanceScores importance_deletion(const Model& model, const Text& text,
                                     const StopwordSet& stopwords) {
    return importance_impl(model, text, stopwords, /*deletion=*/true);
}

AttackResult greedy_word_attack(const Model& target, const Text& text, int gold_class,
                                const AttackComponents& components,
                                const AttackOptions& options) {
    // The word attack is defined by unknown-word importance ordering; the
    // bundle's scorer field only steers the detector.
    AttackComponents pinned = components;
    pinned.scorer = ImportanceScorerKind::unk_substitution;
    return run_greedy(target, text, gold_class, pinned, options, nullptr);
}

AttackResult char_attack(const Model& target, const Text& text, int gold_class,
                         const AttackComponents& components, const AttackOptions& options) {
    if (components.provider.kind() != ProviderKind::char_ops) {
        throw ConfigError("char_attack requires a char-op transformation provider");
    }
    AttackComponents pinned = components;
    pinned.scorer = ImportanceScorerKind::deletion_delta;
    return run_greedy(target, text, gold_class, pinned, options, nullptr);
}

AttackResult attack_until_confidence(const Model& target, const Text& text, int gold_class,
                                     const AttackComponents& components, double min_confidence,
                                     std::uint64_t budget) {
    if (min_confidence <= 1.0 / static_cast<double>(target.num_classes())) {
        throw ConfigError("min_confidence must exceed 1/num_classes to be reachable");
    }
    AttackOptions options;
    options.budget = budget;
    options.min_confidence = min_confidence;
    AttackComponents pinned = components;
    pinned.scorer = pinned.provider.kind() == ProviderKind::char_ops
                        ? ImportanceScorerKind::deletion_delta
                        : ImportanceScorerKind::unk_substitution;
    return run_greedy(target, text, gold_class, pinned, options, nullptr);
}

AttackResult adaptive_attack(const Model& target, const DetectorOracle& detector,
                             const Text& text, int gold_class,
                             const AttackComponents& components, const AttackOptions& options) {
    AttackComponents pinned = components;
    pinned.scorer = pinned.provider.kind() == ProviderKind::char_ops
                        ? ImportanceScorerKind::deletion_delta
                        : ImportanceScorerKind::unk_substitution;
    return run_greedy(target, text, gold_class, pinned, options, &detector);
}

AttackResult input_reduction(const Model& target, const Text& text, int gold_class,
                             std::uint64_t budget_limit) {
    if (gold_class < 0 || gold_class >= target.num_classes()) {
        throw ArgumentError("gold class id " + std::to_string(gold_class) + " out of range");
    }
    if (text.empty()) throw ArgumentError("cannot attack an empty text");

    Budget budget(budget_limit);
    Text current = text;
    std::vector<std::size_t> original_position(text.word_count());
    for (std::size_t i = 0; i < original_position.size(); ++i) original_position[i] = i;
    std::set<std::size_t> deleted;

    bool first = true;
    while (true) {
        if (!budget.can_spend()) return failure(budget, deleted, 0.0);
        budget.spend();
        ProbVector probs = target.predict_soft(current);
        int label = probs.argmax();
        if (first && label != gold_class) {
            throw ArgumentError(
                "rejected input: target does not classify the text as its gold label");
        }
        first = false;
        if (label != gold_class) {
            AttackResult r;
            r.success = true;
            r.adversarial = current;
            r.perturbed_positions = deleted;
            r.queries_used = budget.used();
            r.final_confidence = probs.probs[static_cast<std::size_t>(label)];
            r.flipped_class = label;
            return r;
        }
        if (current.empty()) {
            return failure(budget, deleted, probs.probs[static_cast<std::size_t>(gold_class)]);
        }

        // Deletion-delta importance over the current text; remove the word
        // whose deletion lowers P(gold) least (ties: lowest position).
        const double base = probs.probs[static_cast<std::size_t>(gold_class)];
        std::size_t best_pos = 0;
        double best_score = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < current.word_count(); ++i) {
            if (!budget.can_spend()) return failure(budget, deleted, base);
            budget.spend();
            ProbVector p = target.predict_soft(apply_edit(current, {EditKind::erase, i, ""}));
            double score = base - p.probs[static_cast<std::size_t>(gold_class)];
            if (score < best_score) {
                best_score = score;
                best_pos = i;
            }
        }
        deleted.insert(original_position[best_pos]);
        original_position.erase(original_position.begin() +
                                static_cast<std::ptrdiff_t>(best_pos));
        current = apply_edit(current, {EditKind::erase, best_pos, ""});
    }
}

}  // namespace veridict
