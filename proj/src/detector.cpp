#include "veridict/detector.hpp"

#include "veridict/error.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <random>
#include <thread>

namespace veridict {

VoteTally majority_vote(const std::vector<HardLabel>& labels) {
    VoteTally tally;
    for (const auto& label : labels) ++tally.counts[label.class_id];
    std::size_t max_count = 0;
    for (const auto& [cls, count] : tally.counts) max_count = std::max(max_count, count);
    for (const auto& [cls, count] : tally.counts) {
        if (count == max_count) tally.majority.push_back(cls);  // map order: ascending
    }
    return tally;
}

std::vector<std::size_t> select_top_words(const ImportanceScores& scores, double alpha) {
    if (!(alpha > 0.0) || alpha > 1.0) {
        throw ConfigError("word ratio must lie in (0,1], got " + std::to_string(alpha));
    }
    ImportanceScores sorted = scores;
    std::stable_sort(sorted.begin(), sorted.end(), [](const WordScore& a, const WordScore& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.position < b.position;
    });
    std::size_t keep = 0;
    if (!sorted.empty()) {
        keep = static_cast<std::size_t>(
            std::ceil(alpha * static_cast<double>(sorted.size())));
        keep = std::max<std::size_t>(keep, 1);
        keep = std::min(keep, sorted.size());
    }
    std::vector<std::size_t> positions;
    positions.reserve(keep);
    for (std::size_t i = 0; i < keep; ++i) positions.push_back(sorted[i].position);
    return positions;
}

namespace {

void validate(const DetectorConfig& config, const Model& target) {
    if (!(config.word_ratio > 0.0) || config.word_ratio > 1.0) {
        throw ConfigError("word ratio must lie in (0,1], got " +
                          std::to_string(config.word_ratio));
    }
    for (const auto& support : config.supports) {
        if (support == nullptr) throw ConfigError("null support model");
        if (support->class_names() != target.class_names()) {
            throw ConfigError("support model class set differs from the target's");
        }
    }
}

// Input label excluded from the majority set, or tied inside it.
bool tally_triggers(const VoteTally& tally, int input_label) {
    bool in_majority = std::find(tally.majority.begin(), tally.majority.end(), input_label) !=
                       tally.majority.end();
    if (!in_majority) return true;
    return tally.majority.size() > 1;
}

}  // namespace

Verdict detect(const DetectorConfig& config, const Model& target, const Text& text) {
    validate(config, target);
    if (text.empty()) throw ArgumentError("cannot run detection on an empty text");

    const bool scored = config.order == WordOrder::by_scorer &&
                        config.components.scorer != ImportanceScorerKind::none;

    Verdict verdict;
    auto pool = attackable_positions(text, config.components.constraint.stopwords);

    // Initial query. The soft prediction is only issued when importance
    // scoring needs it; otherwise the detector runs on hard labels alone.
    int input_label;
    double base_prob = 0.0;
    if (scored) {
        ProbVector base = target.predict_soft(text);
        verdict.queries_used += 1;
        input_label = base.argmax();
        base_prob = base.probs[static_cast<std::size_t>(input_label)];
    } else {
        input_label = target.predict_hard(text).class_id;
        verdict.queries_used += 1;
    }

    // Word order: importance, plain position, or a seeded shuffle.
    std::vector<std::size_t> selected;
    if (config.order == WordOrder::random) {
        std::vector<std::size_t> shuffled = pool;
        std::mt19937_64 rng(config.random_order_seed);
        std::shuffle(shuffled.begin(), shuffled.end(), rng);
        ImportanceScores scores;
        for (std::size_t i = 0; i < shuffled.size(); ++i) {
            scores.push_back({shuffled[i], static_cast<double>(shuffled.size() - i)});
        }
        selected = select_top_words(scores, config.word_ratio);
    } else if (!scored) {
        ImportanceScores scores;
        for (std::size_t pos : pool) scores.push_back({pos, 0.0});
        selected = select_top_words(scores, config.word_ratio);
    } else {
        const bool deletion = config.components.scorer == ImportanceScorerKind::deletion_delta;
        ImportanceScores scores;
        for (std::size_t pos : pool) {
            WordEdit edit = deletion ? WordEdit{EditKind::erase, pos, ""}
                                     : WordEdit{EditKind::replace, pos, kUnkToken};
            ProbVector p = target.predict_soft(apply_edit(text, edit));
            verdict.queries_used += 1;
            scores.push_back({pos, base_prob - p.probs[static_cast<std::size_t>(input_label)]});
        }
        selected = select_top_words(scores, config.word_ratio);
    }

    for (std::size_t pos : selected) {
        verdict.words_processed += 1;
        auto candidates = config.components.provider.candidates(text.tokens[pos]);
        std::vector<HardLabel> votes;
        for (const auto& cand : candidates) {
            WordEdit edit = cand.empty() ? WordEdit{EditKind::erase, pos, ""}
                                         : WordEdit{EditKind::replace, pos, cand};
            Text trial = apply_edit(text, edit);
            if (!config.components.constraint.check(text, trial, {pos})) continue;
            votes.push_back(target.predict_hard(trial));
            verdict.queries_used += 1;
            for (const auto& support : config.supports) {
                votes.push_back(support->predict_hard(trial));
                verdict.queries_used += 1;
            }
        }
        if (votes.empty()) continue;  // cannot vote, cannot trigger

        VoteTally tally = majority_vote(votes);
        tally.word_index = pos;
        verdict.tallies.push_back(tally);
        if (tally_triggers(verdict.tallies.back(), input_label) && !verdict.is_adversarial) {
            verdict.is_adversarial = true;
            verdict.trigger_word_index = pos;
            if (config.early_stop) return verdict;
        }
    }
    return verdict;
}

BatchDetection detect_batch(const DetectorConfig& config, const Model& target,
                            const std::vector<Text>& texts, unsigned threads) {
    BatchDetection result;
    result.verdicts.resize(texts.size());
    if (threads <= 1 || texts.size() < 2) {
        for (std::size_t i = 0; i < texts.size(); ++i) {
            result.verdicts[i] = detect(config, target, texts[i]);
        }
    } else {
        std::atomic<std::size_t> next{0};
        auto worker = [&]() {
            while (true) {
                std::size_t i = next.fetch_add(1);
                if (i >= texts.size()) return;
                result.verdicts[i] = detect(config, target, texts[i]);
            }
        };
        std::vector<std::thread> team;
        unsigned n = std::min<unsigned>(threads, std::thread::hardware_concurrency() + 1);
        for (unsigned t = 0; t < n; ++t) team.emplace_back(worker);
        for (auto& t : team) t.join();
    }
    for (const auto& v : result.verdicts) result.total_queries += v.queries_used;
    return result;
}

DetectorOracle make_detector_oracle(const DetectorConfig& config, const Model& target) {
    return [config, &target](const Text& text) {
        Verdict v = detect(config, target, text);
        return DetectorProbe{v.is_adversarial, v.queries_used};
    };
}

std::uint64_t worst_case_queries(const DetectorConfig& config, const Text& text) {
    const std::uint64_t n = attackable_positions(
        text, config.components.constraint.stopwords).size();
    const std::uint64_t k = 1 + config.supports.size();
    const bool scored = config.order == WordOrder::by_scorer &&
                        config.components.scorer != ImportanceScorerKind::none;
    return 1 + (scored ? n : 0) + n * config.components.provider.cap() * k;
}

}  // namespace veridict
