#pragma once

#include "veridict/text.hpp"

#include <atomic>
#include <cstdint>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

namespace veridict {

// Soft prediction: one probability per class, summing to 1 within 1e-6.
struct ProbVector {
    std::vector<double> probs;

    int argmax() const;  // ties broken by lowest index
};

struct HardLabel {
    int class_id = -1;
    std::string class_name;
};

// Thread-safe prediction counter: one increment per single-text prediction,
// a batch of k texts adds exactly k. No lost increments; ordering irrelevant.
class QueryCounter {
public:
    void add(std::uint64_t k = 1) const { count_.fetch_add(k, std::memory_order_relaxed); }
    std::uint64_t value() const { return count_.load(std::memory_order_relaxed); }
    void reset() const { count_.store(0, std::memory_order_relaxed); }

private:
    mutable std::atomic<std::uint64_t> count_{0};
};

// Black-box classifier interface. Every implementation counts one query per
// single-text prediction (soft or hard). Predictions must be deterministic
// and safe to issue from many threads at once.
class Model {
public:
    virtual ~Model() = default;

    virtual const std::vector<std::string>& class_names() const = 0;
    virtual ProbVector predict_soft(const Text& text) const = 0;
    virtual HardLabel predict_hard(const Text& text) const = 0;
    virtual std::uint64_t queries_used() const = 0;
    virtual void reset_queries() const = 0;

    int num_classes() const { return static_cast<int>(class_names().size()); }
};

enum class ModelKind { naive_bayes, logistic_regression };
enum class FeatureMode { bow, bow_char3 };

struct TrainingConfig {
    ModelKind kind = ModelKind::naive_bayes;
    FeatureMode features = FeatureMode::bow;
    double smoothing = 1.0;       // Laplace alpha (naive Bayes)
    double learning_rate = 0.1;   // logistic regression
    int epochs = 30;              // logistic regression
    std::uint64_t seed = 42;      // logistic regression sample order
};

struct LabeledText {
    std::string label;
    Text text;
};

// The reserved out-of-vocabulary token; guaranteed absent from every trained
// vocabulary so unknown-word substitution always removes evidence.
inline constexpr const char* kUnkToken = "<unk>";

// A trained, persistable classifier. Both kinds score texts with the same
// linear form (bias + sum of feature weights); naive Bayes stores log
// likelihoods as weights, so softmax over scores is the exact posterior.
class TrainedModel final : public Model {
public:
    const std::vector<std::string>& class_names() const override { return classes_; }
    ProbVector predict_soft(const Text& text) const override;
    HardLabel predict_hard(const Text& text) const override;
    std::uint64_t queries_used() const override { return counter_.value(); }
    void reset_queries() const override { counter_.reset(); }

    std::vector<HardLabel> predict_hard_batch(const std::vector<Text>& texts) const;

    ModelKind kind() const { return kind_; }
    const TrainingConfig& config() const { return config_; }

    void save(const std::string& path) const;
    static std::shared_ptr<TrainedModel> load(const std::string& path);
    static std::shared_ptr<TrainedModel> from_json_string(const std::string& json_text);
    std::string to_json_string() const;

    // Corpus labels may appear in any order; class names are the sorted
    // distinct labels. Throws ConfigError on an empty or single-class corpus.
    static std::shared_ptr<TrainedModel> train(const std::vector<LabeledText>& corpus,
                                               const TrainingConfig& config);

private:
    friend class ModelCodec;

    ProbVector soft_uncounted(const Text& text) const;
    std::vector<std::pair<int, double>> features_of(const Text& text) const;

    ModelKind kind_ = ModelKind::naive_bayes;
    TrainingConfig config_;
    std::vector<std::string> classes_;
    std::unordered_map<std::string, int> vocab_;      // feature key -> index
    std::vector<std::vector<double>> weights_;        // [class][feature]
    std::vector<double> bias_;                        // [class]
    QueryCounter counter_;
};

// Model file format version understood by this build.
inline constexpr int kModelFormatVersion = 1;

}  // namespace veridict
