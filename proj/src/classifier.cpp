#include "veridict/classifier.hpp"

#include "veridict/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>

namespace veridict {

using nlohmann::json;

int ProbVector::argmax() const {
    int best = 0;
    for (int i = 1; i < static_cast<int>(probs.size()); ++i) {
        if (probs[i] > probs[best]) best = i;
    }
    return best;
}

namespace {

const char* kind_name(ModelKind k) {
    return k == ModelKind::naive_bayes ? "naive-bayes" : "logistic-regression";
}

ModelKind kind_from_name(const std::string& s) {
    if (s == "naive-bayes") return ModelKind::naive_bayes;
    if (s == "logistic-regression") return ModelKind::logistic_regression;
    throw FormatError("unknown model kind '" + s + "'");
}

const char* feature_name(FeatureMode m) {
    return m == FeatureMode::bow ? "bow" : "bow+char3";
}

FeatureMode features_from_name(const std::string& s) {
    if (s == "bow") return FeatureMode::bow;
    if (s == "bow+char3") return FeatureMode::bow_char3;
    throw FormatError("unknown feature mode '" + s + "'");
}

std::vector<double> softmax(std::vector<double> scores) {
    double mx = *std::max_element(scores.begin(), scores.end());
    double sum = 0.0;
    for (double& s : scores) {
        s = std::exp(s - mx);
        sum += s;
    }
    for (double& s : scores) s /= sum;
    return scores;
}

// Feature keys: "w:" prefix for word unigrams, "c3:" for character trigrams
// of the lowercased token. Lowercasing happens here, not at tokenization.
void emit_feature_keys(const Text& text, FeatureMode mode,
                       const std::function<void(const std::string&)>& sink) {
    for (const auto& token : text.tokens) {
        std::string low = to_lower(token);
        sink("w:" + low);
        if (mode == FeatureMode::bow_char3) {
            if (low.size() < 3) {
                sink("c3:" + low);
            } else {
                for (std::size_t i = 0; i + 3 <= low.size(); ++i) {
                    sink("c3:" + low.substr(i, 3));
                }
            }
        }
    }
}

}  // namespace

std::vector<std::pair<int, double>> TrainedModel::features_of(const Text& text) const {
    std::map<int, double> counts;
    const int unk = vocab_.at(std::string("w:") + kUnkToken);
    emit_feature_keys(text, config_.features, [&](const std::string& key) {
        auto it = vocab_.find(key);
        counts[it == vocab_.end() ? unk : it->second] += 1.0;
    });
    std::vector<std::pair<int, double>> out(counts.begin(), counts.end());
    if (kind_ == ModelKind::logistic_regression && !out.empty()) {
        double total = 0.0;
        for (auto& [idx, c] : out) total += c;
        for (auto& [idx, c] : out) c /= total;
    }
    return out;
}

ProbVector TrainedModel::soft_uncounted(const Text& text) const {
    std::vector<double> scores = bias_;
    for (const auto& [idx, cnt] : features_of(text)) {
        for (std::size_t c = 0; c < scores.size(); ++c) {
            scores[c] += cnt * weights_[c][static_cast<std::size_t>(idx)];
        }
    }
    return ProbVector{softmax(std::move(scores))};
}

ProbVector TrainedModel::predict_soft(const Text& text) const {
    counter_.add(1);
    return soft_uncounted(text);
}

HardLabel TrainedModel::predict_hard(const Text& text) const {
    counter_.add(1);
    ProbVector p = soft_uncounted(text);
    int id = p.argmax();
    return HardLabel{id, classes_[static_cast<std::size_t>(id)]};
}

std::vector<HardLabel> TrainedModel::predict_hard_batch(const std::vector<Text>& texts) const {
    std::vector<HardLabel> out;
    out.reserve(texts.size());
    for (const auto& t : texts) out.push_back(predict_hard(t));
    return out;
}

std::shared_ptr<TrainedModel> TrainedModel::train(const std::vector<LabeledText>& corpus,
                                                  const TrainingConfig& config) {
    if (corpus.empty()) throw ConfigError("training corpus is empty");

    std::set<std::string> label_set;
    for (const auto& d : corpus) label_set.insert(d.label);
    if (label_set.size() < 2) {
        throw ConfigError("training corpus has " + std::to_string(label_set.size()) +
                          " class(es); at least 2 required");
    }

    auto model = std::make_shared<TrainedModel>();
    model->kind_ = config.kind;
    model->config_ = config;
    model->classes_.assign(label_set.begin(), label_set.end());

    std::unordered_map<std::string, int> class_index;
    for (int c = 0; c < static_cast<int>(model->classes_.size()); ++c) {
        class_index[model->classes_[static_cast<std::size_t>(c)]] = c;
    }

    // Vocabulary: reserved <unk> first, then first-seen order over the corpus.
    auto& vocab = model->vocab_;
    vocab[std::string("w:") + kUnkToken] = 0;
    for (const auto& d : corpus) {
        emit_feature_keys(d.text, config.features, [&](const std::string& key) {
            vocab.emplace(key, static_cast<int>(vocab.size()));
        });
    }

    const std::size_t n_classes = model->classes_.size();
    const std::size_t n_features = vocab.size();
    model->weights_.assign(n_classes, std::vector<double>(n_features, 0.0));
    model->bias_.assign(n_classes, 0.0);

    if (config.kind == ModelKind::naive_bayes) {
        std::vector<double> class_docs(n_classes, 0.0);
        std::vector<double> class_tokens(n_classes, 0.0);
        // weights_ temporarily holds raw counts.
        for (const auto& d : corpus) {
            auto c = static_cast<std::size_t>(class_index.at(d.label));
            class_docs[c] += 1.0;
            emit_feature_keys(d.text, config.features, [&](const std::string& key) {
                model->weights_[c][static_cast<std::size_t>(vocab.at(key))] += 1.0;
                class_tokens[c] += 1.0;
            });
        }
        const double a = config.smoothing;
        const double v = static_cast<double>(n_features);
        for (std::size_t c = 0; c < n_classes; ++c) {
            model->bias_[c] = std::log(class_docs[c] / static_cast<double>(corpus.size()));
            const double denom = class_tokens[c] + a * v;
            for (std::size_t f = 0; f < n_features; ++f) {
                model->weights_[c][f] = std::log((model->weights_[c][f] + a) / denom);
            }
        }
    } else {
        // Plain SGD with softmax cross entropy; fixed rate and epoch count,
        // seeded shuffle, so training is exactly reproducible.
        std::vector<std::vector<std::pair<int, double>>> feats;
        std::vector<std::size_t> labels;
        feats.reserve(corpus.size());
        for (const auto& d : corpus) {
            feats.push_back(model->features_of(d.text));
            labels.push_back(static_cast<std::size_t>(class_index.at(d.label)));
        }
        std::vector<std::size_t> order(corpus.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::mt19937_64 rng(config.seed);
        for (int epoch = 0; epoch < config.epochs; ++epoch) {
            std::shuffle(order.begin(), order.end(), rng);
            for (std::size_t s : order) {
                std::vector<double> scores = model->bias_;
                for (const auto& [idx, x] : feats[s]) {
                    for (std::size_t c = 0; c < n_classes; ++c) {
                        scores[c] += x * model->weights_[c][static_cast<std::size_t>(idx)];
                    }
                }
                std::vector<double> p = softmax(std::move(scores));
                for (std::size_t c = 0; c < n_classes; ++c) {
                    double g = p[c] - (c == labels[s] ? 1.0 : 0.0);
                    model->bias_[c] -= config.learning_rate * g;
                    for (const auto& [idx, x] : feats[s]) {
                        model->weights_[c][static_cast<std::size_t>(idx)] -=
                            config.learning_rate * g * x;
                    }
                }
            }
        }
    }
    return model;
}

// ---------------------------------------------------------------------------
// Persistence
// ---------------------------------------------------------------------------

class ModelCodec {
public:
    static json encode(const TrainedModel& m) {
        json j;
        j["magic"] = "vmodel";
        j["format_version"] = kModelFormatVersion;
        j["kind"] = kind_name(m.kind_);
        j["classes"] = m.classes_;
        json vocab = json::object();
        for (const auto& [key, idx] : m.vocab_) vocab[key] = idx;
        j["vocab"] = std::move(vocab);
        j["params"] = {{"bias", m.bias_}, {"weights", m.weights_}};
        j["config"] = {{"features", feature_name(m.config_.features)},
                       {"smoothing", m.config_.smoothing},
                       {"learning_rate", m.config_.learning_rate},
                       {"epochs", m.config_.epochs},
                       {"seed", m.config_.seed}};
        return j;
    }

    static std::shared_ptr<TrainedModel> decode(const json& j) {
        if (!j.is_object() || !j.contains("magic") || j["magic"] != "vmodel") {
            throw FormatError("not a vmodel file (missing magic)");
        }
        int version = j.value("format_version", -1);
        if (version != kModelFormatVersion) {
            throw FormatError("unsupported model format version: expected " +
                              std::to_string(kModelFormatVersion) + ", found " +
                              std::to_string(version));
        }
        auto m = std::make_shared<TrainedModel>();
        m->kind_ = kind_from_name(j.at("kind").get<std::string>());
        m->classes_ = j.at("classes").get<std::vector<std::string>>();
        for (const auto& [key, idx] : j.at("vocab").items()) {
            m->vocab_[key] = idx.get<int>();
        }
        m->bias_ = j.at("params").at("bias").get<std::vector<double>>();
        m->weights_ = j.at("params").at("weights").get<std::vector<std::vector<double>>>();
        const auto& cfg = j.at("config");
        m->config_.kind = m->kind_;
        m->config_.features = features_from_name(cfg.at("features").get<std::string>());
        m->config_.smoothing = cfg.at("smoothing").get<double>();
        m->config_.learning_rate = cfg.at("learning_rate").get<double>();
        m->config_.epochs = cfg.at("epochs").get<int>();
        m->config_.seed = cfg.at("seed").get<std::uint64_t>();

        if (m->classes_.size() < 2) throw FormatError("model declares fewer than 2 classes");
        if (m->bias_.size() != m->classes_.size() ||
            m->weights_.size() != m->classes_.size()) {
            throw FormatError("parameter shapes do not match class count");
        }
        for (const auto& row : m->weights_) {
            if (row.size() != m->vocab_.size()) {
                throw FormatError("weight row length does not match vocabulary size");
            }
        }
        if (!m->vocab_.count(std::string("w:") + kUnkToken)) {
            throw FormatError("vocabulary is missing the reserved <unk> entry");
        }
        return m;
    }
};

std::string TrainedModel::to_json_string() const {
    return ModelCodec::encode(*this).dump();
}

void TrainedModel::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << to_json_string() << '\n';
    if (!out) throw IoError("write failed for '" + path + "'");
}

std::shared_ptr<TrainedModel> TrainedModel::from_json_string(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw FormatError(std::string("model JSON parse error: ") + e.what(), e.byte);
    }
    try {
        return ModelCodec::decode(j);
    } catch (const json::exception& e) {
        throw FormatError(std::string("model JSON structure error: ") + e.what());
    }
}

std::shared_ptr<TrainedModel> TrainedModel::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    std::stringstream buf;
    buf << in.rdbuf();
    return from_json_string(buf.str());
}

}  // namespace veridict
