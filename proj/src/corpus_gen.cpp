#include "veridict/error.hpp"
#include "veridict/harness.hpp"

#include <algorithm>
#include <random>
#include <set>
#include <string>
#include <vector>

namespace veridict {

namespace {

// Pronounceable synthetic vocabulary: two or three syllables, unique, length
// >= 5 so the char-op min-word-length constraint never blocks them.
class WordMint {
public:
    explicit WordMint(std::uint64_t seed) : rng_(seed) {}

    std::string fresh() {
        static const std::vector<std::string> syllables = {
            "ba", "zor", "mal", "tek", "rin", "dov", "sel", "qua", "fen", "lor",
            "mi",  "tus", "gar", "ne",  "pol", "vash", "kel", "dra", "sun", "bex",
            "cro", "lim", "hart", "jov", "ny",  "pra", "vol", "wex", "yil", "zam",
            "ost", "ur",  "gla", "trem", "bos", "cin", "dul", "erv", "fos", "gri",
        };
        for (int attempt = 0; attempt < 1000; ++attempt) {
            std::string w;
            int parts = 2 + static_cast<int>(rng_() % 2);
            for (int p = 0; p < parts; ++p) w += syllables[rng_() % syllables.size()];
            if (w.size() < 5) w += syllables[rng_() % syllables.size()];
            if (used_.insert(w).second) return w;
        }
        throw ConfigError("synthetic vocabulary exhausted; lower the word counts");
    }

private:
    std::mt19937_64 rng_;
    std::set<std::string> used_;
};

struct KeywordGroup {
    int cls;
    std::string primary;
    std::vector<std::string> variants;
    double popularity;  // relative draw weight inside its class
};

struct Filler {
    std::string word;
    double popularity;
    int tilt_class;
    double tilt;  // multiplier applied when the document class matches
};

std::vector<std::string> class_name_table(int classes) {
    if (classes == 2) return {"negative", "positive"};
    if (classes == 4) return {"business", "science", "sports", "world"};
    std::vector<std::string> names;
    for (int c = 0; c < classes; ++c) names.push_back("topic" + std::to_string(c));
    std::sort(names.begin(), names.end());
    return names;
}

template <typename Rng>
std::size_t weighted_pick(const std::vector<double>& weights, double total, Rng& rng) {
    std::uniform_real_distribution<double> dist(0.0, total);
    double x = dist(rng);
    for (std::size_t i = 0; i < weights.size(); ++i) {
        x -= weights[i];
        if (x <= 0.0) return i;
    }
    return weights.size() - 1;
}

// Joins shuffled content words and stopwords into sentences with light
// punctuation, so tokenization sees realistic case and separators.
template <typename Rng>
std::string compose(std::vector<std::string> content, double stopword_rate,
                    int filler_slots, Rng& rng) {
    const auto& stops = builtin_stopword_list();
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    int stop_slots = 0;
    for (int i = 0; i < filler_slots; ++i) {
        if (unit(rng) < stopword_rate) ++stop_slots;
    }
    for (int i = 0; i < stop_slots; ++i) content.push_back(stops[rng() % stops.size()]);
    std::shuffle(content.begin(), content.end(), rng);

    std::string out;
    std::size_t sentence_len = 0;
    std::size_t sentence_target = 6 + rng() % 7;
    bool start_of_sentence = true;
    for (std::size_t i = 0; i < content.size(); ++i) {
        std::string word = content[i];
        if (start_of_sentence && !word.empty()) {
            word.front() = static_cast<char>(
                std::toupper(static_cast<unsigned char>(word.front())));
            start_of_sentence = false;
        }
        out += word;
        ++sentence_len;
        bool last = i + 1 == content.size();
        if (!last && sentence_len >= sentence_target) {
            out += ". ";
            sentence_len = 0;
            sentence_target = 6 + rng() % 7;
            start_of_sentence = true;
        } else if (!last) {
            if (unit(rng) < 0.06) out += ",";
            out += ' ';
        }
    }
    if (!out.empty() && unit(rng) < 0.9) out += '.';
    return out;
}

}  // namespace

CorpusGenConfig binary_corpus_config() {
    CorpusGenConfig config;
    config.classes = 2;
    config.groups_per_class = 20;
    config.min_away_keywords = 1;
    config.max_away_keywords = 2;
    config.min_variants = 2;
    config.max_variants = 4;
    return config;
}

GeneratedCorpus generate_corpus(const CorpusGenConfig& config) {
    if (config.classes < 2) throw ConfigError("corpus generator needs at least 2 classes");
    if (config.groups_per_class < config.max_keywords) {
        throw ConfigError("groups_per_class must be >= max_keywords");
    }

    std::mt19937_64 rng(config.seed);
    WordMint mint(rng());
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    GeneratedCorpus corpus;
    corpus.class_names = class_name_table(config.classes);
    corpus.lexicon = std::make_shared<SynonymLexicon>();

    // Keyword groups + lexicon entries (members of a group are mutual synonyms).
    std::vector<KeywordGroup> groups;
    std::vector<std::vector<std::size_t>> groups_of_class(
        static_cast<std::size_t>(config.classes));
    for (int c = 0; c < config.classes; ++c) {
        for (int g = 0; g < config.groups_per_class; ++g) {
            KeywordGroup group;
            group.cls = c;
            group.primary = mint.fresh();
            for (int v = 0; v < config.variants_per_group; ++v) {
                group.variants.push_back(mint.fresh());
            }
            group.popularity = 0.5 + unit(rng);
            groups_of_class[static_cast<std::size_t>(c)].push_back(groups.size());
            groups.push_back(std::move(group));
        }
    }
    for (const auto& group : groups) {
        std::vector<std::string> members = group.variants;
        members.insert(members.begin(), group.primary);
        for (std::size_t i = 0; i < members.size(); ++i) {
            std::vector<std::string> rest;
            for (std::size_t j = 0; j < members.size(); ++j) {
                if (j != i) rest.push_back(members[j]);
            }
            corpus.lexicon->add(members[i], rest);
        }
    }

    // Fillers: shared across classes with an occasional per-class tilt.
    std::vector<Filler> fillers;
    for (int f = 0; f < config.filler_words; ++f) {
        Filler filler;
        filler.word = mint.fresh();
        double base = 0.3 + 1.4 * unit(rng);
        filler.popularity = base * base;
        filler.tilt_class = static_cast<int>(rng() % static_cast<std::uint64_t>(config.classes));
        double roll = unit(rng);
        filler.tilt = roll < 0.55 ? 1.0 : (roll < 0.85 ? 2.0 : 3.5);
        fillers.push_back(std::move(filler));
    }
    // A slice of the filler vocabulary gets synonym groups of its own.
    {
        std::vector<std::size_t> order(fillers.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::shuffle(order.begin(), order.end(), rng);
        std::size_t next = 0;
        for (int g = 0; g < config.filler_synonym_groups && next + 2 <= order.size(); ++g) {
            std::size_t span = 2 + rng() % 2;
            span = std::min(span, order.size() - next);
            std::vector<std::string> members;
            for (std::size_t k = 0; k < span; ++k) members.push_back(fillers[order[next + k]].word);
            next += span;
            for (std::size_t i = 0; i < members.size(); ++i) {
                std::vector<std::string> rest;
                for (std::size_t j = 0; j < members.size(); ++j) {
                    if (j != i) rest.push_back(members[j]);
                }
                corpus.lexicon->add(members[i], rest);
            }
        }
    }

    auto ranged = [&rng](int lo, int hi) {
        return lo + static_cast<int>(rng() % static_cast<std::uint64_t>(hi - lo + 1));
    };

    auto make_doc = [&](int cls) {
        std::vector<std::string> content;

        // Gold-class primaries from distinct groups, popularity-weighted.
        const auto& own = groups_of_class[static_cast<std::size_t>(cls)];
        std::vector<double> weights;
        double total = 0.0;
        for (std::size_t gi : own) {
            weights.push_back(groups[gi].popularity);
            total += weights.back();
        }
        int n_keywords = ranged(config.min_keywords, config.max_keywords);
        std::set<std::size_t> chosen;
        while (static_cast<int>(chosen.size()) < n_keywords) {
            std::size_t pick = weighted_pick(weights, total, rng);
            if (chosen.insert(pick).second) {
                content.push_back(groups[own[pick]].primary);
            }
        }

        // Keyword noise: primaries of other classes.
        int n_away = ranged(config.min_away_keywords, config.max_away_keywords);
        for (int i = 0; i < n_away; ++i) {
            std::size_t gi = rng() % groups.size();
            while (groups[gi].cls == cls) gi = rng() % groups.size();
            content.push_back(groups[gi].primary);
        }

        // Variants of other classes' groups; a class never sees its own
        // variants, which is what makes them strong counter-evidence.
        int n_variants = ranged(config.min_variants, config.max_variants);
        for (int i = 0; i < n_variants; ++i) {
            std::size_t gi = rng() % groups.size();
            while (groups[gi].cls == cls) gi = rng() % groups.size();
            const auto& vars = groups[gi].variants;
            content.push_back(vars[rng() % vars.size()]);
        }

        // Fillers, tilt-weighted for this class.
        int n_fillers = ranged(config.min_fillers, config.max_fillers);
        std::vector<double> fw;
        double ftotal = 0.0;
        for (const auto& f : fillers) {
            double w = f.popularity * (f.tilt_class == cls ? f.tilt : 1.0);
            fw.push_back(w);
            ftotal += w;
        }
        for (int i = 0; i < n_fillers; ++i) {
            content.push_back(fillers[weighted_pick(fw, ftotal, rng)].word);
        }

        std::string raw = compose(std::move(content), config.stopword_rate, n_fillers, rng);
        return LabeledText{corpus.class_names[static_cast<std::size_t>(cls)], tokenize(raw)};
    };

    for (int c = 0; c < config.classes; ++c) {
        for (int d = 0; d < config.train_docs_per_class; ++d) corpus.train.push_back(make_doc(c));
    }
    for (int c = 0; c < config.classes; ++c) {
        for (int d = 0; d < config.test_docs_per_class; ++d) corpus.test.push_back(make_doc(c));
    }
    // Interleave classes so prefix slices of the corpus stay balanced.
    auto interleave = [&](std::vector<LabeledText>& docs, int per_class) {
        std::vector<LabeledText> mixed;
        mixed.reserve(docs.size());
        for (int d = 0; d < per_class; ++d) {
            for (int c = 0; c < config.classes; ++c) {
                mixed.push_back(std::move(docs[static_cast<std::size_t>(c * per_class + d)]));
            }
        }
        docs = std::move(mixed);
    };
    interleave(corpus.train, config.train_docs_per_class);
    interleave(corpus.test, config.test_docs_per_class);
    return corpus;
}

}  // namespace veridict
