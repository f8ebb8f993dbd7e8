#pragma once

#include "veridict/text.hpp"

#include <cstdint>
#include <memory>
#include <set>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace veridict {

// Lowercased word -> ordered synonym list. No word maps to itself, lists are
// deduplicated, unknown words look up to an empty list.
class SynonymLexicon {
public:
    void add(const std::string& word, const std::vector<std::string>& synonyms);
    const std::vector<std::string>& lookup(const std::string& lowercased_word) const;
    std::size_t size() const { return entries_.size(); }

    // TSV: `word<TAB>syn1,syn2,...`; blank lines and `#` comments ignored.
    // Malformed lines raise FormatError naming the line number.
    static std::shared_ptr<SynonymLexicon> load(const std::string& path);
    void save(const std::string& path) const;

private:
    std::unordered_map<std::string, std::vector<std::string>> entries_;
};

// One word per line, `#` comments. Matching is on lowercased tokens.
class StopwordSet {
public:
    StopwordSet() = default;
    explicit StopwordSet(std::vector<std::string> words);

    bool contains(const std::string& lowercased_word) const {
        return words_.count(lowercased_word) > 0;
    }
    std::size_t size() const { return words_.size(); }

    static StopwordSet load(const std::string& path);
    // The bundled ~150-word English list, compiled in.
    static const StopwordSet& builtin();

private:
    std::unordered_set<std::string> words_;
};

// The words behind StopwordSet::builtin(), in list order; data/stopwords_en.txt
// mirrors this list.
const std::vector<std::string>& builtin_stopword_list();

enum class CharAlphabet { qwerty_neighbors, lowercase_letters };

struct CharOpConfig {
    bool swap_adjacent = true;
    bool substitute = true;
    bool erase = true;
    bool insert = true;
    CharAlphabet alphabet = CharAlphabet::qwerty_neighbors;
    std::uint64_t rng_seed = 42;

    bool any_enabled() const { return swap_adjacent || substitute || erase || insert; }
};

// Meaning-preservation constraint shared by attacks and the detector:
// stopword positions may never be edited, at most max_perturbed_ratio of the
// words may be perturbed, and (for character ops) edited words must be at
// least min_word_length characters long.
struct SimilarityConstraint {
    StopwordSet stopwords = StopwordSet::builtin();
    double max_perturbed_ratio = 0.4;
    std::size_t min_word_length = 0;  // 0 disables the length check

    bool check(const Text& original, const Text& candidate,
               const std::set<std::size_t>& perturbed_positions) const;
    bool position_editable(const Text& original, std::size_t position) const;
};

enum class ProviderKind { lexicon, char_ops, deletion };

// Per-word candidate generation: the transformation half of an attack.
// Candidates never contain the word itself and are capped at `cap`.
// A default-constructed provider behaves as an empty lexicon.
class TransformationProvider {
public:
    TransformationProvider() = default;

    static TransformationProvider make_lexicon(std::shared_ptr<const SynonymLexicon> lexicon,
                                               std::size_t cap = 20);
    static TransformationProvider make_char_ops(CharOpConfig config, std::size_t cap = 20);
    // Candidates are a single empty-string sentinel meaning "delete this word".
    static TransformationProvider make_deletion();

    ProviderKind kind() const { return kind_; }
    std::size_t cap() const { return cap_; }

    // Deterministic for a fixed seed; a per-word RNG derived from (seed, word)
    // keeps concurrent calls order-independent.
    std::vector<std::string> candidates(const std::string& word) const;

private:
    ProviderKind kind_ = ProviderKind::lexicon;
    std::shared_ptr<const SynonymLexicon> lexicon_;
    CharOpConfig char_config_;
    std::size_t cap_ = 20;
};

}  // namespace veridict
