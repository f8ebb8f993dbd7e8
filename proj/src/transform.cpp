#include "veridict/transform.hpp"

#include "veridict/error.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <fstream>
#include <random>
#include <sstream>

namespace veridict {

// ---------------------------------------------------------------------------
// SynonymLexicon
// ---------------------------------------------------------------------------

void SynonymLexicon::add(const std::string& word, const std::vector<std::string>& synonyms) {
    std::string key = to_lower(word);
    auto& list = entries_[key];
    for (const auto& raw : synonyms) {
        std::string syn = to_lower(raw);
        if (syn.empty() || syn == key) continue;  // drop self-synonyms
        if (std::find(list.begin(), list.end(), syn) == list.end()) {
            list.push_back(std::move(syn));
        }
    }
    if (list.empty()) entries_.erase(key);
}

const std::vector<std::string>& SynonymLexicon::lookup(const std::string& word) const {
    static const std::vector<std::string> empty;
    auto it = entries_.find(word);
    return it == entries_.end() ? empty : it->second;
}

std::shared_ptr<SynonymLexicon> SynonymLexicon::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open lexicon '" + path + "'");

    auto lex = std::make_shared<SynonymLexicon>();
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line.front() == '#') continue;
        auto tab = line.find('\t');
        if (tab == std::string::npos || tab == 0 || tab + 1 >= line.size()) {
            throw FormatError("lexicon '" + path + "': malformed line " +
                              std::to_string(line_no) + " (expected word<TAB>syn1,syn2,...)");
        }
        std::string word = line.substr(0, tab);
        std::vector<std::string> syns;
        std::string field;
        std::stringstream rest(line.substr(tab + 1));
        while (std::getline(rest, field, ',')) {
            if (!field.empty()) syns.push_back(field);
        }
        if (syns.empty()) {
            throw FormatError("lexicon '" + path + "': line " + std::to_string(line_no) +
                              " has no synonyms");
        }
        lex->add(word, syns);
    }
    return lex;
}

void SynonymLexicon::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open lexicon '" + path + "' for writing");
    std::vector<std::string> keys;
    keys.reserve(entries_.size());
    for (const auto& [k, v] : entries_) keys.push_back(k);
    std::sort(keys.begin(), keys.end());
    for (const auto& k : keys) {
        out << k << '\t';
        const auto& syns = entries_.at(k);
        for (std::size_t i = 0; i < syns.size(); ++i) {
            if (i) out << ',';
            out << syns[i];
        }
        out << '\n';
    }
    if (!out) throw IoError("write failed for lexicon '" + path + "'");
}

// ---------------------------------------------------------------------------
// StopwordSet
// ---------------------------------------------------------------------------

StopwordSet::StopwordSet(std::vector<std::string> words) {
    for (auto& w : words) words_.insert(to_lower(w));
}

StopwordSet StopwordSet::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open stopword list '" + path + "'");
    std::vector<std::string> words;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        // trim
        auto b = line.find_first_not_of(" \t");
        auto e = line.find_last_not_of(" \t");
        if (b == std::string::npos) continue;
        words.push_back(line.substr(b, e - b + 1));
    }
    return StopwordSet(std::move(words));
}

const std::vector<std::string>& builtin_stopword_list() {
    static const std::vector<std::string> words = {
        "a", "about", "above", "after", "again", "against", "all", "am", "an", "and",
        "any", "are", "as", "at", "be", "because", "been", "before", "being", "below",
        "between", "both", "but", "by", "can", "cannot", "could", "did", "do", "does",
        "doing", "down", "during", "each", "few", "for", "from", "further", "had", "has",
        "have", "having", "he", "her", "here", "hers", "herself", "him", "himself", "his",
        "how", "i", "if", "in", "into", "is", "it", "its", "itself", "just",
        "me", "more", "most", "my", "myself", "no", "nor", "not", "now", "of",
        "off", "on", "once", "only", "or", "other", "our", "ours", "ourselves", "out",
        "over", "own", "same", "she", "should", "so", "some", "such", "than", "that",
        "the", "their", "theirs", "them", "themselves", "then", "there", "these", "they", "this",
        "those", "through", "to", "too", "under", "until", "up", "upon", "very", "was",
        "we", "were", "what", "when", "where", "which", "while", "who", "whom", "why",
        "will", "with", "would", "you", "your", "yours", "yourself", "yourselves", "across", "along",
        "among", "around", "behind", "beneath", "beside", "beyond", "inside", "near", "onto", "outside",
        "since", "toward", "underneath", "within", "without", "although", "anyone", "anything", "everyone", "everything",
    };
    return words;
}

const StopwordSet& StopwordSet::builtin() {
    static const StopwordSet set{builtin_stopword_list()};
    return set;
}

// ---------------------------------------------------------------------------
// SimilarityConstraint
// ---------------------------------------------------------------------------

bool SimilarityConstraint::position_editable(const Text& original, std::size_t position) const {
    if (position >= original.word_count()) return false;
    const std::string& tok = original.tokens[position];
    if (stopwords.contains(to_lower(tok))) return false;
    if (min_word_length > 0 && tok.size() < min_word_length) return false;
    return true;
}

bool SimilarityConstraint::check(const Text& original, const Text& /*candidate*/,
                                 const std::set<std::size_t>& perturbed_positions) const {
    const std::size_t n = original.word_count();
    if (n == 0) return perturbed_positions.empty();
    for (std::size_t pos : perturbed_positions) {
        if (!position_editable(original, pos)) return false;
    }
    double ratio = static_cast<double>(perturbed_positions.size()) / static_cast<double>(n);
    return ratio <= max_perturbed_ratio;
}

// ---------------------------------------------------------------------------
// TransformationProvider
// ---------------------------------------------------------------------------

TransformationProvider TransformationProvider::make_lexicon(
    std::shared_ptr<const SynonymLexicon> lexicon, std::size_t cap) {
    TransformationProvider p;
    p.kind_ = ProviderKind::lexicon;
    p.lexicon_ = std::move(lexicon);
    p.cap_ = cap;
    return p;
}

TransformationProvider TransformationProvider::make_char_ops(CharOpConfig config,
                                                             std::size_t cap) {
    if (!config.any_enabled()) {
        throw ConfigError("char-op provider needs at least one enabled operation");
    }
    TransformationProvider p;
    p.kind_ = ProviderKind::char_ops;
    p.char_config_ = config;
    p.cap_ = cap;
    return p;
}

TransformationProvider TransformationProvider::make_deletion() {
    TransformationProvider p;
    p.kind_ = ProviderKind::deletion;
    p.cap_ = 1;
    return p;
}

namespace {

const std::vector<char>& qwerty_neighbors(char lower) {
    static const std::unordered_map<char, std::vector<char>> map = {
        {'a', {'q', 'w', 's', 'x', 'z'}}, {'b', {'v', 'g', 'h', 'n'}},
        {'c', {'x', 'd', 'f', 'v'}},      {'d', {'s', 'e', 'r', 'f', 'c', 'x'}},
        {'e', {'w', 's', 'd', 'r'}},      {'f', {'d', 'r', 't', 'g', 'v', 'c'}},
        {'g', {'f', 't', 'y', 'h', 'b', 'v'}}, {'h', {'g', 'y', 'u', 'j', 'n', 'b'}},
        {'i', {'u', 'j', 'k', 'o'}},      {'j', {'h', 'u', 'i', 'k', 'n', 'm'}},
        {'k', {'j', 'i', 'o', 'l', 'm'}}, {'l', {'k', 'o', 'p'}},
        {'m', {'n', 'j', 'k'}},           {'n', {'b', 'h', 'j', 'm'}},
        {'o', {'i', 'k', 'l', 'p'}},      {'p', {'o', 'l'}},
        {'q', {'w', 'a'}},                {'r', {'e', 'd', 'f', 't'}},
        {'s', {'a', 'w', 'e', 'd', 'x', 'z'}}, {'t', {'r', 'f', 'g', 'y'}},
        {'u', {'y', 'h', 'j', 'i'}},      {'v', {'c', 'f', 'g', 'b'}},
        {'w', {'q', 'a', 's', 'e'}},      {'x', {'z', 's', 'd', 'c'}},
        {'y', {'t', 'g', 'h', 'u'}},      {'z', {'a', 's', 'x'}},
    };
    static const std::vector<char> empty;
    auto it = map.find(lower);
    return it == map.end() ? empty : it->second;
}

std::vector<char> substitution_alphabet(char original, CharAlphabet alphabet) {
    const bool was_upper = std::isupper(static_cast<unsigned char>(original)) != 0;
    char low = static_cast<char>(std::tolower(static_cast<unsigned char>(original)));
    std::vector<char> out;
    if (alphabet == CharAlphabet::qwerty_neighbors) {
        out = qwerty_neighbors(low);
    } else {
        for (char c = 'a'; c <= 'z'; ++c) out.push_back(c);
    }
    if (was_upper) {
        for (char& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    }
    return out;
}

// Stable 64-bit mix of (seed, word) so every word gets its own RNG stream.
std::uint64_t word_stream_seed(std::uint64_t seed, const std::string& word) {
    std::uint64_t h = 1469598103934665603ull ^ seed;
    for (unsigned char c : word) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::vector<std::string> char_op_candidates(const std::string& word, const CharOpConfig& cfg,
                                            std::size_t cap) {
    const std::size_t n = word.size();
    std::vector<std::string> out;
    auto push = [&](std::string s) {
        if (s.empty() || s == word) return;
        if (std::find(out.begin(), out.end(), s) == out.end()) out.push_back(std::move(s));
    };

    if (cfg.swap_adjacent) {
        for (std::size_t i = 0; i + 1 < n; ++i) {
            std::string s = word;
            std::swap(s[i], s[i + 1]);
            push(std::move(s));
        }
    }
    if (cfg.substitute) {
        for (std::size_t i = 0; i < n; ++i) {
            for (char c : substitution_alphabet(word[i], cfg.alphabet)) {
                if (c == word[i]) continue;
                std::string s = word;
                s[i] = c;
                push(std::move(s));
            }
        }
    }
    if (cfg.erase && n > 1) {
        for (std::size_t i = 0; i < n; ++i) {
            std::string s = word;
            s.erase(i, 1);
            push(std::move(s));
        }
    }
    if (cfg.insert) {
        for (std::size_t gap = 0; gap <= n; ++gap) {
            std::vector<char> alphabet;
            if (cfg.alphabet == CharAlphabet::qwerty_neighbors && n > 0) {
                alphabet = substitution_alphabet(word[std::min(gap, n - 1)], cfg.alphabet);
            } else {
                for (char c = 'a'; c <= 'z'; ++c) alphabet.push_back(c);
            }
            for (char c : alphabet) {
                std::string s = word;
                s.insert(gap, 1, c);
                push(std::move(s));
            }
        }
    }

    if (out.size() > cap) {
        std::mt19937_64 rng(word_stream_seed(cfg.rng_seed, word));
        std::shuffle(out.begin(), out.end(), rng);
        out.resize(cap);
    }
    return out;
}

}  // namespace

std::vector<std::string> TransformationProvider::candidates(const std::string& word) const {
    if (word.empty()) throw ArgumentError("candidates() requires a nonempty word");
    switch (kind_) {
        case ProviderKind::lexicon: {
            std::vector<std::string> out;
            if (lexicon_ == nullptr) return out;
            for (const auto& syn : lexicon_->lookup(to_lower(word))) {
                std::string cased = match_case(syn, word);
                if (cased == word) continue;
                if (std::find(out.begin(), out.end(), cased) == out.end()) {
                    out.push_back(std::move(cased));
                }
                if (out.size() == cap_) break;
            }
            return out;
        }
        case ProviderKind::char_ops:
            return char_op_candidates(word, char_config_, cap_);
        case ProviderKind::deletion:
            return {std::string()};
    }
    return {};
}

}  // namespace veridict
