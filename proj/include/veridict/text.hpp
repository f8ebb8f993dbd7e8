#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace veridict {

// A tokenized document. Tokens are the word units every attack and the
// detector operate on; separators hold everything in between (whitespace and
// peeled punctuation) so the original string can be reconstructed exactly.
//
// Layout: raw == separators[0] + tokens[0] + separators[1] + tokens[1] + ...
//               + tokens[n-1] + separators[n]
// so separators.size() == tokens.size() + 1 always.
struct Text {
    std::vector<std::string> tokens;
    std::vector<std::string> separators;

    Text() : separators{""} {}

    std::size_t word_count() const { return tokens.size(); }
    bool empty() const { return tokens.empty(); }

    // Reconstructs the raw string this Text was tokenized from (or the edited
    // form, after apply_edit).
    std::string raw() const;
};

enum class EditKind { replace, erase, insert };

// A single positional word edit. `payload` is the replacement or inserted
// word; it is ignored for erase.
struct WordEdit {
    EditKind kind;
    std::size_t position;
    std::string payload;
};

// Splits on Unicode whitespace; leading/trailing punctuation of each chunk is
// peeled into the separator record. Chunks that are punctuation-only produce
// no token. Case is preserved. detokenize(tokenize(s)) == s for any input.
Text tokenize(std::string_view raw);

// Returns a new Text with the edit applied; the input is never mutated.
// Throws ArgumentError on out-of-range positions or an empty insert payload.
Text apply_edit(const Text& text, const WordEdit& edit);

// True if every code point of the token is punctuation (such tokens never
// appear in tokenize() output, but edits can introduce arbitrary payloads).
bool is_punctuation_token(std::string_view token);

// ASCII lowercase; non-ASCII bytes pass through untouched.
std::string to_lower(std::string_view s);

// Applies the capitalization pattern of `source` to `candidate` (given
// lowercase): ALL-CAPS source uppercases, Capitalized source title-cases,
// anything else returns the candidate unchanged.
std::string match_case(std::string_view candidate, std::string_view source);

}  // namespace veridict
