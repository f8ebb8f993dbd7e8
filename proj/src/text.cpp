#include "veridict/text.hpp"

#include "veridict/error.hpp"

#include <algorithm>
#include <cctype>

namespace veridict {

namespace {

// Decodes one UTF-8 code point starting at s[i]; advances i past it.
// Invalid bytes are returned as-is (single byte) so nothing is ever lost.
char32_t next_code_point(std::string_view s, std::size_t& i) {
    unsigned char b0 = static_cast<unsigned char>(s[i]);
    if (b0 < 0x80) {
        ++i;
        return b0;
    }
    int len = 0;
    char32_t cp = 0;
    if ((b0 & 0xE0) == 0xC0) {
        len = 2;
        cp = b0 & 0x1F;
    } else if ((b0 & 0xF0) == 0xE0) {
        len = 3;
        cp = b0 & 0x0F;
    } else if ((b0 & 0xF8) == 0xF0) {
        len = 4;
        cp = b0 & 0x07;
    } else {
        ++i;
        return b0;
    }
    if (i + len > s.size()) {
        ++i;
        return b0;
    }
    for (int k = 1; k < len; ++k) {
        unsigned char bk = static_cast<unsigned char>(s[i + k]);
        if ((bk & 0xC0) != 0x80) {
            ++i;
            return b0;
        }
        cp = (cp << 6) | (bk & 0x3F);
    }
    i += len;
    return cp;
}

bool is_unicode_space(char32_t cp) {
    switch (cp) {
        case U'\t': case U'\n': case U'\v': case U'\f': case U'\r': case U' ':
        case 0x85: case 0xA0: case 0x1680:
        case 0x2000: case 0x2001: case 0x2002: case 0x2003: case 0x2004:
        case 0x2005: case 0x2006: case 0x2007: case 0x2008: case 0x2009:
        case 0x200A: case 0x2028: case 0x2029: case 0x202F: case 0x205F:
        case 0x3000:
            return true;
        default:
            return false;
    }
}

bool is_peel_punct(char32_t cp) {
    if (cp < 0x80) {
        return std::ispunct(static_cast<int>(cp)) != 0;
    }
    switch (cp) {
        case 0x2018: case 0x2019: case 0x201C: case 0x201D:  // curly quotes
        case 0x2013: case 0x2014: case 0x2026:               // dashes, ellipsis
        case 0xA1: case 0xBF: case 0xAB: case 0xBB:          // inverted marks, guillemets
            return true;
        default:
            return false;
    }
}

struct CodePointSpan {
    std::size_t begin;
    std::size_t end;
    char32_t cp;
};

std::vector<CodePointSpan> decode(std::string_view s) {
    std::vector<CodePointSpan> out;
    std::size_t i = 0;
    while (i < s.size()) {
        std::size_t start = i;
        char32_t cp = next_code_point(s, i);
        out.push_back({start, i, cp});
    }
    return out;
}

}  // namespace

std::string Text::raw() const {
    std::string out = separators[0];
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        out += tokens[i];
        out += separators[i + 1];
    }
    return out;
}

Text tokenize(std::string_view raw) {
    Text text;
    text.separators.clear();
    std::string pending;  // separator text accumulated before the next token

    auto cps = decode(raw);
    std::size_t i = 0;
    while (i < cps.size()) {
        if (is_unicode_space(cps[i].cp)) {
            pending.append(raw.substr(cps[i].begin, cps[i].end - cps[i].begin));
            ++i;
            continue;
        }
        // Chunk = maximal run of non-whitespace code points.
        std::size_t chunk_begin = i;
        while (i < cps.size() && !is_unicode_space(cps[i].cp)) ++i;
        std::size_t chunk_end = i;  // one past

        // Peel leading and trailing punctuation off the chunk.
        std::size_t tok_begin = chunk_begin;
        while (tok_begin < chunk_end && is_peel_punct(cps[tok_begin].cp)) ++tok_begin;
        std::size_t tok_end = chunk_end;
        while (tok_end > tok_begin && is_peel_punct(cps[tok_end - 1].cp)) --tok_end;

        if (tok_begin == tok_end) {
            // Punctuation-only chunk: all separator, no token.
            pending.append(raw.substr(cps[chunk_begin].begin,
                                      cps[chunk_end - 1].end - cps[chunk_begin].begin));
            continue;
        }
        pending.append(raw.substr(cps[chunk_begin].begin,
                                  cps[tok_begin].begin - cps[chunk_begin].begin));
        text.separators.push_back(std::move(pending));
        pending.clear();
        text.tokens.emplace_back(raw.substr(cps[tok_begin].begin,
                                            cps[tok_end - 1].end - cps[tok_begin].begin));
        if (tok_end < chunk_end) {
            pending.append(raw.substr(cps[tok_end].begin,
                                      cps[chunk_end - 1].end - cps[tok_end].begin));
        }
    }
    text.separators.push_back(std::move(pending));
    return text;
}

namespace {

// Joins the separators around a deleted token, dropping one whitespace char
// at the junction so "a b c" minus "b" reads "a c" rather than "a  c".
std::string merge_separators(const std::string& before, const std::string& after) {
    if (before.empty()) return after;
    if (after.empty()) return before;
    std::string_view tail = after;
    if (std::isspace(static_cast<unsigned char>(before.back())) &&
        std::isspace(static_cast<unsigned char>(tail.front()))) {
        tail.remove_prefix(1);
    }
    return before + std::string(tail);
}

}  // namespace

Text apply_edit(const Text& text, const WordEdit& edit) {
    const std::size_t n = text.tokens.size();
    Text out = text;
    switch (edit.kind) {
        case EditKind::replace: {
            if (edit.position >= n) {
                throw ArgumentError("replace position " + std::to_string(edit.position) +
                                    " out of range for " + std::to_string(n) + " tokens");
            }
            if (edit.payload.empty()) {
                throw ArgumentError("replace payload must be nonempty");
            }
            out.tokens[edit.position] = edit.payload;
            return out;
        }
        case EditKind::erase: {
            if (edit.position >= n) {
                throw ArgumentError("delete position " + std::to_string(edit.position) +
                                    " out of range for " + std::to_string(n) + " tokens");
            }
            std::string merged = merge_separators(out.separators[edit.position],
                                                  out.separators[edit.position + 1]);
            out.tokens.erase(out.tokens.begin() + static_cast<std::ptrdiff_t>(edit.position));
            out.separators.erase(out.separators.begin() +
                                 static_cast<std::ptrdiff_t>(edit.position));
            out.separators[edit.position] = std::move(merged);
            return out;
        }
        case EditKind::insert: {
            if (edit.position > n) {
                throw ArgumentError("insert position " + std::to_string(edit.position) +
                                    " out of range for " + std::to_string(n) + " tokens");
            }
            if (edit.payload.empty()) {
                throw ArgumentError("insert payload must be nonempty");
            }
            out.tokens.insert(out.tokens.begin() + static_cast<std::ptrdiff_t>(edit.position),
                              edit.payload);
            if (edit.position < n) {
                // New token sits before tokens[position]; give it a plain
                // space separator to the following token.
                out.separators.insert(
                    out.separators.begin() + static_cast<std::ptrdiff_t>(edit.position) + 1,
                    " ");
            } else {
                // Appending: keep the old suffix last.
                out.separators.insert(
                    out.separators.begin() + static_cast<std::ptrdiff_t>(edit.position),
                    n == 0 ? "" : " ");
            }
            return out;
        }
    }
    throw ArgumentError("unknown edit kind");
}

bool is_punctuation_token(std::string_view token) {
    if (token.empty()) return true;
    std::size_t i = 0;
    while (i < token.size()) {
        char32_t cp = next_code_point(token, i);
        if (!is_peel_punct(cp)) return false;
    }
    return true;
}

std::string to_lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) {
        return static_cast<char>(std::tolower(c));
    });
    return out;
}

std::string match_case(std::string_view candidate, std::string_view source) {
    auto upper = [](char c) { return std::isupper(static_cast<unsigned char>(c)) != 0; };
    auto lower = [](char c) { return std::islower(static_cast<unsigned char>(c)) != 0; };
    if (candidate.empty() || source.empty()) return std::string(candidate);

    bool all_caps = source.size() > 1;
    for (char c : source) {
        if (!upper(c) && lower(c)) all_caps = false;
    }
    if (all_caps && upper(source.front())) {
        std::string out(candidate);
        std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) {
            return static_cast<char>(std::toupper(c));
        });
        return out;
    }
    if (upper(source.front())) {
        std::string out(candidate);
        out.front() = static_cast<char>(std::toupper(static_cast<unsigned char>(out.front())));
        return out;
    }
    return std::string(candidate);
}

}  // namespace veridict
