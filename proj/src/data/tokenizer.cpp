#include "dnlg/data/tokenizer.hpp"

#include <cctype>

#include "dnlg/errors.hpp"

namespace dnlg {

namespace {

bool is_space(unsigned char c) { return std::isspace(c) != 0; }
bool is_word(unsigned char c) { return c >= 0x80 || std::isalnum(c) != 0; }
bool is_digit(unsigned char c) { return std::isdigit(c) != 0; }

bool attaches_left(std::string_view tok) {
    static constexpr std::string_view closers[] = {".", ",", "!", "?", ";", ":", ")", "]", "}", "%"};
    for (auto c : closers)
        if (tok == c) return true;
    return false;
}

bool attaches_right(std::string_view tok) { return tok == "(" || tok == "[" || tok == "{"; }

}  // namespace

TokenSequence tokenize(std::string_view text) {
    TokenSequence out;
    std::string current;
    auto flush = [&] {
        if (!current.empty()) out.push_back(std::move(current));
        current.clear();
    };

    const std::size_t n = text.size();
    for (std::size_t i = 0; i < n; ++i) {
        const auto c = static_cast<unsigned char>(text[i]);
        if (is_space(c)) {
            flush();
            continue;
        }
        if (is_word(c)) {
            current += static_cast<char>(c);
            continue;
        }
        // Punctuation: keep as a joiner only when flanked by word characters.
        const bool has_prev = !current.empty();
        const bool has_next = i + 1 < n && is_word(static_cast<unsigned char>(text[i + 1]));
        if (has_prev && has_next) {
            const auto prev = static_cast<unsigned char>(current.back());
            const auto next = static_cast<unsigned char>(text[i + 1]);
            const bool word_joiner = (c == '-' || c == '\'');
            const bool digit_joiner = (c == '.' || c == ',') && is_digit(prev) && is_digit(next);
            if (word_joiner || digit_joiner) {
                current += static_cast<char>(c);
                continue;
            }
        }
        flush();
        out.emplace_back(1, static_cast<char>(c));
    }
    flush();
    return out;
}

std::string detokenize(std::span<const std::string> tokens) {
    std::string out;
    bool glue_next = false;
    for (const auto& tok : tokens) {
        if (!out.empty() && !glue_next && !attaches_left(tok)) out += ' ';
        out += tok;
        glue_next = attaches_right(tok);
    }
    return out;
}

std::string join_tokens(std::span<const std::string> tokens, std::string_view sep) {
    std::string out;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (i) out += sep;
        out += tokens[i];
    }
    return out;
}

TokenSequence split_whitespace(std::string_view text) {
    TokenSequence out;
    std::size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && is_space(static_cast<unsigned char>(text[i]))) ++i;
        const std::size_t start = i;
        while (i < text.size() && !is_space(static_cast<unsigned char>(text[i]))) ++i;
        if (i > start) out.emplace_back(text.substr(start, i - start));
    }
    return out;
}

std::vector<TokenSequence> filter_by_length(std::span<const TokenSequence> corpus, std::size_t max_len) {
    if (max_len < 1) throw ConfigError("max_len must be at least 1");
    std::vector<TokenSequence> out;
    for (const auto& seq : corpus)
        if (seq.size() <= max_len) out.push_back(seq);
    return out;
}

std::vector<std::string> utf8_chars(std::string_view word) {
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < word.size()) {
        const auto lead = static_cast<unsigned char>(word[i]);
        std::size_t len = 1;
        if (lead >= 0xF0 && lead < 0xF8) len = 4;
        else if (lead >= 0xE0) len = lead < 0xF0 ? 3 : 1;
        else if (lead >= 0xC0) len = 2;
        if (i + len > word.size()) len = 1;
        for (std::size_t k = 1; k < len; ++k) {
            if ((static_cast<unsigned char>(word[i + k]) & 0xC0) != 0x80) {
                len = 1;
                break;
            }
        }
        out.emplace_back(word.substr(i, len));
        i += len;
    }
    return out;
}

}  // namespace dnlg
