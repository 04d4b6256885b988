#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dnlg/data/types.hpp"

namespace dnlg {

// Rule-based tokenizer: whitespace-normalizes and splits punctuation from
// alphanumeric runs. Hyphens and apostrophes between word characters stay
// inside the word ("kid-friendly", "don't"), as do '.' and ',' between
// digits ("2.5", "1,000"). Bytes >= 0x80 count as word characters so UTF-8
// text ("£20", "café") is never split mid-codepoint. No case folding.
TokenSequence tokenize(std::string_view text);

// Joins tokens with single spaces, attaching closing punctuation to the
// preceding word and opening brackets to the following one.
std::string detokenize(std::span<const std::string> tokens);

std::string join_tokens(std::span<const std::string> tokens, std::string_view sep = " ");

// Splits on runs of ASCII whitespace without any punctuation handling.
TokenSequence split_whitespace(std::string_view text);

// Keeps sequences whose length is at most max_len, preserving order.
std::vector<TokenSequence> filter_by_length(std::span<const TokenSequence> corpus, std::size_t max_len = 60);

// Splits a UTF-8 string into code points (invalid bytes become single units).
std::vector<std::string> utf8_chars(std::string_view word);

}  // namespace dnlg
