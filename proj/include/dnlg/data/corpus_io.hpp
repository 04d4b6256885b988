#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "dnlg/data/types.hpp"

namespace dnlg {

// Raw text, one sentence per line; each line is tokenized. Blank lines skipped.
std::vector<TokenSequence> read_raw_corpus(const std::filesystem::path& path);

// Already-tokenized text (space separated), one sentence per line.
std::vector<TokenSequence> read_tokenized_corpus(const std::filesystem::path& path);
void write_tokenized_corpus(const std::filesystem::path& path, std::span<const TokenSequence> corpus);

// CSV with an `mr` column and an optional `ref` column. Rows sharing the
// same MR are grouped into one example (first-appearance order), each row
// contributing one tokenized reference. When the file has no `ref` column,
// examples carry no references.
std::vector<LabeledExample> read_labeled_csv(const std::filesystem::path& path);
std::vector<LabeledExample> parse_labeled_csv(const std::string& text, const std::string& origin = "<csv>");

// Reference groups separated by blank lines; one reference per line.
std::vector<std::vector<TokenSequence>> read_reference_groups(const std::filesystem::path& path);
void write_reference_groups(const std::filesystem::path& path, std::span<const LabeledExample> examples);

}  // namespace dnlg
