#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dnlg/data/types.hpp"

namespace dnlg {

// Subword model learned with greedy pair merges. Words are split into UTF-8
// characters with kEndOfWord appended to the last one; merges are applied by
// rank. Applied output marks every non-final piece with kContinuation.
class BpeModel {
public:
    static constexpr std::string_view kEndOfWord = "</w>";
    static constexpr std::string_view kContinuation = "@@";
    static constexpr std::string_view kFormatVersion = "dnlg-bpe v1";

    using Merge = std::pair<std::string, std::string>;

    BpeModel() = default;
    explicit BpeModel(std::vector<Merge> merges);

    const std::vector<Merge>& merges() const noexcept { return merges_; }

    // Pieces for one word, without continuation markers.
    std::vector<std::string> segment(const std::string& word) const;

    void save(const std::filesystem::path& path) const;
    static BpeModel load(const std::filesystem::path& path);

private:
    std::vector<Merge> merges_;
    std::map<Merge, std::size_t> rank_;
};

// Highest-frequency pair first; ties go to the lexicographically smallest pair.
BpeModel bpe_train(std::span<const TokenSequence> corpus, std::size_t num_merges);

TokenSequence bpe_apply(const BpeModel& model, const TokenSequence& seq);
std::vector<TokenSequence> bpe_apply(const BpeModel& model, std::span<const TokenSequence> corpus);

// Rejoins pieces marked with the continuation suffix.
TokenSequence bpe_decode(const TokenSequence& seq);

}  // namespace dnlg
