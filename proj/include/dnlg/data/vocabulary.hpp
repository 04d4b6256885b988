#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "dnlg/data/types.hpp"

namespace dnlg {

// Token <-> dense id mapping with exact corpus counts.
//
// Ids 0..3 are reserved: <pad>, <unk>, <s>, </s> (count 0). Corpus tokens
// follow in rank order: descending count, ties broken lexicographically.
class Vocabulary {
public:
    static constexpr int kPad = 0;
    static constexpr int kUnk = 1;
    static constexpr int kBos = 2;
    static constexpr int kEos = 3;
    static constexpr int kNumReserved = 4;
    static constexpr std::array<std::string_view, kNumReserved> kReservedTokens{"<pad>", "<unk>", "<s>", "</s>"};

    Vocabulary();

    // Counts every token; with max_size, keeps only that many corpus tokens
    // (reserved ids are not counted against the limit).
    static Vocabulary build(std::span<const TokenSequence> corpus, std::optional<std::size_t> max_size = std::nullopt);

    std::size_t size() const noexcept { return tokens_.size(); }

    int id(std::string_view token) const;  // kUnk when absent
    bool contains(std::string_view token) const;
    const std::string& token(int id) const;

    // Exact corpus frequency N(v); 0 for reserved and unknown tokens.
    std::int64_t count(std::string_view token) const;
    std::int64_t count(int id) const;
    std::int64_t total_count() const noexcept { return total_; }

    std::vector<int> encode(std::span<const std::string> tokens) const;
    TokenSequence decode(std::span<const int> ids) const;  // drops reserved ids

    std::string serialize() const;
    std::uint64_t content_hash() const;
    void save(const std::filesystem::path& path) const;
    static Vocabulary load(const std::filesystem::path& path);

private:
    void add(std::string token, std::int64_t count);

    std::vector<std::string> tokens_;
    std::vector<std::int64_t> counts_;
    std::unordered_map<std::string, int> index_;
    std::int64_t total_ = 0;
};

}  // namespace dnlg
