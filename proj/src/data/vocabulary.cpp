#include "dnlg/data/vocabulary.hpp"

#include <algorithm>
#include <map>

#include "dnlg/errors.hpp"
#include "dnlg/util/file_io.hpp"
#include "dnlg/util/seed.hpp"

namespace dnlg {

Vocabulary::Vocabulary() {
    for (auto tok : kReservedTokens) add(std::string(tok), 0);
}

void Vocabulary::add(std::string token, std::int64_t count) {
    const int id = static_cast<int>(tokens_.size());
    if (!index_.emplace(token, id).second) throw DataError("duplicate vocabulary token '" + token + "'");
    tokens_.push_back(std::move(token));
    counts_.push_back(count);
    total_ += count;
}

Vocabulary Vocabulary::build(std::span<const TokenSequence> corpus, std::optional<std::size_t> max_size) {
    std::map<std::string, std::int64_t> counts;
    for (const auto& seq : corpus)
        for (const auto& tok : seq) ++counts[tok];
    for (auto tok : kReservedTokens) counts.erase(std::string(tok));

    std::vector<std::pair<std::string, std::int64_t>> ranked(counts.begin(), counts.end());
    std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
    if (max_size && ranked.size() > *max_size) ranked.resize(*max_size);

    Vocabulary vocab;
    for (auto& [tok, count] : ranked) vocab.add(std::move(tok), count);
    return vocab;
}

int Vocabulary::id(std::string_view token) const {
    auto it = index_.find(std::string(token));
    return it == index_.end() ? kUnk : it->second;
}

bool Vocabulary::contains(std::string_view token) const { return index_.count(std::string(token)) != 0; }

const std::string& Vocabulary::token(int id) const {
    if (id < 0 || static_cast<std::size_t>(id) >= tokens_.size())
        throw ValidationError("vocabulary id " + std::to_string(id) + " out of range");
    return tokens_[static_cast<std::size_t>(id)];
}

std::int64_t Vocabulary::count(std::string_view token) const {
    auto it = index_.find(std::string(token));
    return it == index_.end() ? 0 : counts_[static_cast<std::size_t>(it->second)];
}

std::int64_t Vocabulary::count(int id) const {
    if (id < 0 || static_cast<std::size_t>(id) >= counts_.size()) return 0;
    return counts_[static_cast<std::size_t>(id)];
}

std::vector<int> Vocabulary::encode(std::span<const std::string> tokens) const {
    std::vector<int> ids;
    ids.reserve(tokens.size());
    for (const auto& tok : tokens) ids.push_back(id(tok));
    return ids;
}

TokenSequence Vocabulary::decode(std::span<const int> ids) const {
    TokenSequence out;
    for (int id : ids) {
        if (id == kPad || id == kBos || id == kEos) continue;
        out.push_back(token(id));
    }
    return out;
}

std::string Vocabulary::serialize() const {
    std::string out;
    for (std::size_t i = 0; i < tokens_.size(); ++i) {
        out += tokens_[i];
        out += '\t';
        out += std::to_string(counts_[i]);
        out += '\n';
    }
    return out;
}

std::uint64_t Vocabulary::content_hash() const { return fnv1a(serialize()); }

void Vocabulary::save(const std::filesystem::path& path) const { write_file_atomic(path, serialize()); }

Vocabulary Vocabulary::load(const std::filesystem::path& path) {
    const auto lines = read_lines(path);
    if (lines.size() < kNumReserved) throw DataError(path.string() + ": truncated vocabulary file");

    Vocabulary vocab;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const auto& line = lines[i];
        if (line.empty()) continue;
        const auto tab = line.find('\t');
        if (tab == std::string::npos || tab == 0)
            throw DataError(path.string() + ":" + std::to_string(i + 1) + ": expected token<TAB>count");
        std::string tok = line.substr(0, tab);
        std::int64_t count = 0;
        try {
            count = std::stoll(line.substr(tab + 1));
        } catch (const std::exception&) {
            throw DataError(path.string() + ":" + std::to_string(i + 1) + ": bad count");
        }
        if (count < 0) throw DataError(path.string() + ":" + std::to_string(i + 1) + ": negative count");
        if (i < kNumReserved) {
            if (tok != kReservedTokens[i])
                throw DataError(path.string() + ": reserved token '" + std::string(kReservedTokens[i]) +
                                "' expected on line " + std::to_string(i + 1));
            continue;
        }
        vocab.add(std::move(tok), count);
    }
    return vocab;
}

}  // namespace dnlg
