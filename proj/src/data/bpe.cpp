#include "dnlg/data/bpe.hpp"

#include <fstream>
#include <set>
#include <unordered_map>

#include "dnlg/data/tokenizer.hpp"
#include "dnlg/errors.hpp"
#include "dnlg/util/file_io.hpp"

namespace dnlg {

namespace {

std::vector<std::string> initial_symbols(const std::string& word) {
    auto symbols = utf8_chars(word);
    if (!symbols.empty()) symbols.back() += BpeModel::kEndOfWord;
    return symbols;
}

// Merges every non-overlapping occurrence of (left, right), left to right.
void merge_pair(std::vector<std::string>& symbols, const std::string& left, const std::string& right) {
    std::vector<std::string> out;
    out.reserve(symbols.size());
    for (std::size_t i = 0; i < symbols.size(); ++i) {
        if (i + 1 < symbols.size() && symbols[i] == left && symbols[i + 1] == right) {
            out.push_back(left + right);
            ++i;
        } else {
            out.push_back(std::move(symbols[i]));
        }
    }
    symbols = std::move(out);
}

bool ends_with(std::string_view s, std::string_view suffix) {
    return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

}  // namespace

BpeModel::BpeModel(std::vector<Merge> merges) : merges_(std::move(merges)) {
    for (std::size_t i = 0; i < merges_.size(); ++i) rank_.emplace(merges_[i], i);
}

std::vector<std::string> BpeModel::segment(const std::string& word) const {
    auto symbols = initial_symbols(word);
    while (symbols.size() > 1) {
        std::size_t best_rank = merges_.size();
        const Merge* best = nullptr;
        for (std::size_t i = 0; i + 1 < symbols.size(); ++i) {
            auto it = rank_.find(Merge{symbols[i], symbols[i + 1]});
            if (it != rank_.end() && it->second < best_rank) {
                best_rank = it->second;
                best = &it->first;
            }
        }
        if (!best) break;
        merge_pair(symbols, best->first, best->second);
    }
    if (!symbols.empty()) {
        auto& last = symbols.back();
        last.resize(last.size() - kEndOfWord.size());
        if (last.empty()) symbols.pop_back();
    }
    return symbols;
}

void BpeModel::save(const std::filesystem::path& path) const {
    std::string out(kFormatVersion);
    out += '\n';
    for (const auto& [a, b] : merges_) {
        out += a;
        out += ' ';
        out += b;
        out += '\n';
    }
    write_file_atomic(path, out);
}

BpeModel BpeModel::load(const std::filesystem::path& path) {
    auto lines = read_lines(path);
    if (lines.empty() || lines.front() != kFormatVersion)
        throw DataError(path.string() + ": not a BPE model (expected header '" + std::string(kFormatVersion) + "')");
    std::vector<Merge> merges;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (lines[i].empty()) continue;
        auto parts = split_whitespace(lines[i]);
        if (parts.size() != 2) throw DataError(path.string() + ":" + std::to_string(i + 1) + ": malformed merge");
        merges.emplace_back(std::move(parts[0]), std::move(parts[1]));
    }
    return BpeModel(std::move(merges));
}

BpeModel bpe_train(std::span<const TokenSequence> corpus, std::size_t num_merges) {
    if (corpus.empty()) throw ValidationError("bpe_train needs a non-empty corpus");

    std::map<std::string, long> word_freq;
    for (const auto& seq : corpus)
        for (const auto& tok : seq) ++word_freq[tok];

    std::vector<std::vector<std::string>> words;
    std::vector<long> freqs;
    for (const auto& [word, freq] : word_freq) {
        words.push_back(initial_symbols(word));
        freqs.push_back(freq);
    }

    using Pair = BpeModel::Merge;
    std::map<Pair, long> pair_counts;
    std::map<Pair, std::set<std::size_t>> where;

    auto add_word = [&](std::size_t w, long sign) {
        const auto& sym = words[w];
        for (std::size_t i = 0; i + 1 < sym.size(); ++i) {
            Pair p{sym[i], sym[i + 1]};
            auto& count = pair_counts[p];
            count += sign * freqs[w];
            if (count == 0) pair_counts.erase(p);
            if (sign > 0) where[p].insert(w);
        }
    };
    for (std::size_t w = 0; w < words.size(); ++w) add_word(w, +1);

    std::vector<Pair> merges;
    while (merges.size() < num_merges && !pair_counts.empty()) {
        auto best = pair_counts.begin();
        for (auto it = pair_counts.begin(); it != pair_counts.end(); ++it)
            if (it->second > best->second) best = it;
        const Pair chosen = best->first;
        merges.push_back(chosen);

        const auto affected = where[chosen];
        for (std::size_t w : affected) {
            add_word(w, -1);
            merge_pair(words[w], chosen.first, chosen.second);
            add_word(w, +1);
        }
        where.erase(chosen);
    }
    return BpeModel(std::move(merges));
}

TokenSequence bpe_apply(const BpeModel& model, const TokenSequence& seq) {
    TokenSequence out;
    for (const auto& word : seq) {
        auto pieces = model.segment(word);
        for (std::size_t i = 0; i < pieces.size(); ++i) {
            if (i + 1 < pieces.size()) pieces[i] += BpeModel::kContinuation;
            out.push_back(std::move(pieces[i]));
        }
    }
    return out;
}

std::vector<TokenSequence> bpe_apply(const BpeModel& model, std::span<const TokenSequence> corpus) {
    std::unordered_map<std::string, std::vector<std::string>> cache;
    std::vector<TokenSequence> out;
    out.reserve(corpus.size());
    for (const auto& seq : corpus) {
        TokenSequence pieces_out;
        for (const auto& word : seq) {
            auto it = cache.find(word);
            if (it == cache.end()) {
                auto pieces = model.segment(word);
                for (std::size_t i = 0; i + 1 < pieces.size(); ++i) pieces[i] += BpeModel::kContinuation;
                it = cache.emplace(word, std::move(pieces)).first;
            }
            pieces_out.insert(pieces_out.end(), it->second.begin(), it->second.end());
        }
        out.push_back(std::move(pieces_out));
    }
    return out;
}

TokenSequence bpe_decode(const TokenSequence& seq) {
    TokenSequence out;
    std::string pending;
    for (const auto& piece : seq) {
        if (ends_with(piece, BpeModel::kContinuation)) {
            pending.append(piece, 0, piece.size() - BpeModel::kContinuation.size());
        } else {
            pending += piece;
            out.push_back(std::move(pending));
            pending.clear();
        }
    }
    if (!pending.empty()) out.push_back(std::move(pending));
    return out;
}

}  // namespace dnlg
