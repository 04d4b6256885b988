#include "dnlg/data/corpus_io.hpp"

#include <unordered_map>

#include "dnlg/data/csv.hpp"
#include "dnlg/data/mr.hpp"
#include "dnlg/data/tokenizer.hpp"
#include "dnlg/errors.hpp"
#include "dnlg/util/file_io.hpp"

namespace dnlg {

std::vector<TokenSequence> read_raw_corpus(const std::filesystem::path& path) {
    std::vector<TokenSequence> corpus;
    for (const auto& line : read_lines(path)) {
        auto toks = tokenize(line);
        if (!toks.empty()) corpus.push_back(std::move(toks));
    }
    return corpus;
}

std::vector<TokenSequence> read_tokenized_corpus(const std::filesystem::path& path) {
    std::vector<TokenSequence> corpus;
    for (const auto& line : read_lines(path)) {
        auto toks = split_whitespace(line);
        if (!toks.empty()) corpus.push_back(std::move(toks));
    }
    return corpus;
}

void write_tokenized_corpus(const std::filesystem::path& path, std::span<const TokenSequence> corpus) {
    std::string out;
    for (const auto& seq : corpus) {
        out += join_tokens(seq);
        out += '\n';
    }
    write_file_atomic(path, out);
}

std::vector<LabeledExample> parse_labeled_csv(const std::string& text, const std::string& origin) {
    std::vector<CsvRow> rows;
    try {
        rows = parse_csv(text);
    } catch (const ParseError& e) {
        throw DataError(origin + ": " + e.what());
    }
    if (rows.empty()) throw DataError(origin + ": empty CSV (expected header with an 'mr' column)");

    const auto& header = rows.front();
    int mr_col = -1;
    int ref_col = -1;
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == "mr") mr_col = static_cast<int>(i);
        if (header[i] == "ref") ref_col = static_cast<int>(i);
    }
    if (mr_col < 0) throw DataError(origin + ": CSV header has no 'mr' column");

    std::vector<LabeledExample> examples;
    std::unordered_map<std::string, std::size_t> by_mr;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        const auto where = origin + ": row " + std::to_string(r + 1);
        if (row.size() <= static_cast<std::size_t>(std::max(mr_col, ref_col)))
            throw DataError(where + ": expected " + std::to_string(header.size()) + " fields");

        MeaningRepresentation mr;
        try {
            mr = parse_mr(row[static_cast<std::size_t>(mr_col)]);
        } catch (const std::exception& e) {
            throw DataError(where + ": " + e.what());
        }
        const auto key = format_mr(mr);
        auto [it, inserted] = by_mr.emplace(key, examples.size());
        if (inserted) examples.push_back(LabeledExample{std::move(mr), {}});
        if (ref_col >= 0) {
            auto ref = tokenize(row[static_cast<std::size_t>(ref_col)]);
            if (ref.empty()) throw DataError(where + ": empty reference");
            examples[it->second].references.push_back(std::move(ref));
        }
    }
    return examples;
}

std::vector<LabeledExample> read_labeled_csv(const std::filesystem::path& path) {
    return parse_labeled_csv(read_file(path), path.string());
}

std::vector<std::vector<TokenSequence>> read_reference_groups(const std::filesystem::path& path) {
    std::vector<std::vector<TokenSequence>> groups;
    std::vector<TokenSequence> current;
    for (const auto& line : read_lines(path)) {
        auto toks = split_whitespace(line);
        if (toks.empty()) {
            if (!current.empty()) groups.push_back(std::move(current));
            current.clear();
        } else {
            current.push_back(std::move(toks));
        }
    }
    if (!current.empty()) groups.push_back(std::move(current));
    return groups;
}

void write_reference_groups(const std::filesystem::path& path, std::span<const LabeledExample> examples) {
    std::string out;
    for (std::size_t i = 0; i < examples.size(); ++i) {
        if (i) out += '\n';
        for (const auto& ref : examples[i].references) {
            out += join_tokens(ref);
            out += '\n';
        }
    }
    write_file_atomic(path, out);
}

}  // namespace dnlg
