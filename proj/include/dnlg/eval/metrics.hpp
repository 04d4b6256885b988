#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dnlg/corruption/linearize.hpp"
#include "dnlg/data/types.hpp"

namespace dnlg {

struct EvalInstance {
    TokenSequence hypothesis;
    std::vector<TokenSequence> references;  // at least one
};

struct BleuStats {
    int max_n = 4;
    std::vector<std::int64_t> matches;  // clipped, per order
    std::vector<std::int64_t> totals;   // hypothesis n-grams, per order
    std::int64_t hyp_length = 0;
    std::int64_t ref_length = 0;  // closest reference lengths, summed
    double brevity_penalty = 0.0;
    double score = 0.0;
};

// Corpus BLEU without smoothing. Orders for which the hypotheses contain no
// n-grams at all are left out of the geometric mean.
BleuStats bleu_stats(std::span<const EvalInstance> instances, int max_n = 4);
double bleu(std::span<const EvalInstance> instances, int max_n = 4);

// Single-instance BLEU with add-one smoothing on orders above 1. Not the
// same statistic as corpus BLEU; used for paired significance tests.
double sentence_bleu(const EvalInstance& instance, int max_n = 4);

std::size_t lcs_length(std::span<const std::string> a, std::span<const std::string> b);

// ROUGE-L F1, max over references.
double rouge_l(const EvalInstance& instance);
// Mean of the per-instance scores.
double rouge_l(std::span<const EvalInstance> instances);

struct NistStats {
    int max_n = 5;
    std::vector<double> info;             // information of matched n-grams, per order
    std::vector<std::int64_t> totals;     // hypothesis n-grams, per order
    std::int64_t hyp_length = 0;
    double ref_length = 0.0;  // average reference lengths, summed
    double brevity_penalty = 0.0;
    double score = 0.0;
};

// beta with a penalty of 0.5 at a 2/3 length ratio.
double nist_beta();

NistStats nist_stats(std::span<const EvalInstance> instances, int max_n = 5);
double nist(std::span<const EvalInstance> instances, int max_n = 5);

struct ScoreReport {
    double bleu = 0.0;     // [0,1]
    double rouge_l = 0.0;  // [0,1]
    double nist = 0.0;
    std::size_t instances = 0;
    std::size_t references = 0;
    BleuStats bleu_detail;
    NistStats nist_detail;
};

ScoreReport score(std::span<const EvalInstance> instances);

// Throws ValidationError on an empty list or an instance without references.
void check_instances(std::span<const EvalInstance> instances);

// The linearized MR joined as text.
std::vector<std::string> copy_input_baseline(std::span<const MeaningRepresentation> mrs,
                                             const LinearizeOptions& options = {});

}  // namespace dnlg
