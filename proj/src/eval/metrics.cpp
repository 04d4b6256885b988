#include "dnlg/eval/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "dnlg/data/tokenizer.hpp"
#include "dnlg/errors.hpp"

namespace dnlg {

namespace {

using Ngram = std::vector<std::string>;
using NgramCounts = std::map<Ngram, std::int64_t>;

NgramCounts count_ngrams(const TokenSequence& seq, int n) {
    NgramCounts counts;
    const auto len = static_cast<std::ptrdiff_t>(seq.size());
    for (std::ptrdiff_t i = 0; i + n <= len; ++i) ++counts[Ngram(seq.begin() + i, seq.begin() + i + n)];
    return counts;
}

// Per n-gram, the largest count in any one reference.
NgramCounts max_ref_counts(const std::vector<TokenSequence>& refs, int n) {
    NgramCounts out;
    for (const auto& ref : refs)
        for (const auto& [g, c] : count_ngrams(ref, n)) out[g] = std::max(out[g], c);
    return out;
}

std::int64_t closest_ref_length(const EvalInstance& inst) {
    const auto hyp = static_cast<std::int64_t>(inst.hypothesis.size());
    std::int64_t best = -1;
    for (const auto& ref : inst.references) {
        const auto len = static_cast<std::int64_t>(ref.size());
        if (best < 0 || std::llabs(len - hyp) < std::llabs(best - hyp) ||
            (std::llabs(len - hyp) == std::llabs(best - hyp) && len < best))
            best = len;
    }
    return best;
}

void clipped_counts(const EvalInstance& inst, int max_n, std::vector<std::int64_t>& matches,
                    std::vector<std::int64_t>& totals) {
    for (int n = 1; n <= max_n; ++n) {
        const auto ref = max_ref_counts(inst.references, n);
        for (const auto& [g, c] : count_ngrams(inst.hypothesis, n)) {
            totals[n - 1] += c;
            auto it = ref.find(g);
            if (it != ref.end()) matches[n - 1] += std::min(c, it->second);
        }
    }
}

}  // namespace

void check_instances(std::span<const EvalInstance> instances) {
    if (instances.empty()) throw ValidationError("no instances to score");
    for (const auto& inst : instances)
        if (inst.references.empty()) throw ValidationError("every instance needs at least one reference");
}

BleuStats bleu_stats(std::span<const EvalInstance> instances, int max_n) {
    check_instances(instances);
    if (max_n < 1) throw ConfigError("max n-gram order must be at least 1");
    BleuStats s;
    s.max_n = max_n;
    s.matches.assign(static_cast<std::size_t>(max_n), 0);
    s.totals.assign(static_cast<std::size_t>(max_n), 0);
    for (const auto& inst : instances) {
        s.hyp_length += static_cast<std::int64_t>(inst.hypothesis.size());
        s.ref_length += closest_ref_length(inst);
        clipped_counts(inst, max_n, s.matches, s.totals);
    }

    if (s.hyp_length == 0) return s;
    s.brevity_penalty = s.hyp_length >= s.ref_length
                            ? 1.0
                            : std::exp(1.0 - static_cast<double>(s.ref_length) / static_cast<double>(s.hyp_length));
    double log_sum = 0.0;
    int orders = 0;
    for (int n = 0; n < max_n; ++n) {
        if (s.totals[n] == 0) continue;
        if (s.matches[n] == 0) return s;
        log_sum += std::log(static_cast<double>(s.matches[n]) / static_cast<double>(s.totals[n]));
        ++orders;
    }
    s.score = s.brevity_penalty * std::exp(log_sum / orders);
    return s;
}

double bleu(std::span<const EvalInstance> instances, int max_n) { return bleu_stats(instances, max_n).score; }

double sentence_bleu(const EvalInstance& instance, int max_n) {
    check_instances(std::span(&instance, 1));
    const auto hyp_len = static_cast<double>(instance.hypothesis.size());
    if (hyp_len == 0) return 0.0;
    std::vector<std::int64_t> matches(static_cast<std::size_t>(max_n), 0), totals(static_cast<std::size_t>(max_n), 0);
    clipped_counts(instance, max_n, matches, totals);
    if (matches[0] == 0) return 0.0;
    double log_sum = 0.0;
    int orders = 0;
    for (int n = 0; n < max_n; ++n) {
        if (totals[n] == 0) continue;
        const double smooth = n == 0 ? 0.0 : 1.0;
        log_sum += std::log((static_cast<double>(matches[n]) + smooth) / (static_cast<double>(totals[n]) + smooth));
        ++orders;
    }
    const auto ref_len = static_cast<double>(closest_ref_length(instance));
    const double bp = hyp_len >= ref_len ? 1.0 : std::exp(1.0 - ref_len / hyp_len);
    return bp * std::exp(log_sum / orders);
}

std::size_t lcs_length(std::span<const std::string> a, std::span<const std::string> b) {
    std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
    for (std::size_t i = 1; i <= a.size(); ++i) {
        for (std::size_t j = 1; j <= b.size(); ++j)
            cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

double rouge_l(const EvalInstance& instance) {
    check_instances(std::span(&instance, 1));
    double best = 0.0;
    for (const auto& ref : instance.references) {
        const auto lcs = static_cast<double>(lcs_length(instance.hypothesis, ref));
        if (lcs == 0) continue;
        const double p = lcs / static_cast<double>(instance.hypothesis.size());
        const double r = lcs / static_cast<double>(ref.size());
        best = std::max(best, 2 * p * r / (p + r));
    }
    return best;
}

double rouge_l(std::span<const EvalInstance> instances) {
    check_instances(instances);
    double sum = 0.0;
    for (const auto& inst : instances) sum += rouge_l(inst);
    return sum / static_cast<double>(instances.size());
}

double nist_beta() {
    const double l = std::log(1.5);
    return std::log(0.5) / (l * l);
}

NistStats nist_stats(std::span<const EvalInstance> instances, int max_n) {
    check_instances(instances);
    if (max_n < 1) throw ConfigError("max n-gram order must be at least 1");
    NistStats s;
    s.max_n = max_n;
    s.info.assign(static_cast<std::size_t>(max_n), 0.0);
    s.totals.assign(static_cast<std::size_t>(max_n), 0);

    // Reference statistics over every reference of every instance.
    std::vector<NgramCounts> ref_counts(static_cast<std::size_t>(max_n));
    std::int64_t ref_words = 0;
    for (const auto& inst : instances) {
        double len = 0.0;
        for (const auto& ref : inst.references) {
            ref_words += static_cast<std::int64_t>(ref.size());
            len += static_cast<double>(ref.size());
            for (int n = 1; n <= max_n; ++n)
                for (const auto& [g, c] : count_ngrams(ref, n)) ref_counts[n - 1][g] += c;
        }
        s.ref_length += len / static_cast<double>(inst.references.size());
    }
    auto information = [&](const Ngram& g) {
        const auto n = g.size();
        const double count = static_cast<double>(ref_counts[n - 1].at(g));
        const double prefix = n == 1 ? static_cast<double>(ref_words)
                                     : static_cast<double>(ref_counts[n - 2].at(Ngram(g.begin(), g.end() - 1)));
        return std::log2(prefix / count);
    };

    for (const auto& inst : instances) {
        s.hyp_length += static_cast<std::int64_t>(inst.hypothesis.size());
        for (int n = 1; n <= max_n; ++n) {
            const auto ref = max_ref_counts(inst.references, n);
            for (const auto& [g, c] : count_ngrams(inst.hypothesis, n)) {
                s.totals[n - 1] += c;
                auto it = ref.find(g);
                if (it != ref.end()) s.info[n - 1] += information(g) * static_cast<double>(std::min(c, it->second));
            }
        }
    }

    if (s.hyp_length == 0 || s.ref_length == 0) return s;
    const double ratio = std::min(1.0, static_cast<double>(s.hyp_length) / s.ref_length);
    const double log_ratio = std::log(ratio);
    s.brevity_penalty = std::exp(nist_beta() * log_ratio * log_ratio);
    double sum = 0.0;
    for (int n = 0; n < max_n; ++n)
        if (s.totals[n] > 0) sum += s.info[n] / static_cast<double>(s.totals[n]);
    s.score = sum * s.brevity_penalty;
    return s;
}

double nist(std::span<const EvalInstance> instances, int max_n) { return nist_stats(instances, max_n).score; }

ScoreReport score(std::span<const EvalInstance> instances) {
    ScoreReport r;
    r.bleu_detail = bleu_stats(instances);
    r.nist_detail = nist_stats(instances);
    r.bleu = r.bleu_detail.score;
    r.nist = r.nist_detail.score;
    r.rouge_l = rouge_l(instances);
    r.instances = instances.size();
    for (const auto& inst : instances) r.references += inst.references.size();
    return r;
}

std::vector<std::string> copy_input_baseline(std::span<const MeaningRepresentation> mrs,
                                             const LinearizeOptions& options) {
    if (mrs.empty()) throw ValidationError("no meaning representations");
    std::vector<std::string> out;
    out.reserve(mrs.size());
    for (const auto& mr : mrs) out.push_back(detokenize(linearize_mr(mr, options)));
    return out;
}

}  // namespace dnlg
