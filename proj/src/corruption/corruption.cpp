#include "dnlg/corruption/corruption.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include "dnlg/errors.hpp"

namespace dnlg {

namespace {

void check_rate(double p) {
    if (!(p >= 0.0 && p <= 1.0)) throw ValidationError("deletion rate must lie in [0, 1]");
}

// Keeps the positions not selected for removal, in original order.
TokenSequence remove_positions(const TokenSequence& seq, std::vector<std::size_t> candidates, std::size_t k,
                               Rng& rng) {
    k = std::min(k, candidates.size());
    std::shuffle(candidates.begin(), candidates.end(), rng);
    std::vector<bool> removed(seq.size(), false);
    for (std::size_t i = 0; i < k; ++i) removed[candidates[i]] = true;

    TokenSequence out;
    out.reserve(seq.size() - k);
    for (std::size_t i = 0; i < seq.size(); ++i)
        if (!removed[i]) out.push_back(seq[i]);
    return out;
}

}  // namespace

void CorruptionConfig::validate() const {
    if (!(rate_clamp_low >= 0.0 && rate_clamp_low <= rate_clamp_high && rate_clamp_high <= 1.0))
        throw ConfigError("deletion-rate clamp must satisfy 0 <= low <= high <= 1");
    if (!(rate_mean >= rate_clamp_low && rate_mean <= rate_clamp_high))
        throw ConfigError("deletion-rate mean must lie within the clamp range");
    if (!(rate_variance >= 0.0) || !std::isfinite(rate_variance))
        throw ConfigError("deletion-rate variance must be finite and non-negative");
    if (count_threshold < 0) throw ConfigError("count threshold must be non-negative");
    if (enable_frequency_filter && !count_source)
        throw ConfigError("frequency-filtered corruption needs a count source");
}

std::size_t removal_count(double p, std::size_t n) {
    check_rate(p);
    // Tolerance absorbs products like 0.29 * 100 = 28.999999999999996.
    const auto k = static_cast<std::size_t>(std::floor(p * static_cast<double>(n) + 1e-9));
    return std::min(k, n);
}

double sample_deletion_rate(Rng& rng, const CorruptionConfig& config) {
    double p = config.rate_mean;
    if (config.rate_variance > 0.0) {
        std::normal_distribution<double> normal(config.rate_mean, std::sqrt(config.rate_variance));
        p = normal(rng);
    }
    return std::clamp(p, config.rate_clamp_low, config.rate_clamp_high);
}

TokenSequence corrupt_random(const TokenSequence& seq, double p, Rng& rng) {
    std::vector<std::size_t> all(seq.size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    return remove_positions(seq, std::move(all), removal_count(p, seq.size()), rng);
}

TokenSequence corrupt_frequency_filtered(const TokenSequence& seq, double p, const Vocabulary& counts,
                                         std::int64_t threshold, Rng& rng) {
    std::vector<std::size_t> eligible;
    for (std::size_t i = 0; i < seq.size(); ++i)
        if (counts.count(seq[i]) > threshold) eligible.push_back(i);
    return remove_positions(seq, std::move(eligible), removal_count(p, seq.size()), rng);
}

std::vector<TokenSequence> glue_bigram_units(const TokenSequence& corrupted, const TokenSequence& original) {
    std::set<std::pair<std::string_view, std::string_view>> bigrams;
    for (std::size_t i = 0; i + 1 < original.size(); ++i) bigrams.emplace(original[i], original[i + 1]);

    std::vector<TokenSequence> units;
    for (std::size_t i = 0; i < corrupted.size(); ++i) {
        if (i > 0 && bigrams.count({corrupted[i - 1], corrupted[i]}))
            units.back().push_back(corrupted[i]);
        else
            units.push_back({corrupted[i]});
    }
    return units;
}

TokenSequence shuffle_with_bigrams(const TokenSequence& corrupted, const TokenSequence& original, Rng& rng) {
    auto units = glue_bigram_units(corrupted, original);
    std::shuffle(units.begin(), units.end(), rng);
    TokenSequence out;
    out.reserve(corrupted.size());
    for (auto& unit : units)
        for (auto& tok : unit) out.push_back(std::move(tok));
    return out;
}

CorruptionSample corrupt(const TokenSequence& seq, const CorruptionConfig& config, Rng& rng) {
    if (seq.empty()) throw ValidationError("cannot corrupt an empty sequence");
    CorruptionSample sample;
    sample.original = seq;
    sample.sampled_rate = sample_deletion_rate(rng, config);
    if (config.enable_frequency_filter) {
        if (!config.count_source) throw ConfigError("frequency-filtered corruption needs a count source");
        sample.corrupted =
            corrupt_frequency_filtered(seq, sample.sampled_rate, *config.count_source, config.count_threshold, rng);
    } else {
        sample.corrupted = corrupt_random(seq, sample.sampled_rate, rng);
    }
    if (config.enable_shuffle) sample.corrupted = shuffle_with_bigrams(sample.corrupted, seq, rng);
    return sample;
}

}  // namespace dnlg
