#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>

#include "dnlg/data/types.hpp"
#include "dnlg/data/vocabulary.hpp"
#include "dnlg/util/seed.hpp"

namespace dnlg {

struct CorruptionConfig {
    double rate_mean = 0.6;
    double rate_variance = 0.1;  // variance, not standard deviation
    double rate_clamp_low = 0.05;
    double rate_clamp_high = 0.95;
    std::int64_t count_threshold = 100;
    // Word counts N(v) that decide which tokens may be deleted. May come from
    // the training corpus itself or from a different (out-of-domain) corpus.
    std::shared_ptr<const Vocabulary> count_source;
    bool enable_frequency_filter = true;
    bool enable_shuffle = true;
    std::uint64_t seed = 0;

    // Throws ConfigError on an invalid combination.
    void validate() const;
};

struct CorruptionSample {
    TokenSequence original;
    TokenSequence corrupted;
    double sampled_rate = 0.0;
};

// Number of tokens removed from an n-token sentence at deletion rate p: floor(p*n).
std::size_t removal_count(double p, std::size_t n);

// Normal(mean, variance) draw clamped into [low, high].
double sample_deletion_rate(Rng& rng, const CorruptionConfig& config);

// Removes floor(p*n) uniformly chosen positions; survivors keep their order.
TokenSequence corrupt_random(const TokenSequence& seq, double p, Rng& rng);

// Like corrupt_random, but only tokens whose count is strictly above the
// threshold may be removed. With too few eligible positions, all of them go.
TokenSequence corrupt_frequency_filtered(const TokenSequence& seq, double p, const Vocabulary& counts,
                                         std::int64_t threshold, Rng& rng);

// Glues adjacent corrupted tokens that also form a bigram of the original,
// shuffles the glued units uniformly, and flattens them back.
TokenSequence shuffle_with_bigrams(const TokenSequence& corrupted, const TokenSequence& original, Rng& rng);

// The glued units shuffle_with_bigrams would permute.
std::vector<TokenSequence> glue_bigram_units(const TokenSequence& corrupted, const TokenSequence& original);

// Rate sampling, deletion (random or frequency-filtered), optional shuffle.
CorruptionSample corrupt(const TokenSequence& seq, const CorruptionConfig& config, Rng& rng);

}  // namespace dnlg
