#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dnlg/corruption/corruption.hpp"
#include "dnlg/corruption/linearize.hpp"
#include "dnlg/data/bpe.hpp"
#include "dnlg/data/types.hpp"
#include "dnlg/data/vocabulary.hpp"
#include "dnlg/model/model.hpp"

namespace dnlg {

enum class TrainMode { kUnsupervised, kSupervised, kSemiSupervised };

TrainMode parse_train_mode(std::string_view name);
std::string_view to_string(TrainMode mode);

struct TrainConfig {
    double initial_lr = 0.5;
    int lr_halving_start_epoch = 5;
    int lr_halving_period = 2;
    int epochs = 1;
    int batch_size = 16;
    std::uint64_t seed = 0;
    double clip_norm = 5.0;  // <= 0 disables clipping
    TrainMode mode = TrainMode::kUnsupervised;
    CorruptionConfig corruption;
    LinearizeOptions linearize;
    // Cap on out-of-domain sentences drawn per epoch (a fresh subset each epoch).
    std::optional<std::size_t> ood_cap;
    int jobs = 1;

    // Sizes other than the vocabularies, which come from the data.
    int embed = 32;
    int hidden = 64;
    int attn_hidden = 0;
    int out_hidden = 0;
    bool tie_embeddings = false;

    // Per-epoch checkpoints and the training log go here when non-empty.
    std::filesystem::path checkpoint_dir;

    void validate() const;  // throws ConfigError
};

// Learning rate for a 1-based epoch: halved every `period` epochs, with the
// first halving at `start`:  initial * 2^-max(0, floor((epoch - start) / period) + 1).
double lr_schedule(const TrainConfig& config, int epoch);

// One training example. input_slots is non-empty only for split-embedding
// (supervised) inputs and then has one slot name per input token.
struct TrainingPair {
    TokenSequence input;
    std::vector<std::string> input_slots;
    TokenSequence target;

    bool operator==(const TrainingPair&) const = default;
};

// Corrupts every sentence afresh; the rng for sentence i is seeded from
// (global_seed, stream, epoch, i), so results do not depend on ordering.
std::vector<TrainingPair> make_epoch_corpus(std::span<const TokenSequence> unlabeled,
                                            const CorruptionConfig& corruption, int epoch,
                                            std::uint64_t global_seed, std::uint64_t stream = 0);

// Model input for an MR, target left empty. Non-supervised modes use the
// linearized form, which is also what unsupervised models see at inference.
TrainingPair labeled_input(const MeaningRepresentation& mr, TrainMode mode, const LinearizeOptions& linearize = {},
                           const BpeModel* bpe = nullptr);

// One pair per (MR, reference). Semi-supervised inputs are the linearized MR;
// supervised inputs keep each value word's slot name. With a BPE model both
// sides are segmented (slot names repeat across the pieces of a word).
std::vector<TrainingPair> make_labeled_pairs(std::span<const LabeledExample> labeled, TrainMode mode,
                                             const LinearizeOptions& linearize = {},
                                             const BpeModel* bpe = nullptr);

struct TrainStreams {
    std::vector<TokenSequence> in_domain;
    std::vector<TokenSequence> out_of_domain;
    std::vector<LabeledExample> labeled;
};

struct EpochStats {
    int epoch = 0;
    double lr = 0.0;
    double mean_loss = 0.0;  // nats per target token
    std::size_t examples = 0;
    std::size_t clipped_batches = 0;
};

struct TrainResult {
    ModelParams params;
    std::vector<EpochStats> trace;
};

struct TrainContext {
    const Vocabulary* vocab = nullptr;       // source and target words
    const Vocabulary* slot_vocab = nullptr;  // supervised mode only
    const BpeModel* bpe = nullptr;           // applied to every stream
    std::function<void(const EpochStats&)> on_epoch;
    std::map<std::string, std::string> metadata;  // added to every checkpoint
};

// Encodes a pair into model ids: target gets <s> ... </s>.
Source encode_source(const TrainingPair& pair, const Vocabulary& vocab, const Vocabulary* slot_vocab);
std::vector<int> encode_target(const TokenSequence& target, const Vocabulary& vocab);

Dims model_dims(const TrainConfig& config, const Vocabulary& vocab, const Vocabulary* slot_vocab);

// Builds the epoch's examples from every stream the mode uses, shuffled.
// Unlabeled sentences are word-level; with `bpe` they are segmented after
// corruption. labeled_pairs are used as given.
std::vector<TrainingPair> build_epoch(const TrainConfig& config, const TrainStreams& streams,
                                      std::span<const TrainingPair> labeled_pairs, int epoch,
                                      const BpeModel* bpe = nullptr);

// Plain SGD with the halving schedule and global-norm clipping. Starts from
// `initial` when given, otherwise from init_params. Throws DivergenceError
// on a non-finite batch loss.
TrainResult train(const TrainConfig& config, const TrainStreams& streams, const TrainContext& context,
                  std::optional<ModelParams> initial = std::nullopt);

// Token-weighted mean loss over pairs; used for dev-set checkpoint selection.
double corpus_loss(const ModelParams& params, std::span<const TrainingPair> pairs, const Vocabulary& vocab,
                   const Vocabulary* slot_vocab = nullptr);

}  // namespace dnlg
