#include "dnlg/training/training.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <thread>

#include "dnlg/corruption/linearize.hpp"
#include "dnlg/data/tokenizer.hpp"
#include "dnlg/errors.hpp"
#include "dnlg/model/checkpoint.hpp"
#include "dnlg/util/file_io.hpp"
#include "dnlg/util/seed.hpp"

namespace dnlg {

namespace {

constexpr std::uint64_t kInDomainStream = 1;
constexpr std::uint64_t kOutOfDomainStream = 2;

struct EncodedPair {
    Source source;
    std::vector<int> target;
};

std::string format_lr(double lr) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", lr);
    return buf;
}

std::string format_loss(double loss) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", loss);
    return buf;
}

// Gradient of the batch mean loss; returns the summed token-weighted loss.
double batch_gradient(const ModelParams& params, std::span<const EncodedPair> batch, ModelParams& grad,
                      std::vector<ModelParams>& partials, int jobs, double& token_loss) {
    const double weight = 1.0 / static_cast<double>(batch.size());
    const auto n_workers = static_cast<std::size_t>(std::clamp<int>(jobs, 1, static_cast<int>(batch.size())));

    std::vector<double> losses(batch.size());
    if (n_workers == 1) {
        for (std::size_t i = 0; i < batch.size(); ++i)
            losses[i] = accumulate_gradients(params, batch[i].source, batch[i].target, grad, weight);
    } else {
        partials.resize(n_workers);
        for (auto& p : partials) p = zeros_like(params);
        std::vector<std::thread> workers;
        const std::size_t chunk = (batch.size() + n_workers - 1) / n_workers;
        std::vector<std::exception_ptr> errors(n_workers);
        for (std::size_t w = 0; w < n_workers; ++w) {
            workers.emplace_back([&, w] {
                try {
                    for (std::size_t i = w * chunk; i < std::min(batch.size(), (w + 1) * chunk); ++i)
                        losses[i] =
                            accumulate_gradients(params, batch[i].source, batch[i].target, partials[w], weight);
                } catch (...) {
                    errors[w] = std::current_exception();
                }
            });
        }
        for (auto& t : workers) t.join();
        for (auto& e : errors)
            if (e) std::rethrow_exception(e);
        for (const auto& p : partials) axpy(grad, 1.0, p);
    }

    double mean = 0.0;
    token_loss = 0.0;
    for (std::size_t i = 0; i < batch.size(); ++i) {
        mean += losses[i] * weight;
        token_loss += losses[i] * static_cast<double>(batch[i].target.size() - 1);
    }
    return mean;
}

}  // namespace

TrainMode parse_train_mode(std::string_view name) {
    if (name == "unsupervised") return TrainMode::kUnsupervised;
    if (name == "supervised") return TrainMode::kSupervised;
    if (name == "semi_supervised" || name == "semi-supervised") return TrainMode::kSemiSupervised;
    throw ConfigError("unknown training mode '" + std::string(name) + "'");
}

std::string_view to_string(TrainMode mode) {
    switch (mode) {
        case TrainMode::kUnsupervised: return "unsupervised";
        case TrainMode::kSupervised: return "supervised";
        case TrainMode::kSemiSupervised: return "semi_supervised";
    }
    return "?";
}

void TrainConfig::validate() const {
    if (!(initial_lr > 0.0) || !std::isfinite(initial_lr)) throw ConfigError("initial learning rate must be positive");
    if (lr_halving_start_epoch < 1) throw ConfigError("lr halving must start at epoch 1 or later");
    if (lr_halving_period < 1) throw ConfigError("lr halving period must be at least 1");
    if (epochs < 0) throw ConfigError("epochs must be non-negative");
    if (batch_size < 1) throw ConfigError("batch size must be at least 1");
    if (jobs < 1) throw ConfigError("jobs must be at least 1");
    if (embed <= 0 || hidden <= 0 || attn_hidden < 0 || out_hidden < 0)
        throw ConfigError("layer sizes must be positive");
    if (mode == TrainMode::kSupervised && embed % 2 != 0)
        throw ConfigError("supervised mode splits embeddings in halves; embed must be even");
    if (mode != TrainMode::kSupervised) corruption.validate();
}

double lr_schedule(const TrainConfig& config, int epoch) {
    if (epoch < 1) throw ConfigError("epochs are numbered from 1");
    const int offset = epoch - config.lr_halving_start_epoch;
    // Floor division; offset may be negative.
    const int floor_div = offset >= 0 ? offset / config.lr_halving_period
                                      : -((-offset + config.lr_halving_period - 1) / config.lr_halving_period);
    const int halvings = std::max(0, floor_div + 1);
    return std::ldexp(config.initial_lr, -halvings);
}

std::vector<TrainingPair> make_epoch_corpus(std::span<const TokenSequence> unlabeled,
                                            const CorruptionConfig& corruption, int epoch,
                                            std::uint64_t global_seed, std::uint64_t stream) {
    std::vector<TrainingPair> pairs;
    pairs.reserve(unlabeled.size());
    const auto epoch_seed = derive_seed(derive_seed(global_seed, stream), static_cast<std::uint64_t>(epoch));
    for (std::size_t i = 0; i < unlabeled.size(); ++i) {
        Rng rng(derive_seed(epoch_seed, i));
        auto sample = corrupt(unlabeled[i], corruption, rng);
        pairs.push_back(TrainingPair{std::move(sample.corrupted), {}, std::move(sample.original)});
    }
    return pairs;
}

TrainingPair labeled_input(const MeaningRepresentation& mr, TrainMode mode, const LinearizeOptions& linearize,
                           const BpeModel* bpe) {
    TrainingPair pair;
    if (mode != TrainMode::kSupervised) {
        pair.input = linearize_mr(mr, linearize);
        if (bpe) pair.input = bpe_apply(*bpe, pair.input);
        return pair;
    }
    if (mr.slots.empty()) throw ValidationError("meaning representation has no slots");
    for (const auto& slot : mr.slots) {
        auto words = tokenize(slot.value);
        if (bpe) words = bpe_apply(*bpe, words);
        for (auto& w : words) {
            pair.input.push_back(std::move(w));
            pair.input_slots.push_back(slot.name);
        }
    }
    return pair;
}

std::vector<TrainingPair> make_labeled_pairs(std::span<const LabeledExample> labeled, TrainMode mode,
                                             const LinearizeOptions& linearize, const BpeModel* bpe) {
    if (mode == TrainMode::kUnsupervised) throw ConfigError("unsupervised training does not use labeled pairs");

    std::vector<TrainingPair> pairs;
    for (const auto& ex : labeled) {
        const TrainingPair base = labeled_input(ex.mr, mode, linearize, bpe);
        for (const auto& ref : ex.references) {
            TrainingPair pair = base;
            pair.target = bpe ? bpe_apply(*bpe, ref) : ref;
            pairs.push_back(std::move(pair));
        }
    }
    return pairs;
}

Source encode_source(const TrainingPair& pair, const Vocabulary& vocab, const Vocabulary* slot_vocab) {
    Source src(vocab.encode(pair.input));
    if (slot_vocab) {
        if (pair.input_slots.size() != pair.input.size())
            throw ValidationError("supervised input needs one slot name per token");
        for (const auto& slot : pair.input_slots) src.slots.push_back(slot_vocab->id(slot));
    }
    return src;
}

std::vector<int> encode_target(const TokenSequence& target, const Vocabulary& vocab) {
    std::vector<int> ids;
    ids.reserve(target.size() + 2);
    ids.push_back(Vocabulary::kBos);
    for (const auto& tok : target) ids.push_back(vocab.id(tok));
    ids.push_back(Vocabulary::kEos);
    return ids;
}

Dims model_dims(const TrainConfig& config, const Vocabulary& vocab, const Vocabulary* slot_vocab) {
    Dims d;
    d.vocab_src = static_cast<int>(vocab.size());
    d.vocab_tgt = static_cast<int>(vocab.size());
    d.embed = config.embed;
    d.hidden = config.hidden;
    d.attn_hidden = config.attn_hidden;
    d.out_hidden = config.out_hidden;
    d.tie_embeddings = config.tie_embeddings;
    if (config.mode == TrainMode::kSupervised) {
        if (!slot_vocab) throw ConfigError("supervised mode needs a slot-name vocabulary");
        d.split_embedding = true;
        d.vocab_slot = static_cast<int>(slot_vocab->size());
    }
    return d.resolved();
}

std::vector<TrainingPair> build_epoch(const TrainConfig& config, const TrainStreams& streams,
                                      std::span<const TrainingPair> labeled_pairs, int epoch, const BpeModel* bpe) {
    std::vector<TrainingPair> pairs;
    if (config.mode != TrainMode::kSupervised) {
        pairs = make_epoch_corpus(streams.in_domain, config.corruption, epoch, config.seed, kInDomainStream);

        std::span<const TokenSequence> ood = streams.out_of_domain;
        std::vector<TokenSequence> subset;
        if (config.ood_cap && *config.ood_cap < ood.size()) {
            std::vector<std::size_t> idx(ood.size());
            std::iota(idx.begin(), idx.end(), std::size_t{0});
            Rng rng(derive_seed(component_seed(config.seed, "ood-subset"), static_cast<std::uint64_t>(epoch)));
            std::shuffle(idx.begin(), idx.end(), rng);
            idx.resize(*config.ood_cap);
            std::sort(idx.begin(), idx.end());
            for (auto i : idx) subset.push_back(ood[i]);
            ood = subset;
        }
        auto ood_pairs = make_epoch_corpus(ood, config.corruption, epoch, config.seed, kOutOfDomainStream);
        pairs.insert(pairs.end(), std::make_move_iterator(ood_pairs.begin()), std::make_move_iterator(ood_pairs.end()));

        // Corruption works on words; segmentation comes after.
        if (bpe) {
            std::vector<TokenSequence> inputs, targets;
            for (auto& p : pairs) {
                inputs.push_back(std::move(p.input));
                targets.push_back(std::move(p.target));
            }
            inputs = bpe_apply(*bpe, inputs);
            targets = bpe_apply(*bpe, targets);
            for (std::size_t i = 0; i < pairs.size(); ++i) {
                pairs[i].input = std::move(inputs[i]);
                pairs[i].target = std::move(targets[i]);
            }
        }
    }
    pairs.insert(pairs.end(), labeled_pairs.begin(), labeled_pairs.end());

    Rng rng(derive_seed(component_seed(config.seed, "epoch-order"), static_cast<std::uint64_t>(epoch)));
    std::shuffle(pairs.begin(), pairs.end(), rng);
    return pairs;
}

TrainResult train(const TrainConfig& config, const TrainStreams& streams, const TrainContext& context,
                  std::optional<ModelParams> initial) {
    config.validate();
    if (!context.vocab) throw ConfigError("training needs a vocabulary");
    const Vocabulary& vocab = *context.vocab;
    const Vocabulary* slot_vocab = config.mode == TrainMode::kSupervised ? context.slot_vocab : nullptr;

    switch (config.mode) {
        case TrainMode::kUnsupervised:
            if (streams.in_domain.empty() && streams.out_of_domain.empty())
                throw ConfigError("unsupervised training needs an unlabeled corpus");
            break;
        case TrainMode::kSupervised:
            if (streams.labeled.empty()) throw ConfigError("supervised training needs labeled data");
            break;
        case TrainMode::kSemiSupervised:
            if (streams.labeled.empty() || (streams.in_domain.empty() && streams.out_of_domain.empty()))
                throw ConfigError("semi-supervised training needs labeled data and an unlabeled corpus");
            break;
    }

    const Dims dims = model_dims(config, vocab, slot_vocab);
    TrainResult result;
    if (initial) {
        if (!(initial->dims.resolved() == dims)) throw ConfigError("initial parameters do not match the model dims");
        result.params = std::move(*initial);
    } else {
        result.params = init_params(dims, component_seed(config.seed, "init"));
    }
    ModelParams& params = result.params;

    const auto labeled_pairs = config.mode == TrainMode::kUnsupervised
                                   ? std::vector<TrainingPair>{}
                                   : make_labeled_pairs(streams.labeled, config.mode, config.linearize, context.bpe);

    std::map<std::string, std::string> metadata{{"vocab_hash", hex64(vocab.content_hash())},
                                                {"mode", std::string(to_string(config.mode))}};
    if (slot_vocab) metadata["slot_vocab_hash"] = hex64(slot_vocab->content_hash());
    for (const auto& [k, v] : context.metadata) metadata.emplace(k, v);

    const bool write = !config.checkpoint_dir.empty();
    std::string log;
    if (write) std::filesystem::create_directories(config.checkpoint_dir);

    ModelParams grad = zeros_like(params);
    std::vector<ModelParams> partials;

    for (int epoch = 1; epoch <= config.epochs; ++epoch) {
        EpochStats stats;
        stats.epoch = epoch;
        stats.lr = lr_schedule(config, epoch);

        const auto pairs = build_epoch(config, streams, labeled_pairs, epoch, context.bpe);
        std::vector<EncodedPair> encoded;
        encoded.reserve(pairs.size());
        for (const auto& pair : pairs) {
            if (pair.input.empty() || pair.target.empty()) continue;
            encoded.push_back({encode_source(pair, vocab, slot_vocab), encode_target(pair.target, vocab)});
        }
        stats.examples = encoded.size();

        double epoch_loss = 0.0;
        std::size_t epoch_tokens = 0;
        const auto batch_size = static_cast<std::size_t>(config.batch_size);
        for (std::size_t start = 0, batch_index = 0; start < encoded.size(); start += batch_size, ++batch_index) {
            const std::span<const EncodedPair> batch(encoded.data() + start, std::min(batch_size, encoded.size() - start));
            scale(grad, 0.0);
            double token_loss = 0.0;
            const double loss = batch_gradient(params, batch, grad, partials, config.jobs, token_loss);
            if (!std::isfinite(loss))
                throw DivergenceError("non-finite loss in epoch " + std::to_string(epoch) + ", batch " +
                                      std::to_string(batch_index));

            if (config.clip_norm > 0.0) {
                const double norm = std::sqrt(squared_norm(grad));
                if (norm > config.clip_norm) {
                    scale(grad, config.clip_norm / norm);
                    ++stats.clipped_batches;
                }
            }
            axpy(params, -stats.lr, grad);

            epoch_loss += token_loss;
            for (const auto& ex : batch) epoch_tokens += ex.target.size() - 1;
        }
        stats.mean_loss = epoch_tokens ? epoch_loss / static_cast<double>(epoch_tokens) : 0.0;
        result.trace.push_back(stats);
        if (context.on_epoch) context.on_epoch(stats);

        if (write) {
            log += std::to_string(epoch) + "\t" + format_lr(stats.lr) + "\t" + format_loss(stats.mean_loss) + "\n";
            auto meta = metadata;
            meta["epoch"] = std::to_string(epoch);
            char name[32];
            std::snprintf(name, sizeof name, "epoch-%03d.ckpt", epoch);
            save_checkpoint(config.checkpoint_dir / name, Checkpoint{params, meta});
            write_file_atomic(config.checkpoint_dir / "train.log", log);
        }
    }

    if (write) {
        auto meta = metadata;
        meta["epoch"] = std::to_string(config.epochs);
        save_checkpoint(config.checkpoint_dir / "final.ckpt", Checkpoint{params, meta});
        if (config.epochs == 0) write_file_atomic(config.checkpoint_dir / "train.log", log);
    }
    return result;
}

double corpus_loss(const ModelParams& params, std::span<const TrainingPair> pairs, const Vocabulary& vocab,
                   const Vocabulary* slot_vocab) {
    double total = 0.0;
    std::size_t tokens = 0;
    for (const auto& pair : pairs) {
        if (pair.input.empty() || pair.target.empty()) continue;
        const auto tgt = encode_target(pair.target, vocab);
        total += forward_loss(params, encode_source(pair, vocab, slot_vocab), tgt) * static_cast<double>(tgt.size() - 1);
        tokens += tgt.size() - 1;
    }
    return tokens ? total / static_cast<double>(tokens) : 0.0;
}

}  // namespace dnlg
