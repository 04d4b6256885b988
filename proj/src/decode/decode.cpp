#include "dnlg/decode/decode.hpp"

#include "dnlg/data/tokenizer.hpp"
#include "dnlg/errors.hpp"
#include "dnlg/training/training.hpp"

namespace dnlg {

namespace {

auto network_step(const ModelParams& params, const EncoderStates& enc) {
    return [&params, &enc](const Vector& s_prev, int y_prev) {
        auto step = decode_step(params, s_prev, y_prev, enc);
        return std::pair<Vector, Vector>(std::move(step.s), std::move(step.log_dist));
    };
}

void check_source(const ModelParams& params, const Source& src) {
    if (src.words.empty()) throw ValidationError("cannot decode an empty source");
    if (!params.dims.split_embedding && !src.slots.empty())
        throw ValidationError("slot-tagged source given to a model without split embeddings");
}

const GenerateContext& checked(const GenerateContext& ctx) {
    if (!ctx.params || !ctx.vocab) throw ConfigError("generation needs parameters and a vocabulary");
    return ctx;
}

std::vector<Generation> run(const GenerateContext& ctx, const Source& src, const DecodeConfig& config,
                            std::size_t nbest) {
    const auto hyps = beam_search(*ctx.params, src, config, nbest);
    std::vector<Generation> out;
    for (const auto& h : hyps)
        out.push_back(Generation{render(ctx, h.tokens), hypothesis_score(h, config.length_normalization), h.finished});
    return out;
}

}  // namespace

void DecodeConfig::validate() const {
    if (beam_size < 1) throw ConfigError("beam size must be at least 1");
    if (max_len < 1) throw ConfigError("max length must be at least 1");
}

double hypothesis_score(const Hypothesis& h, bool length_normalization) {
    if (!length_normalization || h.tokens.empty()) return h.log_prob;
    return h.log_prob / static_cast<double>(h.tokens.size());
}

Hypothesis greedy(const ModelParams& params, const Source& src, int max_len) {
    check_source(params, src);
    if (max_len < 1) throw ConfigError("max length must be at least 1");
    const auto enc = encode(params, src);
    return greedy_search(initial_decoder_state(params, enc), network_step(params, enc), max_len);
}

std::vector<Hypothesis> beam_search(const ModelParams& params, const Source& src, const DecodeConfig& config,
                                    std::size_t nbest) {
    config.validate();
    check_source(params, src);
    if (nbest < 1 || nbest > static_cast<std::size_t>(config.beam_size))
        throw ConfigError("n-best size must be between 1 and the beam size");
    const auto enc = encode(params, src);
    return beam_search_with(initial_decoder_state(params, enc), network_step(params, enc), config, nbest);
}

TokenSequence generation_input(const GenerateContext& ctx, const MeaningRepresentation& mr) {
    const auto mode = ctx.slot_vocab ? TrainMode::kSupervised : TrainMode::kSemiSupervised;
    return labeled_input(mr, mode, ctx.linearize, ctx.bpe).input;
}

std::string render(const GenerateContext& ctx, const std::vector<int>& ids) {
    auto words = checked(ctx).vocab->decode(ids);
    if (ctx.bpe) words = bpe_decode(words);
    return detokenize(words);
}

std::vector<Generation> generate_nbest(const GenerateContext& ctx, const MeaningRepresentation& mr,
                                       const DecodeConfig& config, std::size_t nbest) {
    checked(ctx);
    const auto mode = ctx.slot_vocab ? TrainMode::kSupervised : TrainMode::kSemiSupervised;
    const auto pair = labeled_input(mr, mode, ctx.linearize, ctx.bpe);
    return run(ctx, encode_source(pair, *ctx.vocab, ctx.slot_vocab), config, nbest);
}

std::string generate(const GenerateContext& ctx, const MeaningRepresentation& mr, const DecodeConfig& config) {
    return generate_nbest(ctx, mr, config, 1).front().text;
}

std::vector<Generation> generate_from_tokens(const GenerateContext& ctx, const TokenSequence& input,
                                             const DecodeConfig& config, std::size_t nbest) {
    checked(ctx);
    TrainingPair pair;
    pair.input = ctx.bpe ? bpe_apply(*ctx.bpe, input) : input;
    return run(ctx, encode_source(pair, *ctx.vocab, nullptr), config, nbest);
}

}  // namespace dnlg
