#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "dnlg/model/gru.hpp"

namespace dnlg {

// Network sizes. attn_hidden / out_hidden of 0 mean "use the default"
// (hidden and embed respectively); see resolved().
struct Dims {
    int vocab_src = 0;
    int vocab_tgt = 0;
    int embed = 32;
    int hidden = 64;
    int attn_hidden = 0;
    int out_hidden = 0;
    // Split input embeddings: upper half from a slot-name table, lower half
    // from the word table. Needs an even embed and vocab_slot > 0.
    bool split_embedding = false;
    int vocab_slot = 0;
    // Decoder reuses the source embedding table.
    bool tie_embeddings = false;

    Dims resolved() const;
    void validate() const;  // throws ConfigError
    int source_word_dim() const { return split_embedding ? embed / 2 : embed; }

    bool operator==(const Dims&) const = default;
};

// All learnable tensors. Embedding tables store one column per token.
struct ModelParams {
    Dims dims;

    Matrix src_embed;   // source_word_dim x vocab_src
    Matrix slot_embed;  // embed/2 x vocab_slot (split mode only)
    Matrix tgt_embed;   // embed x vocab_tgt (empty when tied)

    GruParams enc_fwd;  // left-to-right encoder
    GruParams enc_bwd;  // right-to-left encoder
    GruParams dec_u;    // (s_{t-1}, emb(y_{t-1})) -> s'_t
    GruParams dec_q;    // (s'_t, H_t) -> s_t

    Matrix init_W;  // hidden x hidden, s_0 = tanh(init_W * <-h_1 + init_b)
    Vector init_b;

    // Attention scorer: v . tanh(attn_W_s s' + attn_W_h h_i + attn_b)
    Matrix attn_W_s;  // attn_hidden x hidden
    Matrix attn_W_h;  // attn_hidden x 2*hidden
    Vector attn_b;
    Vector attn_v;

    // Output net: softmax(proj_W tanh(out_W [s; emb(y_prev); H] + out_b) + proj_b)
    Matrix out_W;  // out_hidden x (hidden + embed + 2*hidden)
    Vector out_b;
    Matrix proj_W;  // vocab_tgt x out_hidden
    Vector proj_b;

    const Matrix& target_embedding() const { return dims.tie_embeddings ? src_embed : tgt_embed; }
    Matrix& target_embedding() { return dims.tie_embeddings ? src_embed : tgt_embed; }

    // Calls f(name, tensor) for every tensor in a fixed order.
    template <class F>
    void for_each_tensor(F&& f);
    template <class F>
    void for_each_tensor(F&& f) const;
};

// Same shapes as `like`, all zeros. Gradients use this layout.
ModelParams zeros_like(const ModelParams& like);

// Deterministic Glorot-uniform weights; biases zero.
ModelParams init_params(const Dims& dims, std::uint64_t seed);

bool all_finite(const ModelParams& p);
double squared_norm(const ModelParams& p);
void scale(ModelParams& p, double factor);
void axpy(ModelParams& y, double a, const ModelParams& x);  // y += a * x

// Encoder input: word ids, plus one slot-name id per word in split mode.
struct Source {
    std::vector<int> words;
    std::vector<int> slots;

    Source() = default;
    Source(std::vector<int> w) : words(std::move(w)) {}  // NOLINT(google-explicit-constructor)
    Source(std::vector<int> w, std::vector<int> s) : words(std::move(w)), slots(std::move(s)) {}

    std::size_t size() const noexcept { return words.size(); }
};

struct EncoderStates {
    // 2H x l. Column i is h_i = [<-h_i ; ->h_i].
    Matrix states;
    // attn_W_h * states, cached for attention.
    Matrix keys;

    Eigen::Index length() const { return states.cols(); }
};

struct Attention {
    Vector alpha;      // l weights summing to 1
    Vector context;    // H_t = [sum alpha_i <-h_i ; sum alpha_i ->h_i]
    Matrix activation; // tanh pre-scores, attn_hidden x l
};

struct DecoderStep {
    int y_prev = 0;
    Vector s_prev;
    Vector s_intermediate;  // s'_t
    Vector s;               // s_t
    Attention attention;
    Vector out_input;   // [s; emb(y_prev); H]
    Vector out_hidden;  // tanh layer of the output net
    Vector dist;        // p(y_t | ...)
    Vector log_dist;

    GruStep u_step;
    GruStep q_step;
};

// Input vector for a split-embedding model: [slot-name embedding ; word embedding].
Vector split_embedding_lookup(const ModelParams& params, int slot_id, int word_id);

EncoderStates encode(const ModelParams& params, const Source& src);
Vector initial_decoder_state(const ModelParams& params, const EncoderStates& enc);
Attention attend(const ModelParams& params, const Vector& s_intermediate, const EncoderStates& enc);
DecoderStep decode_step(const ModelParams& params, const Vector& s_prev, int y_prev, const EncoderStates& enc);

// Mean over target positions of -ln p(y*_t), teacher forced. `target` is
// wrapped: it starts with <s> and ends with </s>, so there are size()-1 predictions.
double forward_loss(const ModelParams& params, const Source& src, std::span<const int> target);

// Adds weight * dLoss/dParams into grad (shaped like params) and returns the loss.
double accumulate_gradients(const ModelParams& params, const Source& src, std::span<const int> target,
                            ModelParams& grad, double weight = 1.0);

struct Gradients {
    double loss = 0.0;
    ModelParams grad;
};

Gradients backward(const ModelParams& params, const Source& src, std::span<const int> target);

// ---------------------------------------------------------------------------

#define DNLG_MODEL_TENSORS(X) \
    X(src_embed)              \
    X(slot_embed)             \
    X(tgt_embed)              \
    X(enc_fwd.W)              \
    X(enc_fwd.U)              \
    X(enc_fwd.b)              \
    X(enc_bwd.W)              \
    X(enc_bwd.U)              \
    X(enc_bwd.b)              \
    X(dec_u.W)                \
    X(dec_u.U)                \
    X(dec_u.b)                \
    X(dec_q.W)                \
    X(dec_q.U)                \
    X(dec_q.b)                \
    X(init_W)                 \
    X(init_b)                 \
    X(attn_W_s)               \
    X(attn_W_h)               \
    X(attn_b)                 \
    X(attn_v)                 \
    X(out_W)                  \
    X(out_b)                  \
    X(proj_W)                 \
    X(proj_b)

template <class F>
void ModelParams::for_each_tensor(F&& f) {
#define DNLG_VISIT(member) f(std::string_view(#member), member);
    DNLG_MODEL_TENSORS(DNLG_VISIT)
#undef DNLG_VISIT
}

template <class F>
void ModelParams::for_each_tensor(F&& f) const {
#define DNLG_VISIT(member) f(std::string_view(#member), member);
    DNLG_MODEL_TENSORS(DNLG_VISIT)
#undef DNLG_VISIT
}

// Visits matching tensors of two parameter sets with identical layout.
template <class A, class B, class F>
void zip_tensors(A& a, B& b, F&& f) {
#define DNLG_VISIT(member) f(std::string_view(#member), a.member, b.member);
    DNLG_MODEL_TENSORS(DNLG_VISIT)
#undef DNLG_VISIT
}

}  // namespace dnlg
