#include "dnlg/model/model.hpp"

#include <cmath>
#include <random>
#include <string>

#include "dnlg/errors.hpp"
#include "dnlg/util/seed.hpp"

namespace dnlg {

namespace {

void fill_uniform(Eigen::Ref<Matrix> m, Rng& rng) {
    if (m.size() == 0) return;
    const double limit = std::sqrt(6.0 / static_cast<double>(m.rows() + m.cols()));
    std::uniform_real_distribution<double> dist(-limit, limit);
    for (Eigen::Index j = 0; j < m.cols(); ++j)
        for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = dist(rng);
}

GruParams make_gru(Eigen::Index input, Eigen::Index hidden, Rng& rng) {
    GruParams g;
    g.W = Matrix::Zero(3 * hidden, input);
    g.U = Matrix::Zero(3 * hidden, hidden);
    g.b = Vector::Zero(3 * hidden);
    for (int gate = 0; gate < 3; ++gate) {
        fill_uniform(g.W.middleRows(gate * hidden, hidden), rng);
        fill_uniform(g.U.middleRows(gate * hidden, hidden), rng);
    }
    return g;
}

Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
    Matrix m(rows, cols);
    fill_uniform(m, rng);
    return m;
}

Vector log_softmax(const Vector& logits) {
    const double max = logits.maxCoeff();
    const double lse = max + std::log((logits.array() - max).exp().sum());
    return (logits.array() - lse).matrix();
}

void check_source(const ModelParams& params, const Source& src) {
    const auto& d = params.dims;
    if (src.words.empty()) throw ValidationError("encoder input must be non-empty");
    for (int w : src.words)
        if (w < 0 || w >= d.vocab_src) throw ValidationError("source id " + std::to_string(w) + " out of range");
    if (d.split_embedding) {
        if (src.slots.size() != src.words.size())
            throw ValidationError("split-embedding input needs one slot id per word");
        for (int s : src.slots)
            if (s < 0 || s >= d.vocab_slot) throw ValidationError("slot id " + std::to_string(s) + " out of range");
    } else if (!src.slots.empty()) {
        throw ValidationError("slot ids given to a model without split embeddings");
    }
}

void check_target(const ModelParams& params, std::span<const int> target) {
    if (target.size() < 2) throw ValidationError("target must contain at least <s> and one predicted token");
    for (int y : target)
        if (y < 0 || y >= params.dims.vocab_tgt)
            throw ValidationError("target id " + std::to_string(y) + " out of range");
}

Vector source_input(const ModelParams& params, const Source& src, std::size_t i) {
    if (params.dims.split_embedding) return split_embedding_lookup(params, src.slots[i], src.words[i]);
    return params.src_embed.col(src.words[i]);
}

struct EncoderTrace {
    std::vector<GruStep> fwd;  // fwd[i] produced ->h_i
    std::vector<GruStep> bwd;  // bwd[i] produced <-h_i
};

EncoderStates run_encoder(const ModelParams& params, const Source& src, EncoderTrace* trace) {
    check_source(params, src);
    const auto H = params.dims.hidden;
    const auto l = static_cast<Eigen::Index>(src.size());

    std::vector<Vector> inputs;
    inputs.reserve(src.size());
    for (std::size_t i = 0; i < src.size(); ++i) inputs.push_back(source_input(params, src, i));

    EncoderStates enc;
    enc.states.resize(2 * H, l);
    if (trace) {
        trace->fwd.resize(src.size());
        trace->bwd.resize(src.size());
    }

    Vector h = Vector::Zero(H);
    for (Eigen::Index i = 0; i < l; ++i) {
        auto step = gru_forward(params.enc_fwd, inputs[i], h);
        h = step.h;
        enc.states.block(H, i, H, 1) = h;
        if (trace) trace->fwd[i] = std::move(step);
    }
    h = Vector::Zero(H);
    for (Eigen::Index i = l - 1; i >= 0; --i) {
        auto step = gru_forward(params.enc_bwd, inputs[i], h);
        h = step.h;
        enc.states.block(0, i, H, 1) = h;
        if (trace) trace->bwd[i] = std::move(step);
    }
    enc.keys = params.attn_W_h * enc.states;
    return enc;
}

}  // namespace

Dims Dims::resolved() const {
    Dims d = *this;
    if (d.attn_hidden == 0) d.attn_hidden = d.hidden;
    if (d.out_hidden == 0) d.out_hidden = d.embed;
    return d;
}

void Dims::validate() const {
    const Dims d = resolved();
    if (d.vocab_src <= 0 || d.vocab_tgt <= 0) throw ConfigError("vocabulary sizes must be positive");
    if (d.embed <= 0 || d.hidden <= 0 || d.attn_hidden <= 0 || d.out_hidden <= 0)
        throw ConfigError("layer sizes must be positive");
    if (d.split_embedding) {
        if (d.embed % 2 != 0) throw ConfigError("split embeddings need an even embedding size");
        if (d.vocab_slot <= 0) throw ConfigError("split embeddings need a slot-name vocabulary");
        if (d.tie_embeddings) throw ConfigError("split embeddings cannot be tied to the decoder table");
    }
    if (d.tie_embeddings && d.vocab_src != d.vocab_tgt)
        throw ConfigError("tied embeddings need equal source and target vocabularies");
}

ModelParams zeros_like(const ModelParams& like) {
    ModelParams z;
    z.dims = like.dims;
    zip_tensors(z, like, [](std::string_view, auto& dst, const auto& src) { dst.setZero(src.rows(), src.cols()); });
    return z;
}

ModelParams init_params(const Dims& raw_dims, std::uint64_t seed) {
    raw_dims.validate();
    const Dims d = raw_dims.resolved();
    Rng rng(seed);

    ModelParams p;
    p.dims = d;
    const int H = d.hidden;
    const int E = d.embed;

    p.src_embed = random_matrix(d.source_word_dim(), d.vocab_src, rng);
    p.slot_embed = d.split_embedding ? random_matrix(E / 2, d.vocab_slot, rng) : Matrix(0, 0);
    p.tgt_embed = d.tie_embeddings ? Matrix(0, 0) : random_matrix(E, d.vocab_tgt, rng);

    p.enc_fwd = make_gru(E, H, rng);
    p.enc_bwd = make_gru(E, H, rng);
    p.dec_u = make_gru(E, H, rng);
    p.dec_q = make_gru(2 * H, H, rng);

    p.init_W = random_matrix(H, H, rng);
    p.init_b = Vector::Zero(H);

    p.attn_W_s = random_matrix(d.attn_hidden, H, rng);
    p.attn_W_h = random_matrix(d.attn_hidden, 2 * H, rng);
    p.attn_b = Vector::Zero(d.attn_hidden);
    p.attn_v = random_matrix(d.attn_hidden, 1, rng);

    p.out_W = random_matrix(d.out_hidden, H + E + 2 * H, rng);
    p.out_b = Vector::Zero(d.out_hidden);
    p.proj_W = random_matrix(d.vocab_tgt, d.out_hidden, rng);
    p.proj_b = Vector::Zero(d.vocab_tgt);
    return p;
}

bool all_finite(const ModelParams& p) {
    bool ok = true;
    p.for_each_tensor([&](std::string_view, const auto& t) { ok = ok && t.allFinite(); });
    return ok;
}

double squared_norm(const ModelParams& p) {
    double total = 0.0;
    p.for_each_tensor([&](std::string_view, const auto& t) { total += t.squaredNorm(); });
    return total;
}

void scale(ModelParams& p, double factor) {
    p.for_each_tensor([&](std::string_view, auto& t) { t *= factor; });
}

void axpy(ModelParams& y, double a, const ModelParams& x) {
    zip_tensors(y, x, [&](std::string_view name, auto& dst, const auto& src) {
        if (dst.rows() != src.rows() || dst.cols() != src.cols())
            throw ValidationError("tensor shape mismatch in " + std::string(name));
        dst.noalias() += a * src;
    });
}

Vector split_embedding_lookup(const ModelParams& params, int slot_id, int word_id) {
    const auto& d = params.dims;
    if (!d.split_embedding) throw ConfigError("model was built without split embeddings");
    if (d.embed % 2 != 0) throw ConfigError("split embeddings need an even embedding size");
    if (slot_id < 0 || slot_id >= d.vocab_slot) throw ValidationError("slot id out of range");
    if (word_id < 0 || word_id >= d.vocab_src) throw ValidationError("word id out of range");
    Vector v(d.embed);
    v.head(d.embed / 2) = params.slot_embed.col(slot_id);
    v.tail(d.embed / 2) = params.src_embed.col(word_id);
    return v;
}

EncoderStates encode(const ModelParams& params, const Source& src) { return run_encoder(params, src, nullptr); }

Vector initial_decoder_state(const ModelParams& params, const EncoderStates& enc) {
    const auto H = params.dims.hidden;
    return (params.init_W * enc.states.block(0, 0, H, 1) + params.init_b).array().tanh().matrix();
}

Attention attend(const ModelParams& params, const Vector& s_intermediate, const EncoderStates& enc) {
    Attention a;
    const Vector query = params.attn_W_s * s_intermediate + params.attn_b;
    a.activation = (enc.keys.colwise() + query).array().tanh().matrix();
    const Vector scores = a.activation.transpose() * params.attn_v;
    const double max = scores.maxCoeff();
    a.alpha = (scores.array() - max).exp().matrix();
    a.alpha /= a.alpha.sum();
    a.context = enc.states * a.alpha;
    return a;
}

DecoderStep decode_step(const ModelParams& params, const Vector& s_prev, int y_prev, const EncoderStates& enc) {
    const auto& d = params.dims;
    if (y_prev < 0 || y_prev >= d.vocab_tgt) throw ValidationError("previous token id out of range");
    const int H = d.hidden;
    const int E = d.embed;

    DecoderStep step;
    step.y_prev = y_prev;
    step.s_prev = s_prev;
    const Vector emb = params.target_embedding().col(y_prev);

    step.u_step = gru_forward(params.dec_u, emb, s_prev);
    step.s_intermediate = step.u_step.h;
    step.attention = attend(params, step.s_intermediate, enc);
    step.q_step = gru_forward(params.dec_q, step.attention.context, step.s_intermediate);
    step.s = step.q_step.h;

    step.out_input.resize(H + E + 2 * H);
    step.out_input << step.s, emb, step.attention.context;
    step.out_hidden = (params.out_W * step.out_input + params.out_b).array().tanh().matrix();
    const Vector logits = params.proj_W * step.out_hidden + params.proj_b;
    step.log_dist = log_softmax(logits);
    step.dist = step.log_dist.array().exp().matrix();
    return step;
}

double forward_loss(const ModelParams& params, const Source& src, std::span<const int> target) {
    check_target(params, target);
    const auto enc = encode(params, src);
    Vector s = initial_decoder_state(params, enc);
    double total = 0.0;
    for (std::size_t t = 1; t < target.size(); ++t) {
        auto step = decode_step(params, s, target[t - 1], enc);
        total -= step.log_dist[target[t]];
        s = std::move(step.s);
    }
    return total / static_cast<double>(target.size() - 1);
}

double accumulate_gradients(const ModelParams& params, const Source& src, std::span<const int> target,
                            ModelParams& grad, double weight) {
    check_target(params, target);
    const auto& d = params.dims;
    const int H = d.hidden;
    const int E = d.embed;

    EncoderTrace trace;
    const auto enc = run_encoder(params, src, &trace);
    const Vector s0 = initial_decoder_state(params, enc);

    const std::size_t m = target.size() - 1;
    std::vector<DecoderStep> steps;
    steps.reserve(m);
    double total = 0.0;
    {
        Vector s = s0;
        for (std::size_t t = 1; t <= m; ++t) {
            steps.push_back(decode_step(params, s, target[t - 1], enc));
            total -= steps.back().log_dist[target[t]];
            s = steps.back().s;
        }
    }
    const double loss = total / static_cast<double>(m);
    const double g = weight / static_cast<double>(m);

    Matrix& tgt_embed_grad = grad.target_embedding();
    Matrix d_states = Matrix::Zero(2 * H, enc.length());
    Matrix d_keys = Matrix::Zero(d.attn_hidden, enc.length());
    Vector ds_next = Vector::Zero(H);
    Vector scratch;

    for (std::size_t t = m; t-- > 0;) {
        const auto& st = steps[t];

        Vector d_logits = st.dist * g;
        d_logits[target[t + 1]] -= g;
        grad.proj_W.noalias() += d_logits * st.out_hidden.transpose();
        grad.proj_b += d_logits;

        const Vector d_pre =
            ((params.proj_W.transpose() * d_logits).array() * (1.0 - st.out_hidden.array().square())).matrix();
        grad.out_W.noalias() += d_pre * st.out_input.transpose();
        grad.out_b += d_pre;
        const Vector d_in = params.out_W.transpose() * d_pre;

        Vector ds = d_in.head(H) + ds_next;
        Vector d_emb = d_in.segment(H, E);
        Vector d_context = d_in.tail(2 * H);

        // s_t = q(s'_t, H_t)
        Vector d_sint;
        gru_backward(params.dec_q, st.q_step, ds, grad.dec_q, &scratch, d_sint);
        d_context += scratch;

        // H_t = states * alpha
        const auto& att = st.attention;
        const Vector d_alpha = enc.states.transpose() * d_context;
        d_states.noalias() += d_context * att.alpha.transpose();
        const Vector d_scores = (att.alpha.array() * (d_alpha.array() - att.alpha.dot(d_alpha))).matrix();

        // scores_i = v . tanh(attn_W_s s' + keys_i + attn_b)
        grad.attn_v.noalias() += att.activation * d_scores;
        const Matrix d_act = (params.attn_v * d_scores.transpose()).array() * (1.0 - att.activation.array().square());
        const Vector d_act_sum = d_act.rowwise().sum();
        grad.attn_W_s.noalias() += d_act_sum * st.s_intermediate.transpose();
        grad.attn_b += d_act_sum;
        d_sint.noalias() += params.attn_W_s.transpose() * d_act_sum;
        d_keys += d_act;

        // s'_t = u(s_{t-1}, emb(y_{t-1}))
        Vector ds_prev;
        gru_backward(params.dec_u, st.u_step, d_sint, grad.dec_u, &scratch, ds_prev);
        d_emb += scratch;
        tgt_embed_grad.col(st.y_prev) += d_emb;
        ds_next = std::move(ds_prev);
    }

    // s_0 = tanh(init_W <-h_1 + init_b)
    {
        const Vector d_pre = (ds_next.array() * (1.0 - s0.array().square())).matrix();
        grad.init_W.noalias() += d_pre * enc.states.block(0, 0, H, 1).transpose();
        grad.init_b += d_pre;
        d_states.block(0, 0, H, 1).noalias() += params.init_W.transpose() * d_pre;
    }

    // keys = attn_W_h * states
    grad.attn_W_h.noalias() += d_keys * enc.states.transpose();
    d_states.noalias() += params.attn_W_h.transpose() * d_keys;

    const auto l = static_cast<std::size_t>(enc.length());
    std::vector<Vector> d_inputs(l, Vector::Zero(E));
    Vector carry = Vector::Zero(H);
    // <-h_i depends on <-h_{i+1}: walk left to right.
    for (std::size_t i = 0; i < l; ++i) {
        const Vector dh = d_states.block(0, static_cast<Eigen::Index>(i), H, 1) + carry;
        gru_backward(params.enc_bwd, trace.bwd[i], dh, grad.enc_bwd, &scratch, carry);
        d_inputs[i] += scratch;
    }
    carry.setZero();
    for (std::size_t i = l; i-- > 0;) {
        const Vector dh = d_states.block(H, static_cast<Eigen::Index>(i), H, 1) + carry;
        gru_backward(params.enc_fwd, trace.fwd[i], dh, grad.enc_fwd, &scratch, carry);
        d_inputs[i] += scratch;
    }

    for (std::size_t i = 0; i < l; ++i) {
        if (d.split_embedding) {
            grad.slot_embed.col(src.slots[i]) += d_inputs[i].head(E / 2);
            grad.src_embed.col(src.words[i]) += d_inputs[i].tail(E / 2);
        } else {
            grad.src_embed.col(src.words[i]) += d_inputs[i];
        }
    }
    return loss;
}

Gradients backward(const ModelParams& params, const Source& src, std::span<const int> target) {
    Gradients out;
    out.grad = zeros_like(params);
    out.loss = accumulate_gradients(params, src, target, out.grad, 1.0);
    return out;
}

}  // namespace dnlg
