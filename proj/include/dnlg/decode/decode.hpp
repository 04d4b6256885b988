#pragma once

#include <algorithm>
#include <cstddef>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "dnlg/corruption/linearize.hpp"
#include "dnlg/data/bpe.hpp"
#include "dnlg/data/types.hpp"
#include "dnlg/data/vocabulary.hpp"
#include "dnlg/model/model.hpp"

namespace dnlg {

struct DecodeConfig {
    int beam_size = 5;
    int max_len = 60;  // emitted tokens, </s> included
    bool length_normalization = false;

    void validate() const;  // throws ConfigError
};

// tokens excludes <s>; a finished hypothesis ends with </s>.
struct Hypothesis {
    std::vector<int> tokens;
    double log_prob = 0.0;
    bool finished = false;

    bool operator==(const Hypothesis&) const = default;
};

double hypothesis_score(const Hypothesis& h, bool length_normalization);

// Ids a decoder never emits.
inline bool never_emitted(int id) { return id == Vocabulary::kPad || id == Vocabulary::kBos; }

// The searches below work on any step function
//   step(const State&, int y_prev) -> std::pair<State, Vector /*log-probs over ids*/>
// so they can be driven by hand-set distributions as well as the network.

template <class State, class Step>
Hypothesis greedy_search(State state, Step&& step, int max_len) {
    Hypothesis h;
    int y = Vocabulary::kBos;
    for (int t = 0; t < max_len; ++t) {
        auto [next, log_probs] = step(state, y);
        int best = -1;
        for (int v = 0; v < static_cast<int>(log_probs.size()); ++v) {
            if (never_emitted(v)) continue;
            if (best < 0 || log_probs[v] > log_probs[best]) best = v;
        }
        h.tokens.push_back(best);
        h.log_prob += log_probs[best];
        if (best == Vocabulary::kEos) {
            h.finished = true;
            break;
        }
        state = std::move(next);
        y = best;
    }
    return h;
}

// Returns up to `nbest` hypotheses, best first: finished ones by score,
// then the best unfinished ones if too few finished within max_len.
template <class State, class Step>
std::vector<Hypothesis> beam_search_with(State initial, Step&& step, const DecodeConfig& config,
                                         std::size_t nbest = 1) {
    struct Entry {
        Hypothesis hyp;
        State state;
    };
    struct Candidate {
        double score;
        std::size_t beam;
        int id;
        double log_prob;
    };
    const bool norm = config.length_normalization;
    auto better = [](const Candidate& a, const Candidate& b) {
        if (a.score != b.score) return a.score > b.score;
        if (a.beam != b.beam) return a.beam < b.beam;
        return a.id < b.id;
    };

    std::vector<Entry> live{Entry{Hypothesis{}, std::move(initial)}};
    std::vector<Hypothesis> finished;
    const auto width = static_cast<std::size_t>(config.beam_size);

    for (int t = 0; t < config.max_len && !live.empty() && finished.size() < width; ++t) {
        std::vector<State> next_states;
        std::vector<Candidate> candidates;
        next_states.reserve(live.size());
        for (std::size_t b = 0; b < live.size(); ++b) {
            const int y_prev = live[b].hyp.tokens.empty() ? Vocabulary::kBos : live[b].hyp.tokens.back();
            auto [next, log_probs] = step(live[b].state, y_prev);
            next_states.push_back(std::move(next));
            for (int v = 0; v < static_cast<int>(log_probs.size()); ++v) {
                if (never_emitted(v)) continue;
                const double lp = live[b].hyp.log_prob + log_probs[v];
                if (lp == -std::numeric_limits<double>::infinity()) continue;  // probability zero
                const double score = norm ? lp / static_cast<double>(live[b].hyp.tokens.size() + 1) : lp;
                candidates.push_back({score, b, v, lp});
            }
        }

        const std::size_t keep = std::min(width - finished.size(), candidates.size());
        std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(keep), candidates.end(),
                          better);
        std::vector<Entry> next_live;
        for (std::size_t k = 0; k < keep; ++k) {
            const auto& c = candidates[k];
            Hypothesis h = live[c.beam].hyp;
            h.tokens.push_back(c.id);
            h.log_prob = c.log_prob;
            if (c.id == Vocabulary::kEos) {
                h.finished = true;
                finished.push_back(std::move(h));
            } else {
                next_live.push_back(Entry{std::move(h), next_states[c.beam]});
            }
        }
        live = std::move(next_live);

        // Raw log-probabilities only fall, so nothing live can still win.
        if (nbest == 1 && !norm && !finished.empty() && !live.empty()) {
            double best_finished = finished.front().log_prob;
            for (const auto& f : finished) best_finished = std::max(best_finished, f.log_prob);
            if (best_finished >= live.front().hyp.log_prob) break;
        }
    }

    auto by_score = [norm](const Hypothesis& a, const Hypothesis& b) {
        return hypothesis_score(a, norm) > hypothesis_score(b, norm);
    };
    std::stable_sort(finished.begin(), finished.end(), by_score);
    std::vector<Hypothesis> out(finished.begin(), finished.begin() + static_cast<std::ptrdiff_t>(
                                                                         std::min(nbest, finished.size())));
    if (out.size() < nbest) {
        std::vector<Hypothesis> rest;
        for (auto& e : live) rest.push_back(std::move(e.hyp));
        std::stable_sort(rest.begin(), rest.end(), by_score);
        for (auto& h : rest) {
            if (out.size() == nbest) break;
            out.push_back(std::move(h));
        }
    }
    return out;
}

// Network-backed searches over an encoded source.
Hypothesis greedy(const ModelParams& params, const Source& src, int max_len);
std::vector<Hypothesis> beam_search(const ModelParams& params, const Source& src, const DecodeConfig& config,
                                    std::size_t nbest = 1);

// What generation needs besides the weights. A slot vocabulary switches to
// slot-tagged (split-embedding) inputs.
struct GenerateContext {
    const ModelParams* params = nullptr;
    const Vocabulary* vocab = nullptr;
    const Vocabulary* slot_vocab = nullptr;
    const BpeModel* bpe = nullptr;
    LinearizeOptions linearize;
};

struct Generation {
    std::string text;
    double score = 0.0;
    bool finished = true;
};

// Model input tokens for an MR (BPE applied when present).
TokenSequence generation_input(const GenerateContext& ctx, const MeaningRepresentation& mr);

// Ids to text: drops reserved ids, undoes BPE, detokenizes.
std::string render(const GenerateContext& ctx, const std::vector<int>& ids);

std::vector<Generation> generate_nbest(const GenerateContext& ctx, const MeaningRepresentation& mr,
                                       const DecodeConfig& config, std::size_t nbest);
std::string generate(const GenerateContext& ctx, const MeaningRepresentation& mr, const DecodeConfig& config);

// Generates from an already tokenized word-level input (no slot tags).
std::vector<Generation> generate_from_tokens(const GenerateContext& ctx, const TokenSequence& input,
                                             const DecodeConfig& config, std::size_t nbest = 1);

}  // namespace dnlg
