#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <set>

#include "doctest.h"
#include "dnlg/data/mr.hpp"
#include "dnlg/decode/decode.hpp"
#include "dnlg/errors.hpp"
#include "dnlg/util/seed.hpp"

using namespace dnlg;

namespace {

using Prefix = std::vector<int>;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr int kA = 4;
constexpr int kB = 5;

// A decoder whose next-token distribution is a table keyed by the prefix.
struct TableModel {
    int vocab = 6;
    std::map<Prefix, std::map<int, double>> probs;

    std::pair<Prefix, Vector> operator()(const Prefix& prefix, int y_prev) const {
        Prefix next = prefix;
        if (y_prev != Vocabulary::kBos) next.push_back(y_prev);
        Vector lp = Vector::Constant(vocab, kNegInf);
        auto it = probs.find(next);
        if (it != probs.end())
            for (auto [id, p] : it->second) lp[id] = std::log(p);
        return {next, lp};
    }
};

// Random full distributions, derived from a hash of the prefix.
struct RandomTableModel {
    int vocab;
    std::uint64_t seed;

    std::pair<Prefix, Vector> operator()(const Prefix& prefix, int y_prev) const {
        Prefix next = prefix;
        if (y_prev != Vocabulary::kBos) next.push_back(y_prev);
        std::uint64_t h = seed;
        for (int id : next) h = derive_seed(h, static_cast<std::uint64_t>(id));
        Rng rng(h);
        std::uniform_real_distribution<double> u(0.05, 1.0);
        Vector p(vocab);
        for (int v = 0; v < vocab; ++v) p[v] = u(rng);
        p /= p.sum();
        return {next, p.array().log().matrix()};
    }
};

double sequence_log_prob(const RandomTableModel& m, const Prefix& seq) {
    Prefix prefix;
    int y = Vocabulary::kBos;
    double total = 0.0;
    for (int id : seq) {
        auto [next, lp] = m(prefix, y);
        total += lp[id];
        prefix = next;
        y = id;
    }
    return total;
}

// Every </s>-terminated sequence of at most max_len emitted tokens.
void enumerate(int vocab, int max_len, Prefix& cur, const std::function<void(const Prefix&)>& visit) {
    if (static_cast<int>(cur.size()) == max_len) return;
    for (int v = 0; v < vocab; ++v) {
        if (never_emitted(v)) continue;
        cur.push_back(v);
        if (v == Vocabulary::kEos)
            visit(cur);
        else
            enumerate(vocab, max_len, cur, visit);
        cur.pop_back();
    }
}

ModelParams random_model(std::uint64_t seed, int vocab = 12) {
    Dims d;
    d.vocab_src = vocab;
    d.vocab_tgt = vocab;
    d.embed = 6;
    d.hidden = 8;
    auto p = init_params(d.resolved(), seed);
    // Sharpen the output layer so runs differ in length.
    p.proj_W *= 4.0;
    p.proj_b[Vocabulary::kEos] = 1.0;
    return p;
}

Source random_source(std::uint64_t seed, int vocab = 12) {
    Rng rng(seed);
    std::uniform_int_distribution<int> len(1, 6), tok(Vocabulary::kNumReserved, vocab - 1);
    std::vector<int> ids(static_cast<std::size_t>(len(rng)));
    for (auto& id : ids) id = tok(rng);
    return Source(ids);
}

}  // namespace

TEST_CASE("beam search finds the sequence greedy misses") {
    TableModel m;
    m.probs[{}] = {{kA, 0.55}, {kB, 0.45}};
    m.probs[{kA}] = {{kA, 0.35}, {kB, 0.35}, {Vocabulary::kEos, 0.3}};
    m.probs[{kB}] = {{Vocabulary::kEos, 0.9}, {kA, 0.1}};

    const auto g = greedy_search(Prefix{}, m, 2);
    CHECK(g.tokens == Prefix{kA, kA});
    CHECK_FALSE(g.finished);
    CHECK(g.log_prob == doctest::Approx(std::log(0.55 * 0.35)));

    DecodeConfig cfg;
    cfg.beam_size = 2;
    cfg.max_len = 2;
    const auto b = beam_search_with(Prefix{}, m, cfg).front();
    CHECK(b.tokens == Prefix{kB, Vocabulary::kEos});
    CHECK(b.finished);
    CHECK(b.log_prob == doctest::Approx(std::log(0.45 * 0.9)));

    // Exhaustive check over all length-2 sequences.
    double best = kNegInf;
    for (int x : {kA, kB, Vocabulary::kEos})
        for (int y : {kA, kB, Vocabulary::kEos}) {
            double p = m.probs[{}].count(x) ? m.probs[{}][x] : 0.0;
            if (x != Vocabulary::kEos) p *= m.probs[{x}].count(y) ? m.probs[{x}][y] : 0.0;
            best = std::max(best, std::log(p));
        }
    CHECK(b.log_prob == doctest::Approx(best));
}

TEST_CASE("a wide beam equals exhaustive search") {
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        RandomTableModel m{6, seed};
        const int max_len = 3;
        DecodeConfig cfg;
        cfg.beam_size = 216;  // 6^3
        cfg.max_len = max_len;

        Prefix best_seq, cur;
        double best = kNegInf;
        enumerate(m.vocab, max_len, cur, [&](const Prefix& seq) {
            const double lp = sequence_log_prob(m, seq);
            if (lp > best) {
                best = lp;
                best_seq = seq;
            }
        });
        const auto b = beam_search_with(Prefix{}, m, cfg).front();
        CHECK(b.tokens == best_seq);
        CHECK(b.log_prob == doctest::Approx(best).epsilon(1e-12));
    }
}

TEST_CASE("hypothesis log-probability is the sum of step log-probabilities") {
    RandomTableModel m{7, 99};
    DecodeConfig cfg;
    cfg.beam_size = 4;
    cfg.max_len = 5;
    for (const auto& h : beam_search_with(Prefix{}, m, cfg, 4)) {
        CHECK(h.log_prob == doctest::Approx(sequence_log_prob(m, h.tokens)).epsilon(1e-12));
        CHECK(h.finished == (h.tokens.back() == Vocabulary::kEos));
    }
}

TEST_CASE("beam size one is greedy on network models") {
    DecodeConfig one;
    one.beam_size = 1;
    one.max_len = 15;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const auto params = random_model(seed);
        const auto src = random_source(seed + 1000);
        const auto g = greedy(params, src, one.max_len);
        const auto b = beam_search(params, src, one).front();
        CHECK(g == b);
        CHECK(static_cast<int>(g.tokens.size()) <= one.max_len);
    }
}

TEST_CASE("beam can end below greedy once the greedy prefix is pruned") {
    // Greedy: A X </s> = 0.2. Both children of B outrank A X at step two,
    // and everything below B ends at 0.115 or less.
    constexpr int kX = 6, kW = 7, kV = 8, kY = 9, kZ = 10, kQ = 11;
    const int eos = Vocabulary::kEos;
    TableModel m;
    m.vocab = 12;
    m.probs[{}] = {{kA, 0.5}, {kB, 0.45}, {kQ, 0.05}};
    m.probs[{kA}] = {{kX, 0.4}, {kW, 0.3}, {kV, 0.3}};
    m.probs[{kA, kX}] = {{eos, 1.0}};
    m.probs[{kB}] = {{kZ, 0.23 / 0.45}, {kY, 0.22 / 0.45}};
    for (int c : {kY, kZ}) {
        m.probs[{kB, c}] = {{kX, 0.5}, {kW, 0.5}};
        m.probs[{kB, c, kX}] = {{eos, 1.0}};
        m.probs[{kB, c, kW}] = {{eos, 1.0}};
    }
    const auto g = greedy_search(Prefix{}, m, 4);
    CHECK(g.tokens == Prefix{kA, kX, eos});
    CHECK(g.log_prob == doctest::Approx(std::log(0.2)));

    DecodeConfig cfg;
    cfg.beam_size = 2;
    cfg.max_len = 4;
    const auto b = beam_search_with(Prefix{}, m, cfg).front();
    CHECK(b.finished);
    CHECK(b.log_prob == doctest::Approx(std::log(0.115)));
    CHECK(b.log_prob < g.log_prob);

    cfg.beam_size = 3;
    CHECK(beam_search_with(Prefix{}, m, cfg).front().log_prob >= g.log_prob);
}

TEST_CASE("beam of five rarely scores below greedy") {
    DecodeConfig cfg;
    cfg.max_len = 40;
    int both_finished = 0, below = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const auto params = random_model(seed);
        const auto src = random_source(seed + 1000);
        const auto g = greedy(params, src, cfg.max_len);
        const auto b = beam_search(params, src, cfg).front();
        if (g.finished) {
            CHECK(b.finished);
            if (b.log_prob < g.log_prob - 1e-12) ++below;
            ++both_finished;
        }
    }
    CHECK(both_finished > 50);
    CHECK(below <= 2);
}

TEST_CASE("n-best lists are sorted, distinct and free of padding") {
    DecodeConfig cfg;
    cfg.max_len = 10;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto params = random_model(seed);
        const auto src = random_source(seed + 7);
        const auto list = beam_search(params, src, cfg, 5);
        REQUIRE(!list.empty());
        std::set<std::vector<int>> seen;
        for (std::size_t i = 0; i < list.size(); ++i) {
            if (i > 0 && list[i].finished == list[i - 1].finished) CHECK(list[i].log_prob <= list[i - 1].log_prob);
            CHECK(seen.insert(list[i].tokens).second);
            for (int id : list[i].tokens) {
                CHECK(id != Vocabulary::kPad);
                CHECK(id != Vocabulary::kBos);
            }
            CHECK(static_cast<int>(list[i].tokens.size()) <= cfg.max_len);
        }
        CHECK(beam_search(params, src, cfg, 5) == list);
    }
}

TEST_CASE("unfinished fallback at max length") {
    TableModel m;
    m.probs[{}] = {{kA, 1.0}};
    m.probs[{kA}] = {{kA, 1.0}};
    m.probs[{kA, kA}] = {{kA, 1.0}};
    DecodeConfig cfg;
    cfg.max_len = 3;
    const auto b = beam_search_with(Prefix{}, m, cfg).front();
    CHECK_FALSE(b.finished);
    CHECK(b.tokens == Prefix{kA, kA, kA});
}

TEST_CASE("length normalization changes the ranking") {
    TableModel m;
    m.probs[{}] = {{Vocabulary::kEos, 0.4}, {kA, 0.6}};
    m.probs[{kA}] = {{Vocabulary::kEos, 0.6}, {kB, 0.4}};
    DecodeConfig cfg;
    cfg.beam_size = 2;
    CHECK(beam_search_with(Prefix{}, m, cfg).front().tokens == Prefix{Vocabulary::kEos});
    cfg.length_normalization = true;
    // ln(0.36)/2 > ln(0.4)
    CHECK(beam_search_with(Prefix{}, m, cfg).front().tokens == Prefix{kA, Vocabulary::kEos});
}

TEST_CASE("decode config validation") {
    DecodeConfig cfg;
    cfg.beam_size = 0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = {};
    cfg.max_len = 0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    const auto params = random_model(1);
    CHECK_THROWS_AS(beam_search(params, Source(std::vector<int>{}), DecodeConfig{}), ValidationError);
    CHECK_THROWS_AS(beam_search(params, random_source(1), DecodeConfig{}, 6), ConfigError);
}

TEST_CASE("generation input follows the linearization rule") {
    const auto vocab = Vocabulary::build(std::vector<TokenSequence>{{"Aromi", "is", "family", "friendly"}});
    Dims d;
    d.vocab_src = d.vocab_tgt = static_cast<int>(vocab.size());
    d.embed = 6;
    d.hidden = 8;
    const auto params = init_params(d.resolved(), 3);
    GenerateContext ctx{&params, &vocab};
    const auto mr = parse_mr("name[Aromi], familyFriendly[yes]");
    CHECK(generation_input(ctx, mr) == TokenSequence{"Aromi", "family", "friendly"});

    DecodeConfig cfg;
    cfg.max_len = 8;
    const auto a = generate(ctx, mr, cfg);
    CHECK(a == generate(ctx, mr, cfg));
    CHECK_THROWS_AS(generate(ctx, MeaningRepresentation{}, cfg), ValidationError);

    const auto list = generate_from_tokens(ctx, {"Aromi", "family", "friendly"}, cfg, 3);
    CHECK(list.size() == 3);
    CHECK(list.front().text == a);
}

TEST_CASE("render drops reserved ids and joins words") {
    const auto vocab = Vocabulary::build(std::vector<TokenSequence>{{"Aromi", "is", "nice", "."}});
    GenerateContext ctx{nullptr, &vocab};
    ctx.params = nullptr;
    const std::vector<int> ids{vocab.id("Aromi"), vocab.id("is"), vocab.id("nice"), vocab.id("."), Vocabulary::kEos};
    CHECK_THROWS_AS(render(ctx, ids), ConfigError);
    const auto params = random_model(0);
    ctx.params = &params;
    CHECK(render(ctx, ids) == "Aromi is nice.");
}
