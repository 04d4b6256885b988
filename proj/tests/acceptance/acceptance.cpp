// Acceptance suite: one PASS/FAIL/SKIP line per criterion.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "dnlg/cli/pipeline.hpp"
#include "dnlg/corruption/corruption.hpp"
#include "dnlg/data/corpus_io.hpp"
#include "dnlg/data/tokenizer.hpp"
#include "dnlg/decode/decode.hpp"
#include "dnlg/eval/metrics.hpp"
#include "dnlg/eval/significance.hpp"
#include "dnlg/model/model.hpp"
#include "dnlg/training/training.hpp"
#include "dnlg/util/file_io.hpp"
#include "dnlg/util/seed.hpp"

using namespace dnlg;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    enum Kind { kPass, kFail, kSkip } kind;
    std::string detail;
};

Outcome pass(std::string d) { return {Outcome::kPass, std::move(d)}; }
Outcome fail(std::string d) { return {Outcome::kFail, std::move(d)}; }
Outcome skip(std::string d) { return {Outcome::kSkip, std::move(d)}; }
Outcome check(bool ok, std::string d) { return ok ? pass(std::move(d)) : fail(std::move(d)); }

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

const fs::path kToyDir = fs::path(DNLG_SOURCE_DIR) / "data" / "toy";

TokenSequence toks(std::string_view s) { return split_whitespace(s); }

std::vector<int> random_ids(Rng& rng, int vocab, int min_len, int max_len) {
    std::uniform_int_distribution<int> len(min_len, max_len), tok(Vocabulary::kNumReserved, vocab - 1);
    std::vector<int> ids(static_cast<std::size_t>(len(rng)));
    for (auto& id : ids) id = tok(rng);
    return ids;
}

std::vector<int> wrap(std::vector<int> body) {
    body.insert(body.begin(), Vocabulary::kBos);
    body.push_back(Vocabulary::kEos);
    return body;
}

// ---------------------------------------------------------------- 1

Outcome gradient_check() {
    const auto t0 = std::chrono::steady_clock::now();
    double worst = 0.0;
    std::size_t checked = 0;
    for (const bool split : {false, true}) {
        Dims d;
        d.vocab_src = d.vocab_tgt = 11;
        d.hidden = 8;
        d.embed = 6;
        d.split_embedding = split;
        d.vocab_slot = split ? 5 : 0;
        auto params = init_params(d.resolved(), split ? 2 : 1);
        // Nonzero biases so their gradients are exercised away from zero.
        Rng rng(9);
        std::uniform_real_distribution<double> u(-0.3, 0.3);
        params.for_each_tensor([&](std::string_view, auto& t) {
            for (Eigen::Index i = 0; i < t.size(); ++i)
                if (t.data()[i] == 0.0) t.data()[i] = u(rng);
        });

        std::vector<std::pair<Source, std::vector<int>>> batch;
        for (int k = 0; k < 3; ++k) {
            Source src(random_ids(rng, 11, 2, 5));
            if (split)
                for (std::size_t i = 0; i < src.words.size(); ++i)
                    src.slots.push_back(std::uniform_int_distribution<int>(Vocabulary::kNumReserved, 4)(rng));
            batch.emplace_back(src, wrap(random_ids(rng, 11, 1, 4)));
        }
        auto loss = [&](const ModelParams& p) {
            double l = 0.0;
            for (const auto& [src, tgt] : batch) l += forward_loss(p, src, tgt);
            return l;
        };
        auto grad = zeros_like(params);
        for (const auto& [src, tgt] : batch) accumulate_gradients(params, src, tgt, grad);

        const double eps = 1e-4;
        std::vector<double*> values;
        std::vector<const double*> analytic;
        params.for_each_tensor([&](std::string_view, auto& t) {
            for (Eigen::Index i = 0; i < t.size(); ++i) values.push_back(t.data() + i);
        });
        grad.for_each_tensor([&](std::string_view, const auto& t) {
            for (Eigen::Index i = 0; i < t.size(); ++i) analytic.push_back(t.data() + i);
        });
        if (values.size() != analytic.size()) return fail("gradient layout differs from parameter layout");
        for (std::size_t i = 0; i < values.size(); ++i) {
            const double saved = *values[i];
            *values[i] = saved + eps;
            const double up = loss(params);
            *values[i] = saved - eps;
            const double down = loss(params);
            *values[i] = saved;
            const double numeric = (up - down) / (2 * eps);
            const double a = *analytic[i];
            const double rel = std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), 1e-6});
            worst = std::max(worst, rel);
            ++checked;
        }
    }
    const double secs = seconds_since(t0);
    return check(worst < 1e-3 && secs < 60.0, std::to_string(checked) + " parameters, worst relative error " +
                                                   fmt("%.2e", worst) + ", " + fmt("%.1f", secs) + " s");
}

// ---------------------------------------------------------------- 2

Outcome normalization() {
    double worst_attn = 0.0, worst_out = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        Rng rng(static_cast<std::uint64_t>(trial) + 100);
        Dims d;
        d.vocab_src = d.vocab_tgt = std::uniform_int_distribution<int>(6, 30)(rng);
        d.hidden = std::uniform_int_distribution<int>(2, 12)(rng);
        d.embed = 2 * std::uniform_int_distribution<int>(1, 6)(rng);
        auto params = init_params(d.resolved(), static_cast<std::uint64_t>(trial));
        std::normal_distribution<double> n(0.0, 2.0);
        params.for_each_tensor([&](std::string_view, auto& t) {
            for (Eigen::Index i = 0; i < t.size(); ++i) t.data()[i] += 0.5 * n(rng);
        });
        const Source src(random_ids(rng, d.vocab_src, 1, 12));
        const auto enc = encode(params, src);
        Vector s = initial_decoder_state(params, enc);
        int y = Vocabulary::kBos;
        for (int t = 0; t < 3; ++t) {
            const auto step = decode_step(params, s, y, enc);
            worst_attn = std::max(worst_attn, std::abs(step.attention.alpha.sum() - 1.0));
            worst_out = std::max(worst_out, std::abs(step.log_dist.array().exp().sum() - 1.0));
            s = step.s;
            y = std::uniform_int_distribution<int>(Vocabulary::kNumReserved, d.vocab_tgt - 1)(rng);
        }
    }
    return check(worst_attn < 1e-6 && worst_out < 1e-6, "1000 trials, max |sum-1|: attention " +
                                                            fmt("%.1e", worst_attn) + ", output " +
                                                            fmt("%.1e", worst_out));
}

// ---------------------------------------------------------------- 3

double normal_cdf(double x, double mean, double sd) { return 0.5 * std::erfc(-(x - mean) / (sd * std::sqrt(2.0))); }

// E[1 - floor(p n)/n] with p ~ Normal(mean, var) clamped to [lo, hi].
double analytic_kept_fraction(const CorruptionConfig& c, int n) {
    const double sd = std::sqrt(c.rate_variance);
    double expected_removed = 0.0;
    const double p_lo = normal_cdf(c.rate_clamp_low, c.rate_mean, sd);
    const double p_hi = 1.0 - normal_cdf(c.rate_clamp_high, c.rate_mean, sd);
    expected_removed += p_lo * std::floor(c.rate_clamp_low * n + 1e-9);
    expected_removed += p_hi * std::floor(c.rate_clamp_high * n + 1e-9);
    for (int k = 0; k <= n; ++k) {
        const double a = std::max(c.rate_clamp_low, static_cast<double>(k) / n);
        const double b = std::min(c.rate_clamp_high, static_cast<double>(k + 1) / n);
        if (b <= a) continue;
        expected_removed += k * (normal_cdf(b, c.rate_mean, sd) - normal_cdf(a, c.rate_mean, sd));
    }
    return 1.0 - expected_removed / n;
}

Outcome corruption_statistics() {
    // 20 distinct tokens: a-j frequent, k-t rare.
    TokenSequence sentence;
    std::vector<TokenSequence> count_corpus;
    for (char ch = 'a'; ch < 'a' + 20; ++ch) {
        sentence.push_back(std::string(1, ch));
        count_corpus.push_back(TokenSequence(ch < 'k' ? 150 : 100, std::string(1, ch)));
    }
    std::vector<TokenSequence> all_frequent;
    for (const auto& t : sentence) all_frequent.push_back(TokenSequence(101, t));

    // Kept fraction with default settings; every token is deletable here.
    CorruptionConfig cfg;
    cfg.count_source = std::make_shared<Vocabulary>(Vocabulary::build(all_frequent));
    Rng rng(2024);
    double kept = 0.0;
    const int samples = 10000;
    for (int i = 0; i < samples; ++i)
        kept += static_cast<double>(corrupt(sentence, cfg, rng).corrupted.size()) / static_cast<double>(sentence.size());
    kept /= samples;
    const double expected = analytic_kept_fraction(cfg, 20);

    // Threshold: only tokens counted more than 100 times may disappear.
    const auto counts = std::make_shared<Vocabulary>(Vocabulary::build(count_corpus));
    CorruptionConfig freq;
    freq.count_source = counts;
    std::size_t threshold_violations = 0;
    std::size_t adjacency_violations = 0;
    for (int i = 0; i < samples; ++i) {
        const auto out = corrupt(sentence, freq, rng).corrupted;
        for (const auto& t : sentence) {
            const bool present = std::find(out.begin(), out.end(), t) != out.end();
            if (!present && counts->count(t) <= 100) ++threshold_violations;
        }
        // Originally adjacent survivors must stay adjacent and in order.
        for (std::size_t j = 0; j + 1 < sentence.size(); ++j) {
            auto a = std::find(out.begin(), out.end(), sentence[j]);
            auto b = std::find(out.begin(), out.end(), sentence[j + 1]);
            if (a != out.end() && b != out.end() && b != a + 1) ++adjacency_violations;
        }
    }

    const bool ok = std::abs(kept - expected) < 0.02 && threshold_violations == 0 && adjacency_violations == 0;
    return check(ok, "kept fraction " + fmt("%.4f", kept) + " vs analytic " + fmt("%.4f", expected) +
                         ", threshold violations " + std::to_string(threshold_violations) +
                         ", adjacency violations " + std::to_string(adjacency_violations));
}

// ---------------------------------------------------------------- 4

Outcome worked_example() {
    const auto sentence = toks("Loch Fyne is a family friendly restaurant providing Indian food .");
    std::vector<TokenSequence> corpus;
    for (const char* w : {"is", "a", "restaurant", "providing", "food", "."}) corpus.push_back(TokenSequence(101, w));
    for (const char* w : {"Loch", "Fyne", "family", "friendly", "Indian"}) corpus.push_back(TokenSequence(100, w));

    CorruptionConfig cfg;
    cfg.count_source = std::make_shared<Vocabulary>(Vocabulary::build(corpus));
    cfg.enable_shuffle = false;
    const auto expected = toks("Loch Fyne family friendly Indian");
    Rng rng(77);
    int eligible_draws = 0, exact = 0;
    for (int i = 0; i < 10000; ++i) {
        const auto s = corrupt(sentence, cfg, rng);
        if (removal_count(s.sampled_rate, sentence.size()) >= 6) {
            ++eligible_draws;
            if (s.corrupted == expected) ++exact;
        }
    }

    cfg.enable_shuffle = true;
    int split_pairs = 0;
    for (int i = 0; i < 10000; ++i) {
        const auto out = corrupt(sentence, cfg, rng).corrupted;
        for (auto [x, y] : {std::pair{"Loch", "Fyne"}, std::pair{"family", "friendly"}}) {
            auto a = std::find(out.begin(), out.end(), x);
            if (a == out.end() || a + 1 == out.end() || *(a + 1) != y) ++split_pairs;
        }
    }
    return check(eligible_draws > 0 && exact == eligible_draws && split_pairs == 0,
                 "deletion-only output exact in " + std::to_string(exact) + "/" + std::to_string(eligible_draws) +
                     " draws with >= 6 removals; pairs split in " + std::to_string(split_pairs) +
                     " of 10000 shuffles");
}

// ---------------------------------------------------------------- 5

double exact_randomization(const std::vector<double>& a, const std::vector<double>& b) {
    double observed = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) observed += a[i] - b[i];
    observed = std::abs(observed);
    std::size_t extreme = 0;
    const std::uint32_t patterns = 1u << a.size();
    for (std::uint32_t mask = 0; mask < patterns; ++mask) {
        double d = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) d += (mask >> i & 1u) ? b[i] - a[i] : a[i] - b[i];
        if (std::abs(d) >= observed - 1e-12) ++extreme;
    }
    return static_cast<double>(extreme) / patterns;
}

Outcome metric_oracles() {
    std::vector<std::string> failures;
    auto expect = [&](bool ok, const std::string& what) {
        if (!ok) failures.push_back(what);
    };

    std::vector<EvalInstance> identity{{toks("the cat sat on the mat"), {toks("the cat sat on the mat")}},
                                       {toks("a dog barked"), {toks("a dog barked"), toks("the dog barked")}}};
    expect(bleu(identity) == 1.0, "BLEU identity");
    expect(rouge_l(identity) == 1.0, "ROUGE-L identity");

    const EvalInstance short_hyp{toks("the cat sat"), {toks("the cat sat down")}};
    expect(std::abs(bleu(std::span(&short_hyp, 1)) - std::exp(1.0 - 4.0 / 3.0)) < 1e-6, "BLEU short hypothesis");
    const EvalInstance swapped{toks("a b c d"), {toks("a c b d")}};
    expect(std::abs(rouge_l(swapped) - 0.75) < 1e-6, "ROUGE-L a b c d");
    const std::vector<EvalInstance> two{{toks("a b"), {toks("a b")}}, {toks("a c"), {toks("a c")}}};
    expect(std::abs(nist(two) - 2.5) < 1e-6, "NIST two-sentence corpus");

    Rng rng(5);
    std::normal_distribution<double> noise(0.0, 1.0);
    double worst = 0.0;
    for (int trial = 0; trial < 10; ++trial) {
        const std::size_t n = 1 + static_cast<std::size_t>(trial);
        std::vector<double> a(n), b(n);
        for (std::size_t i = 0; i < n; ++i) {
            a[i] = noise(rng);
            b[i] = noise(rng) + 0.3 * trial;
        }
        const double approx = approximate_randomization(a, b, 10000, static_cast<std::uint64_t>(trial));
        worst = std::max(worst, std::abs(approx - exact_randomization(a, b)));
    }
    expect(worst < 0.02, "AR vs exact enumeration");

    std::string detail = "BLEU/ROUGE-L identity, BLEU/ROUGE-L/NIST hand cases, AR max deviation " +
                         fmt("%.4f", worst) + " over N=1..10";
    for (const auto& f : failures) detail += "; failed: " + f;
    return check(failures.empty(), detail);
}

// ---------------------------------------------------------------- 6

Outcome lr_schedule_check() {
    const TrainConfig config;
    const std::vector<double> expected{0.5, 0.5, 0.5, 0.5, 0.25, 0.25, 0.125, 0.125};
    std::vector<double> got;
    std::string shown;
    for (int e = 1; e <= 8; ++e) {
        got.push_back(lr_schedule(config, e));
        shown += (e > 1 ? ", " : "") + fmt("%g", got.back());
    }
    return check(got == expected, "epochs 1-8: [" + shown + "]");
}

// ---------------------------------------------------------------- 7

Outcome overfit() {
    const auto t0 = std::chrono::steady_clock::now();
    const auto corpus = read_raw_corpus(kToyDir / "train.txt");
    if (corpus.size() != 100) return fail("toy corpus has " + std::to_string(corpus.size()) + " sentences");
    const auto vocab = Vocabulary::build(corpus);

    TrainConfig cfg;
    cfg.hidden = 64;
    cfg.embed = 32;
    cfg.epochs = 50;
    cfg.seed = 7;
    cfg.batch_size = 1;
    cfg.lr_halving_start_epoch = 30;
    cfg.jobs = 1;
    cfg.corruption.count_source = std::make_shared<Vocabulary>(vocab);
    cfg.corruption.count_threshold = 30;
    TrainStreams streams;
    streams.in_domain = corpus;
    const auto result = train(cfg, streams, TrainContext{&vocab});
    const double final_loss = result.trace.back().mean_loss;

    // Fresh filtered-deletion plus shuffle corruptions, independent of the training draws.
    GenerateContext ctx{&result.params, &vocab};
    Rng rng(component_seed(cfg.seed, "acceptance-reconstruction"));
    int exact = 0;
    for (const auto& sentence : corpus) {
        const auto input = corrupt(sentence, cfg.corruption, rng).corrupted;
        const auto text = generate_from_tokens(ctx, input, DecodeConfig{}).front().text;
        if (tokenize(text) == sentence) ++exact;
    }
    const double secs = seconds_since(t0);
    return check(final_loss < 0.1 && exact >= 95 && secs < 600.0,
                 "final loss " + fmt("%.4f", final_loss) + " nats/token, reconstructed " + std::to_string(exact) +
                     "/100, " + fmt("%.1f", secs) + " s single-core");
}

// ---------------------------------------------------------------- 8

Outcome decoding() {
    int beam1_mismatch = 0, beam5_worse = 0;
    std::string worse_cases;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        Dims d;
        d.vocab_src = d.vocab_tgt = 15;
        d.embed = 8;
        d.hidden = 10;
        const auto params = init_params(d.resolved(), seed);
        Rng rng(seed + 500);
        const Source src(random_ids(rng, 15, 1, 8));
        DecodeConfig one;
        one.beam_size = 1;
        const auto g = greedy(params, src, one.max_len);
        if (!(beam_search(params, src, one).front() == g)) ++beam1_mismatch;
        const auto b5 = beam_search(params, src, DecodeConfig{}).front();
        if (b5.log_prob < g.log_prob) {
            ++beam5_worse;
            worse_cases += " [model " + std::to_string(seed) + ": beam " + fmt("%.3f", b5.log_prob) + " vs greedy " +
                           fmt("%.3f", g.log_prob) + (g.finished ? ", greedy finished" : ", greedy unfinished") + "]";
        }
    }

    // Two steps: greedy takes A (0.55) then at best 0.35; B then </s> has 0.405.
    using Prefix = std::vector<int>;
    const int A = 4, B = 5, E = Vocabulary::kEos;
    std::map<Prefix, std::map<int, double>> table{
        {{}, {{A, 0.55}, {B, 0.45}}}, {{A}, {{A, 0.35}, {B, 0.35}, {E, 0.3}}}, {{B}, {{E, 0.9}, {A, 0.1}}}};
    auto step = [&](const Prefix& prefix, int y) {
        Prefix next = prefix;
        if (y != Vocabulary::kBos) next.push_back(y);
        Vector lp = Vector::Constant(6, -std::numeric_limits<double>::infinity());
        if (auto it = table.find(next); it != table.end())
            for (auto [id, p] : it->second) lp[id] = std::log(p);
        return std::pair<Prefix, Vector>(next, lp);
    };
    DecodeConfig two;
    two.beam_size = 2;
    two.max_len = 2;
    const auto g = greedy_search(Prefix{}, step, 2);
    const auto b = beam_search_with(Prefix{}, step, two).front();
    double best = -std::numeric_limits<double>::infinity();
    for (int x : {A, B, E})
        for (int y : {A, B, E}) {
            const auto& first = table[{}];
            double p = first.count(x) ? first.at(x) : 0.0;
            if (x != E) {
                const auto& second = table[{x}];
                p *= second.count(y) ? second.at(y) : 0.0;
            }
            best = std::max(best, std::log(p));
        }
    const bool counterexample = b.log_prob > g.log_prob && std::abs(b.log_prob - best) < 1e-12;

    return check(beam1_mismatch == 0 && beam5_worse == 0 && counterexample,
                 "beam(1) != greedy on " + std::to_string(beam1_mismatch) + "/100, beam(5) below greedy on " +
                     std::to_string(beam5_worse) + "/100" + worse_cases + "; counterexample beam " + fmt("%.4f", std::exp(b.log_prob)) +
                     " vs greedy " + fmt("%.4f", std::exp(g.log_prob)) + " (exhaustive best " +
                     fmt("%.4f", std::exp(best)) + ")");
}

// ---------------------------------------------------------------- 9

int run_cli(std::vector<std::string> args) {
    args.insert(args.begin(), "dnlg");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    return cli::main(static_cast<int>(argv.size()), argv.data(), out, err);
}

std::map<std::string, std::string> tree_contents(const fs::path& root) {
    std::map<std::string, std::string> files;
    for (const auto& entry : fs::recursive_directory_iterator(root))
        if (entry.is_regular_file()) files[fs::relative(entry.path(), root).string()] = read_file(entry.path());
    return files;
}

Outcome determinism() {
    const auto base = fs::temp_directory_path() / "dnlg_acceptance_determinism";
    fs::remove_all(base);
    std::vector<std::map<std::string, std::string>> runs;
    for (const char* name : {"a", "b"}) {
        // Same relative layout in both runs, so recorded paths agree too.
        const int code = run_cli({"run", "--config", (kToyDir / "toy.ini").string(), "--ind",
                                  (kToyDir / "train.txt").string(), "--dev-csv", (kToyDir / "dev.csv").string(),
                                  "--work-dir", (base / name).string(), "--seed", "11"});
        if (code != 0) return fail("pipeline run exited with " + std::to_string(code));
        runs.push_back(tree_contents(base / name));
    }
    std::size_t differing = 0;
    for (const auto& [path, bytes] : runs[0]) {
        auto it = runs[1].find(path);
        if (it == runs[1].end() || it->second != bytes) ++differing;
    }
    const bool has_all = runs[0].count("model/final.ckpt") && runs[0].count("dev.hyp.txt") &&
                         runs[0].count("scores.json");
    const bool ok = has_all && differing == 0 && runs[0].size() == runs[1].size();
    return check(ok, std::to_string(runs[0].size()) + " artifacts compared (checkpoints, generations, scores), " +
                         std::to_string(differing) + " differ");
}

// ---------------------------------------------------------------- 10

Outcome e2e_dataset() {
    const char* dev = std::getenv("E2E_DEV_CSV");
    if (!dev || !fs::exists(dev)) return skip("set E2E_DEV_CSV (and E2E_TRAIN_CSV) to the E2E dev/train CSVs");

    const auto examples = read_labeled_csv(dev);
    std::vector<MeaningRepresentation> mrs;
    std::vector<EvalInstance> instances;
    for (const auto& ex : examples) mrs.push_back(ex.mr);
    const auto copy = copy_input_baseline(mrs);
    for (std::size_t i = 0; i < examples.size(); ++i)
        instances.push_back(EvalInstance{tokenize(copy[i]), examples[i].references});
    const auto base = score(instances);
    const double b = 100 * base.bleu, r = 100 * base.rouge_l, n = base.nist;
    const bool baseline_ok = std::abs(b - 27.7) <= 0.5 && std::abs(r - 56.4) <= 0.5 && std::abs(n - 3.2) <= 0.1;
    std::string detail = "copy input BLEU " + fmt("%.2f", b) + " ROUGE_L " + fmt("%.2f", r) + " NIST " +
                         fmt("%.2f", n) + " (target 27.7/56.4/3.2)";

    const char* train_csv = std::getenv("E2E_TRAIN_CSV");
    if (!train_csv || !fs::exists(train_csv))
        return baseline_ok ? skip(detail + "; model part needs E2E_TRAIN_CSV") : fail(detail);

    const char* epochs_env = std::getenv("E2E_EPOCHS");
    const int epochs = std::max(10, epochs_env ? std::atoi(epochs_env) : 10);
    cli::RunOptions run;
    run.train_csv = train_csv;
    run.dev_csv = dev;
    run.work_dir = fs::temp_directory_path() / "dnlg_acceptance_e2e";
    run.train.config.mode = TrainMode::kUnsupervised;
    run.train.config.epochs = epochs;
    run.train.config.seed = 1;
    run.train.config.jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    run.train.config.corruption.enable_frequency_filter = true;
    std::ostringstream log;
    const auto model = cli::run_pipeline(run, log);
    detail += "; model BLEU " + fmt("%.2f", 100 * model.bleu) + " after " + std::to_string(epochs) + " epochs";
    return check(baseline_ok && model.bleu > base.bleu, detail);
}

}  // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
        {"gradient correctness", gradient_check},
        {"normalization invariants", normalization},
        {"corruption statistics", corruption_statistics},
        {"worked corruption example", worked_example},
        {"metric oracles", metric_oracles},
        {"learning-rate schedule", lr_schedule_check},
        {"overfit/reconstruction", overfit},
        {"decoding", decoding},
        {"determinism", determinism},
        {"E2E dataset (optional)", e2e_dataset},
    };
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = fail(std::string("exception: ") + e.what());
        }
        const char* tag = o.kind == Outcome::kPass ? "PASS" : o.kind == Outcome::kFail ? "FAIL" : "SKIP";
        if (o.kind == Outcome::kFail) ++failures;
        std::cout << "[" << tag << "] criterion " << i + 1 << " " << criteria[i].first << ": " << o.detail
                  << std::endl;
    }
    std::cout << (failures ? "acceptance: FAILED (" + std::to_string(failures) + ")" : "acceptance: all passed")
              << std::endl;
    return failures ? 1 : 0;
}
