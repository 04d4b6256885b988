#include "dnlg/cli/pipeline.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <iostream>
#include <memory>
#include <set>
#include <sstream>
#include <thread>

#include "dnlg/corruption/corruption.hpp"
#include "dnlg/data/bpe.hpp"
#include "dnlg/data/corpus_io.hpp"
#include "dnlg/data/tokenizer.hpp"
#include "dnlg/data/vocabulary.hpp"
#include "dnlg/errors.hpp"
#include "dnlg/eval/significance.hpp"
#include "dnlg/model/checkpoint.hpp"
#include "dnlg/util/file_io.hpp"

namespace dnlg::cli {

namespace {

using json = nlohmann::json;

std::string fixed(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

std::string lowercase(std::string s) {
    for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

std::string join_lines(std::span<const std::string> lines) {
    std::string out;
    for (const auto& l : lines) out += l + "\n";
    return out;
}

std::string tokenized_text(std::span<const TokenSequence> corpus) {
    std::string out;
    for (const auto& s : corpus) out += join_tokens(s) + "\n";
    return out;
}

std::string_view to_string(BooleanNoPolicy p) { return p == BooleanNoPolicy::kOmit ? "omit" : "negate"; }

BooleanNoPolicy parse_boolean_no(std::string_view s) {
    if (s == "omit") return BooleanNoPolicy::kOmit;
    if (s == "negate") return BooleanNoPolicy::kNegate;
    throw ConfigError("unknown boolean-no policy '" + std::string(s) + "'");
}

Vocabulary slot_vocabulary(std::span<const LabeledExample> labeled) {
    std::vector<TokenSequence> names;
    for (const auto& ex : labeled) {
        TokenSequence seq;
        for (const auto& slot : ex.mr.slots) seq.push_back(slot.name);
        names.push_back(std::move(seq));
    }
    return Vocabulary::build(names);
}

void require_file(const fs::path& path, const char* what) {
    if (path.empty()) throw ConfigError(std::string(what) + " is required");
}

std::vector<LabeledExample> read_csv_with_refs(const fs::path& path) {
    auto examples = read_labeled_csv(path);
    if (examples.empty()) throw DataError(path.string() + ": no rows");
    return examples;
}

}  // namespace

// ---------------------------------------------------------------- prepare

void prepare(const PrepareOptions& options, std::ostream& log) {
    require_file(options.out_dir, "output directory");
    if (options.ind.empty() && options.csv.empty()) throw ConfigError("prepare needs --ind or --csv input");
    if (options.max_len < 1) throw ConfigError("max length must be at least 1");

    json manifest;
    manifest["tool"] = "dnlg";
    manifest["version"] = kToolVersion;
    manifest["seed"] = options.seed;
    manifest["max_len"] = options.max_len;
    manifest["bpe_merges"] = options.bpe_merges ? json(*options.bpe_merges) : json(nullptr);
    manifest["vocab_size"] = options.vocab_size ? json(*options.vocab_size) : json(nullptr);
    json inputs = json::array();
    auto record_input = [&](const fs::path& p, const char* kind) {
        inputs.push_back({{"kind", kind}, {"path", p.string()}, {"fnv1a64", hex64(file_hash(p))}});
    };

    std::vector<TokenSequence> ind, ood;
    std::vector<LabeledExample> labeled;
    for (const auto& p : options.ind) {
        auto c = read_raw_corpus(p);
        ind.insert(ind.end(), c.begin(), c.end());
        record_input(p, "ind");
    }
    for (const auto& p : options.csv) {
        auto ex = read_csv_with_refs(p);
        for (const auto& e : ex) ind.insert(ind.end(), e.references.begin(), e.references.end());
        labeled.insert(labeled.end(), ex.begin(), ex.end());
        record_input(p, "csv");
    }
    for (const auto& p : options.ood) {
        auto c = read_raw_corpus(p);
        ood.insert(ood.end(), c.begin(), c.end());
        record_input(p, "ood");
    }
    manifest["inputs"] = inputs;

    const auto ind_kept = filter_by_length(ind, options.max_len);
    const auto ood_kept = filter_by_length(ood, options.max_len);
    manifest["sentences"] = {{"ind", {{"read", ind.size()}, {"kept", ind_kept.size()}}},
                             {"ood", {{"read", ood.size()}, {"kept", ood_kept.size()}}}};
    log << "prepare: in-domain " << ind_kept.size() << "/" << ind.size() << " sentences kept, out-of-domain "
        << ood_kept.size() << "/" << ood.size() << "\n";
    if (ind_kept.empty()) throw DataError("no in-domain sentences left after filtering");

    fs::create_directories(options.out_dir);
    std::map<std::string, std::string> outputs;
    auto write = [&](const std::string& name, const std::string& content) {
        write_file_atomic(options.out_dir / name, content);
        outputs[name] = hex64(fnv1a(content));
    };

    write("ind.txt", tokenized_text(ind_kept));
    write("counts_ind.txt", Vocabulary::build(ind_kept).serialize());
    if (!ood_kept.empty()) {
        write("ood.txt", tokenized_text(ood_kept));
        write("counts_ood.txt", Vocabulary::build(ood_kept).serialize());
    }

    // MR inputs join the vocabulary so slot values are never unknown.
    std::vector<TokenSequence> mr_inputs;
    for (const auto& ex : labeled) mr_inputs.push_back(linearize_mr(ex.mr));

    std::vector<TokenSequence> vocab_corpus;
    if (options.bpe_merges) {
        std::vector<TokenSequence> all(ind_kept);
        all.insert(all.end(), ood_kept.begin(), ood_kept.end());
        const auto bpe = bpe_train(all, *options.bpe_merges);
        bpe.save(options.out_dir / kBpeFile);
        outputs[kBpeFile] = hex64(file_hash(options.out_dir / kBpeFile));
        const auto ind_bpe = bpe_apply(bpe, std::span<const TokenSequence>(ind_kept));
        const auto ood_bpe = bpe_apply(bpe, std::span<const TokenSequence>(ood_kept));
        write("ind.bpe.txt", tokenized_text(ind_bpe));
        if (!ood_bpe.empty()) write("ood.bpe.txt", tokenized_text(ood_bpe));
        vocab_corpus = ind_bpe;
        vocab_corpus.insert(vocab_corpus.end(), ood_bpe.begin(), ood_bpe.end());
        const auto mr_bpe = bpe_apply(bpe, std::span<const TokenSequence>(mr_inputs));
        vocab_corpus.insert(vocab_corpus.end(), mr_bpe.begin(), mr_bpe.end());
    } else {
        vocab_corpus = ind_kept;
        vocab_corpus.insert(vocab_corpus.end(), ood_kept.begin(), ood_kept.end());
        vocab_corpus.insert(vocab_corpus.end(), mr_inputs.begin(), mr_inputs.end());
    }
    const auto vocab = Vocabulary::build(vocab_corpus, options.vocab_size);
    write(kVocabFile, vocab.serialize());
    if (!labeled.empty()) write(kSlotVocabFile, slot_vocabulary(labeled).serialize());
    log << "prepare: vocabulary of " << vocab.size() << " entries\n";

    manifest["outputs"] = outputs;
    write_file_atomic(options.out_dir / "manifest.json", manifest.dump(2) + "\n");
}

// ---------------------------------------------------------------- train

TrainResult train_model(const TrainOptions& options, std::ostream& log) {
    TrainConfig config = options.config;
    require_file(config.checkpoint_dir, "checkpoint directory");
    if (config.epochs < 1) throw ConfigError("epochs must be at least 1");

    TrainStreams streams;
    if (!options.ind_corpus.empty()) streams.in_domain = read_tokenized_corpus(options.ind_corpus);
    if (!options.ood_corpus.empty()) streams.out_of_domain = read_tokenized_corpus(options.ood_corpus);
    if (!options.labeled_csv.empty()) streams.labeled = read_csv_with_refs(options.labeled_csv);
    if (config.mode == TrainMode::kUnsupervised && streams.in_domain.empty() && streams.out_of_domain.empty())
        throw ConfigError("unsupervised training needs --ind-corpus or --ood-corpus");
    if (config.mode != TrainMode::kUnsupervised && streams.labeled.empty())
        throw ConfigError(std::string(dnlg::to_string(config.mode)) + " training needs --labeled");
    for (const auto& ex : streams.labeled)
        if (ex.references.empty()) throw DataError(options.labeled_csv.string() + ": labeled rows need a ref column");

    if (config.mode != TrainMode::kSupervised && config.corruption.enable_frequency_filter) {
        if (options.counts_from == "ind") {
            if (streams.in_domain.empty()) throw ConfigError("--counts-from ind needs --ind-corpus");
            config.corruption.count_source = std::make_shared<Vocabulary>(Vocabulary::build(streams.in_domain));
        } else if (options.counts_from == "ood") {
            if (streams.out_of_domain.empty()) throw ConfigError("--counts-from ood needs --ood-corpus");
            config.corruption.count_source = std::make_shared<Vocabulary>(Vocabulary::build(streams.out_of_domain));
        } else if (options.counts_from == "file") {
            require_file(options.counts_file, "--counts-file");
            config.corruption.count_source = std::make_shared<Vocabulary>(Vocabulary::load(options.counts_file));
        } else {
            throw ConfigError("unknown counts source '" + options.counts_from + "'");
        }
    }

    std::optional<BpeModel> bpe;
    if (!options.bpe_model.empty()) bpe = BpeModel::load(options.bpe_model);

    Vocabulary vocab;
    if (!options.vocab.empty()) {
        vocab = Vocabulary::load(options.vocab);
    } else {
        std::vector<TokenSequence> all(streams.in_domain);
        all.insert(all.end(), streams.out_of_domain.begin(), streams.out_of_domain.end());
        for (const auto& ex : streams.labeled) {
            all.insert(all.end(), ex.references.begin(), ex.references.end());
            all.push_back(labeled_input(ex.mr, config.mode == TrainMode::kSupervised ? TrainMode::kSupervised
                                                                                      : TrainMode::kSemiSupervised,
                                        config.linearize)
                              .input);
        }
        if (bpe) all = bpe_apply(*bpe, std::span<const TokenSequence>(all));
        vocab = Vocabulary::build(all);
    }

    std::optional<Vocabulary> slot_vocab;
    if (config.mode == TrainMode::kSupervised)
        slot_vocab = options.slot_vocab.empty() ? slot_vocabulary(streams.labeled) : Vocabulary::load(options.slot_vocab);

    TrainContext context;
    context.vocab = &vocab;
    context.slot_vocab = slot_vocab ? &*slot_vocab : nullptr;
    context.bpe = bpe ? &*bpe : nullptr;
    context.metadata["boolean_no"] = std::string(to_string(config.linearize.boolean_no));
    context.metadata["bpe"] = bpe ? hex64(file_hash(options.bpe_model)) : "none";
    context.on_epoch = [&log](const EpochStats& s) {
        log << "epoch " << s.epoch << "  lr " << s.lr << "  loss " << fixed(s.mean_loss, 4) << "  examples "
            << s.examples;
        if (s.clipped_batches) log << "  clipped " << s.clipped_batches;
        log << "\n";
    };

    fs::create_directories(config.checkpoint_dir);
    vocab.save(config.checkpoint_dir / kVocabFile);
    if (slot_vocab) slot_vocab->save(config.checkpoint_dir / kSlotVocabFile);
    if (bpe) bpe->save(config.checkpoint_dir / kBpeFile);

    log << "train: mode " << dnlg::to_string(config.mode) << ", vocabulary " << vocab.size() << ", "
        << streams.in_domain.size() << " in-domain, " << streams.out_of_domain.size() << " out-of-domain, "
        << streams.labeled.size() << " labeled\n";
    return train(config, streams, context);
}

// ---------------------------------------------------------------- generate

std::vector<std::string> generate_texts(const GenerateOptions& options, std::ostream& out, std::ostream& log) {
    require_file(options.input_csv, "--input");
    options.decode.validate();
    if (options.jobs < 1) throw ConfigError("jobs must be at least 1");
    const auto examples = read_labeled_csv(options.input_csv);
    if (examples.empty()) throw DataError(options.input_csv.string() + ": no rows");
    std::vector<MeaningRepresentation> mrs;
    for (const auto& ex : examples) mrs.push_back(ex.mr);

    std::vector<std::string> lines;
    if (options.copy_input) {
        lines = copy_input_baseline(mrs, LinearizeOptions{options.boolean_no});
    } else {
        require_file(options.model_dir, "--model-dir");
        const auto ckpt = load_checkpoint(options.checkpoint.empty() ? options.model_dir / kFinalCheckpoint
                                                                     : options.checkpoint);
        const auto vocab = Vocabulary::load(options.model_dir / kVocabFile);
        if (auto it = ckpt.metadata.find("vocab_hash");
            it != ckpt.metadata.end() && it->second != hex64(vocab.content_hash()))
            throw DataError("checkpoint was trained with a different vocabulary");
        std::optional<BpeModel> bpe;
        if (fs::exists(options.model_dir / kBpeFile)) bpe = BpeModel::load(options.model_dir / kBpeFile);
        std::optional<Vocabulary> slot_vocab;
        if (ckpt.params.dims.split_embedding) slot_vocab = Vocabulary::load(options.model_dir / kSlotVocabFile);

        GenerateContext ctx;
        ctx.params = &ckpt.params;
        ctx.vocab = &vocab;
        ctx.slot_vocab = slot_vocab ? &*slot_vocab : nullptr;
        ctx.bpe = bpe ? &*bpe : nullptr;
        ctx.linearize.boolean_no = options.boolean_no;
        if (auto it = ckpt.metadata.find("boolean_no"); it != ckpt.metadata.end())
            ctx.linearize.boolean_no = parse_boolean_no(it->second);

        const std::size_t k = std::max<std::size_t>(options.nbest, 1);
        std::vector<std::vector<Generation>> results(mrs.size());
        std::vector<std::exception_ptr> errors(static_cast<std::size_t>(options.jobs));
        std::vector<std::thread> workers;
        for (int w = 0; w < options.jobs; ++w) {
            workers.emplace_back([&, w] {
                try {
                    for (std::size_t i = static_cast<std::size_t>(w); i < mrs.size();
                         i += static_cast<std::size_t>(options.jobs))
                        results[i] = generate_nbest(ctx, mrs[i], options.decode, k);
                } catch (...) {
                    errors[static_cast<std::size_t>(w)] = std::current_exception();
                }
            });
        }
        for (auto& t : workers) t.join();
        for (auto& e : errors)
            if (e) std::rethrow_exception(e);

        std::size_t unfinished = 0;
        for (const auto& list : results) {
            if (!list.front().finished) ++unfinished;
            if (options.nbest == 0) {
                lines.push_back(list.front().text);
            } else {
                for (std::size_t r = 0; r < list.size(); ++r)
                    lines.push_back(std::to_string(r + 1) + "\t" + fixed(list[r].score, 6) + "\t" + list[r].text);
            }
        }
        if (unfinished)
            log << "warning: " << unfinished << " of " << mrs.size() << " outputs hit max length without </s>\n";
    }

    if (options.output.empty())
        out << join_lines(lines);
    else
        write_file_atomic(options.output, join_lines(lines));
    if (!options.refs_out.empty()) write_reference_groups(options.refs_out, examples);
    return lines;
}

// ---------------------------------------------------------------- evaluate

std::vector<EvalInstance> load_eval_instances(const fs::path& hyp, const fs::path& refs, bool lower) {
    auto prep = [lower](const std::string& line) { return tokenize(lower ? lowercase(line) : line); };
    const auto hyp_lines = read_lines(hyp);
    const auto groups = read_reference_groups(refs);
    if (hyp_lines.size() != groups.size())
        throw DataError(hyp.string() + " has " + std::to_string(hyp_lines.size()) + " lines but " + refs.string() +
                        " has " + std::to_string(groups.size()) + " reference groups");
    std::vector<EvalInstance> instances;
    for (std::size_t i = 0; i < hyp_lines.size(); ++i) {
        EvalInstance inst{prep(hyp_lines[i]), {}};
        for (const auto& ref : groups[i]) inst.references.push_back(prep(join_tokens(ref)));
        instances.push_back(std::move(inst));
    }
    return instances;
}

std::string report_json(const ScoreReport& r) {
    json j;
    j["bleu"] = r.bleu;
    j["rouge_l"] = r.rouge_l;
    j["nist"] = r.nist;
    j["bleu_x100"] = 100.0 * r.bleu;
    j["rouge_l_x100"] = 100.0 * r.rouge_l;
    j["instances"] = r.instances;
    j["references"] = r.references;
    j["bleu_stats"] = {{"max_n", r.bleu_detail.max_n},
                       {"matches", r.bleu_detail.matches},
                       {"totals", r.bleu_detail.totals},
                       {"hyp_length", r.bleu_detail.hyp_length},
                       {"ref_length", r.bleu_detail.ref_length},
                       {"brevity_penalty", r.bleu_detail.brevity_penalty}};
    j["nist_stats"] = {{"max_n", r.nist_detail.max_n},
                       {"info", r.nist_detail.info},
                       {"totals", r.nist_detail.totals},
                       {"hyp_length", r.nist_detail.hyp_length},
                       {"ref_length", r.nist_detail.ref_length},
                       {"brevity_penalty", r.nist_detail.brevity_penalty}};
    return j.dump(2) + "\n";
}

namespace {

std::string scores_tsv(const ScoreReport& r) {
    return "BLEU\tROUGE_L\tNIST\n" + fixed(r.bleu, 6) + "\t" + fixed(r.rouge_l, 6) + "\t" + fixed(r.nist, 6) + "\n";
}

void log_scores(const ScoreReport& r, std::ostream& log, const char* label) {
    log << label << "BLEU " << fixed(100 * r.bleu, 2) << "  ROUGE_L " << fixed(100 * r.rouge_l, 2) << "  NIST "
        << fixed(r.nist, 2) << "  (BLEU and ROUGE_L x100)\n";
}

}  // namespace

ScoreReport evaluate_files(const EvaluateOptions& options, std::ostream& out, std::ostream& log) {
    require_file(options.hyp, "--hyp");
    require_file(options.refs, "--refs");
    const auto instances = load_eval_instances(options.hyp, options.refs, options.lowercase);
    ScoreReport report;
    if (instances.empty()) {
        log << "warning: empty hypothesis set; all scores are 0\n";
    } else {
        report = score(instances);
    }
    out << scores_tsv(report);
    log_scores(report, log, "");
    if (!options.report.empty()) write_file_atomic(options.report, report_json(report));
    return report;
}

double significance(const SignificanceOptions& options) {
    require_file(options.a, "--a");
    require_file(options.b, "--b");
    require_file(options.refs, "--refs");
    const auto a = load_eval_instances(options.a, options.refs, options.lowercase);
    const auto b = load_eval_instances(options.b, options.refs, options.lowercase);
    std::vector<double> sa, sb;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (options.metric == "bleu") {
            sa.push_back(sentence_bleu(a[i]));
            sb.push_back(sentence_bleu(b[i]));
        } else if (options.metric == "rouge_l") {
            sa.push_back(rouge_l(a[i]));
            sb.push_back(rouge_l(b[i]));
        } else {
            throw ConfigError("unknown metric '" + options.metric + "'");
        }
    }
    return approximate_randomization(sa, sb, options.rounds, options.seed);
}

// ---------------------------------------------------------------- run

ScoreReport run_pipeline(const RunOptions& options, std::ostream& log) {
    require_file(options.work_dir, "--work-dir");
    require_file(options.dev_csv, "--dev-csv");
    const auto data_dir = options.work_dir / "data";
    const auto model_dir = options.work_dir / "model";
    const bool unsupervised = options.train.config.mode == TrainMode::kUnsupervised;

    auto stage = [&log](const char* name, auto&& fn) {
        log << "== " << name << "\n";
        try {
            return fn();
        } catch (const DivergenceError& e) {
            throw DivergenceError(std::string(name) + ": " + e.what());
        } catch (const ConfigError& e) {
            throw ConfigError(std::string(name) + ": " + e.what());
        } catch (const std::exception& e) {
            throw DataError(std::string(name) + ": " + e.what());
        }
    };

    stage("prepare", [&] {
        PrepareOptions p = options.prepare;
        p.out_dir = data_dir;
        if (!options.train_csv.empty()) p.csv.push_back(options.train_csv);
        prepare(p, log);
        return 0;
    });

    stage("train", [&] {
        TrainOptions t = options.train;
        t.ind_corpus = data_dir / "ind.txt";
        if (fs::exists(data_dir / "ood.txt")) t.ood_corpus = data_dir / "ood.txt";
        if (!unsupervised) t.labeled_csv = options.train_csv;
        t.vocab = data_dir / kVocabFile;
        if (fs::exists(data_dir / kBpeFile)) t.bpe_model = data_dir / kBpeFile;
        if (fs::exists(data_dir / kSlotVocabFile)) t.slot_vocab = data_dir / kSlotVocabFile;
        if (t.config.mode == TrainMode::kSupervised) t.ind_corpus.clear(), t.ood_corpus.clear();
        t.config.checkpoint_dir = model_dir;
        t.config.linearize.boolean_no = options.boolean_no;
        train_model(t, log);
        return 0;
    });

    const auto hyp = options.work_dir / "dev.hyp.txt";
    const auto refs = options.work_dir / "dev.refs.txt";
    stage("generate", [&] {
        GenerateOptions g;
        g.model_dir = model_dir;
        g.input_csv = options.dev_csv;
        g.output = hyp;
        g.refs_out = refs;
        g.decode = options.decode;
        g.boolean_no = options.boolean_no;
        g.jobs = options.train.config.jobs;
        std::ostringstream sink;
        generate_texts(g, sink, log);

        g.copy_input = true;
        g.output = options.work_dir / "dev.copy_input.txt";
        g.refs_out.clear();
        generate_texts(g, sink, log);
        return 0;
    });

    return stage("evaluate", [&] {
        const auto report = score(load_eval_instances(hyp, refs, options.lowercase));
        const auto baseline =
            score(load_eval_instances(options.work_dir / "dev.copy_input.txt", refs, options.lowercase));
        write_file_atomic(options.work_dir / "scores.tsv", scores_tsv(report));
        write_file_atomic(options.work_dir / "scores.json", report_json(report));
        write_file_atomic(options.work_dir / "scores.copy_input.json", report_json(baseline));
        log_scores(report, log, "model:      ");
        log_scores(baseline, log, "copy input: ");
        return report;
    });
}

// ---------------------------------------------------------------- command line

namespace {

struct CorruptionFlags {
    double rate_mean = 0.6;
    double rate_variance = 0.1;
    double rate_min = 0.05;
    double rate_max = 0.95;
    std::int64_t threshold = 100;
    bool no_shuffle = false;
    bool no_freq_filter = false;

    CorruptionConfig to_config(std::uint64_t seed) const {
        CorruptionConfig c;
        c.rate_mean = rate_mean;
        c.rate_variance = rate_variance;
        c.rate_clamp_low = rate_min;
        c.rate_clamp_high = rate_max;
        c.count_threshold = threshold;
        c.enable_shuffle = !no_shuffle;
        c.enable_frequency_filter = !no_freq_filter;
        c.seed = seed;
        return c;
    }
};

void add_corruption_flags(CLI::App* app, CorruptionFlags& f) {
    app->add_option("--rate-mean", f.rate_mean, "Mean of the sampled deletion rate");
    app->add_option("--rate-variance", f.rate_variance, "Variance of the sampled deletion rate");
    app->add_option("--rate-min", f.rate_min, "Lower clamp for the sampled deletion rate");
    app->add_option("--rate-max", f.rate_max, "Upper clamp for the sampled deletion rate");
    app->add_option("--threshold", f.threshold,
                    "Only words counted more than this many times may be deleted");
    app->add_flag("--no-shuffle", f.no_shuffle, "Keep the word order of corrupted inputs");
    app->add_flag("--no-freq-filter", f.no_freq_filter, "Delete words regardless of their counts");
}

struct TrainFlags {
    std::string mode = "unsupervised";
    std::string boolean_no = "omit";
    std::optional<std::size_t> ood_cap;
    CorruptionFlags corruption;
};

void add_train_flags(CLI::App* app, TrainOptions& t, TrainFlags& f, bool with_counts) {
    auto& c = t.config;
    app->add_option("--mode", f.mode, "Training mode")
        ->check(CLI::IsMember({"unsupervised", "supervised", "semi_supervised"}));
    if (with_counts) {
        app->add_option("--counts-from", t.counts_from, "Word counts for --threshold: ind, ood or file")
            ->check(CLI::IsMember({"ind", "ood", "file"}));
        app->add_option("--counts-file", t.counts_file, "Count file (vocabulary format) for --counts-from file");
    }
    app->add_option("--epochs", c.epochs, "Training epochs")->required();
    app->add_option("--batch-size", c.batch_size, "Minibatch size");
    app->add_option("--seed", c.seed, "Root random seed");
    app->add_option("--lr", c.initial_lr, "Initial learning rate");
    app->add_option("--lr-halving-start", c.lr_halving_start_epoch, "First epoch with a halved rate");
    app->add_option("--lr-halving-period", c.lr_halving_period, "Epochs between halvings");
    app->add_option("--clip-norm", c.clip_norm, "Global gradient norm limit; 0 disables");
    app->add_option("--hidden", c.hidden, "GRU state size");
    app->add_option("--embed", c.embed, "Word embedding size");
    app->add_option("--attn-hidden", c.attn_hidden, "Attention layer size; 0 means --hidden");
    app->add_option("--out-hidden", c.out_hidden, "Output layer size; 0 means --embed");
    app->add_flag("--tie-embeddings", c.tie_embeddings, "Share source and target embeddings");
    app->add_option("--ood-cap", f.ood_cap, "Out-of-domain sentences drawn per epoch (default: all)");
    app->add_option("--jobs", c.jobs, "Worker threads for gradients");
    app->add_option("--boolean-no", f.boolean_no, "Boolean slots with value no: omit or negate")
        ->check(CLI::IsMember({"omit", "negate"}));
    add_corruption_flags(app, f.corruption);
}

void finish_train_flags(TrainOptions& t, const TrainFlags& f) {
    t.config.mode = parse_train_mode(f.mode);
    t.config.linearize.boolean_no = parse_boolean_no(f.boolean_no);
    t.config.ood_cap = f.ood_cap;
    t.config.corruption = f.corruption.to_config(t.config.seed);
}

void add_decode_flags(CLI::App* app, DecodeConfig& d) {
    app->add_option("--beam", d.beam_size, "Beam size");
    app->add_option("--max-len", d.max_len, "Maximum output tokens");
    app->add_flag("--length-norm", d.length_normalization, "Rank hypotheses by per-token log-probability");
}

int fail(std::ostream& err, const std::string& msg, int code) {
    err << "error: " << msg << "\n";
    return code;
}

}  // namespace

int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Denoising autoencoder for generating text from slot-value data", "dnlg"};
    app.option_defaults()->always_capture_default();
    app.require_subcommand(1);
    app.fallthrough();
    app.set_config("--config", "", "INI or TOML file with option values; command-line flags take precedence");
    app.allow_config_extras(CLI::config_extras_mode::error);
    app.set_version_flag("--version", kToolVersion);

    // prepare
    PrepareOptions prep;
    std::optional<std::size_t> prep_bpe, prep_vocab;
    auto* prep_cmd = app.add_subcommand("prepare", "Tokenize, filter and segment corpora; build vocabularies");
    prep_cmd->add_option("--ind", prep.ind, "In-domain raw text files, one sentence per line");
    prep_cmd->add_option("--ood", prep.ood, "Out-of-domain raw text files");
    prep_cmd->add_option("--csv", prep.csv, "Labeled CSV files (mr,ref); references count as in-domain text");
    prep_cmd->add_option("--out", prep.out_dir, "Output directory")->required();
    prep_cmd->add_option("--filter-len", prep.max_len, "Drop sentences longer than this many tokens");
    prep_cmd->add_option("--bpe-merges", prep_bpe, "Learn this many BPE merges (default: no BPE)");
    prep_cmd->add_option("--vocab-size", prep_vocab, "Keep only the most frequent tokens (default: all)");
    prep_cmd->add_option("--seed", prep.seed, "Recorded in the manifest");

    // corrupt
    fs::path corrupt_in, corrupt_out, corrupt_counts;
    CorruptionFlags corrupt_flags;
    std::uint64_t corrupt_seed = 0;
    int corrupt_epoch = 1;
    auto* corrupt_cmd = app.add_subcommand("corrupt", "Write one corrupted version of each sentence");
    corrupt_cmd->add_option("--input", corrupt_in, "Tokenized corpus")->required();
    corrupt_cmd->add_option("--output", corrupt_out, "Output file (default: stdout)");
    corrupt_cmd->add_option("--counts", corrupt_counts, "Count file (default: counts from --input)");
    corrupt_cmd->add_option("--seed", corrupt_seed, "Root random seed");
    corrupt_cmd->add_option("--epoch", corrupt_epoch, "Epoch whose corruption to reproduce");
    add_corruption_flags(corrupt_cmd, corrupt_flags);

    // train
    TrainOptions train_opts;
    TrainFlags train_flags;
    auto* train_cmd = app.add_subcommand("train", "Train a model");
    train_cmd->add_option("--ind-corpus", train_opts.ind_corpus, "In-domain tokenized corpus");
    train_cmd->add_option("--ood-corpus", train_opts.ood_corpus, "Out-of-domain tokenized corpus");
    train_cmd->add_option("--labeled", train_opts.labeled_csv, "Labeled CSV (mr,ref) for supervised modes");
    train_cmd->add_option("--vocab", train_opts.vocab, "Vocabulary file (default: built from the data)");
    train_cmd->add_option("--bpe", train_opts.bpe_model, "BPE model applied to every input and target");
    train_cmd->add_option("--slot-vocab", train_opts.slot_vocab, "Slot-name vocabulary for supervised mode");
    train_cmd->add_option("--checkpoint-dir", train_opts.config.checkpoint_dir, "Model output directory")
        ->required();
    add_train_flags(train_cmd, train_opts, train_flags, true);

    // generate
    GenerateOptions gen;
    std::string gen_boolean_no = "omit";
    auto* gen_cmd = app.add_subcommand("generate", "Generate one sentence per meaning representation");
    gen_cmd->add_option("--model-dir", gen.model_dir, "Directory written by train");
    gen_cmd->add_option("--checkpoint", gen.checkpoint, "Checkpoint (default: MODEL_DIR/final.ckpt)");
    gen_cmd->add_option("--input", gen.input_csv, "CSV with an mr column")->required();
    gen_cmd->add_option("--output", gen.output, "Output file (default: stdout)");
    gen_cmd->add_option("--refs-out", gen.refs_out, "Also write the CSV's references, grouped by MR");
    gen_cmd->add_option("--nbest", gen.nbest, "Write the K best as rank<TAB>score<TAB>text (0: best only)");
    gen_cmd->add_flag("--copy-input", gen.copy_input, "Output the linearized input (copy baseline)");
    gen_cmd->add_option("--boolean-no", gen_boolean_no, "Boolean slots with value no, for --copy-input")
        ->check(CLI::IsMember({"omit", "negate"}));
    gen_cmd->add_option("--jobs", gen.jobs, "Worker threads");
    add_decode_flags(gen_cmd, gen.decode);

    // evaluate
    EvaluateOptions eval;
    auto* eval_cmd = app.add_subcommand("evaluate", "Score hypotheses with BLEU, ROUGE-L and NIST");
    eval_cmd->add_option("--hyp", eval.hyp, "Hypotheses, one per line")->required();
    eval_cmd->add_option("--refs", eval.refs, "References, one per line, groups separated by blank lines")
        ->required();
    eval_cmd->add_option("--report", eval.report, "Write a JSON audit report here");
    eval_cmd->add_flag("--lowercase", eval.lowercase, "Lowercase both sides before scoring");

    // significance
    SignificanceOptions sig;
    auto* sig_cmd = app.add_subcommand("significance", "Approximate randomization test between two systems");
    sig_cmd->add_option("--a", sig.a, "Hypotheses of system A")->required();
    sig_cmd->add_option("--b", sig.b, "Hypotheses of system B")->required();
    sig_cmd->add_option("--refs", sig.refs, "Grouped references")->required();
    sig_cmd->add_option("--metric", sig.metric, "Per-sentence metric")->check(CLI::IsMember({"bleu", "rouge_l"}));
    sig_cmd->add_option("--rounds", sig.rounds, "Randomization rounds");
    sig_cmd->add_option("--seed", sig.seed, "Random seed");
    sig_cmd->add_flag("--lowercase", sig.lowercase, "Lowercase both sides before scoring");

    // run
    RunOptions run;
    TrainFlags run_flags;
    std::optional<std::size_t> run_bpe, run_vocab;
    auto* run_cmd = app.add_subcommand("run", "prepare, train, generate and evaluate in one go");
    run_cmd->add_option("--ind", run.prepare.ind, "In-domain raw text files");
    run_cmd->add_option("--ood", run.prepare.ood, "Out-of-domain raw text files");
    run_cmd->add_option("--train-csv", run.train_csv, "Labeled training CSV (also in-domain text)");
    run_cmd->add_option("--dev-csv", run.dev_csv, "Development CSV to generate for and score")->required();
    run_cmd->add_option("--work-dir", run.work_dir, "Directory for every artifact")->required();
    run_cmd->add_option("--filter-len", run.prepare.max_len, "Drop sentences longer than this");
    run_cmd->add_option("--bpe-merges", run_bpe, "Learn this many BPE merges (default: no BPE)");
    run_cmd->add_option("--vocab-size", run_vocab, "Keep only the most frequent tokens (default: all)");
    run_cmd->add_flag("--lowercase", run.lowercase, "Lowercase both sides before scoring");
    add_train_flags(run_cmd, run.train, run_flags, true);
    DecodeConfig run_decode;
    add_decode_flags(run_cmd, run_decode);

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return 1;
    }

    try {
        if (*prep_cmd) {
            prep.bpe_merges = prep_bpe;
            prep.vocab_size = prep_vocab;
            prepare(prep, err);
        } else if (*corrupt_cmd) {
            const auto corpus = read_tokenized_corpus(corrupt_in);
            auto cfg = corrupt_flags.to_config(corrupt_seed);
            if (cfg.enable_frequency_filter)
                cfg.count_source = std::make_shared<Vocabulary>(corrupt_counts.empty() ? Vocabulary::build(corpus)
                                                                                      : Vocabulary::load(corrupt_counts));
            cfg.validate();
            std::vector<TokenSequence> corrupted;
            for (auto& p : make_epoch_corpus(corpus, cfg, corrupt_epoch, corrupt_seed)) corrupted.push_back(p.input);
            if (corrupt_out.empty())
                out << tokenized_text(corrupted);
            else
                write_file_atomic(corrupt_out, tokenized_text(corrupted));
        } else if (*train_cmd) {
            finish_train_flags(train_opts, train_flags);
            const auto result = train_model(train_opts, err);
            if (!result.trace.empty())
                err << "train: final loss " << fixed(result.trace.back().mean_loss, 4) << " nats/token\n";
        } else if (*gen_cmd) {
            gen.boolean_no = parse_boolean_no(gen_boolean_no);
            generate_texts(gen, out, err);
        } else if (*eval_cmd) {
            evaluate_files(eval, out, err);
        } else if (*sig_cmd) {
            out << fixed(significance(sig), 6) << "\n";
        } else if (*run_cmd) {
            finish_train_flags(run.train, run_flags);
            run.prepare.bpe_merges = run_bpe;
            run.prepare.vocab_size = run_vocab;
            run.prepare.seed = run.train.config.seed;
            run.decode = run_decode;
            run.boolean_no = run.train.config.linearize.boolean_no;
            out << scores_tsv(run_pipeline(run, err));
        }
    } catch (const ConfigError& e) {
        return fail(err, e.what(), 1);
    } catch (const DivergenceError& e) {
        return fail(err, e.what(), 3);
    } catch (const std::exception& e) {
        return fail(err, e.what(), 2);
    }
    return 0;
}

}  // namespace dnlg::cli
