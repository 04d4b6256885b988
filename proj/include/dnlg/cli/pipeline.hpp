#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "dnlg/decode/decode.hpp"
#include "dnlg/eval/metrics.hpp"
#include "dnlg/training/training.hpp"

namespace dnlg::cli {

inline constexpr const char* kToolVersion = "0.1.0";

namespace fs = std::filesystem;

// Artifact names shared by the stages.
inline constexpr const char* kVocabFile = "vocab.txt";
inline constexpr const char* kSlotVocabFile = "slot_vocab.txt";
inline constexpr const char* kBpeFile = "bpe.model";
inline constexpr const char* kFinalCheckpoint = "final.ckpt";

struct PrepareOptions {
    std::vector<fs::path> ind;  // raw text, one sentence per line
    std::vector<fs::path> ood;
    std::vector<fs::path> csv;  // labeled CSVs; references count as in-domain text
    fs::path out_dir;
    std::size_t max_len = 60;
    std::optional<std::size_t> bpe_merges;
    std::optional<std::size_t> vocab_size;
    std::uint64_t seed = 0;
};

// Writes ind.txt / ood.txt (tokenized, filtered), counts_ind.txt /
// counts_ood.txt, vocab.txt, optional bpe.model and *.bpe.txt,
// slot_vocab.txt when CSVs are given, and manifest.json.
void prepare(const PrepareOptions& options, std::ostream& log);

struct TrainOptions {
    fs::path ind_corpus;  // tokenized
    fs::path ood_corpus;
    fs::path labeled_csv;
    std::string counts_from = "ind";  // ind | ood | file
    fs::path counts_file;
    fs::path vocab;  // built from the training data when empty
    fs::path bpe_model;
    fs::path slot_vocab;
    TrainConfig config;  // config.checkpoint_dir is required
};

// Trains and leaves a self-contained model directory: checkpoints plus
// the vocabularies and BPE model generation needs.
TrainResult train_model(const TrainOptions& options, std::ostream& log);

struct GenerateOptions {
    fs::path model_dir;
    fs::path checkpoint;  // defaults to model_dir/final.ckpt
    fs::path input_csv;
    fs::path output;      // stdout when empty
    fs::path refs_out;    // optional: the CSV's references, grouped
    DecodeConfig decode;
    std::size_t nbest = 0;  // > 0 writes rank<TAB>score<TAB>text
    bool copy_input = false;
    BooleanNoPolicy boolean_no = BooleanNoPolicy::kOmit;
    int jobs = 1;
};

std::vector<std::string> generate_texts(const GenerateOptions& options, std::ostream& out, std::ostream& log);

struct EvaluateOptions {
    fs::path hyp;
    fs::path refs;
    fs::path report;  // JSON audit report, optional
    bool lowercase = false;
};

// Hypotheses one per line; references grouped by blank lines. Both sides
// are tokenized with the corpus tokenizer.
std::vector<EvalInstance> load_eval_instances(const fs::path& hyp, const fs::path& refs, bool lowercase);
ScoreReport evaluate_files(const EvaluateOptions& options, std::ostream& out, std::ostream& log);
std::string report_json(const ScoreReport& report);

struct SignificanceOptions {
    fs::path a;
    fs::path b;
    fs::path refs;
    std::string metric = "bleu";  // bleu | rouge_l
    std::size_t rounds = 10000;
    std::uint64_t seed = 0;
    bool lowercase = false;
};

double significance(const SignificanceOptions& options);

struct RunOptions {
    PrepareOptions prepare;  // out_dir is set from work_dir
    TrainOptions train;      // corpora and vocab paths are set from work_dir
    fs::path train_csv;      // labeled data (and in-domain text)
    fs::path dev_csv;
    fs::path work_dir;
    DecodeConfig decode;
    BooleanNoPolicy boolean_no = BooleanNoPolicy::kOmit;
    bool lowercase = false;
};

// prepare -> train -> generate -> evaluate under work_dir. Writes
// data/, model/, dev.hyp.txt, dev.refs.txt, scores.tsv and scores.json.
ScoreReport run_pipeline(const RunOptions& options, std::ostream& log);

// Entry point: returns the process exit code
// (0 ok, 1 usage, 2 data error, 3 divergence).
int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace dnlg::cli
