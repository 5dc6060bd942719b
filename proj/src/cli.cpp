#include "hapstack/cli.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "hapstack/bench.hpp"
#include "hapstack/bootstrap.hpp"
#include "hapstack/error.hpp"
#include "hapstack/heatmap.hpp"
#include "hapstack/model_io.hpp"
#include "hapstack/pipeline.hpp"
#include "hapstack/rescore.hpp"
#include "hapstack/synthetic.hpp"

namespace hapstack {
namespace {

// Raised for missing or unusable model bundles; maps to the usage exit code.
struct ModelError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::string model_path;
  std::string input = "-";
  std::string output = "-";
  std::size_t batch_size = 32;
  std::size_t max_length = 512;
  double hap_threshold = 0.5;
  double max_flagged_fraction = 0.1;
  std::size_t workers = 1;
  double lambda = 1.0;
  std::uint64_t seed = 0;
  std::string match_mode = "word";
  std::string format = "text-grid";
  std::string config = "4,12,576,768,30522,512";
  bool lowercase = false;
  bool static_batching = false;
  std::size_t token_budget = 4096;
};

ModelBundle load_model(const RunConfig& rc) {
  std::string path = rc.model_path;
  if (path.empty()) {
    if (const char* env = std::getenv("HAPSTACK_MODEL")) path = env;
  }
  if (path.empty()) throw UsageError("no model given: pass --model or set HAPSTACK_MODEL");
  try {
    return load_bundle(path);
  } catch (const Error& e) {
    throw ModelError("cannot load model '" + path + "': " + e.what());
  }
}

ScoringOptions scoring_options(const RunConfig& rc) {
  ScoringOptions o;
  o.batch_size = rc.batch_size;
  o.max_length = rc.max_length;
  o.workers = rc.workers;
  o.dynamic_batching = !rc.static_batching;
  o.token_budget = rc.token_budget;
  o.tokenizer.lowercase = rc.lowercase;
  return o;
}

// Opens --input, with "-" meaning the caller's stdin.
class Input {
 public:
  Input(const std::string& path, std::istream& fallback) {
    if (path == "-") {
      stream_ = &fallback;
    } else {
      file_.open(path, std::ios::binary);
      if (!file_) throw Error(ErrorCode::kIo, "cannot open input " + path);
      stream_ = &file_;
    }
  }
  std::istream& get() { return *stream_; }

 private:
  std::ifstream file_;
  std::istream* stream_ = nullptr;
};

class Output {
 public:
  Output(const std::string& path, std::ostream& fallback) {
    if (path == "-") {
      stream_ = &fallback;
    } else {
      file_.open(path, std::ios::binary | std::ios::trunc);
      if (!file_) throw Error(ErrorCode::kIo, "cannot open output " + path);
      stream_ = &file_;
    }
  }
  std::ostream& get() { return *stream_; }
  bool is_file() const { return file_.is_open(); }

 private:
  std::ofstream file_;
  std::ostream* stream_ = nullptr;
};

std::vector<std::string> read_lines(std::istream& in) {
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    lines.push_back(line);
  }
  return lines;
}

std::string slurp(std::istream& in) {
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

void add_model_flag(CLI::App* cmd, RunConfig& rc) {
  cmd->add_option("--model", rc.model_path, "HAP1 model bundle (falls back to $HAPSTACK_MODEL)");
}

void add_scoring_flags(CLI::App* cmd, RunConfig& rc) {
  cmd->add_option("--batch-size", rc.batch_size, "Sentences per batch")->check(CLI::PositiveNumber);
  cmd->add_option("--max-length", rc.max_length, "Token limit per sentence")->check(CLI::Range(2, 1 << 20));
  cmd->add_option("--workers", rc.workers, "Batches scored concurrently")->check(CLI::PositiveNumber);
  cmd->add_option("--token-budget", rc.token_budget, "Token budget per dynamic batch");
  cmd->add_flag("--static-batching", rc.static_batching, "Batch in input order instead of by length");
  cmd->add_flag("--lowercase", rc.lowercase, "Lowercase ASCII before tokenizing");
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::istream& in, std::ostream& out,
            std::ostream& err) {
  CLI::App app{"hapstack: hate/abuse/profanity scoring toolkit"};
  app.require_subcommand(1);
  RunConfig rc;

  auto* score = app.add_subcommand("score", "Score one sentence per input line");
  add_model_flag(score, rc);
  score->add_option("--input", rc.input, "Sentence file, '-' for stdin");
  score->add_option("--output", rc.output, "Score file, '-' for stdout");
  add_scoring_flags(score, rc);

  auto* filter = app.add_subcommand("filter", "Filter a corpus of documents");
  add_model_flag(filter, rc);
  filter->add_option("--input", rc.input, "Corpus file (<id>\\t<text> per line), '-' for stdin");
  filter->add_option("--output", rc.output, "Decision file, '-' for stdout");
  filter->add_option("--threshold", rc.hap_threshold, "Sentence HAP threshold")->check(CLI::Range(0.0, 1.0));
  filter->add_option("--max-flagged-fraction", rc.max_flagged_fraction,
                     "Largest flagged-sentence fraction a kept document may have")
      ->check(CLI::Range(0.0, 1.0));
  add_scoring_flags(filter, rc);

  auto* heatmap = app.add_subcommand("heatmap", "Attention heatmap per input sentence");
  add_model_flag(heatmap, rc);
  heatmap->add_option("--input", rc.input, "Sentence file, '-' for stdin");
  heatmap->add_option("--output", rc.output, "Output file, '-' for stdout");
  heatmap->add_option("--format", rc.format, "text-grid or key-value-records")
      ->check(CLI::IsMember({"text-grid", "key-value-records", "kv"}));
  heatmap->add_option("--max-length", rc.max_length, "Token limit per sentence")->check(CLI::Range(2, 1 << 20));
  heatmap->add_flag("--lowercase", rc.lowercase, "Lowercase ASCII before tokenizing");
  std::optional<std::size_t> debug_head;
  heatmap->add_option("--head", debug_head, "Show one head instead of the head mean (debugging)");

  auto* rescore = app.add_subcommand("rescore", "Re-rank beam hypotheses with the non-HAP score");
  add_model_flag(rescore, rc);
  rescore->add_option("--input", rc.input, "Beam file (<score>\\t<text>[\\t<non_hap>]), '-' for stdin");
  rescore->add_option("--output", rc.output, "Ranked output, '-' for stdout");
  rescore->add_option("--lambda", rc.lambda, "Weight of the non-HAP score")->check(CLI::NonNegativeNumber);
  add_scoring_flags(rescore, rc);

  auto* sample = app.add_subcommand("sample", "Lexicon labeling and balanced sampling, or mining");
  add_model_flag(sample, rc);
  sample->add_option("--input", rc.input, "Sentence file, '-' for stdin");
  sample->add_option("--output", rc.output, "Sample file, '-' for stdout");
  std::string lexicon_path, language = "und";
  std::size_t target = 0, limit = 100;
  double min_hap = 0.9;
  bool mine = false, case_fold = false;
  sample->add_option("--lexicon", lexicon_path, "Toxic term list, one per line");
  sample->add_option("--language", language, "Language tag of the lexicon");
  sample->add_option("--match-mode", rc.match_mode, "word or exact")
      ->check(CLI::IsMember({"word", "exact", "word-boundary", "exact-substring"}));
  sample->add_flag("--case-fold", case_fold, "ASCII case-insensitive matching");
  sample->add_option("--target", target, "Balanced sample size (0 = label everything)");
  sample->add_option("--seed", rc.seed, "Sampling seed");
  sample->add_flag("--mine", mine, "Mine high-confidence HAP sentences with the model instead");
  sample->add_option("--min-hap", min_hap, "Mining threshold")->check(CLI::Range(0.0, 1.0));
  sample->add_option("--limit", limit, "Mining sample limit");
  add_scoring_flags(sample, rc);

  auto* bench = app.add_subcommand("bench", "Compare two architectures on latency or throughput");
  std::string config_b = "12,12,768,3072,30522,512";
  std::string corpus;
  LatencyOptions latency;
  bench->add_option("--config", rc.config, "Model A (small): layers,heads,hidden,intermediate[,vocab,positions]");
  bench->add_option("--config-b", config_b, "Model B (reference), same format");
  bench->add_option("--runs", latency.runs, "Timed runs per seed")->check(CLI::Range(10, 1 << 30));
  bench->add_option("--seeds", latency.seeds, "Random weight seeds")->check(CLI::PositiveNumber);
  bench->add_option("--seq-len", latency.seq_len, "Tokens per timed sequence")->check(CLI::Range(2, 1 << 20));
  bench->add_flag("--serial", latency.serial_kernels, "Use the serial reference kernels");
  bench->add_option("--corpus", corpus, "Benchmark corpus throughput on this file instead");
  bench->add_option("--seed", rc.seed, "Weight seed for the throughput run");
  add_scoring_flags(bench, rc);

  auto* init = app.add_subcommand("init-random", "Write a bundle with random weights");
  std::string vocab_path;
  init->add_option("--config", rc.config, "layers,heads,hidden,intermediate[,vocab,positions]");
  init->add_option("--seed", rc.seed, "Weight seed");
  init->add_option("--vocab", vocab_path, "Vocab file (default: synthetic vocabulary)");
  init->add_option("--output", rc.output, "Bundle path")->required();

  std::vector<const char*> argv{"hapstack"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  try {
    if (score->parsed()) {
      const ModelBundle model = load_model(rc);
      Input input(rc.input, in);
      const auto sentences = read_lines(input.get());
      const auto scores = score_sentences(sentences, model, scoring_options(rc));
      Output output(rc.output, out);
      for (std::size_t i = 0; i < sentences.size(); ++i) {
        output.get() << fixed6(scores[i].hap) << '\t' << fixed6(scores[i].non_hap) << '\t'
                     << sentences[i] << '\n';
      }
    } else if (filter->parsed()) {
      const ModelBundle model = load_model(rc);
      Input input(rc.input, in);
      Output output(rc.output, out);
      CorpusRunConfig config;
      config.filter = {rc.hap_threshold, rc.max_flagged_fraction};
      config.scoring = scoring_options(rc);
      const auto summary = run_corpus(input.get(), output.get(), model, config);
      (output.is_file() ? out : err) << format_summary(summary);
    } else if (heatmap->parsed()) {
      const ModelBundle model = load_model(rc);
      Input input(rc.input, in);
      const auto sentences = read_lines(input.get());
      const std::size_t max_length = std::min(rc.max_length, model.config.max_positions);
      TokenizerOptions tok;
      tok.lowercase = rc.lowercase;
      std::vector<TokenizedSequence> seqs;
      std::size_t longest = 0;
      for (const auto& s : sentences) {
        seqs.push_back(encode(s, model.vocab, max_length, false, tok));
        longest = std::max(longest, seqs.back().ids.size());
      }
      for (auto& s : seqs) pad_to(s, longest, model.vocab.pad_id());
      const auto outputs = forward_batch(seqs, model.weights, model.config);
      HeatmapOptions hopts;
      hopts.head = debug_head;
      const auto maps = compute_heatmaps_batch(outputs, seqs, model.vocab, hopts);
      const auto format = rc.format == "text-grid" ? HeatmapFormat::kTextGrid
                                                   : HeatmapFormat::kKeyValueRecords;
      Output output(rc.output, out);
      for (std::size_t i = 0; i < maps.size(); ++i) {
        if (i) output.get() << '\n';
        output.get() << render_heatmap(maps[i], format);
      }
    } else if (rescore->parsed()) {
      Input input(rc.input, in);
      auto hyps = parse_beam(slurp(input.get()));
      const bool need_model = std::any_of(hyps.begin(), hyps.end(),
                                          [](const Hypothesis& h) { return !h.non_hap; });
      std::optional<ModelBundle> model;
      if (need_model) model.emplace(load_model(rc));
      const auto ranked = rescore_beam(std::move(hyps), model ? &*model : nullptr, rc.lambda,
                                       scoring_options(rc));
      Output output(rc.output, out);
      output.get() << format_ranked(ranked);
    } else if (sample->parsed()) {
      Input input(rc.input, in);
      const auto sentences = read_lines(input.get());
      if (mine) {
        const ModelBundle model = load_model(rc);
        const auto mined = mine_high_confidence(sentences, model, min_hap, limit, rc.seed,
                                                scoring_options(rc));
        Output output(rc.output, out);
        for (const auto& [sentence, s] : mined) output.get() << fixed6(s.hap) << '\t' << sentence << '\n';
      } else {
        if (lexicon_path.empty()) throw UsageError("sample needs --lexicon (or --mine)");
        const Lexicon lexicon = load_lexicon(lexicon_path, language);
        const MatchOptions mopts{parse_match_mode(rc.match_mode), case_fold};
        auto labeled = label_corpus(sentences, lexicon, mopts);
        if (target > 0) {
          auto balanced = balanced_sample(labeled, target, rc.seed);
          err << "positives=" << balanced.positives << "\nnegatives=" << balanced.negatives
              << "\nshortfall=" << balanced.shortfall << '\n';
          labeled = std::move(balanced.samples);
        }
        Output output(rc.output, out);
        for (const auto& s : labeled) output.get() << format_sample(s) << '\n';
      }
    } else if (bench->parsed()) {
      const EncoderConfig a = parse_config_spec(rc.config);
      const EncoderConfig b = parse_config_spec(config_b);
      BenchComparison result;
      if (corpus.empty()) {
        result = bench_latency(a, b, latency);
      } else {
        ThroughputOptions topts;
        topts.scoring = scoring_options(rc);
        topts.seed = rc.seed;
        result = bench_throughput(corpus, a, b, topts);
      }
      out << format_comparison(result);
    } else if (init->parsed()) {
      EncoderConfig config = parse_config_spec(rc.config);
      std::optional<Vocabulary> vocab;
      if (!vocab_path.empty()) {
        vocab.emplace(load_vocab(vocab_path));
        config.vocab_size = vocab->size();
      } else {
        vocab.emplace(synthetic::make_vocab(config.vocab_size));
      }
      save_bundle(config, init_random(config, rc.seed), *vocab, rc.output);
      err << "wrote " << rc.output << " (" << describe(config) << ", vocab " << config.vocab_size
          << ", " << count_parameters(config) << " parameters)\n";
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ModelError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitOk;
}

}  // namespace hapstack
