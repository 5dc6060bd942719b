#include "hapstack/bench.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>
#include <vector>

#include "hapstack/error.hpp"
#include "hapstack/synthetic.hpp"

namespace hapstack {
namespace {

using Clock = std::chrono::steady_clock;

// Keeps timed forwards observable so they are not optimized away.
volatile float g_sink = 0.0f;

double elapsed_ms(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

TokenizedSequence random_sequence(const EncoderConfig& config, std::size_t seq_len,
                                  std::uint64_t seed) {
  // ids 0..3 are the synthetic vocabulary's specials; [CLS]=2, [SEP]=3.
  if (config.vocab_size <= 4) {
    throw Error(ErrorCode::kInvalidArgument, "latency bench needs a vocabulary beyond the specials");
  }
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  std::uniform_int_distribution<TokenId> pick(4, static_cast<TokenId>(config.vocab_size - 1));
  TokenizedSequence seq;
  const std::size_t n = std::max<std::size_t>(2, std::min(seq_len, config.max_positions));
  seq.ids.resize(n);
  for (auto& id : seq.ids) id = pick(rng);
  seq.ids.front() = 2;
  seq.ids.back() = 3;
  seq.attention_mask.assign(n, 1);
  return seq;
}

BenchReport time_latency(const EncoderConfig& config, const LatencyOptions& options) {
  std::vector<double> per_seed;
  const ForwardOptions forward_options{.capture_attentions = false,
                                       .serial_kernels = options.serial_kernels};
  for (std::size_t s = 0; s < options.seeds; ++s) {
    const std::uint64_t seed = options.base_seed + s;
    const ModelWeights weights = init_random(config, seed);
    const TokenizedSequence seq = random_sequence(config, options.seq_len, seed);
    for (std::size_t i = 0; i < options.warmup; ++i) forward(seq, weights, config, forward_options);
    float sink = 0.0f;
    const auto start = Clock::now();
    for (std::size_t i = 0; i < options.runs; ++i) {
      sink += forward(seq, weights, config, forward_options).logits[0];
    }
    per_seed.push_back(elapsed_ms(start) / static_cast<double>(options.runs));
    g_sink = sink;
  }
  const auto stats = mean_stddev(per_seed);
  return BenchReport{describe(config), config, stats.mean, stats.stddev, options.seeds, std::nullopt};
}

}  // namespace

MeanStddev mean_stddev(std::span<const double> values) {
  MeanStddev r;
  if (values.empty()) return r;
  for (double v : values) r.mean += v;
  r.mean /= static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - r.mean) * (v - r.mean);
    r.stddev = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return r;
}

BenchComparison bench_latency(const EncoderConfig& a, const EncoderConfig& b,
                              const LatencyOptions& options) {
  if (options.runs < 10) throw Error(ErrorCode::kInvalidArgument, "latency bench needs >= 10 runs");
  if (options.seeds < 1) throw Error(ErrorCode::kInvalidArgument, "latency bench needs >= 1 seed");
  BenchComparison c;
  c.a = time_latency(a, options);
  c.b = time_latency(b, options);
  c.speedup = c.b.mean_latency_ms / c.a.mean_latency_ms;
  return c;
}

BenchComparison bench_throughput(const std::filesystem::path& corpus, const EncoderConfig& a,
                                 const EncoderConfig& b, const ThroughputOptions& options) {
  if (!std::filesystem::exists(corpus)) {
    throw Error(ErrorCode::kIo, "corpus " + corpus.string() + " does not exist");
  }
  auto run = [&](const EncoderConfig& config) {
    const ModelBundle model{config, init_random(config, options.seed),
                            synthetic::make_vocab(config.vocab_size)};
    std::ifstream in(corpus, std::ios::binary);
    if (!in) throw Error(ErrorCode::kIo, "cannot open corpus " + corpus.string());
    std::ostringstream sink;
    const CorpusRunConfig run_config{options.filter, options.scoring};
    const CorpusSummary summary = run_corpus(in, sink, model, run_config);
    BenchReport r{describe(config), config, summary.wall_ms, 0.0, 1, summary.docs_per_s};
    return r;
  };
  BenchComparison c;
  c.a = run(a);
  c.b = run(b);
  c.speedup = c.b.mean_latency_ms / c.a.mean_latency_ms;
  return c;
}

std::string format_comparison(const BenchComparison& c) {
  std::string out;
  char buf[256];
  for (const auto* r : {&c.a, &c.b}) {
    const char tag = r == &c.a ? 'a' : 'b';
    std::snprintf(buf, sizeof(buf), "%c.architecture=%s\n%c.mean_ms=%.4f\n%c.stddev_ms=%.4f\n%c.seeds=%zu\n",
                  tag, r->model_label.c_str(), tag, r->mean_latency_ms, tag, r->stddev_ms, tag,
                  r->seeds);
    out += buf;
    if (r->throughput_docs_per_s) {
      std::snprintf(buf, sizeof(buf), "%c.docs_per_s=%.3f\n", tag, *r->throughput_docs_per_s);
      out += buf;
    }
  }
  std::snprintf(buf, sizeof(buf), "speedup=%.3f\n", c.speedup);
  out += buf;
  return out;
}

}  // namespace hapstack
