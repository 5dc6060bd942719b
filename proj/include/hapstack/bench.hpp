#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>

#include "hapstack/encoder.hpp"
#include "hapstack/pipeline.hpp"

namespace hapstack {

struct BenchReport {
  std::string model_label;
  EncoderConfig architecture;
  double mean_latency_ms = 0.0;
  double stddev_ms = 0.0;
  std::size_t seeds = 0;
  std::optional<double> throughput_docs_per_s;
};

struct BenchComparison {
  BenchReport a;
  BenchReport b;
  // b time over a time; a is meant to be the smaller model.
  double speedup = 0.0;
};

struct MeanStddev {
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation, 0 for fewer than 2 values
};
MeanStddev mean_stddev(std::span<const double> values);

struct LatencyOptions {
  std::size_t runs = 100;
  std::size_t seeds = 5;
  std::size_t seq_len = 32;
  std::size_t warmup = 3;
  std::uint64_t base_seed = 0;
  bool serial_kernels = false;
};

// Per seed: fresh random weights, `warmup` untimed forwards, then `runs` timed
// single-sequence forwards. Reports the mean and spread of the per-seed means.
// Throws Error{kInvalidArgument} when runs < 10 or seeds < 1.
BenchComparison bench_latency(const EncoderConfig& a, const EncoderConfig& b,
                              const LatencyOptions& options = {});

struct ThroughputOptions {
  ScoringOptions scoring;
  FilterConfig filter;
  std::uint64_t seed = 0;
};

// Times run_corpus over the same corpus with random weights for each config
// and a synthetic vocabulary of the config's size.
BenchComparison bench_throughput(const std::filesystem::path& corpus, const EncoderConfig& a,
                                 const EncoderConfig& b, const ThroughputOptions& options = {});

// Key-value lines describing both reports and the speedup.
std::string format_comparison(const BenchComparison& comparison);

}  // namespace hapstack
