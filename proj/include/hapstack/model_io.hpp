#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "hapstack/encoder.hpp"
#include "hapstack/wordpiece.hpp"

namespace hapstack {

// Everything needed to score text: architecture, learned tensors, vocabulary.
struct ModelBundle {
  EncoderConfig config;
  ModelWeights weights;
  Vocabulary vocab;
};

// HAP1 bundle layout, all integers little-endian:
//
//   "HAP1"
//   u32 config_len | config bytes   key=value lines, keys sorted
//   u32 vocab_len  | vocab bytes    the vocab file format, one token per line
//   u32 table_len  | table bytes    u32 count, then per tensor:
//                                   u32 name_len | name | u32 rank |
//                                   u64 dims[rank] | u64 byte offset
//   payload                         f32 row-major tensors
//
// Tensors appear in tensor_specs() order, so equal models give equal bytes.
inline constexpr std::string_view kBundleMagic = "HAP1";

// Canonical key-sorted config record.
std::string serialize_config(const EncoderConfig& config);
EncoderConfig parse_config(std::string_view text);

// Throws Error{kShapeMismatch} / Error{kNonFinite} on inconsistent input.
std::string serialize_bundle(const EncoderConfig& config, const ModelWeights& weights,
                             const Vocabulary& vocab);
// Throws Error{kBadMagic}, Error{kTruncated}, Error{kCorrupt},
// Error{kShapeMismatch} or Error{kNonFinite}.
ModelBundle parse_bundle(std::string_view bytes);

void save_bundle(const EncoderConfig& config, const ModelWeights& weights,
                 const Vocabulary& vocab, const std::filesystem::path& path);
ModelBundle load_bundle(const std::filesystem::path& path);

}  // namespace hapstack
