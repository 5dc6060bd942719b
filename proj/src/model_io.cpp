#include "hapstack/model_io.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_map>

#include "hapstack/error.hpp"

namespace hapstack {
namespace {

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_block(std::string& out, std::string_view block) {
  if (block.size() > UINT32_MAX) throw Error(ErrorCode::kShapeMismatch, "header block too large");
  put_u32(out, static_cast<std::uint32_t>(block.size()));
  out.append(block);
}

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  std::string_view take(std::size_t n, const char* what) {
    if (bytes_.size() - pos_ < n) {
      throw Error(ErrorCode::kTruncated, std::string("file ends inside ") + what);
    }
    auto s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  std::uint64_t uint(std::size_t width, const char* what) {
    const auto s = take(width, what);
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < width; ++i) {
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(s[i])) << (8 * i);
    }
    return v;
  }

  std::string_view block(const char* what) {
    return take(static_cast<std::size_t>(uint(4, what)), what);
  }

  std::string_view rest() const { return bytes_.substr(pos_); }
  bool done() const { return pos_ == bytes_.size(); }

 private:
  std::string_view bytes_;
  std::size_t pos_ = 0;
};

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace

std::string serialize_config(const EncoderConfig& c) {
  std::map<std::string, std::string> fields{
      {"activation", "gelu"},
      {"hidden_size", std::to_string(c.hidden_size)},
      {"intermediate_size", std::to_string(c.intermediate_size)},
      {"layernorm_epsilon", format_double(c.layernorm_epsilon)},
      {"max_positions", std::to_string(c.max_positions)},
      {"num_heads", std::to_string(c.num_heads)},
      {"num_labels", std::to_string(c.num_labels)},
      {"num_layers", std::to_string(c.num_layers)},
      {"vocab_size", std::to_string(c.vocab_size)},
  };
  std::string out;
  for (const auto& [key, value] : fields) out += key + "=" + value + "\n";
  return out;
}

EncoderConfig parse_config(std::string_view text) {
  std::map<std::string, std::string, std::less<>> fields;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw Error(ErrorCode::kCorrupt, "config line '" + line + "'");
    if (!fields.emplace(line.substr(0, eq), line.substr(eq + 1)).second) {
      throw Error(ErrorCode::kCorrupt, "duplicate config key " + line.substr(0, eq));
    }
  }
  auto get = [&fields](std::string_view key) -> const std::string& {
    const auto it = fields.find(key);
    if (it == fields.end()) throw Error(ErrorCode::kCorrupt, "config lacks " + std::string(key));
    return it->second;
  };
  auto get_size = [&get](std::string_view key) {
    const std::string& v = get(key);
    std::size_t out = 0;
    const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
    if (res.ec != std::errc{} || res.ptr != v.data() + v.size()) {
      throw Error(ErrorCode::kCorrupt, "config " + std::string(key) + "='" + v + "'");
    }
    return out;
  };

  EncoderConfig c;
  if (get("activation") != "gelu") throw Error(ErrorCode::kCorrupt, "unknown activation");
  c.activation = Activation::kGelu;
  c.hidden_size = get_size("hidden_size");
  c.intermediate_size = get_size("intermediate_size");
  c.max_positions = get_size("max_positions");
  c.num_heads = get_size("num_heads");
  c.num_labels = get_size("num_labels");
  c.num_layers = get_size("num_layers");
  c.vocab_size = get_size("vocab_size");
  const std::string& eps = get("layernorm_epsilon");
  const auto res = std::from_chars(eps.data(), eps.data() + eps.size(), c.layernorm_epsilon);
  if (res.ec != std::errc{} || res.ptr != eps.data() + eps.size()) {
    throw Error(ErrorCode::kCorrupt, "config layernorm_epsilon='" + eps + "'");
  }
  if (fields.size() != 9) throw Error(ErrorCode::kCorrupt, "unexpected config keys");
  try {
    validate(c);
  } catch (const Error& e) {
    throw Error(ErrorCode::kCorrupt, e.what());
  }
  return c;
}

std::string serialize_bundle(const EncoderConfig& config, const ModelWeights& weights,
                             const Vocabulary& vocab) {
  validate(weights, config);
  if (vocab.size() != config.vocab_size) {
    throw Error(ErrorCode::kShapeMismatch, "vocabulary has " + std::to_string(vocab.size()) +
                                               " tokens, config says " +
                                               std::to_string(config.vocab_size));
  }
  const auto specs = tensor_specs(config);
  const auto slots = tensor_slots(weights, config);

  std::string table;
  put_u32(table, static_cast<std::uint32_t>(specs.size()));
  std::uint64_t offset = 0;
  for (const auto& spec : specs) {
    put_u32(table, static_cast<std::uint32_t>(spec.name.size()));
    table += spec.name;
    put_u32(table, static_cast<std::uint32_t>(spec.shape.size()));
    for (std::size_t d : spec.shape) put_u64(table, d);
    put_u64(table, offset);
    offset += Tensor::element_count(spec.shape) * sizeof(float);
  }

  std::string out;
  out.reserve(64 + table.size() + offset);
  out += kBundleMagic;
  put_block(out, serialize_config(config));
  put_block(out, serialize_vocab(vocab));
  put_block(out, table);
  for (const Tensor* t : slots) {
    for (float v : t->data) put_u32(out, std::bit_cast<std::uint32_t>(v));
  }
  return out;
}

ModelBundle parse_bundle(std::string_view bytes) {
  Reader r(bytes);
  if (bytes.size() < kBundleMagic.size() || bytes.substr(0, kBundleMagic.size()) != kBundleMagic) {
    throw Error(ErrorCode::kBadMagic, "not a HAP1 bundle");
  }
  r.take(kBundleMagic.size(), "magic");
  const EncoderConfig config = parse_config(r.block("config"));
  Vocabulary vocab = parse_vocab(r.block("vocabulary"));
  if (vocab.size() != config.vocab_size) {
    throw Error(ErrorCode::kShapeMismatch, "bundled vocabulary size differs from config");
  }

  Reader table(r.block("tensor table"));
  const std::string_view payload = r.rest();

  struct Entry {
    std::vector<std::size_t> dims;
    std::uint64_t offset;
  };
  std::unordered_map<std::string, Entry> entries;
  const auto count = table.uint(4, "tensor table");
  for (std::uint64_t i = 0; i < count; ++i) {
    std::string name(table.block("tensor name"));
    const auto rank = table.uint(4, "tensor rank");
    if (rank > 8) throw Error(ErrorCode::kCorrupt, "tensor " + name + " has rank " + std::to_string(rank));
    Entry e;
    for (std::uint64_t d = 0; d < rank; ++d) {
      e.dims.push_back(static_cast<std::size_t>(table.uint(8, "tensor dims")));
    }
    e.offset = table.uint(8, "tensor offset");
    if (!entries.emplace(name, std::move(e)).second) {
      throw Error(ErrorCode::kCorrupt, "tensor " + name + " listed twice");
    }
  }
  if (!table.done()) throw Error(ErrorCode::kCorrupt, "trailing bytes in tensor table");

  const auto specs = tensor_specs(config);
  if (entries.size() != specs.size()) {
    throw Error(ErrorCode::kCorrupt, "tensor table lists " + std::to_string(entries.size()) +
                                         " tensors, config needs " + std::to_string(specs.size()));
  }

  ModelWeights weights;
  const auto slots = tensor_slots(weights, config);
  std::vector<std::pair<std::uint64_t, std::uint64_t>> extents;
  for (std::size_t i = 0; i < specs.size(); ++i) {
    const auto it = entries.find(specs[i].name);
    if (it == entries.end()) throw Error(ErrorCode::kCorrupt, "missing tensor " + specs[i].name);
    const Entry& e = it->second;
    if (e.dims != specs[i].shape) {
      throw Error(ErrorCode::kShapeMismatch, "tensor " + specs[i].name + " dims disagree with config");
    }
    const std::uint64_t nbytes = Tensor::element_count(e.dims) * sizeof(float);
    if (e.offset > payload.size() || payload.size() - e.offset < nbytes) {
      throw Error(ErrorCode::kTruncated, "payload ends inside tensor " + specs[i].name);
    }
    extents.emplace_back(e.offset, e.offset + nbytes);
    Tensor& t = *slots[i];
    t = Tensor(e.dims);
    const char* src = payload.data() + e.offset;
    for (std::size_t j = 0; j < t.data.size(); ++j) {
      std::uint32_t bits = 0;
      for (int b = 0; b < 4; ++b) {
        bits |= static_cast<std::uint32_t>(static_cast<unsigned char>(src[4 * j + b])) << (8 * b);
      }
      t.data[j] = std::bit_cast<float>(bits);
    }
  }
  std::sort(extents.begin(), extents.end());
  std::uint64_t end = 0;
  for (const auto& [lo, hi] : extents) {
    if (lo < end) throw Error(ErrorCode::kCorrupt, "overlapping tensor extents");
    end = hi;
  }
  if (end != payload.size()) throw Error(ErrorCode::kCorrupt, "payload has unreferenced bytes");

  validate(weights, config);
  return ModelBundle{config, std::move(weights), std::move(vocab)};
}

void save_bundle(const EncoderConfig& config, const ModelWeights& weights,
                 const Vocabulary& vocab, const std::filesystem::path& path) {
  const std::string bytes = serialize_bundle(config, weights, vocab);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot open " + path.string() + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::kIo, "write to " + path.string() + " failed");
}

ModelBundle load_bundle(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open model bundle " + path.string());
  in.seekg(0, std::ios::end);
  std::string bytes(static_cast<std::size_t>(in.tellg()), '\0');
  in.seekg(0);
  in.read(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!in) throw Error(ErrorCode::kIo, "read of " + path.string() + " failed");
  return parse_bundle(bytes);
}

}  // namespace hapstack
