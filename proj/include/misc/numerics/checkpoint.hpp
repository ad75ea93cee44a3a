#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>
#include <type_traits>
#include <vector>

#include "misc/error.hpp"
#include "misc/numerics/tape.hpp"
#include "misc/numerics/tensor.hpp"

// Binary checkpoint container.
//
//   magic    "MISCCKPT"                      8 bytes
//   version  u32                              (kCheckpointVersion)
//   metadata u64 length + UTF-8 bytes         free-form, JSON by convention
//   count    u64
//   entries  count × { u32 name length, name bytes, u8 precision (0 single,
//            1 double), u32 rank, rank × u64 dims, row-major IEEE values }
//
// Every integer and float is little-endian. Values are stored at the
// precision recorded in the entry, so save→load→save is byte-identical.

namespace misc::numerics {

inline constexpr std::uint32_t kCheckpointVersion = 1;
inline constexpr char kCheckpointMagic[8] = {'M', 'I', 'S', 'C', 'C', 'K', 'P', 'T'};

enum class Precision : std::uint8_t { Single = 0, Double = 1 };

template <typename T>
constexpr Precision precision_of() {
  static_assert(std::is_same_v<T, float> || std::is_same_v<T, double>);
  return std::is_same_v<T, float> ? Precision::Single : Precision::Double;
}

struct CheckpointEntry {
  std::string name;
  Precision precision = Precision::Single;
  Shape shape;
  std::vector<double> values;  // exact for both precisions
};

struct Checkpoint {
  std::string metadata;
  std::vector<CheckpointEntry> entries;

  const CheckpointEntry* find(const std::string& name) const {
    for (const auto& e : entries)
      if (e.name == name) return &e;
    return nullptr;
  }
};

namespace detail {

template <typename U>
void put(std::string& out, U value) {
  static_assert(std::is_trivially_copyable_v<U>);
  using Bits = std::conditional_t<sizeof(U) == 8, std::uint64_t,
                                  std::conditional_t<sizeof(U) == 4, std::uint32_t, std::uint8_t>>;
  const auto bits = std::bit_cast<Bits>(value);
  for (std::size_t i = 0; i < sizeof(U); ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
}

class Reader {
 public:
  explicit Reader(const std::string& bytes) : bytes_(bytes) {}

  template <typename U>
  U get() {
    using Bits = std::conditional_t<sizeof(U) == 8, std::uint64_t,
                                    std::conditional_t<sizeof(U) == 4, std::uint32_t, std::uint8_t>>;
    need(sizeof(U));
    Bits bits = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) {
      bits |= static_cast<Bits>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    }
    pos_ += sizeof(U);
    return std::bit_cast<U>(bits);
  }

  std::string take(std::size_t n) {
    need(n);
    std::string s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  bool done() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) throw IoError("checkpoint truncated");
  }
  const std::string& bytes_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline std::string serialize_checkpoint(const Checkpoint& ckpt) {
  std::string out(kCheckpointMagic, sizeof(kCheckpointMagic));
  detail::put(out, kCheckpointVersion);
  detail::put(out, static_cast<std::uint64_t>(ckpt.metadata.size()));
  out += ckpt.metadata;
  detail::put(out, static_cast<std::uint64_t>(ckpt.entries.size()));
  for (const auto& e : ckpt.entries) {
    if (e.values.size() != shape_numel(e.shape)) throw DimensionError("checkpoint entry " + e.name + " has inconsistent shape");
    detail::put(out, static_cast<std::uint32_t>(e.name.size()));
    out += e.name;
    detail::put(out, static_cast<std::uint8_t>(e.precision));
    detail::put(out, static_cast<std::uint32_t>(e.shape.size()));
    for (auto dim : e.shape) detail::put(out, static_cast<std::uint64_t>(dim));
    for (double v : e.values) {
      if (e.precision == Precision::Single) {
        detail::put(out, static_cast<float>(v));
      } else {
        detail::put(out, v);
      }
    }
  }
  return out;
}

inline Checkpoint parse_checkpoint(const std::string& bytes) {
  detail::Reader in(bytes);
  if (in.take(sizeof(kCheckpointMagic)) != std::string(kCheckpointMagic, sizeof(kCheckpointMagic))) {
    throw IoError("not a checkpoint (bad magic)");
  }
  const auto version = in.get<std::uint32_t>();
  if (version != kCheckpointVersion) throw IoError("unsupported checkpoint version " + std::to_string(version));
  Checkpoint ckpt;
  ckpt.metadata = in.take(static_cast<std::size_t>(in.get<std::uint64_t>()));
  const auto count = in.get<std::uint64_t>();
  for (std::uint64_t i = 0; i < count; ++i) {
    CheckpointEntry e;
    e.name = in.take(in.get<std::uint32_t>());
    const auto prec = in.get<std::uint8_t>();
    if (prec > 1) throw IoError("checkpoint entry " + e.name + " has unknown precision");
    e.precision = static_cast<Precision>(prec);
    const auto rank = in.get<std::uint32_t>();
    for (std::uint32_t r = 0; r < rank; ++r) e.shape.push_back(static_cast<std::size_t>(in.get<std::uint64_t>()));
    const std::size_t n = shape_numel(e.shape);
    e.values.reserve(n);
    for (std::size_t k = 0; k < n; ++k) {
      e.values.push_back(e.precision == Precision::Single ? static_cast<double>(in.get<float>()) : in.get<double>());
    }
    ckpt.entries.push_back(std::move(e));
  }
  if (!in.done()) throw IoError("trailing bytes after checkpoint");
  return ckpt;
}

inline void write_checkpoint(const Checkpoint& ckpt, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  const std::string bytes = serialize_checkpoint(ckpt);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed: " + path);
}

inline Checkpoint read_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_checkpoint(bytes);
}

template <typename T>
Checkpoint make_checkpoint(const ParameterSet<T>& params, std::string metadata = {}) {
  Checkpoint ckpt;
  ckpt.metadata = std::move(metadata);
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto& p = params[i];
    ckpt.entries.push_back({p.name, precision_of<T>(), p.value.shape(),
                            std::vector<double>(p.value.storage().begin(), p.value.storage().end())});
  }
  return ckpt;
}

/// Overwrites every parameter from the checkpoint entry of the same name.
template <typename T>
void load_parameters(const Checkpoint& ckpt, ParameterSet<T>& params) {
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& p = params[i];
    const auto* e = ckpt.find(p.name);
    if (!e) throw ContractError("checkpoint lacks parameter " + p.name);
    if (e->shape != p.value.shape()) {
      throw DimensionError("checkpoint shape " + shape_string(e->shape) + " for " + p.name + " expected " +
                           shape_string(p.value.shape()));
    }
    for (std::size_t k = 0; k < e->values.size(); ++k) p.value[k] = static_cast<T>(e->values[k]);
  }
}

}  // namespace misc::numerics
