#include "cadm/checkpoint.h"

#include <algorithm>
#include <bit>
#include <cstring>
#include <string>

#include "cadm/error.h"
#include "cadm/frame_io.h"

namespace cadm {
namespace {

constexpr char kMagic[4] = {'C', 'D', 'M', 'K'};
constexpr size_t kHeaderBytes = 48;

void put_u32(std::vector<uint8_t>& out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<uint8_t>(v >> (8 * i)));
}
void put_u64(std::vector<uint8_t>& out, uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<uint8_t>(v >> (8 * i)));
}
uint32_t get_u32(std::span<const uint8_t> in, size_t at) {
  uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(in[at + i]) << (8 * i);
  return v;
}
uint64_t get_u64(std::span<const uint8_t> in, size_t at) {
  uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(in[at + i]) << (8 * i);
  return v;
}

}  // namespace

std::vector<uint8_t> serialize_checkpoint(const Checkpoint& ckpt) {
  const ParamLayout layout(ckpt.arch);
  if (ckpt.params.size() != layout.total) {
    throw Error(ErrorCode::kInvalidArgument,
                "checkpoint has " + std::to_string(ckpt.params.size()) +
                    " parameters, architecture needs " +
                    std::to_string(layout.total));
  }
  std::vector<uint8_t> out(kMagic, kMagic + 4);
  out.reserve(kHeaderBytes + 4 * ckpt.params.size());
  out.push_back(kCheckpointVersion);
  out.push_back(static_cast<uint8_t>(ckpt.s));
  out.push_back(static_cast<uint8_t>(ckpt.n));
  out.push_back(0);
  put_u32(out, static_cast<uint32_t>(ckpt.arch.hidden));
  put_u32(out, static_cast<uint32_t>(ckpt.arch.embed_dim));
  put_u32(out, static_cast<uint32_t>(ckpt.steps));
  put_u64(out, std::bit_cast<uint64_t>(ckpt.beta_start));
  put_u64(out, std::bit_cast<uint64_t>(ckpt.beta_end));
  put_u64(out, std::bit_cast<uint64_t>(ckpt.arch.prior_variance));
  put_u32(out, static_cast<uint32_t>(ckpt.params.size()));
  for (float p : ckpt.params) put_u32(out, std::bit_cast<uint32_t>(p));
  return out;
}

Checkpoint deserialize_checkpoint(std::span<const uint8_t> bytes) {
  if (bytes.size() < kHeaderBytes || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw Error(ErrorCode::kCorruptData, "not a checkpoint file");
  }
  if (bytes[4] != kCheckpointVersion) {
    throw Error(ErrorCode::kUnsupportedVersion,
                "checkpoint version " + std::to_string(bytes[4]));
  }
  Checkpoint ckpt;
  ckpt.s = bytes[5];
  ckpt.n = bytes[6];
  ckpt.arch.hidden = static_cast<int>(get_u32(bytes, 8));
  ckpt.arch.embed_dim = static_cast<int>(get_u32(bytes, 12));
  ckpt.steps = static_cast<int>(get_u32(bytes, 16));
  ckpt.beta_start = std::bit_cast<double>(get_u64(bytes, 20));
  ckpt.beta_end = std::bit_cast<double>(get_u64(bytes, 28));
  ckpt.arch.prior_variance = std::bit_cast<double>(get_u64(bytes, 36));
  const uint32_t count = get_u32(bytes, 44);
  try {
    ckpt.arch.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::kCorruptData, e.what());
  }
  const ParamLayout layout(ckpt.arch);
  if (count != layout.total) {
    throw Error(ErrorCode::kCorruptData,
                "parameter count does not match architecture");
  }
  if (bytes.size() != kHeaderBytes + 4 * static_cast<size_t>(count)) {
    throw Error(ErrorCode::kCorruptData, "checkpoint payload size mismatch");
  }
  ckpt.params.resize(count);
  for (uint32_t i = 0; i < count; ++i) {
    ckpt.params[i] = std::bit_cast<float>(get_u32(bytes, kHeaderBytes + 4 * i));
  }
  // Validates the stored schedule.
  (void)ckpt.schedule();
  return ckpt;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  write_file(path, serialize_checkpoint(ckpt));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  return deserialize_checkpoint(read_file(path));
}

}  // namespace cadm
