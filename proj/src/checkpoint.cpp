#include "yseg/checkpoint.hpp"

#include <map>

#include "yseg/error.hpp"

namespace yseg {

std::vector<YtcEntry> checkpoint_entries(const RunConfig& cfg, std::uint64_t iteration,
                                         const YModel& model, const SgdOptimizer* opt) {
  std::vector<YtcEntry> out;
  out.push_back(YtcEntry::from_bytes("meta.format_version", {kCheckpointVersion}));
  out.push_back(YtcEntry::from_text("meta.config", serialize(cfg)));
  std::vector<std::uint8_t> it(8);
  for (int i = 0; i < 8; ++i) it[i] = static_cast<std::uint8_t>(iteration >> (8 * i));
  out.push_back(YtcEntry::from_bytes("meta.iteration", it));
  const NamedTensors named = model.named_tensors();
  for (const NamedTensor& t : named) out.push_back(YtcEntry::from_tensor(t.name, t.tensor));
  if (opt) {
    std::size_t k = 0;
    for (const NamedTensor& t : named) {
      if (!t.trainable) continue;
      out.push_back(YtcEntry::from_tensor("opt." + t.name, opt->velocity_at(k++)));
    }
  }
  return out;
}

void save_checkpoint(const std::string& path, const RunConfig& cfg, std::uint64_t iteration,
                     const YModel& model, const SgdOptimizer* opt) {
  write_ytc(path, checkpoint_entries(cfg, iteration, model, opt));
}

LoadedCheckpoint parse_checkpoint(std::vector<YtcEntry> entries) {
  LoadedCheckpoint c;
  auto find = [&](const std::string& name) -> const YtcEntry& {
    for (const YtcEntry& e : entries) {
      if (e.name == name) return e;
    }
    throw Error(ErrorCode::format, "checkpoint: missing entry " + name);
  };
  const YtcEntry& ver = find("meta.format_version");
  require(ver.dtype == YtcEntry::Dtype::u8 && ver.u8.size() == 1 && ver.u8[0] == kCheckpointVersion,
          ErrorCode::format, "checkpoint: unsupported format version");
  c.config = parse_config(find("meta.config").text());
  const YtcEntry& it = find("meta.iteration");
  require(it.dtype == YtcEntry::Dtype::u8 && it.u8.size() == 8, ErrorCode::format,
          "checkpoint: malformed iteration");
  for (int i = 0; i < 8; ++i) c.iteration |= static_cast<std::uint64_t>(it.u8[i]) << (8 * i);
  c.entries = std::move(entries);
  return c;
}

LoadedCheckpoint load_checkpoint(const std::string& path) {
  return parse_checkpoint(read_ytc(path));
}

namespace {

void copy_into(const YtcEntry& e, Tensor& t) {
  Shape shape(e.dims.begin(), e.dims.end());
  if (shape != t.shape()) throw_shape_mismatch(("checkpoint entry " + e.name).c_str(), shape, t.shape());
  require(e.dtype != YtcEntry::Dtype::u8, ErrorCode::format, "checkpoint: " + e.name + " is not numeric");
  const Tensor src = e.to_tensor(t.precision());
  dispatch(t.precision(), [&]<class T>(std::type_identity<T>) {
    auto dst = t.data<T>();
    auto s = src.data<T>();
    std::copy(s.begin(), s.end(), dst.begin());
  });
}

}  // namespace

void restore(const LoadedCheckpoint& ckpt, YModel& model, SgdOptimizer* opt) {
  std::map<std::string, const YtcEntry*> by_name;
  for (const YtcEntry& e : ckpt.entries) by_name[e.name] = &e;
  auto find = [&](const std::string& name) -> const YtcEntry& {
    auto it = by_name.find(name);
    if (it == by_name.end()) throw Error(ErrorCode::format, "checkpoint: missing entry " + name);
    return *it->second;
  };
  const NamedTensors named = model.named_tensors();
  for (const NamedTensor& t : named) {
    Tensor dst = t.tensor;
    copy_into(find(t.name), dst);
  }
  if (opt) {
    std::size_t k = 0;
    for (const NamedTensor& t : named) {
      if (!t.trainable) continue;
      Tensor v = opt->velocity_at(k++);
      copy_into(find("opt." + t.name), v);
    }
  }
}

}  // namespace yseg
