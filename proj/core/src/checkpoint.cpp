#include "tain/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "tain/error.hpp"

namespace tain {

namespace {

constexpr char kMagic[4] = {'T', 'A', 'I', 'N'};

class Writer {
 public:
  void u8(std::uint8_t v) { out_.push_back(v); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
  void bytes(const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    out_.insert(out_.end(), b, b + n);
  }
  void table(const std::vector<NamedTensor>& tensors) {
    u32(static_cast<std::uint32_t>(tensors.size()));
    for (const auto& t : tensors) {
      u32(static_cast<std::uint32_t>(t.name.size()));
      bytes(t.name.data(), t.name.size());
      u32(static_cast<std::uint32_t>(t.shape.size()));
      for (auto d : t.shape) u64(d);
      for (float v : t.data) f32(v);
    }
  }
  std::vector<std::uint8_t> take() { return std::move(out_); }

 private:
  std::vector<std::uint8_t> out_;
};

class Reader {
 public:
  explicit Reader(const std::vector<std::uint8_t>& in) : in_(in) {}

  void need(std::size_t n) const {
    if (in_.size() - pos_ < n) throw IoError("checkpoint: truncated at byte " + std::to_string(pos_));
  }
  std::uint8_t u8() {
    need(1);
    return in_[pos_++];
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(in_[pos_++]) << (8 * i);
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(in_[pos_++]) << (8 * i);
    return v;
  }
  float f32() { return std::bit_cast<float>(u32()); }
  std::string str(std::size_t n) {
    need(n);
    std::string s(reinterpret_cast<const char*>(in_.data() + pos_), n);
    pos_ += n;
    return s;
  }
  std::vector<NamedTensor> table() {
    const std::uint32_t count = u32();
    std::vector<NamedTensor> out;
    for (std::uint32_t i = 0; i < count; ++i) {
      NamedTensor t;
      t.name = str(u32());
      const std::uint32_t rank = u32();
      if (rank > 8) throw IoError("checkpoint: tensor '" + t.name + "' has implausible rank " + std::to_string(rank));
      std::uint64_t numel = 1;
      for (std::uint32_t r = 0; r < rank; ++r) {
        t.shape.push_back(static_cast<std::size_t>(u64()));
        numel *= t.shape.back();
      }
      need(numel * 4);
      t.data.resize(numel);
      for (auto& v : t.data) v = f32();
      out.push_back(std::move(t));
    }
    return out;
  }
  bool done() const { return pos_ == in_.size(); }

 private:
  const std::vector<std::uint8_t>& in_;
  std::size_t pos_ = 0;
};

}  // namespace

Checkpoint make_checkpoint(const TainModel<float>& model, std::uint64_t step, const AdamState<float>* adam) {
  Checkpoint ckpt;
  ckpt.config = model.config();
  ckpt.step = step;
  for (const auto& e : model.parameters().entries()) {
    auto data = e.tensor.data();
    ckpt.tensors.push_back({e.name, e.tensor.shape(), std::vector<float>(data.begin(), data.end())});
  }
  if (adam) ckpt.adam = *adam;
  return ckpt;
}

std::vector<std::uint8_t> serialize_checkpoint(const Checkpoint& ckpt) {
  Writer w;
  w.bytes(kMagic, 4);
  w.u32(kCheckpointVersion);
  const ModelConfig& c = ckpt.config;
  w.u32(static_cast<std::uint32_t>(c.s));
  w.u32(static_cast<std::uint32_t>(c.d));
  w.u32(static_cast<std::uint32_t>(c.n_resgroups));
  w.u32(static_cast<std::uint32_t>(c.n_resblocks));
  w.u32(static_cast<std::uint32_t>(c.ca_reduction));
  w.u8(static_cast<std::uint8_t>((c.enable_cs ? 1 : 0) | (c.enable_ia ? 2 : 0) | (c.normalize_qk ? 4 : 0) |
                                 (c.mean_shift ? 8 : 0)));
  w.u64(c.seed);
  w.u64(ckpt.step);
  w.table(ckpt.tensors);
  w.u8(ckpt.adam ? 1 : 0);
  if (ckpt.adam) {
    const auto& a = *ckpt.adam;
    if (a.m.size() != a.v.size()) throw Error("checkpoint: Adam moment tables differ in length");
    w.u64(a.step);
    w.u64(a.skipped);
    auto moments = [&](const std::vector<std::vector<float>>& m) {
      std::vector<NamedTensor> t;
      for (std::size_t i = 0; i < m.size(); ++i) {
        const auto& ref = i < ckpt.tensors.size() ? ckpt.tensors[i] : NamedTensor{};
        if (ref.data.size() != m[i].size()) throw Error("checkpoint: Adam moment size mismatch for entry " + std::to_string(i));
        t.push_back({ref.name, ref.shape, m[i]});
      }
      return t;
    };
    w.table(moments(a.m));
    w.table(moments(a.v));
  }
  return w.take();
}

Checkpoint deserialize_checkpoint(const std::vector<std::uint8_t>& bytes) {
  Reader r(bytes);
  if (bytes.size() < 8 || std::memcmp(bytes.data(), kMagic, 4) != 0) throw IoError("checkpoint: bad magic");
  r.str(4);
  const std::uint32_t version = r.u32();
  if (version != kCheckpointVersion) {
    throw IoError("checkpoint: unsupported format version " + std::to_string(version));
  }
  Checkpoint ckpt;
  ModelConfig& c = ckpt.config;
  c.s = r.u32();
  c.d = r.u32();
  c.n_resgroups = r.u32();
  c.n_resblocks = r.u32();
  c.ca_reduction = r.u32();
  const std::uint8_t flags = r.u8();
  c.enable_cs = flags & 1;
  c.enable_ia = flags & 2;
  c.normalize_qk = flags & 4;
  c.mean_shift = flags & 8;
  c.seed = r.u64();
  ckpt.step = r.u64();
  ckpt.tensors = r.table();
  if (r.u8() != 0) {
    AdamState<float> a;
    a.step = r.u64();
    a.skipped = r.u64();
    for (auto& t : r.table()) a.m.push_back(std::move(t.data));
    for (auto& t : r.table()) a.v.push_back(std::move(t.data));
    if (a.m.size() != a.v.size()) throw IoError("checkpoint: Adam moment tables differ in length");
    ckpt.adam = std::move(a);
  }
  if (!r.done()) throw IoError("checkpoint: trailing bytes");
  return ckpt;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  const auto bytes = serialize_checkpoint(ckpt);
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("checkpoint: cannot write '" + tmp.string() + "'");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("checkpoint: write failed for '" + tmp.string() + "'");
  }
  std::filesystem::rename(tmp, path);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("checkpoint: cannot open '" + path.string() + "'");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return deserialize_checkpoint(bytes);
}

void restore_parameters(TainModel<float>& model, const Checkpoint& ckpt) {
  auto& entries = model.parameters().entries();
  if (entries.size() != ckpt.tensors.size()) {
    throw IoError("checkpoint: holds " + std::to_string(ckpt.tensors.size()) + " tensors, model expects " +
                  std::to_string(entries.size()));
  }
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto& src = ckpt.tensors[i];
    auto& dst = entries[i];
    if (src.name != dst.name) throw IoError("checkpoint: expected tensor '" + dst.name + "', found '" + src.name + "'");
    if (src.shape != dst.tensor.shape()) {
      throw IoError("checkpoint: tensor '" + src.name + "' has shape " + shape_str(src.shape) + ", model expects " +
                    shape_str(dst.tensor.shape()));
    }
    auto data = dst.tensor.mutable_data();
    std::copy(src.data.begin(), src.data.end(), data.begin());
  }
}

TainModel<float> model_from_checkpoint(const Checkpoint& ckpt) {
  ckpt.config.validate();
  TainModel<float> model(ckpt.config);
  restore_parameters(model, ckpt);
  return model;
}

}  // namespace tain
