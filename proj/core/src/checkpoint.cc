#include "spvs/checkpoint.h"

#include <bit>
#include <cstring>

#include "spvs/errors.h"
#include "spvs/file_io.h"

namespace spvs {
namespace {

constexpr char kMagic[4] = {'S', 'P', 'V', 'S'};

class Writer {
 public:
  void U8(std::uint8_t v) { bytes_.push_back(v); }
  void U16(std::uint16_t v) {
    for (int i = 0; i < 2; ++i) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void U32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void F32(float v) { U32(std::bit_cast<std::uint32_t>(v)); }
  void Raw(const void* p, std::size_t n) {
    auto* c = static_cast<const std::uint8_t*>(p);
    bytes_.insert(bytes_.end(), c, c + n);
  }
  std::vector<std::uint8_t> Take() { return std::move(bytes_); }

 private:
  std::vector<std::uint8_t> bytes_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}
  std::uint8_t U8() { return Need(1)[0]; }
  std::uint16_t U16() {
    auto p = Need(2);
    return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
  }
  std::uint32_t U32() {
    auto p = Need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(p[i]) << (8 * i);
    return v;
  }
  float F32() { return std::bit_cast<float>(U32()); }
  std::span<const std::uint8_t> Need(std::size_t n) {
    if (pos_ + n > bytes_.size()) {
      throw FormatError("checkpoint truncated at byte " + std::to_string(pos_));
    }
    auto s = bytes_.subspan(pos_, n);
    pos_ += n;
    return s;
  }
  bool AtEnd() const { return pos_ == bytes_.size(); }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> EncodeCheckpoint(std::span<const NamedArray> arrays) {
  Writer w;
  w.Raw(kMagic, 4);
  w.U32(kCheckpointVersion);
  w.U32(static_cast<std::uint32_t>(arrays.size()));
  for (const NamedArray& a : arrays) {
    if (a.name.size() > 0xffff) throw FormatError("tensor name too long: " + a.name);
    if (a.shape.size() > 0xff) throw FormatError("tensor rank too large: " + a.name);
    if (NumElements(a.shape) != a.values.size()) {
      throw DimensionError("checkpoint tensor " + a.name + " has inconsistent payload");
    }
    w.U16(static_cast<std::uint16_t>(a.name.size()));
    w.Raw(a.name.data(), a.name.size());
    w.U8(static_cast<std::uint8_t>(a.shape.size()));
    for (std::size_t e : a.shape) w.U32(static_cast<std::uint32_t>(e));
    for (float v : a.values) w.F32(v);
  }
  return w.Take();
}

std::vector<NamedArray> DecodeCheckpoint(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  auto magic = r.Need(4);
  if (std::memcmp(magic.data(), kMagic, 4) != 0) {
    throw FormatError("not a checkpoint: bad magic (expected \"SPVS\")");
  }
  const std::uint32_t version = r.U32();
  if (version != kCheckpointVersion) {
    throw FormatError("unsupported checkpoint version " + std::to_string(version) +
                      " (expected " + std::to_string(kCheckpointVersion) + ")");
  }
  const std::uint32_t count = r.U32();
  std::vector<NamedArray> arrays;
  arrays.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    NamedArray a;
    const std::uint16_t len = r.U16();
    auto name = r.Need(len);
    a.name.assign(name.begin(), name.end());
    const std::uint8_t rank = r.U8();
    for (std::uint8_t d = 0; d < rank; ++d) a.shape.push_back(r.U32());
    a.values.resize(NumElements(a.shape));
    for (float& v : a.values) v = r.F32();
    arrays.push_back(std::move(a));
  }
  if (!r.AtEnd()) throw FormatError("trailing bytes after checkpoint payload");
  return arrays;
}

std::vector<NamedArray> ToNamedArrays(const ParameterStore& store) {
  std::vector<NamedArray> arrays;
  for (std::size_t i = 0; i < store.size(); ++i) {
    const Tensor& t = store.tensors()[i];
    NamedArray a{store.names()[i], t.shape(), {}};
    a.values.reserve(t.numel());
    for (double v : t.data()) a.values.push_back(static_cast<float>(v));
    arrays.push_back(std::move(a));
  }
  return arrays;
}

void SaveCheckpoint(const std::filesystem::path& path, const ParameterStore& store) {
  WriteFileAtomic(path, EncodeCheckpoint(ToNamedArrays(store)));
}

std::vector<NamedArray> ReadCheckpoint(const std::filesystem::path& path) {
  try {
    return DecodeCheckpoint(ReadFileBytes(path));
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

std::vector<std::string> LoadIntoStore(ParameterStore& store, std::span<const NamedArray> arrays,
                                       const std::function<bool(const std::string&)>& keep) {
  std::vector<std::string> loaded;
  for (const NamedArray& a : arrays) {
    if (!store.Contains(a.name) || !keep(a.name)) continue;
    const Tensor& t = store.Get(a.name);
    if (t.shape() != a.shape) {
      throw DimensionError("checkpoint tensor " + a.name + " has shape " +
                           ShapeToString(a.shape) + ", model expects " +
                           ShapeToString(t.shape()));
    }
    std::vector<double> values(a.values.begin(), a.values.end());
    store.Assign(a.name, values);
    loaded.push_back(a.name);
  }
  return loaded;
}

}  // namespace spvs
