#include "lrf/model.hpp"

#include <zlib.h>

#include <bit>
#include <fstream>
#include <iterator>
#include <limits>

#include "lrf/error.hpp"
#include "lrf/fileutil.hpp"

namespace lrf {
namespace {

// Layout (all little-endian):
//   "LRFM" u16 version u8 strategy
//   u16 in_height u16 in_width u16 out_height u16 out_width u16 taps u16 dilation
//   u8 solver f64 lambda
//   rows, mapping-major: u32 count, count*u32 index, count*f64 weight, f64 bias
//   u32 crc32 of everything above

class Writer {
 public:
  void u8(std::uint8_t v) { buf_.push_back(char(v)); }
  void u16(std::uint16_t v) { put(v, 2); }
  void u32(std::uint32_t v) { put(v, 4); }
  void f64(double v) { put(std::bit_cast<std::uint64_t>(v), 8); }
  void bytes(const char* p, std::size_t n) { buf_.append(p, n); }
  std::string& str() { return buf_; }

 private:
  void put(std::uint64_t v, int n) {
    for (int i = 0; i < n; ++i) buf_.push_back(char((v >> (8 * i)) & 0xFF));
  }
  std::string buf_;
};

class Reader {
 public:
  explicit Reader(std::string_view b) : b_(b) {}
  std::size_t remaining() const { return b_.size() - pos_; }
  std::size_t pos() const { return pos_; }
  bool has(std::size_t n) const { return remaining() >= n; }
  std::uint8_t u8() { return std::uint8_t(get(1)); }
  std::uint16_t u16() { return std::uint16_t(get(2)); }
  std::uint32_t u32() { return std::uint32_t(get(4)); }
  double f64() { return std::bit_cast<double>(get(8)); }

 private:
  std::uint64_t get(int n) {
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) v |= std::uint64_t(std::uint8_t(b_[pos_ + i])) << (8 * i);
    pos_ += std::size_t(n);
    return v;
  }
  std::string_view b_;
  std::size_t pos_ = 0;
};

std::uint32_t crc_of(std::string_view bytes) {
  uLong crc = crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths; feed in chunks for large models.
  std::size_t off = 0;
  while (off < bytes.size()) {
    const auto n = uInt(std::min<std::size_t>(bytes.size() - off, 1u << 30));
    crc = crc32(crc, reinterpret_cast<const Bytef*>(bytes.data() + off), n);
    off += n;
  }
  return std::uint32_t(crc);
}

std::uint16_t narrow16(int v, const char* what) {
  if (v < 0 || v > std::numeric_limits<std::uint16_t>::max())
    throw UsageError(std::string(what) + " does not fit the model file format (" + std::to_string(v) + ")");
  return std::uint16_t(v);
}

constexpr std::size_t kHeaderSize = 4 + 2 + 1 + 6 * 2 + 1 + 8;

}  // namespace

std::string serialize_model(const SparseRowModel& model) {
  model.validate();
  Writer w;
  w.bytes(kModelMagic, 4);
  w.u16(kModelVersion);
  w.u8(std::uint8_t(model.strategy));
  const auto& g = model.geometry;
  w.u16(narrow16(g.in_height, "input height"));
  w.u16(narrow16(g.in_width, "input width"));
  w.u16(narrow16(g.out_height, "output height"));
  w.u16(narrow16(g.out_width, "output width"));
  w.u16(narrow16(g.taps_per_side, "taps per side"));
  w.u16(narrow16(g.dilation, "dilation"));
  w.u8(std::uint8_t(model.solver));
  w.f64(model.lambda);
  for (const auto& mapping : model.mappings) {
    for (const auto& r : mapping) {
      w.u32(std::uint32_t(r.indices.size()));
      for (auto i : r.indices) w.u32(i);
      for (double v : r.weights) w.f64(v);
      w.f64(r.bias);
    }
  }
  const auto crc = crc_of(w.str());
  w.u32(crc);
  return std::move(w.str());
}

SparseRowModel deserialize_model(std::string_view bytes) {
  using Kind = ModelFormatError::Kind;
  if (bytes.size() < 4 || bytes.substr(0, 4) != std::string_view(kModelMagic, 4))
    throw ModelFormatError(Kind::BadMagic, "bad magic: expected 'LRFM'");
  Reader in(bytes.substr(4));
  if (!in.has(kHeaderSize - 4)) throw ModelFormatError(Kind::Truncated, "truncated model header");
  const auto version = in.u16();
  if (version != kModelVersion)
    throw ModelFormatError(Kind::VersionMismatch, "unsupported model version " + std::to_string(version) +
                                                      " (expected " + std::to_string(kModelVersion) + ")");
  SparseRowModel m;
  const auto strategy = in.u8();
  if (strategy > std::uint8_t(ChannelStrategy::JointColor))
    throw ModelFormatError(Kind::Malformed, "unknown channel strategy code " + std::to_string(strategy));
  m.strategy = ChannelStrategy(strategy);
  m.geometry.in_height = in.u16();
  m.geometry.in_width = in.u16();
  m.geometry.out_height = in.u16();
  m.geometry.out_width = in.u16();
  m.geometry.taps_per_side = in.u16();
  m.geometry.dilation = in.u16();
  const auto solver = in.u8();
  if (solver > std::uint8_t(SolverKind::Omp))
    throw ModelFormatError(Kind::Malformed, "unknown solver code " + std::to_string(solver));
  m.solver = SolverKind(solver);
  m.lambda = in.f64();
  try {
    m.geometry.validate();
  } catch (const UsageError& e) {
    throw ModelFormatError(Kind::Malformed, e.what());
  }

  const std::size_t K = m.geometry.output_size();
  const std::size_t D = m.geometry.input_size();
  m.mappings.resize(SparseRowModel::mappings_for(m.strategy));
  std::size_t global_row = 0;
  for (auto& mapping : m.mappings) {
    mapping.resize(K);
    for (std::size_t k = 0; k < K; ++k, ++global_row) {
      auto truncated = [&] {
        return ModelFormatError(Kind::Truncated, "model file truncated at row " + std::to_string(global_row));
      };
      if (!in.has(4)) throw truncated();
      const std::uint32_t count = in.u32();
      if (count > D)
        throw ModelFormatError(Kind::Malformed, "row " + std::to_string(global_row) + " claims " +
                                                    std::to_string(count) + " weights for " + std::to_string(D) +
                                                    " inputs");
      if (!in.has(std::size_t(count) * 12 + 8)) throw truncated();
      auto& r = mapping[k];
      r.indices.resize(count);
      r.weights.resize(count);
      for (auto& i : r.indices) i = in.u32();
      for (auto& v : r.weights) v = in.f64();
      r.bias = in.f64();
      for (std::size_t t = 0; t < count; ++t) {
        if (r.indices[t] >= D)
          throw ModelFormatError(Kind::IndexOutOfRange, "row " + std::to_string(global_row) + ": index " +
                                                            std::to_string(r.indices[t]) + " out of range [0, " +
                                                            std::to_string(D) + ")");
        if (t > 0 && r.indices[t] <= r.indices[t - 1])
          throw ModelFormatError(Kind::Malformed,
                                 "row " + std::to_string(global_row) + ": indices not strictly increasing");
      }
    }
  }
  const std::size_t body_end = 4 + in.pos();
  if (!in.has(4)) throw ModelFormatError(Kind::Truncated, "model file truncated before checksum");
  const auto stored = in.u32();
  if (in.remaining() != 0)
    throw ModelFormatError(Kind::Malformed, std::to_string(in.remaining()) + " trailing byte(s) after checksum");
  if (stored != crc_of(bytes.substr(0, body_end)))
    throw ModelFormatError(Kind::Checksum, "model checksum mismatch");
  return m;
}

void save_model(const SparseRowModel& model, const std::filesystem::path& path) {
  write_file_atomically(path, serialize_model(model));
}

SparseRowModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open model " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    return deserialize_model(bytes);
  } catch (const ModelFormatError& e) {
    throw ModelFormatError(e.kind(), path.string() + ": " + e.what());
  }
}

}  // namespace lrf
