#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "wavefuse/error.hpp"
#include "wavefuse/network.hpp"

namespace wavefuse::network {

namespace {

constexpr unsigned char kMagic[4] = {'W', 'V', 'F', 'S'};

std::uint64_t fnv1a(std::span<const unsigned char> bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char b : bytes) {
    h ^= b;
    h *= 0x100000001b3ULL;
  }
  return h;
}

class Writer {
 public:
  void u32(std::uint32_t v) { put(v, 4); }
  void u64(std::uint64_t v) { put(v, 8); }
  void f64(double v) { put(std::bit_cast<std::uint64_t>(v), 8); }
  void raw(std::span<const unsigned char> b) { out.insert(out.end(), b.begin(), b.end()); }
  std::vector<unsigned char> out;

 private:
  void put(std::uint64_t v, int n) {
    for (int i = 0; i < n; ++i) out.push_back(static_cast<unsigned char>(v >> (8 * i)));
  }
};

class Reader {
 public:
  explicit Reader(std::span<const unsigned char> b) : bytes_(b) {}
  std::uint32_t u32(const char* what) { return static_cast<std::uint32_t>(get(4, what)); }
  std::uint64_t u64(const char* what) { return get(8, what); }
  std::span<const unsigned char> take(std::size_t n, const char* what) {
    need(n, what);
    auto s = bytes_.subspan(pos_, n);
    pos_ += n;
    return s;
  }
  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  void need(std::size_t n, const char* what) {
    if (remaining() < n) {
      throw FormatError(std::string("model file truncated while reading ") + what);
    }
  }
  std::uint64_t get(int n, const char* what) {
    need(static_cast<std::size_t>(n), what);
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) v |= static_cast<std::uint64_t>(bytes_[pos_ + i]) << (8 * i);
    pos_ += static_cast<std::size_t>(n);
    return v;
  }
  std::span<const unsigned char> bytes_;
  std::size_t pos_ = 0;
};

void write_blocks(Writer& w, const std::vector<ConvBlockSpec>& blocks) {
  w.u32(static_cast<std::uint32_t>(blocks.size()));
  for (const auto& b : blocks) {
    w.u32(b.in);
    w.u32(b.mid);
    w.u32(b.out);
  }
}

std::vector<ConvBlockSpec> read_blocks(Reader& r) {
  const std::uint32_t n = r.u32("block count");
  if (n > 1024) throw FormatError("implausible block count " + std::to_string(n));
  std::vector<ConvBlockSpec> blocks(n);
  for (auto& b : blocks) {
    b.in = r.u32("block table");
    b.mid = r.u32("block table");
    b.out = r.u32("block table");
  }
  return blocks;
}

}  // namespace

std::vector<unsigned char> serialize_model(const ModelWeights& weights) {
  weights.validate();
  Writer w;
  w.raw(kMagic);
  w.u32(ModelWeights::kFormatVersion);
  const auto& s = weights.spec;
  w.u32(s.kernel_size);
  w.u32(s.feature_channels);
  write_blocks(w, s.encoder);
  write_blocks(w, s.decoder);
  w.u32(s.final_in);
  w.u32(s.final_out);
  w.u64(weights.parameter_count());

  Writer payload;
  for (const auto& l : weights.layers) {
    for (double v : l.kernels.values()) payload.f64(v);
    for (double v : l.bias.values()) payload.f64(v);
  }
  w.raw(payload.out);
  w.u64(fnv1a(payload.out));
  return std::move(w.out);
}

ModelWeights deserialize_model(std::span<const unsigned char> bytes) {
  Reader r(bytes);
  auto magic = r.take(4, "magic");
  if (std::memcmp(magic.data(), kMagic, 4) != 0) throw FormatError("not a model file (bad magic)");
  const std::uint32_t version = r.u32("version");
  if (version != ModelWeights::kFormatVersion) {
    throw VersionError("unsupported model format version " + std::to_string(version) + " (expected " +
                       std::to_string(ModelWeights::kFormatVersion) + ")");
  }
  ArchitectureSpec spec;
  spec.kernel_size = r.u32("kernel size");
  spec.feature_channels = r.u32("feature width");
  spec.encoder = read_blocks(r);
  spec.decoder = read_blocks(r);
  spec.final_in = r.u32("output layer");
  spec.final_out = r.u32("output layer");
  try {
    spec.validate();
  } catch (const ModelError& e) {
    throw FormatError(std::string("invalid architecture in model file: ") + e.what());
  }

  const std::uint64_t count = r.u64("parameter count");
  std::uint64_t expected = 0;
  const auto shapes = spec.kernel_shapes();
  for (const auto& sh : shapes) expected += shape_volume(sh) + sh[0];
  if (count != expected) {
    throw FormatError("parameter count " + std::to_string(count) + " does not match architecture (" +
                      std::to_string(expected) + ")");
  }
  auto payload = r.take(count * 8, "parameters");
  const std::uint64_t stored = r.u64("checksum");
  if (stored != fnv1a(payload)) throw FormatError("model checksum mismatch");
  if (r.remaining() != 0) throw FormatError("trailing bytes after model checksum");

  Reader p(payload);
  auto next = [&p]() { return std::bit_cast<double>(p.u64("parameters")); };
  ModelWeights w;
  w.spec = spec;
  for (const auto& sh : shapes) {
    numerics::ConvLayerParams layer(sh[0], sh[1], sh[2]);
    for (double& v : layer.kernels.values()) v = next();
    for (double& v : layer.bias.values()) v = next();
    w.layers.push_back(std::move(layer));
  }
  return w;
}

void save_model(const ModelWeights& weights, const std::filesystem::path& path) {
  const auto bytes = serialize_model(weights);
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write model file: " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("failed writing model file: " + path.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot move model file into place: " + path.string() + ": " + ec.message());
}

ModelWeights load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open model file: " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return deserialize_model(bytes);
}

}  // namespace wavefuse::network
