#include "dkg/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "dkg/error.hpp"

namespace dkg {
namespace {

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

class Reader {
 public:
  explicit Reader(const std::vector<std::uint8_t>& bytes) : bytes_(bytes) {}

  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return v;
  }

  std::string str(std::size_t n) {
    need(n);
    std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), n);
    pos_ += n;
    return s;
  }

  bool done() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) throw ParseError("checkpoint truncated at byte " + std::to_string(pos_));
  }

  const std::vector<std::uint8_t>& bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> encode_params(const ParamSet& params) {
  std::vector<std::uint8_t> out(std::begin(kCheckpointMagic), std::end(kCheckpointMagic));
  put_u32(out, kCheckpointVersion);
  put_u32(out, static_cast<std::uint32_t>(params.size()));
  for (const auto& [name, t] : params) {
    put_u32(out, static_cast<std::uint32_t>(name.size()));
    out.insert(out.end(), name.begin(), name.end());
    put_u32(out, static_cast<std::uint32_t>(t.rank()));
    for (auto e : t.shape()) put_u32(out, static_cast<std::uint32_t>(e));
    for (Real v : t.values()) put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
  }
  return out;
}

ParamSet decode_params(const std::vector<std::uint8_t>& bytes) {
  Reader in(bytes);
  if (in.str(sizeof(kCheckpointMagic)) != std::string(kCheckpointMagic, sizeof(kCheckpointMagic))) {
    throw ParseError("not a parameter checkpoint (bad magic)");
  }
  const std::uint32_t version = in.u32();
  if (version != kCheckpointVersion) {
    throw ParseError("checkpoint version mismatch: file has version " + std::to_string(version) +
                     ", this build reads version " + std::to_string(kCheckpointVersion));
  }
  const std::uint32_t count = in.u32();
  ParamSet params;
  for (std::uint32_t k = 0; k < count; ++k) {
    const std::string name = in.str(in.u32());
    const std::uint32_t rank = in.u32();
    Shape shape(rank);
    std::size_t n = 1;
    for (auto& e : shape) {
      e = in.u32();
      n *= e;
    }
    std::vector<Real> values(n);
    for (auto& v : values) v = std::bit_cast<float>(in.u32());
    params.add_values(name, std::move(shape), std::move(values));
  }
  if (!in.done()) throw ParseError("checkpoint has trailing bytes");
  return params;
}

void save_params(const std::filesystem::path& path, const ParamSet& params) {
  const auto bytes = encode_params(params);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("failed writing '" + path.string() + "'");
}

ParamSet load_params(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open checkpoint '" + path.string() + "'");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return decode_params(bytes);
}

void round_to_storage_precision(ParamSet& params) {
  for (const auto& [_, t] : params) {
    Tensor handle = t;
    for (auto& v : handle.mutable_values()) v = static_cast<float>(v);
  }
}

}  // namespace dkg
