#include "hatebench/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "hatebench/error.hpp"
#include "hatebench/table.hpp"

namespace hatebench::numerics {

namespace {

constexpr char kMagic[8] = {'H', 'B', 'C', 'K', 'P', 'T', '0', '1'};

template <typename T>
void put(std::string& out, T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  std::uint64_t bits = 0;
  std::memcpy(&bits, &value, sizeof(T));
  for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xFF));
}

class Reader {
 public:
  Reader(const std::string& data, const std::string& path) : data_(data), path_(path) {}

  template <typename T>
  T get() {
    need(sizeof(T));
    std::uint64_t bits = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i)
      bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
    pos_ += sizeof(T);
    T value;
    std::memcpy(&value, &bits, sizeof(T));
    return value;
  }

  std::string bytes(std::size_t n) {
    need(n);
    std::string s = data_.substr(pos_, n);
    pos_ += n;
    return s;
  }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > data_.size()) throw DataError(path_ + ": truncated checkpoint");
  }
  const std::string& data_;
  const std::string& path_;
  std::size_t pos_ = 0;
};

}  // namespace

const Tensor* Checkpoint::find(const std::string& name) const {
  for (const auto& [n, t] : arrays)
    if (n == name) return &t;
  return nullptr;
}

void write_checkpoint(const Checkpoint& ckpt, const std::string& path) {
  std::string out(kMagic, sizeof kMagic);
  std::string header;
  for (const auto& [k, v] : ckpt.header) header += k + "=" + v + "\n";
  put<std::uint32_t>(out, static_cast<std::uint32_t>(header.size()));
  out += header;
  put<std::uint32_t>(out, static_cast<std::uint32_t>(ckpt.arrays.size()));
  for (const auto& [name, t] : ckpt.arrays) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(name.size()));
    out += name;
    put<std::uint32_t>(out, static_cast<std::uint32_t>(t.rank()));
    for (auto d : t.shape()) put<std::uint64_t>(out, d);
    for (double v : t.values()) put<double>(out, v);
  }
  write_text_file(path, out);
}

Checkpoint read_checkpoint(const std::string& path) {
  const std::string data = read_text_file(path);
  Reader in(data, path);
  if (in.bytes(sizeof kMagic) != std::string(kMagic, sizeof kMagic))
    throw DataError(path + ": not a checkpoint file");
  Checkpoint ckpt;
  std::istringstream header(in.bytes(in.get<std::uint32_t>()));
  std::string line;
  while (std::getline(header, line)) {
    const auto eq = line.find('=');
    if (eq != std::string::npos) ckpt.header[line.substr(0, eq)] = line.substr(eq + 1);
  }
  const auto n = in.get<std::uint32_t>();
  for (std::uint32_t a = 0; a < n; ++a) {
    std::string name = in.bytes(in.get<std::uint32_t>());
    const auto rank = in.get<std::uint32_t>();
    if (rank > 8) throw DataError(path + ": implausible rank for array " + name);
    std::vector<std::size_t> shape(rank);
    for (auto& d : shape) d = static_cast<std::size_t>(in.get<std::uint64_t>());
    Tensor t(shape);
    for (auto& v : t.values()) v = in.get<double>();
    ckpt.arrays.emplace_back(std::move(name), std::move(t));
  }
  return ckpt;
}

Checkpoint make_checkpoint(const LayerParams& params, std::map<std::string, std::string> header) {
  Checkpoint c;
  c.header = std::move(header);
  params.for_each([&](const std::string& name, const Tensor& t) { c.arrays.emplace_back(name, t); });
  return c;
}

void load_parameters(const Checkpoint& ckpt, LayerParams& params) {
  params.for_each([&](const std::string& name, Tensor& t) {
    const Tensor* src = ckpt.find(name);
    if (!src) throw DataError("checkpoint is missing array '" + name + "'");
    if (!src->same_shape(t))
      throw DataError("checkpoint array '" + name + "' has shape " + src->shape_string() +
                      ", expected " + t.shape_string());
    t = *src;
  });
}

}  // namespace hatebench::numerics
