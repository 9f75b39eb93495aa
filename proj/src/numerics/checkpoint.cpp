#include "vega/numerics/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "vega/core/error.hpp"

namespace vega::numerics {

namespace {

constexpr char kMagic[4] = {'V', 'G', 'C', 'K'};

void put_u64(std::ostream& out, std::uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(b), 8);
}

std::uint64_t get_u64(std::istream& in) {
  unsigned char b[8];
  in.read(reinterpret_cast<char*>(b), 8);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

void put_floats(std::ostream& out, const float* data, std::size_t n) {
  std::vector<unsigned char> buf(n * 4);
  for (std::size_t i = 0; i < n; ++i) {
    const auto bits = std::bit_cast<std::uint32_t>(data[i]);
    for (int b = 0; b < 4; ++b) buf[i * 4 + b] = static_cast<unsigned char>(bits >> (8 * b));
  }
  out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
}

}  // namespace

const Tensor<float>& Checkpoint::tensor(const std::string& name) const {
  for (const auto& t : tensors) {
    if (t.name == name) return t.value;
  }
  throw NotFound("checkpoint has no tensor '" + name + "'");
}

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  nlohmann::json header{{"format", "vega-checkpoint-1"}, {"step", ckpt.step}, {"meta", ckpt.meta}};
  auto& list = header["tensors"] = nlohmann::json::array();
  std::uint64_t offset = 0;
  for (const auto& t : ckpt.tensors) {
    list.push_back({{"name", t.name}, {"shape", {t.value.rows(), t.value.cols()}}, {"offset", offset}});
    offset += static_cast<std::uint64_t>(t.value.size()) * 4;
  }
  const std::string text = header.dump();
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw NotFound("cannot write checkpoint " + path);
  out.write(kMagic, 4);
  put_u64(out, text.size());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (const auto& t : ckpt.tensors) put_floats(out, t.value.data(), static_cast<std::size_t>(t.value.size()));
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw NotFound("checkpoint not found: " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0) throw InvalidArgument(path + ": not a checkpoint");
  const std::uint64_t len = get_u64(in);
  std::string text(len, '\0');
  in.read(text.data(), static_cast<std::streamsize>(len));
  if (!in) throw InvalidArgument(path + ": truncated header");
  const auto header = nlohmann::json::parse(text);
  Checkpoint ckpt;
  ckpt.step = header.at("step").get<std::int64_t>();
  ckpt.meta = header.value("meta", nlohmann::json::object());
  std::vector<unsigned char> buf;
  for (const auto& entry : header.at("tensors")) {
    const auto rows = entry.at("shape")[0].get<Index>();
    const auto cols = entry.at("shape")[1].get<Index>();
    Tensor<float> value(rows, cols);
    buf.resize(static_cast<std::size_t>(value.size()) * 4);
    in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    if (!in) throw InvalidArgument(path + ": truncated tensor data");
    for (Index i = 0; i < value.size(); ++i) {
      std::uint32_t bits = 0;
      for (int b = 0; b < 4; ++b) bits |= static_cast<std::uint32_t>(buf[static_cast<std::size_t>(i) * 4 + b]) << (8 * b);
      value.data()[i] = std::bit_cast<float>(bits);
    }
    ckpt.tensors.push_back({entry.at("name").get<std::string>(), std::move(value)});
  }
  return ckpt;
}

Checkpoint average_checkpoints(const std::vector<Checkpoint>& ckpts) {
  if (ckpts.empty()) throw InvalidArgument("average_checkpoints: no checkpoints");
  Checkpoint out = ckpts.front();
  std::vector<Tensor<double>> sums;
  for (const auto& t : out.tensors) sums.push_back(t.value.cast<double>());
  auto& sources = out.meta["sources"] = nlohmann::json::array();
  sources.push_back(ckpts.front().step);
  for (std::size_t c = 1; c < ckpts.size(); ++c) {
    if (ckpts[c].meta.value("config", nlohmann::json()) != out.meta.value("config", nlohmann::json())) {
      throw InvalidArgument("average_checkpoints: model configs differ");
    }
    if (ckpts[c].tensors.size() != out.tensors.size()) {
      throw InvalidArgument("average_checkpoints: tensor count mismatch");
    }
    sources.push_back(ckpts[c].step);
    for (std::size_t i = 0; i < out.tensors.size(); ++i) {
      const auto& t = ckpts[c].tensors[i];
      if (t.name != out.tensors[i].name) throw InvalidArgument("average_checkpoints: name mismatch " + t.name);
      require_same_shape(shape_of(t.value), shape_of(out.tensors[i].value), "average_checkpoints");
      sums[i] += t.value.cast<double>();
    }
    out.step = std::max(out.step, ckpts[c].step);
  }
  const double k = static_cast<double>(ckpts.size());
  for (std::size_t i = 0; i < out.tensors.size(); ++i) out.tensors[i].value = (sums[i] / k).cast<float>();
  out.meta["averaged"] = ckpts.size();
  return out;
}

}  // namespace vega::numerics
