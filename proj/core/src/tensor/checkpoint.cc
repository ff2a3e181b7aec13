#include "slr/tensor/checkpoint.h"

#include <bit>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace slr {

namespace {

using nlohmann::json;

void WriteFloats(std::ofstream& out, const MatF& m) {
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    std::uint32_t bits;
    std::memcpy(&bits, m.data() + i, sizeof(bits));
    if constexpr (std::endian::native == std::endian::big) {
      bits = ((bits & 0xFFu) << 24) | ((bits & 0xFF00u) << 8) |
             ((bits >> 8) & 0xFF00u) | (bits >> 24);
    }
    unsigned char bytes[4] = {
        static_cast<unsigned char>(bits & 0xFFu),
        static_cast<unsigned char>((bits >> 8) & 0xFFu),
        static_cast<unsigned char>((bits >> 16) & 0xFFu),
        static_cast<unsigned char>((bits >> 24) & 0xFFu)};
    out.write(reinterpret_cast<const char*>(bytes), 4);
  }
}

MatF ReadFloats(const std::vector<unsigned char>& blob, std::size_t offset,
                int rows, int cols) {
  const std::size_t count = static_cast<std::size_t>(rows) * cols;
  if ((offset + count) * 4 > blob.size()) {
    throw std::runtime_error("checkpoint: binary sidecar is truncated");
  }
  MatF m(rows, cols);
  for (std::size_t i = 0; i < count; ++i) {
    const unsigned char* b = blob.data() + (offset + i) * 4;
    const std::uint32_t bits = static_cast<std::uint32_t>(b[0]) |
                               (static_cast<std::uint32_t>(b[1]) << 8) |
                               (static_cast<std::uint32_t>(b[2]) << 16) |
                               (static_cast<std::uint32_t>(b[3]) << 24);
    float f;
    std::memcpy(&f, &bits, sizeof(f));
    m.data()[i] = f;
  }
  return m;
}

std::filesystem::path SidecarPath(const std::filesystem::path& manifest) {
  std::filesystem::path bin = manifest;
  bin.replace_extension(".bin");
  return bin;
}

}  // namespace

const ParamSet<float>* Checkpoint::FindNetwork(const std::string& name) const {
  for (const auto& [n, p] : networks) {
    if (n == name) return &p;
  }
  return nullptr;
}

const MatF* Checkpoint::FindTensor(const std::string& name) const {
  for (const auto& [n, t] : tensors) {
    if (n == name) return &t;
  }
  return nullptr;
}

void SaveCheckpoint(const Checkpoint& ckpt,
                    const std::filesystem::path& manifest) {
  const std::filesystem::path bin = SidecarPath(manifest);
  json j;
  j["format_version"] = kCheckpointFormatVersion;
  j["step_count"] = ckpt.step_count;
  j["config_hash"] = ckpt.config_hash;
  j["binary"] = bin.filename().string();
  j["metadata"] = ckpt.metadata;
  j["networks"] = json::array();
  j["tensors"] = json::array();

  std::ofstream out(bin, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("checkpoint: cannot write " + bin.string());
  std::size_t offset = 0;
  auto add_tensor = [&](const std::string& name, const MatF& m) {
    j["tensors"].push_back({{"name", name},
                            {"shape", {m.rows(), m.cols()}},
                            {"offset", offset}});
    WriteFloats(out, m);
    offset += static_cast<std::size_t>(m.size());
  };
  for (const auto& [name, params] : ckpt.networks) {
    j["networks"].push_back({{"name", name},
                             {"layer_sizes", params.layer_sizes()},
                             {"activation", ActivationName(params.activation())}});
    const auto tensors = params.Tensors();
    for (std::size_t i = 0; i < tensors.size(); ++i) {
      add_tensor(name + "/" + ParamSet<float>::TensorName(static_cast<int>(i)),
                 *tensors[i]);
    }
  }
  for (const auto& [name, m] : ckpt.tensors) add_tensor(name, m);
  out.close();
  if (!out) throw std::runtime_error("checkpoint: failed writing " + bin.string());

  std::ofstream mf(manifest, std::ios::trunc);
  if (!mf) {
    throw std::runtime_error("checkpoint: cannot write " + manifest.string());
  }
  mf << j.dump(2) << "\n";
  if (!mf) {
    throw std::runtime_error("checkpoint: failed writing " + manifest.string());
  }
}

Checkpoint LoadCheckpoint(const std::filesystem::path& manifest) {
  std::ifstream mf(manifest);
  if (!mf) throw std::runtime_error("checkpoint: cannot open " + manifest.string());
  json j;
  try {
    mf >> j;
  } catch (const json::exception& e) {
    throw std::runtime_error("checkpoint: bad manifest " + manifest.string() +
                             ": " + e.what());
  }
  if (j.value("format_version", -1) != kCheckpointFormatVersion) {
    throw std::runtime_error("checkpoint: unsupported format version in " +
                             manifest.string());
  }
  const std::filesystem::path bin =
      manifest.parent_path() / j.at("binary").get<std::string>();
  std::ifstream bf(bin, std::ios::binary);
  if (!bf) throw std::runtime_error("checkpoint: cannot open " + bin.string());
  std::vector<unsigned char> blob((std::istreambuf_iterator<char>(bf)),
                                  std::istreambuf_iterator<char>());

  Checkpoint ckpt;
  ckpt.step_count = j.at("step_count").get<std::int64_t>();
  ckpt.config_hash = j.at("config_hash").get<std::string>();
  ckpt.metadata = j.value("metadata", json::object());

  const json& tensors = j.at("tensors");
  std::size_t next = 0;
  auto take = [&](const std::string& expected) {
    if (next >= tensors.size()) {
      throw std::runtime_error("checkpoint: missing tensor " + expected);
    }
    const json& t = tensors[next++];
    if (t.at("name").get<std::string>() != expected) {
      throw std::runtime_error("checkpoint: expected tensor " + expected +
                               ", found " + t.at("name").get<std::string>());
    }
    return ReadFloats(blob, t.at("offset").get<std::size_t>(),
                      t.at("shape")[0].get<int>(), t.at("shape")[1].get<int>());
  };
  for (const json& n : j.at("networks")) {
    const std::string name = n.at("name").get<std::string>();
    ParamSet<float> params(n.at("layer_sizes").get<std::vector<int>>(),
                           ParseActivation(n.at("activation").get<std::string>()));
    auto slots = params.Tensors();
    for (std::size_t i = 0; i < slots.size(); ++i) {
      MatF m = take(name + "/" + ParamSet<float>::TensorName(static_cast<int>(i)));
      if (m.rows() != slots[i]->rows() || m.cols() != slots[i]->cols()) {
        throw std::runtime_error("checkpoint: shape mismatch in " + name);
      }
      *slots[i] = std::move(m);
    }
    ckpt.networks.emplace_back(name, std::move(params));
  }
  while (next < tensors.size()) {
    const json& t = tensors[next];
    const std::string name = t.at("name").get<std::string>();
    ckpt.tensors.emplace_back(name, take(name));
  }
  return ckpt;
}

}  // namespace slr
