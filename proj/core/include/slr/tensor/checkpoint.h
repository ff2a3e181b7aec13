#ifndef SLR_TENSOR_CHECKPOINT_H_
#define SLR_TENSOR_CHECKPOINT_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "slr/tensor/matrix.h"
#include "slr/tensor/mlp.h"

namespace slr {

inline constexpr int kCheckpointFormatVersion = 1;

// On disk: <stem>.json manifest plus <stem>.bin holding little-endian f32
// arrays concatenated in the order the manifest's "tensors" list gives.
struct Checkpoint {
  std::int64_t step_count = 0;
  std::string config_hash;
  std::vector<std::pair<std::string, ParamSet<float>>> networks;
  std::vector<std::pair<std::string, MatF>> tensors;
  nlohmann::json metadata = nlohmann::json::object();

  const ParamSet<float>* FindNetwork(const std::string& name) const;
  const MatF* FindTensor(const std::string& name) const;
};

// `manifest` must end in .json; the sidecar takes the same stem with .bin
void SaveCheckpoint(const Checkpoint& ckpt,
                    const std::filesystem::path& manifest);
// throws std::runtime_error on I/O problems or a malformed manifest
Checkpoint LoadCheckpoint(const std::filesystem::path& manifest);

}  // namespace slr

#endif  // SLR_TENSOR_CHECKPOINT_H_
