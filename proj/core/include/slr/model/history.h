#ifndef SLR_MODEL_HISTORY_H_
#define SLR_MODEL_HISTORY_H_

#include <span>

#include "slr/tensor/matrix.h"

namespace slr {

// Last H observations of each environment, flattened oldest-first into one
// row of H * obs_dim. A fresh episode starts from all zeros, so the leading
// slots stay exactly zero until H frames have been pushed.
class HistoryBuffer {
 public:
  HistoryBuffer(int num_envs, int history_len, int obs_dim);

  // zero the env's history (episode start)
  void Clear(int env);
  void ClearAll();
  // drop the oldest frame and append `frame` as the newest
  void Push(int env, std::span<const float> frame);
  // Push row i of `frames` into env i
  void PushAll(const MatF& frames);

  // num_envs x (H * obs_dim)
  const MatF& flat() const { return data_; }
  int num_envs() const { return static_cast<int>(data_.rows()); }
  int history_len() const { return history_len_; }
  int obs_dim() const { return obs_dim_; }

 private:
  int history_len_;
  int obs_dim_;
  MatF data_;
};

}  // namespace slr

#endif  // SLR_MODEL_HISTORY_H_
