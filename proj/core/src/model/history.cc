#include "slr/model/history.h"

#include <algorithm>

namespace slr {

HistoryBuffer::HistoryBuffer(int num_envs, int history_len, int obs_dim)
    : history_len_(history_len), obs_dim_(obs_dim) {
  if (num_envs < 1 || history_len < 1 || obs_dim < 1) {
    throw std::invalid_argument("history: sizes must be positive");
  }
  data_ = MatF::Zero(num_envs, history_len * obs_dim);
}

void HistoryBuffer::Clear(int env) { data_.row(env).setZero(); }

void HistoryBuffer::ClearAll() { data_.setZero(); }

void HistoryBuffer::Push(int env, std::span<const float> frame) {
  if (static_cast<int>(frame.size()) != obs_dim_) {
    throw DimensionError("history: frame has " + std::to_string(frame.size()) +
                         " values, expected " + std::to_string(obs_dim_));
  }
  float* row = data_.row(env).data();
  const int width = history_len_ * obs_dim_;
  std::copy(row + obs_dim_, row + width, row);
  std::copy(frame.begin(), frame.end(), row + width - obs_dim_);
}

void HistoryBuffer::PushAll(const MatF& frames) {
  if (frames.rows() != data_.rows() || frames.cols() != obs_dim_) {
    throw DimensionError("history: frames must be " +
                         ShapeString(data_.rows(), obs_dim_) + ", got " +
                         ShapeString(frames.rows(), frames.cols()));
  }
  for (int i = 0; i < frames.rows(); ++i) {
    Push(i, std::span<const float>(frames.row(i).data(), obs_dim_));
  }
}

}  // namespace slr
