#include "slr/env/terrain.h"

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

namespace slr {

namespace {

constexpr std::array<std::string_view, 5> kTerrainNames = {
    "flat", "slope_up", "slope_down", "steps_up", "steps_down"};

bool IsSteps(TerrainMode m) {
  return m == TerrainMode::kStepsUp || m == TerrainMode::kStepsDown;
}

double Sign(TerrainMode m) {
  return (m == TerrainMode::kSlopeDown || m == TerrainMode::kStepsDown) ? -1.0
                                                                          : 1.0;
}

// integral of floor(t / w) over [0, v]
double FloorIntegral(double v, double w) {
  const double k = std::floor(v / w);
  return w * k * (k - 1.0) / 2.0 + k * (v - k * w);
}

}  // namespace

std::string_view TerrainName(TerrainMode mode) {
  return kTerrainNames[static_cast<std::size_t>(mode)];
}

TerrainMode ParseTerrain(std::string_view name) {
  for (std::size_t i = 0; i < kTerrainNames.size(); ++i) {
    if (kTerrainNames[i] == name) return static_cast<TerrainMode>(i);
  }
  throw std::invalid_argument("unknown terrain mode '" + std::string(name) +
                              "'");
}

std::vector<TerrainMode> AllTerrains() {
  return {TerrainMode::kFlat, TerrainMode::kSlopeUp, TerrainMode::kSlopeDown,
          TerrainMode::kStepsUp, TerrainMode::kStepsDown};
}

double TerrainHeight(double x, TerrainMode mode, double scale,
                     const StepShape& shape) {
  switch (mode) {
    case TerrainMode::kFlat:
      return 0.0;
    case TerrainMode::kSlopeUp:
    case TerrainMode::kSlopeDown:
      return Sign(mode) * scale * x;
    case TerrainMode::kStepsUp:
    case TerrainMode::kStepsDown:
      return Sign(mode) * std::floor(x / shape.width) * scale * shape.height;
  }
  return 0.0;
}

Terrain::Terrain(TerrainMode mode, double scale, StepShape shape)
    : shape_(shape) {
  if (scale < 0.0) throw std::invalid_argument("terrain: scale must be >= 0");
  if (shape.width <= 0.0) {
    throw std::invalid_argument("terrain: step width must be positive");
  }
  segments_.push_back({mode, scale, 0.0, 0.0});
}

void Terrain::Append(TerrainMode mode, double scale, double x_start) {
  if (scale < 0.0) throw std::invalid_argument("terrain: scale must be >= 0");
  if (x_start <= segments_.back().x_start) {
    throw std::invalid_argument("terrain: segments must start in order");
  }
  const double offset = Height(x_start);
  segments_.push_back({mode, scale, x_start, offset});
}

const Terrain::Segment& Terrain::SegmentAt(double x) const {
  std::size_t i = segments_.size() - 1;
  while (i > 0 && x < segments_[i].x_start) --i;
  return segments_[i];
}

double Terrain::Local(const Segment& s, double x) const {
  const double u = x - s.x_start;
  if (IsSteps(s.mode)) {
    return TerrainHeight(u + 0.5 * shape_.width, s.mode, s.scale, shape_);
  }
  return TerrainHeight(u, s.mode, s.scale, shape_);
}

double Terrain::Height(double x) const {
  const Segment& s = SegmentAt(x);
  return s.offset + Local(s, x);
}

TerrainMode Terrain::ModeAt(double x) const { return SegmentAt(x).mode; }

double Terrain::SmoothHeight(double x, double radius) const {
  if (radius <= 0.0) return Height(x);
  // integrate the profile piece by piece over the window
  const double lo = x - radius;
  const double hi = x + radius;
  double total = 0.0;
  for (std::size_t i = 0; i < segments_.size(); ++i) {
    const Segment& s = segments_[i];
    const double a = (i == 0) ? lo : std::max(lo, s.x_start);
    const double b =
        (i + 1 < segments_.size()) ? std::min(hi, segments_[i + 1].x_start) : hi;
    if (b <= a) continue;
    const double ua = a - s.x_start;
    const double ub = b - s.x_start;
    double integral = 0.0;
    if (IsSteps(s.mode)) {
      const double w = shape_.width;
      const double rise = Sign(s.mode) * s.scale * shape_.height;
      integral = rise * (FloorIntegral(ub + 0.5 * w, w) -
                         FloorIntegral(ua + 0.5 * w, w));
    } else if (s.mode != TerrainMode::kFlat) {
      integral = Sign(s.mode) * s.scale * 0.5 * (ub * ub - ua * ua);
    }
    total += s.offset * (b - a) + integral;
  }
  return total / (2.0 * radius);
}

double Terrain::SmoothSlope(double x, double radius) const {
  if (radius <= 0.0) {
    const Segment& s = SegmentAt(x);
    if (s.mode == TerrainMode::kSlopeUp || s.mode == TerrainMode::kSlopeDown) {
      return Sign(s.mode) * s.scale;
    }
    return 0.0;
  }
  return (Height(x + radius) - Height(x - radius)) / (2.0 * radius);
}

}  // namespace slr
