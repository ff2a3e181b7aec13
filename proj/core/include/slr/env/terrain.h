#ifndef SLR_ENV_TERRAIN_H_
#define SLR_ENV_TERRAIN_H_

#include <string_view>
#include <vector>

namespace slr {

enum class TerrainMode { kFlat, kSlopeUp, kSlopeDown, kStepsUp, kStepsDown };

std::string_view TerrainName(TerrainMode mode);
// throws std::invalid_argument on unknown names
TerrainMode ParseTerrain(std::string_view name);
std::vector<TerrainMode> AllTerrains();

// Staircase geometry: each run of `width` metres rises by scale * height.
struct StepShape {
  double height = 1.0;
  double width = 0.5;

  bool operator==(const StepShape&) const = default;
};

// Height profile of one terrain mode:
//   flat        0
//   slope_up    +scale * x
//   slope_down  -scale * x
//   steps_up    +floor(x / width) * scale * height
//   steps_down  -floor(x / width) * scale * height
double TerrainHeight(double x, TerrainMode mode, double scale,
                     const StepShape& shape = {});

// Piecewise terrain made of consecutive segments along x. Each new segment
// starts where the previous one is at its current height, so the profile is
// continuous across segment starts; step segments start mid-tread.
class Terrain {
 public:
  struct Segment {
    TerrainMode mode;
    double scale;
    double x_start;
    double offset;
  };

  Terrain() : Terrain(TerrainMode::kFlat, 0.0) {}
  Terrain(TerrainMode mode, double scale, StepShape shape = {});

  // segment covering [x_start, inf); x_start must exceed the last start
  void Append(TerrainMode mode, double scale, double x_start);

  double Height(double x) const;
  // height averaged over [x - radius, x + radius], what a wheel of that
  // radius rides on
  double SmoothHeight(double x, double radius) const;
  // derivative of SmoothHeight
  double SmoothSlope(double x, double radius) const;
  TerrainMode ModeAt(double x) const;

  const std::vector<Segment>& segments() const { return segments_; }
  const StepShape& shape() const { return shape_; }

 private:
  const Segment& SegmentAt(double x) const;
  double Local(const Segment& s, double x) const;

  StepShape shape_;
  std::vector<Segment> segments_;
};

}  // namespace slr

#endif  // SLR_ENV_TERRAIN_H_
