#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "imp/design.h"

namespace imp {

// Row-major grid of importance values in [0, 1].
class ImportanceMap {
 public:
  ImportanceMap() = default;
  // Filled with a constant value.
  ImportanceMap(int w, int h, double fill = 0.0);
  // Throws Error(kDimensionMismatch) on a size mismatch and
  // Error(kMalformedResponse) when a value is non-finite or outside [0, 1].
  ImportanceMap(int w, int h, std::vector<double> values);

  int width() const { return w_; }
  int height() const { return h_; }
  std::size_t size() const { return values_.size(); }
  double at(int x, int y) const { return values_[static_cast<std::size_t>(y) * w_ + x]; }
  std::span<const double> values() const { return values_; }

  friend bool operator==(const ImportanceMap&, const ImportanceMap&) = default;

 private:
  int w_ = 0;
  int h_ = 0;
  std::vector<double> values_;
};

// Bilinear resampling with cell-center alignment.
ImportanceMap resample_bilinear(const ImportanceMap& map, int w, int h);

// Per-cell fraction of masks that mark the cell.
ImportanceMap aggregate(std::span<const BinaryMask> masks);

// |a and b| / |a or b|; 1.0 when both masks are empty.
double iou(const BinaryMask& a, const BinaryMask& b);

struct SentinelResult {
  BinaryMask annotated;
  BinaryMask truth;
};

struct SentinelGateConfig {
  double iou_threshold = 0.6;
  double pass_fraction = 2.0 / 3.0;
};

struct GateDecision {
  bool accepted = false;
  std::size_t passed = 0;
  std::vector<double> ious;
};

// A sentinel passes when its IoU is strictly greater than the threshold.
GateDecision sentinel_gate(std::span<const SentinelResult> results,
                           const SentinelGateConfig& config = {});
GateDecision sentinel_gate_ious(std::vector<double> ious, const SentinelGateConfig& config = {});

// Mean of the map over the box's cells at map resolution.
// Throws Error(kEmptyMask) when the box covers no cell centers.
double box_score(const ImportanceMap& map, const BBox& box, const VectorDesign& design);
double element_score(const ImportanceMap& map, const Element& element,
                     const VectorDesign& design);

// Scores for every element in design order.
std::vector<double> element_scores(const ImportanceMap& map, const VectorDesign& design);

struct RegionStats {
  std::optional<double> face_mean;
  std::optional<double> text_mean;
};

RegionStats region_stats(const ImportanceMap& map, std::span<const BBox> face_boxes,
                         std::span<const BBox> text_boxes, const VectorDesign& design);

// Importance-weighted centroid in unit-square coordinates.
std::pair<double, double> map_centroid(const ImportanceMap& map);

}  // namespace imp
