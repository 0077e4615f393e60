#include "imp/importance_map.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "imp/error.h"

namespace imp {

namespace {

void require_same_dims(const BinaryMask& a, const BinaryMask& b) {
  if (a.w != b.w || a.h != b.h) {
    throw Error(ErrorCode::kDimensionMismatch,
                std::to_string(a.w) + "x" + std::to_string(a.h) + " vs " + std::to_string(b.w) +
                    "x" + std::to_string(b.h));
  }
}

// Neumaier-compensated mean over a cell rectangle.
double rect_mean(const ImportanceMap& map, const CellRect& r) {
  double sum = 0.0;
  double comp = 0.0;
  for (int y = r.rows.begin; y < r.rows.end; ++y) {
    for (int x = r.cols.begin; x < r.cols.end; ++x) {
      const double v = map.at(x, y);
      const double t = sum + v;
      comp += std::abs(sum) >= std::abs(v) ? (sum - t) + v : (v - t) + sum;
      sum = t;
    }
  }
  return (sum + comp) / static_cast<double>(r.count());
}

}  // namespace

ImportanceMap::ImportanceMap(int w, int h, double fill)
    : w_(w), h_(h), values_(static_cast<std::size_t>(std::max(w, 0)) * std::max(h, 0), fill) {
  if (w < 1 || h < 1) throw Error(ErrorCode::kDimensionMismatch, "map dimensions must be >= 1");
  if (!(fill >= 0.0 && fill <= 1.0)) {
    throw Error(ErrorCode::kMalformedResponse, "map value outside [0,1]");
  }
}

ImportanceMap::ImportanceMap(int w, int h, std::vector<double> values)
    : w_(w), h_(h), values_(std::move(values)) {
  if (w < 1 || h < 1 || values_.size() != static_cast<std::size_t>(w) * h) {
    throw Error(ErrorCode::kDimensionMismatch, "map values do not match " + std::to_string(w) +
                                                   "x" + std::to_string(h));
  }
  for (double v : values_) {
    if (!(std::isfinite(v) && v >= 0.0 && v <= 1.0)) {
      throw Error(ErrorCode::kMalformedResponse, "map value outside [0,1]: " + std::to_string(v));
    }
  }
}

ImportanceMap resample_bilinear(const ImportanceMap& map, int w, int h) {
  if (w == map.width() && h == map.height()) return map;
  if (w < 1 || h < 1) throw Error(ErrorCode::kDimensionMismatch, "map dimensions must be >= 1");
  std::vector<double> out(static_cast<std::size_t>(w) * h);
  const double sx = static_cast<double>(map.width()) / w;
  const double sy = static_cast<double>(map.height()) / h;
  for (int y = 0; y < h; ++y) {
    const double fy = std::clamp((y + 0.5) * sy - 0.5, 0.0, map.height() - 1.0);
    const int y0 = static_cast<int>(fy);
    const int y1 = std::min(y0 + 1, map.height() - 1);
    const double ty = fy - y0;
    for (int x = 0; x < w; ++x) {
      const double fx = std::clamp((x + 0.5) * sx - 0.5, 0.0, map.width() - 1.0);
      const int x0 = static_cast<int>(fx);
      const int x1 = std::min(x0 + 1, map.width() - 1);
      const double tx = fx - x0;
      const double top = map.at(x0, y0) * (1 - tx) + map.at(x1, y0) * tx;
      const double bottom = map.at(x0, y1) * (1 - tx) + map.at(x1, y1) * tx;
      out[static_cast<std::size_t>(y) * w + x] = std::clamp(top * (1 - ty) + bottom * ty, 0.0, 1.0);
    }
  }
  return ImportanceMap(w, h, std::move(out));
}

ImportanceMap aggregate(std::span<const BinaryMask> masks) {
  if (masks.empty()) throw Error(ErrorCode::kEmptyAnnotationSet, "no masks to aggregate");
  const BinaryMask& first = masks.front();
  std::vector<std::size_t> counts(first.bits.size(), 0);
  for (const BinaryMask& m : masks) {
    require_same_dims(first, m);
    for (std::size_t i = 0; i < counts.size(); ++i) counts[i] += m.bits[i];
  }
  const double n = static_cast<double>(masks.size());
  std::vector<double> values(counts.size());
  for (std::size_t i = 0; i < counts.size(); ++i) values[i] = static_cast<double>(counts[i]) / n;
  return ImportanceMap(first.w, first.h, std::move(values));
}

double iou(const BinaryMask& a, const BinaryMask& b) {
  require_same_dims(a, b);
  std::size_t inter = 0;
  std::size_t uni = 0;
  for (std::size_t i = 0; i < a.bits.size(); ++i) {
    inter += a.bits[i] & b.bits[i];
    uni += a.bits[i] | b.bits[i];
  }
  if (uni == 0) return 1.0;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

GateDecision sentinel_gate_ious(std::vector<double> ious, const SentinelGateConfig& config) {
  if (ious.empty()) throw Error(ErrorCode::kEmptyAnnotationSet, "no sentinel results");
  GateDecision d;
  d.passed = static_cast<std::size_t>(
      std::count_if(ious.begin(), ious.end(), [&](double v) { return v > config.iou_threshold; }));
  // passed/total >= fraction, evaluated without dividing so 2/3 of 3 is exact.
  const double need = config.pass_fraction * static_cast<double>(ious.size());
  d.accepted = static_cast<double>(d.passed) >= need - 1e-9;
  d.ious = std::move(ious);
  return d;
}

GateDecision sentinel_gate(std::span<const SentinelResult> results,
                           const SentinelGateConfig& config) {
  std::vector<double> ious;
  ious.reserve(results.size());
  for (const SentinelResult& r : results) ious.push_back(iou(r.annotated, r.truth));
  return sentinel_gate_ious(std::move(ious), config);
}

double box_score(const ImportanceMap& map, const BBox& box, const VectorDesign& design) {
  const CellRect r = cell_rect(box, map.width(), map.height(), design);
  if (r.count() == 0) throw Error(ErrorCode::kEmptyMask, "box covers no map cells");
  return rect_mean(map, r);
}

double element_score(const ImportanceMap& map, const Element& element,
                     const VectorDesign& design) {
  const CellRect r = cell_rect(element.bbox, map.width(), map.height(), design);
  if (r.count() == 0) {
    throw Error(ErrorCode::kEmptyMask, "element '" + element.id + "' covers no map cells");
  }
  return rect_mean(map, r);
}

std::vector<double> element_scores(const ImportanceMap& map, const VectorDesign& design) {
  std::vector<double> out;
  out.reserve(design.elements.size());
  for (const Element& e : design.elements) out.push_back(element_score(map, e, design));
  return out;
}

RegionStats region_stats(const ImportanceMap& map, std::span<const BBox> face_boxes,
                         std::span<const BBox> text_boxes, const VectorDesign& design) {
  auto mean_of = [&](std::span<const BBox> boxes) -> std::optional<double> {
    if (boxes.empty()) return std::nullopt;
    double sum = 0.0;
    for (const BBox& b : boxes) sum += box_score(map, b, design);
    return sum / static_cast<double>(boxes.size());
  };
  return {mean_of(face_boxes), mean_of(text_boxes)};
}

std::pair<double, double> map_centroid(const ImportanceMap& map) {
  double total = 0.0;
  double cx = 0.0;
  double cy = 0.0;
  for (int y = 0; y < map.height(); ++y) {
    for (int x = 0; x < map.width(); ++x) {
      const double v = map.at(x, y);
      total += v;
      cx += v * (x + 0.5) / map.width();
      cy += v * (y + 0.5) / map.height();
    }
  }
  if (total <= 0.0) return {0.5, 0.5};
  return {cx / total, cy / total};
}

}  // namespace imp
