#include "imp/design.h"

#include <algorithm>
#include <cmath>
#include <set>
#include <unordered_set>

#include "imp/error.h"

namespace imp {

namespace {

constexpr std::array<std::string_view, kElementKindCount> kKindNames = {
    "Title", "BodyText", "Image", "Face", "Logo", "Shape"};
constexpr std::array<std::string_view, kDesignClassCount> kClassNames = {
    "Ad", "Infographic", "MobileUI", "MoviePoster", "Webpage", "NaturalImage"};

// Cells along one axis whose centers lie in [lo, hi).
CellRange axis_cells(double lo, double hi, int cells, double extent) {
  const double step = extent / cells;
  auto center = [step](int i) { return (i + 0.5) * step; };
  int begin = static_cast<int>(std::ceil(lo / step - 0.5));
  int end = static_cast<int>(std::ceil(hi / step - 0.5));
  begin = std::clamp(begin, 0, cells);
  end = std::clamp(end, 0, cells);
  // Correct rounding of the closed-form estimate against the exact test.
  while (begin > 0 && center(begin - 1) >= lo) --begin;
  while (begin < cells && center(begin) < lo) ++begin;
  while (end > 0 && center(end - 1) >= hi) --end;
  while (end < cells && center(end) < hi) ++end;
  return {begin, std::max(begin, end)};
}

}  // namespace

bool BBox::valid() const {
  return std::isfinite(x) && std::isfinite(y) && std::isfinite(w) && std::isfinite(h) &&
         w > 0.0 && h > 0.0;
}

std::string_view to_string(ElementKind kind) { return kKindNames[static_cast<std::size_t>(kind)]; }
std::string_view to_string(DesignClass cls) { return kClassNames[static_cast<std::size_t>(cls)]; }

ElementKind parse_element_kind(std::string_view name) {
  for (std::size_t i = 0; i < kKindNames.size(); ++i) {
    if (kKindNames[i] == name) return static_cast<ElementKind>(i);
  }
  throw Error(ErrorCode::kParseError, "unknown element kind '" + std::string(name) + "'");
}

DesignClass parse_design_class(std::string_view name) {
  for (std::size_t i = 0; i < kClassNames.size(); ++i) {
    if (kClassNames[i] == name) return static_cast<DesignClass>(i);
  }
  throw Error(ErrorCode::kParseError, "unknown design class '" + std::string(name) + "'");
}

bool is_text(ElementKind kind) {
  return kind == ElementKind::kTitle || kind == ElementKind::kBodyText;
}

std::optional<std::size_t> VectorDesign::find(std::string_view id) const {
  for (std::size_t i = 0; i < elements.size(); ++i) {
    if (elements[i].id == id) return i;
  }
  return std::nullopt;
}

void validate(const VectorDesign& design) {
  if (!(std::isfinite(design.canvas_w) && std::isfinite(design.canvas_h) &&
        design.canvas_w > 0.0 && design.canvas_h > 0.0)) {
    throw Error(ErrorCode::kInvalidDesign, "canvas dimensions must be positive and finite");
  }
  if (design.elements.empty() || design.elements.size() > kMaxElements) {
    throw Error(ErrorCode::kInvalidDesign,
                "element count must be in [1, " + std::to_string(kMaxElements) + "], got " +
                    std::to_string(design.elements.size()));
  }
  std::unordered_set<std::string> ids;
  std::set<int> layers;
  const BBox canvas = design.canvas_box();
  for (const Element& e : design.elements) {
    if (e.id.empty()) throw Error(ErrorCode::kInvalidDesign, "element id must be nonempty");
    if (!ids.insert(e.id).second) {
      throw Error(ErrorCode::kInvalidDesign, "duplicate element id '" + e.id + "'");
    }
    if (!layers.insert(e.z).second) {
      throw Error(ErrorCode::kInvalidDesign,
                  "duplicate z index " + std::to_string(e.z) + " on '" + e.id + "'");
    }
    if (!e.bbox.valid()) {
      throw Error(ErrorCode::kInvalidDesign, "element '" + e.id + "' has an invalid bbox");
    }
    if (overlap_area(e.bbox, canvas) <= 0.0) {
      throw Error(ErrorCode::kInvalidDesign, "element '" + e.id + "' lies outside the canvas");
    }
  }
}

double overlap_area(const BBox& a, const BBox& b) {
  const double w = std::min(a.right(), b.right()) - std::max(a.x, b.x);
  const double h = std::min(a.bottom(), b.bottom()) - std::max(a.y, b.y);
  if (w <= 0.0 || h <= 0.0) return 0.0;
  return w * h;
}

BBox clamp_to_canvas(const BBox& bbox, const VectorDesign& design) {
  if (bbox.w > design.canvas_w || bbox.h > design.canvas_h) {
    throw Error(ErrorCode::kOversizedElement, "box larger than canvas");
  }
  BBox out = bbox;
  out.x = std::clamp(bbox.x, 0.0, design.canvas_w - bbox.w);
  out.y = std::clamp(bbox.y, 0.0, design.canvas_h - bbox.h);
  return out;
}

CellRect cell_rect(const BBox& bbox, int grid_w, int grid_h, const VectorDesign& design) {
  return {axis_cells(bbox.x, bbox.right(), grid_w, design.canvas_w),
          axis_cells(bbox.y, bbox.bottom(), grid_h, design.canvas_h)};
}

BinaryMask::BinaryMask(int width, int height)
    : w(width), h(height), bits(static_cast<std::size_t>(width) * height, 0) {}

BinaryMask::BinaryMask(int width, int height, std::vector<std::uint8_t> values)
    : w(width), h(height), bits(std::move(values)) {
  if (width < 1 || height < 1 || bits.size() != static_cast<std::size_t>(width) * height) {
    throw Error(ErrorCode::kDimensionMismatch, "mask data does not match its dimensions");
  }
  for (auto& b : bits) b = b ? 1 : 0;
}

std::size_t BinaryMask::popcount() const {
  return static_cast<std::size_t>(std::count(bits.begin(), bits.end(), std::uint8_t{1}));
}

BinaryMask rasterize_mask(const Element& element, int grid_w, int grid_h,
                          const VectorDesign& design) {
  BinaryMask mask(grid_w, grid_h);
  const CellRect r = cell_rect(element.bbox, grid_w, grid_h, design);
  for (int y = r.rows.begin; y < r.rows.end; ++y) {
    for (int x = r.cols.begin; x < r.cols.end; ++x) mask.set(x, y, true);
  }
  return mask;
}

}  // namespace imp
