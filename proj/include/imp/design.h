#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace imp {

// Axis-aligned box in canvas units. Origin is the top-left corner of the
// canvas and y grows downward.
struct BBox {
  double x = 0.0;
  double y = 0.0;
  double w = 1.0;
  double h = 1.0;

  double area() const { return w * h; }
  double right() const { return x + w; }
  double bottom() const { return y + h; }
  double center_x() const { return x + 0.5 * w; }
  double center_y() const { return y + 0.5 * h; }

  bool valid() const;

  friend bool operator==(const BBox&, const BBox&) = default;
};

enum class ElementKind { kTitle, kBodyText, kImage, kFace, kLogo, kShape };
inline constexpr std::size_t kElementKindCount = 6;

enum class DesignClass {
  kAd,
  kInfographic,
  kMobileUI,
  kMoviePoster,
  kWebpage,
  kNaturalImage,
};
inline constexpr std::size_t kDesignClassCount = 6;
inline constexpr std::array<DesignClass, kDesignClassCount> kAllDesignClasses = {
    DesignClass::kAd,          DesignClass::kInfographic, DesignClass::kMobileUI,
    DesignClass::kMoviePoster, DesignClass::kWebpage,     DesignClass::kNaturalImage,
};

std::string_view to_string(ElementKind kind);
std::string_view to_string(DesignClass cls);
// Both throw Error(kParseError) on names outside the closed enumerations.
ElementKind parse_element_kind(std::string_view name);
DesignClass parse_design_class(std::string_view name);

bool is_text(ElementKind kind);

struct Element {
  std::string id;
  ElementKind kind = ElementKind::kShape;
  BBox bbox;
  int z = 0;
  std::optional<std::string> label;

  friend bool operator==(const Element&, const Element&) = default;
};

inline constexpr std::size_t kMaxElements = 64;

struct VectorDesign {
  double canvas_w = 1.0;
  double canvas_h = 1.0;
  std::optional<DesignClass> cls;
  std::vector<Element> elements;

  double canvas_area() const { return canvas_w * canvas_h; }
  BBox canvas_box() const { return {0.0, 0.0, canvas_w, canvas_h}; }
  // Index of the element with this id, or nullopt.
  std::optional<std::size_t> find(std::string_view id) const;

  friend bool operator==(const VectorDesign&, const VectorDesign&) = default;
};

// Throws Error(kInvalidDesign) describing the first violated invariant.
void validate(const VectorDesign& design);

double overlap_area(const BBox& a, const BBox& b);

// Minimal translation that brings the box fully inside the canvas.
// Throws Error(kOversizedElement) when the box is larger than the canvas.
BBox clamp_to_canvas(const BBox& bbox, const VectorDesign& design);

// Half-open range of grid cells [begin, end) along one axis.
struct CellRange {
  int begin = 0;
  int end = 0;
  int size() const { return end > begin ? end - begin : 0; }
};

struct CellRect {
  CellRange cols;
  CellRange rows;
  std::size_t count() const {
    return static_cast<std::size_t>(cols.size()) * static_cast<std::size_t>(rows.size());
  }
};

// Cells of a grid_w x grid_h grid laid over the canvas whose centers fall
// inside the box (left/top edges inclusive, right/bottom exclusive).
CellRect cell_rect(const BBox& bbox, int grid_w, int grid_h, const VectorDesign& design);

struct BinaryMask {
  int w = 0;
  int h = 0;
  std::vector<std::uint8_t> bits;

  BinaryMask() = default;
  BinaryMask(int width, int height);
  BinaryMask(int width, int height, std::vector<std::uint8_t> values);

  std::uint8_t at(int x, int y) const { return bits[static_cast<std::size_t>(y) * w + x]; }
  void set(int x, int y, bool on) { bits[static_cast<std::size_t>(y) * w + x] = on ? 1 : 0; }
  std::size_t popcount() const;

  friend bool operator==(const BinaryMask&, const BinaryMask&) = default;
};

BinaryMask rasterize_mask(const Element& element, int grid_w, int grid_h,
                          const VectorDesign& design);

}  // namespace imp
