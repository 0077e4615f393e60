#include "imp/predictor.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "imp/error.h"

namespace imp {

using nlohmann::json;

double ClassPrior::at(double u, double v) const {
  double e = 0.0;
  if (sx > 0.0) e += (u - cx) * (u - cx) / (2.0 * sx * sx);
  if (sy > 0.0) e += (v - cy) * (v - cy) / (2.0 * sy * sy);
  return floor + (1.0 - floor) * std::exp(-e);
}

std::array<ClassPrior, kDesignClassCount> PredictorConfig::default_class_priors() {
  return {{
      {0.5, 0.5, 0.3, 0.3, 0.3},    // Ad: a few central elements
      {0.5, 0.5, 1.0, 1.0, 0.85},   // Infographic: spread over the design
      {0.5, 0.4, 1.0, 1.0, 0.85},   // MobileUI: spread over the design
      {0.5, 0.2, 0.0, 0.35, 0.4},   // MoviePoster: title band near the top
      {0.2, 0.15, 0.3, 0.3, 0.3},   // Webpage: site name at the top left
      {0.5, 0.5, 0.35, 0.35, 0.5},  // NaturalImage: center bias
  }};
}

void PredictorConfig::validate() const {
  for (double w : kind_weights) {
    if (!(w > 0.0) || !std::isfinite(w)) {
      throw Error(ErrorCode::kInvalidConfig, "kind weights must be positive");
    }
  }
  if (!(prior_strength >= 0.0 && prior_strength <= 1.0)) {
    throw Error(ErrorCode::kInvalidConfig, "prior strength must lie in [0,1]");
  }
  for (const ClassPrior& p : class_priors) {
    if (!(p.floor > 0.0 && p.floor <= 1.0) || p.cx < 0.0 || p.cx > 1.0 || p.cy < 0.0 ||
        p.cy > 1.0) {
      throw Error(ErrorCode::kInvalidConfig, "class prior must have floor in (0,1] and a center "
                                             "inside the unit square");
    }
  }
  if (!(blur_radius >= 0.0) || !(center_bias_weight >= 0.0) || !(center_bias_sigma > 0.0)) {
    throw Error(ErrorCode::kInvalidConfig, "blur radius and center bias must be nonnegative");
  }
  if (map_w < 1 || map_h < 1) throw Error(ErrorCode::kInvalidConfig, "map size must be >= 1");
}

json to_json(const PredictorConfig& c) {
  json weights;
  for (std::size_t i = 0; i < kElementKindCount; ++i) {
    weights[std::string(to_string(static_cast<ElementKind>(i)))] = c.kind_weights[i];
  }
  json priors;
  for (std::size_t i = 0; i < kDesignClassCount; ++i) {
    const ClassPrior& p = c.class_priors[i];
    priors[std::string(to_string(static_cast<DesignClass>(i)))] = {
        {"cx", p.cx}, {"cy", p.cy}, {"sx", p.sx}, {"sy", p.sy}, {"floor", p.floor}};
  }
  return {{"kind_weights", weights},
          {"class_priors", priors},
          {"prior_strength", c.prior_strength},
          {"blur_radius", c.blur_radius},
          {"center_bias_weight", c.center_bias_weight},
          {"center_bias_sigma", c.center_bias_sigma},
          {"map_w", c.map_w},
          {"map_h", c.map_h}};
}

PredictorConfig predictor_config_from_json(const json& j) {
  PredictorConfig c;
  try {
    if (j.contains("kind_weights")) {
      for (const auto& item : j["kind_weights"].items()) {
        c.weight(parse_element_kind(item.key())) = item.value().get<double>();
      }
    }
    if (j.contains("class_priors")) {
      for (const auto& item : j["class_priors"].items()) {
        ClassPrior& p = c.class_priors[static_cast<std::size_t>(parse_design_class(item.key()))];
        const json& v = item.value();
        p.cx = v.value("cx", p.cx);
        p.cy = v.value("cy", p.cy);
        p.sx = v.value("sx", p.sx);
        p.sy = v.value("sy", p.sy);
        p.floor = v.value("floor", p.floor);
      }
    }
    c.prior_strength = j.value("prior_strength", c.prior_strength);
    c.blur_radius = j.value("blur_radius", c.blur_radius);
    c.center_bias_weight = j.value("center_bias_weight", c.center_bias_weight);
    c.center_bias_sigma = j.value("center_bias_sigma", c.center_bias_sigma);
    c.map_w = j.value("map_w", c.map_w);
    c.map_h = j.value("map_h", c.map_h);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInvalidConfig, e.what());
  }
  c.validate();
  return c;
}

ClassificationResult classify(const VectorDesign& design) {
  const double aspect = design.canvas_h / design.canvas_w;
  const double canvas_area = design.canvas_area();
  const BBox canvas = design.canvas_box();
  const std::size_t n = design.elements.size();

  std::array<int, kElementKindCount> count{};
  std::array<double, kElementKindCount> area{};
  double total_area = 0.0;
  bool top_left_brand = false;
  for (const Element& e : design.elements) {
    const auto k = static_cast<std::size_t>(e.kind);
    const double a = overlap_area(e.bbox, canvas);
    ++count[k];
    area[k] += a;
    total_area += a;
    if ((e.kind == ElementKind::kLogo || e.kind == ElementKind::kTitle) &&
        e.bbox.center_x() < 0.35 * design.canvas_w && e.bbox.center_y() < 0.25 * design.canvas_h) {
      top_left_brand = true;
    }
  }
  auto cnt = [&](ElementKind k) { return count[static_cast<std::size_t>(k)]; };
  auto ar = [&](ElementKind k) { return area[static_cast<std::size_t>(k)]; };
  const int text = cnt(ElementKind::kTitle) + cnt(ElementKind::kBodyText);

  ClassificationResult r;
  auto score = [&](DesignClass c) -> double& { return r.scores[static_cast<std::size_t>(c)]; };
  score(DesignClass::kAd) = 1.0;
  if (cnt(ElementKind::kImage) == 1 && text == 0 &&
      ar(ElementKind::kImage) >= 0.6 * canvas_area) {
    score(DesignClass::kNaturalImage) = 4.0;
  }
  if (aspect >= 1.5) {
    score(DesignClass::kMobileUI) = n >= 8 ? 3.0 + 0.1 * static_cast<double>(n - 8) : 1.0;
  }
  if (aspect <= 0.8) score(DesignClass::kWebpage) = top_left_brand ? 3.0 : 0.5;
  if (cnt(ElementKind::kFace) > 0 && cnt(ElementKind::kTitle) > 0) {
    const double dominant = (ar(ElementKind::kFace) + ar(ElementKind::kTitle)) / total_area;
    score(DesignClass::kMoviePoster) = (dominant >= 0.5 ? 3.0 : 1.5) + (aspect >= 1.2 ? 0.5 : 0.0);
  }
  if (cnt(ElementKind::kBodyText) >= 4) {
    score(DesignClass::kInfographic) = 2.0 + 0.25 * (cnt(ElementKind::kBodyText) - 4);
  }

  const double peak = *std::max_element(r.scores.begin(), r.scores.end());
  double z = 0.0;
  for (std::size_t i = 0; i < kDesignClassCount; ++i) {
    r.probabilities[i] = std::exp(r.scores[i] - peak);
    z += r.probabilities[i];
  }
  for (double& p : r.probabilities) p /= z;
  // First maximum wins, so ties resolve in enumeration order.
  const auto best = std::max_element(r.probabilities.begin(), r.probabilities.end());
  r.predicted = static_cast<DesignClass>(best - r.probabilities.begin());
  return r;
}

DesignClass resolve_class(const VectorDesign& design) {
  return design.cls ? *design.cls : classify(design).predicted;
}

namespace {

// Mean over a (2r+1) window clipped to the grid, along rows then columns.
void box_blur(std::vector<double>& grid, int w, int h, int r) {
  if (r <= 0) return;
  std::vector<double> tmp(grid.size());
  std::vector<double> prefix(static_cast<std::size_t>(std::max(w, h)) + 1);
  for (int y = 0; y < h; ++y) {
    const double* row = &grid[static_cast<std::size_t>(y) * w];
    prefix[0] = 0.0;
    for (int x = 0; x < w; ++x) prefix[x + 1] = prefix[x] + row[x];
    for (int x = 0; x < w; ++x) {
      const int lo = std::max(0, x - r);
      const int hi = std::min(w, x + r + 1);
      tmp[static_cast<std::size_t>(y) * w + x] = (prefix[hi] - prefix[lo]) / (hi - lo);
    }
  }
  for (int x = 0; x < w; ++x) {
    prefix[0] = 0.0;
    for (int y = 0; y < h; ++y) prefix[y + 1] = prefix[y] + tmp[static_cast<std::size_t>(y) * w + x];
    for (int y = 0; y < h; ++y) {
      const int lo = std::max(0, y - r);
      const int hi = std::min(h, y + r + 1);
      grid[static_cast<std::size_t>(y) * w + x] = (prefix[hi] - prefix[lo]) / (hi - lo);
    }
  }
}

}  // namespace

ReferencePredictor::ReferencePredictor(PredictorConfig config) : config_(std::move(config)) {
  config_.validate();
}

ImportanceMap ReferencePredictor::predict(const VectorDesign& design) const {
  return predict(design, resolve_class(design));
}

ImportanceMap ReferencePredictor::predict(const VectorDesign& design, DesignClass cls) const {
  const int w = config_.map_w;
  const int h = config_.map_h;
  std::vector<double> grid(static_cast<std::size_t>(w) * h, 0.0);

  std::vector<std::size_t> order(design.elements.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return design.elements[a].z < design.elements[b].z;
  });

  const BBox canvas = design.canvas_box();
  const ClassPrior& prior = config_.prior(cls);
  const double gamma = config_.prior_strength;
  for (std::size_t idx : order) {
    const Element& e = design.elements[idx];
    const double visible = overlap_area(e.bbox, canvas);
    if (visible <= 0.0) continue;
    const double x0 = std::max(e.bbox.x, 0.0);
    const double x1 = std::min(e.bbox.right(), design.canvas_w);
    const double y0 = std::max(e.bbox.y, 0.0);
    const double y1 = std::min(e.bbox.bottom(), design.canvas_h);
    const double u = 0.5 * (x0 + x1) / design.canvas_w;
    const double v = 0.5 * (y0 + y1) / design.canvas_h;
    const double size_factor = std::sqrt(visible / design.canvas_area());
    const double value =
        config_.weight(e.kind) * size_factor * ((1.0 - gamma) + gamma * prior.at(u, v));
    const CellRect r = cell_rect(e.bbox, w, h, design);
    for (int y = r.rows.begin; y < r.rows.end; ++y) {
      std::fill_n(&grid[static_cast<std::size_t>(y) * w + r.cols.begin], r.cols.size(), value);
    }
  }

  box_blur(grid, w, h, static_cast<int>(std::lround(config_.blur_radius * w)));

  if ((cls == DesignClass::kAd || cls == DesignClass::kNaturalImage) &&
      config_.center_bias_weight > 0.0) {
    const double peak = *std::max_element(grid.begin(), grid.end());
    const double amp = config_.center_bias_weight * peak;
    const double denom = 2.0 * config_.center_bias_sigma * config_.center_bias_sigma;
    for (int y = 0; y < h; ++y) {
      const double dv = (y + 0.5) / h - 0.5;
      for (int x = 0; x < w; ++x) {
        const double du = (x + 0.5) / w - 0.5;
        grid[static_cast<std::size_t>(y) * w + x] += amp * std::exp(-(du * du + dv * dv) / denom);
      }
    }
  }

  const double peak = *std::max_element(grid.begin(), grid.end());
  if (peak > 0.0) {
    for (double& g : grid) g = std::clamp(g / peak, 0.0, 1.0);
  }
  return ImportanceMap(w, h, std::move(grid));
}

}  // namespace imp
