#include "imp/reflow.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>
#include <numeric>

#include "imp/design_json.h"
#include "imp/error.h"
#include "imp/map_io.h"

namespace imp {

using nlohmann::json;

const Placeholder& Template::by_rank(int rank) const {
  for (const Placeholder& p : placeholders) {
    if (p.rank == rank) return p;
  }
  throw Error(ErrorCode::kInvalidConfig, "template '" + id + "' has no rank " + std::to_string(rank));
}

void validate(const Template& tpl) {
  if (tpl.placeholders.empty()) {
    throw Error(ErrorCode::kInvalidConfig, "template '" + tpl.id + "' has no placeholders");
  }
  if (!(tpl.canvas_w > 0.0 && tpl.canvas_h > 0.0)) {
    throw Error(ErrorCode::kInvalidConfig, "template '" + tpl.id + "' has a bad canvas");
  }
  std::vector<int> ranks;
  for (const Placeholder& p : tpl.placeholders) {
    if (!p.bbox.valid()) {
      throw Error(ErrorCode::kInvalidConfig, "template '" + tpl.id + "' has a degenerate placeholder");
    }
    ranks.push_back(p.rank);
  }
  std::sort(ranks.begin(), ranks.end());
  for (std::size_t i = 0; i < ranks.size(); ++i) {
    if (ranks[i] != static_cast<int>(i) + 1) {
      throw Error(ErrorCode::kInvalidConfig,
                  "template '" + tpl.id + "' ranks are not a permutation of 1..n");
    }
  }
}

json to_json(const Template& tpl) {
  json phs = json::array();
  for (const Placeholder& p : tpl.placeholders) {
    phs.push_back({{"bbox", to_json(p.bbox)}, {"rank", p.rank}});
  }
  return {{"id", tpl.id}, {"canvas", {{"w", tpl.canvas_w}, {"h", tpl.canvas_h}}}, {"placeholders", phs}};
}

Template template_from_json(const json& j) {
  Template t;
  try {
    t.id = j.at("id").get<std::string>();
    t.canvas_w = j.at("canvas").at("w").get<double>();
    t.canvas_h = j.at("canvas").at("h").get<double>();
    for (const json& p : j.at("placeholders")) {
      t.placeholders.push_back({bbox_from_json(p.at("bbox")), p.at("rank").get<int>()});
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParseError, std::string("template: ") + e.what());
  }
  validate(t);
  return t;
}

TemplateLibrary::TemplateLibrary(std::vector<Template> templates) {
  for (Template& t : templates) add(std::move(t));
}

void TemplateLibrary::add(Template tpl) {
  validate(tpl);
  by_count_[tpl.placeholders.size()].push_back(templates_.size());
  templates_.push_back(std::move(tpl));
}

TemplateLibrary TemplateLibrary::load_directory(const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) {
    throw Error(ErrorCode::kStorageUnavailable, "template directory not found: " + dir);
  }
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  TemplateLibrary lib;
  for (const fs::path& f : files) {
    json j;
    try {
      j = json::parse(read_file(f.string()));
    } catch (const json::parse_error& e) {
      throw Error(ErrorCode::kParseError, f.string() + ": " + e.what());
    }
    lib.add(template_from_json(j));
  }
  return lib;
}

std::vector<const Template*> TemplateLibrary::with_count(std::size_t n) const {
  std::vector<const Template*> out;
  if (auto it = by_count_.find(n); it != by_count_.end()) {
    for (std::size_t i : it->second) out.push_back(&templates_[i]);
  }
  std::sort(out.begin(), out.end(), [](const Template* a, const Template* b) { return a->id < b->id; });
  return out;
}

std::vector<std::size_t> TemplateLibrary::counts() const {
  std::vector<std::size_t> out;
  for (const auto& [n, _] : by_count_) out.push_back(n);
  return out;
}

std::vector<std::string> rank_elements(const VectorDesign& design, const ImportanceMap& map) {
  const std::vector<double> scores = element_scores(map, design);
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<long long> keys;
  keys.reserve(scores.size());
  for (double s : scores) keys.push_back(std::llround(s * 1e12));
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (keys[a] != keys[b]) return keys[a] > keys[b];
    return design.elements[a].id < design.elements[b].id;
  });
  std::vector<std::string> ids;
  ids.reserve(order.size());
  for (std::size_t i : order) ids.push_back(design.elements[i].id);
  return ids;
}

const Template& retrieve_template(const TemplateLibrary& lib, std::size_t n, double target_w,
                                  double target_h) {
  const auto candidates = lib.with_count(n);
  if (candidates.empty()) {
    throw Error(ErrorCode::kNoTemplateForCount, "no template with " + std::to_string(n) + " placeholders");
  }
  const double target = std::log(target_w / target_h);
  const Template* best = nullptr;
  double best_dist = std::numeric_limits<double>::infinity();
  // Candidates are id-sorted, so strict improvement keeps the first on ties.
  for (const Template* t : candidates) {
    const double d = std::abs(std::log(t->aspect()) - target);
    if (d < best_dist) {
      best_dist = d;
      best = t;
    }
  }
  return *best;
}

BBox contain_fit(double w, double h, const BBox& target) {
  const double f = std::min(target.w / w, target.h / h);
  const double fw = w * f;
  const double fh = h * f;
  return {target.x + 0.5 * (target.w - fw), target.y + 0.5 * (target.h - fh), fw, fh};
}

namespace {

BBox scaled_placeholder(const Template& tpl, int rank, double target_w, double target_h) {
  const BBox& p = tpl.by_rank(rank).bbox;
  const double sx = target_w / tpl.canvas_w;
  const double sy = target_h / tpl.canvas_h;
  return {p.x * sx, p.y * sy, p.w * sx, p.h * sy};
}

}  // namespace

VectorDesign apply_reflow(const VectorDesign& design, const ImportanceMap& map,
                          const Template& tpl, double target_w, double target_h) {
  if (tpl.placeholders.size() != design.elements.size()) {
    throw Error(ErrorCode::kCountMismatch,
                "template '" + tpl.id + "' has " + std::to_string(tpl.placeholders.size()) +
                    " placeholders for " + std::to_string(design.elements.size()) + " elements");
  }
  const std::vector<std::string> ranking = rank_elements(design, map);
  VectorDesign out = design;
  out.canvas_w = target_w;
  out.canvas_h = target_h;
  for (std::size_t k = 0; k < ranking.size(); ++k) {
    Element& e = out.elements[*design.find(ranking[k])];
    const BBox slot = scaled_placeholder(tpl, static_cast<int>(k) + 1, target_w, target_h);
    e.bbox = contain_fit(e.bbox.w, e.bbox.h, slot);
  }
  return out;
}

ReflowResult reflow(const VectorDesign& design, const ImportanceMap& map,
                    const TemplateLibrary& lib, double target_w, double target_h,
                    const ReflowOptions& options) {
  if (!(target_w > 0.0 && target_h > 0.0)) {
    throw Error(ErrorCode::kInvalidConfig, "target size must be positive");
  }
  const std::size_t n = design.elements.size();
  ReflowResult result;
  result.ranking = rank_elements(design, map);
  if (!lib.with_count(n).empty() || !options.group_overflow) {
    const Template& tpl = retrieve_template(lib, n, target_w, target_h);
    result.design = apply_reflow(design, map, tpl, target_w, target_h);
    result.template_id = tpl.id;
    return result;
  }

  // Largest supported count below n; the last slot takes the composite.
  std::size_t m = 0;
  for (std::size_t c : lib.counts()) {
    if (c < n && c >= 2) m = std::max(m, c);
  }
  if (m == 0) {
    throw Error(ErrorCode::kNoTemplateForCount,
                "no template with " + std::to_string(n) + " or fewer placeholders to group into");
  }
  const Template& tpl = retrieve_template(lib, m, target_w, target_h);
  VectorDesign out = design;
  out.canvas_w = target_w;
  out.canvas_h = target_h;
  for (std::size_t k = 0; k + 1 < m; ++k) {
    Element& e = out.elements[*design.find(result.ranking[k])];
    e.bbox = contain_fit(e.bbox.w, e.bbox.h,
                         scaled_placeholder(tpl, static_cast<int>(k) + 1, target_w, target_h));
  }
  double x0 = std::numeric_limits<double>::infinity(), y0 = x0;
  double x1 = -x0, y1 = -x0;
  for (std::size_t k = m - 1; k < n; ++k) {
    const BBox& b = design.elements[*design.find(result.ranking[k])].bbox;
    x0 = std::min(x0, b.x);
    y0 = std::min(y0, b.y);
    x1 = std::max(x1, b.right());
    y1 = std::max(y1, b.bottom());
    result.grouped.push_back(result.ranking[k]);
  }
  const BBox group{x0, y0, x1 - x0, y1 - y0};
  const BBox fitted = contain_fit(group.w, group.h,
                                  scaled_placeholder(tpl, static_cast<int>(m), target_w, target_h));
  const double f = fitted.w / group.w;
  for (const std::string& id : result.grouped) {
    Element& e = out.elements[*design.find(id)];
    const BBox& b = design.elements[*design.find(id)].bbox;
    e.bbox = {fitted.x + (b.x - group.x) * f, fitted.y + (b.y - group.y) * f, b.w * f, b.h * f};
  }
  result.design = std::move(out);
  result.template_id = tpl.id;
  return result;
}

}  // namespace imp
