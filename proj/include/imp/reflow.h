#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "imp/design.h"
#include "imp/importance_map.h"
#include "imp/predictor.h"

namespace imp {

struct Placeholder {
  BBox bbox;
  // 1-based importance rank.
  int rank = 1;
};

struct Template {
  std::string id;
  double canvas_w = 1.0;
  double canvas_h = 1.0;
  std::vector<Placeholder> placeholders;

  double aspect() const { return canvas_w / canvas_h; }
  // Placeholder with the given rank (ranks are a permutation of 1..n).
  const Placeholder& by_rank(int rank) const;
};

// Throws Error(kInvalidConfig) when ranks are not a permutation of 1..n or a
// placeholder box is degenerate.
void validate(const Template& tpl);

nlohmann::json to_json(const Template& tpl);
Template template_from_json(const nlohmann::json& j);

class TemplateLibrary {
 public:
  TemplateLibrary() = default;
  explicit TemplateLibrary(std::vector<Template> templates);

  // Every *.json file in the directory, in file-name order.
  static TemplateLibrary load_directory(const std::string& dir);

  void add(Template tpl);
  bool empty() const { return templates_.empty(); }
  std::size_t size() const { return templates_.size(); }
  const std::vector<Template>& templates() const { return templates_; }
  // Templates with exactly n placeholders, sorted by id.
  std::vector<const Template*> with_count(std::size_t n) const;
  std::vector<std::size_t> counts() const;

 private:
  std::vector<Template> templates_;
  std::map<std::size_t, std::vector<std::size_t>> by_count_;
};

// Element ids by descending element score; ties by ascending id. Scores
// equal to 12 significant digits count as ties.
std::vector<std::string> rank_elements(const VectorDesign& design, const ImportanceMap& map);

// Among templates with n placeholders, the one minimising
// |log(template aspect) - log(target aspect)|; ties by id.
// Throws Error(kNoTemplateForCount).
const Template& retrieve_template(const TemplateLibrary& lib, std::size_t n, double target_w,
                                  double target_h);

// Centered contain-fit of a w x h box inside target.
BBox contain_fit(double w, double h, const BBox& target);

// The rank-k element goes to the rank-k placeholder, scaled to the target
// canvas, contain-fitted. Throws Error(kCountMismatch).
VectorDesign apply_reflow(const VectorDesign& design, const ImportanceMap& map,
                          const Template& tpl, double target_w, double target_h);

struct ReflowOptions {
  // When no template matches the element count, merge the lowest-ranked
  // elements into one composite that moves and scales as a unit.
  bool group_overflow = false;
};

struct ReflowResult {
  VectorDesign design;
  std::string template_id;
  std::vector<std::string> ranking;
  // Element ids merged into the composite slot, lowest ranks; empty if none.
  std::vector<std::string> grouped;
};

ReflowResult reflow(const VectorDesign& design, const ImportanceMap& map,
                    const TemplateLibrary& lib, double target_w, double target_h,
                    const ReflowOptions& options = {});

}  // namespace imp
