#include "imp/design_json.h"

#include <fstream>
#include <initializer_list>
#include <sstream>

#include "imp/error.h"

namespace imp {

using nlohmann::json;

namespace {

void check_fields(const json& j, std::initializer_list<std::string_view> allowed,
                  std::string_view where, ParseMode mode) {
  if (!j.is_object()) {
    throw Error(ErrorCode::kParseError, std::string(where) + " must be an object");
  }
  if (mode == ParseMode::kLenient) return;
  for (const auto& item : j.items()) {
    bool known = false;
    for (auto name : allowed) known = known || item.key() == name;
    if (!known) {
      throw Error(ErrorCode::kParseError,
                  "unknown field '" + item.key() + "' in " + std::string(where));
    }
  }
}

const json& require(const json& j, const char* key, std::string_view where) {
  auto it = j.find(key);
  if (it == j.end()) {
    throw Error(ErrorCode::kParseError,
                "missing field '" + std::string(key) + "' in " + std::string(where));
  }
  return *it;
}

double number(const json& j, const char* key, std::string_view where) {
  const json& v = require(j, key, where);
  if (!v.is_number()) {
    throw Error(ErrorCode::kParseError,
                "field '" + std::string(key) + "' in " + std::string(where) + " must be a number");
  }
  return v.get<double>();
}

std::string string_field(const json& j, const char* key, std::string_view where) {
  const json& v = require(j, key, where);
  if (!v.is_string()) {
    throw Error(ErrorCode::kParseError,
                "field '" + std::string(key) + "' in " + std::string(where) + " must be a string");
  }
  return v.get<std::string>();
}

}  // namespace

json to_json(const BBox& bbox) {
  return json{{"x", bbox.x}, {"y", bbox.y}, {"w", bbox.w}, {"h", bbox.h}};
}

json to_json(const VectorDesign& design) {
  json j;
  j["canvas"] = {{"w", design.canvas_w}, {"h", design.canvas_h}};
  if (design.cls) j["class"] = std::string(to_string(*design.cls));
  json elements = json::array();
  for (const Element& e : design.elements) {
    json el{{"id", e.id}, {"kind", std::string(to_string(e.kind))}, {"bbox", to_json(e.bbox)},
            {"z", e.z}};
    if (e.label) el["label"] = *e.label;
    elements.push_back(std::move(el));
  }
  j["elements"] = std::move(elements);
  return j;
}

BBox bbox_from_json(const json& j, ParseMode mode) {
  check_fields(j, {"x", "y", "w", "h"}, "bbox", mode);
  return {number(j, "x", "bbox"), number(j, "y", "bbox"), number(j, "w", "bbox"),
          number(j, "h", "bbox")};
}

VectorDesign design_from_json(const json& j, ParseMode mode) {
  check_fields(j, {"canvas", "class", "elements"}, "design", mode);
  VectorDesign d;
  const json& canvas = require(j, "canvas", "design");
  check_fields(canvas, {"w", "h"}, "canvas", mode);
  d.canvas_w = number(canvas, "w", "canvas");
  d.canvas_h = number(canvas, "h", "canvas");
  if (auto it = j.find("class"); it != j.end() && !it->is_null()) {
    if (!it->is_string()) throw Error(ErrorCode::kParseError, "class must be a string");
    d.cls = parse_design_class(it->get<std::string>());
  }
  const json& elements = require(j, "elements", "design");
  if (!elements.is_array()) throw Error(ErrorCode::kParseError, "elements must be an array");
  for (const json& el : elements) {
    check_fields(el, {"id", "kind", "bbox", "z", "label"}, "element", mode);
    Element e;
    e.id = string_field(el, "id", "element");
    e.kind = parse_element_kind(string_field(el, "kind", "element"));
    e.bbox = bbox_from_json(require(el, "bbox", "element"), mode);
    const json& z = require(el, "z", "element");
    if (!z.is_number_integer()) throw Error(ErrorCode::kParseError, "z must be an integer");
    e.z = z.get<int>();
    if (auto it = el.find("label"); it != el.end() && !it->is_null()) {
      if (!it->is_string()) throw Error(ErrorCode::kParseError, "label must be a string");
      e.label = it->get<std::string>();
    }
    d.elements.push_back(std::move(e));
  }
  validate(d);
  return d;
}

VectorDesign parse_design(std::string_view text, ParseMode mode) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kParseError, e.what());
  }
  return design_from_json(j, mode);
}

std::string canonical_json(const VectorDesign& design) { return to_json(design).dump(); }

VectorDesign load_design(const std::string& path, ParseMode mode) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kParseError, "cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_design(ss.str(), mode);
}

std::uint64_t content_hash(const VectorDesign& design) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : canonical_json(design)) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace imp
