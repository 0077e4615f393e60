#pragma once

#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "imp/design.h"

namespace imp {

enum class ParseMode { kStrict, kLenient };

// Canonical form: {canvas:{w,h}, class?, elements:[{id,kind,bbox:{x,y,w,h},z,label?}]}
nlohmann::json to_json(const VectorDesign& design);
nlohmann::json to_json(const BBox& bbox);

// Strict mode rejects unknown fields; lenient mode ignores them. Either way
// the result is validated. Throws Error(kParseError) or Error(kInvalidDesign).
VectorDesign design_from_json(const nlohmann::json& j, ParseMode mode = ParseMode::kStrict);
BBox bbox_from_json(const nlohmann::json& j, ParseMode mode = ParseMode::kStrict);

VectorDesign parse_design(std::string_view text, ParseMode mode = ParseMode::kStrict);
// Compact, key-sorted serialization; equal designs give byte-identical text.
std::string canonical_json(const VectorDesign& design);

VectorDesign load_design(const std::string& path, ParseMode mode = ParseMode::kStrict);

// 64-bit FNV-1a over the canonical serialization.
std::uint64_t content_hash(const VectorDesign& design);

}  // namespace imp
