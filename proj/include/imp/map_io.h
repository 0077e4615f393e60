#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "imp/importance_map.h"

namespace imp {

// {w, h, values:[...]} with values row-major. Also the external predictor
// response body.
nlohmann::json to_json(const ImportanceMap& map);
// Throws Error(kMalformedResponse) on any shape or range violation.
ImportanceMap map_from_json(const nlohmann::json& j);

// Mask run-length encoding: "WxH:r0,r1,..." over the row-major bits, runs
// alternating and starting with a run of zeros (which may be 0 long).
std::string encode_rle(const BinaryMask& mask);
// Throws Error(kParseError).
BinaryMask decode_rle(std::string_view rle);

struct Raster {
  int w = 0;
  int h = 0;
  int channels = 1;
  std::vector<std::uint8_t> pixels;
};

// 8-bit grayscale with value = round(255 * v).
Raster to_grayscale(const ImportanceMap& map);

std::vector<std::uint8_t> encode_png(const Raster& raster);
// Throws Error(kParseError) on undecodable input. Output is RGB or gray as stored.
Raster decode_png(const std::vector<std::uint8_t>& bytes);

void write_file(const std::string& path, std::string_view bytes);
void write_file(const std::string& path, const std::vector<std::uint8_t>& bytes);
std::string read_file(const std::string& path);

}  // namespace imp
