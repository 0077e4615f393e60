#include "imp/map_io.h"

#include <png.h>

#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "imp/error.h"

namespace imp {

using nlohmann::json;

json to_json(const ImportanceMap& map) {
  return {{"w", map.width()},
          {"h", map.height()},
          {"values", std::vector<double>(map.values().begin(), map.values().end())}};
}

ImportanceMap map_from_json(const json& j) {
  if (!j.is_object() || !j.contains("w") || !j.contains("h") || !j.contains("values")) {
    throw Error(ErrorCode::kMalformedResponse, "map JSON needs w, h and values");
  }
  const json& w = j["w"];
  const json& h = j["h"];
  const json& values = j["values"];
  if (!w.is_number_integer() || !h.is_number_integer() || !values.is_array()) {
    throw Error(ErrorCode::kMalformedResponse, "map JSON has wrongly typed fields");
  }
  std::vector<double> data;
  data.reserve(values.size());
  for (const json& v : values) {
    if (!v.is_number()) throw Error(ErrorCode::kMalformedResponse, "map value is not a number");
    data.push_back(v.get<double>());
  }
  try {
    return ImportanceMap(w.get<int>(), h.get<int>(), std::move(data));
  } catch (const Error& e) {
    throw Error(ErrorCode::kMalformedResponse, e.what());
  }
}

std::string encode_rle(const BinaryMask& mask) {
  std::string out = std::to_string(mask.w) + "x" + std::to_string(mask.h) + ":";
  std::uint8_t current = 0;
  std::size_t run = 0;
  bool first = true;
  auto flush = [&] {
    if (!first) out += ',';
    out += std::to_string(run);
    first = false;
  };
  for (std::uint8_t b : mask.bits) {
    if (b != current) {
      flush();
      current = b;
      run = 0;
    }
    ++run;
  }
  flush();
  return out;
}

BinaryMask decode_rle(std::string_view rle) {
  auto fail = [&](const std::string& why) -> BinaryMask {
    throw Error(ErrorCode::kParseError, "bad RLE '" + std::string(rle.substr(0, 32)) + "': " + why);
  };
  const auto colon = rle.find(':');
  const auto x = rle.find('x');
  if (colon == std::string_view::npos || x == std::string_view::npos || x > colon) {
    return fail("expected WxH:runs");
  }
  auto parse_int = [&](std::string_view s) {
    long long v = -1;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size() || v < 0) fail("bad integer");
    return v;
  };
  const long long w = parse_int(rle.substr(0, x));
  const long long h = parse_int(rle.substr(x + 1, colon - x - 1));
  if (w < 1 || h < 1 || w * h > (1ll << 26)) return fail("bad dimensions");
  std::vector<std::uint8_t> bits;
  bits.reserve(static_cast<std::size_t>(w * h));
  std::string_view runs = rle.substr(colon + 1);
  std::uint8_t value = 0;
  while (!runs.empty()) {
    const auto comma = runs.find(',');
    const long long n = parse_int(runs.substr(0, comma));
    if (static_cast<long long>(bits.size()) + n > w * h) return fail("runs exceed mask size");
    bits.insert(bits.end(), static_cast<std::size_t>(n), value);
    value ^= 1;
    if (comma == std::string_view::npos) break;
    runs.remove_prefix(comma + 1);
  }
  if (static_cast<long long>(bits.size()) != w * h) return fail("runs do not cover the mask");
  return BinaryMask(static_cast<int>(w), static_cast<int>(h), std::move(bits));
}

Raster to_grayscale(const ImportanceMap& map) {
  Raster r{map.width(), map.height(), 1, {}};
  r.pixels.reserve(map.size());
  for (double v : map.values()) r.pixels.push_back(static_cast<std::uint8_t>(std::lround(255.0 * v)));
  return r;
}

std::vector<std::uint8_t> encode_png(const Raster& raster) {
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(raster.w);
  image.height = static_cast<png_uint_32>(raster.h);
  image.format = raster.channels == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&image, nullptr, &size, 0, raster.pixels.data(), 0, nullptr)) {
    throw Error(ErrorCode::kStorageUnavailable, std::string("png sizing failed: ") + image.message);
  }
  std::vector<std::uint8_t> out(size);
  if (!png_image_write_to_memory(&image, out.data(), &size, 0, raster.pixels.data(), 0, nullptr)) {
    throw Error(ErrorCode::kStorageUnavailable, std::string("png encode failed: ") + image.message);
  }
  out.resize(size);
  return out;
}

Raster decode_png(const std::vector<std::uint8_t>& bytes) {
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size())) {
    throw Error(ErrorCode::kParseError, std::string("png decode failed: ") + image.message);
  }
  const bool gray = (image.format & PNG_FORMAT_FLAG_COLOR) == 0;
  image.format = gray ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;
  Raster r{static_cast<int>(image.width), static_cast<int>(image.height), gray ? 1 : 3, {}};
  r.pixels.resize(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, r.pixels.data(), 0, nullptr)) {
    png_image_free(&image);
    throw Error(ErrorCode::kParseError, std::string("png decode failed: ") + image.message);
  }
  return r;
}

void write_file(const std::string& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kStorageUnavailable, "cannot write " + path);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::kStorageUnavailable, "short write to " + path);
}

void write_file(const std::string& path, const std::vector<std::uint8_t>& bytes) {
  write_file(path, std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kStorageUnavailable, "cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace imp
