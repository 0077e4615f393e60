#include "imp/external_predictor.h"

#include <httplib.h>

#include <algorithm>
#include <cmath>

#include "imp/design_json.h"
#include "imp/error.h"

namespace imp {

namespace {

struct Rgb {
  std::uint8_t r, g, b;
};

Rgb fill_for(ElementKind kind) {
  switch (kind) {
    case ElementKind::kTitle: return {230, 90, 60};
    case ElementKind::kBodyText: return {235, 225, 200};
    case ElementKind::kImage: return {90, 140, 200};
    case ElementKind::kFace: return {240, 190, 150};
    case ElementKind::kLogo: return {120, 200, 120};
    case ElementKind::kShape: return {180, 180, 190};
  }
  return {0, 0, 0};
}

class SemaphoreGuard {
 public:
  explicit SemaphoreGuard(std::counting_semaphore<1024>& s) : s_(s) { s_.acquire(); }
  ~SemaphoreGuard() { s_.release(); }
  SemaphoreGuard(const SemaphoreGuard&) = delete;
  SemaphoreGuard& operator=(const SemaphoreGuard&) = delete;

 private:
  std::counting_semaphore<1024>& s_;
};

}  // namespace

Raster render_design(const VectorDesign& design, int max_side) {
  const double scale = max_side / std::max(design.canvas_w, design.canvas_h);
  Raster img;
  img.w = std::max(1, static_cast<int>(std::lround(design.canvas_w * scale)));
  img.h = std::max(1, static_cast<int>(std::lround(design.canvas_h * scale)));
  img.channels = 3;
  img.pixels.assign(static_cast<std::size_t>(img.w) * img.h * 3, 255);

  auto fill = [&](const CellRect& r, Rgb c) {
    for (int y = r.rows.begin; y < r.rows.end; ++y) {
      for (int x = r.cols.begin; x < r.cols.end; ++x) {
        std::uint8_t* p = &img.pixels[(static_cast<std::size_t>(y) * img.w + x) * 3];
        p[0] = c.r;
        p[1] = c.g;
        p[2] = c.b;
      }
    }
  };

  std::vector<const Element*> order;
  for (const Element& e : design.elements) order.push_back(&e);
  std::stable_sort(order.begin(), order.end(),
                   [](const Element* a, const Element* b) { return a->z < b->z; });
  for (const Element* e : order) {
    fill(cell_rect(e->bbox, img.w, img.h, design), fill_for(e->kind));
    if (!e->label && !is_text(e->kind)) continue;
    // Text block: evenly spaced bars covering the inner 80% of the box.
    const double line = std::max(e->bbox.h / 6.0, design.canvas_h / img.h);
    for (double y = e->bbox.y + 0.1 * e->bbox.h; y + 0.5 * line <= e->bbox.bottom() - 0.1 * e->bbox.h;
         y += 1.5 * line) {
      const BBox bar{e->bbox.x + 0.1 * e->bbox.w, y, 0.8 * e->bbox.w, 0.5 * line};
      fill(cell_rect(bar, img.w, img.h, design), {40, 40, 40});
    }
  }
  return img;
}

ExternalPredictor::ExternalPredictor(ExternalPredictorConfig config)
    : config_(std::move(config)), in_flight_(std::clamp(config_.max_in_flight, 1, 1024)) {
  if (config_.endpoint.empty()) throw Error(ErrorCode::kInvalidConfig, "empty predictor endpoint");
}

ExternalPredictor::~ExternalPredictor() = default;

std::size_t ExternalPredictor::cache_size() const {
  std::lock_guard lock(cache_mutex_);
  return cache_.size();
}

std::uint64_t ExternalPredictor::requests_sent() const {
  std::lock_guard lock(cache_mutex_);
  return requests_;
}

ImportanceMap ExternalPredictor::predict(const VectorDesign& design) const {
  const std::uint64_t key = content_hash(design);
  {
    std::lock_guard lock(cache_mutex_);
    if (auto it = cache_.find(key); it != cache_.end()) return it->second;
  }
  ImportanceMap map = fetch(design);
  std::lock_guard lock(cache_mutex_);
  if (cache_.size() >= config_.cache_capacity) cache_.clear();
  cache_.emplace(key, map);
  return map;
}

ImportanceMap ExternalPredictor::fetch(const VectorDesign& design) const {
  const std::vector<std::uint8_t> png = encode_png(render_design(design, config_.render_max_side));
  const std::string body(png.begin(), png.end());

  SemaphoreGuard guard(in_flight_);
  {
    std::lock_guard lock(cache_mutex_);
    ++requests_;
  }
  httplib::Client client(config_.endpoint);
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(config_.timeout);
  const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(config_.timeout - secs);
  client.set_connection_timeout(secs.count(), usecs.count());
  client.set_read_timeout(secs.count(), usecs.count());
  client.set_write_timeout(secs.count(), usecs.count());

  const auto started = std::chrono::steady_clock::now();
  auto res = client.Post("/predict", body, "image/png");
  if (!res) {
    const auto err = res.error();
    const auto elapsed = std::chrono::steady_clock::now() - started;
    if (err == httplib::Error::ConnectionTimeout ||
        ((err == httplib::Error::Read || err == httplib::Error::Write) &&
         elapsed >= config_.timeout * 9 / 10)) {
      throw Error(ErrorCode::kTimeout, config_.endpoint + ": " + httplib::to_string(err));
    }
    throw Error(ErrorCode::kEndpointUnreachable, config_.endpoint + ": " + httplib::to_string(err));
  }
  if (res->status != 200) {
    throw Error(ErrorCode::kMalformedResponse,
                config_.endpoint + " answered HTTP " + std::to_string(res->status));
  }
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(res->body);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::kMalformedResponse, e.what());
  }
  return map_from_json(j);
}

}  // namespace imp
