#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <mutex>
#include <semaphore>
#include <string>
#include <unordered_map>

#include "imp/map_io.h"
#include "imp/predictor.h"

namespace imp {

// Flat-colour rendering of a design: one fill per element kind, painted in
// z order, with labelled and text elements drawn as stacks of dark text bars.
// The longer canvas side maps to max_side pixels.
Raster render_design(const VectorDesign& design, int max_side = 512);

struct ExternalPredictorConfig {
  // Base URL, e.g. "http://127.0.0.1:9000". Requests go to POST <base>/predict.
  std::string endpoint;
  std::chrono::milliseconds timeout{10000};
  int max_in_flight = 4;
  int render_max_side = 512;
  std::size_t cache_capacity = 1024;
};

// Client for a separately hosted importance model. The request body is the
// PNG render; the response is {w, h, values:[...]} with row-major values in
// [0, 1]. Responses are cached by design content hash.
class ExternalPredictor final : public Predictor {
 public:
  explicit ExternalPredictor(ExternalPredictorConfig config);
  ~ExternalPredictor() override;

  // Throws Error(kEndpointUnreachable), Error(kTimeout) or
  // Error(kMalformedResponse).
  ImportanceMap predict(const VectorDesign& design) const override;

  std::size_t cache_size() const;
  std::uint64_t requests_sent() const;

 private:
  ImportanceMap fetch(const VectorDesign& design) const;

  ExternalPredictorConfig config_;
  mutable std::counting_semaphore<1024> in_flight_;
  mutable std::mutex cache_mutex_;
  mutable std::unordered_map<std::uint64_t, ImportanceMap> cache_;
  mutable std::uint64_t requests_ = 0;
};

}  // namespace imp
