#pragma once

#include <array>
#include <memory>

#include <nlohmann/json.hpp>

#include "imp/design.h"
#include "imp/importance_map.h"

namespace imp {

// Anisotropic Gaussian bump over the unit square on top of a constant floor:
//   floor + (1 - floor) * exp(-((u-cx)^2 / 2sx^2 + (v-cy)^2 / 2sy^2))
// A non-positive sigma makes the field constant along that axis. With the
// center inside the unit square the maximum is exactly 1.
struct ClassPrior {
  double cx = 0.5;
  double cy = 0.5;
  double sx = 0.0;
  double sy = 0.0;
  double floor = 1.0;

  double at(double u, double v) const;
};

struct PredictorConfig {
  // Indexed by ElementKind.
  std::array<double, kElementKindCount> kind_weights = {1.0, 0.5, 0.6, 0.9, 0.7, 0.3};
  // Indexed by DesignClass.
  std::array<ClassPrior, kDesignClassCount> class_priors = default_class_priors();
  double prior_strength = 0.5;
  // Box blur radius as a fraction of the map width.
  double blur_radius = 0.02;
  double center_bias_weight = 0.15;
  double center_bias_sigma = 0.25;
  int map_w = 256;
  int map_h = 256;

  double& weight(ElementKind kind) { return kind_weights[static_cast<std::size_t>(kind)]; }
  double weight(ElementKind kind) const { return kind_weights[static_cast<std::size_t>(kind)]; }
  const ClassPrior& prior(DesignClass cls) const {
    return class_priors[static_cast<std::size_t>(cls)];
  }

  static std::array<ClassPrior, kDesignClassCount> default_class_priors();
  // Throws Error(kInvalidConfig).
  void validate() const;
};

nlohmann::json to_json(const PredictorConfig& config);
PredictorConfig predictor_config_from_json(const nlohmann::json& j);

struct ClassificationResult {
  DesignClass predicted = DesignClass::kAd;
  std::array<double, kDesignClassCount> probabilities{};
  std::array<double, kDesignClassCount> scores{};
};

// Rule-based classifier over aspect ratio and element composition.
ClassificationResult classify(const VectorDesign& design);

// The class a predictor should condition on: the stored label, else classify().
DesignClass resolve_class(const VectorDesign& design);

class Predictor {
 public:
  virtual ~Predictor() = default;
  // Must be safe to call concurrently.
  virtual ImportanceMap predict(const VectorDesign& design) const = 0;
};

// Deterministic class-conditional stand-in for a trained importance network.
class ReferencePredictor final : public Predictor {
 public:
  explicit ReferencePredictor(PredictorConfig config = {});

  // Conditions on resolve_class(design).
  ImportanceMap predict(const VectorDesign& design) const override;
  ImportanceMap predict(const VectorDesign& design, DesignClass cls) const;

  const PredictorConfig& config() const { return config_; }

 private:
  PredictorConfig config_;
};

}  // namespace imp
