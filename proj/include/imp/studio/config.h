#pragma once

#include <memory>
#include <string>

#include <nlohmann/json.hpp>

#include "imp/optimizer.h"
#include "imp/predictor.h"

namespace imp::studio {

struct ServiceConfig {
  std::string data_dir = "studio-data";
  std::string bind = "127.0.0.1";
  int port = 8080;
  // "reference" or "external".
  std::string predictor = "reference";
  std::string endpoint;
  int external_timeout_ms = 10000;
  PredictorConfig predictor_config;
  GAConfig ga_defaults;
  int workers = 2;
  std::string template_dir;
};

// JSON fields mirror the struct; "predictor_config" and "ga" nest the
// predictor and GA configs.
ServiceConfig service_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ServiceConfig& config);

// Applies STUDIO_DATA_DIR, STUDIO_BIND, STUDIO_PORT, STUDIO_PREDICTOR,
// STUDIO_ENDPOINT, STUDIO_WORKERS and STUDIO_TEMPLATES when set.
void apply_env_overrides(ServiceConfig& config);

ServiceConfig load_service_config(const std::string& path);

std::shared_ptr<const Predictor> make_predictor(const ServiceConfig& config);

}  // namespace imp::studio
