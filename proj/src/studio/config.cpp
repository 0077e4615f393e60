#include "imp/studio/config.h"

#include <cstdlib>

#include "imp/error.h"
#include "imp/external_predictor.h"
#include "imp/map_io.h"

namespace imp::studio {

using nlohmann::json;

ServiceConfig service_config_from_json(const json& j) {
  ServiceConfig c;
  try {
    for (const auto& item : j.items()) {
      const std::string& k = item.key();
      const json& v = item.value();
      if (k == "data_dir") c.data_dir = v.get<std::string>();
      else if (k == "bind") c.bind = v.get<std::string>();
      else if (k == "port") c.port = v.get<int>();
      else if (k == "predictor") c.predictor = v.get<std::string>();
      else if (k == "endpoint") c.endpoint = v.get<std::string>();
      else if (k == "external_timeout_ms") c.external_timeout_ms = v.get<int>();
      else if (k == "predictor_config") c.predictor_config = predictor_config_from_json(v);
      else if (k == "ga") c.ga_defaults = ga_config_from_json(v);
      else if (k == "workers") c.workers = v.get<int>();
      else if (k == "template_dir") c.template_dir = v.get<std::string>();
      else throw Error(ErrorCode::kInvalidConfig, "unknown service config field '" + k + "'");
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInvalidConfig, e.what());
  }
  if (c.predictor != "reference" && c.predictor != "external") {
    throw Error(ErrorCode::kInvalidConfig, "predictor must be 'reference' or 'external'");
  }
  if (c.workers < 1) throw Error(ErrorCode::kInvalidConfig, "workers must be >= 1");
  return c;
}

json to_json(const ServiceConfig& c) {
  return {{"data_dir", c.data_dir},
          {"bind", c.bind},
          {"port", c.port},
          {"predictor", c.predictor},
          {"endpoint", c.endpoint},
          {"external_timeout_ms", c.external_timeout_ms},
          {"predictor_config", to_json(c.predictor_config)},
          {"ga", to_json(c.ga_defaults)},
          {"workers", c.workers},
          {"template_dir", c.template_dir}};
}

void apply_env_overrides(ServiceConfig& c) {
  auto env = [](const char* name) -> const char* {
    const char* v = std::getenv(name);
    return v && *v ? v : nullptr;
  };
  try {
    if (auto v = env("STUDIO_DATA_DIR")) c.data_dir = v;
    if (auto v = env("STUDIO_BIND")) c.bind = v;
    if (auto v = env("STUDIO_PORT")) c.port = std::stoi(v);
    if (auto v = env("STUDIO_PREDICTOR")) c.predictor = v;
    if (auto v = env("STUDIO_ENDPOINT")) c.endpoint = v;
    if (auto v = env("STUDIO_WORKERS")) c.workers = std::stoi(v);
    if (auto v = env("STUDIO_TEMPLATES")) c.template_dir = v;
  } catch (const std::exception& e) {
    throw Error(ErrorCode::kInvalidConfig, std::string("bad environment override: ") + e.what());
  }
}

ServiceConfig load_service_config(const std::string& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kInvalidConfig, path + ": " + e.what());
  }
  return service_config_from_json(j);
}

std::shared_ptr<const Predictor> make_predictor(const ServiceConfig& c) {
  if (c.predictor == "external") {
    ExternalPredictorConfig ec;
    ec.endpoint = c.endpoint;
    ec.timeout = std::chrono::milliseconds(c.external_timeout_ms);
    return std::make_shared<ExternalPredictor>(ec);
  }
  return std::make_shared<ReferencePredictor>(c.predictor_config);
}

}  // namespace imp::studio
