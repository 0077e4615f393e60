// Headless entry point: serve the HTTP API or run one operation on files.
#include <csignal>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "imp/annotation.h"
#include "imp/design_json.h"
#include "imp/error.h"
#include "imp/map_io.h"
#include "imp/optimizer.h"
#include "imp/predictor.h"
#include "imp/reflow.h"
#include "imp/studio/config.h"
#include "imp/studio/http_server.h"
#include "imp/studio/service.h"

namespace {

using nlohmann::json;

imp::studio::HttpServer* g_server = nullptr;

void on_signal(int) {
  if (g_server) g_server->stop();
}

struct PredictorFlags {
  std::string kind = "reference";
  std::string endpoint;
  std::string predictor_config;
};

void add_predictor_flags(CLI::App* cmd, PredictorFlags& f) {
  cmd->add_option("--predictor", f.kind, "reference or external")
      ->check(CLI::IsMember({"reference", "external"}));
  cmd->add_option("--endpoint", f.endpoint, "external predictor base URL");
  cmd->add_option("--predictor-config", f.predictor_config, "reference predictor config JSON");
}

std::shared_ptr<const imp::Predictor> make(const PredictorFlags& f) {
  imp::studio::ServiceConfig c;
  c.predictor = f.kind;
  c.endpoint = f.endpoint;
  if (!f.predictor_config.empty()) {
    c.predictor_config = imp::predictor_config_from_json(json::parse(imp::read_file(f.predictor_config)));
  }
  return imp::studio::make_predictor(c);
}

void write_map_png(const std::string& path, const imp::ImportanceMap& map) {
  imp::write_file(path, imp::encode_png(imp::to_grayscale(map)));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Importance studio: prediction, layout optimization and reflow"};
  app.require_subcommand(1);

  std::string config_path;
  auto* serve = app.add_subcommand("serve", "run the HTTP service");
  serve->add_option("--config", config_path, "service config JSON");

  std::string design_path, out_path, png_path;
  PredictorFlags pf;
  auto* predict = app.add_subcommand("predict", "predict an importance map");
  predict->add_option("--design", design_path)->required();
  predict->add_option("--out", out_path, "map JSON (stdout if omitted)");
  predict->add_option("--png", png_path, "grayscale map PNG");
  add_predictor_flags(predict, pf);

  auto* classify = app.add_subcommand("classify", "classify a design");
  classify->add_option("--design", design_path)->required();

  std::string targets_path, ga_path, history_path;
  std::vector<std::string> target_args;
  auto* optimize = app.add_subcommand("optimize", "optimize toward target importance");
  optimize->add_option("--design", design_path)->required();
  optimize->add_option("--targets", targets_path, "JSON object {element id: target}");
  optimize->add_option("--target", target_args, "id=value, repeatable");
  optimize->add_option("--ga", ga_path, "GA config JSON");
  optimize->add_option("--out", out_path, "best design JSON (stdout if omitted)");
  optimize->add_option("--history", history_path, "per-epoch history JSON");
  add_predictor_flags(optimize, pf);

  double width = 0, height = 0;
  std::string templates_dir = IMP_TEMPLATE_DIR, before_png, after_png;
  bool group = false;
  auto* reflow = app.add_subcommand("reflow", "reflow a design to a new size");
  reflow->add_option("--design", design_path)->required();
  reflow->add_option("--width", width)->required()->check(CLI::PositiveNumber);
  reflow->add_option("--height", height)->required()->check(CLI::PositiveNumber);
  reflow->add_option("--templates", templates_dir);
  reflow->add_option("--out", out_path, "reflowed design JSON (stdout if omitted)");
  reflow->add_option("--before-png", before_png);
  reflow->add_option("--after-png", after_png);
  reflow->add_flag("--group-overflow", group);
  add_predictor_flags(reflow, pf);

  std::string in_path, sentinels_dir, out_dir;
  std::size_t min_annotators = 25;
  auto* annotate = app.add_subcommand("annotate-build", "build maps from mask exports");
  annotate->add_option("--in", in_path)->required();
  annotate->add_option("--sentinels", sentinels_dir)->required();
  annotate->add_option("--out", out_dir)->required();
  annotate->add_option("--min-annotators", min_annotators);

  CLI11_PARSE(app, argc, argv);

  auto emit = [&](const std::string& text) {
    if (out_path.empty()) {
      std::cout << text << "\n";
    } else {
      imp::write_file(out_path, text + "\n");
    }
  };

  try {
    if (*serve) {
      imp::studio::ServiceConfig cfg;
      if (!config_path.empty()) cfg = imp::studio::load_service_config(config_path);
      imp::studio::apply_env_overrides(cfg);
      imp::studio::Service service(cfg);
      imp::studio::HttpServer server(service);
      g_server = &server;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      std::cerr << "listening on " << cfg.bind << ":" << cfg.port << "\n";
      if (!server.listen(cfg.bind, cfg.port)) {
        std::cerr << "cannot listen on " << cfg.bind << ":" << cfg.port << "\n";
        return 1;
      }
      g_server = nullptr;
    } else if (*predict) {
      const imp::VectorDesign design = imp::load_design(design_path);
      const imp::ImportanceMap map = make(pf)->predict(design);
      const auto scores = imp::element_scores(map, design);
      json el = json::array();
      for (std::size_t i = 0; i < scores.size(); ++i) {
        el.push_back({{"id", design.elements[i].id}, {"score", scores[i]}});
      }
      emit(json{{"map", imp::to_json(map)}, {"scores", el}}.dump());
      if (!png_path.empty()) write_map_png(png_path, map);
    } else if (*classify) {
      const imp::ClassificationResult r = imp::classify(imp::load_design(design_path));
      json probs = json::object();
      for (imp::DesignClass c : imp::kAllDesignClasses) {
        probs[std::string(imp::to_string(c))] = r.probabilities[static_cast<std::size_t>(c)];
      }
      std::cout << json{{"predicted", std::string(imp::to_string(r.predicted))},
                        {"probabilities", probs}}.dump(2)
                << "\n";
    } else if (*optimize) {
      const imp::VectorDesign design = imp::load_design(design_path);
      imp::TargetSpec targets;
      if (!targets_path.empty()) {
        for (const auto& item : json::parse(imp::read_file(targets_path)).items()) {
          targets.targets[item.key()] = item.value().get<double>();
        }
      }
      for (const std::string& t : target_args) {
        const auto eq = t.rfind('=');
        if (eq == std::string::npos) throw imp::Error(imp::ErrorCode::kInvalidConfig, "--target needs id=value");
        targets.targets[t.substr(0, eq)] = std::stod(t.substr(eq + 1));
      }
      imp::GAConfig ga;
      if (!ga_path.empty()) ga = imp::ga_config_from_json(json::parse(imp::read_file(ga_path)));
      const auto predictor = make(pf);
      const imp::OptimizeResult r = imp::optimize(
          design, targets, *predictor, ga, [](int epoch, const imp::VectorDesign&, const imp::FitnessReport& f) {
            std::cerr << "epoch " << epoch << " total " << f.total << "\n";
          });
      emit(imp::canonical_json(r.best_design));
      if (!history_path.empty()) imp::write_file(history_path, imp::history_json(r).dump(2) + "\n");
    } else if (*reflow) {
      const imp::VectorDesign design = imp::load_design(design_path);
      const auto predictor = make(pf);
      const imp::ImportanceMap before = predictor->predict(design);
      const imp::TemplateLibrary lib = imp::TemplateLibrary::load_directory(templates_dir);
      imp::ReflowOptions options;
      options.group_overflow = group;
      const imp::ReflowResult r = imp::reflow(design, before, lib, width, height, options);
      emit(imp::canonical_json(r.design));
      std::cerr << "template " << r.template_id << "\n";
      if (!before_png.empty()) write_map_png(before_png, before);
      if (!after_png.empty()) write_map_png(after_png, predictor->predict(r.design));
    } else if (*annotate) {
      const imp::SentinelRegistry registry = imp::SentinelRegistry::load_directory(sentinels_dir);
      std::ifstream in(in_path);
      if (!in) throw imp::Error(imp::ErrorCode::kStorageUnavailable, "cannot open " + in_path);
      const imp::IngestResult ingested = imp::ingest(in, registry);
      const imp::BuiltMaps built = imp::build_maps(ingested.accepted, min_annotators);
      imp::write_annotation_outputs(out_dir, ingested, built);
      std::cerr << built.maps.size() << " maps, " << ingested.rejected.size() << " rejected batches\n";
    }
  } catch (const imp::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
