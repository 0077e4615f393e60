#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <fstream>

#include "imp/annotation.h"
#include "imp/design_json.h"
#include "imp/error.h"
#include "imp/map_io.h"
#include "imp/metrics.h"
#include "imp/optimizer.h"
#include "imp/predictor.h"
#include "imp/reflow.h"

namespace py = pybind11;
using nlohmann::json;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Array to_array(const imp::ImportanceMap& map) {
  Array out({map.height(), map.width()});
  auto v = map.values();
  std::copy(v.begin(), v.end(), out.mutable_data());
  return out;
}

imp::ImportanceMap from_array(const Array& a) {
  if (a.ndim() != 2) throw imp::Error(imp::ErrorCode::kDimensionMismatch, "map must be 2-D");
  const int h = static_cast<int>(a.shape(0)), w = static_cast<int>(a.shape(1));
  return imp::ImportanceMap(w, h, std::vector<double>(a.data(), a.data() + a.size()));
}

imp::PredictorConfig predictor_config(const std::string& config_json) {
  return config_json.empty() ? imp::PredictorConfig{} : imp::predictor_config_from_json(json::parse(config_json));
}

imp::ParseMode mode(bool lenient) { return lenient ? imp::ParseMode::kLenient : imp::ParseMode::kStrict; }

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Importance prediction, layout optimization and reflow for vector designs.";

  static py::exception<imp::Error> error(m, "ImpError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const imp::Error& e) {
      PyErr_SetObject(error.ptr(), py::make_tuple(e.what(), std::string(imp::to_string(e.code()))).ptr());
    } catch (const json::exception& e) {
      PyErr_SetString(PyExc_ValueError, e.what());
    }
  });

  m.def("canonical_json", [](const std::string& text, bool lenient) {
    return imp::canonical_json(imp::parse_design(text, mode(lenient)));
  }, py::arg("design"), py::arg("lenient") = false);

  m.def("content_hash", [](const std::string& text) {
    return imp::content_hash(imp::parse_design(text));
  }, py::arg("design"));

  m.def("classify", [](const std::string& text) {
    const imp::ClassificationResult r = imp::classify(imp::parse_design(text));
    py::dict probs;
    for (std::size_t i = 0; i < imp::kDesignClassCount; ++i) {
      probs[py::str(std::string(imp::to_string(static_cast<imp::DesignClass>(i))))] = r.probabilities[i];
    }
    return py::make_tuple(std::string(imp::to_string(r.predicted)), probs);
  }, py::arg("design"));

  m.def("predict", [](const std::string& text, const std::string& config) {
    const imp::VectorDesign d = imp::parse_design(text);
    imp::ImportanceMap map;
    {
      py::gil_scoped_release release;
      map = imp::ReferencePredictor(predictor_config(config)).predict(d);
    }
    return to_array(map);
  }, py::arg("design"), py::arg("config") = "");

  m.def("element_scores", [](const Array& map, const std::string& text) {
    return imp::element_scores(from_array(map), imp::parse_design(text));
  }, py::arg("map"), py::arg("design"));

  m.def("evaluate", [](const Array& pred, const Array& truth, bool strict, double kl_epsilon) {
    imp::EvalOptions opts;
    opts.strict = strict;
    opts.kl_epsilon = kl_epsilon;
    const imp::MetricReport r = imp::evaluate(from_array(pred), from_array(truth), opts);
    py::dict out;
    out["cc"] = r.cc;
    out["rmse"] = r.rmse;
    out["r2"] = r.r2;
    out["kl"] = r.kl;
    return out;
  }, py::arg("prediction"), py::arg("truth"), py::arg("strict") = false, py::arg("kl_epsilon") = 1e-7);

  m.def("optimize", [](const std::string& text, const std::map<std::string, double>& targets,
                       const std::string& ga_config, const std::string& predictor_cfg) {
    const imp::VectorDesign d = imp::parse_design(text);
    const imp::GAConfig cfg = ga_config.empty() ? imp::GAConfig{} : imp::ga_config_from_json(json::parse(ga_config));
    const imp::ReferencePredictor predictor(predictor_config(predictor_cfg));
    imp::OptimizeResult r;
    {
      py::gil_scoped_release release;
      r = imp::optimize(d, imp::TargetSpec{targets}, predictor, cfg);
    }
    return py::make_tuple(imp::canonical_json(r.best_design), imp::to_json(r.best).dump(),
                          imp::history_json(r).dump());
  }, py::arg("design"), py::arg("targets"), py::arg("ga_config") = "", py::arg("predictor_config") = "");

  m.def("reflow", [](const std::string& text, double width, double height, const std::string& template_dir,
                     bool group_overflow, const std::string& predictor_cfg) {
    const imp::VectorDesign d = imp::parse_design(text);
    const imp::TemplateLibrary lib = imp::TemplateLibrary::load_directory(template_dir);
    const imp::ImportanceMap map = imp::ReferencePredictor(predictor_config(predictor_cfg)).predict(d);
    imp::ReflowOptions opts;
    opts.group_overflow = group_overflow;
    const imp::ReflowResult r = imp::reflow(d, map, lib, width, height, opts);
    return json{{"template_id", r.template_id},
                {"ranking", r.ranking},
                {"grouped", r.grouped},
                {"design", imp::to_json(r.design)}}
        .dump();
  }, py::arg("design"), py::arg("width"), py::arg("height"), py::arg("template_dir"),
     py::arg("group_overflow") = false, py::arg("predictor_config") = "");

  m.def("build_annotation_maps", [](const std::string& masks_path, const std::string& sentinel_dir,
                                    std::size_t min_annotators) {
    std::ifstream in(masks_path);
    if (!in) throw imp::Error(imp::ErrorCode::kStorageUnavailable, "cannot open " + masks_path);
    const imp::IngestResult ingested = imp::ingest(in, imp::SentinelRegistry::load_directory(sentinel_dir));
    const imp::BuiltMaps built = imp::build_maps(ingested.accepted, min_annotators);
    py::dict maps;
    for (const auto& [id, map] : built.maps) maps[py::str(id)] = to_array(map);
    return py::make_tuple(maps, imp::report_json(ingested, built).dump());
  }, py::arg("masks_path"), py::arg("sentinel_dir"), py::arg("min_annotators") = 25);

  m.def("rle_encode", [](const py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>& a) {
    if (a.ndim() != 2) throw imp::Error(imp::ErrorCode::kDimensionMismatch, "mask must be 2-D");
    imp::BinaryMask mask(static_cast<int>(a.shape(1)), static_cast<int>(a.shape(0)));
    for (py::ssize_t i = 0; i < a.size(); ++i) mask.bits[i] = a.data()[i] ? 1 : 0;
    return imp::encode_rle(mask);
  }, py::arg("mask"));

  m.def("rle_decode", [](const std::string& rle) {
    const imp::BinaryMask mask = imp::decode_rle(rle);
    py::array_t<std::uint8_t> out({mask.h, mask.w});
    std::copy(mask.bits.begin(), mask.bits.end(), out.mutable_data());
    return out;
  }, py::arg("rle"));
}
