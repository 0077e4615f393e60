#pragma once

#include <filesystem>
#include <initializer_list>
#include <random>
#include <string>

#include "imp/design.h"
#include "imp/design_json.h"

namespace imp::testing {

inline std::string fixture(const std::string& rel) { return std::string(IMP_FIXTURE_DIR) + "/" + rel; }

inline VectorDesign load_fixture_design(const std::string& name) {
  return load_design(fixture("designs/" + name + ".json"));
}

inline const char* const kFixtureDesigns[] = {"poster", "webpage", "ad", "mobile", "infographic", "flyer"};

struct Spec {
  std::string id;
  ElementKind kind;
  BBox box;
};

inline VectorDesign make_design(double w, double h, std::initializer_list<Spec> specs) {
  VectorDesign d;
  d.canvas_w = w;
  d.canvas_h = h;
  int z = 0;
  for (const Spec& s : specs) d.elements.push_back({s.id, s.kind, s.box, z++, std::nullopt});
  return d;
}

// Scratch directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("imp-test-" + std::to_string(rd()) + "-" + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::string str() const { return path_.string(); }

 private:
  std::filesystem::path path_;
};

}  // namespace imp::testing
