#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "imp/design.h"
#include "imp/optimizer.h"

namespace imp::studio {

std::int64_t now_ms();

struct DesignRecord {
  std::string id;
  VectorDesign design;
  std::int64_t created_ms = 0;
  std::int64_t updated_ms = 0;
};

enum class JobState { kQueued, kRunning, kDone, kCancelled, kFailed };

std::string_view to_string(JobState state);
JobState parse_job_state(std::string_view name);
inline bool is_terminal(JobState s) {
  return s == JobState::kDone || s == JobState::kCancelled || s == JobState::kFailed;
}

struct EpochSnapshot {
  int epoch = 0;
  double mse = 0.0;
  double overlap_penalty = 0.0;
  double total = 0.0;
  VectorDesign design;
};

struct JobRecord {
  std::string id;
  std::string design_id;
  TargetSpec targets;
  GAConfig config;
  JobState state = JobState::kQueued;
  std::string reason;
  std::vector<EpochSnapshot> snapshots;
  std::optional<FitnessReport> result;
  std::optional<VectorDesign> best_design;
  std::int64_t created_ms = 0;
  std::int64_t updated_ms = 0;
};

nlohmann::json to_json(const DesignRecord& record);
DesignRecord design_record_from_json(const nlohmann::json& j);
nlohmann::json to_json(const EpochSnapshot& snapshot);
nlohmann::json to_json(const JobRecord& job, bool with_snapshots = true);
JobRecord job_record_from_json(const nlohmann::json& j);

// Writes through a temp file in the same directory, fsyncs, then renames
// over the destination, so readers see either the old or the new file.
void write_atomic(const std::filesystem::path& path, std::string_view bytes);

// One canonical JSON file per record under <root>/designs and <root>/jobs.
// Unreadable files move to <root>/quarantine instead of failing the load.
class FileStore {
 public:
  // Throws Error(kStorageUnavailable) when the directories cannot be created.
  explicit FileStore(std::filesystem::path root);

  void save(const DesignRecord& record) const;
  void save(const JobRecord& job) const;

  struct Loaded {
    std::vector<DesignRecord> designs;
    std::vector<JobRecord> jobs;
    std::vector<std::string> quarantined;
  };
  Loaded load_all() const;

  const std::filesystem::path& root() const { return root_; }

 private:
  std::filesystem::path root_;
};

}  // namespace imp::studio
