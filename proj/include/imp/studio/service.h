#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <stop_token>
#include <string>
#include <thread>
#include <vector>

#include "imp/importance_map.h"
#include "imp/optimizer.h"
#include "imp/predictor.h"
#include "imp/reflow.h"
#include "imp/studio/config.h"
#include "imp/studio/store.h"

namespace imp::studio {

struct Prediction {
  ImportanceMap map;
  std::vector<double> scores;
  std::uint64_t content_hash = 0;
  bool cached = false;
};

struct ReflowOutcome {
  std::string design_id;
  ReflowResult result;
};

struct EventBatch {
  std::vector<EpochSnapshot> events;
  JobState state = JobState::kQueued;
  bool finished = false;
};

// Transport-independent back end: design records with a prediction cache,
// optimization jobs on a bounded worker pool, reflow, and persistence.
// Errors surface as imp::Error: kNotFound, kConflict, kCountMismatch,
// kNoTemplateForCount, and schema errors from parsing.
class Service {
 public:
  Service(ServiceConfig config, std::shared_ptr<const Predictor> predictor,
          TemplateLibrary templates);
  // Builds the predictor from the config and loads the template directory.
  explicit Service(ServiceConfig config);
  ~Service();

  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  std::string create_design(VectorDesign design);
  DesignRecord get_design(const std::string& id) const;
  // Conflict while a queued or running job references the design.
  void put_design(const std::string& id, VectorDesign design);
  Prediction predict(const std::string& id);

  // Conflict when the design already has a queued or running job.
  std::string submit_optimize(const std::string& design_id, TargetSpec targets,
                              std::optional<GAConfig> config = std::nullopt);
  JobRecord get_job(const std::string& id) const;
  JobRecord cancel_job(const std::string& id);
  // Snapshots from index `from` on; blocks up to `wait` for new ones unless
  // the job has finished.
  EventBatch wait_events(const std::string& job_id, std::size_t from,
                         std::chrono::milliseconds wait) const;
  // Blocks until the job reaches a terminal state or the timeout passes.
  JobRecord wait_job(const std::string& job_id, std::chrono::milliseconds timeout) const;

  ReflowOutcome reflow(const std::string& design_id, double width, double height,
                       const ReflowOptions& options = {});

  const TemplateLibrary& templates() const { return templates_; }
  const ServiceConfig& config() const { return config_; }
  std::vector<std::string> quarantined() const { return quarantined_; }
  std::vector<std::string> design_ids() const;

 private:
  struct DesignSlot {
    mutable std::mutex mutex;
    DesignRecord record;
    std::optional<Prediction> cache;
    std::string active_job;
  };

  struct JobSlot {
    mutable std::mutex mutex;
    mutable std::condition_variable changed;
    JobRecord record;
    std::stop_source stop;
  };

  std::shared_ptr<DesignSlot> design_slot(const std::string& id) const;
  std::shared_ptr<JobSlot> job_slot(const std::string& id) const;
  std::string new_id(char prefix);
  void worker_loop(std::stop_token stop);
  void run_job(const std::shared_ptr<JobSlot>& job);
  void finish_job(const std::shared_ptr<JobSlot>& job, JobState state, std::string reason);
  void recover();

  ServiceConfig config_;
  std::shared_ptr<const Predictor> predictor_;
  TemplateLibrary templates_;
  FileStore store_;
  std::vector<std::string> quarantined_;

  mutable std::shared_mutex index_mutex_;
  std::map<std::string, std::shared_ptr<DesignSlot>> designs_;
  std::map<std::string, std::shared_ptr<JobSlot>> jobs_;

  std::mutex id_mutex_;
  std::uint64_t id_state_;

  std::mutex queue_mutex_;
  std::condition_variable_any queue_cv_;
  std::deque<std::shared_ptr<JobSlot>> queue_;
  std::vector<std::jthread> workers_;
};

}  // namespace imp::studio
