#include "imp/studio/service.h"

#include <chrono>
#include <cstdio>
#include <random>

#include "imp/design_json.h"
#include "imp/error.h"

namespace imp::studio {

Service::Service(ServiceConfig config, std::shared_ptr<const Predictor> predictor,
                 TemplateLibrary templates)
    : config_(std::move(config)),
      predictor_(std::move(predictor)),
      templates_(std::move(templates)),
      store_(config_.data_dir) {
  if (!predictor_) throw Error(ErrorCode::kInvalidConfig, "service needs a predictor");
  std::random_device rd;
  id_state_ = (static_cast<std::uint64_t>(rd()) << 32) ^ rd() ^
              static_cast<std::uint64_t>(now_ms());
  recover();
  const int n = std::max(1, config_.workers);
  for (int i = 0; i < n; ++i) {
    workers_.emplace_back([this](std::stop_token st) { worker_loop(st); });
  }
}

Service::Service(ServiceConfig config)
    : Service(config, make_predictor(config),
              TemplateLibrary::load_directory(config.template_dir.empty() ? IMP_TEMPLATE_DIR
                                                                          : config.template_dir)) {}

Service::~Service() {
  {
    std::shared_lock lock(index_mutex_);
    for (auto& [_, job] : jobs_) job->stop.request_stop();
  }
  for (auto& w : workers_) w.request_stop();
  queue_cv_.notify_all();
  workers_.clear();
}

void Service::recover() {
  FileStore::Loaded loaded = store_.load_all();
  quarantined_ = std::move(loaded.quarantined);
  for (DesignRecord& r : loaded.designs) {
    auto slot = std::make_shared<DesignSlot>();
    slot->record = std::move(r);
    designs_.emplace(slot->record.id, std::move(slot));
  }
  for (JobRecord& j : loaded.jobs) {
    if (!is_terminal(j.state)) {
      j.state = JobState::kFailed;
      j.reason = "restart";
      j.updated_ms = now_ms();
      store_.save(j);
    }
    auto slot = std::make_shared<JobSlot>();
    slot->record = std::move(j);
    jobs_.emplace(slot->record.id, std::move(slot));
  }
}

std::string Service::new_id(char prefix) {
  std::lock_guard lock(id_mutex_);
  for (;;) {
    // splitmix64
    std::uint64_t z = (id_state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    z ^= z >> 31;
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%c%012llx", prefix,
                  static_cast<unsigned long long>(z & 0xffffffffffffull));
    std::string id(buf);
    std::shared_lock index(index_mutex_);
    if (!designs_.count(id) && !jobs_.count(id)) return id;
  }
}

std::shared_ptr<Service::DesignSlot> Service::design_slot(const std::string& id) const {
  std::shared_lock lock(index_mutex_);
  auto it = designs_.find(id);
  if (it == designs_.end()) throw Error(ErrorCode::kNotFound, "design '" + id + "'");
  return it->second;
}

std::shared_ptr<Service::JobSlot> Service::job_slot(const std::string& id) const {
  std::shared_lock lock(index_mutex_);
  auto it = jobs_.find(id);
  if (it == jobs_.end()) throw Error(ErrorCode::kNotFound, "job '" + id + "'");
  return it->second;
}

std::vector<std::string> Service::design_ids() const {
  std::shared_lock lock(index_mutex_);
  std::vector<std::string> ids;
  for (const auto& [id, _] : designs_) ids.push_back(id);
  return ids;
}

std::string Service::create_design(VectorDesign design) {
  validate(design);
  auto slot = std::make_shared<DesignSlot>();
  slot->record.id = new_id('d');
  slot->record.design = std::move(design);
  slot->record.created_ms = slot->record.updated_ms = now_ms();
  store_.save(slot->record);
  const std::string id = slot->record.id;
  std::unique_lock lock(index_mutex_);
  designs_.emplace(id, std::move(slot));
  return id;
}

DesignRecord Service::get_design(const std::string& id) const {
  auto slot = design_slot(id);
  std::lock_guard lock(slot->mutex);
  return slot->record;
}

void Service::put_design(const std::string& id, VectorDesign design) {
  validate(design);
  auto slot = design_slot(id);
  std::lock_guard lock(slot->mutex);
  if (!slot->active_job.empty()) {
    throw Error(ErrorCode::kConflict, "design '" + id + "' is referenced by running job '" +
                                          slot->active_job + "'");
  }
  DesignRecord updated = slot->record;
  updated.design = std::move(design);
  updated.updated_ms = now_ms();
  store_.save(updated);
  slot->record = std::move(updated);
  slot->cache.reset();
}

Prediction Service::predict(const std::string& id) {
  auto slot = design_slot(id);
  std::lock_guard lock(slot->mutex);
  const std::uint64_t hash = content_hash(slot->record.design);
  if (slot->cache && slot->cache->content_hash == hash) {
    Prediction p = *slot->cache;
    p.cached = true;
    return p;
  }
  Prediction p;
  p.map = predictor_->predict(slot->record.design);
  p.scores = element_scores(p.map, slot->record.design);
  p.content_hash = hash;
  slot->cache = p;
  return p;
}

std::string Service::submit_optimize(const std::string& design_id, TargetSpec targets,
                                     std::optional<GAConfig> config) {
  GAConfig cfg = config.value_or(config_.ga_defaults);
  cfg.validate();
  auto slot = design_slot(design_id);
  auto job = std::make_shared<JobSlot>();
  {
    std::lock_guard lock(slot->mutex);
    if (!slot->active_job.empty()) {
      throw Error(ErrorCode::kConflict, "design '" + design_id + "' already has job '" +
                                            slot->active_job + "'");
    }
    for (const auto& [eid, v] : targets.targets) {
      if (!slot->record.design.find(eid)) {
        throw Error(ErrorCode::kInvalidConfig, "unknown target element '" + eid + "'");
      }
      if (!(v >= 0.0 && v <= 1.0)) {
        throw Error(ErrorCode::kInvalidConfig, "target for '" + eid + "' outside [0,1]");
      }
    }
    job->record.id = new_id('j');
    job->record.design_id = design_id;
    job->record.targets = std::move(targets);
    job->record.config = cfg;
    job->record.created_ms = job->record.updated_ms = now_ms();
    store_.save(job->record);
    slot->active_job = job->record.id;
  }
  {
    std::unique_lock lock(index_mutex_);
    jobs_.emplace(job->record.id, job);
  }
  {
    std::lock_guard lock(queue_mutex_);
    queue_.push_back(job);
  }
  queue_cv_.notify_one();
  return job->record.id;
}

JobRecord Service::get_job(const std::string& id) const {
  auto job = job_slot(id);
  std::lock_guard lock(job->mutex);
  return job->record;
}

JobRecord Service::cancel_job(const std::string& id) {
  auto job = job_slot(id);
  bool queued = false;
  {
    std::lock_guard lock(job->mutex);
    if (is_terminal(job->record.state)) return job->record;
    queued = job->record.state == JobState::kQueued;
    job->stop.request_stop();
  }
  // A running job notices the stop request at its next epoch boundary.
  if (queued) finish_job(job, JobState::kCancelled, "cancelled before start");
  return get_job(id);
}

EventBatch Service::wait_events(const std::string& job_id, std::size_t from,
                                std::chrono::milliseconds wait) const {
  auto job = job_slot(job_id);
  std::unique_lock lock(job->mutex);
  job->changed.wait_for(lock, wait, [&] {
    return job->record.snapshots.size() > from || is_terminal(job->record.state);
  });
  EventBatch batch;
  const auto& snaps = job->record.snapshots;
  for (std::size_t i = from; i < snaps.size(); ++i) batch.events.push_back(snaps[i]);
  batch.state = job->record.state;
  batch.finished = is_terminal(job->record.state);
  return batch;
}

JobRecord Service::wait_job(const std::string& job_id, std::chrono::milliseconds timeout) const {
  auto job = job_slot(job_id);
  std::unique_lock lock(job->mutex);
  job->changed.wait_for(lock, timeout, [&] { return is_terminal(job->record.state); });
  return job->record;
}

void Service::worker_loop(std::stop_token stop) {
  while (!stop.stop_requested()) {
    std::shared_ptr<JobSlot> job;
    {
      std::unique_lock lock(queue_mutex_);
      if (!queue_cv_.wait(lock, stop, [&] { return !queue_.empty(); })) return;
      job = std::move(queue_.front());
      queue_.pop_front();
    }
    run_job(job);
  }
}

void Service::finish_job(const std::shared_ptr<JobSlot>& job, JobState state, std::string reason) {
  std::string design_id;
  std::string job_id;
  {
    std::lock_guard lock(job->mutex);
    design_id = job->record.design_id;
    job_id = job->record.id;
  }
  // Release the design before publishing the terminal state so a waiter that
  // sees the job finish can immediately modify the design.
  try {
    auto slot = design_slot(design_id);
    std::lock_guard lock(slot->mutex);
    if (slot->active_job == job_id) slot->active_job.clear();
  } catch (const Error&) {
  }
  std::lock_guard lock(job->mutex);
  if (is_terminal(job->record.state)) return;
  job->record.state = state;
  job->record.reason = std::move(reason);
  job->record.updated_ms = now_ms();
  try {
    store_.save(job->record);
  } catch (const Error&) {
    // The in-memory state stays authoritative if the disk write fails.
  }
  job->changed.notify_all();
}

void Service::run_job(const std::shared_ptr<JobSlot>& job) {
  TargetSpec targets;
  GAConfig cfg;
  std::string design_id;
  std::stop_token stop;
  {
    std::lock_guard lock(job->mutex);
    if (job->record.state != JobState::kQueued) return;
    job->record.state = JobState::kRunning;
    job->record.updated_ms = now_ms();
    store_.save(job->record);
    job->changed.notify_all();
    targets = job->record.targets;
    cfg = job->record.config;
    design_id = job->record.design_id;
    stop = job->stop.get_token();
  }
  try {
    const VectorDesign design = get_design(design_id).design;
    auto on_epoch = [&](int epoch, const VectorDesign& best, const FitnessReport& report) {
      std::lock_guard lock(job->mutex);
      job->record.snapshots.push_back(
          {epoch, report.mse, report.overlap_penalty, report.total, best});
      job->record.updated_ms = now_ms();
      store_.save(job->record);
      job->changed.notify_all();
    };
    OptimizeResult result = optimize(design, targets, *predictor_, cfg, on_epoch, stop);
    {
      std::lock_guard lock(job->mutex);
      job->record.result = result.best;
      job->record.best_design = result.best_design;
    }
    finish_job(job, JobState::kDone, "");
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kCancelled) {
      finish_job(job, JobState::kCancelled, "cancelled by client");
    } else {
      finish_job(job, JobState::kFailed, e.what());
    }
  } catch (const std::exception& e) {
    finish_job(job, JobState::kFailed, e.what());
  }
}

ReflowOutcome Service::reflow(const std::string& design_id, double width, double height,
                              const ReflowOptions& options) {
  const Prediction p = predict(design_id);
  const VectorDesign design = get_design(design_id).design;
  ReflowOutcome out;
  out.result = imp::reflow(design, p.map, templates_, width, height, options);
  out.design_id = create_design(out.result.design);
  return out;
}

}  // namespace imp::studio
