#include "imp/studio/store.h"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cerrno>
#include <chrono>
#include <cstring>

#include "imp/design_json.h"
#include "imp/error.h"
#include "imp/map_io.h"

namespace imp::studio {

namespace fs = std::filesystem;
using nlohmann::json;

std::int64_t now_ms() {
  return std::chrono::duration_cast<std::chrono::milliseconds>(
             std::chrono::system_clock::now().time_since_epoch())
      .count();
}

std::string_view to_string(JobState state) {
  switch (state) {
    case JobState::kQueued: return "queued";
    case JobState::kRunning: return "running";
    case JobState::kDone: return "done";
    case JobState::kCancelled: return "cancelled";
    case JobState::kFailed: return "failed";
  }
  return "failed";
}

JobState parse_job_state(std::string_view name) {
  for (JobState s : {JobState::kQueued, JobState::kRunning, JobState::kDone, JobState::kCancelled,
                     JobState::kFailed}) {
    if (to_string(s) == name) return s;
  }
  throw Error(ErrorCode::kCorruptRecord, "unknown job state '" + std::string(name) + "'");
}

json to_json(const DesignRecord& r) {
  return {{"id", r.id}, {"design", imp::to_json(r.design)}, {"created_ms", r.created_ms},
          {"updated_ms", r.updated_ms}};
}

DesignRecord design_record_from_json(const json& j) {
  DesignRecord r;
  r.id = j.at("id").get<std::string>();
  r.design = design_from_json(j.at("design"));
  r.created_ms = j.at("created_ms").get<std::int64_t>();
  r.updated_ms = j.at("updated_ms").get<std::int64_t>();
  return r;
}

json to_json(const EpochSnapshot& s) {
  return {{"epoch", s.epoch},
          {"fitness", {{"mse", s.mse}, {"overlap_penalty", s.overlap_penalty}, {"total", s.total}}},
          {"design", imp::to_json(s.design)}};
}

namespace {

EpochSnapshot snapshot_from_json(const json& j) {
  EpochSnapshot s;
  s.epoch = j.at("epoch").get<int>();
  const json& f = j.at("fitness");
  s.mse = f.at("mse").get<double>();
  s.overlap_penalty = f.at("overlap_penalty").get<double>();
  s.total = f.at("total").get<double>();
  s.design = design_from_json(j.at("design"));
  return s;
}

FitnessReport fitness_from_json(const json& j) {
  FitnessReport r;
  r.mse = j.at("mse").get<double>();
  r.overlap_penalty = j.at("overlap_penalty").get<double>();
  r.total = j.at("total").get<double>();
  for (const json& e : j.at("elements")) {
    r.elements.push_back(
        {e.at("id").get<std::string>(), e.at("predicted").get<double>(), e.at("target").get<double>()});
  }
  return r;
}

}  // namespace

json to_json(const JobRecord& job, bool with_snapshots) {
  json targets = json::object();
  for (const auto& [id, v] : job.targets.targets) targets[id] = v;
  json j{{"id", job.id},
         {"design_id", job.design_id},
         {"targets", targets},
         {"config", imp::to_json(job.config)},
         {"state", std::string(to_string(job.state))},
         {"progress", {{"epoch", job.snapshots.size()}, {"epochs", job.config.epochs}}},
         {"created_ms", job.created_ms},
         {"updated_ms", job.updated_ms}};
  if (!job.reason.empty()) j["reason"] = job.reason;
  if (job.result) j["result"] = imp::to_json(*job.result);
  if (job.best_design) j["best_design"] = imp::to_json(*job.best_design);
  if (with_snapshots) {
    json snaps = json::array();
    for (const EpochSnapshot& s : job.snapshots) snaps.push_back(to_json(s));
    j["snapshots"] = std::move(snaps);
  }
  return j;
}

JobRecord job_record_from_json(const json& j) {
  JobRecord job;
  job.id = j.at("id").get<std::string>();
  job.design_id = j.at("design_id").get<std::string>();
  for (const auto& item : j.at("targets").items()) job.targets.targets[item.key()] = item.value().get<double>();
  job.config = ga_config_from_json(j.at("config"));
  job.state = parse_job_state(j.at("state").get<std::string>());
  job.reason = j.value("reason", "");
  if (j.contains("result")) job.result = fitness_from_json(j["result"]);
  if (j.contains("best_design")) job.best_design = design_from_json(j["best_design"]);
  for (const json& s : j.value("snapshots", json::array())) job.snapshots.push_back(snapshot_from_json(s));
  job.created_ms = j.at("created_ms").get<std::int64_t>();
  job.updated_ms = j.at("updated_ms").get<std::int64_t>();
  return job;
}

void write_atomic(const fs::path& path, std::string_view bytes) {
  static std::atomic<std::uint64_t> counter{0};
  const fs::path tmp = path.parent_path() / ("." + path.filename().string() + "." +
                                             std::to_string(::getpid()) + "." +
                                             std::to_string(counter.fetch_add(1)) + ".tmp");
  const int fd = ::open(tmp.c_str(), O_WRONLY | O_CREAT | O_TRUNC | O_CLOEXEC, 0644);
  if (fd < 0) {
    throw Error(ErrorCode::kStorageUnavailable, tmp.string() + ": " + std::strerror(errno));
  }
  std::size_t written = 0;
  while (written < bytes.size()) {
    const ssize_t n = ::write(fd, bytes.data() + written, bytes.size() - written);
    if (n < 0) {
      if (errno == EINTR) continue;
      const int err = errno;
      ::close(fd);
      ::unlink(tmp.c_str());
      throw Error(ErrorCode::kStorageUnavailable, tmp.string() + ": " + std::strerror(err));
    }
    written += static_cast<std::size_t>(n);
  }
  if (::fsync(fd) != 0 || ::close(fd) != 0) {
    ::unlink(tmp.c_str());
    throw Error(ErrorCode::kStorageUnavailable, tmp.string() + ": fsync/close failed");
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    ::unlink(tmp.c_str());
    throw Error(ErrorCode::kStorageUnavailable, path.string() + ": " + ec.message());
  }
}

FileStore::FileStore(fs::path root) : root_(std::move(root)) {
  std::error_code ec;
  for (const char* sub : {"designs", "jobs", "quarantine"}) {
    fs::create_directories(root_ / sub, ec);
    if (ec) {
      throw Error(ErrorCode::kStorageUnavailable,
                  (root_ / sub).string() + ": " + ec.message());
    }
  }
}

void FileStore::save(const DesignRecord& record) const {
  write_atomic(root_ / "designs" / (record.id + ".json"), to_json(record).dump());
}

void FileStore::save(const JobRecord& job) const {
  write_atomic(root_ / "jobs" / (job.id + ".json"), to_json(job).dump());
}

FileStore::Loaded FileStore::load_all() const {
  Loaded out;
  auto scan = [&](const char* sub, auto&& parse) {
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(root_ / sub)) {
      const auto name = entry.path().filename().string();
      if (entry.is_regular_file() && entry.path().extension() == ".json" && name.front() != '.') {
        files.push_back(entry.path());
      }
    }
    std::sort(files.begin(), files.end());
    for (const fs::path& f : files) {
      try {
        parse(json::parse(read_file(f.string())), f);
      } catch (const std::exception&) {
        const fs::path dest = root_ / "quarantine" / (std::string(sub) + "-" + f.filename().string());
        std::error_code ec;
        fs::rename(f, dest, ec);
        out.quarantined.push_back(f.filename().string());
      }
    }
  };
  scan("designs", [&](const json& j, const fs::path& f) {
    DesignRecord r = design_record_from_json(j);
    if (r.id + ".json" != f.filename().string()) {
      throw Error(ErrorCode::kCorruptRecord, "id does not match file name");
    }
    out.designs.push_back(std::move(r));
  });
  scan("jobs", [&](const json& j, const fs::path&) { out.jobs.push_back(job_record_from_json(j)); });
  return out;
}

}  // namespace imp::studio
