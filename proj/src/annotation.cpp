#include "imp/annotation.h"

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <tuple>

#include "imp/error.h"
#include "imp/map_io.h"

namespace imp {

using nlohmann::json;

MaskRecord parse_mask_line(const std::string& text, std::size_t line_number) {
  auto fail = [&](const std::string& why) {
    return Error(ErrorCode::kParseError, "line " + std::to_string(line_number) + ": " + why);
  };
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw fail(e.what());
  }
  if (!j.is_object()) throw fail("expected an object");
  auto str = [&](const char* key, bool required) -> std::optional<std::string> {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) {
      if (required) throw fail(std::string("missing '") + key + "'");
      return std::nullopt;
    }
    if (!it->is_string()) throw fail(std::string("'") + key + "' must be a string");
    return it->get<std::string>();
  };
  MaskRecord r;
  r.line = line_number;
  r.participant_id = *str("participant_id", true);
  r.sentinel_id = str("sentinel_id", false);
  r.design_id = str("design_id", !r.sentinel_id).value_or("");
  r.hit_id = str("hit_id", false).value_or("");
  // Design ids become output file names.
  const bool safe = std::all_of(r.design_id.begin(), r.design_id.end(), [](unsigned char c) {
    return std::isalnum(c) || c == '_' || c == '-' || c == '.';
  });
  if (!safe || r.design_id.starts_with('.')) throw fail("design_id '" + r.design_id + "' is not a plain name");
  try {
    r.mask = decode_rle(*str("rle", true));
  } catch (const Error& e) {
    throw fail(e.what());
  }
  return r;
}

std::vector<MaskRecord> parse_mask_lines(std::istream& in) {
  std::vector<MaskRecord> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    out.push_back(parse_mask_line(line, n));
  }
  return out;
}

void SentinelRegistry::add(std::string id, BinaryMask truth) {
  truth_.insert_or_assign(std::move(id), std::move(truth));
}

SentinelRegistry SentinelRegistry::load_directory(const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) {
    throw Error(ErrorCode::kStorageUnavailable, "sentinel directory not found: " + dir);
  }
  SentinelRegistry reg;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".json") continue;
    try {
      const json j = json::parse(read_file(entry.path().string()));
      reg.add(j.at("sentinel_id").get<std::string>(), decode_rle(j.at("rle").get<std::string>()));
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kParseError, entry.path().string() + ": " + e.what());
    }
  }
  if (reg.empty()) throw Error(ErrorCode::kStorageUnavailable, "no sentinels in " + dir);
  return reg;
}

const BinaryMask* SentinelRegistry::find(const std::string& id) const {
  auto it = truth_.find(id);
  return it == truth_.end() ? nullptr : &it->second;
}

std::vector<AnnotationBatch> group_batches(std::vector<MaskRecord> records) {
  // Content order makes grouping independent of input line order.
  std::sort(records.begin(), records.end(), [](const MaskRecord& a, const MaskRecord& b) {
    return std::tie(a.participant_id, a.hit_id, a.sentinel_id, a.design_id, a.mask.bits) <
           std::tie(b.participant_id, b.hit_id, b.sentinel_id, b.design_id, b.mask.bits);
  });
  std::vector<AnnotationBatch> out;
  for (MaskRecord& r : records) {
    if (out.empty() || out.back().participant_id != r.participant_id || out.back().hit_id != r.hit_id) {
      out.push_back({r.participant_id, r.hit_id, {}, {}});
    }
    if (r.sentinel_id) {
      out.back().sentinels.emplace_back(*r.sentinel_id, std::move(r.mask));
    } else {
      out.back().masks.emplace_back(r.design_id, std::move(r.mask));
    }
  }
  return out;
}

IngestResult ingest(std::vector<MaskRecord> records, const SentinelRegistry& registry,
                    const SentinelGateConfig& gate) {
  for (const MaskRecord& r : records) {
    if (r.sentinel_id && !registry.find(*r.sentinel_id)) {
      throw Error(ErrorCode::kUnknownSentinel,
                  "line " + std::to_string(r.line) + ": sentinel '" + *r.sentinel_id + "'");
    }
  }
  IngestResult result;
  for (AnnotationBatch& batch : group_batches(std::move(records))) {
    Rejection rej{batch.participant_id, batch.hit_id, "", {}};
    if (batch.sentinels.empty()) {
      rej.reason = "no sentinel annotations";
      result.rejected.push_back(std::move(rej));
      continue;
    }
    std::vector<double> ious;
    bool dims_ok = true;
    for (const auto& [sid, mask] : batch.sentinels) {
      const BinaryMask& truth = *registry.find(sid);
      if (truth.w != mask.w || truth.h != mask.h) {
        dims_ok = false;
        rej.sentinel_ious.emplace_back(sid, 0.0);
        ious.push_back(0.0);
        continue;
      }
      const double v = iou(mask, truth);
      rej.sentinel_ious.emplace_back(sid, v);
      ious.push_back(v);
    }
    const GateDecision d = sentinel_gate_ious(std::move(ious), gate);
    if (!dims_ok || !d.accepted) {
      rej.reason = !dims_ok ? "sentinel mask size differs from ground truth"
                            : "passed " + std::to_string(d.passed) + " of " +
                                  std::to_string(batch.sentinels.size()) + " sentinels";
      result.rejected.push_back(std::move(rej));
      continue;
    }
    result.accepted_batches.push_back(batch.hit_id.empty() ? batch.participant_id
                                                           : batch.participant_id + "/" + batch.hit_id);
    for (auto& [design_id, mask] : batch.masks) {
      AnnotationSet& set = result.accepted[design_id];
      set.design_id = design_id;
      set.masks.push_back(std::move(mask));
      set.participants.push_back(batch.participant_id);
    }
  }
  return result;
}

IngestResult ingest(std::istream& lines, const SentinelRegistry& registry,
                    const SentinelGateConfig& gate) {
  return ingest(parse_mask_lines(lines), registry, gate);
}

BuiltMaps build_maps(const std::map<std::string, AnnotationSet>& accepted,
                     std::size_t min_annotators) {
  BuiltMaps out;
  for (const auto& [id, set] : accepted) {
    if (set.masks.empty()) {
      throw Error(ErrorCode::kEmptyAnnotationSet, "design '" + id + "' has no accepted masks");
    }
    out.maps.emplace(id, aggregate(set.masks));
    // One mask per participant and design.
    out.coverage.push_back({id, set.masks.size(), set.masks.size() < min_annotators});
  }
  return out;
}

json report_json(const IngestResult& ingested, const BuiltMaps& built) {
  json coverage = json::array();
  for (const Coverage& c : built.coverage) {
    coverage.push_back(
        {{"design_id", c.design_id}, {"annotators", c.annotators}, {"below_minimum", c.below_minimum}});
  }
  json rejected = json::array();
  for (const Rejection& r : ingested.rejected) {
    json ious = json::array();
    for (const auto& [sid, v] : r.sentinel_ious) ious.push_back({{"sentinel_id", sid}, {"iou", v}});
    json entry{{"participant_id", r.participant_id}, {"reason", r.reason}, {"sentinel_ious", ious}};
    if (!r.hit_id.empty()) entry["hit_id"] = r.hit_id;
    rejected.push_back(std::move(entry));
  }
  return {{"coverage", coverage}, {"accepted_batches", ingested.accepted_batches}, {"rejected", rejected}};
}

void write_annotation_outputs(const std::string& dir, const IngestResult& ingested,
                              const BuiltMaps& built) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kStorageUnavailable, "cannot create " + dir + ": " + ec.message());
  for (const auto& [id, map] : built.maps) {
    const std::string base = (fs::path(dir) / id).string();
    write_file(base + ".json", to_json(map).dump());
    write_file(base + ".png", encode_png(to_grayscale(map)));
  }
  write_file((fs::path(dir) / "report.json").string(), report_json(ingested, built).dump(2));
}

}  // namespace imp
