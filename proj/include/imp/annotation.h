#pragma once

#include <istream>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "imp/importance_map.h"

namespace imp {

// One line of a mask export:
//   {"design_id", "participant_id", "rle"}                design annotation
//   {"participant_id", "sentinel_id", "rle"}              sentinel annotation
// An optional "hit_id" splits one participant's work into several batches.
struct MaskRecord {
  std::string design_id;
  std::string participant_id;
  std::string hit_id;
  std::optional<std::string> sentinel_id;
  BinaryMask mask;
  std::size_t line = 0;
};

// Throws Error(kParseError) naming the offending 1-based line number.
std::vector<MaskRecord> parse_mask_lines(std::istream& in);
MaskRecord parse_mask_line(const std::string& text, std::size_t line_number);

class SentinelRegistry {
 public:
  void add(std::string id, BinaryMask truth);
  // Every *.json file in the directory: {"sentinel_id", "rle"}.
  static SentinelRegistry load_directory(const std::string& dir);

  const BinaryMask* find(const std::string& id) const;
  bool empty() const { return truth_.empty(); }
  std::size_t size() const { return truth_.size(); }

 private:
  std::map<std::string, BinaryMask> truth_;
};

struct AnnotationBatch {
  std::string participant_id;
  std::string hit_id;
  std::vector<std::pair<std::string, BinaryMask>> masks;      // design id, mask
  std::vector<std::pair<std::string, BinaryMask>> sentinels;  // sentinel id, mask
};

// Records grouped by (participant_id, hit_id), in key order.
std::vector<AnnotationBatch> group_batches(std::vector<MaskRecord> records);

struct AnnotationSet {
  std::string design_id;
  std::vector<BinaryMask> masks;
  std::vector<std::string> participants;
};

struct Rejection {
  std::string participant_id;
  std::string hit_id;
  std::string reason;
  std::vector<std::pair<std::string, double>> sentinel_ious;
};

struct IngestResult {
  std::map<std::string, AnnotationSet> accepted;
  std::vector<std::string> accepted_batches;  // "participant" or "participant/hit"
  std::vector<Rejection> rejected;
};

// Batches failing the sentinel gate are dropped whole. Throws
// Error(kUnknownSentinel) for sentinel ids missing from the registry.
IngestResult ingest(std::vector<MaskRecord> records, const SentinelRegistry& registry,
                    const SentinelGateConfig& gate = {});
IngestResult ingest(std::istream& lines, const SentinelRegistry& registry,
                    const SentinelGateConfig& gate = {});

struct Coverage {
  std::string design_id;
  std::size_t annotators = 0;
  bool below_minimum = false;
};

struct BuiltMaps {
  std::map<std::string, ImportanceMap> maps;
  std::vector<Coverage> coverage;
};

BuiltMaps build_maps(const std::map<std::string, AnnotationSet>& accepted,
                     std::size_t min_annotators = 25);

nlohmann::json report_json(const IngestResult& ingested, const BuiltMaps& built);

// Writes <design>.json and <design>.png per map plus report.json.
void write_annotation_outputs(const std::string& dir, const IngestResult& ingested,
                              const BuiltMaps& built);

}  // namespace imp
