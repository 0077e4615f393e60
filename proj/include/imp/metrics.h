#pragma once

#include <span>
#include <utility>

#include <nlohmann/json.hpp>

#include "imp/importance_map.h"

namespace imp {

struct MetricReport {
  double r2 = 0.0;
  double rmse = 0.0;
  double cc = 0.0;
  double kl = 0.0;
};

struct EvalOptions {
  // Strict mode rejects differently sized maps instead of resampling the
  // prediction onto the ground-truth grid.
  bool strict = false;
  // Added to every cell before normalizing to distributions for KL.
  double kl_epsilon = 1e-7;
};

// CC: Pearson correlation. RMSE: root mean squared cell error.
// R2: 1 - SSres/SStot. KL: sum p log(p/q) with p from the ground truth and
// q from the prediction, both epsilon-smoothed and normalized to sum 1.
// Throws Error(kConstantTruth) when the ground truth has zero variance.
MetricReport evaluate(const ImportanceMap& prediction, const ImportanceMap& ground_truth,
                      const EvalOptions& options = {});

// Per-image reports averaged over the corpus.
MetricReport evaluate_mean(std::span<const std::pair<ImportanceMap, ImportanceMap>> pairs,
                           const EvalOptions& options = {});

nlohmann::json to_json(const MetricReport& report);

}  // namespace imp
