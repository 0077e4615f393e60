#include "imp/metrics.h"

#include <algorithm>
#include <cmath>

#include "imp/error.h"

namespace imp {

MetricReport evaluate(const ImportanceMap& prediction, const ImportanceMap& ground_truth,
                      const EvalOptions& options) {
  if (prediction.width() != ground_truth.width() || prediction.height() != ground_truth.height()) {
    if (options.strict) {
      throw Error(ErrorCode::kDimensionMismatch, "prediction and ground truth differ in size");
    }
    return evaluate(resample_bilinear(prediction, ground_truth.width(), ground_truth.height()),
                    ground_truth, options);
  }
  const auto p = prediction.values();
  const auto t = ground_truth.values();
  const double n = static_cast<double>(t.size());

  double mean_p = 0.0;
  double mean_t = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    mean_p += p[i];
    mean_t += t[i];
  }
  mean_p /= n;
  mean_t /= n;

  double sxy = 0.0, sxx = 0.0, syy = 0.0, ss_res = 0.0;
  double sum_p = 0.0, sum_t = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double dp = p[i] - mean_p;
    const double dt = t[i] - mean_t;
    sxy += dp * dt;
    sxx += dp * dp;
    syy += dt * dt;
    ss_res += (p[i] - t[i]) * (p[i] - t[i]);
    sum_p += p[i] + options.kl_epsilon;
    sum_t += t[i] + options.kl_epsilon;
  }
  if (syy == 0.0) throw Error(ErrorCode::kConstantTruth, "ground truth map is constant");

  MetricReport r;
  r.cc = sxx == 0.0 ? 0.0 : std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
  r.rmse = std::sqrt(ss_res / n);
  r.r2 = 1.0 - ss_res / syy;
  double kl = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double pt = (t[i] + options.kl_epsilon) / sum_t;
    const double pp = (p[i] + options.kl_epsilon) / sum_p;
    kl += pt * std::log(pt / pp);
  }
  // Rounding can leave a tiny negative sum for near-identical maps.
  r.kl = std::max(kl, 0.0);
  return r;
}

MetricReport evaluate_mean(std::span<const std::pair<ImportanceMap, ImportanceMap>> pairs,
                           const EvalOptions& options) {
  if (pairs.empty()) throw Error(ErrorCode::kEmptyAnnotationSet, "no map pairs to evaluate");
  MetricReport mean;
  for (const auto& [pred, truth] : pairs) {
    const MetricReport r = evaluate(pred, truth, options);
    mean.r2 += r.r2;
    mean.rmse += r.rmse;
    mean.cc += r.cc;
    mean.kl += r.kl;
  }
  const double n = static_cast<double>(pairs.size());
  mean.r2 /= n;
  mean.rmse /= n;
  mean.cc /= n;
  mean.kl /= n;
  return mean;
}

nlohmann::json to_json(const MetricReport& report) {
  return {{"r2", report.r2}, {"rmse", report.rmse}, {"cc", report.cc}, {"kl", report.kl}};
}

}  // namespace imp
