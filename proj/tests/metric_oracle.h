#pragma once

#include <span>

#include <boost/multiprecision/cpp_dec_float.hpp>

#include "imp/metrics.h"

namespace imp::testing {

using Big = boost::multiprecision::cpp_dec_float_50;

struct BigReport {
  Big r2, rmse, cc, kl;
};

// Textbook formulas evaluated in 50-digit decimal arithmetic, two-pass.
inline BigReport oracle_evaluate(std::span<const double> pred, std::span<const double> truth,
                                 double epsilon = 1e-7) {
  const std::size_t n = truth.size();
  Big mp = 0, mt = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mp += Big(pred[i]);
    mt += Big(truth[i]);
  }
  mp /= n;
  mt /= n;
  Big sxy = 0, sxx = 0, syy = 0, res = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const Big a = Big(pred[i]) - mp, b = Big(truth[i]) - mt;
    sxy += a * b;
    sxx += a * a;
    syy += b * b;
    const Big d = Big(pred[i]) - Big(truth[i]);
    res += d * d;
  }
  BigReport r;
  r.cc = sxx == 0 ? Big(0) : Big(sxy / sqrt(sxx * syy));
  r.rmse = sqrt(res / n);
  r.r2 = 1 - res / syy;
  const Big eps(epsilon);
  Big sp = 0, st = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sp += Big(pred[i]) + eps;
    st += Big(truth[i]) + eps;
  }
  r.kl = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const Big pt = (Big(truth[i]) + eps) / st;
    const Big pq = (Big(pred[i]) + eps) / sp;
    r.kl += pt * log(pt / pq);
  }
  return r;
}

inline double max_abs_diff(const MetricReport& r, const BigReport& o) {
  double worst = 0;
  for (auto [a, b] : {std::pair{r.r2, o.r2}, {r.rmse, o.rmse}, {r.cc, o.cc}, {r.kl, o.kl}}) {
    const double d = std::abs(static_cast<double>(Big(a) - b));
    worst = std::max(worst, d);
  }
  return worst;
}

}  // namespace imp::testing
