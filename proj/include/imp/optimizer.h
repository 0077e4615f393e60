#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <random>
#include <stop_token>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "imp/design.h"
#include "imp/predictor.h"

namespace imp {

// Per-element adjustment: translation in canvas units and a scale factor
// applied about the element center.
struct Gene {
  double dx = 0.0;
  double dy = 0.0;
  double s = 1.0;

  friend bool operator==(const Gene&, const Gene&) = default;
};

struct Genome {
  std::vector<Gene> genes;

  static Genome identity(std::size_t n) { return {std::vector<Gene>(n)}; }
  std::size_t size() const { return genes.size(); }

  friend bool operator==(const Genome&, const Genome&) = default;
};

// Target importance per element id. Elements without an entry keep the
// score predicted for the unmodified design.
struct TargetSpec {
  std::map<std::string, double> targets;
};

struct GAConfig {
  int population = 100;
  double mutation_probability = 0.5;
  int elite = 25;
  int offspring = 75;
  int epochs = 20;
  double overlap_weight = 1.0;
  // Gaussian offset sigma as a fraction of the canvas width/height.
  double position_sigma = 0.05;
  // Multiplicative scale step drawn uniformly from [min, max].
  double scale_step_min = 0.9;
  double scale_step_max = 1.1;
  double scale_min = 0.5;
  double scale_max = 2.0;
  bool mutate_offspring = true;
  std::uint64_t seed = 0;
  // Worker threads for scoring; 0 uses the hardware concurrency.
  int threads = 1;

  // Throws Error(kInvalidConfig).
  void validate() const;
};

nlohmann::json to_json(const GAConfig& config);
// Missing fields keep their defaults; unknown fields are rejected.
GAConfig ga_config_from_json(const nlohmann::json& j);

struct ElementFit {
  std::string id;
  double predicted = 0.0;
  double target = 0.0;
};

struct FitnessReport {
  double mse = 0.0;
  double overlap_penalty = 0.0;
  double total = 0.0;
  std::vector<ElementFit> elements;
};

nlohmann::json to_json(const FitnessReport& report);

// Seeded generator with a fixed draw recipe so runs replay bit-identically
// across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  // Uniform in [0, 1).
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  // Standard normal by Box-Muller; consumes exactly two uniforms.
  double normal();
  // Uniform index in [0, n).
  std::size_t index(std::size_t n);

 private:
  std::mt19937_64 engine_;
};

// Translate by (dx, dy), scale about the center (capped so the element fits
// the canvas), then clamp onto the canvas. Throws Error(kGenomeLengthMismatch).
VectorDesign apply_genome(const VectorDesign& design, const Genome& genome);

// One target per element in design order. Throws Error(kInvalidConfig) for
// unknown ids or targets outside [0, 1].
std::vector<double> resolve_targets(const VectorDesign& design, const TargetSpec& spec,
                                    const Predictor& predictor);

double overlap_penalty(const VectorDesign& design);

FitnessReport fitness(const VectorDesign& design, const Genome& genome,
                      const std::vector<double>& targets, const Predictor& predictor,
                      const GAConfig& config);
FitnessReport fitness(const VectorDesign& design, const Genome& genome, const TargetSpec& targets,
                      const Predictor& predictor, const GAConfig& config);

// Per element, with the configured probability: offsets get zero-mean
// Gaussian noise (sigma relative to the canvas) and the scale is multiplied
// by a uniform step, then clamped. Draw order per element: selection coin,
// then dx, dy and scale when selected.
Genome mutate(const Genome& genome, const GAConfig& config, double canvas_w, double canvas_h,
              Rng& rng);

// Each gene copied whole from a or b with probability 1/2 (one coin per gene).
Genome crossover(const Genome& a, const Genome& b, Rng& rng);

struct EpochRecord {
  int epoch = 0;
  int population = 0;
  int elite = 0;
  int offspring = 0;
  double best_total = 0.0;
  double best_mse = 0.0;
  double best_overlap = 0.0;
  double mean_total = 0.0;
  Genome best_genome;
};

nlohmann::json to_json(const EpochRecord& record);

struct OptimizeResult {
  VectorDesign best_design;
  Genome best_genome;
  FitnessReport best;
  std::vector<EpochRecord> history;
};

nlohmann::json history_json(const OptimizeResult& result);

using EpochCallback =
    std::function<void(int epoch, const VectorDesign& best, const FitnessReport& report)>;

// Genetic layout search. Epoch 0 holds the identity genome plus N-1 mutants
// of it. Every epoch scores the population, keeps the E lowest totals and
// refills with O crossover children of uniformly drawn elite parents.
// on_epoch runs once per epoch with the best design so far. A stop request
// is honoured between epochs with Error(kCancelled).
OptimizeResult optimize(const VectorDesign& design, const TargetSpec& targets,
                        const Predictor& predictor, const GAConfig& config,
                        const EpochCallback& on_epoch = {}, std::stop_token stop = {});

}  // namespace imp
