#include "imp/optimizer.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <thread>

#include "imp/design_json.h"
#include "imp/error.h"
#include "imp/importance_map.h"

namespace imp {

using nlohmann::json;

void GAConfig::validate() const {
  auto bad = [](const std::string& why) { throw Error(ErrorCode::kInvalidConfig, why); };
  if (population < 1) bad("population must be >= 1");
  if (elite < 1) bad("elite count must be >= 1");
  if (offspring < 0) bad("offspring count must be >= 0");
  if (elite + offspring != population) bad("elite + offspring must equal population");
  if (!(mutation_probability >= 0.0 && mutation_probability <= 1.0)) {
    bad("mutation probability must lie in [0,1]");
  }
  if (epochs < 1) bad("epochs must be >= 1");
  if (!(overlap_weight >= 0.0)) bad("overlap weight must be >= 0");
  if (!(position_sigma >= 0.0)) bad("position sigma must be >= 0");
  if (!(scale_step_min > 0.0 && scale_step_min <= scale_step_max)) bad("bad scale step range");
  if (!(scale_min > 0.0 && scale_min <= 1.0 && scale_max >= 1.0)) {
    bad("scale bounds must bracket 1");
  }
  if (threads < 0) bad("threads must be >= 0");
}

json to_json(const GAConfig& c) {
  return {{"population", c.population},
          {"mutation_probability", c.mutation_probability},
          {"elite", c.elite},
          {"offspring", c.offspring},
          {"epochs", c.epochs},
          {"overlap_weight", c.overlap_weight},
          {"position_sigma", c.position_sigma},
          {"scale_step_min", c.scale_step_min},
          {"scale_step_max", c.scale_step_max},
          {"scale_min", c.scale_min},
          {"scale_max", c.scale_max},
          {"mutate_offspring", c.mutate_offspring},
          {"seed", c.seed},
          {"threads", c.threads}};
}

GAConfig ga_config_from_json(const json& j) {
  if (!j.is_object()) throw Error(ErrorCode::kInvalidConfig, "GA config must be an object");
  GAConfig c;
  try {
    for (const auto& item : j.items()) {
      const std::string& k = item.key();
      const json& v = item.value();
      if (k == "population") c.population = v.get<int>();
      else if (k == "mutation_probability") c.mutation_probability = v.get<double>();
      else if (k == "elite") c.elite = v.get<int>();
      else if (k == "offspring") c.offspring = v.get<int>();
      else if (k == "epochs") c.epochs = v.get<int>();
      else if (k == "overlap_weight") c.overlap_weight = v.get<double>();
      else if (k == "position_sigma") c.position_sigma = v.get<double>();
      else if (k == "scale_step_min") c.scale_step_min = v.get<double>();
      else if (k == "scale_step_max") c.scale_step_max = v.get<double>();
      else if (k == "scale_min") c.scale_min = v.get<double>();
      else if (k == "scale_max") c.scale_max = v.get<double>();
      else if (k == "mutate_offspring") c.mutate_offspring = v.get<bool>();
      else if (k == "seed") c.seed = v.get<std::uint64_t>();
      else if (k == "threads") c.threads = v.get<int>();
      else throw Error(ErrorCode::kInvalidConfig, "unknown GA config field '" + k + "'");
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInvalidConfig, e.what());
  }
  c.validate();
  return c;
}

json to_json(const FitnessReport& r) {
  json elements = json::array();
  for (const ElementFit& e : r.elements) {
    elements.push_back({{"id", e.id}, {"predicted", e.predicted}, {"target", e.target}});
  }
  return {{"mse", r.mse},
          {"overlap_penalty", r.overlap_penalty},
          {"total", r.total},
          {"elements", elements}};
}

double Rng::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::normal() {
  const double u1 = uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log1p(-u1)) * std::cos(2.0 * M_PI * u2);
}

std::size_t Rng::index(std::size_t n) {
  const auto i = static_cast<std::size_t>(uniform() * static_cast<double>(n));
  return std::min(i, n - 1);
}

VectorDesign apply_genome(const VectorDesign& design, const Genome& genome) {
  if (genome.size() != design.elements.size()) {
    throw Error(ErrorCode::kGenomeLengthMismatch,
                "genome has " + std::to_string(genome.size()) + " genes for " +
                    std::to_string(design.elements.size()) + " elements");
  }
  VectorDesign out = design;
  for (std::size_t i = 0; i < genome.size(); ++i) {
    const Gene& g = genome.genes[i];
    BBox& b = out.elements[i].bbox;
    const double s = std::min({g.s, design.canvas_w / b.w, design.canvas_h / b.h});
    const double cx = b.center_x() + g.dx;
    const double cy = b.center_y() + g.dy;
    const double w = std::min(b.w * s, design.canvas_w);
    const double h = std::min(b.h * s, design.canvas_h);
    b = clamp_to_canvas({cx - 0.5 * w, cy - 0.5 * h, w, h}, out);
  }
  return out;
}

std::vector<double> resolve_targets(const VectorDesign& design, const TargetSpec& spec,
                                    const Predictor& predictor) {
  for (const auto& [id, value] : spec.targets) {
    if (!design.find(id)) throw Error(ErrorCode::kInvalidConfig, "unknown target element '" + id + "'");
    if (!(value >= 0.0 && value <= 1.0)) {
      throw Error(ErrorCode::kInvalidConfig, "target for '" + id + "' outside [0,1]");
    }
  }
  std::vector<double> targets = element_scores(predictor.predict(design), design);
  for (std::size_t i = 0; i < design.elements.size(); ++i) {
    if (auto it = spec.targets.find(design.elements[i].id); it != spec.targets.end()) {
      targets[i] = it->second;
    }
  }
  return targets;
}

double overlap_penalty(const VectorDesign& design) {
  double sum = 0.0;
  const auto& el = design.elements;
  for (std::size_t i = 0; i < el.size(); ++i) {
    for (std::size_t j = i + 1; j < el.size(); ++j) sum += overlap_area(el[i].bbox, el[j].bbox);
  }
  return sum / design.canvas_area();
}

FitnessReport fitness(const VectorDesign& design, const Genome& genome,
                      const std::vector<double>& targets, const Predictor& predictor,
                      const GAConfig& config) {
  if (targets.size() != design.elements.size()) {
    throw Error(ErrorCode::kInvalidConfig, "one target per element required");
  }
  const VectorDesign variant = apply_genome(design, genome);
  const std::vector<double> scores = element_scores(predictor.predict(variant), variant);
  FitnessReport r;
  r.elements.reserve(scores.size());
  double sse = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const double d = scores[i] - targets[i];
    sse += d * d;
    r.elements.push_back({variant.elements[i].id, scores[i], targets[i]});
  }
  r.mse = sse / static_cast<double>(scores.size());
  r.overlap_penalty = overlap_penalty(variant);
  r.total = r.mse + config.overlap_weight * r.overlap_penalty;
  return r;
}

FitnessReport fitness(const VectorDesign& design, const Genome& genome, const TargetSpec& targets,
                      const Predictor& predictor, const GAConfig& config) {
  return fitness(design, genome, resolve_targets(design, targets, predictor), predictor, config);
}

Genome mutate(const Genome& genome, const GAConfig& config, double canvas_w, double canvas_h,
              Rng& rng) {
  Genome out = genome;
  const double sigma_x = config.position_sigma * canvas_w;
  const double sigma_y = config.position_sigma * canvas_h;
  for (Gene& g : out.genes) {
    if (!(rng.uniform() < config.mutation_probability)) continue;
    g.dx += sigma_x * rng.normal();
    g.dy += sigma_y * rng.normal();
    g.s = std::clamp(g.s * rng.uniform(config.scale_step_min, config.scale_step_max),
                     config.scale_min, config.scale_max);
  }
  return out;
}

Genome crossover(const Genome& a, const Genome& b, Rng& rng) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::kGenomeLengthMismatch, "parents differ in length");
  }
  Genome child;
  child.genes.reserve(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    child.genes.push_back(rng.uniform() < 0.5 ? a.genes[i] : b.genes[i]);
  }
  return child;
}

json to_json(const EpochRecord& r) {
  json genes = json::array();
  for (const Gene& g : r.best_genome.genes) genes.push_back({{"dx", g.dx}, {"dy", g.dy}, {"s", g.s}});
  return {{"epoch", r.epoch},
          {"population", r.population},
          {"elite", r.elite},
          {"offspring", r.offspring},
          {"best_total", r.best_total},
          {"best_mse", r.best_mse},
          {"best_overlap", r.best_overlap},
          {"mean_total", r.mean_total},
          {"best_genome", genes}};
}

json history_json(const OptimizeResult& result) {
  json epochs = json::array();
  for (const EpochRecord& r : result.history) epochs.push_back(to_json(r));
  return {{"history", epochs},
          {"best", to_json(result.best)},
          {"design", to_json(result.best_design)}};
}

namespace {

struct Individual {
  Genome genome;
  FitnessReport report;
  bool scored = false;
};

void score_population(std::vector<Individual>& pop, const VectorDesign& design,
                      const std::vector<double>& targets, const Predictor& predictor,
                      const GAConfig& config) {
  auto score_one = [&](Individual& ind) {
    if (ind.scored) return;
    try {
      ind.report = fitness(design, ind.genome, targets, predictor, config);
    } catch (const Error& e) {
      // An element shrunk below one map cell: the variant is infeasible.
      if (e.code() != ErrorCode::kEmptyMask) throw;
      ind.report = {};
      ind.report.total = std::numeric_limits<double>::infinity();
    }
    ind.scored = true;
  };
  int threads = config.threads == 0 ? static_cast<int>(std::thread::hardware_concurrency())
                                    : config.threads;
  threads = std::clamp(threads, 1, static_cast<int>(pop.size()));
  if (threads == 1) {
    for (Individual& ind : pop) score_one(ind);
    return;
  }
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(threads));
  {
    std::vector<std::jthread> workers;
    for (int t = 0; t < threads; ++t) {
      workers.emplace_back([&, t] {
        try {
          for (std::size_t i = static_cast<std::size_t>(t); i < pop.size();
               i += static_cast<std::size_t>(threads)) {
            score_one(pop[i]);
          }
        } catch (...) {
          errors[static_cast<std::size_t>(t)] = std::current_exception();
        }
      });
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace

OptimizeResult optimize(const VectorDesign& design, const TargetSpec& targets,
                        const Predictor& predictor, const GAConfig& config,
                        const EpochCallback& on_epoch, std::stop_token stop) {
  config.validate();
  validate(design);
  // Condition every variant on the same class so the classifier cannot flip
  // between variants.
  VectorDesign working = design;
  working.cls = resolve_class(design);
  const std::vector<double> resolved = resolve_targets(working, targets, predictor);

  Rng rng(config.seed);
  const std::size_t n = design.elements.size();
  std::vector<Individual> pop;
  pop.reserve(static_cast<std::size_t>(config.population));
  pop.push_back({Genome::identity(n), {}, false});
  while (pop.size() < static_cast<std::size_t>(config.population)) {
    pop.push_back({mutate(pop.front().genome, config, design.canvas_w, design.canvas_h, rng), {}, false});
  }

  OptimizeResult result;
  result.best_genome = Genome::identity(n);
  result.best.total = std::numeric_limits<double>::infinity();
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    if (stop.stop_requested()) throw Error(ErrorCode::kCancelled, "optimization cancelled");
    score_population(pop, working, resolved, predictor, config);

    std::vector<std::size_t> order(pop.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return pop[a].report.total < pop[b].report.total;
    });
    const Individual& champion = pop[order.front()];
    if (champion.report.total < result.best.total) {
      result.best = champion.report;
      result.best_genome = champion.genome;
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.population = static_cast<int>(pop.size());
    rec.elite = config.elite;
    rec.offspring = config.offspring;
    rec.best_total = result.best.total;
    rec.best_mse = result.best.mse;
    rec.best_overlap = result.best.overlap_penalty;
    rec.best_genome = result.best_genome;
    double finite_sum = 0.0;
    int finite = 0;
    for (const Individual& ind : pop) {
      if (std::isfinite(ind.report.total)) {
        finite_sum += ind.report.total;
        ++finite;
      }
    }
    rec.mean_total = finite > 0 ? finite_sum / finite : 0.0;
    result.history.push_back(std::move(rec));

    if (on_epoch) {
      VectorDesign best = apply_genome(working, result.best_genome);
      best.cls = design.cls;
      on_epoch(epoch, best, result.best);
    }
    if (epoch + 1 == config.epochs) break;

    std::vector<Individual> next;
    next.reserve(pop.size());
    for (int i = 0; i < config.elite; ++i) next.push_back(std::move(pop[order[static_cast<std::size_t>(i)]]));
    const std::size_t elite = next.size();
    for (int i = 0; i < config.offspring; ++i) {
      const Genome& a = next[rng.index(elite)].genome;
      const Genome& b = next[rng.index(elite)].genome;
      Genome child = crossover(a, b, rng);
      if (config.mutate_offspring) {
        child = mutate(child, config, design.canvas_w, design.canvas_h, rng);
      }
      next.push_back({std::move(child), {}, false});
    }
    pop = std::move(next);
  }

  result.best_design = apply_genome(working, result.best_genome);
  result.best_design.cls = design.cls;
  return result;
}

}  // namespace imp
