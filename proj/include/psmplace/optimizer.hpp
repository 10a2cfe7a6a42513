#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <vector>

#include <nlohmann/json.hpp>

#include "psmplace/score_maps.hpp"
#include "psmplace/svr.hpp"
#include "psmplace/world.hpp"

namespace psmplace {

struct Weights {
  double reach = 1.0;
  double self = 1.0;
  double env = 1.0;
};

struct ScoreBreakdown {
  double reach1 = 0.0;
  double reach2 = 0.0;
  double env1 = 0.0;
  double env2 = 0.0;
  double self = 0.0;
};

class ObjectiveSpec {
 public:
  // Throws std::invalid_argument on negative or all-zero weights, or on
  // models of the wrong dimension.
  ObjectiveSpec(Weights weights, ScoreModels models);

  const Weights& weights() const { return weights_; }
  const ScoreModels& models() const { return models_; }

  // Upper bound 2 w_reach + 2 w_env + w_self.
  double max_value() const;

  // Weighted sum of clipped scores over u in [-1, 1]^6. The gradient of a
  // clipped score is zero outside (0, 1).
  double evaluate(const Vec6& u, Vec6* grad = nullptr, ScoreBreakdown* scores = nullptr) const;

 private:
  Weights weights_;
  ScoreModels models_;
};

using Objective6 = std::function<double(const Vec6& u, Vec6* grad)>;

struct LocalSearchSettings {
  int max_iters = 500;
  double step0 = 0.1;
  double grad_tol = 1e-6;
  double f_tol = 1e-8;
  int plateau_retries = 10;
  double plateau_radius = 0.05;
};

struct LocalResult {
  Vec6 u = Vec6::Zero();
  double f = 0.0;
  int iterations = 0;
};

// Projected gradient ascent on the box [-1, 1]^6 with step halving.
LocalResult local_ascent(const Objective6& objective, const Vec6& start, std::uint64_t seed,
                         const LocalSearchSettings& settings);

struct Solution {
  Vec6 u = Vec6::Zero();
  SetupPose setup;
  double f = 0.0;
  ScoreBreakdown scores;
  int starts_used = 0;
  int best_start = 0;
};

// Uniform starts in the box, each refined by local_ascent. Start k uses the
// stream Rng::stream(seed, k); ties go to the lowest start index.
LocalResult multi_start_maximize(const Objective6& objective, int n_starts, std::uint64_t seed,
                                 const LocalSearchSettings& settings, int* best_start = nullptr);

Solution multi_start_optimize(const ObjectiveSpec& spec, const WorldLayout& layout, int n_starts,
                              std::uint64_t seed, const LocalSearchSettings& settings = {});

inline constexpr int kHeatmapThetaSamples = 21;

struct HeatmapCell {
  double x = 0.0;
  double y = 0.0;
  double score = 0.0;
};

// res x res grid over the arm's search area (x fastest). Each cell holds
// w_reach * reach + w_env * env (clipped), maximized over theta samples
// spanning the theta bound.
std::vector<HeatmapCell> arm_heatmap(const ScoreModels& models, const WorldLayout& layout, Arm arm,
                                     int res, const Weights& weights,
                                     int theta_samples = kHeatmapThetaSamples);

nlohmann::json solution_to_json(const Solution& sol, const Weights& w, std::uint64_t seed);
SetupPose setup_from_json(const nlohmann::json& doc);

}  // namespace psmplace
