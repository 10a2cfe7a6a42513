#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "psmplace/scoring.hpp"
#include "psmplace/svr.hpp"
#include "psmplace/world.hpp"

namespace psmplace {

// The five fitted score maps. Per-arm maps take that arm's normalized
// (x, y, theta); the self map takes the 6-D normalized setup.
struct ScoreModels {
  SvrModel reach1;
  SvrModel reach2;
  SvrModel env1;
  SvrModel env2;
  SvrModel self;
};

inline constexpr std::array<const char*, 5> kScoreNames{"reach1", "reach2", "env1", "env2",
                                                         "self_free"};

struct ScoreMapParams {
  // Indexed like kScoreNames. The 6-D self map uses a wider kernel.
  std::array<SvrParams, 5> svr{SvrParams{}, SvrParams{}, SvrParams{}, SvrParams{},
                               SvrParams{.C = 1.0, .epsilon = 0.01, .gamma = 1.0}};
  double holdout_fraction = 0.2;
  std::uint64_t split_seed = 0;
};

struct FittedScoreMaps {
  ScoreModels models;
  std::array<double, 5> holdout_rmse{};
  std::size_t train_rows = 0;
  std::size_t holdout_rows = 0;
};

// Fits the five maps on a seeded (1 - holdout) split of the rows and reports
// RMSE of the unclipped prediction on the held-out rows.
FittedScoreMaps fit_score_maps(const ScoreDataset& ds, const WorldLayout& layout,
                               const ScoreMapParams& params = {});

ScoreModels load_score_models(const std::filesystem::path& dir);
void save_score_models(const ScoreModels& models, const std::filesystem::path& dir,
                       const nlohmann::json& metadata = {});

}  // namespace psmplace
