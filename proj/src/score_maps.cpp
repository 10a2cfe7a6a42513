#include "psmplace/score_maps.hpp"

#include <cmath>
#include <numeric>

#include "psmplace/io.hpp"
#include "psmplace/rng.hpp"

namespace psmplace {

namespace {

constexpr std::array<const char*, 5> kModelFiles{"svr_reach1.json", "svr_reach2.json",
                                                 "svr_env1.json", "svr_env2.json",
                                                 "svr_self.json"};

struct Columns {
  std::vector<double> arm1;  // n x 3
  std::vector<double> arm2;  // n x 3
  std::vector<double> both;  // n x 6
  std::array<std::vector<double>, 5> targets;
};

Columns columns(const ScoreDataset& ds, const WorldLayout& layout,
                const std::vector<std::size_t>& rows) {
  Columns c;
  for (std::size_t r : rows) {
    const ScoreSample& s = ds.rows[r];
    const Vec6 u = normalize_setup(s.setup, layout);
    c.arm1.insert(c.arm1.end(), u.data(), u.data() + 3);
    c.arm2.insert(c.arm2.end(), u.data() + 3, u.data() + 6);
    c.both.insert(c.both.end(), u.data(), u.data() + 6);
    c.targets[0].push_back(s.reach1);
    c.targets[1].push_back(s.reach2);
    c.targets[2].push_back(s.env1);
    c.targets[3].push_back(s.env2);
    c.targets[4].push_back(s.self_free);
  }
  return c;
}

const std::vector<double>& feature_block(const Columns& c, int which) {
  if (which == 4) return c.both;
  return (which % 2 == 0) ? c.arm1 : c.arm2;
}

}  // namespace

FittedScoreMaps fit_score_maps(const ScoreDataset& ds, const WorldLayout& layout,
                               const ScoreMapParams& params) {
  const std::size_t n = ds.rows.size();
  if (n < 2) throw std::invalid_argument("fit_score_maps: need at least two rows");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(params.split_seed);
  for (std::size_t i = n - 1; i > 0; --i) std::swap(order[i], order[rng.below(i + 1)]);

  std::size_t n_hold = static_cast<std::size_t>(std::floor(params.holdout_fraction * n));
  n_hold = std::min(n_hold, n - 2);
  std::vector<std::size_t> train(order.begin(), order.end() - static_cast<std::ptrdiff_t>(n_hold));
  std::vector<std::size_t> hold(order.end() - static_cast<std::ptrdiff_t>(n_hold), order.end());

  const Columns tr = columns(ds, layout, train);
  const Columns ho = columns(ds, layout, hold);

  FittedScoreMaps out;
  out.train_rows = train.size();
  out.holdout_rows = hold.size();
  std::array<SvrModel*, 5> slots{&out.models.reach1, &out.models.reach2, &out.models.env1,
                                 &out.models.env2, &out.models.self};

#if defined(_OPENMP)
#pragma omp parallel for schedule(dynamic)
#endif
  for (int m = 0; m < 5; ++m) {
    const std::size_t dim = m == 4 ? 6 : 3;
    *slots[m] = fit_svr(feature_block(tr, m), dim, tr.targets[m], params.svr[m]);
    double se = 0.0;
    const auto& feats = feature_block(ho, m);
    for (std::size_t i = 0; i < hold.size(); ++i) {
      const double d = slots[m]->predict({feats.data() + i * dim, dim}) - ho.targets[m][i];
      se += d * d;
    }
    out.holdout_rmse[m] = hold.empty() ? 0.0 : std::sqrt(se / static_cast<double>(hold.size()));
  }
  return out;
}

ScoreModels load_score_models(const std::filesystem::path& dir) {
  ScoreModels m;
  std::array<SvrModel*, 5> slots{&m.reach1, &m.reach2, &m.env1, &m.env2, &m.self};
  for (std::size_t i = 0; i < 5; ++i) {
    const auto path = dir / kModelFiles[i];
    if (!std::filesystem::exists(path)) {
      throw DataError("missing score model '" + path.string() + "' (run fit-svr first)");
    }
    *slots[i] = load_svr(path);
  }
  return m;
}

void save_score_models(const ScoreModels& models, const std::filesystem::path& dir,
                       const nlohmann::json& metadata) {
  std::array<const SvrModel*, 5> slots{&models.reach1, &models.reach2, &models.env1,
                                       &models.env2, &models.self};
  for (std::size_t i = 0; i < 5; ++i) save_svr(*slots[i], dir / kModelFiles[i], metadata);
}

}  // namespace psmplace
