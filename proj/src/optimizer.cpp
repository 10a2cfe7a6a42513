#include "psmplace/optimizer.hpp"

#include <algorithm>
#include <stdexcept>

#include "psmplace/io.hpp"
#include "psmplace/rng.hpp"

namespace psmplace {

namespace {

Vec6 project_box(const Vec6& u) { return u.cwiseMax(-1.0).cwiseMin(1.0); }

// Adds w * grad of the clipped map to out; returns the clipped value.
double clipped_term(const SvrModel& model, std::span<const double> x, double w,
                    std::span<double> out, bool want_grad) {
  double g[6] = {0, 0, 0, 0, 0, 0};
  std::span<double> gs(g, model.dim());
  const double y = want_grad ? model.predict_with_gradient(x, gs) : model.predict(x);
  if (want_grad && y > 0.0 && y < 1.0) {
    for (std::size_t k = 0; k < model.dim(); ++k) out[k] += w * gs[k];
  }
  return clip_score(y);
}

}  // namespace

ObjectiveSpec::ObjectiveSpec(Weights weights, ScoreModels models)
    : weights_(weights), models_(std::move(models)) {
  if (weights_.reach < 0.0 || weights_.self < 0.0 || weights_.env < 0.0) {
    throw std::invalid_argument("objective: weights must be non-negative");
  }
  if (weights_.reach == 0.0 && weights_.self == 0.0 && weights_.env == 0.0) {
    throw std::invalid_argument("objective: weights must not all be zero");
  }
  for (const SvrModel* m : {&models_.reach1, &models_.reach2, &models_.env1, &models_.env2}) {
    if (m->dim() != 3) throw std::invalid_argument("objective: per-arm score maps must be 3-D");
  }
  if (models_.self.dim() != 6) throw std::invalid_argument("objective: self score map must be 6-D");
}

double ObjectiveSpec::max_value() const {
  return 2.0 * weights_.reach + 2.0 * weights_.env + weights_.self;
}

double ObjectiveSpec::evaluate(const Vec6& u, Vec6* grad, ScoreBreakdown* scores) const {
  if (!((u.array() >= -1.0 - 1e-12).all() && (u.array() <= 1.0 + 1e-12).all())) {
    throw std::out_of_range("objective: point outside [-1, 1]^6");
  }
  const bool want = grad != nullptr;
  Vec6 g = Vec6::Zero();
  std::span<const double> all(u.data(), 6);
  std::span<double> gall(g.data(), 6);
  ScoreBreakdown s;
  s.reach1 = clipped_term(models_.reach1, all.subspan(0, 3), weights_.reach, gall.subspan(0, 3), want);
  s.env1 = clipped_term(models_.env1, all.subspan(0, 3), weights_.env, gall.subspan(0, 3), want);
  s.reach2 = clipped_term(models_.reach2, all.subspan(3, 3), weights_.reach, gall.subspan(3, 3), want);
  s.env2 = clipped_term(models_.env2, all.subspan(3, 3), weights_.env, gall.subspan(3, 3), want);
  s.self = clipped_term(models_.self, all, weights_.self, gall, want);
  if (grad != nullptr) *grad = g;
  if (scores != nullptr) *scores = s;
  return weights_.reach * (s.reach1 + s.reach2) + weights_.env * (s.env1 + s.env2) +
         weights_.self * s.self;
}

LocalResult local_ascent(const Objective6& objective, const Vec6& start, std::uint64_t seed,
                         const LocalSearchSettings& settings) {
  Vec6 u = project_box(start);
  Vec6 g;
  double f = objective(u, &g);
  LocalResult best{u, f, 0};

  // Fully clipped regions have an exactly zero gradient; jitter to leave them.
  if (g.isZero(0.0)) {
    Rng rng(seed);
    for (int r = 0; r < settings.plateau_retries; ++r) {
      Vec6 trial = u;
      for (int k = 0; k < 6; ++k) trial[k] += rng.uniform(-settings.plateau_radius, settings.plateau_radius);
      trial = project_box(trial);
      Vec6 tg;
      const double tf = objective(trial, &tg);
      if (!tg.isZero(0.0)) {
        u = trial;
        f = tf;
        g = tg;
        break;
      }
    }
  }

  double step = settings.step0;
  int it = 0;
  for (; it < settings.max_iters; ++it) {
    if ((project_box(u + g) - u).norm() < settings.grad_tol) break;
    bool accepted = false;
    double t = step;
    Vec6 u_new;
    double f_new = f;
    Vec6 g_new;
    for (int k = 0; k < 40; ++k) {
      u_new = project_box(u + t * g);
      f_new = objective(u_new, &g_new);
      if (f_new >= f) {
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) break;
    const double df = f_new - f;
    u = u_new;
    f = f_new;
    g = g_new;
    step = std::min(2.0 * t, 4.0);
    if (df < settings.f_tol) {
      ++it;
      break;
    }
  }
  if (f >= best.f) best = {u, f, it};
  best.iterations = it;
  return best;
}

LocalResult multi_start_maximize(const Objective6& objective, int n_starts, std::uint64_t seed,
                                 const LocalSearchSettings& settings, int* best_start) {
  if (n_starts < 1) throw std::invalid_argument("multi-start: n_starts must be >= 1");
  std::vector<LocalResult> results(static_cast<std::size_t>(n_starts));
#if defined(_OPENMP)
#pragma omp parallel for schedule(dynamic)
#endif
  for (int k = 0; k < n_starts; ++k) {
    Rng rng = Rng::stream(seed, static_cast<std::uint64_t>(k));
    Vec6 start;
    for (int d = 0; d < 6; ++d) start[d] = rng.uniform(-1.0, 1.0);
    results[static_cast<std::size_t>(k)] = local_ascent(objective, start, rng.next(), settings);
  }
  int best = 0;
  for (int k = 1; k < n_starts; ++k) {
    if (results[static_cast<std::size_t>(k)].f > results[static_cast<std::size_t>(best)].f) best = k;
  }
  if (best_start != nullptr) *best_start = best;
  return results[static_cast<std::size_t>(best)];
}

Solution multi_start_optimize(const ObjectiveSpec& spec, const WorldLayout& layout, int n_starts,
                              std::uint64_t seed, const LocalSearchSettings& settings) {
  const Objective6 obj = [&spec](const Vec6& u, Vec6* g) { return spec.evaluate(u, g); };
  Solution sol;
  const LocalResult r = multi_start_maximize(obj, n_starts, seed, settings, &sol.best_start);
  sol.u = r.u;
  sol.f = spec.evaluate(r.u, nullptr, &sol.scores);
  sol.setup = denormalize_setup(r.u, layout);
  sol.starts_used = n_starts;
  return sol;
}

std::vector<HeatmapCell> arm_heatmap(const ScoreModels& models, const WorldLayout& layout, Arm arm,
                                     int res, const Weights& weights, int theta_samples) {
  if (res < 2) throw std::invalid_argument("heatmap: resolution must be >= 2");
  if (theta_samples < 2) throw std::invalid_argument("heatmap: need at least 2 theta samples");
  const SvrModel& reach = arm == Arm::kOne ? models.reach1 : models.reach2;
  const SvrModel& env = arm == Arm::kOne ? models.env1 : models.env2;
  const SearchGrid& g = layout.grid(arm);
  std::vector<HeatmapCell> cells(static_cast<std::size_t>(res) * res);
#if defined(_OPENMP)
#pragma omp parallel for schedule(static)
#endif
  for (int iy = 0; iy < res; ++iy) {
    for (int ix = 0; ix < res; ++ix) {
      HeatmapCell c;
      c.x = g.center.x() - g.half_extent + 2.0 * g.half_extent * ix / (res - 1);
      c.y = g.center.y() - g.half_extent + 2.0 * g.half_extent * iy / (res - 1);
      c.score = -1.0;
      for (int k = 0; k < theta_samples; ++k) {
        const double th = -layout.theta_bound + 2.0 * layout.theta_bound * k / (theta_samples - 1);
        const Vec3 u = normalize_base({c.x, c.y, th}, layout, arm);
        const std::span<const double> us(u.data(), 3);
        const double s = weights.reach * clip_score(reach.predict(us)) +
                         weights.env * clip_score(env.predict(us));
        c.score = std::max(c.score, s);
      }
      cells[static_cast<std::size_t>(iy) * res + ix] = c;
    }
  }
  return cells;
}

namespace {

nlohmann::json pose_json(const BasePose& p) { return {{"x", p.x}, {"y", p.y}, {"theta", p.theta}}; }

BasePose pose_from(const nlohmann::json& j) {
  return {j.at("x").get<double>(), j.at("y").get<double>(), j.at("theta").get<double>()};
}

}  // namespace

nlohmann::json solution_to_json(const Solution& sol, const Weights& w, std::uint64_t seed) {
  nlohmann::json doc;
  doc["setup"] = {{"arm1", pose_json(sol.setup.arm1)}, {"arm2", pose_json(sol.setup.arm2)}};
  doc["u"] = std::vector<double>(sol.u.data(), sol.u.data() + 6);
  doc["f"] = sol.f;
  doc["scores"] = {{"reach1", sol.scores.reach1}, {"reach2", sol.scores.reach2},
                   {"env1", sol.scores.env1},     {"env2", sol.scores.env2},
                   {"self_free", sol.scores.self}};
  doc["weights"] = {{"reach", w.reach}, {"self", w.self}, {"env", w.env}};
  doc["seed"] = seed;
  doc["starts_used"] = sol.starts_used;
  doc["best_start"] = sol.best_start;
  return doc;
}

SetupPose setup_from_json(const nlohmann::json& doc) {
  try {
    const nlohmann::json& s = doc.contains("setup") ? doc.at("setup") : doc;
    return {pose_from(s.at("arm1")), pose_from(s.at("arm2"))};
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("setup record: ") + e.what());
  }
}

}  // namespace psmplace
