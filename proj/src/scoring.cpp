#include "psmplace/scoring.hpp"

#include <cstdlib>
#include <sstream>
#include <stdexcept>

#include "psmplace/io.hpp"

namespace psmplace {

std::vector<Vec3> roi_voxel_centers(const WorldLayout& layout) {
  const int n = layout.voxel_count_per_axis;
  const double step = layout.roi_side / n;
  const Vec3 lo = layout.roi_center - Vec3::Constant(0.5 * layout.roi_side);
  std::vector<Vec3> out;
  out.reserve(static_cast<std::size_t>(n) * n * n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < n; ++k) {
        out.push_back(lo + step * Vec3(i + 0.5, j + 0.5, k + 0.5));
      }
    }
  }
  return out;
}

double reachability_score(const BasePose& base, const WorldLayout& layout, Arm arm,
                          const IkSettings& settings) {
  const ArmFrame frame = arm_frame(base, layout, arm);
  const JointConfig seed = default_ik_seed(layout);
  const auto targets = roi_voxel_centers(layout);
  JointConfig warm = seed;
  int reachable = 0;
  for (const Vec3& target : targets) {
    IkResult r = solve_ik_dls(frame, target, layout, settings, warm);
    if (!(r.converged && r.within_limits) && !(warm == seed)) {
      r = solve_ik_dls(frame, target, layout, settings, seed);
    }
    if (r.converged && r.within_limits) {
      ++reachable;
      warm = r.q;
    }
  }
  return static_cast<double>(reachable) / static_cast<double>(targets.size());
}

JointConfig sample_joints(Rng& rng, const JointLimits& limits) {
  JointConfig q;
  q.yaw = rng.uniform(limits.yaw.lo, limits.yaw.hi);
  q.pitch = rng.uniform(limits.pitch.lo, limits.pitch.hi);
  q.insertion = rng.uniform(limits.insertion.lo, limits.insertion.hi);
  return q;
}

CollisionReport GeometricBackend::check(const SetupPose& setup, const JointConfig& q1,
                                        const JointConfig& q2) const {
  const ArmBodies a1 = build_arm_bodies(arm_frame(setup.arm1, layout_, Arm::kOne), q1, layout_);
  const ArmBodies a2 = build_arm_bodies(arm_frame(setup.arm2, layout_, Arm::kTwo), q2, layout_);
  return check_bodies(a1, a2, scene_);
}

FastronBackend::FastronBackend(const WorldLayout& layout, FastronModels models)
    : layout_(layout), models_(std::move(models)) {
  auto check_model = [](const FastronModel& m, std::size_t dim, const char* which) {
    if (m.dim() != dim) {
      throw std::invalid_argument(std::string("fastron backend: ") + which +
                                  " model missing or has wrong dimension");
    }
  };
  check_model(models_.env1, kEnvFeatureDim, "env1");
  check_model(models_.env2, kEnvFeatureDim, "env2");
  check_model(models_.self, kSelfFeatureDim, "self");
}

CollisionReport FastronBackend::check(const SetupPose& setup, const JointConfig& q1,
                                      const JointConfig& q2) const {
  const auto f1 = env_features(setup.arm1, q1, layout_, Arm::kOne);
  const auto f2 = env_features(setup.arm2, q2, layout_, Arm::kTwo);
  std::array<double, kSelfFeatureDim> fs{};
  std::copy(f1.begin(), f1.end(), fs.begin());
  std::copy(f2.begin(), f2.end(), fs.begin() + kEnvFeatureDim);
  CollisionReport r;
  r.self_collision = models_.self.predict(fs) == kCollision;
  r.env_collision_arm1 = models_.env1.predict(f1) == kCollision;
  r.env_collision_arm2 = models_.env2.predict(f2) == kCollision;
  return r;
}

CollisionScores collision_scores(const SetupPose& setup, const CollisionBackend& backend,
                                 const JointLimits& limits, int n_samples, std::uint64_t seed) {
  if (n_samples < 1) throw std::invalid_argument("collision_scores: n_samples must be >= 1");
  Rng rng(seed);
  int self_free = 0, env1 = 0, env2 = 0;
  for (int s = 0; s < n_samples; ++s) {
    const JointConfig q1 = sample_joints(rng, limits);
    const JointConfig q2 = sample_joints(rng, limits);
    const CollisionReport r = backend.check(setup, q1, q2);
    self_free += r.self_collision ? 0 : 1;
    env1 += r.env_collision_arm1 ? 0 : 1;
    env2 += r.env_collision_arm2 ? 0 : 1;
  }
  const double n = static_cast<double>(n_samples);
  return {self_free / n, env1 / n, env2 / n};
}

SetupPose sample_setup(Rng& rng, const WorldLayout& layout) {
  SetupPose setup;
  for (Arm arm : kArms) {
    const SearchGrid& g = layout.grid(arm);
    BasePose& p = setup.arm(arm);
    p.x = rng.uniform(g.center.x() - g.half_extent, g.center.x() + g.half_extent);
    p.y = rng.uniform(g.center.y() - g.half_extent, g.center.y() + g.half_extent);
    p.theta = rng.uniform(-layout.theta_bound, layout.theta_bound);
  }
  return setup;
}

LabeledConfigSet sample_env_training_set(const WorldLayout& layout, Arm arm, std::size_t n,
                                         std::uint64_t seed) {
  const StaticScene scene(layout);
  LabeledConfigSet set;
  set.dim = kEnvFeatureDim;
  set.features.resize(n * kEnvFeatureDim);
  set.labels.resize(n);
#if defined(_OPENMP)
#pragma omp parallel for schedule(static)
#endif
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(n); ++i) {
    Rng rng = Rng::stream(seed, static_cast<std::uint64_t>(i));
    const BasePose base = sample_setup(rng, layout).arm(arm);
    const JointConfig q = sample_joints(rng, layout.joint_limits);
    const ArmBodies bodies = build_arm_bodies(arm_frame(base, layout, arm), q, layout);
    const auto f = env_features(base, q, layout, arm);
    std::copy(f.begin(), f.end(), set.features.begin() + i * kEnvFeatureDim);
    set.labels[static_cast<std::size_t>(i)] = arm_hits_walls(bodies, scene) ? kCollision : kFree;
  }
  return set;
}

LabeledConfigSet sample_self_training_set(const WorldLayout& layout, std::size_t n,
                                          std::uint64_t seed) {
  const GeometricBackend geo(layout);
  LabeledConfigSet set;
  set.dim = kSelfFeatureDim;
  set.features.resize(n * kSelfFeatureDim);
  set.labels.resize(n);
#if defined(_OPENMP)
#pragma omp parallel for schedule(static)
#endif
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(n); ++i) {
    Rng rng = Rng::stream(seed, static_cast<std::uint64_t>(i));
    const SetupPose setup = sample_setup(rng, layout);
    const JointConfig q1 = sample_joints(rng, layout.joint_limits);
    const JointConfig q2 = sample_joints(rng, layout.joint_limits);
    const auto f = self_features(setup, q1, q2, layout);
    std::copy(f.begin(), f.end(), set.features.begin() + i * kSelfFeatureDim);
    set.labels[static_cast<std::size_t>(i)] =
        geo.check(setup, q1, q2).self_collision ? kCollision : kFree;
  }
  return set;
}

ScoreDataset generate_dataset(const WorldLayout& layout, int n_setups,
                              const CollisionBackend& backend, std::uint64_t seed,
                              const DatasetOptions& options) {
  if (n_setups < 1) throw std::invalid_argument("generate_dataset: n_setups must be >= 1");
  ScoreDataset ds;
  ds.seed = seed;
  ds.counts = {layout.voxel_count_per_axis * layout.voxel_count_per_axis * layout.voxel_count_per_axis,
               options.joint_samples, n_setups};
  ds.rows.resize(static_cast<std::size_t>(n_setups));

#if defined(_OPENMP)
#pragma omp parallel for schedule(dynamic)
#endif
  for (int i = 0; i < n_setups; ++i) {
    Rng rng = Rng::stream(seed, static_cast<std::uint64_t>(i));
    ScoreSample& row = ds.rows[static_cast<std::size_t>(i)];
    row.setup = sample_setup(rng, layout);
    const std::uint64_t sample_seed = rng.next();
    if (options.compute_reach) {
      row.reach1 = reachability_score(row.setup.arm1, layout, Arm::kOne, options.ik);
      row.reach2 = reachability_score(row.setup.arm2, layout, Arm::kTwo, options.ik);
    }
    const CollisionScores cs =
        collision_scores(row.setup, backend, layout.joint_limits, options.joint_samples, sample_seed);
    row.self_free = cs.self_free;
    row.env1 = cs.env1;
    row.env2 = cs.env2;
  }
  return ds;
}

double score_mse(std::span<const double> truth, std::span<const double> estimate) {
  if (truth.size() != estimate.size()) throw std::invalid_argument("score_mse: length mismatch");
  if (truth.empty()) throw std::invalid_argument("score_mse: empty input");
  double s = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const double d = truth[i] - estimate[i];
    s += d * d;
  }
  return s / static_cast<double>(truth.size());
}

std::string dataset_to_csv(const ScoreDataset& ds) {
  std::string out = kDatasetHeader;
  out += '\n';
  for (const ScoreSample& r : ds.rows) {
    const double vals[] = {r.setup.arm1.x, r.setup.arm1.y, r.setup.arm1.theta,
                           r.setup.arm2.x, r.setup.arm2.y, r.setup.arm2.theta,
                           r.reach1,       r.reach2,       r.self_free,
                           r.env1,         r.env2};
    for (std::size_t k = 0; k < std::size(vals); ++k) {
      if (k > 0) out += ',';
      out += format_double(vals[k], 9);
    }
    out += '\n';
  }
  return out;
}

void write_dataset_csv(const ScoreDataset& ds, const std::filesystem::path& path) {
  write_text_atomic(path, dataset_to_csv(ds));
}

ScoreDataset parse_dataset_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw DataError("dataset CSV: empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kDatasetHeader) {
    throw DataError(std::string("dataset CSV: header must be '") + kDatasetHeader + "'");
  }
  ScoreDataset ds;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    double v[11];
    std::size_t pos = 0;
    for (int k = 0; k < 11; ++k) {
      const std::size_t end = line.find(',', pos);
      const bool last = k == 10;
      if ((end == std::string::npos) != last) {
        throw DataError("dataset CSV line " + std::to_string(lineno) + ": expected 11 fields");
      }
      const std::string field = line.substr(pos, last ? std::string::npos : end - pos);
      char* stop = nullptr;
      v[k] = std::strtod(field.c_str(), &stop);
      if (field.empty() || *stop != '\0') {
        throw DataError("dataset CSV line " + std::to_string(lineno) + ": bad number '" + field + "'");
      }
      pos = end + 1;
    }
    ScoreSample s;
    s.setup = {{v[0], v[1], v[2]}, {v[3], v[4], v[5]}};
    s.reach1 = v[6];
    s.reach2 = v[7];
    s.self_free = v[8];
    s.env1 = v[9];
    s.env2 = v[10];
    ds.rows.push_back(s);
  }
  if (ds.rows.empty()) throw DataError("dataset CSV: no rows");
  ds.counts.setups = static_cast<int>(ds.rows.size());
  return ds;
}

ScoreDataset read_dataset_csv(const std::filesystem::path& path) {
  return parse_dataset_csv(read_text(path));
}

}  // namespace psmplace
