#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "psmplace/fastron.hpp"
#include "psmplace/geometry.hpp"
#include "psmplace/kinematics.hpp"
#include "psmplace/rng.hpp"
#include "psmplace/world.hpp"

namespace psmplace {

inline constexpr int kDefaultJointSamples = 1000;

struct ScoreSample {
  SetupPose setup;
  double reach1 = 0.0;
  double reach2 = 0.0;
  double self_free = 0.0;
  double env1 = 0.0;
  double env2 = 0.0;
};

struct DatasetCounts {
  int voxels = 0;
  int joint_samples = 0;
  int setups = 0;
};

struct ScoreDataset {
  std::vector<ScoreSample> rows;
  std::uint64_t seed = 0;
  DatasetCounts counts;
};

// Centers of the voxel_count^3 RoI voxels in lexicographic (x, y, z) order.
std::vector<Vec3> roi_voxel_centers(const WorldLayout& layout);

// Fraction of voxel centers with a converged, in-limit IK solution.
double reachability_score(const BasePose& base, const WorldLayout& layout, Arm arm,
                          const IkSettings& settings = {});

JointConfig sample_joints(Rng& rng, const JointLimits& limits);

class CollisionBackend {
 public:
  virtual ~CollisionBackend() = default;
  virtual std::string name() const = 0;
  virtual CollisionReport check(const SetupPose& setup, const JointConfig& q1,
                                const JointConfig& q2) const = 0;
};

class GeometricBackend final : public CollisionBackend {
 public:
  explicit GeometricBackend(const WorldLayout& layout) : layout_(layout), scene_(layout) {}
  std::string name() const override { return "geometric"; }
  CollisionReport check(const SetupPose& setup, const JointConfig& q1,
                        const JointConfig& q2) const override;

 private:
  WorldLayout layout_;
  StaticScene scene_;
};

struct FastronModels {
  FastronModel env1;
  FastronModel env2;
  FastronModel self;
};

class FastronBackend final : public CollisionBackend {
 public:
  // Throws std::invalid_argument if any model is empty or has the wrong dimension.
  FastronBackend(const WorldLayout& layout, FastronModels models);
  std::string name() const override { return "fastron"; }
  CollisionReport check(const SetupPose& setup, const JointConfig& q1,
                        const JointConfig& q2) const override;
  const FastronModels& models() const { return models_; }

 private:
  WorldLayout layout_;
  FastronModels models_;
};

struct CollisionScores {
  double self_free = 0.0;
  double env1 = 0.0;
  double env2 = 0.0;
};

CollisionScores collision_scores(const SetupPose& setup, const CollisionBackend& backend,
                                 const JointLimits& limits, int n_samples, std::uint64_t seed);

struct DatasetOptions {
  int joint_samples = kDefaultJointSamples;
  IkSettings ik;
  bool compute_reach = true;
};

SetupPose sample_setup(Rng& rng, const WorldLayout& layout);

// Row i draws its setup and joint samples from Rng::stream(seed, i), so the
// rows do not depend on evaluation order.
ScoreDataset generate_dataset(const WorldLayout& layout, int n_setups,
                              const CollisionBackend& backend, std::uint64_t seed,
                              const DatasetOptions& options = {});

// Fastron training sets labeled by the geometric checker. Env rows are an
// arm's (base, joints) labeled by wall contact; self rows are both arms'
// (base, joints) labeled by self collision. Row i uses Rng::stream(seed, i).
LabeledConfigSet sample_env_training_set(const WorldLayout& layout, Arm arm, std::size_t n,
                                         std::uint64_t seed);
LabeledConfigSet sample_self_training_set(const WorldLayout& layout, std::size_t n,
                                          std::uint64_t seed);

double score_mse(std::span<const double> truth, std::span<const double> estimate);

inline constexpr const char* kDatasetHeader = "x1,y1,th1,x2,y2,th2,reach1,reach2,self_free,env1,env2";

std::string dataset_to_csv(const ScoreDataset& ds);
void write_dataset_csv(const ScoreDataset& ds, const std::filesystem::path& path);
// Throws DataError naming the offending line.
ScoreDataset read_dataset_csv(const std::filesystem::path& path);
ScoreDataset parse_dataset_csv(const std::string& text);

}  // namespace psmplace
