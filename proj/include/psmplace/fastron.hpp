#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "psmplace/kinematics.hpp"
#include "psmplace/world.hpp"

namespace psmplace {

inline constexpr int kCollision = +1;
inline constexpr int kFree = -1;

// Row-major feature matrix with +1/-1 labels.
struct LabeledConfigSet {
  std::size_t dim = 0;
  std::vector<double> features;
  std::vector<int> labels;

  std::size_t size() const { return labels.size(); }
  std::span<const double> row(std::size_t i) const { return {features.data() + i * dim, dim}; }
  void push_back(std::span<const double> x, int label);
  // Throws std::invalid_argument on shape or label errors.
  void validate() const;
};

struct FastronParams {
  double gamma = 10.0;
  double beta = 1.5;
  std::size_t max_updates = 5000;
  std::size_t max_supports = 3000;
};

// Sparse kernel perceptron F(x) = sum_i alpha_i exp(-gamma |x_i - x|^2).
// F(x) >= 0 is read as collision.
class FastronModel {
 public:
  FastronModel() = default;
  FastronModel(std::size_t dim, double gamma, double beta, std::size_t max_supports);

  std::size_t dim() const { return dim_; }
  double gamma() const { return gamma_; }
  double beta() const { return beta_; }
  std::size_t max_supports() const { return max_supports_; }
  std::size_t size() const { return alphas_.size(); }
  bool empty() const { return alphas_.empty(); }

  std::span<const double> support(std::size_t i) const {
    return {supports_.data() + i * dim_, dim_};
  }
  const std::vector<double>& alphas() const { return alphas_; }

  double score(std::span<const double> x) const;
  int predict(std::span<const double> x) const { return score(x) >= 0.0 ? kCollision : kFree; }

  void add_support(std::span<const double> x, double alpha);

  nlohmann::json to_json() const;
  static FastronModel from_json(const nlohmann::json& doc);

 private:
  std::size_t dim_ = 0;
  double gamma_ = 10.0;
  double beta_ = 1.5;
  std::size_t max_supports_ = 0;
  std::vector<double> supports_;
  std::vector<double> alphas_;
};

struct FastronTrainingInfo {
  std::size_t updates = 0;
  std::size_t removed = 0;
  bool converged = false;
};

// Greedy one-step weight correction on the worst margin, then pruning of
// redundant supports. Throws std::invalid_argument on single-class data.
FastronModel train_fastron(const LabeledConfigSet& data, const FastronParams& params,
                           FastronTrainingInfo* info = nullptr);

struct FastronEvaluation {
  double accuracy = 0.0;
  double tpr = 0.0;
  double tnr = 0.0;
  double mean_query_seconds = 0.0;
};

FastronEvaluation evaluate_fastron(const FastronModel& model, const LabeledConfigSet& data,
                                   std::size_t min_timed_queries = 10000);

void save_fastron(const FastronModel& model, const std::filesystem::path& path,
                  const nlohmann::json& metadata = {});
FastronModel load_fastron(const std::filesystem::path& path);

// Feature encodings, every component in [-1, 1].
inline constexpr std::size_t kEnvFeatureDim = 6;
inline constexpr std::size_t kSelfFeatureDim = 12;

Vec3 normalize_joints(const JointConfig& q, const JointLimits& limits);
std::array<double, kEnvFeatureDim> env_features(const BasePose& base, const JointConfig& q,
                                                const WorldLayout& layout, Arm arm);
std::array<double, kSelfFeatureDim> self_features(const SetupPose& setup, const JointConfig& q1,
                                                  const JointConfig& q2, const WorldLayout& layout);

}  // namespace psmplace
