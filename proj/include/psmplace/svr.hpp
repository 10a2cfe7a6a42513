#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

namespace psmplace {

struct SvrParams {
  double C = 10.0;
  double epsilon = 0.01;
  double gamma = 5.0;
  double kkt_tol = 1e-3;
  std::size_t max_passes = 10000;
};

/// Gaussian-kernel epsilon-SVR predictor
///   y(x) = sum_i c_i exp(-gamma |x_i - x|^2) + b,
/// where c_i = a_i - a_i^* are the dual coefficients of the support points.
class SvrModel {
 public:
  SvrModel() = default;
  SvrModel(std::size_t dim, double gamma, double C, double epsilon, double bias);

  std::size_t dim() const { return dim_; }
  double gamma() const { return gamma_; }
  double C() const { return C_; }
  double epsilon() const { return epsilon_; }
  double bias() const { return bias_; }
  std::size_t size() const { return coeffs_.size(); }
  std::span<const double> support(std::size_t i) const {
    return {supports_.data() + i * dim_, dim_};
  }
  const std::vector<double>& coeffs() const { return coeffs_; }

  void add_support(std::span<const double> x, double coeff);

  double predict(std::span<const double> x) const;
  // Returns y(x) and writes the analytic gradient into grad (size dim).
  double predict_with_gradient(std::span<const double> x, std::span<double> grad) const;

  nlohmann::json to_json() const;
  static SvrModel from_json(const nlohmann::json& doc);

 private:
  std::size_t dim_ = 0;
  double gamma_ = 5.0;
  double C_ = 10.0;
  double epsilon_ = 0.01;
  double bias_ = 0.0;
  std::vector<double> supports_;
  std::vector<double> coeffs_;
};

struct SvrFitInfo {
  std::size_t iterations = 0;
  double kkt_gap = 0.0;
  bool converged = false;
};

// Solves the epsilon-SVR dual with pairwise (SMO) updates and second-order
// working-set selection. features is row-major n x dim.
SvrModel fit_svr(std::span<const double> features, std::size_t dim, std::span<const double> targets,
                 const SvrParams& params, SvrFitInfo* info = nullptr);

double clip_score(double y);

void save_svr(const SvrModel& model, const std::filesystem::path& path,
              const nlohmann::json& metadata = {});
SvrModel load_svr(const std::filesystem::path& path);

}  // namespace psmplace
