#include "psmplace/fastron.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "psmplace/io.hpp"

namespace psmplace {

namespace {

double sq_dist(const double* a, const double* b, std::size_t dim) {
  double s = 0.0;
  for (std::size_t k = 0; k < dim; ++k) {
    const double d = a[k] - b[k];
    s += d * d;
  }
  return s;
}

// F[j] += w * k(x_j, x_i) for every training row j.
void add_kernel_column(const LabeledConfigSet& data, std::size_t i, double w, double gamma,
                       std::vector<double>& F) {
  const std::size_t n = data.size();
  const std::size_t dim = data.dim;
  const double* xi = data.features.data() + i * dim;
  const double* base = data.features.data();
#if defined(_OPENMP)
#pragma omp parallel for schedule(static) if (n > 20000)
#endif
  for (std::size_t j = 0; j < n; ++j) {
    F[j] += w * std::exp(-gamma * sq_dist(base + j * dim, xi, dim));
  }
}

}  // namespace

void LabeledConfigSet::push_back(std::span<const double> x, int label) {
  if (dim == 0) dim = x.size();
  if (x.size() != dim) throw std::invalid_argument("feature dimension mismatch");
  features.insert(features.end(), x.begin(), x.end());
  labels.push_back(label);
}

void LabeledConfigSet::validate() const {
  if (dim == 0 || features.size() != dim * labels.size()) {
    throw std::invalid_argument("labeled set: features and labels have different lengths");
  }
  for (int y : labels) {
    if (y != kCollision && y != kFree) throw std::invalid_argument("labeled set: labels must be +1 or -1");
  }
}

FastronModel::FastronModel(std::size_t dim, double gamma, double beta, std::size_t max_supports)
    : dim_(dim), gamma_(gamma), beta_(beta), max_supports_(max_supports) {
  if (dim == 0) throw std::invalid_argument("fastron: dimension must be positive");
  if (!(gamma > 0.0)) throw std::invalid_argument("fastron: gamma must be positive");
  if (!(beta >= 1.0)) throw std::invalid_argument("fastron: conditional bias must be >= 1");
}

double FastronModel::score(std::span<const double> x) const {
  if (x.size() != dim_) throw std::invalid_argument("fastron: query dimension mismatch");
  double f = 0.0;
  const double* s = supports_.data();
  for (std::size_t i = 0; i < alphas_.size(); ++i, s += dim_) {
    f += alphas_[i] * std::exp(-gamma_ * sq_dist(s, x.data(), dim_));
  }
  return f;
}

void FastronModel::add_support(std::span<const double> x, double alpha) {
  if (x.size() != dim_) throw std::invalid_argument("fastron: support dimension mismatch");
  if (alpha == 0.0) throw std::invalid_argument("fastron: support weight must be nonzero");
  if (max_supports_ != 0 && alphas_.size() >= max_supports_) {
    throw std::length_error("fastron: support limit reached");
  }
  supports_.insert(supports_.end(), x.begin(), x.end());
  alphas_.push_back(alpha);
}

nlohmann::json FastronModel::to_json() const {
  nlohmann::json doc;
  doc["gamma"] = gamma_;
  doc["beta"] = beta_;
  doc["dim"] = dim_;
  doc["max_supports"] = max_supports_;
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t i = 0; i < size(); ++i) {
    const auto s = support(i);
    rows.push_back(std::vector<double>(s.begin(), s.end()));
  }
  doc["supports"] = std::move(rows);
  doc["alphas"] = alphas_;
  return doc;
}

FastronModel FastronModel::from_json(const nlohmann::json& doc) {
  try {
    const std::size_t dim = doc.at("dim").get<std::size_t>();
    const std::size_t cap = doc.value("max_supports", std::size_t{0});
    FastronModel model(dim, doc.at("gamma").get<double>(), doc.at("beta").get<double>(), 0);
    const auto& rows = doc.at("supports");
    const auto alphas = doc.at("alphas").get<std::vector<double>>();
    if (rows.size() != alphas.size()) throw DataError("fastron model: supports/alphas length mismatch");
    for (std::size_t i = 0; i < alphas.size(); ++i) {
      const auto x = rows[i].get<std::vector<double>>();
      model.add_support(x, alphas[i]);
    }
    model.max_supports_ = cap;
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("fastron model: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw DataError(std::string("fastron model: ") + e.what());
  }
}

FastronModel train_fastron(const LabeledConfigSet& data, const FastronParams& params,
                           FastronTrainingInfo* info) {
  data.validate();
  const std::size_t n = data.size();
  if (n == 0) throw std::invalid_argument("fastron: empty training set");
  bool has_pos = false;
  bool has_neg = false;
  for (int y : data.labels) (y > 0 ? has_pos : has_neg) = true;
  if (!has_pos || !has_neg) throw std::invalid_argument("fastron: degenerate labels (single class)");

  const double gamma = params.gamma;
  const double beta = params.beta;
  std::vector<double> F(n, 0.0);
  std::vector<double> alpha(n, 0.0);
  std::size_t supports = 0;
  std::size_t updates = 0;
  std::size_t removed = 0;
  bool converged = false;

  auto worst_margin = [&](std::size_t& idx) {
    double worst = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j) {
      const double m = data.labels[j] * F[j];
      if (m < worst) {
        worst = m;
        idx = j;
      }
    }
    return worst;
  };

  while (true) {
    bool budget_hit = false;
    while (true) {
      std::size_t i = 0;
      if (worst_margin(i) > 0.0) {
        converged = true;
        break;
      }
      if (updates >= params.max_updates) {
        budget_hit = true;
        break;
      }
      if (alpha[i] == 0.0 && supports >= params.max_supports) {
        budget_hit = true;
        break;
      }
      const int y = data.labels[i];
      const double delta = (y > 0 ? beta * y : static_cast<double>(y)) - F[i];
      add_kernel_column(data, i, delta, gamma, F);
      if (alpha[i] == 0.0) ++supports;
      alpha[i] += delta;
      if (alpha[i] == 0.0) --supports;
      ++updates;
    }
    if (budget_hit || !converged) break;

    // Drop supports that their own neighbours already classify correctly.
    std::size_t dropped = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (alpha[j] == 0.0) continue;
      if (data.labels[j] * (F[j] - alpha[j]) > 0.0) {
        add_kernel_column(data, j, -alpha[j], gamma, F);
        alpha[j] = 0.0;
        --supports;
        ++dropped;
      }
    }
    removed += dropped;
    if (dropped == 0) break;
    std::size_t probe = 0;
    if (worst_margin(probe) > 0.0) break;
    converged = false;
  }

  FastronModel model(data.dim, gamma, beta, params.max_supports);
  for (std::size_t j = 0; j < n; ++j) {
    if (alpha[j] != 0.0) model.add_support(data.row(j), alpha[j]);
  }
  if (info != nullptr) *info = {updates, removed, converged};
  return model;
}

FastronEvaluation evaluate_fastron(const FastronModel& model, const LabeledConfigSet& data,
                                   std::size_t min_timed_queries) {
  data.validate();
  if (data.size() == 0) throw std::invalid_argument("fastron evaluate: empty data");
  std::size_t tp = 0, tn = 0, pos = 0, neg = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const int p = model.predict(data.row(i));
    if (data.labels[i] > 0) {
      ++pos;
      if (p > 0) ++tp;
    } else {
      ++neg;
      if (p < 0) ++tn;
    }
  }
  FastronEvaluation ev;
  ev.accuracy = static_cast<double>(tp + tn) / static_cast<double>(data.size());
  ev.tpr = pos > 0 ? static_cast<double>(tp) / static_cast<double>(pos) : 1.0;
  ev.tnr = neg > 0 ? static_cast<double>(tn) / static_cast<double>(neg) : 1.0;

  const std::size_t queries = std::max(min_timed_queries, data.size());
  volatile double sink = 0.0;
  const auto t0 = std::chrono::steady_clock::now();
  for (std::size_t q = 0; q < queries; ++q) sink = sink + model.score(data.row(q % data.size()));
  const auto t1 = std::chrono::steady_clock::now();
  ev.mean_query_seconds = std::chrono::duration<double>(t1 - t0).count() / static_cast<double>(queries);
  return ev;
}

void save_fastron(const FastronModel& model, const std::filesystem::path& path,
                  const nlohmann::json& metadata) {
  nlohmann::json doc = model.to_json();
  if (!metadata.is_null()) doc["metadata"] = metadata;
  write_json(path, doc);
}

FastronModel load_fastron(const std::filesystem::path& path) {
  return FastronModel::from_json(read_json(path));
}

Vec3 normalize_joints(const JointConfig& q, const JointLimits& limits) {
  return {(q.yaw - limits.yaw.mid()) / limits.yaw.half_width(),
          (q.pitch - limits.pitch.mid()) / limits.pitch.half_width(),
          (q.insertion - limits.insertion.mid()) / limits.insertion.half_width()};
}

std::array<double, kEnvFeatureDim> env_features(const BasePose& base, const JointConfig& q,
                                                const WorldLayout& layout, Arm arm) {
  const Vec3 u = normalize_base(base, layout, arm);
  const Vec3 v = normalize_joints(q, layout.joint_limits);
  return {u[0], u[1], u[2], v[0], v[1], v[2]};
}

std::array<double, kSelfFeatureDim> self_features(const SetupPose& setup, const JointConfig& q1,
                                                  const JointConfig& q2, const WorldLayout& layout) {
  const auto a = env_features(setup.arm1, q1, layout, Arm::kOne);
  const auto b = env_features(setup.arm2, q2, layout, Arm::kTwo);
  std::array<double, kSelfFeatureDim> out{};
  std::copy(a.begin(), a.end(), out.begin());
  std::copy(b.begin(), b.end(), out.begin() + kEnvFeatureDim);
  return out;
}

}  // namespace psmplace
