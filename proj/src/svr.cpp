#include "psmplace/svr.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "psmplace/io.hpp"

namespace psmplace {

namespace {

constexpr double kTau = 1e-12;

double sq_dist(const double* a, const double* b, std::size_t dim) {
  double s = 0.0;
  for (std::size_t k = 0; k < dim; ++k) {
    const double d = a[k] - b[k];
    s += d * d;
  }
  return s;
}

}  // namespace

SvrModel::SvrModel(std::size_t dim, double gamma, double C, double epsilon, double bias)
    : dim_(dim), gamma_(gamma), C_(C), epsilon_(epsilon), bias_(bias) {
  if (dim == 0) throw std::invalid_argument("svr: dimension must be positive");
  if (!(gamma > 0.0)) throw std::invalid_argument("svr: gamma must be positive");
}

void SvrModel::add_support(std::span<const double> x, double coeff) {
  if (x.size() != dim_) throw std::invalid_argument("svr: support dimension mismatch");
  supports_.insert(supports_.end(), x.begin(), x.end());
  coeffs_.push_back(coeff);
}

double SvrModel::predict(std::span<const double> x) const {
  if (x.size() != dim_) throw std::invalid_argument("svr: query dimension mismatch");
  double y = bias_;
  const double* s = supports_.data();
  for (std::size_t i = 0; i < coeffs_.size(); ++i, s += dim_) {
    y += coeffs_[i] * std::exp(-gamma_ * sq_dist(s, x.data(), dim_));
  }
  return y;
}

double SvrModel::predict_with_gradient(std::span<const double> x, std::span<double> grad) const {
  if (x.size() != dim_ || grad.size() != dim_) {
    throw std::invalid_argument("svr: query dimension mismatch");
  }
  std::fill(grad.begin(), grad.end(), 0.0);
  double y = bias_;
  const double* s = supports_.data();
  for (std::size_t i = 0; i < coeffs_.size(); ++i, s += dim_) {
    const double ck = coeffs_[i] * std::exp(-gamma_ * sq_dist(s, x.data(), dim_));
    y += ck;
    for (std::size_t k = 0; k < dim_; ++k) grad[k] += -2.0 * gamma_ * (x[k] - s[k]) * ck;
  }
  return y;
}

nlohmann::json SvrModel::to_json() const {
  nlohmann::json doc;
  doc["dim"] = dim_;
  doc["gamma"] = gamma_;
  doc["C"] = C_;
  doc["epsilon"] = epsilon_;
  doc["bias"] = bias_;
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t i = 0; i < size(); ++i) {
    const auto s = support(i);
    rows.push_back(std::vector<double>(s.begin(), s.end()));
  }
  doc["supports"] = std::move(rows);
  doc["coeffs"] = coeffs_;
  return doc;
}

SvrModel SvrModel::from_json(const nlohmann::json& doc) {
  try {
    SvrModel model(doc.at("dim").get<std::size_t>(), doc.at("gamma").get<double>(),
                   doc.at("C").get<double>(), doc.at("epsilon").get<double>(),
                   doc.at("bias").get<double>());
    const auto& rows = doc.at("supports");
    const auto coeffs = doc.at("coeffs").get<std::vector<double>>();
    if (rows.size() != coeffs.size()) throw DataError("svr model: supports/coeffs length mismatch");
    for (std::size_t i = 0; i < coeffs.size(); ++i) {
      model.add_support(rows[i].get<std::vector<double>>(), coeffs[i]);
    }
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("svr model: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw DataError(std::string("svr model: ") + e.what());
  }
}

SvrModel fit_svr(std::span<const double> features, std::size_t dim, std::span<const double> targets,
                 const SvrParams& params, SvrFitInfo* info) {
  if (dim == 0) throw std::invalid_argument("svr fit: dimension must be positive");
  const std::size_t l = targets.size();
  if (l < 2) throw std::invalid_argument("svr fit: need at least two samples");
  if (features.size() != l * dim) throw std::invalid_argument("svr fit: features/targets length mismatch");
  if (!(params.C > 0.0) || !(params.epsilon >= 0.0) || !(params.kkt_tol > 0.0)) {
    throw std::invalid_argument("svr fit: C, kkt_tol must be positive and epsilon non-negative");
  }
  if (l > 20000) throw std::invalid_argument("svr fit: more than 20000 samples is not supported");
  bool distinct = false;
  for (std::size_t i = 1; i < l && !distinct; ++i) {
    distinct = !std::equal(features.begin(), features.begin() + dim, features.begin() + i * dim);
  }
  if (!distinct) throw std::invalid_argument("svr fit: degenerate features (all rows identical)");

  // Kernel matrix over the l training rows.
  std::vector<double> K(l * l);
  for (std::size_t i = 0; i < l; ++i) {
    K[i * l + i] = 1.0;
    for (std::size_t j = i + 1; j < l; ++j) {
      const double k = std::exp(-params.gamma * sq_dist(&features[i * dim], &features[j * dim], dim));
      K[i * l + j] = k;
      K[j * l + i] = k;
    }
  }

  // Variables 0..l-1 carry a_i (sign +1), l..2l-1 carry a_i^* (sign -1).
  const std::size_t n = 2 * l;
  const double C = params.C;
  std::vector<double> alpha(n, 0.0);
  std::vector<double> G(n);
  std::vector<signed char> y(n);
  for (std::size_t t = 0; t < l; ++t) {
    y[t] = 1;
    y[t + l] = -1;
    G[t] = params.epsilon - targets[t];
    G[t + l] = params.epsilon + targets[t];
  }
  auto q = [&](std::size_t i, std::size_t j) { return y[i] * y[j] * K[(i % l) * l + (j % l)]; };

  const std::size_t max_iter = std::max<std::size_t>(params.max_passes * l, 1000);
  std::size_t iter = 0;
  double gap = std::numeric_limits<double>::infinity();
  bool converged = false;
  while (iter < max_iter) {
    // Maximal violating index, then second-order partner.
    double gmax = -std::numeric_limits<double>::infinity();
    std::ptrdiff_t i_sel = -1;
    for (std::size_t t = 0; t < n; ++t) {
      if (y[t] == 1) {
        if (alpha[t] < C && -G[t] >= gmax) {
          gmax = -G[t];
          i_sel = static_cast<std::ptrdiff_t>(t);
        }
      } else if (alpha[t] > 0.0 && G[t] >= gmax) {
        gmax = G[t];
        i_sel = static_cast<std::ptrdiff_t>(t);
      }
    }
    double gmax2 = -std::numeric_limits<double>::infinity();
    std::ptrdiff_t j_sel = -1;
    double best = std::numeric_limits<double>::infinity();
    if (i_sel >= 0) {
      const std::size_t i = static_cast<std::size_t>(i_sel);
      for (std::size_t t = 0; t < n; ++t) {
        double grad_diff;
        double quad;
        if (y[t] == 1) {
          if (!(alpha[t] > 0.0)) continue;
          gmax2 = std::max(gmax2, G[t]);
          grad_diff = gmax + G[t];
          quad = 2.0 - 2.0 * y[i] * q(i, t);
        } else {
          if (!(alpha[t] < C)) continue;
          gmax2 = std::max(gmax2, -G[t]);
          grad_diff = gmax - G[t];
          quad = 2.0 + 2.0 * y[i] * q(i, t);
        }
        if (grad_diff > 0.0) {
          const double obj = -(grad_diff * grad_diff) / (quad > 0.0 ? quad : kTau);
          if (obj <= best) {
            best = obj;
            j_sel = static_cast<std::ptrdiff_t>(t);
          }
        }
      }
    }
    gap = gmax + gmax2;
    if (i_sel < 0 || j_sel < 0 || gap < params.kkt_tol) {
      converged = true;
      break;
    }
    ++iter;

    const std::size_t i = static_cast<std::size_t>(i_sel);
    const std::size_t j = static_cast<std::size_t>(j_sel);
    const double old_ai = alpha[i];
    const double old_aj = alpha[j];
    const double qij = q(i, j);
    if (y[i] != y[j]) {
      double quad = 2.0 + 2.0 * qij;
      if (quad <= 0.0) quad = kTau;
      const double delta = (-G[i] - G[j]) / quad;
      const double diff = alpha[i] - alpha[j];
      alpha[i] += delta;
      alpha[j] += delta;
      if (diff > 0.0) {
        if (alpha[j] < 0.0) {
          alpha[j] = 0.0;
          alpha[i] = diff;
        }
      } else if (alpha[i] < 0.0) {
        alpha[i] = 0.0;
        alpha[j] = -diff;
      }
      if (diff > 0.0) {
        if (alpha[i] > C) {
          alpha[i] = C;
          alpha[j] = C - diff;
        }
      } else if (alpha[j] > C) {
        alpha[j] = C;
        alpha[i] = C + diff;
      }
    } else {
      double quad = 2.0 - 2.0 * qij;
      if (quad <= 0.0) quad = kTau;
      const double delta = (G[i] - G[j]) / quad;
      const double sum = alpha[i] + alpha[j];
      alpha[i] -= delta;
      alpha[j] += delta;
      if (sum > C) {
        if (alpha[i] > C) {
          alpha[i] = C;
          alpha[j] = sum - C;
        }
      } else if (alpha[j] < 0.0) {
        alpha[j] = 0.0;
        alpha[i] = sum;
      }
      if (sum > C) {
        if (alpha[j] > C) {
          alpha[j] = C;
          alpha[i] = sum - C;
        }
      } else if (alpha[i] < 0.0) {
        alpha[i] = 0.0;
        alpha[j] = sum;
      }
    }
    const double dai = alpha[i] - old_ai;
    const double daj = alpha[j] - old_aj;
    for (std::size_t t = 0; t < n; ++t) G[t] += q(i, t) * dai + q(j, t) * daj;
  }

  // Bias from the free variables, or the midpoint of the feasible interval.
  double ub = std::numeric_limits<double>::infinity();
  double lb = -std::numeric_limits<double>::infinity();
  double sum_free = 0.0;
  std::size_t nr_free = 0;
  for (std::size_t t = 0; t < n; ++t) {
    const double yg = y[t] * G[t];
    if (alpha[t] >= C) {
      if (y[t] == -1) ub = std::min(ub, yg); else lb = std::max(lb, yg);
    } else if (alpha[t] <= 0.0) {
      if (y[t] == 1) ub = std::min(ub, yg); else lb = std::max(lb, yg);
    } else {
      ++nr_free;
      sum_free += yg;
    }
  }
  const double rho = nr_free > 0 ? sum_free / static_cast<double>(nr_free) : 0.5 * (ub + lb);

  SvrModel model(dim, params.gamma, C, params.epsilon, -rho);
  for (std::size_t t = 0; t < l; ++t) {
    const double c = alpha[t] - alpha[t + l];
    if (c != 0.0) model.add_support(features.subspan(t * dim, dim), c);
  }
  if (info != nullptr) *info = {iter, gap, converged};
  return model;
}

double clip_score(double y) { return std::min(1.0, std::max(0.0, y)); }

void save_svr(const SvrModel& model, const std::filesystem::path& path,
              const nlohmann::json& metadata) {
  nlohmann::json doc = model.to_json();
  if (!metadata.is_null()) doc["metadata"] = metadata;
  write_json(path, doc);
}

SvrModel load_svr(const std::filesystem::path& path) { return SvrModel::from_json(read_json(path)); }

}  // namespace psmplace
