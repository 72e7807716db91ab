// Copyright 2026 The gmphd_mots Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Gaussian-mixture PHD recursion over a constant-velocity state
// (x, y, vx, vy) observed through its position (x, y).

#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "gmphd_mots/errors.hpp"

namespace gmphd_mots {

using StateVec = Eigen::Vector4d;
using StateCov = Eigen::Matrix4d;
using ObsCov = Eigen::Matrix2d;
using ObsMatrix = Eigen::Matrix<double, 2, 4>;

struct ObservationVec {
  Eigen::Vector2d z = Eigen::Vector2d::Zero();

  ObservationVec() = default;
  ObservationVec(double x, double y) : z(x, y) {}
};

struct GaussianComponent {
  double weight = 1.0;
  StateVec mean = StateVec::Zero();
  StateCov cov = StateCov::Identity();
};

/// Motion and observation model. Defaults are the tuned constant-velocity settings.
struct ModelParams {
  Eigen::Matrix4d F;
  Eigen::Matrix4d Q;
  Eigen::Matrix4d P0;
  ObsCov R;
  ObsMatrix H;

  ModelParams() {
    F << 1, 0, 1, 0,
         0, 1, 0, 1,
         0, 0, 1, 0,
         0, 0, 0, 1;
    Q = 0.5 * Eigen::Vector4d(25, 100, 25, 100).asDiagonal();
    P0 = Eigen::Vector4d(25, 100, 25, 100).asDiagonal();
    R = Eigen::Vector2d(25, 100).asDiagonal();
    H << 1, 0, 0, 0,
         0, 1, 0, 0;
  }
};

/// Confidences are used directly as birth weights, kept inside [1e-3, 1].
inline double clamp_confidence(double conf) { return std::clamp(conf, 1e-3, 1.0); }

inline GaussianComponent init_component(const ObservationVec& z, double conf_norm, const ModelParams& params = {}) {
  if (!(conf_norm > 0.0) || conf_norm > 1.0) throw DomainError("normalized confidence must lie in (0, 1]");
  GaussianComponent c;
  c.weight = conf_norm;
  c.mean << z.z.x(), z.z.y(), 0.0, 0.0;
  c.cov = params.P0;
  return c;
}

inline GaussianComponent predict(const GaussianComponent& c, const ModelParams& params) {
  GaussianComponent out;
  out.weight = c.weight;
  out.mean = params.F * c.mean;
  out.cov = params.Q + params.F * c.cov * params.F.transpose();
  return out;
}

/// Applies `predict` `steps` times; steps <= 0 returns the input.
inline GaussianComponent predict_n(GaussianComponent c, int steps, const ModelParams& params) {
  for (int i = 0; i < steps; ++i) c = predict(c, params);
  return c;
}

inline ObsCov innovation_cov(const GaussianComponent& c_pred, const ModelParams& params) {
  return params.R + params.H * c_pred.cov * params.H.transpose();
}

/// N(z; H m, R + H P H^T).
inline double likelihood(const GaussianComponent& c_pred, const ObservationVec& z, const ModelParams& params) {
  const ObsCov S = innovation_cov(c_pred, params);
  const double det = S.determinant();
  if (!(det > 0.0) || !std::isfinite(det)) throw DomainError("innovation covariance is not positive definite");
  const Eigen::Vector2d d = z.z - params.H * c_pred.mean;
  const double maha = d.dot(S.ldlt().solve(d));
  return std::exp(-0.5 * maha) / (2.0 * std::numbers::pi * std::sqrt(det));
}

/// Kalman correction of a predicted component. Weight is carried over unchanged;
/// use `reweight` to obtain the normalized posterior weights.
inline GaussianComponent update(const GaussianComponent& c_pred, const ObservationVec& z, const ModelParams& params) {
  const ObsCov S = innovation_cov(c_pred, params);
  Eigen::FullPivLU<ObsCov> lu(S);
  if (!lu.isInvertible()) throw DomainError("singular innovation covariance");
  const Eigen::Matrix<double, 4, 2> K = c_pred.cov * params.H.transpose() * lu.inverse();
  GaussianComponent out;
  out.weight = c_pred.weight;
  out.mean = c_pred.mean + K * (z.z - params.H * c_pred.mean);
  const StateCov P = (StateCov::Identity() - K * params.H) * c_pred.cov;
  out.cov = 0.5 * (P + P.transpose());
  return out;
}

/// w_i q_i / sum_l w_l q_l. Throws DomainError when every product is zero.
inline std::vector<double> reweight(std::span<const GaussianComponent> components, std::span<const double> q_values) {
  if (components.size() != q_values.size()) throw DimensionError("reweight: component and density counts differ");
  std::vector<double> w(components.size());
  double total = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (q_values[i] < 0.0) throw DomainError("reweight: negative density");
    w[i] = components[i].weight * q_values[i];
    total += w[i];
  }
  if (!(total > 0.0)) throw DomainError("reweight: degenerate update, every w*q is zero");
  for (auto& v : w) v /= total;
  return w;
}

}  // namespace gmphd_mots
