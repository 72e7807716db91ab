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

// Simple affinity fusion: position/motion affinity from the filter,
// global min-max normalization, and the log-product cost.

#pragma once

#include <cmath>

#include <Eigen/Dense>

#include "gmphd_mots/errors.hpp"
#include "gmphd_mots/gmphd.hpp"

namespace gmphd_mots {

/// Cost assigned to infeasible pairs; also the ceiling of every fused cost.
inline constexpr double kForbiddenCost = 10000.0;

/// Products at or below this level are treated as underflow and forbidden.
inline constexpr double kAffinityFloor = 1e-39;

/// Default scale of the log-product cost.
inline constexpr double kDefaultAlpha = 100.0;

/// Rows are states/tracks, columns are observations. Entries are >= 0.
struct AffinityMatrix {
  Eigen::MatrixXd values;

  AffinityMatrix() = default;
  explicit AffinityMatrix(Eigen::MatrixXd v) : values(std::move(v)) {}
  AffinityMatrix(Eigen::Index rows, Eigen::Index cols, double fill = 0.0) : values(Eigen::MatrixXd::Constant(rows, cols, fill)) {}

  Eigen::Index rows() const { return values.rows(); }
  Eigen::Index cols() const { return values.cols(); }
  double operator()(Eigen::Index i, Eigen::Index j) const { return values(i, j); }
  double& operator()(Eigen::Index i, Eigen::Index j) { return values(i, j); }
};

/// Entries in [0, kForbiddenCost]; kForbiddenCost marks a forbidden pair.
struct CostMatrix {
  Eigen::MatrixXd values;

  CostMatrix() = default;
  explicit CostMatrix(Eigen::MatrixXd v) : values(std::move(v)) {}
  CostMatrix(Eigen::Index rows, Eigen::Index cols, double fill = 0.0) : values(Eigen::MatrixXd::Constant(rows, cols, fill)) {}

  Eigen::Index rows() const { return values.rows(); }
  Eigen::Index cols() const { return values.cols(); }
  double operator()(Eigen::Index i, Eigen::Index j) const { return values(i, j); }
  double& operator()(Eigen::Index i, Eigen::Index j) { return values(i, j); }
};

/// w * q(z) with the component already predicted to the observation frame.
inline double pm_affinity(const GaussianComponent& track_pred, const ObservationVec& z, const ModelParams& params) {
  return track_pred.weight * likelihood(track_pred, z, params);
}

/// Joint min-max over every entry. A constant matrix maps to all ones.
inline AffinityMatrix minmax_normalize(const AffinityMatrix& a) {
  if (a.values.size() == 0) return a;
  const double lo = a.values.minCoeff();
  const double hi = a.values.maxCoeff();
  if (!(hi > lo)) return AffinityMatrix(Eigen::MatrixXd::Ones(a.rows(), a.cols()));
  return AffinityMatrix(((a.values.array() - lo) / (hi - lo)).matrix());
}

/// Cost of a single normalized affinity product.
inline double fused_cost(double product, double alpha = kDefaultAlpha) {
  if (!(product > kAffinityFloor)) return kForbiddenCost;
  const double c = -alpha * std::log(product);
  if (!(c < kForbiddenCost)) return kForbiddenCost;
  return c > 0.0 ? c : 0.0;
}

/// -alpha * ln(pm * appr), capped at kForbiddenCost.
inline CostMatrix fuse(const AffinityMatrix& pm_norm, const AffinityMatrix& appr_norm, double alpha = kDefaultAlpha) {
  if (pm_norm.rows() != appr_norm.rows() || pm_norm.cols() != appr_norm.cols()) {
    throw DimensionError("fuse: affinity matrices differ in shape");
  }
  CostMatrix cost(pm_norm.rows(), pm_norm.cols());
  for (Eigen::Index i = 0; i < cost.rows(); ++i) {
    for (Eigen::Index j = 0; j < cost.cols(); ++j) cost(i, j) = fused_cost(pm_norm(i, j) * appr_norm(i, j), alpha);
  }
  return cost;
}

}  // namespace gmphd_mots
