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

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>
#include <vector>

#include "gmphd_mots/affinity.hpp"

namespace gmphd_mots {

struct Assignment {
  std::vector<std::pair<int, int>> pairs;  // (row, col), sorted by row
  std::vector<int> unassigned_rows;
  std::vector<int> unassigned_cols;
  double total_cost = 0.0;  // sum over surviving pairs
};

namespace detail {

// Shortest augmenting path Hungarian method with row/column potentials.
// Returns col_of_row for a square matrix, plus the final potentials.
struct HungarianSolution {
  std::vector<int> col_of_row;
  std::vector<double> u;
  std::vector<double> v;
};

inline HungarianSolution hungarian_square(const Eigen::MatrixXd& a) {
  const int n = static_cast<int>(a.rows());
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);  // p[j]: row matched to column j (1-based)
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = a(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  HungarianSolution sol;
  sol.col_of_row.assign(n, -1);
  for (int j = 1; j <= n; ++j) sol.col_of_row[p[j] - 1] = j - 1;
  sol.u.assign(u.begin() + 1, u.end());
  sol.v.assign(v.begin() + 1, v.end());
  return sol;
}

// Every optimal matching uses only edges that are tight under an optimal
// dual, and every perfect matching of tight edges is optimal. Walking rows
// in order and taking the smallest column that still admits a perfect tight
// matching yields the lexicographically smallest optimum.
inline std::vector<int> lexicographic_optimum(const Eigen::MatrixXd& a, const HungarianSolution& sol) {
  const int n = static_cast<int>(a.rows());
  const double eps = 1e-9 * (1.0 + a.cwiseAbs().maxCoeff()) * std::max(1, n);
  auto tight = [&](int i, int j) { return std::abs(a(i, j) - sol.u[i] - sol.v[j]) <= eps; };

  std::vector<int> col_of_row = sol.col_of_row;
  std::vector<int> row_of_col(n, -1);
  for (int i = 0; i < n; ++i) row_of_col[col_of_row[i]] = i;
  std::vector<char> fixed_col(n, 0);
  std::vector<char> seen(n, 0);

  // Re-route `row` onto some unfixed tight column, finishing at `target`.
  auto reroute = [&](auto&& self, int row, int target) -> bool {
    for (int j = 0; j < n; ++j) {
      if (fixed_col[j] || seen[j] || !tight(row, j)) continue;
      seen[j] = 1;
      if (j == target || self(self, row_of_col[j], target)) {
        col_of_row[row] = j;
        row_of_col[j] = row;
        return true;
      }
    }
    return false;
  };

  for (int r = 0; r < n; ++r) {
    const int current = col_of_row[r];
    for (int c = 0; c < current; ++c) {
      if (fixed_col[c] || !tight(r, c)) continue;
      const int displaced = row_of_col[c];
      std::fill(seen.begin(), seen.end(), 0);
      seen[c] = 1;
      const std::vector<int> backup_cr = col_of_row;
      const std::vector<int> backup_rc = row_of_col;
      fixed_col[c] = 1;  // c is claimed by r while the displaced row searches
      const bool ok = reroute(reroute, displaced, current);
      fixed_col[c] = 0;
      if (ok) {
        col_of_row[r] = c;
        row_of_col[c] = r;
        break;
      }
      col_of_row = backup_cr;
      row_of_col = backup_rc;
    }
    fixed_col[col_of_row[r]] = 1;
  }
  return col_of_row;
}

}  // namespace detail

/// Minimum-cost matching on the square-padded matrix (padding = kForbiddenCost).
/// Matches that land on a forbidden cost are reported as unassigned. Among
/// equal-cost optima the lexicographically smallest (row, col) set is returned.
inline Assignment solve(const CostMatrix& costs) {
  Assignment out;
  const int rows = static_cast<int>(costs.rows());
  const int cols = static_cast<int>(costs.cols());
  if (rows == 0 || cols == 0) {
    for (int i = 0; i < rows; ++i) out.unassigned_rows.push_back(i);
    for (int j = 0; j < cols; ++j) out.unassigned_cols.push_back(j);
    return out;
  }
  const int n = std::max(rows, cols);
  Eigen::MatrixXd padded = Eigen::MatrixXd::Constant(n, n, kForbiddenCost);
  padded.topLeftCorner(rows, cols) = costs.values.cwiseMin(kForbiddenCost);

  const auto sol = detail::hungarian_square(padded);
  const auto col_of_row = detail::lexicographic_optimum(padded, sol);

  std::vector<char> col_used(cols, 0);
  for (int i = 0; i < rows; ++i) {
    const int j = col_of_row[i];
    if (j < cols && padded(i, j) < kForbiddenCost) {
      out.pairs.emplace_back(i, j);
      out.total_cost += padded(i, j);
      col_used[j] = 1;
    } else {
      out.unassigned_rows.push_back(i);
    }
  }
  for (int j = 0; j < cols; ++j) {
    if (!col_used[j]) out.unassigned_cols.push_back(j);
  }
  return out;
}

}  // namespace gmphd_mots
