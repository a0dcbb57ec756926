/* Copyright 2026 The avi Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 *
 */

#pragma once

#include "avi/elliptic.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <vector>

namespace avi::testing {

// Second-order conservative finite differences for -(a u')' = 0, u(0) = 1,
// u(1) = 0, with a evaluated at cell midpoints; tridiagonal Thomas solve.
// Returns u at every node (n nodes, spacing 1/(n-1)).
inline std::vector<double> elliptic_fd_solution(const Eigen::VectorXd& xi, int n = 4001)
{
  const double h = 1.0 / (n - 1);
  std::vector<double> a_half(static_cast<std::size_t>(n - 1));
  for (int k = 0; k + 1 < n; ++k) a_half[static_cast<std::size_t>(k)] = elliptic_conductivity((k + 0.5) * h, xi);

  // interior unknowns u_1..u_{n-2}: -a_{k-1/2} u_{k-1} + (a_{k-1/2} + a_{k+1/2}) u_k - a_{k+1/2} u_{k+1} = 0
  const int interior = n - 2;
  std::vector<double> lower(static_cast<std::size_t>(interior)), diag(static_cast<std::size_t>(interior)),
      upper(static_cast<std::size_t>(interior)), rhs(static_cast<std::size_t>(interior), 0.0);
  for (int i = 0; i < interior; ++i) {
    const auto k = static_cast<std::size_t>(i + 1);
    lower[static_cast<std::size_t>(i)] = -a_half[k - 1];
    diag[static_cast<std::size_t>(i)] = a_half[k - 1] + a_half[k];
    upper[static_cast<std::size_t>(i)] = -a_half[k];
  }
  rhs[0] = a_half[0] * 1.0;  // boundary u_0 = 1

  for (int i = 1; i < interior; ++i) {
    const auto iu = static_cast<std::size_t>(i);
    const double w = lower[iu] / diag[iu - 1];
    diag[iu] -= w * upper[iu - 1];
    rhs[iu] -= w * rhs[iu - 1];
  }
  std::vector<double> u(static_cast<std::size_t>(n), 0.0);
  u[0] = 1.0;
  u[static_cast<std::size_t>(n - 1)] = 0.0;
  double next = 0.0;
  for (int i = interior - 1; i >= 0; --i) {
    const auto iu = static_cast<std::size_t>(i);
    next = (rhs[iu] - upper[iu] * next) / diag[iu];
    u[iu + 1] = next;
  }
  return u;
}

// Sensor values from the FD solution; sensors must sit on the FD grid.
inline Eigen::VectorXd elliptic_fd_sensors(const Eigen::VectorXd& xi, const std::vector<double>& xs, int n = 4001)
{
  const std::vector<double> u = elliptic_fd_solution(xi, n);
  Eigen::VectorXd out(static_cast<Eigen::Index>(xs.size()));
  for (std::size_t s = 0; s < xs.size(); ++s) {
    const double pos = xs[s] * (n - 1);
    const auto node = static_cast<std::size_t>(std::lround(pos));
    out[static_cast<Eigen::Index>(s)] = u[node];
  }
  return out;
}

}  // namespace avi::testing
