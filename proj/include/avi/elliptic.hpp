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

// 1-D steady heat conduction -(a u')' = 0 on [0,1], u(0) = 1, u(1) = 0, with
// log-conductivity g(x, xi) = sum_i xi_i sqrt(2) sigma / ((i - 1/2) pi) sin((i - 1/2) pi x).
//
// The flux a u' is constant, so u(x) = 1 - F(x) / F(1) with F(x) = int_0^x 1/a.
// F is accumulated on a uniform grid with composite Simpson at even nodes,
// a one-panel third-order rule at odd nodes and the integral of the local
// quadratic interpolant for off-grid sensors.

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <vector>

namespace avi {

inline constexpr double kEllipticSigma = 1.5;
inline constexpr std::size_t kEllipticTerms = 5;
inline constexpr std::size_t kEllipticGridPoints = 2001;

double elliptic_conductivity(double x, const Eigen::VectorXd& xi);

// Nine equidistant sensors on [0.15, 0.85], endpoints included.
std::vector<double> elliptic_sensor_grid();

class EllipticSolver {
 public:
  explicit EllipticSolver(std::vector<double> sensor_xs, std::size_t grid_points = kEllipticGridPoints);

  Eigen::VectorXd solve(const Eigen::VectorXd& xi) const;
  // Also fills d u(sensor) / d xi; exact for the discretized integrals.
  Eigen::VectorXd solve(const Eigen::VectorXd& xi, Eigen::MatrixXd& jacobian) const;

  const std::vector<double>& sensors() const { return sensor_xs_; }
  std::size_t grid_points() const { return static_cast<std::size_t>(basis_.rows()); }

 private:
  struct LocalTerm {
    Eigen::Index node;
    double coef;
  };
  // F(x) = (h/3) * (Simpson-weighted prefix sum before query node) + local terms.
  struct Functional {
    std::size_t query;  // index into query_nodes_
    std::vector<LocalTerm> local;
  };

  Functional make_functional(double x);
  // F at every sensor followed by F(1); columns: the integral of 1/a, then of
  // d(1/a)/d xi_i when `with_jacobian`.
  Eigen::MatrixXd integrals(const Eigen::VectorXd& xi, bool with_jacobian) const;

  std::vector<double> sensor_xs_;
  double spacing_ = 0.0;
  Eigen::MatrixXd basis_;  // g(t_k) = basis_.row(k) * xi
  Eigen::VectorXd simpson_weights_;  // 1, 4, 2, 4, ..., 2, 4, 2
  std::vector<Eigen::Index> query_nodes_;  // sorted even nodes where prefix sums are read
  std::vector<Functional> functionals_;    // sensors, then x = 1
};

Eigen::VectorXd elliptic_solve(const Eigen::VectorXd& xi, std::span<const double> sensor_xs);

}  // namespace avi
