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

#include "avi/elliptic.hpp"

#include "avi/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace avi {

namespace {

double mode_frequency(std::size_t i) { return (static_cast<double>(i) + 0.5) * std::numbers::pi; }

double mode_amplitude(std::size_t i) { return std::sqrt(2.0) * kEllipticSigma / mode_frequency(i); }

void check_xi(const Eigen::VectorXd& xi)
{
  require_shape(static_cast<std::size_t>(xi.size()) == kEllipticTerms,
                "elliptic parameters must have length 5, got " + std::to_string(xi.size()));
}

// Antiderivatives of the quadratic Lagrange basis on nodes u = 0, 1, 2.
Eigen::Vector3d lagrange_antiderivative(double u)
{
  const double u2 = u * u;
  const double u3 = u2 * u;
  return {u3 / 6.0 - 0.75 * u2 + u, -u3 / 3.0 + u2, u3 / 6.0 - 0.25 * u2};
}

}  // namespace

double elliptic_conductivity(double x, const Eigen::VectorXd& xi)
{
  check_xi(xi);
  double g = 0.0;
  for (std::size_t i = 0; i < kEllipticTerms; ++i)
    g += xi[static_cast<Eigen::Index>(i)] * mode_amplitude(i) * std::sin(mode_frequency(i) * x);
  return std::exp(g);
}

std::vector<double> elliptic_sensor_grid()
{
  std::vector<double> xs(9);
  for (std::size_t i = 0; i < xs.size(); ++i) xs[i] = 0.15 + 0.0875 * static_cast<double>(i);
  return xs;
}

EllipticSolver::EllipticSolver(std::vector<double> sensor_xs, std::size_t grid_points)
    : sensor_xs_(std::move(sensor_xs))
{
  if (grid_points < 3 || grid_points % 2 == 0)
    throw DomainError("Simpson grid needs an odd number of points >= 3");
  const auto n = static_cast<Eigen::Index>(grid_points);
  spacing_ = 1.0 / static_cast<double>(n - 1);

  basis_.resize(n, static_cast<Eigen::Index>(kEllipticTerms));
  simpson_weights_.resize(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const double t = static_cast<double>(k) * spacing_;
    for (std::size_t i = 0; i < kEllipticTerms; ++i)
      basis_(k, static_cast<Eigen::Index>(i)) = mode_amplitude(i) * std::sin(mode_frequency(i) * t);
    simpson_weights_[k] = k == 0 ? 1.0 : (k % 2 ? 4.0 : 2.0);
  }

  for (double x : sensor_xs_) {
    if (!(x >= 0.0 && x <= 1.0)) throw DomainError("sensor location outside [0, 1]");
    functionals_.push_back(make_functional(x));
  }
  functionals_.push_back(make_functional(1.0));
}

EllipticSolver::Functional EllipticSolver::make_functional(double x)
{
  const Eigen::Index intervals = basis_.rows() - 1;
  const double pos = x / spacing_;
  Eigen::Index node = static_cast<Eigen::Index>(std::llround(pos));
  const bool on_grid = std::abs(pos - static_cast<double>(node)) < 1e-9;
  if (!on_grid) node = std::min<Eigen::Index>(static_cast<Eigen::Index>(std::floor(pos)), intervals - 1);

  Functional f;
  const Eigen::Index even = node - node % 2;
  // Composite Simpson to the even node: (h/3) (prefix of weights before it + its own value).
  if (even > 0) f.local.push_back({even, spacing_ / 3.0});
  if (node % 2) {
    f.local.push_back({even, 5.0 * spacing_ / 12.0});
    f.local.push_back({even + 1, 8.0 * spacing_ / 12.0});
    f.local.push_back({even + 2, -spacing_ / 12.0});
  }
  if (!on_grid) {
    const Eigen::Index first = node + 2 <= intervals ? node : node - 1;
    const double u0 = static_cast<double>(node - first);
    const double u1 = pos - static_cast<double>(first);
    const Eigen::Vector3d w = spacing_ * (lagrange_antiderivative(u1) - lagrange_antiderivative(u0));
    for (Eigen::Index q = 0; q < 3; ++q) f.local.push_back({first + q, w[q]});
  }

  auto it = std::find(query_nodes_.begin(), query_nodes_.end(), even);
  if (it == query_nodes_.end()) it = query_nodes_.insert(query_nodes_.end(), even);
  f.query = static_cast<std::size_t>(it - query_nodes_.begin());
  return f;
}

Eigen::MatrixXd EllipticSolver::integrals(const Eigen::VectorXd& xi, bool with_jacobian) const
{
  check_xi(xi);
  const Eigen::Index n = basis_.rows();
  const auto terms = static_cast<Eigen::Index>(kEllipticTerms);
  const Eigen::Index channels = with_jacobian ? terms + 1 : 1;
  const Eigen::ArrayXd inv_a = (-(basis_ * xi)).array().exp();

  // Weighted prefix sums read at each query node (query nodes are visited in
  // the order they were registered, which need not be sorted).
  std::vector<std::size_t> order(query_nodes_.size());
  for (std::size_t q = 0; q < order.size(); ++q) order[q] = q;
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return query_nodes_[a] < query_nodes_[b]; });

  Eigen::MatrixXd snapshots(static_cast<Eigen::Index>(query_nodes_.size()), channels);
  double sums[kEllipticTerms + 1] = {};
  std::size_t next = 0;
  for (Eigen::Index k = 0; k < n && next < order.size(); ++k) {
    while (next < order.size() && query_nodes_[order[next]] == k) {
      for (Eigen::Index c = 0; c < channels; ++c) snapshots(static_cast<Eigen::Index>(order[next]), c) = sums[c];
      ++next;
    }
    const double gw = simpson_weights_[k] * inv_a[k];
    sums[0] += gw;
    if (with_jacobian)
      for (Eigen::Index i = 0; i < terms; ++i) sums[i + 1] -= basis_(k, i) * gw;
  }

  Eigen::MatrixXd out(static_cast<Eigen::Index>(functionals_.size()), channels);
  for (std::size_t s = 0; s < functionals_.size(); ++s) {
    const auto& f = functionals_[s];
    const auto row = static_cast<Eigen::Index>(s);
    for (Eigen::Index c = 0; c < channels; ++c)
      out(row, c) = spacing_ / 3.0 * snapshots(static_cast<Eigen::Index>(f.query), c);
    for (const auto& t : f.local) {
      const double v = t.coef * inv_a[t.node];
      out(row, 0) += v;
      if (with_jacobian)
        for (Eigen::Index i = 0; i < terms; ++i) out(row, i + 1) -= basis_(t.node, i) * v;
    }
  }
  return out;
}

Eigen::VectorXd EllipticSolver::solve(const Eigen::VectorXd& xi) const
{
  const Eigen::MatrixXd f = integrals(xi, false);
  const Eigen::Index n_sensors = f.rows() - 1;
  const double total = f(n_sensors, 0);
  return (1.0 - f.col(0).head(n_sensors).array() / total).matrix();
}

Eigen::VectorXd EllipticSolver::solve(const Eigen::VectorXd& xi, Eigen::MatrixXd& jacobian) const
{
  const Eigen::MatrixXd f = integrals(xi, true);
  const auto terms = static_cast<Eigen::Index>(kEllipticTerms);
  const Eigen::Index n_sensors = f.rows() - 1;
  const double total = f(n_sensors, 0);
  const Eigen::RowVectorXd total_grad = f.row(n_sensors).tail(terms);

  jacobian.resize(n_sensors, terms);
  Eigen::VectorXd u(n_sensors);
  for (Eigen::Index s = 0; s < n_sensors; ++s) {
    const double fs = f(s, 0);
    u[s] = 1.0 - fs / total;
    jacobian.row(s) = -(f.row(s).tail(terms) * total - fs * total_grad) / (total * total);
  }
  return u;
}

Eigen::VectorXd elliptic_solve(const Eigen::VectorXd& xi, std::span<const double> sensor_xs)
{
  return EllipticSolver(std::vector<double>(sensor_xs.begin(), sensor_xs.end())).solve(xi);
}

}  // namespace avi
