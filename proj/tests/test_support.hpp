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

#include "avi/guide.hpp"
#include "avi/problems.hpp"
#include "avi/random.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

namespace avi::testing {

// ||a - b||_inf / max(||b||_inf, floor)
inline double rel_err(const Eigen::VectorXd& a, const Eigen::VectorXd& b, double floor = 1e-12)
{
  return (a - b).lpNorm<Eigen::Infinity>() / std::max(b.lpNorm<Eigen::Infinity>(), floor);
}

inline GuideParams random_guide(Rng& rng, Eigen::Index d, double diag_hi = 2.0, double offdiag_scale = 0.5)
{
  std::uniform_real_distribution<double> diag(0.3, diag_hi);
  std::normal_distribution<double> normal(0.0, 1.0);
  GuideParams g{Eigen::VectorXd::Zero(d), Eigen::MatrixXd::Zero(d, d)};
  for (Eigen::Index r = 0; r < d; ++r) {
    g.mu[r] = normal(rng);
    g.chol(r, r) = diag(rng);
    for (Eigen::Index c = 0; c < r; ++c) g.chol(r, c) = offdiag_scale * normal(rng);
  }
  return g;
}

inline void zero_net(AmortNet& net)
{
  const Eigen::VectorXd zeros = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(net.parameter_count()));
  net.assign_flat({zeros.data(), static_cast<std::size_t>(zeros.size())});
}

struct McEstimate {
  double mean = 0.0;
  double se = 0.0;
};

// Per-observation ELBO: E_q[log p(xi, y) - log q(xi)] by plain Monte Carlo.
inline McEstimate elbo_estimate(const AmortNet& net, const Problem& p, const Eigen::VectorXd& y, int n, Rng& rng)
{
  const GuideParams g = amort_forward(net, y);
  double sum = 0.0;
  double sum_sq = 0.0;
  for (int j = 0; j < n; ++j) {
    const Eigen::VectorXd xi = guide_sample(g, standard_normal(rng, g.dim()));
    const double v = p.log_joint(xi, y) - guide_log_density(g, xi);
    sum += v;
    sum_sq += v * v;
  }
  const double mean = sum / n;
  return {mean, std::sqrt(std::max(0.0, sum_sq / n - mean * mean) / n)};
}

}  // namespace avi::testing
