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

// Bayesian inverse problems with a diagonal Gaussian prior and the likelihood
// y ~ N(f(xi), gamma^2 I).
//
// A new forward model plugs in by constructing a Problem with its forward
// function (and optionally its Jacobian); trainer and metrics only talk to
// this interface. Registered names: "ik", "elliptic", "lingauss".

#include "avi/random.hpp"

#include <Eigen/Dense>

#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace avi {

// Enough to rebuild a registered problem. Only "lingauss" reads the
// remaining fields; empty fields fall back to registry defaults.
struct ProblemSpec {
  std::string name;
  Eigen::MatrixXd a;
  double gamma = 0.0;
  Eigen::VectorXd prior_mean;
  Eigen::VectorXd prior_std;
};

struct DataDraw {
  Eigen::VectorXd xi_gt;
  Eigen::VectorXd y;
};

class Problem {
 public:
  using Forward = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;
  // Returns f(xi) and writes the m x d Jacobian.
  using ForwardJacobian = std::function<Eigen::VectorXd(const Eigen::VectorXd&, Eigen::MatrixXd&)>;

  // Without `jacobian`, central differences with step 1e-6 are used.
  Problem(ProblemSpec spec, std::size_t m, Eigen::VectorXd prior_mean, Eigen::VectorXd prior_std,
          double noise_scale, Forward forward, ForwardJacobian jacobian = {});

  const std::string& name() const { return spec_.name; }
  const ProblemSpec& spec() const { return spec_; }
  std::size_t d() const { return static_cast<std::size_t>(prior_mean_.size()); }
  std::size_t m() const { return m_; }
  const Eigen::VectorXd& prior_mean() const { return prior_mean_; }
  const Eigen::VectorXd& prior_std() const { return prior_std_; }
  double noise_scale() const { return noise_scale_; }

  // Throws EvaluationError (naming xi) when the output is not finite.
  Eigen::VectorXd forward(const Eigen::VectorXd& xi) const;
  Eigen::VectorXd forward(const Eigen::VectorXd& xi, Eigen::MatrixXd& jacobian) const;

  double log_prior(const Eigen::VectorXd& xi) const;
  double log_likelihood(const Eigen::VectorXd& xi, const Eigen::VectorXd& y) const;
  double log_joint(const Eigen::VectorXd& xi, const Eigen::VectorXd& y) const;
  // log p(xi, y) and its gradient with respect to xi.
  double log_joint(const Eigen::VectorXd& xi, const Eigen::VectorXd& y, Eigen::VectorXd& grad_xi) const;

  // xi ~ prior, y = f(xi) + gamma * eps.
  DataDraw sample_data(Rng& rng) const;

 private:
  void check_xi(const Eigen::VectorXd& xi) const;
  void check_y(const Eigen::VectorXd& y) const;

  ProblemSpec spec_;
  std::size_t m_;
  Eigen::VectorXd prior_mean_;
  Eigen::VectorXd prior_std_;
  double noise_scale_;
  Forward forward_;
  ForwardJacobian jacobian_;
};

inline constexpr double kIkNoise = 0.01;
inline constexpr double kEllipticNoise = 0.015;

Eigen::VectorXd ik_forward(const Eigen::VectorXd& xi);
Eigen::MatrixXd ik_jacobian(const Eigen::VectorXd& xi);

Problem ik_problem();
Problem elliptic_problem();
Problem linear_gaussian_problem(const Eigen::MatrixXd& a, double gamma, const Eigen::VectorXd& prior_mean,
                                const Eigen::VectorXd& prior_std);

struct LinearGaussianPosterior {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
  double log_evidence = 0.0;
};

LinearGaussianPosterior linear_gaussian_posterior(const Eigen::MatrixXd& a, double gamma,
                                                  const Eigen::VectorXd& prior_mean,
                                                  const Eigen::VectorXd& prior_std, const Eigen::VectorXd& y);

// Builds a registered problem; throws std::invalid_argument for unknown names.
Problem make_problem(const ProblemSpec& spec);
Problem make_problem(std::string_view name);
const std::vector<std::string>& problem_names();

}  // namespace avi
