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

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace avi {

struct TrainConfig {
  long n_iter = 1000;
  long n_y = 32;
  long n_z = 5;
  double eta0 = 1e-2;
  double alpha = 0.1;
  long r = 5000;
  std::uint64_t seed = 0;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;

  // Throws std::invalid_argument naming the offending field.
  void validate() const;
};

struct AdamState {
  Eigen::VectorXd first_moment;
  Eigen::VectorXd second_moment;
  long step_count = 0;

  AdamState() = default;
  explicit AdamState(Eigen::Index n)
      : first_moment(Eigen::VectorXd::Zero(n)), second_moment(Eigen::VectorXd::Zero(n))
  {
  }
};

struct TraceRecord {
  long iteration = 0;
  double v_estimate = 0.0;
  double lr = 0.0;
  double grad_norm = 0.0;
};

struct ObjectiveGrad {
  double value = 0.0;
  nn::FlatVector grad;
  // Observation indices whose contribution was not finite.
  std::vector<std::size_t> nonfinite_observations;
};

// Monte Carlo sample of the amortized ELBO:
//   V = (d/2) log(2 pi e) + 1/N_y sum_i [ 1/N_z sum_j log p(mu_i + L_i z_j, y_i) + sum_r log L_i,rr ]
// The same latent batch zs is used for every observation.
double estimate_V(const AmortNet& net, const Problem& p, std::span<const Eigen::VectorXd> ys,
                  std::span<const Eigen::VectorXd> zs);

// V and its exact gradient in the flat parameters of `net`. Observations are
// processed in parallel and reduced in ascending index order, so the result
// is bitwise independent of the thread count.
ObjectiveGrad grad_V(const AmortNet& net, const Problem& p, std::span<const Eigen::VectorXd> ys,
                     std::span<const Eigen::VectorXd> zs);

// Single-threaded reference for grad_V; bitwise identical output.
ObjectiveGrad grad_V_serial(const AmortNet& net, const Problem& p, std::span<const Eigen::VectorXd> ys,
                            std::span<const Eigen::VectorXd> zs);

// eta0 * alpha^floor(k / r) for the zero-based iteration k.
double lr_schedule(double eta0, double alpha, long r, long k);

// One ascent step phi <- phi + eta * m_hat / (sqrt(v_hat) + eps).
void adam_step(AdamState& state, Eigen::VectorXd& phi, const Eigen::VectorXd& grad, double eta,
               double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);

struct TrainResult {
  AmortNet net;
  std::vector<TraceRecord> trace;
};

using TrainObserver = std::function<void(const TraceRecord&)>;

// Amortization network training: each iteration draws N_y observations from
// the data density and N_z latents, forms V and its gradient, and takes one
// ADAM step with the step-decayed learning rate. Random streams derive from
// cfg.seed ("train/init", "train/data", "train/latent").
// Throws NumericalAbort when V or its gradient is not finite.
TrainResult train(const Problem& p, const AmortArch& arch, const TrainConfig& cfg, const TrainObserver& observer = {});

// The published recipe for "ik" and "elliptic"; a 5,000-iteration schedule for "lingauss".
TrainConfig default_train_config(const std::string& problem_name);

// Default head widths: (20, 10) for "ik"/"lingauss", (50, 40, 30, 20) for "elliptic".
AmortArch default_arch(const std::string& problem_name);

}  // namespace avi
