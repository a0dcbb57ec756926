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

#include "avi/problems.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace avi {

struct McmcConfig {
  long n_total = 33000;
  long n_burn = 3000;
  long thin = 30;
  std::optional<Eigen::VectorXd> init;  // prior mean when empty
  double target_accept = 0.3;
  // Starting isotropic proposal scale; <= 0 picks 0.1 * mean prior std.
  double initial_scale = 0.0;
  std::uint64_t seed = 0;

  void validate() const;
};

struct Chain {
  std::vector<Eigen::VectorXd> samples;
  double acceptance_rate = 0.0;  // over post-burn-in steps
  std::vector<double> proposal_scale_history;  // scale used at every step
};

// Random-walk Metropolis on log p(xi, y) with isotropic Gaussian proposals.
// The log proposal scale follows a Robbins-Monro drift toward
// target_accept during burn-in and is frozen afterwards. Kept samples are
// every thin-th post-burn-in state: floor((n_total - n_burn) / thin) rows.
Chain rwm_sample(const Problem& p, const Eigen::VectorXd& y, const McmcConfig& cfg);

struct ChainSummary {
  Eigen::VectorXd mean;
  Eigen::VectorXd std;
  Eigen::VectorXd lag1_autocorr;
  Eigen::VectorXd ess;
  // Dimensions with zero variance; their ess is reported as 1.
  std::vector<bool> degenerate;
};

// Per-dimension moments, lag-1 autocorrelation and effective sample size
// (Geyer initial positive sequence). Needs at least 10 samples.
ChainSummary chain_diagnostics(std::span<const Eigen::VectorXd> samples);
inline ChainSummary chain_diagnostics(const Chain& c) { return chain_diagnostics(c.samples); }

}  // namespace avi
