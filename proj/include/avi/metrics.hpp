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
#include "avi/mcmc.hpp"
#include "avi/problems.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace avi {

enum class Execution { parallel, serial };

// sup_x |ECDF_a(x) - ECDF_b(x)| with right-continuous ECDFs, computed by a
// sorted two-pointer sweep. Throws DomainError on empty input.
double ks_statistic(std::span<const double> a, std::span<const double> b);

// KS statistic of every marginal of two sample sets.
std::vector<double> ks_per_dim(std::span<const Eigen::VectorXd> a, std::span<const Eigen::VectorXd> b);

struct EvalConfig {
  std::size_t n_y = 100;
  std::size_t n_post = 1000;
  McmcConfig mcmc;  // its seed is replaced per observation
  std::uint64_t seed = 0;
};

struct KsReport {
  std::string problem;
  std::size_t n_post = 0;
  std::vector<DataDraw> draws;
  std::vector<std::vector<double>> ks;  // [observation][dimension]; empty when failed
  std::vector<std::string> failures;    // empty string when the observation succeeded

  std::size_t failed_count() const;
  // Median over successful observations, per dimension.
  Eigen::VectorXd median_per_dim() const;
  // Counts of KS values in `bins` equal bins on [0, 1], per dimension.
  std::vector<std::vector<std::size_t>> histogram(std::size_t bins) const;
};

// For n_y data-density draws, compares n_post guide samples against an MCMC
// chain for the same observation. Streams: "eval/data", "eval/guide" and
// "eval/mcmc" (indexed by observation). MCMC failures are recorded per
// observation and do not abort the evaluation.
KsReport evaluate_ks(const AmortNet& net, const Problem& p, const EvalConfig& cfg,
                     Execution exec = Execution::parallel);

struct ResimReport {
  double estimate = 0.0;
  std::size_t n_y = 0;
  std::size_t n_samples = 0;
  std::vector<double> per_observation;  // mean ||f(xi_ij) - f(xi_gt,i)|| per observation
};

// Draws n posterior samples for one observation; must be safe to call concurrently.
using PosteriorSampler = std::function<std::vector<Eigen::VectorXd>(const DataDraw&, std::size_t n, Rng& rng)>;

PosteriorSampler guide_sampler(const AmortNet& net);

// Re-simulation error (1 / (N_y N_samples)) sum_ij ||f(xi_ij) - f(xi_gt,i)||_2.
ResimReport resim_error(const Problem& p, std::span<const DataDraw> draws,
                        std::span<const std::vector<Eigen::VectorXd>> samples);
// Fresh draws from "eval/data" and samples from "eval/guide".
ResimReport resim_error(const Problem& p, const PosteriorSampler& sampler, std::size_t n_y, std::size_t n_samples,
                        std::uint64_t seed, Execution exec = Execution::parallel);
ResimReport resim_error(const AmortNet& net, const Problem& p, std::size_t n_y, std::size_t n_samples,
                        std::uint64_t seed, Execution exec = Execution::parallel);

std::vector<DataDraw> draw_evaluation_data(const Problem& p, std::size_t n_y, std::uint64_t seed);

}  // namespace avi
