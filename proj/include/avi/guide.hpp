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

// Amortized full-rank Gaussian guide q(xi | y) = N(mu(y), L(y) L(y)^T).
//
// The amortization network has three heads that all read the observation y:
//   head_mu      -> mu (linear ending)
//   head_diag    -> diag(L) (softplus ending, plus kDiagFloor)
//   head_offdiag -> strict lower triangle of L, row-major (linear ending)
// For d = 1 the strict lower triangle is empty and head_offdiag is absent.
// The flat parameter vector of an AmortNet concatenates the three heads in
// that order, each in nn canonical order.

#include "avi/nn.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace avi {

inline constexpr double kDiagFloor = 1e-6;

struct GuideParams {
  Eigen::VectorXd mu;
  Eigen::MatrixXd chol;  // lower triangular, positive diagonal

  Eigen::Index dim() const { return mu.size(); }
  Eigen::MatrixXd covariance() const { return chol * chol.transpose(); }
};

// Gradient of a scalar with respect to (mu, chol); only the lower triangle of
// `chol` is read.
struct GuideGrad {
  Eigen::VectorXd mu;
  Eigen::MatrixXd chol;
};

// Hidden layer widths of each head.
struct AmortArch {
  std::vector<std::size_t> mu_hidden;
  std::vector<std::size_t> diag_hidden;
  std::vector<std::size_t> offdiag_hidden;

  static AmortArch uniform(std::vector<std::size_t> hidden) { return {hidden, hidden, hidden}; }
};

struct AmortNet {
  nn::MlpParams head_mu;
  nn::MlpParams head_diag;
  std::optional<nn::MlpParams> head_offdiag;
  std::size_t d = 0;
  std::size_t m = 0;

  std::size_t parameter_count() const;
  nn::FlatVector flatten() const;
  void assign_flat(std::span<const double> flat);
};

inline std::size_t offdiag_count(std::size_t d) { return d * (d - 1) / 2; }

AmortNet make_amort_net(std::size_t d, std::size_t m, const AmortArch& arch, std::uint64_t seed);

// Throws ShapeError unless the head dimensions agree with (d, m).
void validate_net(const AmortNet& net);

GuideParams amort_forward(const AmortNet& net, const Eigen::VectorXd& y);

// mu + L z.
Eigen::VectorXd guide_sample(const GuideParams& g, const Eigen::VectorXd& z);

// log N(xi | mu, L L^T) through the triangular solve L w = xi - mu.
double guide_log_density(const GuideParams& g, const Eigen::VectorXd& xi);

// (d/2) log(2 pi e) + sum_r log L_rr.
double guide_entropy(const GuideParams& g);

// Pulls a gradient with respect to (mu, chol) back to the flat network
// parameters of `net` evaluated at `y`.
nn::FlatVector amort_grad(const AmortNet& net, const Eigen::VectorXd& y, const GuideGrad& upstream);

}  // namespace avi
