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

// Dense feed-forward networks with exact reverse-mode gradients.
//
// Canonical flat parameter order (used by FlatGrad, ADAM state and model
// files): layer by layer from input to output; within a layer the weight
// matrix row-major (row = output unit), followed by the bias vector.

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace avi::nn {

enum class Activation { relu, softplus, linear };

std::string_view to_string(Activation a);
Activation activation_from_string(std::string_view name);

struct LayerSpec {
  std::size_t input_dim = 1;
  std::size_t output_dim = 1;
  Activation activation = Activation::linear;

  friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

struct Dense {
  Eigen::MatrixXd weight;  // output_dim x input_dim
  Eigen::VectorXd bias;
};

struct MlpParams {
  std::vector<LayerSpec> spec;
  std::vector<Dense> layers;

  std::size_t input_dim() const { return spec.front().input_dim; }
  std::size_t output_dim() const { return spec.back().output_dim; }
  std::size_t parameter_count() const;
};

// Flat vector of per-parameter values or gradients in canonical order.
using FlatVector = Eigen::VectorXd;

struct VjpResult {
  FlatVector param_grad;
  Eigen::VectorXd input_grad;
};

// Overflow-safe log(1 + e^t); returns t for t > 30.
double softplus(double t);
// d/dt softplus(t), i.e. the logistic sigmoid.
double softplus_derivative(double t);

// Throws ShapeError unless the layers are non-empty, have positive dims and chain.
void validate_spec(std::span<const LayerSpec> spec);

// Layers sized in -> hidden... -> out; ReLU on hidden layers, `ending` on the last.
std::vector<LayerSpec> make_spec(std::size_t input_dim, std::span<const std::size_t> hidden,
                                 std::size_t output_dim, Activation ending);

MlpParams mlp_init(std::span<const LayerSpec> spec, std::uint64_t seed);

Eigen::VectorXd mlp_forward(const MlpParams& params, const Eigen::VectorXd& x);

// out_grad^T * d(output)/d(params) and out_grad^T * d(output)/d(x).
// The ReLU derivative at exactly 0 is taken as 0.
VjpResult mlp_vjp(const MlpParams& params, const Eigen::VectorXd& x, const Eigen::VectorXd& out_grad);

FlatVector flatten(const MlpParams& params);
// Overwrites every parameter from `flat`, which must hold parameter_count() values.
void assign_flat(MlpParams& params, std::span<const double> flat);
MlpParams unflatten(std::span<const LayerSpec> spec, std::span<const double> flat);

// Central differences (f(x + h e_i) - f(x - h e_i)) / 2h for every coordinate.
Eigen::VectorXd finite_diff(const std::function<double(const Eigen::VectorXd&)>& f, const Eigen::VectorXd& x,
                            double h);

}  // namespace avi::nn
