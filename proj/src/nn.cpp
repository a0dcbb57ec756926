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

#include "avi/nn.hpp"

#include "avi/errors.hpp"
#include "avi/random.hpp"

#include <cmath>
#include <random>

namespace avi::nn {

std::string_view to_string(Activation a)
{
  switch (a) {
    case Activation::relu: return "relu";
    case Activation::softplus: return "softplus";
    case Activation::linear: return "linear";
  }
  return "linear";
}

Activation activation_from_string(std::string_view name)
{
  if (name == "relu") return Activation::relu;
  if (name == "softplus") return Activation::softplus;
  if (name == "linear") return Activation::linear;
  throw ShapeError("unknown activation '" + std::string(name) + "'");
}

double softplus(double t)
{
  if (t > 30.0) return t;
  return std::log1p(std::exp(t));
}

double softplus_derivative(double t)
{
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

std::size_t MlpParams::parameter_count() const
{
  std::size_t n = 0;
  for (const auto& s : spec) n += s.output_dim * (s.input_dim + 1);
  return n;
}

void validate_spec(std::span<const LayerSpec> spec)
{
  require_shape(!spec.empty(), "network needs at least one layer");
  for (std::size_t l = 0; l < spec.size(); ++l) {
    require_shape(spec[l].input_dim >= 1 && spec[l].output_dim >= 1,
                  "layer " + std::to_string(l) + " has a zero dimension");
    if (l + 1 < spec.size()) {
      require_shape(spec[l].output_dim == spec[l + 1].input_dim,
                    "layer " + std::to_string(l) + " output_dim " + std::to_string(spec[l].output_dim) +
                        " does not match layer " + std::to_string(l + 1) + " input_dim " +
                        std::to_string(spec[l + 1].input_dim));
    }
  }
}

std::vector<LayerSpec> make_spec(std::size_t input_dim, std::span<const std::size_t> hidden,
                                 std::size_t output_dim, Activation ending)
{
  std::vector<LayerSpec> spec;
  std::size_t in = input_dim;
  for (std::size_t h : hidden) {
    spec.push_back({in, h, Activation::relu});
    in = h;
  }
  spec.push_back({in, output_dim, ending});
  validate_spec(spec);
  return spec;
}

MlpParams mlp_init(std::span<const LayerSpec> spec, std::uint64_t seed)
{
  validate_spec(spec);
  Rng rng(seed);
  MlpParams params;
  params.spec.assign(spec.begin(), spec.end());
  for (const auto& s : spec) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(s.input_dim));
    std::uniform_real_distribution<double> dist(-bound, bound);
    Dense layer;
    layer.weight.resize(static_cast<Eigen::Index>(s.output_dim), static_cast<Eigen::Index>(s.input_dim));
    for (Eigen::Index r = 0; r < layer.weight.rows(); ++r)
      for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) layer.weight(r, c) = dist(rng);
    layer.bias = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(s.output_dim));
    params.layers.push_back(std::move(layer));
  }
  return params;
}

namespace {

void apply_activation(Activation a, Eigen::VectorXd& v)
{
  switch (a) {
    case Activation::relu: v = v.cwiseMax(0.0); break;
    case Activation::softplus:
      for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = softplus(v[i]);
      break;
    case Activation::linear: break;
  }
}

// Multiplies `grad` in place by the activation derivative at pre-activation `pre`.
void scale_by_derivative(Activation a, const Eigen::VectorXd& pre, Eigen::VectorXd& grad)
{
  switch (a) {
    case Activation::relu:
      for (Eigen::Index i = 0; i < grad.size(); ++i)
        if (!(pre[i] > 0.0)) grad[i] = 0.0;
      break;
    case Activation::softplus:
      for (Eigen::Index i = 0; i < grad.size(); ++i) grad[i] *= softplus_derivative(pre[i]);
      break;
    case Activation::linear: break;
  }
}

void check_input(const MlpParams& params, const Eigen::VectorXd& x)
{
  require_shape(!params.spec.empty(), "empty network");
  require_shape(static_cast<std::size_t>(x.size()) == params.input_dim(),
                "network input has length " + std::to_string(x.size()) + ", expected " +
                    std::to_string(params.input_dim()));
}

}  // namespace

Eigen::VectorXd mlp_forward(const MlpParams& params, const Eigen::VectorXd& x)
{
  check_input(params, x);
  Eigen::VectorXd a = x;
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    Eigen::VectorXd z = params.layers[l].weight * a + params.layers[l].bias;
    apply_activation(params.spec[l].activation, z);
    a = std::move(z);
  }
  return a;
}

VjpResult mlp_vjp(const MlpParams& params, const Eigen::VectorXd& x, const Eigen::VectorXd& out_grad)
{
  check_input(params, x);
  require_shape(static_cast<std::size_t>(out_grad.size()) == params.output_dim(),
                "output gradient has length " + std::to_string(out_grad.size()) + ", expected " +
                    std::to_string(params.output_dim()));

  const std::size_t n_layers = params.layers.size();
  std::vector<Eigen::VectorXd> inputs(n_layers);
  std::vector<Eigen::VectorXd> pre(n_layers);
  Eigen::VectorXd a = x;
  for (std::size_t l = 0; l < n_layers; ++l) {
    inputs[l] = a;
    pre[l] = params.layers[l].weight * a + params.layers[l].bias;
    a = pre[l];
    apply_activation(params.spec[l].activation, a);
  }

  VjpResult result;
  result.param_grad.resize(static_cast<Eigen::Index>(params.parameter_count()));
  std::vector<Eigen::Index> offsets(n_layers);
  Eigen::Index offset = 0;
  for (std::size_t l = 0; l < n_layers; ++l) {
    offsets[l] = offset;
    offset += static_cast<Eigen::Index>(params.spec[l].output_dim * (params.spec[l].input_dim + 1));
  }

  Eigen::VectorXd delta = out_grad;
  for (std::size_t l = n_layers; l-- > 0;) {
    scale_by_derivative(params.spec[l].activation, pre[l], delta);
    const auto rows = params.layers[l].weight.rows();
    const auto cols = params.layers[l].weight.cols();
    // Row-major weight block: the outer product delta * input^T.
    Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> w_grad(
        result.param_grad.data() + offsets[l], rows, cols);
    w_grad.noalias() = delta * inputs[l].transpose();
    result.param_grad.segment(offsets[l] + rows * cols, rows) = delta;
    delta = params.layers[l].weight.transpose() * delta;
  }
  result.input_grad = std::move(delta);
  return result;
}

FlatVector flatten(const MlpParams& params)
{
  FlatVector flat(static_cast<Eigen::Index>(params.parameter_count()));
  Eigen::Index k = 0;
  for (const auto& layer : params.layers) {
    for (Eigen::Index r = 0; r < layer.weight.rows(); ++r)
      for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) flat[k++] = layer.weight(r, c);
    for (Eigen::Index r = 0; r < layer.bias.size(); ++r) flat[k++] = layer.bias[r];
  }
  return flat;
}

void assign_flat(MlpParams& params, std::span<const double> flat)
{
  require_shape(flat.size() == params.parameter_count(),
                "flat parameter vector has " + std::to_string(flat.size()) + " entries, expected " +
                    std::to_string(params.parameter_count()));
  std::size_t k = 0;
  for (auto& layer : params.layers) {
    for (Eigen::Index r = 0; r < layer.weight.rows(); ++r)
      for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) layer.weight(r, c) = flat[k++];
    for (Eigen::Index r = 0; r < layer.bias.size(); ++r) layer.bias[r] = flat[k++];
  }
}

MlpParams unflatten(std::span<const LayerSpec> spec, std::span<const double> flat)
{
  validate_spec(spec);
  MlpParams params;
  params.spec.assign(spec.begin(), spec.end());
  for (const auto& s : spec) {
    params.layers.push_back({Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(s.output_dim),
                                                   static_cast<Eigen::Index>(s.input_dim)),
                             Eigen::VectorXd::Zero(static_cast<Eigen::Index>(s.output_dim))});
  }
  assign_flat(params, flat);
  return params;
}

Eigen::VectorXd finite_diff(const std::function<double(const Eigen::VectorXd&)>& f, const Eigen::VectorXd& x,
                            double h)
{
  if (!(h > 0.0)) throw DomainError("finite difference step must be positive");
  Eigen::VectorXd grad(x.size());
  Eigen::VectorXd probe = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    probe[i] = x[i] + h;
    const double up = f(probe);
    probe[i] = x[i] - h;
    const double down = f(probe);
    probe[i] = x[i];
    grad[i] = (up - down) / (2.0 * h);
  }
  return grad;
}

}  // namespace avi::nn
