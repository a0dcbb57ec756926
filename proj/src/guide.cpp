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

#include "avi/guide.hpp"

#include "avi/errors.hpp"
#include "avi/random.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace avi {

std::size_t AmortNet::parameter_count() const
{
  return head_mu.parameter_count() + head_diag.parameter_count() +
         (head_offdiag ? head_offdiag->parameter_count() : 0);
}

nn::FlatVector AmortNet::flatten() const
{
  nn::FlatVector flat(static_cast<Eigen::Index>(parameter_count()));
  const auto n_mu = static_cast<Eigen::Index>(head_mu.parameter_count());
  const auto n_diag = static_cast<Eigen::Index>(head_diag.parameter_count());
  flat.head(n_mu) = nn::flatten(head_mu);
  flat.segment(n_mu, n_diag) = nn::flatten(head_diag);
  if (head_offdiag) flat.tail(flat.size() - n_mu - n_diag) = nn::flatten(*head_offdiag);
  return flat;
}

void AmortNet::assign_flat(std::span<const double> flat)
{
  require_shape(flat.size() == parameter_count(), "flat parameter vector has " + std::to_string(flat.size()) +
                                                      " entries, expected " + std::to_string(parameter_count()));
  const std::size_t n_mu = head_mu.parameter_count();
  const std::size_t n_diag = head_diag.parameter_count();
  nn::assign_flat(head_mu, flat.subspan(0, n_mu));
  nn::assign_flat(head_diag, flat.subspan(n_mu, n_diag));
  if (head_offdiag) nn::assign_flat(*head_offdiag, flat.subspan(n_mu + n_diag));
}

AmortNet make_amort_net(std::size_t d, std::size_t m, const AmortArch& arch, std::uint64_t seed)
{
  require_shape(d >= 1 && m >= 1, "amortization net needs d >= 1 and m >= 1");
  AmortNet net;
  net.d = d;
  net.m = m;
  net.head_mu = nn::mlp_init(nn::make_spec(m, arch.mu_hidden, d, nn::Activation::linear),
                             substream_seed(seed, "init/mu"));
  net.head_diag = nn::mlp_init(nn::make_spec(m, arch.diag_hidden, d, nn::Activation::softplus),
                               substream_seed(seed, "init/diag"));
  if (d > 1) {
    net.head_offdiag = nn::mlp_init(nn::make_spec(m, arch.offdiag_hidden, offdiag_count(d), nn::Activation::linear),
                                    substream_seed(seed, "init/offdiag"));
  }
  return net;
}

void validate_net(const AmortNet& net)
{
  require_shape(net.head_mu.input_dim() == net.m && net.head_mu.output_dim() == net.d, "mu head shape mismatch");
  require_shape(net.head_diag.input_dim() == net.m && net.head_diag.output_dim() == net.d,
                "diagonal head shape mismatch");
  require_shape(net.head_diag.spec.back().activation == nn::Activation::softplus,
                "diagonal head must end with softplus");
  if (net.d > 1) {
    require_shape(net.head_offdiag.has_value(), "off-diagonal head missing");
    require_shape(net.head_offdiag->input_dim() == net.m && net.head_offdiag->output_dim() == offdiag_count(net.d),
                  "off-diagonal head shape mismatch");
  } else {
    require_shape(!net.head_offdiag.has_value(), "d = 1 net must not have an off-diagonal head");
  }
}

GuideParams amort_forward(const AmortNet& net, const Eigen::VectorXd& y)
{
  require_shape(static_cast<std::size_t>(y.size()) == net.m,
                "observation has length " + std::to_string(y.size()) + ", expected " + std::to_string(net.m));
  const auto d = static_cast<Eigen::Index>(net.d);
  GuideParams g;
  g.mu = nn::mlp_forward(net.head_mu, y);
  g.chol = Eigen::MatrixXd::Zero(d, d);
  g.chol.diagonal() = nn::mlp_forward(net.head_diag, y).array() + kDiagFloor;
  if (net.head_offdiag) {
    const Eigen::VectorXd lower = nn::mlp_forward(*net.head_offdiag, y);
    Eigen::Index k = 0;
    for (Eigen::Index r = 1; r < d; ++r)
      for (Eigen::Index c = 0; c < r; ++c) g.chol(r, c) = lower[k++];
  }
  return g;
}

Eigen::VectorXd guide_sample(const GuideParams& g, const Eigen::VectorXd& z)
{
  require_shape(z.size() == g.dim() && g.chol.rows() == g.dim() && g.chol.cols() == g.dim(),
                "latent vector and guide dimensions differ");
  return g.mu + g.chol.triangularView<Eigen::Lower>() * z;
}

double guide_log_density(const GuideParams& g, const Eigen::VectorXd& xi)
{
  require_shape(xi.size() == g.dim() && g.chol.rows() == g.dim() && g.chol.cols() == g.dim(),
                "parameter vector and guide dimensions differ");
  if (!(g.chol.diagonal().array() > 0.0).all()) throw DomainError("Cholesky diagonal must be positive");
  const Eigen::VectorXd w = g.chol.triangularView<Eigen::Lower>().solve(xi - g.mu);
  const double d = static_cast<double>(g.dim());
  return -0.5 * d * std::log(2.0 * std::numbers::pi) - g.chol.diagonal().array().log().sum() - 0.5 * w.squaredNorm();
}

double guide_entropy(const GuideParams& g)
{
  const double d = static_cast<double>(g.dim());
  return 0.5 * d * std::log(2.0 * std::numbers::pi * std::numbers::e) + g.chol.diagonal().array().log().sum();
}

nn::FlatVector amort_grad(const AmortNet& net, const Eigen::VectorXd& y, const GuideGrad& upstream)
{
  const auto d = static_cast<Eigen::Index>(net.d);
  require_shape(upstream.mu.size() == d && upstream.chol.rows() == d && upstream.chol.cols() == d,
                "upstream gradient does not match guide dimensions");

  nn::FlatVector flat(static_cast<Eigen::Index>(net.parameter_count()));
  const auto n_mu = static_cast<Eigen::Index>(net.head_mu.parameter_count());
  const auto n_diag = static_cast<Eigen::Index>(net.head_diag.parameter_count());

  flat.head(n_mu) = nn::mlp_vjp(net.head_mu, y, upstream.mu).param_grad;
  // The floor is an additive constant, so the diagonal passes straight through.
  flat.segment(n_mu, n_diag) = nn::mlp_vjp(net.head_diag, y, upstream.chol.diagonal()).param_grad;
  if (net.head_offdiag) {
    Eigen::VectorXd lower(static_cast<Eigen::Index>(offdiag_count(net.d)));
    Eigen::Index k = 0;
    for (Eigen::Index r = 1; r < d; ++r)
      for (Eigen::Index c = 0; c < r; ++c) lower[k++] = upstream.chol(r, c);
    flat.tail(flat.size() - n_mu - n_diag) = nn::mlp_vjp(*net.head_offdiag, y, lower).param_grad;
  }
  return flat;
}

}  // namespace avi
