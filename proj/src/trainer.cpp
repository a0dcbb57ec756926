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

#include "avi/trainer.hpp"

#include "avi/errors.hpp"

#include <cmath>
#include <exception>
#include <numbers>
#include <stdexcept>
#include <string>

namespace avi {

namespace {

struct ObservationTerm {
  double value = 0.0;
  nn::FlatVector grad;
};

void check_batches(const AmortNet& net, const Problem& p, std::span<const Eigen::VectorXd> ys,
                   std::span<const Eigen::VectorXd> zs)
{
  require_shape(net.d == p.d() && net.m == p.m(), "network dimensions do not match the problem");
  require_shape(!ys.empty() && !zs.empty(), "need at least one observation and one latent sample");
  for (const auto& y : ys) require_shape(static_cast<std::size_t>(y.size()) == p.m(), "observation length mismatch");
  for (const auto& z : zs) require_shape(static_cast<std::size_t>(z.size()) == p.d(), "latent length mismatch");
}

// The braced term of V for observation i and, optionally, its gradient.
ObservationTerm observation_term(const AmortNet& net, const Problem& p, const Eigen::VectorXd& y,
                                 std::span<const Eigen::VectorXd> zs, bool with_grad, std::size_t i)
{
  const GuideParams g = amort_forward(net, y);
  const auto d = static_cast<Eigen::Index>(net.d);
  const double inv_nz = 1.0 / static_cast<double>(zs.size());

  ObservationTerm term;
  GuideGrad upstream{Eigen::VectorXd::Zero(d), Eigen::MatrixXd::Zero(d, d)};
  Eigen::VectorXd grad_xi;
  double data_sum = 0.0;
  for (std::size_t j = 0; j < zs.size(); ++j) {
    const Eigen::VectorXd xi = guide_sample(g, zs[j]);
    try {
      if (with_grad) {
        data_sum += p.log_joint(xi, y, grad_xi);
        upstream.mu += grad_xi;
        upstream.chol.triangularView<Eigen::Lower>() += grad_xi * zs[j].transpose();
      } else {
        data_sum += p.log_joint(xi, y);
      }
    } catch (const EvaluationError& e) {
      throw EvaluationError("sample (" + std::to_string(i) + ", " + std::to_string(j) + "): " + e.what());
    }
  }
  term.value = data_sum * inv_nz + g.chol.diagonal().array().log().sum();
  if (with_grad) {
    upstream.mu *= inv_nz;
    upstream.chol *= inv_nz;
    upstream.chol.diagonal().array() += g.chol.diagonal().array().inverse();
    term.grad = amort_grad(net, y, upstream);
  }
  return term;
}

double entropy_constant(std::size_t d)
{
  return 0.5 * static_cast<double>(d) * std::log(2.0 * std::numbers::pi * std::numbers::e);
}

// Fixed ascending-order reduction shared by the serial and parallel paths.
ObjectiveGrad reduce_terms(std::size_t d, std::span<const ObservationTerm> terms)
{
  ObjectiveGrad out;
  out.grad = nn::FlatVector::Zero(terms.front().grad.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < terms.size(); ++i) {
    sum += terms[i].value;
    out.grad += terms[i].grad;
    if (!std::isfinite(terms[i].value) || !terms[i].grad.allFinite()) out.nonfinite_observations.push_back(i);
  }
  const double inv_ny = 1.0 / static_cast<double>(terms.size());
  out.value = entropy_constant(d) + sum * inv_ny;
  out.grad *= inv_ny;
  return out;
}

}  // namespace

void TrainConfig::validate() const
{
  if (n_iter < 1) throw std::invalid_argument("n_iter must be >= 1");
  if (n_y < 1) throw std::invalid_argument("n_y must be >= 1");
  if (n_z < 1) throw std::invalid_argument("n_z must be >= 1");
  if (r < 1) throw std::invalid_argument("r must be >= 1");
  if (!(eta0 > 0.0)) throw std::invalid_argument("eta0 must be > 0");
  if (!(alpha > 0.0 && alpha <= 1.0)) throw std::invalid_argument("alpha must be in (0, 1]");
  if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0)) throw std::invalid_argument("adam_beta1 must be in [0, 1)");
  if (!(adam_beta2 >= 0.0 && adam_beta2 < 1.0)) throw std::invalid_argument("adam_beta2 must be in [0, 1)");
  if (!(adam_eps > 0.0)) throw std::invalid_argument("adam_eps must be > 0");
}

double estimate_V(const AmortNet& net, const Problem& p, std::span<const Eigen::VectorXd> ys,
                  std::span<const Eigen::VectorXd> zs)
{
  check_batches(net, p, ys, zs);
  double sum = 0.0;
  for (std::size_t i = 0; i < ys.size(); ++i) sum += observation_term(net, p, ys[i], zs, false, i).value;
  return entropy_constant(net.d) + sum / static_cast<double>(ys.size());
}

ObjectiveGrad grad_V(const AmortNet& net, const Problem& p, std::span<const Eigen::VectorXd> ys,
                     std::span<const Eigen::VectorXd> zs)
{
  check_batches(net, p, ys, zs);
  const auto n = static_cast<long>(ys.size());
  std::vector<ObservationTerm> terms(ys.size());
  std::vector<std::exception_ptr> errors(ys.size());

#pragma omp parallel for schedule(dynamic)
  for (long i = 0; i < n; ++i) {
    const auto idx = static_cast<std::size_t>(i);
    try {
      terms[idx] = observation_term(net, p, ys[idx], zs, true, idx);
    } catch (...) {
      errors[idx] = std::current_exception();
    }
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  return reduce_terms(net.d, terms);
}

ObjectiveGrad grad_V_serial(const AmortNet& net, const Problem& p, std::span<const Eigen::VectorXd> ys,
                            std::span<const Eigen::VectorXd> zs)
{
  check_batches(net, p, ys, zs);
  std::vector<ObservationTerm> terms;
  terms.reserve(ys.size());
  for (std::size_t i = 0; i < ys.size(); ++i) terms.push_back(observation_term(net, p, ys[i], zs, true, i));
  return reduce_terms(net.d, terms);
}

double lr_schedule(double eta0, double alpha, long r, long k)
{
  if (r < 1 || k < 0) throw DomainError("lr_schedule needs r >= 1 and k >= 0");
  return eta0 * std::pow(alpha, static_cast<double>(k / r));
}

void adam_step(AdamState& state, Eigen::VectorXd& phi, const Eigen::VectorXd& grad, double eta, double beta1,
               double beta2, double eps)
{
  require_shape(phi.size() == grad.size() && state.first_moment.size() == phi.size() &&
                    state.second_moment.size() == phi.size(),
                "ADAM state, parameters and gradient must have equal length");
  state.step_count += 1;
  state.first_moment = beta1 * state.first_moment + (1.0 - beta1) * grad;
  state.second_moment = beta2 * state.second_moment + (1.0 - beta2) * grad.array().square().matrix();
  const double c1 = 1.0 - std::pow(beta1, static_cast<double>(state.step_count));
  const double c2 = 1.0 - std::pow(beta2, static_cast<double>(state.step_count));
  phi.array() += eta * (state.first_moment.array() / c1) / ((state.second_moment.array() / c2).sqrt() + eps);
}

TrainResult train(const Problem& p, const AmortArch& arch, const TrainConfig& cfg, const TrainObserver& observer)
{
  cfg.validate();
  TrainResult result{make_amort_net(p.d(), p.m(), arch, substream_seed(cfg.seed, "train/init")), {}};
  AmortNet& net = result.net;
  Eigen::VectorXd phi = net.flatten();
  AdamState state(phi.size());
  Rng data_rng = make_stream(cfg.seed, "train/data");
  Rng latent_rng = make_stream(cfg.seed, "train/latent");

  std::vector<Eigen::VectorXd> ys(static_cast<std::size_t>(cfg.n_y));
  std::vector<Eigen::VectorXd> zs(static_cast<std::size_t>(cfg.n_z));
  result.trace.reserve(static_cast<std::size_t>(cfg.n_iter));

  for (long k = 0; k < cfg.n_iter; ++k) {
    ObjectiveGrad obj;
    try {
      for (auto& y : ys) y = p.sample_data(data_rng).y;
      for (auto& z : zs) z = standard_normal(latent_rng, static_cast<Eigen::Index>(p.d()));
      obj = grad_V(net, p, ys, zs);
    } catch (const EvaluationError& e) {
      throw NumericalAbort(k + 1, e.what());
    }
    if (!std::isfinite(obj.value) || !obj.grad.allFinite()) {
      std::string ids;
      for (std::size_t i : obj.nonfinite_observations) ids += (ids.empty() ? "" : ",") + std::to_string(i);
      throw NumericalAbort(k + 1, "V = " + std::to_string(obj.value) + ", offending observations [" + ids + "]");
    }

    const double eta = lr_schedule(cfg.eta0, cfg.alpha, cfg.r, k);
    adam_step(state, phi, obj.grad, eta, cfg.adam_beta1, cfg.adam_beta2, cfg.adam_eps);
    net.assign_flat({phi.data(), static_cast<std::size_t>(phi.size())});

    const TraceRecord rec{k + 1, obj.value, eta, obj.grad.norm()};
    result.trace.push_back(rec);
    if (observer) observer(rec);
  }
  return result;
}

TrainConfig default_train_config(const std::string& problem_name)
{
  TrainConfig cfg;
  if (problem_name == "ik") {
    cfg.n_iter = 10000;
    cfg.n_y = 32;
    cfg.n_z = 5;
    cfg.eta0 = 1e-2;
    cfg.alpha = 0.1;
    cfg.r = 5000;
  } else if (problem_name == "elliptic") {
    cfg.n_iter = 35000;
    cfg.n_y = 64;
    cfg.n_z = 5;
    cfg.eta0 = 1e-3;
    cfg.alpha = 0.5;
    cfg.r = 20000;
  } else {
    cfg.n_iter = 5000;
    cfg.n_y = 64;
    cfg.n_z = 20;
    cfg.eta0 = 1e-2;
    cfg.alpha = 0.3;
    cfg.r = 1000;
  }
  return cfg;
}

AmortArch default_arch(const std::string& problem_name)
{
  if (problem_name == "elliptic") return AmortArch::uniform({50, 40, 30, 20});
  return AmortArch::uniform({20, 10});
}

}  // namespace avi
