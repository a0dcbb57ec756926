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

#include "avi/mcmc.hpp"

#include "avi/errors.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace avi {

void McmcConfig::validate() const
{
  if (n_burn < 0) throw std::invalid_argument("n_burn must be >= 0");
  if (n_total <= n_burn) throw std::invalid_argument("n_total must exceed n_burn");
  if (thin < 1) throw std::invalid_argument("thin must be >= 1");
  if (!(target_accept > 0.0 && target_accept < 1.0)) throw std::invalid_argument("target_accept must be in (0, 1)");
}

Chain rwm_sample(const Problem& p, const Eigen::VectorXd& y, const McmcConfig& cfg)
{
  cfg.validate();
  const auto d = static_cast<Eigen::Index>(p.d());
  Eigen::VectorXd x = cfg.init ? *cfg.init : p.prior_mean();
  require_shape(x.size() == d, "MCMC initial point has wrong length");

  double lp = -std::numeric_limits<double>::infinity();
  try {
    lp = p.log_joint(x, y);
  } catch (const EvaluationError&) {
  }
  if (!std::isfinite(lp)) throw EvaluationError("MCMC initial point has non-finite log density");

  Rng rng(cfg.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);

  double log_scale = std::log(cfg.initial_scale > 0.0 ? cfg.initial_scale : 0.1 * p.prior_std().mean());
  Chain chain;
  chain.proposal_scale_history.reserve(static_cast<std::size_t>(cfg.n_total));
  chain.samples.reserve(static_cast<std::size_t>((cfg.n_total - cfg.n_burn) / cfg.thin));
  long accepted = 0;

  Eigen::VectorXd proposal(d);
  for (long t = 0; t < cfg.n_total; ++t) {
    const double scale = std::exp(log_scale);
    chain.proposal_scale_history.push_back(scale);
    for (Eigen::Index i = 0; i < d; ++i) proposal[i] = x[i] + scale * normal(rng);

    double lp_new = -std::numeric_limits<double>::infinity();
    try {
      lp_new = p.log_joint(proposal, y);
    } catch (const EvaluationError&) {
      // outside the model's support: reject
    }
    const double accept_prob = std::isfinite(lp_new) ? std::min(1.0, std::exp(lp_new - lp)) : 0.0;
    const bool accept = uniform(rng) < accept_prob;
    if (accept) {
      x = proposal;
      lp = lp_new;
    }

    if (t < cfg.n_burn) {
      log_scale += (accept_prob - cfg.target_accept) / std::pow(static_cast<double>(t + 1), 0.6);
    } else {
      if (accept) ++accepted;
      if ((t - cfg.n_burn + 1) % cfg.thin == 0) chain.samples.push_back(x);
    }
  }
  chain.acceptance_rate = static_cast<double>(accepted) / static_cast<double>(cfg.n_total - cfg.n_burn);
  return chain;
}

ChainSummary chain_diagnostics(std::span<const Eigen::VectorXd> samples)
{
  if (samples.size() < 10) throw DomainError("chain diagnostics need at least 10 samples");
  const auto n = static_cast<Eigen::Index>(samples.size());
  const Eigen::Index d = samples.front().size();
  Eigen::MatrixXd x(n, d);
  for (Eigen::Index t = 0; t < n; ++t) {
    require_shape(samples[static_cast<std::size_t>(t)].size() == d, "chain samples have inconsistent length");
    x.row(t) = samples[static_cast<std::size_t>(t)].transpose();
  }

  ChainSummary s;
  s.mean = x.colwise().mean().transpose();
  s.std.resize(d);
  s.lag1_autocorr.resize(d);
  s.ess.resize(d);
  s.degenerate.assign(static_cast<std::size_t>(d), false);

  for (Eigen::Index k = 0; k < d; ++k) {
    const Eigen::VectorXd c = x.col(k).array() - s.mean[k];
    const double ss = c.squaredNorm();
    s.std[k] = std::sqrt(ss / static_cast<double>(n - 1));
    if (!(ss > 0.0)) {
      s.degenerate[static_cast<std::size_t>(k)] = true;
      s.lag1_autocorr[k] = 0.0;
      s.ess[k] = 1.0;
      continue;
    }
    auto rho = [&](Eigen::Index lag) { return c.head(n - lag).dot(c.tail(n - lag)) / ss; };
    s.lag1_autocorr[k] = rho(1);

    // tau = -1 + 2 sum of positive consecutive-pair sums of autocorrelations
    double tau = -1.0;
    for (Eigen::Index m = 0; 2 * m + 1 < n; ++m) {
      const double pair = (m == 0 ? 1.0 : rho(2 * m)) + rho(2 * m + 1);
      if (!(pair > 0.0)) break;
      tau += 2.0 * pair;
    }
    s.ess[k] = static_cast<double>(n) / std::max(tau, 1e-12);
  }
  return s;
}

}  // namespace avi
