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

#include "avi/metrics.hpp"

#include "avi/errors.hpp"

#include <algorithm>
#include <cmath>
#include <exception>

namespace avi {

double ks_statistic(std::span<const double> a, std::span<const double> b)
{
  if (a.empty() || b.empty()) throw DomainError("KS statistic needs two non-empty samples");
  std::vector<double> sa(a.begin(), a.end());
  std::vector<double> sb(b.begin(), b.end());
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  const auto na = static_cast<double>(sa.size());
  const auto nb = static_cast<double>(sb.size());

  std::size_t i = 0;
  std::size_t j = 0;
  double sup = 0.0;
  while (i < sa.size() && j < sb.size()) {
    const double x = std::min(sa[i], sb[j]);
    while (i < sa.size() && sa[i] <= x) ++i;
    while (j < sb.size() && sb[j] <= x) ++j;
    sup = std::max(sup, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return sup;
}

std::vector<double> ks_per_dim(std::span<const Eigen::VectorXd> a, std::span<const Eigen::VectorXd> b)
{
  if (a.empty() || b.empty()) throw DomainError("KS statistic needs two non-empty samples");
  const Eigen::Index d = a.front().size();
  std::vector<double> out;
  std::vector<double> ca(a.size());
  std::vector<double> cb(b.size());
  for (Eigen::Index k = 0; k < d; ++k) {
    for (std::size_t i = 0; i < a.size(); ++i) ca[i] = a[i][k];
    for (std::size_t i = 0; i < b.size(); ++i) cb[i] = b[i][k];
    out.push_back(ks_statistic(ca, cb));
  }
  return out;
}

std::size_t KsReport::failed_count() const
{
  return static_cast<std::size_t>(std::count_if(failures.begin(), failures.end(), [](const auto& f) { return !f.empty(); }));
}

Eigen::VectorXd KsReport::median_per_dim() const
{
  std::size_t d = 0;
  for (const auto& row : ks) d = std::max(d, row.size());
  Eigen::VectorXd med = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(d), std::nan(""));
  for (std::size_t k = 0; k < d; ++k) {
    std::vector<double> col;
    for (const auto& row : ks)
      if (row.size() == d) col.push_back(row[k]);
    if (col.empty()) continue;
    std::sort(col.begin(), col.end());
    const std::size_t h = col.size() / 2;
    med[static_cast<Eigen::Index>(k)] = col.size() % 2 ? col[h] : 0.5 * (col[h - 1] + col[h]);
  }
  return med;
}

std::vector<std::vector<std::size_t>> KsReport::histogram(std::size_t bins) const
{
  std::size_t d = 0;
  for (const auto& row : ks) d = std::max(d, row.size());
  std::vector<std::vector<std::size_t>> counts(d, std::vector<std::size_t>(bins, 0));
  for (const auto& row : ks)
    for (std::size_t k = 0; k < row.size(); ++k) {
      const auto b = std::min(bins - 1, static_cast<std::size_t>(row[k] * static_cast<double>(bins)));
      ++counts[k][b];
    }
  return counts;
}

std::vector<DataDraw> draw_evaluation_data(const Problem& p, std::size_t n_y, std::uint64_t seed)
{
  Rng rng = make_stream(seed, "eval/data");
  std::vector<DataDraw> draws;
  draws.reserve(n_y);
  for (std::size_t i = 0; i < n_y; ++i) draws.push_back(p.sample_data(rng));
  return draws;
}

PosteriorSampler guide_sampler(const AmortNet& net)
{
  return [&net](const DataDraw& draw, std::size_t n, Rng& rng) {
    const GuideParams g = amort_forward(net, draw.y);
    std::vector<Eigen::VectorXd> out;
    out.reserve(n);
    for (std::size_t s = 0; s < n; ++s) out.push_back(guide_sample(g, standard_normal(rng, g.dim())));
    return out;
  };
}

KsReport evaluate_ks(const AmortNet& net, const Problem& p, const EvalConfig& cfg, Execution exec)
{
  require_shape(net.d == p.d() && net.m == p.m(), "network dimensions do not match the problem");
  KsReport report;
  report.problem = p.name();
  report.n_post = cfg.n_post;
  report.draws = draw_evaluation_data(p, cfg.n_y, cfg.seed);
  report.ks.assign(cfg.n_y, {});
  report.failures.assign(cfg.n_y, {});
  const PosteriorSampler sample_guide = guide_sampler(net);

  auto one = [&](std::size_t i) {
    try {
      Rng rng = make_stream(cfg.seed, "eval/guide", i);
      const auto guide = sample_guide(report.draws[i], cfg.n_post, rng);
      McmcConfig mc = cfg.mcmc;
      mc.seed = substream_seed(cfg.seed, "eval/mcmc", i);
      const Chain chain = rwm_sample(p, report.draws[i].y, mc);
      if (chain.samples.size() < cfg.n_post) {
        report.failures[i] = "chain kept " + std::to_string(chain.samples.size()) + " samples, need " +
                             std::to_string(cfg.n_post);
        return;
      }
      report.ks[i] = ks_per_dim(guide, chain.samples);
    } catch (const std::exception& e) {
      report.failures[i] = e.what();
      if (report.failures[i].empty()) report.failures[i] = "unknown failure";
    }
  };

  const auto n = static_cast<long>(cfg.n_y);
  if (exec == Execution::parallel) {
#pragma omp parallel for schedule(dynamic)
    for (long i = 0; i < n; ++i) one(static_cast<std::size_t>(i));
  } else {
    for (long i = 0; i < n; ++i) one(static_cast<std::size_t>(i));
  }
  return report;
}

namespace {

double mean_discrepancy(const Problem& p, const DataDraw& draw, std::span<const Eigen::VectorXd> samples,
                        std::size_t i)
{
  const Eigen::VectorXd f_gt = p.forward(draw.xi_gt);
  double sum = 0.0;
  for (std::size_t j = 0; j < samples.size(); ++j) {
    try {
      sum += (p.forward(samples[j]) - f_gt).norm();
    } catch (const EvaluationError& e) {
      throw EvaluationError("resim sample (" + std::to_string(i) + ", " + std::to_string(j) + "): " + e.what());
    }
  }
  return sum / static_cast<double>(samples.size());
}

ResimReport finish(std::vector<double> per_obs, std::size_t n_samples)
{
  ResimReport r;
  r.n_y = per_obs.size();
  r.n_samples = n_samples;
  double sum = 0.0;
  for (double v : per_obs) sum += v;
  r.estimate = sum / static_cast<double>(per_obs.size());
  r.per_observation = std::move(per_obs);
  return r;
}

}  // namespace

ResimReport resim_error(const Problem& p, std::span<const DataDraw> draws,
                        std::span<const std::vector<Eigen::VectorXd>> samples)
{
  require_shape(!draws.empty() && draws.size() == samples.size(), "need one sample set per observation");
  const std::size_t n_samples = samples.front().size();
  std::vector<double> per_obs;
  for (std::size_t i = 0; i < draws.size(); ++i) {
    require_shape(samples[i].size() == n_samples && n_samples > 0, "every observation needs the same sample count");
    per_obs.push_back(mean_discrepancy(p, draws[i], samples[i], i));
  }
  return finish(std::move(per_obs), n_samples);
}

ResimReport resim_error(const Problem& p, const PosteriorSampler& sampler, std::size_t n_y, std::size_t n_samples,
                        std::uint64_t seed, Execution exec)
{
  require_shape(n_y > 0 && n_samples > 0, "re-simulation needs n_y > 0 and n_samples > 0");
  const auto draws = draw_evaluation_data(p, n_y, seed);
  std::vector<double> per_obs(n_y);
  std::vector<std::exception_ptr> errors(n_y);

  auto one = [&](std::size_t i) {
    try {
      Rng rng = make_stream(seed, "eval/guide", i);
      const auto samples = sampler(draws[i], n_samples, rng);
      require_shape(samples.size() == n_samples, "sampler returned the wrong number of samples");
      per_obs[i] = mean_discrepancy(p, draws[i], samples, i);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  };

  const auto n = static_cast<long>(n_y);
  if (exec == Execution::parallel) {
#pragma omp parallel for schedule(dynamic)
    for (long i = 0; i < n; ++i) one(static_cast<std::size_t>(i));
  } else {
    for (long i = 0; i < n; ++i) one(static_cast<std::size_t>(i));
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  return finish(std::move(per_obs), n_samples);
}

ResimReport resim_error(const AmortNet& net, const Problem& p, std::size_t n_y, std::size_t n_samples,
                        std::uint64_t seed, Execution exec)
{
  require_shape(net.d == p.d() && net.m == p.m(), "network dimensions do not match the problem");
  return resim_error(p, guide_sampler(net), n_y, n_samples, seed, exec);
}

}  // namespace avi
