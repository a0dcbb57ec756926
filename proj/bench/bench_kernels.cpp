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

// Serial reference vs OpenMP kernels for the objective gradient and the
// re-simulation error. Run with OMP_NUM_THREADS set to compare scaling.

#include "avi/metrics.hpp"
#include "avi/trainer.hpp"

#include <benchmark/benchmark.h>

#include <string>
#include <vector>

namespace {

struct Batch {
  avi::Problem problem;
  avi::AmortNet net;
  std::vector<Eigen::VectorXd> ys;
  std::vector<Eigen::VectorXd> zs;
};

Batch make_batch(const std::string& name, std::size_t n_y, std::size_t n_z)
{
  avi::Problem p = avi::make_problem(name);
  avi::AmortNet net = avi::make_amort_net(p.d(), p.m(), avi::default_arch(name), 1);
  avi::Rng rng(2);
  std::vector<Eigen::VectorXd> ys;
  std::vector<Eigen::VectorXd> zs;
  for (std::size_t i = 0; i < n_y; ++i) ys.push_back(p.sample_data(rng).y);
  for (std::size_t j = 0; j < n_z; ++j) zs.push_back(avi::standard_normal(rng, static_cast<Eigen::Index>(p.d())));
  return {std::move(p), std::move(net), std::move(ys), std::move(zs)};
}

void BM_GradV_Serial(benchmark::State& state, const std::string& name, std::size_t n_y)
{
  const Batch b = make_batch(name, n_y, 5);
  for (auto _ : state) benchmark::DoNotOptimize(avi::grad_V_serial(b.net, b.problem, b.ys, b.zs));
}

void BM_GradV_Parallel(benchmark::State& state, const std::string& name, std::size_t n_y)
{
  const Batch b = make_batch(name, n_y, 5);
  for (auto _ : state) benchmark::DoNotOptimize(avi::grad_V(b.net, b.problem, b.ys, b.zs));
}

void BM_Resim(benchmark::State& state, avi::Execution exec)
{
  const Batch b = make_batch("elliptic", 1, 1);
  for (auto _ : state) benchmark::DoNotOptimize(avi::resim_error(b.net, b.problem, 16, 200, 3, exec));
}

}  // namespace

BENCHMARK_CAPTURE(BM_GradV_Serial, ik, std::string("ik"), 32);
BENCHMARK_CAPTURE(BM_GradV_Parallel, ik, std::string("ik"), 32);
BENCHMARK_CAPTURE(BM_GradV_Serial, elliptic, std::string("elliptic"), 64);
BENCHMARK_CAPTURE(BM_GradV_Parallel, elliptic, std::string("elliptic"), 64);
BENCHMARK_CAPTURE(BM_Resim, serial, avi::Execution::serial);
BENCHMARK_CAPTURE(BM_Resim, parallel, avi::Execution::parallel);

BENCHMARK_MAIN();
