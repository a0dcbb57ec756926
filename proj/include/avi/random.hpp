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

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <string_view>

namespace avi {

using Rng = std::mt19937_64;

// Seeds for independent named substreams of one user seed. Every command
// splits its --seed into substreams such as "train/init", "train/data",
// "train/latent", "eval/data" so that consuming more draws from one stream
// never shifts another.
std::uint64_t substream_seed(std::uint64_t seed, std::string_view name, std::uint64_t index = 0);

Rng make_stream(std::uint64_t seed, std::string_view name, std::uint64_t index = 0);

Eigen::VectorXd standard_normal(Rng& rng, Eigen::Index n);

}  // namespace avi
