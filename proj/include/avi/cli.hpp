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

// Command-line surface: train, infer, mcmc, evaluate.
//
// Exit codes: 0 success, 2 usage error, 3 numerical abort, 4 I/O error.
// Every command derives all randomness from its --seed (or the config seed)
// through named substreams, so identical invocations write identical files.

#include "avi/guide.hpp"
#include "avi/problems.hpp"
#include "avi/trainer.hpp"

#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace avi::cli {

enum ExitCode : int { kOk = 0, kUsage = 2, kNumerical = 3, kIo = 4 };

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  ProblemSpec problem;
  AmortArch arch;
  TrainConfig train;
  std::string model_out = "model.json";
  std::string trace_out = "trace.csv";
  long log_every = 0;  // 0: about twenty progress lines per run
};

// Parses a training config document; throws UsageError naming the bad field.
RunConfig parse_run_config(std::string_view text);

// Parses "1.5,-2,3e-1".
Eigen::VectorXd parse_real_list(std::string_view text);

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace avi::cli
