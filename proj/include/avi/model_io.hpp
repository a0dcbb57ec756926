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

// File formats.
//
// ModelFile: one JSON document
//   { "format_version": 1, "problem": {...}, "d": .., "m": ..,
//     "heads": { "mu": {"layers": [...], "params": [...]}, "diag": {...}, "offdiag": {...} | null },
//     "train_config": {...}, "seed": .. }
// with parameters in nn canonical order and shortest round-trip decimals.
//
// CSV files (comma separated, one header line):
//   samples  xi_1,...,xi_d
//   trace    iter,v,lr,grad_norm
//   ks       obs,status,ks_1,...,ks_d
//   resim    obs,mean_discrepancy

#include "avi/guide.hpp"
#include "avi/metrics.hpp"
#include "avi/problems.hpp"
#include "avi/trainer.hpp"

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace avi {

inline constexpr int kModelFormatVersion = 1;

struct ModelFile {
  ProblemSpec problem;
  AmortNet net;
  TrainConfig train_config;
};

std::string serialize_model(const ModelFile& model);
// Throws std::invalid_argument on malformed or inconsistent documents.
ModelFile parse_model(std::string_view text);

std::string serialize_problem_spec(const ProblemSpec& spec);
ProblemSpec parse_problem_spec(std::string_view text);

std::string format_double(double v);

std::string samples_csv(std::span<const Eigen::VectorXd> samples, std::size_t d);
std::vector<Eigen::VectorXd> parse_samples_csv(std::string_view text);
std::string trace_csv(std::span<const TraceRecord> trace);
std::vector<TraceRecord> parse_trace_csv(std::string_view text);
std::string ks_csv(const KsReport& report, std::size_t d);
std::string resim_csv(const ResimReport& report);

// Writes through a temporary file in the same directory and renames it into place.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);
std::string read_file(const std::filesystem::path& path);

}  // namespace avi
