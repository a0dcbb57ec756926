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

#include "avi/model_io.hpp"

#include "avi/errors.hpp"

#include "json.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <system_error>

namespace avi {

using nlohmann::json;

namespace {

json vector_to_json(const Eigen::VectorXd& v) { return json(std::vector<double>(v.data(), v.data() + v.size())); }

Eigen::VectorXd vector_from_json(const json& j)
{
  const auto values = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

json matrix_to_json(const Eigen::MatrixXd& m)
{
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) rows.push_back(vector_to_json(m.row(r).transpose()));
  return rows;
}

Eigen::MatrixXd matrix_from_json(const json& j)
{
  if (!j.is_array() || j.empty()) throw std::invalid_argument("matrix must be a non-empty array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = static_cast<Eigen::Index>(j[0].size());
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto row = j[static_cast<std::size_t>(r)].get<std::vector<double>>();
    if (static_cast<Eigen::Index>(row.size()) != cols) throw std::invalid_argument("ragged matrix rows");
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = row[static_cast<std::size_t>(c)];
  }
  return m;
}

json problem_to_json(const ProblemSpec& spec)
{
  json j{{"name", spec.name}};
  if (spec.name == "lingauss") {
    j["A"] = matrix_to_json(spec.a);
    j["gamma"] = spec.gamma;
    j["prior_mean"] = vector_to_json(spec.prior_mean);
    j["prior_std"] = vector_to_json(spec.prior_std);
  }
  return j;
}

ProblemSpec problem_from_json(const json& j)
{
  ProblemSpec spec;
  if (j.is_string()) {
    spec.name = j.get<std::string>();
    return spec;
  }
  if (!j.is_object() || !j.contains("name")) throw std::invalid_argument("problem: expected a name or an object with \"name\"");
  spec.name = j.at("name").get<std::string>();
  if (j.contains("A")) spec.a = matrix_from_json(j.at("A"));
  if (j.contains("gamma")) spec.gamma = j.at("gamma").get<double>();
  if (j.contains("prior_mean")) spec.prior_mean = vector_from_json(j.at("prior_mean"));
  if (j.contains("prior_std")) spec.prior_std = vector_from_json(j.at("prior_std"));
  return spec;
}

json head_to_json(const nn::MlpParams& head)
{
  json layers = json::array();
  for (const auto& s : head.spec)
    layers.push_back({{"input_dim", s.input_dim}, {"output_dim", s.output_dim}, {"activation", nn::to_string(s.activation)}});
  return {{"layers", layers}, {"params", vector_to_json(nn::flatten(head))}};
}

nn::MlpParams head_from_json(const json& j)
{
  std::vector<nn::LayerSpec> spec;
  for (const auto& l : j.at("layers"))
    spec.push_back({l.at("input_dim").get<std::size_t>(), l.at("output_dim").get<std::size_t>(),
                    nn::activation_from_string(l.at("activation").get<std::string>())});
  const auto params = j.at("params").get<std::vector<double>>();
  return nn::unflatten(spec, params);
}

json train_config_to_json(const TrainConfig& c)
{
  return {{"n_iter", c.n_iter}, {"n_y", c.n_y},     {"n_z", c.n_z},
          {"eta0", c.eta0},     {"alpha", c.alpha}, {"r", c.r},
          {"seed", c.seed},     {"adam_beta1", c.adam_beta1}, {"adam_beta2", c.adam_beta2},
          {"adam_eps", c.adam_eps}};
}

TrainConfig train_config_from_json(const json& j)
{
  TrainConfig c;
  c.n_iter = j.value("n_iter", c.n_iter);
  c.n_y = j.value("n_y", c.n_y);
  c.n_z = j.value("n_z", c.n_z);
  c.eta0 = j.value("eta0", c.eta0);
  c.alpha = j.value("alpha", c.alpha);
  c.r = j.value("r", c.r);
  c.seed = j.value("seed", c.seed);
  c.adam_beta1 = j.value("adam_beta1", c.adam_beta1);
  c.adam_beta2 = j.value("adam_beta2", c.adam_beta2);
  c.adam_eps = j.value("adam_eps", c.adam_eps);
  return c;
}

std::vector<std::string_view> split(std::string_view s, char sep)
{
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::vector<std::string_view> lines(std::string_view text)
{
  std::vector<std::string_view> out;
  for (auto line : split(text, '\n')) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!line.empty()) out.push_back(line);
  }
  return out;
}

double parse_double(std::string_view s)
{
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw std::invalid_argument("not a number: '" + std::string(s) + "'");
  return v;
}

}  // namespace

std::string format_double(double v)
{
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string serialize_model(const ModelFile& model)
{
  const AmortNet& net = model.net;
  json j;
  j["format_version"] = kModelFormatVersion;
  j["problem"] = problem_to_json(model.problem);
  j["d"] = net.d;
  j["m"] = net.m;
  j["heads"] = {{"mu", head_to_json(net.head_mu)},
                {"diag", head_to_json(net.head_diag)},
                {"offdiag", net.head_offdiag ? head_to_json(*net.head_offdiag) : json(nullptr)}};
  j["train_config"] = train_config_to_json(model.train_config);
  j["seed"] = model.train_config.seed;
  return j.dump(1) + "\n";
}

ModelFile parse_model(std::string_view text)
{
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("model file is not valid JSON: ") + e.what());
  }
  try {
    if (j.at("format_version").get<int>() != kModelFormatVersion)
      throw std::invalid_argument("unsupported model format_version " + j.at("format_version").dump());
    ModelFile model;
    model.problem = problem_from_json(j.at("problem"));
    model.net.d = j.at("d").get<std::size_t>();
    model.net.m = j.at("m").get<std::size_t>();
    const json& heads = j.at("heads");
    model.net.head_mu = head_from_json(heads.at("mu"));
    model.net.head_diag = head_from_json(heads.at("diag"));
    if (heads.contains("offdiag") && !heads.at("offdiag").is_null())
      model.net.head_offdiag = head_from_json(heads.at("offdiag"));
    model.train_config = train_config_from_json(j.at("train_config"));
    validate_net(model.net);
    return model;
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("malformed model file: ") + e.what());
  } catch (const ShapeError& e) {
    throw std::invalid_argument(std::string("inconsistent model file: ") + e.what());
  }
}

std::string serialize_problem_spec(const ProblemSpec& spec) { return problem_to_json(spec).dump(1) + "\n"; }

ProblemSpec parse_problem_spec(std::string_view text)
{
  try {
    return problem_from_json(json::parse(text));
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("malformed problem description: ") + e.what());
  }
}

std::string samples_csv(std::span<const Eigen::VectorXd> samples, std::size_t d)
{
  std::string out;
  for (std::size_t k = 0; k < d; ++k) out += (k ? ",xi_" : "xi_") + std::to_string(k + 1);
  out += '\n';
  for (const auto& s : samples) {
    for (Eigen::Index k = 0; k < s.size(); ++k) {
      if (k) out += ',';
      out += format_double(s[k]);
    }
    out += '\n';
  }
  return out;
}

std::vector<Eigen::VectorXd> parse_samples_csv(std::string_view text)
{
  const auto rows = lines(text);
  if (rows.empty()) throw std::invalid_argument("empty samples CSV");
  const auto d = split(rows[0], ',').size();
  std::vector<Eigen::VectorXd> out;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto cells = split(rows[r], ',');
    if (cells.size() != d) throw std::invalid_argument("samples CSV row " + std::to_string(r) + " has wrong width");
    Eigen::VectorXd v(static_cast<Eigen::Index>(d));
    for (std::size_t k = 0; k < d; ++k) v[static_cast<Eigen::Index>(k)] = parse_double(cells[k]);
    out.push_back(std::move(v));
  }
  return out;
}

std::string trace_csv(std::span<const TraceRecord> trace)
{
  std::string out = "iter,v,lr,grad_norm\n";
  for (const auto& r : trace)
    out += std::to_string(r.iteration) + ',' + format_double(r.v_estimate) + ',' + format_double(r.lr) + ',' +
           format_double(r.grad_norm) + '\n';
  return out;
}

std::vector<TraceRecord> parse_trace_csv(std::string_view text)
{
  const auto rows = lines(text);
  if (rows.empty() || rows[0] != "iter,v,lr,grad_norm") throw std::invalid_argument("trace CSV header mismatch");
  std::vector<TraceRecord> out;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto cells = split(rows[r], ',');
    if (cells.size() != 4) throw std::invalid_argument("trace CSV row " + std::to_string(r) + " has wrong width");
    out.push_back({static_cast<long>(parse_double(cells[0])), parse_double(cells[1]), parse_double(cells[2]),
                   parse_double(cells[3])});
  }
  return out;
}

std::string ks_csv(const KsReport& report, std::size_t d)
{
  std::string out = "obs,status";
  for (std::size_t k = 0; k < d; ++k) out += ",ks_" + std::to_string(k + 1);
  out += '\n';
  for (std::size_t i = 0; i < report.ks.size(); ++i) {
    out += std::to_string(i) + ',' + (report.failures[i].empty() ? "ok" : "failed");
    for (std::size_t k = 0; k < d; ++k) out += ',' + (k < report.ks[i].size() ? format_double(report.ks[i][k]) : "");
    out += '\n';
  }
  return out;
}

std::string resim_csv(const ResimReport& report)
{
  std::string out = "obs,mean_discrepancy\n";
  for (std::size_t i = 0; i < report.per_observation.size(); ++i)
    out += std::to_string(i) + ',' + format_double(report.per_observation[i]) + '\n';
  return out;
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content)
{
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw IoError("failed writing " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw IoError("cannot move " + tmp.string() + " to " + path.string());
  }
}

std::string read_file(const std::filesystem::path& path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace avi
