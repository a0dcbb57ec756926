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

#include "avi/cli.hpp"

#include "avi/errors.hpp"
#include "avi/mcmc.hpp"
#include "avi/metrics.hpp"
#include "avi/model_io.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <charconv>
#include <cmath>

namespace avi::cli {

using nlohmann::json;

namespace {

template <typename T>
T field(const json& j, const char* name, T fallback)
{
  if (!j.contains(name)) return fallback;
  try {
    return j.at(name).get<T>();
  } catch (const json::exception&) {
    throw UsageError(std::string("config field '") + name + "' has the wrong type");
  }
}

std::vector<std::size_t> hidden_field(const json& j, const char* name, const std::vector<std::size_t>& fallback)
{
  auto sizes = field<std::vector<std::size_t>>(j, name, fallback);
  for (auto s : sizes)
    if (s == 0) throw UsageError(std::string("config field '") + name + "' must hold positive sizes");
  return sizes;
}

json vec_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

json guide_json(const GuideParams& g)
{
  json chol = json::array();
  for (Eigen::Index r = 0; r < g.chol.rows(); ++r) chol.push_back(vec_json(g.chol.row(r).transpose()));
  return {{"mu", vec_json(g.mu)}, {"chol", chol}};
}

Problem problem_or_usage(const ProblemSpec& spec)
{
  try {
    return make_problem(spec);
  } catch (const std::invalid_argument& e) {
    throw UsageError(std::string("problem: ") + e.what());
  }
}

Eigen::VectorXd observation_or_usage(std::string_view text, std::size_t m)
{
  Eigen::VectorXd y = parse_real_list(text);
  if (static_cast<std::size_t>(y.size()) != m)
    throw UsageError("--y has " + std::to_string(y.size()) + " values, the problem expects " + std::to_string(m));
  return y;
}

ModelFile load_model(const std::string& path)
{
  const std::string text = read_file(path);
  try {
    return parse_model(text);
  } catch (const std::invalid_argument& e) {
    throw UsageError(path + ": " + e.what());
  }
}

int cmd_train(const std::string& config_path, std::ostream& out, std::ostream& err)
{
  const RunConfig rc = parse_run_config(read_file(config_path));
  const Problem problem = problem_or_usage(rc.problem);
  const long every = rc.log_every > 0 ? rc.log_every : std::max<long>(1, rc.train.n_iter / 20);
  const TrainResult result = train(problem, rc.arch, rc.train, [&](const TraceRecord& r) {
    if (r.iteration % every == 0)
      err << "iter " << r.iteration << "  V " << r.v_estimate << "  lr " << r.lr << "  |grad| " << r.grad_norm << "\n";
  });
  write_file_atomic(rc.model_out, serialize_model({problem.spec(), result.net, rc.train}));
  write_file_atomic(rc.trace_out, trace_csv(result.trace));
  out << "wrote " << rc.model_out << " and " << rc.trace_out << "\n";
  return kOk;
}

int cmd_infer(const std::string& model_path, const std::string& y_text, long n_samples, std::uint64_t seed,
              const std::string& out_path, const std::string& guide_out, std::ostream& out)
{
  if (n_samples < 0) throw UsageError("--samples must be >= 0");
  const ModelFile model = load_model(model_path);
  const Eigen::VectorXd y = observation_or_usage(y_text, model.net.m);
  const GuideParams g = amort_forward(model.net, y);
  const std::string guide_text = guide_json(g).dump() + "\n";
  out << guide_text;
  if (!guide_out.empty()) write_file_atomic(guide_out, guide_text);

  Rng rng = make_stream(seed, "infer");
  std::vector<Eigen::VectorXd> samples;
  samples.reserve(static_cast<std::size_t>(n_samples));
  for (long s = 0; s < n_samples; ++s) samples.push_back(guide_sample(g, standard_normal(rng, g.dim())));
  write_file_atomic(out_path, samples_csv(samples, model.net.d));
  return kOk;
}

json diagnostics_json(const Chain& chain)
{
  json j{{"n_kept", chain.samples.size()},
         {"acceptance_rate", chain.acceptance_rate},
         {"final_proposal_scale", chain.proposal_scale_history.empty() ? 0.0 : chain.proposal_scale_history.back()}};
  if (chain.samples.size() >= 10) {
    const ChainSummary s = chain_diagnostics(chain);
    j["mean"] = vec_json(s.mean);
    j["std"] = vec_json(s.std);
    j["lag1_autocorr"] = vec_json(s.lag1_autocorr);
    j["ess"] = vec_json(s.ess);
    j["degenerate"] = s.degenerate;
  }
  return j;
}

int cmd_mcmc(const ProblemSpec& spec, const std::string& y_text, McmcConfig cfg, const std::string& out_path,
             const std::string& diag_path, std::ostream& out)
{
  const Problem problem = problem_or_usage(spec);
  const Eigen::VectorXd y = observation_or_usage(y_text, problem.m());
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  const Chain chain = rwm_sample(problem, y, cfg);
  write_file_atomic(out_path, samples_csv(chain.samples, problem.d()));
  const json diag = diagnostics_json(chain);
  write_file_atomic(diag_path, diag.dump(1) + "\n");
  out << diag.dump() << "\n";
  return kOk;
}

int cmd_evaluate(const std::string& model_path, EvalConfig cfg, std::size_t n_samples, const std::string& prefix,
                 std::ostream& out, std::ostream& err)
{
  if (cfg.n_y == 0 || cfg.n_post == 0 || n_samples == 0) throw UsageError("--ny, --npost and --nsamples must be > 0");
  try {
    cfg.mcmc.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  const ModelFile model = load_model(model_path);
  const Problem problem = problem_or_usage(model.problem);
  if (problem.d() != model.net.d || problem.m() != model.net.m)
    throw UsageError("model dimensions do not match problem '" + problem.name() + "'");

  const KsReport ks = evaluate_ks(model.net, problem, cfg);
  const ResimReport resim = resim_error(model.net, problem, cfg.n_y, n_samples, cfg.seed);
  for (std::size_t i = 0; i < ks.failures.size(); ++i)
    if (!ks.failures[i].empty()) err << "observation " << i << ": MCMC failed: " << ks.failures[i] << "\n";

  json median = json::array();
  for (double v : ks.median_per_dim()) median.push_back(std::isfinite(v) ? json(v) : json(nullptr));
  const json report{{"problem", problem.name()},
                    {"n_y", cfg.n_y},
                    {"n_post", cfg.n_post},
                    {"n_samples", n_samples},
                    {"median_ks", median},
                    {"ks_histogram", ks.histogram(10)},
                    {"failed_observations", ks.failed_count()},
                    {"resim_error", resim.estimate}};
  write_file_atomic(prefix + "_ks.csv", ks_csv(ks, problem.d()));
  write_file_atomic(prefix + "_resim.csv", resim_csv(resim));
  write_file_atomic(prefix + "_report.json", report.dump(1) + "\n");
  out << report.dump() << "\n";
  return kOk;
}

}  // namespace

Eigen::VectorXd parse_real_list(std::string_view text)
{
  std::vector<double> values;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find(',', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view cell = text.substr(start, end - start);
    while (!cell.empty() && cell.front() == ' ') cell.remove_prefix(1);
    while (!cell.empty() && cell.back() == ' ') cell.remove_suffix(1);
    double v = 0.0;
    const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (cell.empty() || res.ec != std::errc() || res.ptr != cell.data() + cell.size() || !std::isfinite(v))
      throw UsageError("cannot parse '" + std::string(cell) + "' as a real number");
    values.push_back(v);
    start = end + 1;
  }
  return Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

RunConfig parse_run_config(std::string_view text)
{
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw UsageError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw UsageError("config must be a JSON object");
  if (!j.contains("problem")) throw UsageError("config field 'problem' is missing");

  RunConfig rc;
  try {
    rc.problem = parse_problem_spec(j.at("problem").dump());
  } catch (const std::invalid_argument& e) {
    throw UsageError(std::string("config field 'problem': ") + e.what());
  }
  const auto& names = problem_names();
  if (std::find(names.begin(), names.end(), rc.problem.name) == names.end())
    throw UsageError("config field 'problem' names unknown problem '" + rc.problem.name + "'");

  const AmortArch arch = default_arch(rc.problem.name);
  const auto hidden = hidden_field(j, "hidden", arch.mu_hidden);
  rc.arch.mu_hidden = hidden_field(j, "hidden_mu", hidden);
  rc.arch.diag_hidden = hidden_field(j, "hidden_diag", hidden);
  rc.arch.offdiag_hidden = hidden_field(j, "hidden_offdiag", hidden);

  TrainConfig& t = rc.train;
  t = default_train_config(rc.problem.name);
  t.n_iter = field(j, "n_iter", t.n_iter);
  t.n_y = field(j, "n_y", t.n_y);
  t.n_z = field(j, "n_z", t.n_z);
  t.eta0 = field(j, "eta0", t.eta0);
  t.alpha = field(j, "alpha", t.alpha);
  t.r = field(j, "r", t.r);
  t.seed = field(j, "seed", t.seed);
  try {
    t.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(std::string("config field ") + e.what());
  }
  rc.model_out = field(j, "model_out", rc.model_out);
  rc.trace_out = field(j, "trace_out", rc.trace_out);
  rc.log_every = field(j, "log_every", rc.log_every);
  return rc;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
  CLI::App app{"Amortized variational inference for Bayesian inverse maps"};
  app.require_subcommand(1);

  std::string config_path;
  auto* train_cmd = app.add_subcommand("train", "train an amortization network from a JSON config");
  train_cmd->add_option("--config", config_path, "training config (JSON)")->required();

  std::string model_path;
  std::string y_text;
  long n_samples = 1000;
  std::uint64_t seed = 0;
  std::string out_path;
  std::string guide_out;
  auto* infer_cmd = app.add_subcommand("infer", "posterior of one observation from a trained model");
  infer_cmd->add_option("--model", model_path, "model file")->required();
  infer_cmd->add_option("--y", y_text, "observation, comma separated")->required();
  infer_cmd->add_option("--samples", n_samples, "posterior samples to write")->capture_default_str();
  infer_cmd->add_option("--seed", seed, "random seed")->capture_default_str();
  infer_cmd->add_option("--out", out_path, "samples CSV")->default_val("posterior.csv");
  infer_cmd->add_option("--guide-out", guide_out, "also write the guide parameters JSON here");

  std::string problem_name;
  std::string problem_file;
  McmcConfig mcmc;
  std::string diag_path;
  auto* mcmc_cmd = app.add_subcommand("mcmc", "random-walk Metropolis baseline for one observation");
  auto* problem_opt = mcmc_cmd->add_option("--problem", problem_name, "registered problem name");
  mcmc_cmd->add_option("--problem-file", problem_file, "problem description JSON (e.g. a custom lingauss)")
      ->excludes(problem_opt);
  mcmc_cmd->add_option("--y", y_text, "observation, comma separated")->required();
  mcmc_cmd->add_option("--total", mcmc.n_total, "total steps")->capture_default_str();
  mcmc_cmd->add_option("--burn", mcmc.n_burn, "burn-in steps")->capture_default_str();
  mcmc_cmd->add_option("--thin", mcmc.thin, "thinning interval")->capture_default_str();
  mcmc_cmd->add_option("--target-accept", mcmc.target_accept, "burn-in acceptance target")->capture_default_str();
  mcmc_cmd->add_option("--seed", seed, "random seed")->capture_default_str();
  mcmc_cmd->add_option("--out", out_path, "chain CSV")->default_val("chain.csv");
  mcmc_cmd->add_option("--diagnostics", diag_path, "diagnostics JSON")->default_val("chain_diagnostics.json");

  EvalConfig eval;
  std::size_t resim_samples = 1000;
  std::string prefix;
  auto* eval_cmd = app.add_subcommand("evaluate", "KS and re-simulation metrics of a trained model");
  eval_cmd->add_option("--model", model_path, "model file")->required();
  eval_cmd->add_option("--ny", eval.n_y, "evaluation observations")->capture_default_str();
  eval_cmd->add_option("--npost", eval.n_post, "guide samples per observation for KS")->capture_default_str();
  eval_cmd->add_option("--nsamples", resim_samples, "guide samples per observation for re-simulation")
      ->capture_default_str();
  eval_cmd->add_option("--total", eval.mcmc.n_total, "MCMC total steps")->capture_default_str();
  eval_cmd->add_option("--burn", eval.mcmc.n_burn, "MCMC burn-in steps")->capture_default_str();
  eval_cmd->add_option("--thin", eval.mcmc.thin, "MCMC thinning interval")->capture_default_str();
  eval_cmd->add_option("--seed", seed, "random seed")->capture_default_str();
  eval_cmd->add_option("--out-prefix", prefix, "output prefix")->default_val("eval");

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n";
    return kUsage;
  }

  try {
    if (*train_cmd) return cmd_train(config_path, out, err);
    if (*infer_cmd) return cmd_infer(model_path, y_text, n_samples, seed, out_path, guide_out, out);
    if (*mcmc_cmd) {
      ProblemSpec spec;
      if (!problem_file.empty()) {
        try {
          spec = parse_problem_spec(read_file(problem_file));
        } catch (const std::invalid_argument& e) {
          throw UsageError(problem_file + ": " + e.what());
        }
      } else if (!problem_name.empty()) {
        spec.name = problem_name;
      } else {
        throw UsageError("mcmc needs --problem or --problem-file");
      }
      mcmc.seed = seed;
      return cmd_mcmc(spec, y_text, mcmc, out_path, diag_path, out);
    }
    if (*eval_cmd) {
      eval.seed = seed;
      return cmd_evaluate(model_path, eval, resim_samples, prefix, out, err);
    }
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const NumericalAbort& e) {
    err << "numerical abort: " << e.what() << "\n";
    return kNumerical;
  } catch (const EvaluationError& e) {
    err << "numerical abort: " << e.what() << "\n";
    return kNumerical;
  } catch (const IoError& e) {
    err << "i/o error: " << e.what() << "\n";
    return kIo;
  }
  return kUsage;
}

int run(int argc, char** argv, std::ostream& out, std::ostream& err)
{
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args, out, err);
}

}  // namespace avi::cli
