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
#include "avi/model_io.hpp"

#include "doctest.h"
#include "json.hpp"
#include "test_support.hpp"

#include <unistd.h>

#include <algorithm>
#include <filesystem>
#include <sstream>

using namespace avi;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Result {
  int code = 0;
  std::string out;
  std::string err;
};

Result invoke(const std::vector<std::string>& args)
{
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path workdir()
{
  static const fs::path dir = [] {
    const fs::path d = fs::temp_directory_path() / ("avi_cli_test_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string path(const std::string& name) { return (workdir() / name).string(); }

void write(const std::string& name, const std::string& text) { write_file_atomic(path(name), text); }

std::string slurp(const std::string& name) { return read_file(path(name)); }

// Trains the quick lingauss model once and returns its path.
const std::string& quick_model()
{
  static const std::string model = [] {
    write("quick.json", R"({"problem": "lingauss", "n_iter": 2000, "r": 1000, "alpha": 0.1, "seed": 3, "model_out": ")" +
                            path("quick_model.json") + R"(", "trace_out": ")" + path("quick_trace.csv") + "\"}");
    const Result r = invoke({"train", "--config", path("quick.json")});
    REQUIRE(r.code == 0);
    return path("quick_model.json");
  }();
  return model;
}

}  // namespace

TEST_CASE("config errors are usage errors naming the field")
{
  CHECK_THROWS_WITH_AS(cli::parse_run_config(R"({"n_iter": 10})"), doctest::Contains("problem"), cli::UsageError);
  CHECK_THROWS_WITH_AS(cli::parse_run_config(R"({"problem": "nope"})"), doctest::Contains("problem"), cli::UsageError);
  CHECK_THROWS_WITH_AS(cli::parse_run_config(R"({"problem": "ik", "n_iter": "many"})"), doctest::Contains("n_iter"),
                       cli::UsageError);
  CHECK_THROWS_WITH_AS(cli::parse_run_config(R"({"problem": "ik", "n_y": 0})"), doctest::Contains("n_y"),
                       cli::UsageError);
  CHECK_THROWS_WITH_AS(cli::parse_run_config(R"({"problem": "ik", "hidden": [4, 0]})"), doctest::Contains("hidden"),
                       cli::UsageError);
  CHECK_THROWS_AS(cli::parse_run_config("not json"), cli::UsageError);

  const cli::RunConfig rc = cli::parse_run_config(R"({"problem": "elliptic", "hidden_mu": [7], "seed": 4})");
  CHECK(rc.arch.mu_hidden == std::vector<std::size_t>{7});
  CHECK(rc.arch.diag_hidden == std::vector<std::size_t>{50, 40, 30, 20});
  CHECK(rc.train.n_iter == 35000);
  CHECK(rc.train.seed == 4);

  write("missing.json", R"({"n_iter": 10})");
  const Result r = invoke({"train", "--config", path("missing.json")});
  CHECK(r.code == cli::kUsage);
  CHECK(r.err.find("problem") != std::string::npos);
  CHECK(invoke({"bogus"}).code == cli::kUsage);
  CHECK(invoke({}).code == cli::kUsage);
  CHECK(invoke({"train", "--config", path("does_not_exist.json")}).code == cli::kIo);
}

TEST_CASE("parse_real_list")
{
  CHECK(cli::parse_real_list("1.91,0.08") == Eigen::Vector2d(1.91, 0.08));
  CHECK(cli::parse_real_list(" -1e-3 , 2") == Eigen::Vector2d(-1e-3, 2));
  CHECK_THROWS_AS(cli::parse_real_list("1,,2"), cli::UsageError);
  CHECK_THROWS_AS(cli::parse_real_list("1,x"), cli::UsageError);
  CHECK_THROWS_AS(cli::parse_real_list(""), cli::UsageError);
}

TEST_CASE("train writes a model that round-trips bitwise and a parseable trace")
{
  const std::string text = read_file(quick_model());
  const ModelFile model = parse_model(text);
  CHECK(serialize_model(model) == text);
  CHECK(model.problem.name == "lingauss");
  CHECK(model.net.d == 2);
  CHECK(model.train_config.n_iter == 2000);

  const std::string trace_text = slurp("quick_trace.csv");
  CHECK(trace_text.rfind("iter,v,lr,grad_norm\n", 0) == 0);
  const auto trace = parse_trace_csv(trace_text);
  REQUIRE(trace.size() == 2000);
  CHECK(trace.front().iteration == 1);
  CHECK(trace.back().lr == doctest::Approx(1e-3));

  // same config, in process
  TrainConfig cfg = default_train_config("lingauss");
  cfg.n_iter = 2000;
  cfg.r = 1000;
  cfg.alpha = 0.1;
  cfg.seed = 3;
  const TrainResult direct = train(make_problem("lingauss"), default_arch("lingauss"), cfg);
  CHECK(direct.net.flatten() == model.net.flatten());
  CHECK(trace.back().v_estimate == direct.trace.back().v_estimate);
}

TEST_CASE("infer prints the guide and writes samples")
{
  const Eigen::Vector2d y(0.6, -0.9);
  const Result r = invoke({"infer", "--model", quick_model(), "--y", "0.6,-0.9", "--samples", "1000", "--seed", "5",
                        "--out", path("post.csv"), "--guide-out", path("guide.json")});
  REQUIRE(r.code == 0);
  const json g = json::parse(r.out);
  CHECK(json::parse(slurp("guide.json")) == g);
  Eigen::MatrixXd a(2, 2);
  a << 1.0, 0.5, -0.3, 0.8;
  const LinearGaussianPosterior post =
      linear_gaussian_posterior(a, 0.5, Eigen::VectorXd::Zero(2), Eigen::VectorXd::Ones(2), y);
  for (int k = 0; k < 2; ++k) CHECK(std::abs(g["mu"][k].get<double>() - post.mean[k]) < 0.05);
  CHECK(g["chol"][0][1].get<double>() == 0.0);
  CHECK(g["chol"][0][0].get<double>() > 0.0);

  const std::string csv = slurp("post.csv");
  CHECK(csv.rfind("xi_1,xi_2\n", 0) == 0);
  const auto samples = parse_samples_csv(csv);
  REQUIRE(samples.size() == 1000);
  Eigen::Vector2d mean = Eigen::Vector2d::Zero();
  for (const auto& s : samples) mean += s;
  mean /= 1000.0;
  CHECK((mean - post.mean).lpNorm<Eigen::Infinity>() < 0.1);

  const Result again = invoke({"infer", "--model", quick_model(), "--y", "0.6,-0.9", "--samples", "1000", "--seed", "5",
                            "--out", path("post2.csv")});
  CHECK(again.code == 0);
  CHECK(slurp("post2.csv") == csv);

  const Result none = invoke({"infer", "--model", quick_model(), "--y", "0.6,-0.9", "--samples", "0", "--out",
                           path("post0.csv")});
  CHECK(none.code == 0);
  CHECK(json::parse(none.out) == g);
  CHECK(slurp("post0.csv") == "xi_1,xi_2\n");

  CHECK(invoke({"infer", "--model", quick_model(), "--y", "1,2,3"}).code == cli::kUsage);
  CHECK(invoke({"infer", "--model", quick_model(), "--y", "1,2", "--samples", "-1"}).code == cli::kUsage);
  write("corrupt.json", "{\"format_version\": 99}");
  CHECK(invoke({"infer", "--model", path("corrupt.json"), "--y", "1,2"}).code == cli::kUsage);
  CHECK(invoke({"infer", "--model", quick_model(), "--y", "1,2", "--out", path("no_such_dir/x.csv")}).code ==
        cli::kIo);
}

TEST_CASE("mcmc command: bookkeeping, diagnostics and reproducibility")
{
  const Result r = invoke({"mcmc", "--problem", "lingauss", "--y", "0.6,-0.9", "--seed", "2", "--total", "33000",
                        "--burn", "3000", "--thin", "30", "--out", path("chain.csv"), "--diagnostics",
                        path("diag.json")});
  REQUIRE(r.code == 0);
  const auto chain = parse_samples_csv(slurp("chain.csv"));
  CHECK(chain.size() == 1000);
  const json diag = json::parse(slurp("diag.json"));
  CHECK(diag["n_kept"] == 1000);
  CHECK(diag["ess"].size() == 2);

  Eigen::MatrixXd a(2, 2);
  a << 1.0, 0.5, -0.3, 0.8;
  const LinearGaussianPosterior post = linear_gaussian_posterior(a, 0.5, Eigen::VectorXd::Zero(2),
                                                                 Eigen::VectorXd::Ones(2), Eigen::Vector2d(0.6, -0.9));
  for (int k = 0; k < 2; ++k) {
    const double se = std::sqrt(post.cov(k, k) / diag["ess"][k].get<double>());
    CHECK(std::abs(diag["mean"][k].get<double>() - post.mean[k]) < 4.0 * se);
  }

  const Result again = invoke({"mcmc", "--problem", "lingauss", "--y", "0.6,-0.9", "--seed", "2", "--out",
                            path("chain2.csv"), "--diagnostics", path("diag2.json")});
  CHECK(again.code == 0);
  CHECK(slurp("chain2.csv") == slurp("chain.csv"));
  CHECK(slurp("diag2.json") == slurp("diag.json"));

  // flat likelihood from a problem file: chain mean near the prior mean
  write("flat.json", R"({"name": "lingauss", "A": [[0.0, 0.0]], "gamma": 1.0, "prior_mean": [0.5, -1.0], "prior_std": [1.0, 1.0]})");
  const Result flat = invoke({"mcmc", "--problem-file", path("flat.json"), "--y", "0", "--out", path("flat.csv"),
                           "--diagnostics", path("flat_diag.json")});
  REQUIRE(flat.code == 0);
  const json fd = json::parse(slurp("flat_diag.json"));
  CHECK(std::abs(fd["mean"][0].get<double>() - 0.5) < 4.0 / std::sqrt(fd["ess"][0].get<double>()));
  CHECK(std::abs(fd["mean"][1].get<double>() + 1.0) < 4.0 / std::sqrt(fd["ess"][1].get<double>()));

  CHECK(invoke({"mcmc", "--y", "0"}).code == cli::kUsage);
  CHECK(invoke({"mcmc", "--problem", "nope", "--y", "0"}).code == cli::kUsage);
  CHECK(invoke({"mcmc", "--problem", "ik", "--y", "0"}).code == cli::kUsage);
  CHECK(invoke({"mcmc", "--problem", "ik", "--y", "1,0", "--total", "10", "--burn", "20"}).code == cli::kUsage);
}

TEST_CASE("evaluate command writes stable reports")
{
  const std::vector<std::string> args{"evaluate", "--model", quick_model(), "--ny", "8", "--npost", "500",
                                      "--nsamples", "200", "--total", "18000", "--burn", "3000", "--thin", "30",
                                      "--seed", "4", "--out-prefix", path("ev")};
  const Result r = invoke(args);
  REQUIRE(r.code == 0);
  const json report = json::parse(slurp("ev_report.json"));
  for (const char* key : {"problem", "n_y", "n_post", "n_samples", "median_ks", "ks_histogram",
                          "failed_observations", "resim_error"})
    CHECK(report.contains(key));
  CHECK(report["problem"] == "lingauss");
  CHECK(report["n_y"] == 8);
  CHECK(report["failed_observations"] == 0);
  CHECK(report["median_ks"].size() == 2);
  for (const auto& v : report["median_ks"]) CHECK(v.get<double>() < 0.15);
  CHECK(report["resim_error"].get<double>() > 0.0);

  const std::string ks = slurp("ev_ks.csv");
  CHECK(ks.rfind("obs,status,ks_1,ks_2\n", 0) == 0);
  CHECK(std::count(ks.begin(), ks.end(), '\n') == 9);
  const std::string resim = slurp("ev_resim.csv");
  CHECK(resim.rfind("obs,mean_discrepancy\n", 0) == 0);
  CHECK(std::count(resim.begin(), resim.end(), '\n') == 9);

  const std::string first = slurp("ev_report.json") + ks + resim;
  REQUIRE(invoke(args).code == 0);
  CHECK(slurp("ev_report.json") + slurp("ev_ks.csv") + slurp("ev_resim.csv") == first);
}

TEST_CASE("numerical abort has its own exit code")
{
  write("explode.json", R"({"problem": "lingauss", "n_iter": 200, "eta0": 1e300, "model_out": ")" +
                            path("explode_model.json") + R"(", "trace_out": ")" + path("explode_trace.csv") + "\"}");
  const Result r = invoke({"train", "--config", path("explode.json")});
  CHECK(r.code == cli::kNumerical);
  CHECK(r.err.find("iteration") != std::string::npos);
  CHECK_FALSE(fs::exists(path("explode_model.json")));
}
