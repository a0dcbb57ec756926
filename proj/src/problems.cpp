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

#include "avi/problems.hpp"

#include "avi/elliptic.hpp"
#include "avi/errors.hpp"

#include <cmath>
#include <memory>
#include <numbers>
#include <sstream>

namespace avi {

namespace {

constexpr double kIkLengths[3] = {0.5, 0.5, 1.0};
constexpr double kJacobianStep = 1e-6;

std::string format_vector(const Eigen::VectorXd& v)
{
  std::ostringstream out;
  out.precision(17);
  out << '(';
  for (Eigen::Index i = 0; i < v.size(); ++i) out << (i ? ", " : "") << v[i];
  out << ')';
  return out.str();
}

double gaussian_log_norm(double n, double variance) { return -0.5 * n * std::log(2.0 * std::numbers::pi * variance); }

Eigen::MatrixXd default_lingauss_matrix()
{
  Eigen::MatrixXd a(2, 2);
  a << 1.0, 0.5, -0.3, 0.8;
  return a;
}

}  // namespace

Problem::Problem(ProblemSpec spec, std::size_t m, Eigen::VectorXd prior_mean, Eigen::VectorXd prior_std,
                 double noise_scale, Forward forward, ForwardJacobian jacobian)
    : spec_(std::move(spec)),
      m_(m),
      prior_mean_(std::move(prior_mean)),
      prior_std_(std::move(prior_std)),
      noise_scale_(noise_scale),
      forward_(std::move(forward)),
      jacobian_(std::move(jacobian))
{
  require_shape(prior_mean_.size() >= 1 && prior_mean_.size() == prior_std_.size(),
                "prior mean and std must have equal positive length");
  require_shape(m_ >= 1, "data dimension must be positive");
  if (!(prior_std_.array() > 0.0).all()) throw DomainError("prior standard deviations must be positive");
  if (!(noise_scale_ > 0.0)) throw DomainError("noise scale must be positive");
  if (!forward_) throw std::invalid_argument("problem needs a forward model");
}

void Problem::check_xi(const Eigen::VectorXd& xi) const
{
  require_shape(static_cast<std::size_t>(xi.size()) == d(),
                "parameter vector has length " + std::to_string(xi.size()) + ", expected " + std::to_string(d()));
}

void Problem::check_y(const Eigen::VectorXd& y) const
{
  require_shape(static_cast<std::size_t>(y.size()) == m_,
                "observation has length " + std::to_string(y.size()) + ", expected " + std::to_string(m_));
}

Eigen::VectorXd Problem::forward(const Eigen::VectorXd& xi) const
{
  check_xi(xi);
  Eigen::VectorXd out = forward_(xi);
  require_shape(static_cast<std::size_t>(out.size()) == m_, "forward model returned wrong length");
  if (!out.allFinite()) throw EvaluationError(spec_.name + " forward model is not finite at xi = " + format_vector(xi));
  return out;
}

Eigen::VectorXd Problem::forward(const Eigen::VectorXd& xi, Eigen::MatrixXd& jacobian) const
{
  check_xi(xi);
  Eigen::VectorXd out;
  if (jacobian_) {
    out = jacobian_(xi, jacobian);
  } else {
    out = forward_(xi);
    jacobian.resize(static_cast<Eigen::Index>(m_), xi.size());
    Eigen::VectorXd probe = xi;
    for (Eigen::Index i = 0; i < xi.size(); ++i) {
      probe[i] = xi[i] + kJacobianStep;
      const Eigen::VectorXd up = forward_(probe);
      probe[i] = xi[i] - kJacobianStep;
      const Eigen::VectorXd down = forward_(probe);
      probe[i] = xi[i];
      jacobian.col(i) = (up - down) / (2.0 * kJacobianStep);
    }
  }
  require_shape(static_cast<std::size_t>(out.size()) == m_, "forward model returned wrong length");
  if (!out.allFinite() || !jacobian.allFinite())
    throw EvaluationError(spec_.name + " forward model is not finite at xi = " + format_vector(xi));
  return out;
}

double Problem::log_prior(const Eigen::VectorXd& xi) const
{
  check_xi(xi);
  const Eigen::ArrayXd z = (xi - prior_mean_).array() / prior_std_.array();
  return -0.5 * static_cast<double>(d()) * std::log(2.0 * std::numbers::pi) - prior_std_.array().log().sum() -
         0.5 * z.square().sum();
}

double Problem::log_likelihood(const Eigen::VectorXd& xi, const Eigen::VectorXd& y) const
{
  check_y(y);
  const Eigen::VectorXd r = y - forward(xi);
  const double var = noise_scale_ * noise_scale_;
  return gaussian_log_norm(static_cast<double>(m_), var) - 0.5 * r.squaredNorm() / var;
}

double Problem::log_joint(const Eigen::VectorXd& xi, const Eigen::VectorXd& y) const
{
  return log_likelihood(xi, y) + log_prior(xi);
}

double Problem::log_joint(const Eigen::VectorXd& xi, const Eigen::VectorXd& y, Eigen::VectorXd& grad_xi) const
{
  check_y(y);
  Eigen::MatrixXd jac;
  const Eigen::VectorXd r = y - forward(xi, jac);
  const double var = noise_scale_ * noise_scale_;
  const Eigen::VectorXd prior_var = prior_std_.array().square().matrix();
  const Eigen::VectorXd centered = xi - prior_mean_;
  grad_xi = jac.transpose() * r / var - (centered.array() / prior_var.array()).matrix();
  return gaussian_log_norm(static_cast<double>(m_), var) - 0.5 * r.squaredNorm() / var + log_prior(xi);
}

DataDraw Problem::sample_data(Rng& rng) const
{
  DataDraw draw;
  draw.xi_gt = prior_mean_ + (prior_std_.array() * standard_normal(rng, prior_mean_.size()).array()).matrix();
  draw.y = forward(draw.xi_gt) + noise_scale_ * standard_normal(rng, static_cast<Eigen::Index>(m_));
  return draw;
}

Eigen::VectorXd ik_forward(const Eigen::VectorXd& xi)
{
  require_shape(xi.size() == 4, "inverse kinematics takes 4 parameters");
  const double t1 = xi[1];
  const double t2 = t1 + xi[2];
  const double t3 = t2 + xi[3];
  Eigen::VectorXd f(2);
  f[0] = kIkLengths[0] * std::cos(t1) + kIkLengths[1] * std::cos(t2) + kIkLengths[2] * std::cos(t3);
  f[1] = xi[0] + kIkLengths[0] * std::sin(t1) + kIkLengths[1] * std::sin(t2) + kIkLengths[2] * std::sin(t3);
  return f;
}

Eigen::MatrixXd ik_jacobian(const Eigen::VectorXd& xi)
{
  require_shape(xi.size() == 4, "inverse kinematics takes 4 parameters");
  const double t1 = xi[1];
  const double t2 = t1 + xi[2];
  const double t3 = t2 + xi[3];
  const double s3 = kIkLengths[2] * std::sin(t3);
  const double c3 = kIkLengths[2] * std::cos(t3);
  const double s2 = kIkLengths[1] * std::sin(t2) + s3;
  const double c2 = kIkLengths[1] * std::cos(t2) + c3;
  const double s1 = kIkLengths[0] * std::sin(t1) + s2;
  const double c1 = kIkLengths[0] * std::cos(t1) + c2;
  Eigen::MatrixXd j(2, 4);
  j << 0.0, -s1, -s2, -s3,
       1.0, c1, c2, c3;
  return j;
}

Problem ik_problem()
{
  Eigen::VectorXd std(4);
  std << 0.25, 0.5, 0.5, 0.5;
  return Problem(ProblemSpec{"ik", {}, kIkNoise, {}, {}}, 2, Eigen::VectorXd::Zero(4), std, kIkNoise, ik_forward,
                 [](const Eigen::VectorXd& xi, Eigen::MatrixXd& jac) {
                   jac = ik_jacobian(xi);
                   return ik_forward(xi);
                 });
}

Problem elliptic_problem()
{
  auto solver = std::make_shared<const EllipticSolver>(elliptic_sensor_grid());
  const auto m = solver->sensors().size();
  return Problem(
      ProblemSpec{"elliptic", {}, kEllipticNoise, {}, {}}, m, Eigen::VectorXd::Zero(kEllipticTerms),
      Eigen::VectorXd::Ones(kEllipticTerms), kEllipticNoise,
      [solver](const Eigen::VectorXd& xi) { return solver->solve(xi); },
      [solver](const Eigen::VectorXd& xi, Eigen::MatrixXd& jac) { return solver->solve(xi, jac); });
}

Problem linear_gaussian_problem(const Eigen::MatrixXd& a, double gamma, const Eigen::VectorXd& prior_mean,
                                const Eigen::VectorXd& prior_std)
{
  require_shape(a.rows() >= 1 && a.cols() == prior_mean.size() && prior_mean.size() == prior_std.size(),
                "lingauss matrix must be m x d with d matching the prior");
  return Problem(
      ProblemSpec{"lingauss", a, gamma, prior_mean, prior_std}, static_cast<std::size_t>(a.rows()), prior_mean,
      prior_std, gamma, [a](const Eigen::VectorXd& xi) -> Eigen::VectorXd { return a * xi; },
      [a](const Eigen::VectorXd& xi, Eigen::MatrixXd& jac) -> Eigen::VectorXd {
        jac = a;
        return a * xi;
      });
}

LinearGaussianPosterior linear_gaussian_posterior(const Eigen::MatrixXd& a, double gamma,
                                                  const Eigen::VectorXd& prior_mean,
                                                  const Eigen::VectorXd& prior_std, const Eigen::VectorXd& y)
{
  require_shape(a.cols() == prior_mean.size() && prior_mean.size() == prior_std.size() && a.rows() == y.size(),
                "lingauss posterior shapes disagree");
  if (!(gamma > 0.0) || !(prior_std.array() > 0.0).all()) throw DomainError("gamma and prior std must be positive");
  const double var = gamma * gamma;
  const Eigen::VectorXd prior_prec = prior_std.array().square().inverse().matrix();

  Eigen::MatrixXd precision = a.transpose() * a / var;
  precision.diagonal() += prior_prec;
  const Eigen::LLT<Eigen::MatrixXd> prec_llt(precision);
  LinearGaussianPosterior post;
  post.cov = prec_llt.solve(Eigen::MatrixXd::Identity(a.cols(), a.cols()));
  post.mean = prec_llt.solve(a.transpose() * y / var + (prior_prec.array() * prior_mean.array()).matrix());

  Eigen::MatrixXd evidence_cov = a * prior_std.array().square().matrix().asDiagonal() * a.transpose();
  evidence_cov.diagonal().array() += var;
  const Eigen::LLT<Eigen::MatrixXd> ev_llt(evidence_cov);
  const Eigen::VectorXd w = ev_llt.matrixL().solve(y - a * prior_mean);
  const Eigen::MatrixXd l = ev_llt.matrixL();
  post.log_evidence = -0.5 * static_cast<double>(y.size()) * std::log(2.0 * std::numbers::pi) -
                      l.diagonal().array().log().sum() - 0.5 * w.squaredNorm();
  return post;
}

Problem make_problem(const ProblemSpec& spec)
{
  if (spec.name == "ik") return ik_problem();
  if (spec.name == "elliptic") return elliptic_problem();
  if (spec.name == "lingauss") {
    const Eigen::MatrixXd a = spec.a.size() > 0 ? spec.a : default_lingauss_matrix();
    const double gamma = spec.gamma > 0.0 ? spec.gamma : 0.5;
    const Eigen::VectorXd mean = spec.prior_mean.size() > 0 ? spec.prior_mean : Eigen::VectorXd::Zero(a.cols());
    const Eigen::VectorXd std = spec.prior_std.size() > 0 ? spec.prior_std : Eigen::VectorXd::Ones(a.cols());
    return linear_gaussian_problem(a, gamma, mean, std);
  }
  throw std::invalid_argument("unknown problem '" + spec.name + "'");
}

Problem make_problem(std::string_view name) { return make_problem(ProblemSpec{std::string(name), {}, 0.0, {}, {}}); }

const std::vector<std::string>& problem_names()
{
  static const std::vector<std::string> names{"ik", "elliptic", "lingauss"};
  return names;
}

}  // namespace avi
