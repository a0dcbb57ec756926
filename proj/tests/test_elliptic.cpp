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

#include "avi/elliptic.hpp"
#include "avi/nn.hpp"
#include "avi/random.hpp"

#include "doctest.h"
#include "elliptic_oracle.hpp"
#include "test_support.hpp"

#include <cmath>
#include <numbers>

using namespace avi;

namespace {

Eigen::VectorXd bounded_xi(Rng& rng, double bound)
{
  std::uniform_real_distribution<double> u(-bound, bound);
  Eigen::VectorXd xi(5);
  for (auto& v : xi) v = u(rng);
  return xi;
}

}  // namespace

TEST_CASE("conductivity reference values")
{
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(5);
  for (double x : {0.0, 0.3, 1.0}) CHECK(elliptic_conductivity(x, zero) == 1.0);
  Rng rng(1);
  for (int i = 0; i < 10; ++i) CHECK(elliptic_conductivity(0.0, standard_normal(rng, 5)) == 1.0);
  Eigen::VectorXd e1 = Eigen::VectorXd::Zero(5);
  e1[0] = 1.0;
  CHECK(elliptic_conductivity(1.0, e1) == doctest::Approx(std::exp(3.0 * std::sqrt(2.0) / std::numbers::pi)).epsilon(1e-14));
}

TEST_CASE("sensor grid is 9 equidistant points from 0.15 to 0.85")
{
  const std::vector<double> xs = elliptic_sensor_grid();
  REQUIRE(xs.size() == 9);
  CHECK(xs.front() == doctest::Approx(0.15));
  CHECK(xs.back() == doctest::Approx(0.85));
  for (std::size_t i = 0; i < xs.size(); ++i) CHECK(xs[i] == doctest::Approx(0.15 + 0.0875 * static_cast<double>(i)));
}

TEST_CASE("zero field gives the linear profile and boundary values hold")
{
  const std::vector<double> xs{0.0, 0.1, 0.15, 0.33333, 0.5, 0.77, 1.0};
  const Eigen::VectorXd u = elliptic_solve(Eigen::VectorXd::Zero(5), xs);
  for (std::size_t i = 0; i < xs.size(); ++i) CHECK(std::abs(u[static_cast<Eigen::Index>(i)] - (1.0 - xs[i])) < 1e-13);

  Rng rng(2);
  const EllipticSolver ends(std::vector<double>{0.0, 1.0});
  for (int i = 0; i < 20; ++i) {
    const Eigen::VectorXd b = ends.solve(bounded_xi(rng, 3.0));
    CHECK(b[0] == 1.0);
    CHECK(std::abs(b[1]) < 1e-15);
  }
}

TEST_CASE("quadrature matches a 4001-node finite-difference solve")
{
  Rng rng(3);
  const std::vector<double> xs = elliptic_sensor_grid();
  const EllipticSolver solver(xs);
  double worst = 0.0;
  for (int i = 0; i < 25; ++i) {
    const Eigen::VectorXd xi = bounded_xi(rng, 3.0);
    worst = std::max(worst, (solver.solve(xi) - testing::elliptic_fd_sensors(xi, xs)).lpNorm<Eigen::Infinity>());
  }
  CHECK(worst < 1e-5);
}

TEST_CASE("property: u is strictly decreasing")
{
  Rng rng(4);
  std::vector<double> xs;
  for (int k = 0; k <= 400; ++k) xs.push_back(k / 400.0 + (k % 3 == 1 ? 1.3e-4 : 0.0));
  xs.back() = 1.0;
  const EllipticSolver solver(xs);
  for (int i = 0; i < 30; ++i) {
    const Eigen::VectorXd u = solver.solve(bounded_xi(rng, 3.0));
    for (Eigen::Index k = 1; k < u.size(); ++k) CHECK(u[k] < u[k - 1]);
  }
}

TEST_CASE("property: doubling the Simpson grid changes sensors by < 1e-8")
{
  Rng rng(5);
  std::vector<double> xs = elliptic_sensor_grid();
  xs.push_back(0.123456789);  // off-grid for both resolutions
  xs.push_back(0.9876);
  const EllipticSolver coarse(xs, 2001);
  const EllipticSolver fine(xs, 4001);
  for (int i = 0; i < 50; ++i) {
    const Eigen::VectorXd xi = bounded_xi(rng, 3.0);
    CHECK((coarse.solve(xi) - fine.solve(xi)).lpNorm<Eigen::Infinity>() < 1e-8);
  }
}

TEST_CASE("solver Jacobian agrees with central differences")
{
  Rng rng(6);
  std::vector<double> xs = elliptic_sensor_grid();
  xs.push_back(0.4321);
  const EllipticSolver solver(xs);
  for (int i = 0; i < 10; ++i) {
    const Eigen::VectorXd xi = bounded_xi(rng, 2.0);
    Eigen::MatrixXd jac;
    const Eigen::VectorXd u = solver.solve(xi, jac);
    CHECK(u == solver.solve(xi));
    for (Eigen::Index s = 0; s < u.size(); ++s) {
      auto f = [&](const Eigen::VectorXd& x) { return solver.solve(x)[s]; };
      const Eigen::VectorXd fd = nn::finite_diff(f, xi, 1e-6);
      CHECK(testing::rel_err(jac.row(s).transpose(), fd, 1e-8) < 1e-6);
    }
  }
}

TEST_CASE("invalid solver configuration")
{
  CHECK_THROWS(EllipticSolver(std::vector<double>{0.5}, 2000));
  CHECK_THROWS(EllipticSolver(std::vector<double>{1.5}));
  CHECK_THROWS(EllipticSolver(std::vector<double>{0.5}).solve(Eigen::VectorXd::Zero(4)));
}
