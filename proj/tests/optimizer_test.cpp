// Copyright 2026 The ProbeWeight Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cmath>
#include <limits>

#include <doctest.h>

#include "probeweight/errors.hpp"
#include "probeweight/optimizer.hpp"

namespace probeweight {
namespace {

Vector scalar(double v) {
  Vector x(1);
  x[0] = v;
  return x;
}

TEST_CASE("sgd step") {
  auto opt = OptimizerState::sgd(0.1);
  Vector p = scalar(1.0);
  opt.step(p, scalar(0.5));
  CHECK(p[0] == doctest::Approx(0.95).epsilon(1e-15));
  CHECK(opt.step_count() == 1);
}

TEST_CASE("sgd with momentum accumulates velocity") {
  auto opt = OptimizerState::sgd(0.1, 0.9);
  Vector p = scalar(0.0);
  opt.step(p, scalar(1.0));
  opt.step(p, scalar(1.0));
  // v1 = 1, v2 = 0.9 + 1
  CHECK(p[0] == doctest::Approx(-0.1 - 0.19).epsilon(1e-14));
}

TEST_CASE("adam first step matches the bias-corrected formula") {
  auto opt = OptimizerState::adam(1e-3);
  Vector p = scalar(0.5);
  opt.step(p, scalar(0.2));
  // m = 0.1 * 0.2, v = 0.001 * 0.04; m_hat = 0.2, v_hat = 0.04
  const double m_hat = (0.1 * 0.2) / (1.0 - 0.9);
  const double v_hat = (0.001 * 0.04) / (1.0 - 0.999);
  const double expected = 0.5 - 1e-3 * m_hat / (std::sqrt(v_hat) + 1e-8);
  CHECK(p[0] == doctest::Approx(expected).epsilon(1e-15));
  CHECK(p[0] == doctest::Approx(0.5 - 0.001 * 0.2 / (0.2 + 1e-8)).epsilon(1e-14));
}

TEST_CASE("adam second step") {
  auto opt = OptimizerState::adam(1e-2);
  Vector p = scalar(0.0);
  opt.step(p, scalar(1.0));
  opt.step(p, scalar(-2.0));
  const double m = 0.9 * 0.1 + 0.1 * -2.0;
  const double v = 0.999 * 0.001 + 0.001 * 4.0;
  const double m_hat = m / (1.0 - 0.81);
  const double v_hat = v / (1.0 - 0.999 * 0.999);
  const double first = -1e-2 * 1.0 / (1.0 + 1e-8);
  CHECK(p[0] == doctest::Approx(first - 1e-2 * m_hat / (std::sqrt(v_hat) + 1e-8))
                     .epsilon(1e-13));
}

TEST_CASE("zero gradient leaves parameters and advances the counter") {
  for (auto opt : {OptimizerState::sgd(0.1), OptimizerState::adam(1e-3)}) {
    Vector p = Vector::LinSpaced(4, -1.0, 1.0);
    const Vector before = p;
    opt.step(p, Vector::Zero(4));
    opt.step(p, Vector::Zero(4));
    CHECK(p == before);
    CHECK(opt.step_count() == 2);
  }
}

TEST_CASE("non-finite gradients are rejected") {
  auto opt = OptimizerState::adam(1e-3);
  Vector p = scalar(0.0);
  CHECK_THROWS_AS(opt.step(p, scalar(std::numeric_limits<double>::infinity())),
                  NumericError);
  CHECK(p[0] == 0.0);
}

TEST_CASE("invalid hyperparameters and shape changes") {
  CHECK_THROWS_AS(OptimizerState::sgd(0.0), ConfigError);
  CHECK_THROWS_AS(OptimizerState::sgd(-1.0), ConfigError);
  CHECK_THROWS_AS(OptimizerState::adam(1e-3, 1.0), ConfigError);
  auto opt = OptimizerState::adam(1e-3);
  Vector p = Vector::Zero(3);
  opt.step(p, Vector::Ones(3));
  Vector q = Vector::Zero(4);
  CHECK_THROWS_AS(opt.step(q, Vector::Ones(4)), ShapeError);
  CHECK_THROWS_AS(opt.step(p, Vector::Ones(4)), ShapeError);
}

}  // namespace
}  // namespace probeweight
