// Copyright 2026 The fairrec Authors.
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


#include <doctest.h>

#include <random>

#include "fairrec/factorization.hpp"
#include "support/oracles.hpp"

namespace fairrec {
namespace {

Dataset two_user_set(std::vector<Rating> ratings, std::size_t users = 2, std::size_t items = 1) {
  Dataset d;
  d.num_users = users;
  d.num_items = items;
  d.is_protected.assign(users, false);
  d.is_protected[0] = true;
  d.ratings = std::move(ratings);
  d.scale = {-10.0, 10.0};
  return d;
}

TEST_CASE("predict") {
  FactorModel m(1, 1, 2);
  CHECK(predict(m, 0, 0) == 0.0);

  m.user_factors(0, 0) = 1;
  m.user_factors(0, 1) = 2;
  m.item_factors(0, 0) = 3;
  m.item_factors(0, 1) = 4;
  m.user_bias[0] = 0.5;
  m.item_bias[0] = -0.5;
  CHECK(predict(m, 0, 0) == 11.0);

  FactorModel biases(1, 1, 2);
  biases.user_bias[0] = 1;
  biases.item_bias[0] = 2;
  CHECK(predict(biases, 0, 0) == 3.0);

  CHECK_THROWS_AS(predict(m, 1, 0), Error);
  CHECK_THROWS_AS(predict(m, 0, 1), Error);
}

TEST_CASE("predict is linear in each block") {
  std::mt19937_64 rng(5);
  auto inst = testing::random_instance(rng, 5, 5, 3);
  const FactorModel& m = inst.model;
  FactorModel doubled = m;
  for (double& x : doubled.user_factors.values()) x *= 2.0;
  const double base = predict(m, 1, 0) - m.user_bias[1] - m.item_bias[0];
  CHECK(predict(doubled, 1, 0) - m.user_bias[1] - m.item_bias[0] == doctest::Approx(2 * base));
  FactorModel shifted = m;
  shifted.item_bias[0] += 0.25;
  CHECK(predict(shifted, 1, 0) == doctest::Approx(predict(m, 1, 0) + 0.25));
}

TEST_CASE("objective values") {
  FactorModel zero(2, 1, 1);
  CHECK(objective(zero, two_user_set({{0, 0, 0.0}}), 0.0) == 0.0);
  CHECK(objective(zero, two_user_set({{0, 0, 1.0}}), 0.0) == 1.0);

  FactorModel m2(2, 1, 1);
  m2.item_factors(0, 0) = 1.0;
  m2.user_factors(1, 0) = 1.0;
  // User 0 has a zero factor, so its prediction is 0 while both norms are 1.
  CHECK(objective(m2, two_user_set({{0, 0, 1.0}}), 2.0) == 3.0);

  Dataset empty = two_user_set({});
  CHECK_THROWS_AS(objective(zero, empty, 0.0), Error);
  CHECK_THROWS_AS(objective_gradient(zero, empty, 0.0), Error);
}

TEST_CASE("biases are not regularized") {
  FactorModel m(2, 1, 1);
  m.user_bias[0] = 3.0;
  m.item_bias[0] = -3.0;
  CHECK(objective(m, two_user_set({{0, 0, 0.0}}), 5.0) == 0.0);
}

TEST_CASE("objective gradient at zero residual is zero") {
  FactorModel zero(2, 1, 1);
  const auto g = objective_gradient(zero, two_user_set({{0, 0, 0.0}}), 0.0);
  CHECK(testing::max_abs(g) == 0.0);
}

TEST_CASE("untouched user receives only the regularizer") {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> normal;
  FactorModel m(3, 2, 2);
  for (auto block : m.blocks()) {
    for (double& x : block) x = normal(rng);
  }
  const double lambda = 0.7;
  const auto g = objective_gradient(m, two_user_set({{0, 0, 1.0}, {1, 1, -1.0}}, 3, 2), lambda);
  for (std::size_t k = 0; k < 2; ++k) CHECK(g.user_factors(2, k) == lambda * m.user_factors(2, k));
  CHECK(g.user_bias[2] == 0.0);
}

TEST_CASE("objective gradient matches finite differences") {
  std::mt19937_64 rng(21);
  for (int rep = 0; rep < 25; ++rep) {
    auto inst = testing::random_instance(rng, 10, 10, 4);
    const double lambda = rep % 2 == 0 ? 0.0 : 0.3;
    const auto analytic = objective_gradient(inst.model, inst.data, lambda);
    const auto numeric = testing::finite_difference(
        inst.model, [&](const FactorModel& m) { return objective(m, inst.data, lambda); });
    CHECK(testing::relative_error(analytic, numeric) < 1e-5);
  }
}

TEST_CASE("objective is nonnegative and zero only at a perfect fit without lambda") {
  std::mt19937_64 rng(4);
  for (int rep = 0; rep < 20; ++rep) {
    auto inst = testing::random_instance(rng, 6, 6, 2);
    CHECK(objective(inst.model, inst.data, 0.1) > 0.0);
    // Replace the targets by the model's own predictions.
    for (auto& r : inst.data.ratings) r.value = testing::dot_predict(inst.model, r.user, r.item);
    inst.data.scale = {-1e9, 1e9};
    CHECK(objective(inst.model, inst.data, 0.0) < 1e-24);
    CHECK(objective(inst.model, inst.data, 0.1) > 0.0);
  }
}

}  // namespace
}  // namespace fairrec
