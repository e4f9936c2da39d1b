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
#include "fairrec/metrics.hpp"
#include "fairrec/penalties.hpp"
#include "support/oracles.hpp"

namespace fairrec {
namespace {

const PenaltySpec kUnderOver{{{PenaltyKind::kUnder, 1.0}, {PenaltyKind::kOver, 1.0}}, 0.0};

std::vector<PenaltySpec> gradient_specs() {
  return {PenaltySpec::single(PenaltyKind::kValue),
          PenaltySpec::single(PenaltyKind::kAbsolute),
          PenaltySpec::single(PenaltyKind::kUnder),
          PenaltySpec::single(PenaltyKind::kOver),
          PenaltySpec::single(PenaltyKind::kParity, 0.7),
          kUnderOver,
          PenaltySpec{{{PenaltyKind::kValue, 0.3}, {PenaltyKind::kParity, 2.0}}, 0.0}};
}

// Protected user 0 and advantaged user 1 rate item 0 with truth 0; biases
// carry the signed errors.
struct OneItem {
  Dataset data;
  FactorModel model{2, 1, 1};

  OneItem(double protected_error, double other_error) {
    data.num_users = 2;
    data.num_items = 1;
    data.is_protected = {true, false};
    data.ratings = {{0, 0, 0.0}, {1, 0, 0.0}};
    data.scale = {0.0, 1.0};
    model.user_bias = {protected_error, other_error};
  }
};

// Random instance that keeps every kink at least `margin` away.
testing::Instance smooth_instance(std::mt19937_64& rng, double margin) {
  while (true) {
    auto inst = testing::random_instance(rng, 8, 6, 3);
    const auto pred = testing::predictions(inst.model, inst.data.ratings);
    if (testing::away_from_kinks(inst.data.ratings, pred, inst.data.is_protected,
                                 inst.data.num_items, margin)) {
      return inst;
    }
  }
}

TEST_CASE("spec parsing and printing") {
  CHECK(PenaltySpec::parse("none").is_none());
  CHECK(PenaltySpec::parse("value:1.0") == PenaltySpec::single(PenaltyKind::kValue));
  const auto uo = PenaltySpec::parse("under:0.5,over:0.5");
  REQUIRE(uo.terms.size() == 2);
  CHECK(uo.terms[1].kind == PenaltyKind::kOver);
  CHECK(uo.terms[1].weight == 0.5);
  CHECK(uo.to_string() == "under:0.5,over:0.5");
  CHECK(uo.label() == "under:0.5+over:0.5");
  CHECK(PenaltySpec::parse(uo.label()) == uo);
  CHECK(PenaltySpec::parse(uo.to_string()) == uo);
  CHECK(PenaltySpec::parse("under+over") == kUnderOver);
  CHECK(kUnderOver.label() == "under+over");
  CHECK(PenaltySpec::parse(" Parity ") == PenaltySpec::single(PenaltyKind::kParity));

  CHECK_THROWS_AS(PenaltySpec::parse(""), Error);
  CHECK_THROWS_AS(PenaltySpec::parse("fairness"), Error);
  CHECK_THROWS_AS(PenaltySpec::parse("value:-1"), Error);
  CHECK_THROWS_AS(PenaltySpec::parse("value:abc"), Error);
  CHECK_THROWS_AS(PenaltySpec::parse("none,value"), Error);
  CHECK_THROWS_AS(check_penalty_spec(PenaltySpec{{{PenaltyKind::kValue, 1.0}}, -1.0}), Error);
}

TEST_CASE("none penalty") {
  std::mt19937_64 rng(1);
  auto inst = testing::random_instance(rng, 6, 6, 2);
  CHECK(penalty_value(inst.model, inst.data, PenaltySpec::none()) == 0.0);
  CHECK(testing::max_abs(penalty_gradient(inst.model, inst.data, PenaltySpec::none())) == 0.0);
}

TEST_CASE("single terms equal the metrics on the training set") {
  std::mt19937_64 rng(2);
  for (int rep = 0; rep < 50; ++rep) {
    auto inst = testing::random_instance(rng, 8, 8, 3);
    const auto r = full_report(inst.model, as_eval_set(inst.data), inst.data.is_protected);
    auto value_of = [&](PenaltyKind k) {
      return penalty_value(inst.model, inst.data, PenaltySpec::single(k));
    };
    CHECK(value_of(PenaltyKind::kValue) == r.value);
    CHECK(value_of(PenaltyKind::kAbsolute) == r.absolute);
    CHECK(value_of(PenaltyKind::kUnder) == r.under);
    CHECK(value_of(PenaltyKind::kOver) == r.over);
    CHECK(value_of(PenaltyKind::kParity) == doctest::Approx(r.parity).epsilon(1e-12));
  }
}

TEST_CASE("under plus over on the one-item instance") {
  OneItem inst(1, -1);
  CHECK(penalty_value(inst.model, inst.data, kUnderOver) == 2.0);
}

TEST_CASE("fair model is stationary for the per-item terms") {
  OneItem inst(0.4, 0.4);
  for (auto k : {PenaltyKind::kValue, PenaltyKind::kUnder, PenaltyKind::kOver}) {
    const auto spec = PenaltySpec::single(k);
    CHECK(penalty_value(inst.model, inst.data, spec) == 0.0);
    CHECK(testing::max_abs(penalty_gradient(inst.model, inst.data, spec)) == 0.0);
  }
}

TEST_CASE("zero gradient at a zero penalty") {
  // Every user predicts the item truth exactly.
  std::mt19937_64 rng(3);
  for (int rep = 0; rep < 20; ++rep) {
    auto inst = testing::random_instance(rng, 6, 6, 2);
    inst.data.scale = {-1e9, 1e9};
    for (auto& r : inst.data.ratings) r.value = predict(inst.model, r.user, r.item);
    for (const auto& spec : gradient_specs()) {
      if (spec.terms.front().kind == PenaltyKind::kParity || spec.terms.size() > 1) continue;
      CHECK(penalty_value(inst.model, inst.data, spec) == 0.0);
      CHECK(testing::max_abs(penalty_gradient(inst.model, inst.data, spec)) == 0.0);
    }
  }
}

TEST_CASE("parity gradient for a bias-only model") {
  // Protected users 0 (two entries) and 2 (one entry); advantaged user 1.
  Dataset d;
  d.num_users = 3;
  d.num_items = 2;
  d.is_protected = {true, false, true};
  d.ratings = {{0, 0, 1.0}, {0, 1, 1.0}, {2, 0, 1.0}, {1, 0, 1.0}};
  d.scale = {0.0, 5.0};
  FactorModel m(3, 2, 1);
  m.user_bias = {2.0, 1.0, 3.0};
  const double w = 1.5;
  const auto g = penalty_gradient(m, d, PenaltySpec::single(PenaltyKind::kParity, w));
  // Protected mean 7/3 exceeds advantaged mean 1, so sign(delta) = +1.
  CHECK(g.user_bias[0] == doctest::Approx(w * 2.0 / 3.0));
  CHECK(g.user_bias[2] == doctest::Approx(w * 1.0 / 3.0));
  CHECK(g.user_bias[1] == doctest::Approx(-w));
  CHECK(penalty_value(m, d, PenaltySpec::single(PenaltyKind::kParity, w)) ==
        doctest::Approx(w * 4.0 / 3.0));
}

TEST_CASE("penalty gradients match finite differences away from kinks") {
  std::mt19937_64 rng(77);
  for (const auto& spec : gradient_specs()) {
    CAPTURE(spec.to_string());
    for (int rep = 0; rep < 20; ++rep) {
      auto inst = smooth_instance(rng, 1e-3);
      const auto analytic = penalty_gradient(inst.model, inst.data, spec);
      const auto numeric = testing::finite_difference(
          inst.model, [&](const FactorModel& m) { return penalty_value(m, inst.data, spec); });
      CHECK(testing::relative_error(analytic, numeric) < 1e-5);
    }
  }
}

TEST_CASE("smoothed penalties are differentiable everywhere") {
  std::mt19937_64 rng(78);
  for (auto spec : gradient_specs()) {
    spec.smoothing = 0.05;
    for (int rep = 0; rep < 10; ++rep) {
      auto inst = testing::random_instance(rng, 8, 6, 3);
      const auto analytic = penalty_gradient(inst.model, inst.data, spec);
      const auto numeric = testing::finite_difference(
          inst.model, [&](const FactorModel& m) { return penalty_value(m, inst.data, spec); });
      CHECK(testing::relative_error(analytic, numeric) < 1e-5);
    }
  }
  // Smoothing only ever adds.
  OneItem fair(0.2, 0.2);
  PenaltySpec smooth = PenaltySpec::single(PenaltyKind::kValue);
  smooth.smoothing = 0.1;
  CHECK(penalty_value(fair.model, fair.data, smooth) == doctest::Approx(0.1));
}

TEST_CASE("combinations are linear") {
  std::mt19937_64 rng(9);
  for (int rep = 0; rep < 20; ++rep) {
    auto inst = testing::random_instance(rng, 8, 6, 3);
    const PenaltySpec combo{{{PenaltyKind::kAbsolute, 0.4},
                             {PenaltyKind::kOver, 2.5},
                             {PenaltyKind::kParity, 1.25}},
                            0.0};
    double sum = 0.0;
    Gradient grad_sum(inst.model);
    for (const auto& t : combo.terms) {
      const auto single = PenaltySpec::single(t.kind);
      sum += t.weight * penalty_value(inst.model, inst.data, single);
      grad_sum.add_scaled(penalty_gradient(inst.model, inst.data, single), t.weight);
    }
    CHECK(penalty_value(inst.model, inst.data, combo) == doctest::Approx(sum).epsilon(1e-12));
    CHECK(testing::relative_error(penalty_gradient(inst.model, inst.data, combo), grad_sum) <
          1e-12);
  }
}

TEST_CASE("under plus over equals value per item") {
  std::mt19937_64 rng(10);
  for (int rep = 0; rep < 50; ++rep) {
    auto inst = testing::random_instance(rng, 8, 8, 3);
    CHECK(penalty_value(inst.model, inst.data, kUnderOver) ==
          doctest::Approx(penalty_value(inst.model, inst.data,
                                        PenaltySpec::single(PenaltyKind::kValue)))
              .epsilon(1e-12));
  }
}

TEST_CASE("penalty preconditions") {
  SUBCASE("no comparable item") {
    Dataset d;
    d.num_users = 2;
    d.num_items = 2;
    d.is_protected = {true, false};
    d.ratings = {{0, 0, 1.0}, {1, 1, 1.0}};
    d.scale = {0.0, 1.0};
    FactorModel m(2, 2, 1);
    try {
      penalty_value(m, d, PenaltySpec::single(PenaltyKind::kValue));
      FAIL("expected NoComparableItems");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kNoComparableItems);
    }
    CHECK_NOTHROW(penalty_value(m, d, PenaltySpec::single(PenaltyKind::kParity)));
  }
  SUBCASE("one group without training ratings") {
    Dataset d;
    d.num_users = 2;
    d.num_items = 1;
    d.is_protected = {true, false};
    d.ratings = {{0, 0, 1.0}};
    d.scale = {0.0, 1.0};
    FactorModel m(2, 1, 1);
    try {
      penalty_gradient(m, d, PenaltySpec::single(PenaltyKind::kParity));
      FAIL("expected EmptyGroup");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kEmptyGroup);
    }
  }
}

}  // namespace
}  // namespace fairrec
