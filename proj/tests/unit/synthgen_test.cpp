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

#include <cmath>
#include <sstream>

#include "fairrec/synthgen.hpp"

namespace fairrec {
namespace {

std::array<std::size_t, 4> user_counts(const std::vector<UserGroup>& groups) {
  std::array<std::size_t, 4> c{};
  for (auto g : groups) ++c[static_cast<std::size_t>(g)];
  return c;
}

// |observed - expected| within k binomial standard deviations.
bool within_sigma(double successes, double trials, double p, double k = 4.0) {
  const double sd = std::sqrt(trials * p * (1.0 - p));
  return std::fabs(successes - trials * p) <= k * sd;
}

TEST_CASE("default block models") {
  const auto b = default_block_models();
  CHECK(at(b.rating, UserGroup::kW, ItemGroup::kFem) == 0.8);
  CHECK(at(b.rating, UserGroup::kWS, ItemGroup::kSTEM) == 0.8);
  CHECK(at(b.rating, UserGroup::kMS, ItemGroup::kFem) == 0.2);
  CHECK(at(b.rating, UserGroup::kM, ItemGroup::kMasc) == 0.8);
  for (const auto& row : b.observe_uniform) {
    for (double p : row) CHECK(p == 0.4);
  }
  CHECK(at(b.observe_biased, UserGroup::kMS, ItemGroup::kFem) == 0.05);
  CHECK(at(b.observe_biased, UserGroup::kW, ItemGroup::kFem) == 0.6);
  CHECK(at(b.observe_biased, UserGroup::kM, ItemGroup::kMasc) == 0.5);
  CHECK_NOTHROW(check_block_models(b));

  auto bad = b;
  bad.rating[0][0] = 1.2;
  CHECK_THROWS_AS(check_block_models(bad), Error);
}

TEST_CASE("regimes") {
  CHECK(parse_regime("P+O") == Regime::kPO);
  CHECK(to_string(Regime::kPO) == "P+O");
  for (auto r : kAllRegimes) CHECK(parse_regime(to_string(r)) == r);
  CHECK_THROWS_AS(parse_regime("Q"), Error);

  CHECK_FALSE(has_biased_population(Regime::kU));
  CHECK_FALSE(has_biased_observation(Regime::kU));
  CHECK_FALSE(has_biased_population(Regime::kO));
  CHECK(has_biased_observation(Regime::kO));
  CHECK(has_biased_population(Regime::kP));
  CHECK_FALSE(has_biased_observation(Regime::kP));
  CHECK(has_biased_population(Regime::kPO));
  CHECK(has_biased_observation(Regime::kPO));

  const auto b = default_block_models();
  CHECK(&b.observation(Regime::kU) == &b.observe_uniform);
  CHECK(&b.observation(Regime::kPO) == &b.observe_biased);
}

TEST_CASE("user group sampling") {
  const auto uni = sample_user_groups(400, Regime::kU, 1);
  CHECK(user_counts(uni.groups) == std::array<std::size_t, 4>{100, 100, 100, 100});
  const auto biased = sample_user_groups(400, Regime::kP, 1);
  CHECK(user_counts(biased.groups) == std::array<std::size_t, 4>{160, 40, 160, 40});
  for (std::size_t u = 0; u < 400; ++u) {
    const auto g = biased.groups[u];
    CHECK(biased.is_protected[u] == (g == UserGroup::kW || g == UserGroup::kWS));
  }
  const auto again = sample_user_groups(400, Regime::kP, 1);
  CHECK(again.groups == biased.groups);
  CHECK(sample_user_groups(400, Regime::kP, 2).groups != biased.groups);

  auto code = [](std::size_t n, Regime r) {
    try {
      sample_user_groups(n, r, 0);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::kIo;
  };
  CHECK(code(402, Regime::kU) == ErrorCode::kIndivisibleCount);
  CHECK(code(404, Regime::kPO) == ErrorCode::kIndivisibleCount);
}

TEST_CASE("item group sampling") {
  const auto items = sample_item_groups(300, 4);
  std::array<std::size_t, 3> c{};
  for (auto g : items) ++c[static_cast<std::size_t>(g)];
  CHECK(c == std::array<std::size_t, 3>{100, 100, 100});
  const auto three = sample_item_groups(3, 4);
  CHECK(std::count(three.begin(), three.end(), ItemGroup::kSTEM) == 1);
  CHECK(sample_item_groups(300, 4) == items);
  try {
    sample_item_groups(301, 0);
    FAIL("expected IndivisibleCount");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kIndivisibleCount);
  }
}

TEST_CASE("uniform regime observation count") {
  const auto data = generate({Regime::kU, 400, 300, 3}, default_block_models());
  CHECK(within_sigma(static_cast<double>(data.dataset.ratings.size()), 120000.0, 0.4));
  CHECK_NOTHROW(check_dataset(data.dataset));
  for (const auto& r : data.dataset.ratings) CHECK((r.value == 0.0 || r.value == 1.0));
}

TEST_CASE("block statistics match the block models") {
  const auto blocks = default_block_models();
  for (auto regime : kAllRegimes) {
    for (std::uint64_t seed : {10u, 11u}) {
      CAPTURE(to_string(regime));
      const auto data = generate({regime, 400, 300, seed}, blocks);
      const auto& d = data.dataset;
      std::array<std::array<double, 3>, 4> cells{}, observed{}, liked{};
      for (std::size_t u = 0; u < d.num_users; ++u) {
        for (std::size_t j = 0; j < d.num_items; ++j) {
          cells[static_cast<std::size_t>((*d.user_groups)[u])]
               [static_cast<std::size_t>((*d.item_groups)[j])] += 1;
        }
      }
      for (const auto& r : d.ratings) {
        const auto g = static_cast<std::size_t>((*d.user_groups)[r.user]);
        const auto h = static_cast<std::size_t>((*d.item_groups)[r.item]);
        observed[g][h] += 1;
        liked[g][h] += r.value;
      }
      const auto& obs = blocks.observation(regime);
      for (std::size_t g = 0; g < 4; ++g) {
        for (std::size_t h = 0; h < 3; ++h) {
          CHECK(within_sigma(observed[g][h], cells[g][h], obs[g][h]));
          CHECK(within_sigma(liked[g][h], observed[g][h], blocks.rating[g][h]));
        }
      }
    }
  }
}

TEST_CASE("expected ratings and the unobserved evaluation set") {
  const auto data = generate({Regime::kPO, 40, 30, 1}, default_block_models());
  const auto& d = data.dataset;
  for (std::size_t u = 0; u < d.num_users; ++u) {
    for (std::size_t j = 0; j < d.num_items; ++j) {
      CHECK(data.expected_rating(u, j) ==
            at(data.blocks.rating, (*d.user_groups)[u], (*d.item_groups)[j]));
    }
  }
  for (std::size_t u = 0; u < d.num_users; ++u) {
    if ((*d.user_groups)[u] != UserGroup::kW) continue;
    for (std::size_t j = 0; j < d.num_items; ++j) {
      if ((*d.item_groups)[j] == ItemGroup::kFem) CHECK(data.expected_rating(u, j) == 0.8);
    }
  }
  CHECK_THROWS_AS(data.expected_rating(40, 0), Error);

  const auto eval = data.unobserved_expected(d);
  CHECK(eval.source == EvalSource::kExpectedValues);
  CHECK(eval.entries.size() + d.ratings.size() == 40 * 30);
  std::vector<bool> seen(40 * 30, false);
  for (const auto& r : d.ratings) seen[r.user * 30 + r.item] = true;
  for (const auto& e : eval.entries) {
    CHECK_FALSE(seen[e.user * 30 + e.item]);
    CHECK(e.value == data.expected_rating(e.user, e.item));
  }
}

TEST_CASE("generation is deterministic per seed") {
  const auto a = generate({Regime::kO, 40, 30, 5}, default_block_models());
  const auto b = generate({Regime::kO, 40, 30, 5}, default_block_models());
  CHECK(a.dataset == b.dataset);
  const auto c = generate({Regime::kO, 40, 30, 6}, default_block_models());
  CHECK_FALSE(a.dataset == c.dataset);
  CHECK_THROWS_AS(generate({Regime::kU, 2, 30, 5}, default_block_models()), Error);
}

TEST_CASE("sidecar") {
  const RegimeConfig rc{Regime::kO, 4, 3, 5};
  const auto data = generate(rc, default_block_models());
  std::ostringstream out;
  write_sidecar(out, data, rc);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "regime=O seed=5 users=4 items=3");
  std::getline(in, line);
  CHECK(line == "L W 0.8 0.2 0.2");
  for (int i = 0; i < 3; ++i) std::getline(in, line);
  std::getline(in, line);
  CHECK(line == "O W 0.6 0.2 0.1");
  std::size_t user_lines = 0, item_lines = 0;
  while (std::getline(in, line)) {
    user_lines += line[0] == 'u';
    item_lines += line[0] == 'g';
  }
  CHECK(user_lines == 4);
  CHECK(item_lines == 3);
}

}  // namespace
}  // namespace fairrec
