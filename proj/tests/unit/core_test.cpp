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

#include <limits>
#include <random>
#include <sstream>

#include "fairrec/core.hpp"
#include "support/oracles.hpp"

namespace fairrec {
namespace {

Dataset minimal() {
  Dataset d;
  d.num_users = 2;
  d.num_items = 1;
  d.is_protected = {true, false};
  d.ratings = {{0, 0, 1.0}};
  d.scale = {0.0, 1.0};
  return d;
}

ErrorCode code_of(const Dataset& d) {
  try {
    check_dataset(d);
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("dataset was accepted");
  return ErrorCode::kIo;
}

TEST_CASE("minimal dataset validates unchanged") {
  const Dataset d = minimal();
  CHECK(validate_dataset(d) == d);
  // Idempotent.
  CHECK(validate_dataset(validate_dataset(d)) == d);
}

TEST_CASE("dataset invariant violations") {
  SUBCASE("duplicate pair") {
    Dataset d = minimal();
    d.ratings.push_back({0, 0, 0.5});
    CHECK(code_of(d) == ErrorCode::kDuplicateRating);
  }
  SUBCASE("all users protected") {
    Dataset d = minimal();
    d.is_protected = {true, true};
    CHECK(code_of(d) == ErrorCode::kEmptyGroup);
  }
  SUBCASE("no user protected") {
    Dataset d = minimal();
    d.is_protected = {false, false};
    CHECK(code_of(d) == ErrorCode::kEmptyGroup);
  }
  SUBCASE("item out of range") {
    Dataset d = minimal();
    d.ratings.push_back({1, 1, 0.5});
    CHECK(code_of(d) == ErrorCode::kIndexOutOfRange);
  }
  SUBCASE("user out of range") {
    Dataset d = minimal();
    d.ratings.push_back({2, 0, 0.5});
    CHECK(code_of(d) == ErrorCode::kIndexOutOfRange);
  }
  SUBCASE("rating above scale") {
    Dataset d = minimal();
    d.ratings[0].value = 1.5;
    CHECK(code_of(d) == ErrorCode::kRatingOutOfScale);
  }
  SUBCASE("nan rating") {
    Dataset d = minimal();
    d.ratings[0].value = std::numeric_limits<double>::quiet_NaN();
    CHECK(code_of(d) == ErrorCode::kRatingOutOfScale);
  }
  SUBCASE("short protected vector") {
    Dataset d = minimal();
    d.is_protected = {true};
    CHECK(code_of(d) == ErrorCode::kIndexOutOfRange);
  }
}

TEST_CASE("dataset text format") {
  Dataset d;
  d.num_users = 3;
  d.num_items = 2;
  d.is_protected = {true, false, true};
  d.user_groups = std::vector<UserGroup>{UserGroup::kW, UserGroup::kM, UserGroup::kWS};
  d.item_groups = std::vector<ItemGroup>{ItemGroup::kSTEM, ItemGroup::kFem};
  d.scale = {1.0, 5.0};
  d.ratings = {{2, 1, 4.0}, {0, 1, 1.0 / 3.0 + 1.0}, {0, 0, 5.0}};

  std::ostringstream out;
  write_dataset(out, d);
  CHECK(out.str() ==
        "users=3 items=2 scale=1,5\n"
        "u 0 1 W\n"
        "u 1 0 M\n"
        "u 2 1 WS\n"
        "g 0 STEM\n"
        "g 1 Fem\n"
        "r 0 0 5\n"
        "r 0 1 1.3333333333333333\n"
        "r 2 1 4\n");

  std::istringstream in(out.str());
  const Dataset back = read_dataset(in);
  CHECK(back.ratings.size() == 3);
  CHECK(back.ratings[1].value == d.ratings[1].value);  // bit-exact
  CHECK(back.user_groups == d.user_groups);
  CHECK(back.item_groups == d.item_groups);
  CHECK(back.is_protected == d.is_protected);
}

TEST_CASE("round trip on random datasets is exact") {
  std::mt19937_64 rng(11);
  for (int rep = 0; rep < 20; ++rep) {
    auto inst = testing::random_instance(rng, 8, 8, 2);
    std::ostringstream out;
    write_dataset(out, inst.data);
    std::istringstream in(out.str());
    Dataset back = read_dataset(in);
    auto sorted = inst.data;
    std::sort(sorted.ratings.begin(), sorted.ratings.end(), [](const Rating& a, const Rating& b) {
      return a.user != b.user ? a.user < b.user : a.item < b.item;
    });
    CHECK(back == sorted);
  }
}

TEST_CASE("malformed dataset text") {
  auto code = [](const std::string& text) {
    std::istringstream in(text);
    try {
      read_dataset(in);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::kIo;
  };
  CHECK(code("") == ErrorCode::kMalformedLine);
  CHECK(code("users=2 items=1\n") == ErrorCode::kMalformedLine);
  CHECK(code("users=2 items=1 scale=0,1\nu 0 1\n") == ErrorCode::kMalformedLine);
  CHECK(code("users=2 items=1 scale=0,1\nu 0 1\nu 1 2\n") == ErrorCode::kMalformedLine);
  CHECK(code("users=2 items=1 scale=0,1\nu 0 1\nu 1 0\nr 0 0\n") == ErrorCode::kMalformedLine);
  CHECK(code("users=2 items=1 scale=0,1\nu 0 1\nu 1 0\nr 0 0 x\n") == ErrorCode::kMalformedLine);
  CHECK(code("users=2 items=1 scale=0,1\nu 0 1\nu 1 0\nq 0 0 1\n") == ErrorCode::kMalformedLine);
  CHECK(code("users=2 items=1 scale=0,1\nu 0 1\nu 5 0\n") == ErrorCode::kIndexOutOfRange);
  CHECK(code("users=2 items=1 scale=0,1\nu 0 1\nu 1 0\nr 0 0 2\n") ==
        ErrorCode::kRatingOutOfScale);

  std::istringstream blank_lines("users=2 items=1 scale=0,1\nu 0 1\nu 1 0\n  \n\nr 0 0 1\n");
  CHECK(read_dataset(blank_lines).ratings.size() == 1);
}

TEST_CASE("format_double round-trips") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> dist(-1e6, 1e6);
  for (int i = 0; i < 200; ++i) {
    const double x = dist(rng);
    CHECK(parse_double(format_double(x)) == x);
  }
  CHECK(format_double(0.5) == "0.5");
  CHECK_THROWS_AS(parse_double("1.5x"), Error);
}

TEST_CASE("hyperparameter bounds") {
  Hyperparams h;
  CHECK_NOTHROW(check_hyperparams(h));
  h.d = 0;
  CHECK_THROWS_AS(check_hyperparams(h), Error);
  h = {};
  h.lambda = -1;
  CHECK_THROWS_AS(check_hyperparams(h), Error);
  h = {};
  h.alpha = -0.1;
  CHECK_THROWS_AS(check_hyperparams(h), Error);
  h = {};
  h.iterations = 0;
  CHECK_THROWS_AS(check_hyperparams(h), Error);
  h = {};
  h.init_scale = 0;
  CHECK_THROWS_AS(check_hyperparams(h), Error);
}

TEST_CASE("gradient add_scaled") {
  Gradient a(ParameterBlocks(2, 3, 2));
  Gradient b(ParameterBlocks(2, 3, 2));
  b.user_bias[1] = 2.0;
  b.item_factors(2, 1) = -1.0;
  a.add_scaled(b, 0.5);
  CHECK(a.user_bias[1] == 1.0);
  CHECK(a.item_factors(2, 1) == -0.5);
  Gradient c(ParameterBlocks(2, 2, 2));
  CHECK_THROWS_AS(a.add_scaled(c, 1.0), Error);
}

TEST_CASE("group label names") {
  for (auto g : {UserGroup::kW, UserGroup::kWS, UserGroup::kMS, UserGroup::kM}) {
    CHECK(parse_user_group(to_string(g)) == g);
  }
  for (auto g : {ItemGroup::kFem, ItemGroup::kSTEM, ItemGroup::kMasc}) {
    CHECK(parse_item_group(to_string(g)) == g);
  }
  CHECK_THROWS_AS(parse_user_group("X"), Error);
}

}  // namespace
}  // namespace fairrec
