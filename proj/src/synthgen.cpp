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

#include "fairrec/synthgen.hpp"

#include <algorithm>
#include <ostream>
#include <random>

namespace fairrec {

std::string_view to_string(Regime r) {
  switch (r) {
    case Regime::kU: return "U";
    case Regime::kO: return "O";
    case Regime::kP: return "P";
    case Regime::kPO: return "P+O";
  }
  return "?";
}

Regime parse_regime(std::string_view s) {
  if (s == "U" || s == "u") return Regime::kU;
  if (s == "O" || s == "o") return Regime::kO;
  if (s == "P" || s == "p") return Regime::kP;
  if (s == "P+O" || s == "p+o" || s == "PO" || s == "po") return Regime::kPO;
  throw Error(ErrorCode::kInvalidArgument, "unknown regime '" + std::string(s) + "'");
}

bool has_biased_population(Regime r) { return r == Regime::kP || r == Regime::kPO; }
bool has_biased_observation(Regime r) { return r == Regime::kO || r == Regime::kPO; }

void check_block_models(const BlockModels& b) {
  for (const BlockMatrix* m : {&b.rating, &b.observe_uniform, &b.observe_biased}) {
    for (const auto& row : *m) {
      for (double p : row) {
        if (!(p >= 0.0 && p <= 1.0)) {
          throw Error(ErrorCode::kInvalidArgument, "block probabilities must lie in [0, 1]");
        }
      }
    }
  }
}

BlockModels default_block_models() {
  BlockModels b;
  //            Fem   STEM  Masc
  b.rating = {{{0.8, 0.2, 0.2},     // W
               {0.8, 0.8, 0.2},     // WS
               {0.2, 0.8, 0.8},     // MS
               {0.2, 0.2, 0.8}}};   // M
  for (auto& row : b.observe_uniform) row.fill(0.4);
  b.observe_biased = {{{0.6, 0.2, 0.1},
                       {0.3, 0.4, 0.2},
                       {0.05, 0.5, 0.35},
                       {0.1, 0.3, 0.5}}};
  return b;
}

namespace {

// Independent streams per purpose so changing one sampler never shifts
// another's draws.
enum Stream : std::uint64_t { kUserStream = 1, kItemStream = 2, kRatingStream = 3 };

std::mt19937_64 make_rng(std::uint64_t seed, Stream stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream)};
  return std::mt19937_64(seq);
}

}  // namespace

UserAssignment sample_user_groups(std::size_t num_users, Regime regime, std::uint64_t seed) {
  std::array<std::size_t, kNumUserGroups> counts{};
  if (has_biased_population(regime)) {
    if (num_users % 10 != 0) {
      throw Error(ErrorCode::kIndivisibleCount, "biased population needs users % 10 == 0");
    }
    const std::size_t tenth = num_users / 10;
    counts = {4 * tenth, tenth, 4 * tenth, tenth};
  } else {
    if (num_users % 4 != 0) {
      throw Error(ErrorCode::kIndivisibleCount, "uniform population needs users % 4 == 0");
    }
    counts.fill(num_users / 4);
  }
  UserAssignment out;
  out.groups.reserve(num_users);
  for (std::size_t g = 0; g < kNumUserGroups; ++g) {
    out.groups.insert(out.groups.end(), counts[g], static_cast<UserGroup>(g));
  }
  auto rng = make_rng(seed, kUserStream);
  std::shuffle(out.groups.begin(), out.groups.end(), rng);
  out.is_protected.reserve(num_users);
  for (UserGroup g : out.groups) {
    out.is_protected.push_back(g == UserGroup::kW || g == UserGroup::kWS);
  }
  return out;
}

std::vector<ItemGroup> sample_item_groups(std::size_t num_items, std::uint64_t seed) {
  if (num_items == 0 || num_items % 3 != 0) {
    throw Error(ErrorCode::kIndivisibleCount, "items must be a positive multiple of 3");
  }
  std::vector<ItemGroup> groups;
  groups.reserve(num_items);
  for (std::size_t g = 0; g < kNumItemGroups; ++g) {
    groups.insert(groups.end(), num_items / 3, static_cast<ItemGroup>(g));
  }
  auto rng = make_rng(seed, kItemStream);
  std::shuffle(groups.begin(), groups.end(), rng);
  return groups;
}

double SyntheticData::expected_rating(std::size_t user, std::size_t item) const {
  if (user >= dataset.num_users || item >= dataset.num_items) {
    throw Error(ErrorCode::kIndexOutOfRange,
                "(" + std::to_string(user) + "," + std::to_string(item) + ")");
  }
  return at(blocks.rating, (*dataset.user_groups)[user], (*dataset.item_groups)[item]);
}

EvalSet SyntheticData::unobserved_expected(const Dataset& observed) const {
  std::vector<bool> seen(dataset.num_users * dataset.num_items, false);
  for (const Rating& r : observed.ratings) seen[r.user * dataset.num_items + r.item] = true;
  EvalSet eval;
  eval.source = EvalSource::kExpectedValues;
  for (std::size_t u = 0; u < dataset.num_users; ++u) {
    for (std::size_t j = 0; j < dataset.num_items; ++j) {
      if (!seen[u * dataset.num_items + j]) eval.entries.push_back({u, j, expected_rating(u, j)});
    }
  }
  return eval;
}

SyntheticData generate(const RegimeConfig& config, const BlockModels& blocks) {
  check_block_models(blocks);
  if (config.num_users < 4 || config.num_items < 3) {
    throw Error(ErrorCode::kInvalidArgument, "need at least 4 users and 3 items");
  }
  auto users = sample_user_groups(config.num_users, config.regime, config.seed);
  auto items = sample_item_groups(config.num_items, config.seed);

  SyntheticData out;
  out.blocks = blocks;
  out.regime = config.regime;
  Dataset& d = out.dataset;
  d.num_users = config.num_users;
  d.num_items = config.num_items;
  d.scale = {0.0, 1.0};
  d.is_protected = std::move(users.is_protected);

  const BlockMatrix& observe = blocks.observation(config.regime);
  auto rng = make_rng(config.seed, kRatingStream);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (std::size_t u = 0; u < d.num_users; ++u) {
    for (std::size_t j = 0; j < d.num_items; ++j) {
      const UserGroup g = users.groups[u];
      const ItemGroup h = items[j];
      // Both draws happen for every pair so the rating stream does not
      // depend on which pairs end up observed.
      const bool observed = unit(rng) < at(observe, g, h);
      const bool liked = unit(rng) < at(blocks.rating, g, h);
      if (observed) d.ratings.push_back({u, j, liked ? 1.0 : 0.0});
    }
  }
  d.user_groups = std::move(users.groups);
  d.item_groups = std::move(items);
  check_dataset(d);
  return out;
}

void write_sidecar(std::ostream& out, const SyntheticData& data, const RegimeConfig& config) {
  out << "regime=" << to_string(config.regime) << " seed=" << config.seed
      << " users=" << config.num_users << " items=" << config.num_items << '\n';
  auto write_block = [&out](std::string_view name, const BlockMatrix& b) {
    for (std::size_t g = 0; g < kNumUserGroups; ++g) {
      out << name << ' ' << to_string(static_cast<UserGroup>(g));
      for (double p : b[g]) out << ' ' << format_double(p);
      out << '\n';
    }
  };
  write_block("L", data.blocks.rating);
  write_block("O", data.blocks.observation(config.regime));
  for (std::size_t u = 0; u < data.dataset.num_users; ++u) {
    out << "u " << u << ' ' << to_string((*data.dataset.user_groups)[u]) << '\n';
  }
  for (std::size_t j = 0; j < data.dataset.num_items; ++j) {
    out << "g " << j << ' ' << to_string((*data.dataset.item_groups)[j]) << '\n';
  }
}

}  // namespace fairrec
