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

#ifndef FAIRREC_SYNTHGEN_HPP_
#define FAIRREC_SYNTHGEN_HPP_

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string_view>
#include <vector>

#include "fairrec/core.hpp"
#include "fairrec/metrics.hpp"

namespace fairrec {

/// Rows follow UserGroup order (W, WS, MS, M), columns ItemGroup order
/// (Fem, STEM, Masc).
using BlockMatrix = std::array<std::array<double, kNumItemGroups>, kNumUserGroups>;

inline double at(const BlockMatrix& b, UserGroup u, ItemGroup i) {
  return b[static_cast<std::size_t>(u)][static_cast<std::size_t>(i)];
}

/// Underrepresentation regimes: U = uniform population and observations,
/// O = biased observations, P = biased population, PO = both.
enum class Regime { kU, kO, kP, kPO };

std::string_view to_string(Regime r);
Regime parse_regime(std::string_view s);
bool has_biased_population(Regime r);
bool has_biased_observation(Regime r);

inline constexpr std::array<Regime, 4> kAllRegimes = {Regime::kU, Regime::kO, Regime::kP,
                                                      Regime::kPO};

struct BlockModels {
  BlockMatrix rating;           // P(user likes item)
  BlockMatrix observe_uniform;  // P(rating observed), uniform regimes
  BlockMatrix observe_biased;   // P(rating observed), biased regimes

  const BlockMatrix& observation(Regime r) const {
    return has_biased_observation(r) ? observe_biased : observe_uniform;
  }
};

/// Throws kInvalidArgument if any entry lies outside [0, 1].
void check_block_models(const BlockModels& b);

/// The course-recommendation block models.
BlockModels default_block_models();

struct RegimeConfig {
  Regime regime = Regime::kU;
  std::size_t num_users = 400;
  std::size_t num_items = 300;
  std::uint64_t seed = 0;
};

struct UserAssignment {
  std::vector<UserGroup> groups;
  std::vector<bool> is_protected;  // W and WS
};

/// Exact group counts, shuffled per seed. Uniform populations need n % 4 == 0,
/// biased ones (0.4, 0.1, 0.4, 0.1 over W, WS, MS, M) need n % 10 == 0.
UserAssignment sample_user_groups(std::size_t num_users, Regime regime, std::uint64_t seed);

/// Exact thirds, shuffled per seed. Needs m % 3 == 0.
std::vector<ItemGroup> sample_item_groups(std::size_t num_items, std::uint64_t seed);

struct SyntheticData {
  Dataset dataset;
  BlockModels blocks;
  Regime regime = Regime::kU;

  /// Block-model probability of a like, defined for every pair.
  double expected_rating(std::size_t user, std::size_t item) const;

  /// Every pair absent from `observed`, with its expected rating as truth.
  EvalSet unobserved_expected(const Dataset& observed) const;
};

/// Each pair is observed with probability O[g][h]; an observed pair gets a
/// Bernoulli(L[g][h]) rating in {0, 1}. Deterministic per config.seed.
SyntheticData generate(const RegimeConfig& config, const BlockModels& blocks);

/// Records the regime, seed and the block matrices used.
void write_sidecar(std::ostream& out, const SyntheticData& data, const RegimeConfig& config);

}  // namespace fairrec

#endif  // FAIRREC_SYNTHGEN_HPP_
