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

#ifndef FAIRREC_SRC_ORDERING_HPP_
#define FAIRREC_SRC_ORDERING_HPP_

#include <algorithm>
#include <numeric>
#include <span>
#include <vector>

#include "fairrec/core.hpp"

namespace fairrec::detail {

inline bool rating_less(const Rating& a, const Rating& b) {
  if (a.user != b.user) return a.user < b.user;
  if (a.item != b.item) return a.item < b.item;
  return a.value < b.value;
}

// Index permutation visiting `entries` in (user, item, value) order. Every
// floating-point reduction walks this order so results never depend on how
// the caller happened to order its entries.
inline std::vector<std::size_t> canonical_order(std::span<const Rating> entries) {
  std::vector<std::size_t> order(entries.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  if (std::is_sorted(entries.begin(), entries.end(), rating_less)) return order;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return rating_less(entries[a], entries[b]);
  });
  return order;
}

}  // namespace fairrec::detail

#endif  // FAIRREC_SRC_ORDERING_HPP_
