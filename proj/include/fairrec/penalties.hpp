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

#ifndef FAIRREC_PENALTIES_HPP_
#define FAIRREC_PENALTIES_HPP_

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fairrec/core.hpp"

namespace fairrec {

enum class PenaltyKind { kNone, kValue, kAbsolute, kUnder, kOver, kParity };

std::string_view to_string(PenaltyKind kind);
PenaltyKind parse_penalty_kind(std::string_view s);

struct PenaltyTerm {
  PenaltyKind kind = PenaltyKind::kNone;
  double weight = 1.0;

  friend bool operator==(const PenaltyTerm&, const PenaltyTerm&) = default;
};

/// Weighted sum of unfairness terms. Subgradients use sign(0) = 0 and
/// hinge'(0) = 0. A positive `smoothing` replaces |x| by sqrt(x^2 + s^2) and
/// hinge(x) by (x + sqrt(x^2 + s^2)) / 2 in both value and gradient.
struct PenaltySpec {
  std::vector<PenaltyTerm> terms;
  double smoothing = 0.0;

  static PenaltySpec none() { return PenaltySpec{{{PenaltyKind::kNone, 1.0}}, 0.0}; }
  static PenaltySpec single(PenaltyKind kind, double weight = 1.0) {
    return PenaltySpec{{{kind, weight}}, 0.0};
  }

  /// True when no term contributes (empty, or the lone "none" term).
  bool is_none() const;

  /// Parses "none", "value:1.0", "under:0.5,over:0.5". Terms may also be
  /// joined with '+'. A bare kind means weight 1.
  static PenaltySpec parse(std::string_view text);
  /// Inverse of `parse`, e.g. "under:0.5,over:0.5".
  std::string to_string() const;
  /// Compact comma-free name for tables, e.g. "value" or "under+over";
  /// weights other than 1 are kept ("under:0.5+over:0.5"). Parses back.
  std::string label() const;

  friend bool operator==(const PenaltySpec&, const PenaltySpec&) = default;
};

void check_penalty_spec(const PenaltySpec& spec);

struct PenaltyEvaluation {
  double value = 0.0;
  /// dU/dprediction for every entry, aligned with the input entries.
  std::vector<double> dpred;
};

/// Penalty value and its derivative with respect to each prediction, given
/// predictions already computed for `entries`. This is the prediction-space
/// core that `penalty_value` and `penalty_gradient` wrap.
PenaltyEvaluation evaluate_penalty(std::span<const Rating> entries,
                                   std::span<const double> predictions,
                                   const std::vector<bool>& is_protected, std::size_t num_items,
                                   const PenaltySpec& spec);

double penalty_value(const FactorModel& model, const Dataset& train, const PenaltySpec& spec);

Gradient penalty_gradient(const FactorModel& model, const Dataset& train,
                          const PenaltySpec& spec);

}  // namespace fairrec

#endif  // FAIRREC_PENALTIES_HPP_
