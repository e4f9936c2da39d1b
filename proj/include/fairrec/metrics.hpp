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

#ifndef FAIRREC_METRICS_HPP_
#define FAIRREC_METRICS_HPP_

#include <span>
#include <vector>

#include "fairrec/core.hpp"

namespace fairrec {

enum class EvalSource { kHeldOut, kExpectedValues };

struct EvalSet {
  std::vector<Rating> entries;
  EvalSource source = EvalSource::kHeldOut;
};

/// Per-item, per-group average prediction and true rating. Averages are only
/// meaningful where the matching count is nonzero.
struct GroupItemAverages {
  struct Side {
    std::vector<double> mean_pred;
    std::vector<double> mean_true;
    std::vector<std::size_t> count;

    bool present(std::size_t item) const { return count[item] > 0; }
    /// Signed estimation error E[y]_j - E[r]_j.
    double error(std::size_t item) const { return mean_pred[item] - mean_true[item]; }
  };

  Side disadvantaged;
  Side advantaged;

  std::size_t num_items() const { return disadvantaged.count.size(); }
  bool comparable(std::size_t item) const {
    return disadvantaged.present(item) && advantaged.present(item);
  }
  std::size_t num_comparable() const;
};

/// The four per-item unfairness measures.
enum class ItemMetric { kValue, kAbsolute, kUnder, kOver };

/// max(x, 0)
double hinge(double x);

/// Per-item discrepancy for `kind` given the signed errors (prediction minus
/// truth) of the disadvantaged and advantaged groups on one item.
double item_term(ItemMetric kind, double disadvantaged_error, double advantaged_error);

GroupItemAverages group_item_averages(const FactorModel& model, const EvalSet& eval,
                                      const std::vector<bool>& is_protected);

/// Same averages from precomputed predictions (aligned with `entries`).
GroupItemAverages group_item_averages(std::span<const Rating> entries,
                                      std::span<const double> predictions,
                                      const std::vector<bool>& is_protected,
                                      std::size_t num_items);

/// Mean of `item_term(kind, ...)` over items where both groups are present.
/// Throws kNoComparableItems when there are none.
double item_unfairness(ItemMetric kind, const GroupItemAverages& avgs);

double value_unfairness(const GroupItemAverages& avgs);
double absolute_unfairness(const GroupItemAverages& avgs);
double underestimation_unfairness(const GroupItemAverages& avgs);
double overestimation_unfairness(const GroupItemAverages& avgs);

/// |mean prediction over disadvantaged entries - mean over advantaged
/// entries|. Throws kEmptyGroup if either side has no entries.
double non_parity(const FactorModel& model, const EvalSet& eval,
                  const std::vector<bool>& is_protected);

double rmse(const FactorModel& model, const EvalSet& eval);
double mse(const FactorModel& model, const EvalSet& eval);

enum class ErrorMeasure { kRmse, kMse };

MetricReport full_report(const FactorModel& model, const EvalSet& eval,
                         const std::vector<bool>& is_protected,
                         ErrorMeasure error = ErrorMeasure::kRmse);

/// Views a dataset's ratings as a held-out evaluation set.
EvalSet as_eval_set(const Dataset& d);

}  // namespace fairrec

#endif  // FAIRREC_METRICS_HPP_
