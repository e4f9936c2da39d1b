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

#include "fairrec/metrics.hpp"

#include <cmath>

#include "fairrec/factorization.hpp"
#include "ordering.hpp"

namespace fairrec {

std::size_t GroupItemAverages::num_comparable() const {
  std::size_t n = 0;
  for (std::size_t j = 0; j < num_items(); ++j) n += comparable(j) ? 1 : 0;
  return n;
}

double hinge(double x) { return x >= 0.0 ? x : 0.0; }

double item_term(ItemMetric kind, double disadvantaged_error, double advantaged_error) {
  const double a = disadvantaged_error;
  const double b = advantaged_error;
  switch (kind) {
    case ItemMetric::kValue: return std::abs(a - b);
    case ItemMetric::kAbsolute: return std::abs(std::abs(a) - std::abs(b));
    case ItemMetric::kUnder: return std::abs(hinge(-a) - hinge(-b));
    case ItemMetric::kOver: return std::abs(hinge(a) - hinge(b));
  }
  return 0.0;
}

GroupItemAverages group_item_averages(std::span<const Rating> entries,
                                      std::span<const double> predictions,
                                      const std::vector<bool>& is_protected,
                                      std::size_t num_items) {
  if (predictions.size() != entries.size()) {
    throw Error(ErrorCode::kShapeMismatch, "predictions do not match entries");
  }
  GroupItemAverages avgs;
  for (auto* side : {&avgs.disadvantaged, &avgs.advantaged}) {
    side->mean_pred.assign(num_items, 0.0);
    side->mean_true.assign(num_items, 0.0);
    side->count.assign(num_items, 0);
  }
  for (std::size_t k : detail::canonical_order(entries)) {
    const Rating& r = entries[k];
    if (r.user >= is_protected.size() || r.item >= num_items) {
      throw Error(ErrorCode::kIndexOutOfRange,
                  "(" + std::to_string(r.user) + "," + std::to_string(r.item) + ")");
    }
    auto& side = is_protected[r.user] ? avgs.disadvantaged : avgs.advantaged;
    side.mean_pred[r.item] += predictions[k];
    side.mean_true[r.item] += r.value;
    side.count[r.item] += 1;
  }
  for (auto* side : {&avgs.disadvantaged, &avgs.advantaged}) {
    for (std::size_t j = 0; j < num_items; ++j) {
      if (side->count[j] == 0) continue;
      const auto n = static_cast<double>(side->count[j]);
      side->mean_pred[j] /= n;
      side->mean_true[j] /= n;
    }
  }
  return avgs;
}

GroupItemAverages group_item_averages(const FactorModel& model, const EvalSet& eval,
                                      const std::vector<bool>& is_protected) {
  const auto pred = predict_all(model, eval.entries);
  return group_item_averages(eval.entries, pred, is_protected, model.num_items());
}

double item_unfairness(ItemMetric kind, const GroupItemAverages& avgs) {
  double total = 0.0;
  std::size_t counted = 0;
  for (std::size_t j = 0; j < avgs.num_items(); ++j) {
    if (!avgs.comparable(j)) continue;
    total += item_term(kind, avgs.disadvantaged.error(j), avgs.advantaged.error(j));
    ++counted;
  }
  if (counted == 0) {
    throw Error(ErrorCode::kNoComparableItems, "no item is rated by both groups");
  }
  return total / static_cast<double>(counted);
}

double value_unfairness(const GroupItemAverages& avgs) {
  return item_unfairness(ItemMetric::kValue, avgs);
}
double absolute_unfairness(const GroupItemAverages& avgs) {
  return item_unfairness(ItemMetric::kAbsolute, avgs);
}
double underestimation_unfairness(const GroupItemAverages& avgs) {
  return item_unfairness(ItemMetric::kUnder, avgs);
}
double overestimation_unfairness(const GroupItemAverages& avgs) {
  return item_unfairness(ItemMetric::kOver, avgs);
}

namespace {

double parity_from_predictions(std::span<const Rating> entries,
                               std::span<const double> pred,
                               const std::vector<bool>& is_protected) {
  double sum[2] = {0.0, 0.0};
  std::size_t count[2] = {0, 0};
  for (std::size_t k : detail::canonical_order(entries)) {
    const std::size_t u = entries[k].user;
    if (u >= is_protected.size()) {
      throw Error(ErrorCode::kIndexOutOfRange, "user " + std::to_string(u));
    }
    const int side = is_protected[u] ? 0 : 1;
    sum[side] += pred[k];
    count[side] += 1;
  }
  if (count[0] == 0 || count[1] == 0) {
    throw Error(ErrorCode::kEmptyGroup, "non-parity needs entries from both groups");
  }
  return std::abs(sum[0] / static_cast<double>(count[0]) -
                  sum[1] / static_cast<double>(count[1]));
}

double mse_from_predictions(std::span<const Rating> entries, std::span<const double> pred) {
  if (entries.empty()) throw Error(ErrorCode::kEmptyEvalSet, "no evaluation entries");
  double sse = 0.0;
  for (std::size_t k : detail::canonical_order(entries)) {
    const double res = pred[k] - entries[k].value;
    sse += res * res;
  }
  return sse / static_cast<double>(entries.size());
}

}  // namespace

double non_parity(const FactorModel& model, const EvalSet& eval,
                  const std::vector<bool>& is_protected) {
  const auto pred = predict_all(model, eval.entries);
  return parity_from_predictions(eval.entries, pred, is_protected);
}

double mse(const FactorModel& model, const EvalSet& eval) {
  if (eval.entries.empty()) throw Error(ErrorCode::kEmptyEvalSet, "no evaluation entries");
  return mse_from_predictions(eval.entries, predict_all(model, eval.entries));
}

double rmse(const FactorModel& model, const EvalSet& eval) { return std::sqrt(mse(model, eval)); }

MetricReport full_report(const FactorModel& model, const EvalSet& eval,
                         const std::vector<bool>& is_protected, ErrorMeasure error) {
  if (eval.entries.empty()) throw Error(ErrorCode::kEmptyEvalSet, "no evaluation entries");
  const auto pred = predict_all(model, eval.entries);
  const auto avgs = group_item_averages(eval.entries, pred, is_protected, model.num_items());
  MetricReport r;
  const double m = mse_from_predictions(eval.entries, pred);
  r.error = error == ErrorMeasure::kRmse ? std::sqrt(m) : m;
  r.value = value_unfairness(avgs);
  r.absolute = absolute_unfairness(avgs);
  r.under = underestimation_unfairness(avgs);
  r.over = overestimation_unfairness(avgs);
  r.parity = parity_from_predictions(eval.entries, pred, is_protected);
  r.items_counted = avgs.num_comparable();
  return r;
}

EvalSet as_eval_set(const Dataset& d) { return EvalSet{d.ratings, EvalSource::kHeldOut}; }

}  // namespace fairrec
