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

#include "fairrec/factorization.hpp"

#include <numeric>

namespace fairrec {

namespace {

inline double predict_unchecked(const FactorModel& model, std::size_t user, std::size_t item) {
  auto p = model.user_factors.row(user);
  auto q = model.item_factors.row(item);
  return std::inner_product(p.begin(), p.end(), q.begin(), 0.0) + model.user_bias[user] +
         model.item_bias[item];
}

void check_entry(const FactorModel& model, std::size_t user, std::size_t item) {
  if (user >= model.num_users() || item >= model.num_items()) {
    throw Error(ErrorCode::kIndexOutOfRange,
                "(" + std::to_string(user) + "," + std::to_string(item) + ")");
  }
}

}  // namespace

double predict(const FactorModel& model, std::size_t user, std::size_t item) {
  check_entry(model, user, item);
  return predict_unchecked(model, user, item);
}

std::vector<double> predict_all(const FactorModel& model, std::span<const Rating> entries) {
  std::vector<double> out;
  out.reserve(entries.size());
  for (const Rating& r : entries) {
    check_entry(model, r.user, r.item);
    out.push_back(predict_unchecked(model, r.user, r.item));
  }
  return out;
}

double factor_sq_norm(const FactorModel& model) {
  double s = 0.0;
  for (double x : model.user_factors.values()) s += x * x;
  for (double x : model.item_factors.values()) s += x * x;
  return s;
}

double objective(const FactorModel& model, const Dataset& train, double lambda) {
  if (train.ratings.empty()) throw Error(ErrorCode::kEmptyTrainingSet, "no training ratings");
  const auto pred = predict_all(model, train.ratings);
  double sse = 0.0;
  for (std::size_t k = 0; k < pred.size(); ++k) {
    const double res = pred[k] - train.ratings[k].value;
    sse += res * res;
  }
  return 0.5 * lambda * factor_sq_norm(model) + sse / static_cast<double>(pred.size());
}

void backprop_predictions(const FactorModel& model, std::span<const Rating> entries,
                          std::span<const double> dpred, Gradient& grad) {
  if (!grad.same_shape(model) || dpred.size() != entries.size()) {
    throw Error(ErrorCode::kShapeMismatch, "backprop_predictions");
  }
  const std::size_t dim = model.dim();
  for (std::size_t k = 0; k < entries.size(); ++k) {
    const double g = dpred[k];
    if (g == 0.0) continue;
    const Rating& r = entries[k];
    auto p = model.user_factors.row(r.user);
    auto q = model.item_factors.row(r.item);
    auto gp = grad.user_factors.row(r.user);
    auto gq = grad.item_factors.row(r.item);
    for (std::size_t f = 0; f < dim; ++f) {
      gp[f] += g * q[f];
      gq[f] += g * p[f];
    }
    grad.user_bias[r.user] += g;
    grad.item_bias[r.item] += g;
  }
}

Gradient objective_gradient(const FactorModel& model, const Dataset& train, double lambda) {
  if (train.ratings.empty()) throw Error(ErrorCode::kEmptyTrainingSet, "no training ratings");
  const auto pred = predict_all(model, train.ratings);
  const double scale = 2.0 / static_cast<double>(pred.size());
  std::vector<double> dpred(pred.size());
  for (std::size_t k = 0; k < pred.size(); ++k) {
    dpred[k] = scale * (pred[k] - train.ratings[k].value);
  }
  Gradient grad(model);
  backprop_predictions(model, train.ratings, dpred, grad);
  if (lambda != 0.0) {
    auto gp = grad.user_factors.values();
    auto p = model.user_factors.values();
    for (std::size_t k = 0; k < p.size(); ++k) gp[k] += lambda * p[k];
    auto gq = grad.item_factors.values();
    auto q = model.item_factors.values();
    for (std::size_t k = 0; k < q.size(); ++k) gq[k] += lambda * q[k];
  }
  return grad;
}

}  // namespace fairrec
