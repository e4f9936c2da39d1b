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

#ifndef FAIRREC_FACTORIZATION_HPP_
#define FAIRREC_FACTORIZATION_HPP_

#include <span>
#include <vector>

#include "fairrec/core.hpp"

namespace fairrec {

/// p_user . q_item + b_user + b_item, unclamped. Throws kIndexOutOfRange.
double predict(const FactorModel& model, std::size_t user, std::size_t item);

/// Predictions for every entry of `entries`, in order. Indices are checked.
std::vector<double> predict_all(const FactorModel& model, std::span<const Rating> entries);

/// (lambda/2)(|P|_F^2 + |Q|_F^2) + mean squared residual over the training
/// ratings. Biases are not regularized.
double objective(const FactorModel& model, const Dataset& train, double lambda);

Gradient objective_gradient(const FactorModel& model, const Dataset& train, double lambda);

/// Pulls a per-entry derivative dL/dpred back onto the parameters:
/// grad(p_u) += g q_i, grad(q_i) += g p_u, grad(b_u) += g, grad(b_i) += g.
/// Accumulates into `grad`, which must match `model` in shape.
void backprop_predictions(const FactorModel& model, std::span<const Rating> entries,
                          std::span<const double> dpred, Gradient& grad);

/// |P|_F^2 + |Q|_F^2
double factor_sq_norm(const FactorModel& model);

}  // namespace fairrec

#endif  // FAIRREC_FACTORIZATION_HPP_
