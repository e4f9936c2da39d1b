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

#ifndef FAIRREC_TRAINER_HPP_
#define FAIRREC_TRAINER_HPP_

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "fairrec/core.hpp"
#include "fairrec/penalties.hpp"

namespace fairrec {

/// Factors ~ N(0, init_scale^2) i.i.d., biases zero. Deterministic per seed;
/// init_scale == 0 gives all-zero factors.
FactorModel init_model(std::size_t num_users, std::size_t num_items, std::size_t dim,
                       std::uint64_t seed, double init_scale = 0.1);

struct AdamState {
  Gradient first_moment;
  Gradient second_moment;
  std::uint64_t step = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  AdamState() = default;
  explicit AdamState(const ParameterBlocks& shape)
      : first_moment(shape), second_moment(shape) {}
};

/// One bias-corrected Adam update of `params` in place. Throws kShapeMismatch
/// when the state, parameters and gradient disagree in shape.
void adam_step(AdamState& state, FactorModel& params, const Gradient& grad,
               double learning_rate);

struct TraceRow {
  double objective = 0.0;
  double penalty = 0.0;
  double combined = 0.0;

  friend bool operator==(const TraceRow&, const TraceRow&) = default;
};

/// One row per iteration, holding the values at the parameters the step
/// started from.
using TrainTrace = std::vector<TraceRow>;

struct TrainResult {
  FactorModel model;
  TrainTrace trace;
};

/// Full-batch Adam on J + alpha * U for `hyper.iterations` steps. Throws
/// kDivergenceDetected if the combined objective becomes non-finite.
TrainResult train(const Dataset& train_set, const Hyperparams& hyper, const PenaltySpec& spec);

void write_checkpoint(std::ostream& out, const FactorModel& model);
FactorModel read_checkpoint(std::istream& in);
void save_checkpoint(const std::string& path, const FactorModel& model);
FactorModel load_checkpoint(const std::string& path);

void write_trace(std::ostream& out, const TrainTrace& trace);

}  // namespace fairrec

#endif  // FAIRREC_TRAINER_HPP_
