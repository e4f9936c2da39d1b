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

#include "fairrec/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>

#include "fairrec/factorization.hpp"
#include "ordering.hpp"

namespace fairrec {

FactorModel init_model(std::size_t num_users, std::size_t num_items, std::size_t dim,
                       std::uint64_t seed, double init_scale) {
  if (num_users < 1 || num_items < 1 || dim < 1) {
    throw Error(ErrorCode::kInvalidArgument, "model dimensions must be >= 1");
  }
  if (!(init_scale >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "init_scale must be >= 0");
  FactorModel model(num_users, num_items, dim);
  if (init_scale == 0.0) return model;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, init_scale);
  for (double& x : model.user_factors.values()) x = normal(rng);
  for (double& x : model.item_factors.values()) x = normal(rng);
  return model;
}

void adam_step(AdamState& state, FactorModel& params, const Gradient& grad,
               double learning_rate) {
  if (!params.same_shape(grad) || !params.same_shape(state.first_moment) ||
      !params.same_shape(state.second_moment)) {
    throw Error(ErrorCode::kShapeMismatch, "adam_step");
  }
  state.step += 1;
  const double t = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(state.beta1, t);
  const double correction2 = 1.0 - std::pow(state.beta2, t);

  auto theta = params.blocks();
  auto g = grad.blocks();
  auto m = state.first_moment.blocks();
  auto v = state.second_moment.blocks();
  for (std::size_t b = 0; b < theta.size(); ++b) {
    for (std::size_t k = 0; k < theta[b].size(); ++k) {
      m[b][k] = state.beta1 * m[b][k] + (1.0 - state.beta1) * g[b][k];
      v[b][k] = state.beta2 * v[b][k] + (1.0 - state.beta2) * g[b][k] * g[b][k];
      const double m_hat = m[b][k] / correction1;
      const double v_hat = v[b][k] / correction2;
      theta[b][k] -= learning_rate * m_hat / (std::sqrt(v_hat) + state.epsilon);
    }
  }
}

TrainResult train(const Dataset& train_set, const Hyperparams& hyper, const PenaltySpec& spec) {
  check_dataset(train_set);
  check_hyperparams(hyper);
  check_penalty_spec(spec);
  if (train_set.ratings.empty()) {
    throw Error(ErrorCode::kEmptyTrainingSet, "no training ratings");
  }

  // Canonical entry order once up front; every reduction below then runs in
  // the same order regardless of how the caller built the dataset.
  std::vector<Rating> entries = train_set.ratings;
  std::sort(entries.begin(), entries.end(), detail::rating_less);

  TrainResult result{init_model(train_set.num_users, train_set.num_items, hyper.d, hyper.seed,
                                hyper.init_scale),
                     {}};
  FactorModel& model = result.model;
  result.trace.reserve(hyper.iterations);
  AdamState adam(model);

  const bool penalized = !spec.is_none();
  const double inv_n = 1.0 / static_cast<double>(entries.size());
  std::vector<double> dpred(entries.size());

  for (std::size_t it = 0; it < hyper.iterations; ++it) {
    const auto pred = predict_all(model, entries);
    double sse = 0.0;
    for (std::size_t k = 0; k < entries.size(); ++k) {
      const double res = pred[k] - entries[k].value;
      sse += res * res;
      dpred[k] = 2.0 * inv_n * res;
    }
    TraceRow row;
    row.objective = 0.5 * hyper.lambda * factor_sq_norm(model) + sse * inv_n;
    if (penalized) {
      const auto pen = evaluate_penalty(entries, pred, train_set.is_protected,
                                        train_set.num_items, spec);
      row.penalty = pen.value;
      if (hyper.alpha != 0.0) {
        for (std::size_t k = 0; k < entries.size(); ++k) dpred[k] += hyper.alpha * pen.dpred[k];
      }
    }
    row.combined = row.objective + hyper.alpha * row.penalty;
    if (!std::isfinite(row.combined)) {
      throw Error(ErrorCode::kDivergenceDetected,
                  "combined objective is not finite at iteration " + std::to_string(it));
    }
    result.trace.push_back(row);

    Gradient grad(model);
    backprop_predictions(model, entries, dpred, grad);
    if (hyper.lambda != 0.0) {
      auto gp = grad.user_factors.values();
      auto p = model.user_factors.values();
      for (std::size_t k = 0; k < p.size(); ++k) gp[k] += hyper.lambda * p[k];
      auto gq = grad.item_factors.values();
      auto q = model.item_factors.values();
      for (std::size_t k = 0; k < q.size(); ++k) gq[k] += hyper.lambda * q[k];
    }
    adam_step(adam, model, grad, hyper.learning_rate);
  }
  if (!model.all_finite()) {
    throw Error(ErrorCode::kDivergenceDetected, "parameters became non-finite");
  }
  return result;
}

void write_checkpoint(std::ostream& out, const FactorModel& model) {
  out << "d=" << model.dim() << " n=" << model.num_users() << " m=" << model.num_items() << '\n';
  auto write_rows = [&out](const Matrix& factors, const std::vector<double>& bias) {
    for (std::size_t r = 0; r < factors.rows(); ++r) {
      for (double x : factors.row(r)) out << format_double(x) << ' ';
      out << format_double(bias[r]) << '\n';
    }
  };
  write_rows(model.user_factors, model.user_bias);
  write_rows(model.item_factors, model.item_bias);
}

FactorModel read_checkpoint(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::kMalformedLine, "empty checkpoint");
  std::size_t d = 0, n = 0, m = 0;
  {
    std::istringstream hs(line);
    std::string td, tn, tm;
    hs >> td >> tn >> tm;
    if (td.rfind("d=", 0) != 0 || tn.rfind("n=", 0) != 0 || tm.rfind("m=", 0) != 0) {
      throw Error(ErrorCode::kMalformedLine, "line 1: bad checkpoint header");
    }
    try {
      d = std::stoul(td.substr(2));
      n = std::stoul(tn.substr(2));
      m = std::stoul(tm.substr(2));
    } catch (const std::exception&) {
      throw Error(ErrorCode::kMalformedLine, "line 1: bad checkpoint header");
    }
  }
  if (d < 1 || n < 1 || m < 1) throw Error(ErrorCode::kMalformedLine, "empty model dimensions");
  FactorModel model(n, m, d);
  std::size_t line_no = 1;
  auto read_rows = [&](Matrix& factors, std::vector<double>& bias) {
    for (std::size_t r = 0; r < factors.rows(); ++r) {
      ++line_no;
      if (!std::getline(in, line)) {
        throw Error(ErrorCode::kMalformedLine, "checkpoint truncated at line " +
                                                   std::to_string(line_no));
      }
      std::istringstream ls(line);
      std::string tok;
      std::vector<double> vals;
      while (ls >> tok) vals.push_back(parse_double(tok));
      if (vals.size() != d + 1) {
        throw Error(ErrorCode::kMalformedLine,
                    "line " + std::to_string(line_no) + ": expected d+1 values");
      }
      std::copy(vals.begin(), vals.end() - 1, factors.row(r).begin());
      bias[r] = vals.back();
    }
  };
  read_rows(model.user_factors, model.user_bias);
  read_rows(model.item_factors, model.item_bias);
  return model;
}

void save_checkpoint(const std::string& path, const FactorModel& model) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path);
  write_checkpoint(out, model);
}

FactorModel load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot read " + path);
  return read_checkpoint(in);
}

void write_trace(std::ostream& out, const TrainTrace& trace) {
  out << "iteration,objective,penalty,combined\n";
  for (std::size_t i = 0; i < trace.size(); ++i) {
    out << i << ',' << format_double(trace[i].objective) << ','
        << format_double(trace[i].penalty) << ',' << format_double(trace[i].combined) << '\n';
  }
}

}  // namespace fairrec
