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

#ifndef FAIRREC_HARNESS_HPP_
#define FAIRREC_HARNESS_HPP_

#include <array>
#include <cstdint>
#include <iosfwd>
#include <functional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fairrec/core.hpp"
#include "fairrec/metrics.hpp"
#include "fairrec/movielens.hpp"
#include "fairrec/penalties.hpp"
#include "fairrec/synthgen.hpp"

namespace fairrec {

enum class DataSource { kSynthetic, kMovieLens };

/// How the "±" column is computed.
enum class Spread { kStandardError, kStandardDeviation };

struct ExperimentConfig {
  DataSource source = DataSource::kSynthetic;

  // Synthetic source.
  Regime regime = Regime::kPO;
  std::size_t num_users = 400;
  std::size_t num_items = 300;

  // MovieLens source.
  std::string ml_path;
  std::vector<std::string> genres = default_genres();
  GenreMode genre_mode = kDefaultGenreMode;
  std::size_t min_ratings = 50;
  double train_fraction = 0.8;

  Hyperparams hyper;
  std::vector<PenaltySpec> penalties;
  std::size_t trials = 5;
  std::uint64_t seed = 0;
  Spread spread = Spread::kStandardError;
  ErrorMeasure error = ErrorMeasure::kRmse;
  /// Worker threads for trial-level parallelism; 0 means FAIRREC_THREADS or
  /// the hardware concurrency.
  std::size_t threads = 0;
};

/// none, value, absolute, under, over, parity, under+over.
std::vector<PenaltySpec> default_penalty_list();

/// Five trials on P+O, alpha = 10.
ExperimentConfig synthetic_defaults();
/// Three trials, five genres, 50 ratings minimum, alpha = 0.1.
ExperimentConfig movielens_defaults();

void check_config(const ExperimentConfig& c);

/// Applies flat "key = value" lines on top of `base`. Blank lines and
/// '#' comments are skipped, values may be double-quoted. Keys: source,
/// regime, users, items, ml_path, genres, genre_mode, min_ratings, split, d,
/// lambda, alpha, lr, iterations, init_scale, trials, seed, penalty (specs
/// separated by '|'), spread, error, threads.
ExperimentConfig parse_config(std::istream& in, ExperimentConfig base);
ExperimentConfig load_config(const std::string& path, ExperimentConfig base);

/// Applies one key/value pair; shared by the config file and CLI flags.
void apply_config_value(ExperimentConfig& c, std::string_view key, std::string_view value);

/// Training data and evaluation set for one trial. Synthetic trials evaluate
/// on the expected ratings of every unobserved pair; MovieLens trials on a
/// held-out split.
struct TrialData {
  Dataset train;
  EvalSet eval;
};

/// Seed for trial `trial_index`: config.seed + trial_index.
std::uint64_t trial_seed(const ExperimentConfig& c, std::size_t trial_index);

/// `movielens_base` is the filtered dataset; when null it is loaded from
/// config.ml_path.
TrialData prepare_trial(const ExperimentConfig& c, std::size_t trial_index,
                        const Dataset* movielens_base = nullptr);

/// Train with `spec` and evaluate. Deterministic in (config, spec, trial).
MetricReport run_trial(const ExperimentConfig& c, const PenaltySpec& spec,
                       std::size_t trial_index, const Dataset* movielens_base = nullptr);

MetricReport evaluate_trial(const ExperimentConfig& c, const PenaltySpec& spec,
                            std::size_t trial_index, const TrialData& data);

struct ResultCell {
  double mean = 0.0;
  double spread = 0.0;
  std::vector<double> raw;
};

struct ResultRow {
  std::string label;
  std::array<ResultCell, 6> cells;  // kMetricNames order
};

struct ResultTable {
  std::vector<ResultRow> rows;
  Spread spread = Spread::kStandardError;
  /// Set when some row had a single trial; its spread is 0 by convention.
  bool single_trial = false;

  const ResultRow& row(std::string_view label) const;
};

using LabeledReports = std::vector<std::pair<std::string, std::vector<MetricReport>>>;

/// Mean and standard error (sample std / sqrt(n)) or standard deviation per
/// cell. Row order follows the input.
ResultTable aggregate(const LabeledReports& reports, Spread spread = Spread::kStandardError);

/// Runs every penalty for every trial. Trials may run in parallel; results
/// are collected by index.
LabeledReports run_reports(const ExperimentConfig& c);
ResultTable run_experiment(const ExperimentConfig& c);

/// Standard MF (no penalty) on each of U, O, P, P+O with the trial count of
/// `base`. Rows are labeled by regime.
LabeledReports regime_reports(const ExperimentConfig& base);
ResultTable regime_comparison(const ExperimentConfig& base);

/// Two-sided Welch t-test p-value. Throws kInsufficientSamples if either
/// sample has fewer than two values.
double welch_t_test(const std::vector<double>& a, const std::vector<double>& b);

enum class TableFormat { kCsv, kMarkdown, kBars };

TableFormat parse_table_format(std::string_view s);
std::string emit(const ResultTable& table, TableFormat format);
/// Reads back CSV written by `emit` (raw per-trial values are not stored).
ResultTable parse_csv(std::string_view text);

/// Runs `fn(i)` for i in [0, count) on up to `threads` workers. The first
/// exception by index is rethrown after all workers finish.
void parallel_for(std::size_t count, std::size_t threads, const std::function<void(std::size_t)>& fn);

/// FAIRREC_THREADS if set, else hardware concurrency (at least 1).
std::size_t default_thread_count();

}  // namespace fairrec

#endif  // FAIRREC_HARNESS_HPP_
