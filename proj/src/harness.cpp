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

#include "fairrec/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <istream>
#include <sstream>
#include <thread>

#include <boost/math/distributions/students_t.hpp>

#include "fairrec/trainer.hpp"

namespace fairrec {

std::vector<PenaltySpec> default_penalty_list() {
  return {PenaltySpec::none(),
          PenaltySpec::single(PenaltyKind::kValue),
          PenaltySpec::single(PenaltyKind::kAbsolute),
          PenaltySpec::single(PenaltyKind::kUnder),
          PenaltySpec::single(PenaltyKind::kOver),
          PenaltySpec::single(PenaltyKind::kParity),
          PenaltySpec{{{PenaltyKind::kUnder, 1.0}, {PenaltyKind::kOver, 1.0}}, 0.0}};
}

ExperimentConfig synthetic_defaults() {
  ExperimentConfig c;
  c.source = DataSource::kSynthetic;
  c.regime = Regime::kPO;
  c.hyper.alpha = 10.0;
  c.penalties = default_penalty_list();
  c.trials = 5;
  return c;
}

ExperimentConfig movielens_defaults() {
  ExperimentConfig c;
  c.source = DataSource::kMovieLens;
  c.hyper.alpha = 0.1;
  c.hyper.lambda = 1e-4;
  c.penalties = default_penalty_list();
  c.trials = 3;
  return c;
}

void check_config(const ExperimentConfig& c) {
  check_hyperparams(c.hyper);
  if (c.trials < 1) throw Error(ErrorCode::kInvalidArgument, "trials must be >= 1");
  if (c.penalties.empty()) throw Error(ErrorCode::kInvalidArgument, "penalty list is empty");
  for (const auto& p : c.penalties) check_penalty_spec(p);
  if (c.source == DataSource::kMovieLens) {
    if (!(c.train_fraction > 0.0 && c.train_fraction < 1.0)) {
      throw Error(ErrorCode::kInvalidArgument, "split must lie in (0, 1)");
    }
  }
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::size_t to_count(std::string_view key, std::string_view v) {
  std::size_t out = 0;
  try {
    std::size_t pos = 0;
    std::string s(v);
    if (!s.empty() && s[0] == '-') throw std::invalid_argument("negative");
    out = std::stoull(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("trailing");
  } catch (const std::exception&) {
    throw Error(ErrorCode::kInvalidArgument,
                std::string(key) + ": expected a non-negative integer, got '" + std::string(v) + "'");
  }
  return out;
}

double to_real(std::string_view key, std::string_view v) {
  try {
    return parse_double(v);
  } catch (const Error&) {
    throw Error(ErrorCode::kInvalidArgument,
                std::string(key) + ": expected a number, got '" + std::string(v) + "'");
  }
}

std::vector<std::string> split_list(std::string_view v, char sep) {
  std::vector<std::string> out;
  while (true) {
    const auto pos = v.find(sep);
    auto item = trim(v.substr(0, pos));
    if (!item.empty()) out.emplace_back(item);
    if (pos == std::string_view::npos) break;
    v.remove_prefix(pos + 1);
  }
  return out;
}

}  // namespace

void apply_config_value(ExperimentConfig& c, std::string_view key, std::string_view value) {
  value = trim(value);
  if (value.size() >= 2 && value.front() == '"' && value.back() == '"') {
    value = value.substr(1, value.size() - 2);
  }
  if (key == "source") {
    if (value == "synthetic") {
      c.source = DataSource::kSynthetic;
    } else if (value == "movielens") {
      c.source = DataSource::kMovieLens;
    } else {
      throw Error(ErrorCode::kInvalidArgument, "source must be synthetic or movielens");
    }
  } else if (key == "regime") {
    c.regime = parse_regime(value);
  } else if (key == "users") {
    c.num_users = to_count(key, value);
  } else if (key == "items") {
    c.num_items = to_count(key, value);
  } else if (key == "ml_path") {
    c.ml_path = std::string(value);
  } else if (key == "genres") {
    c.genres = canonical_genres(split_list(value, ','));
  } else if (key == "genre_mode") {
    c.genre_mode = parse_genre_mode(value);
  } else if (key == "min_ratings") {
    c.min_ratings = to_count(key, value);
  } else if (key == "split") {
    c.train_fraction = to_real(key, value);
  } else if (key == "d") {
    c.hyper.d = to_count(key, value);
  } else if (key == "lambda") {
    c.hyper.lambda = to_real(key, value);
  } else if (key == "alpha") {
    c.hyper.alpha = to_real(key, value);
  } else if (key == "lr") {
    c.hyper.learning_rate = to_real(key, value);
  } else if (key == "iterations") {
    c.hyper.iterations = to_count(key, value);
  } else if (key == "init_scale") {
    c.hyper.init_scale = to_real(key, value);
  } else if (key == "trials") {
    c.trials = to_count(key, value);
  } else if (key == "seed") {
    c.seed = to_count(key, value);
  } else if (key == "penalty") {
    c.penalties.clear();
    for (const auto& item : split_list(value, '|')) c.penalties.push_back(PenaltySpec::parse(item));
  } else if (key == "spread") {
    if (value == "se") {
      c.spread = Spread::kStandardError;
    } else if (value == "sd") {
      c.spread = Spread::kStandardDeviation;
    } else {
      throw Error(ErrorCode::kInvalidArgument, "spread must be se or sd");
    }
  } else if (key == "error") {
    if (value == "rmse") {
      c.error = ErrorMeasure::kRmse;
    } else if (value == "mse") {
      c.error = ErrorMeasure::kMse;
    } else {
      throw Error(ErrorCode::kInvalidArgument, "error must be rmse or mse");
    }
  } else if (key == "threads") {
    c.threads = to_count(key, value);
  } else {
    throw Error(ErrorCode::kInvalidArgument, "unknown config key '" + std::string(key) + "'");
  }
}

ExperimentConfig parse_config(std::istream& in, ExperimentConfig base) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = line;
    if (auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
    view = trim(view);
    if (view.empty()) continue;
    const auto eq = view.find('=');
    if (eq == std::string_view::npos) {
      throw Error(ErrorCode::kMalformedLine, "config line " + std::to_string(line_no) +
                                                 ": expected key = value");
    }
    apply_config_value(base, trim(view.substr(0, eq)), view.substr(eq + 1));
  }
  return base;
}

ExperimentConfig load_config(const std::string& path, ExperimentConfig base) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot read " + path);
  return parse_config(in, std::move(base));
}

std::uint64_t trial_seed(const ExperimentConfig& c, std::size_t trial_index) {
  return c.seed + trial_index;
}

namespace {

Dataset load_movielens_base(const ExperimentConfig& c) {
  if (c.ml_path.empty()) throw Error(ErrorCode::kInvalidArgument, "ml_path is not set");
  const auto raw = load_ml1m(c.ml_path);
  return filter_dataset(raw, c.genres, c.min_ratings, c.genre_mode).dataset;
}

}  // namespace

TrialData prepare_trial(const ExperimentConfig& c, std::size_t trial_index,
                        const Dataset* movielens_base) {
  const std::uint64_t seed = trial_seed(c, trial_index);
  if (c.source == DataSource::kSynthetic) {
    const RegimeConfig rc{c.regime, c.num_users, c.num_items, seed};
    auto synth = generate(rc, default_block_models());
    TrialData out;
    out.eval = synth.unobserved_expected(synth.dataset);
    out.train = std::move(synth.dataset);
    return out;
  }
  Dataset loaded;
  if (movielens_base == nullptr) {
    loaded = load_movielens_base(c);
    movielens_base = &loaded;
  }
  auto parts = split(*movielens_base, c.train_fraction, seed);
  return TrialData{std::move(parts.train), std::move(parts.test)};
}

MetricReport evaluate_trial(const ExperimentConfig& c, const PenaltySpec& spec,
                            std::size_t trial_index, const TrialData& data) {
  Hyperparams h = c.hyper;
  h.seed = trial_seed(c, trial_index);
  const auto result = train(data.train, h, spec);
  return full_report(result.model, data.eval, data.train.is_protected, c.error);
}

MetricReport run_trial(const ExperimentConfig& c, const PenaltySpec& spec,
                       std::size_t trial_index, const Dataset* movielens_base) {
  check_config(c);
  return evaluate_trial(c, spec, trial_index, prepare_trial(c, trial_index, movielens_base));
}

const ResultRow& ResultTable::row(std::string_view label) const {
  for (const auto& r : rows) {
    if (r.label == label) return r;
  }
  throw Error(ErrorCode::kInvalidArgument, "no row labeled '" + std::string(label) + "'");
}

ResultTable aggregate(const LabeledReports& reports, Spread spread) {
  ResultTable table;
  table.spread = spread;
  for (const auto& [label, runs] : reports) {
    if (runs.empty()) throw Error(ErrorCode::kInvalidArgument, "row '" + label + "' has no runs");
    ResultRow row;
    row.label = label;
    const auto n = static_cast<double>(runs.size());
    for (std::size_t k = 0; k < row.cells.size(); ++k) {
      ResultCell& cell = row.cells[k];
      for (const auto& r : runs) cell.raw.push_back(metric_values(r)[k]);
      double sum = 0.0;
      for (double x : cell.raw) sum += x;
      cell.mean = sum / n;
      if (runs.size() > 1) {
        double ss = 0.0;
        for (double x : cell.raw) ss += (x - cell.mean) * (x - cell.mean);
        const double sd = std::sqrt(ss / (n - 1.0));
        cell.spread = spread == Spread::kStandardError ? sd / std::sqrt(n) : sd;
      }
    }
    if (runs.size() == 1) table.single_trial = true;
    table.rows.push_back(std::move(row));
  }
  return table;
}

std::size_t default_thread_count() {
  if (const char* env = std::getenv("FAIRREC_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 1) return static_cast<std::size_t>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t count, std::size_t threads,
                  const std::function<void(std::size_t)>& fn) {
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  threads = std::max<std::size_t>(1, std::min(threads, count));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

namespace {

std::size_t thread_budget(const ExperimentConfig& c) {
  // FAIRREC_THREADS caps an explicit request as well.
  const std::size_t fallback = default_thread_count();
  if (c.threads == 0) return fallback;
  return std::getenv("FAIRREC_THREADS") != nullptr ? std::min(c.threads, fallback) : c.threads;
}

}  // namespace

LabeledReports run_reports(const ExperimentConfig& c) {
  check_config(c);
  Dataset ml_base;
  if (c.source == DataSource::kMovieLens) ml_base = load_movielens_base(c);
  const Dataset* base = c.source == DataSource::kMovieLens ? &ml_base : nullptr;
  const std::size_t threads = thread_budget(c);

  std::vector<TrialData> data(c.trials);
  parallel_for(c.trials, threads, [&](std::size_t t) { data[t] = prepare_trial(c, t, base); });

  const std::size_t n_specs = c.penalties.size();
  std::vector<MetricReport> flat(n_specs * c.trials);
  parallel_for(flat.size(), threads, [&](std::size_t job) {
    const std::size_t s = job / c.trials;
    const std::size_t t = job % c.trials;
    flat[job] = evaluate_trial(c, c.penalties[s], t, data[t]);
  });

  LabeledReports out;
  for (std::size_t s = 0; s < n_specs; ++s) {
    out.emplace_back(c.penalties[s].label(),
                     std::vector<MetricReport>(flat.begin() + static_cast<std::ptrdiff_t>(s * c.trials),
                                               flat.begin() + static_cast<std::ptrdiff_t>((s + 1) * c.trials)));
  }
  return out;
}

ResultTable run_experiment(const ExperimentConfig& c) { return aggregate(run_reports(c), c.spread); }

LabeledReports regime_reports(const ExperimentConfig& base) {
  if (base.source != DataSource::kSynthetic) {
    throw Error(ErrorCode::kInvalidArgument, "regime comparison needs the synthetic source");
  }
  check_config(base);
  const std::size_t threads = thread_budget(base);
  const std::size_t n = kAllRegimes.size() * base.trials;
  std::vector<MetricReport> flat(n);
  parallel_for(n, threads, [&](std::size_t job) {
    ExperimentConfig c = base;
    c.regime = kAllRegimes[job / base.trials];
    flat[job] = run_trial(c, PenaltySpec::none(), job % base.trials);
  });
  LabeledReports out;
  for (std::size_t r = 0; r < kAllRegimes.size(); ++r) {
    out.emplace_back(std::string(to_string(kAllRegimes[r])),
                     std::vector<MetricReport>(flat.begin() + static_cast<std::ptrdiff_t>(r * base.trials),
                                               flat.begin() + static_cast<std::ptrdiff_t>((r + 1) * base.trials)));
  }
  return out;
}

ResultTable regime_comparison(const ExperimentConfig& base) {
  return aggregate(regime_reports(base), base.spread);
}

double welch_t_test(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() < 2 || b.size() < 2) {
    throw Error(ErrorCode::kInsufficientSamples, "Welch test needs at least two values per sample");
  }
  auto moments = [](const std::vector<double>& x) {
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= static_cast<double>(x.size());
    double ss = 0.0;
    for (double v : x) ss += (v - mean) * (v - mean);
    return std::pair{mean, ss / static_cast<double>(x.size() - 1)};
  };
  const auto [mean_a, var_a] = moments(a);
  const auto [mean_b, var_b] = moments(b);
  const double se_a = var_a / static_cast<double>(a.size());
  const double se_b = var_b / static_cast<double>(b.size());
  const double se2 = se_a + se_b;
  if (se2 == 0.0) return mean_a == mean_b ? 1.0 : 0.0;
  const double t = std::abs(mean_a - mean_b) / std::sqrt(se2);
  const double df = se2 * se2 / (se_a * se_a / static_cast<double>(a.size() - 1) +
                                 se_b * se_b / static_cast<double>(b.size() - 1));
  boost::math::students_t_distribution<double> dist(df);
  const double p = 2.0 * boost::math::cdf(boost::math::complement(dist, t));
  return std::clamp(p, 0.0, 1.0);
}

TableFormat parse_table_format(std::string_view s) {
  if (s == "csv") return TableFormat::kCsv;
  if (s == "markdown" || s == "md") return TableFormat::kMarkdown;
  if (s == "bars") return TableFormat::kBars;
  throw Error(ErrorCode::kUnsupportedFormat, "unknown table format '" + std::string(s) + "'");
}

namespace {

constexpr std::array<std::string_view, 6> kColumnTitles = {
    "Error", "Value", "Absolute", "Underestimation", "Overestimation", "Non-Parity"};

std::string spread_suffix(Spread s) { return s == Spread::kStandardError ? "_se" : "_sd"; }

std::string pm_cell(const ResultCell& cell) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.3f ± %.1e", cell.mean, cell.spread);
  return buf;
}

}  // namespace

std::string emit(const ResultTable& table, TableFormat format) {
  std::ostringstream out;
  switch (format) {
    case TableFormat::kCsv: {
      out << "penalty";
      for (auto name : kMetricNames) {
        out << ',' << name << "_mean," << name << spread_suffix(table.spread);
      }
      out << '\n';
      for (const auto& row : table.rows) {
        out << row.label;
        for (const auto& cell : row.cells) {
          out << ',' << format_double(cell.mean) << ',' << format_double(cell.spread);
        }
        out << '\n';
      }
      break;
    }
    case TableFormat::kMarkdown: {
      std::vector<std::array<std::string, 7>> lines;
      lines.push_back({"Unfairness"});
      for (std::size_t k = 0; k < 6; ++k) lines[0][k + 1] = kColumnTitles[k];
      for (const auto& row : table.rows) {
        std::array<std::string, 7> l;
        l[0] = row.label;
        for (std::size_t k = 0; k < 6; ++k) l[k + 1] = pm_cell(row.cells[k]);
        lines.push_back(l);
      }
      // "±" is two bytes but one column.
      auto width = [](const std::string& s) {
        std::size_t w = 0;
        for (unsigned char ch : s) w += (ch & 0xC0) != 0x80;
        return w;
      };
      std::array<std::size_t, 7> widths{};
      for (const auto& l : lines) {
        for (std::size_t k = 0; k < 7; ++k) widths[k] = std::max(widths[k], width(l[k]));
      }
      auto write_line = [&](const std::array<std::string, 7>& l) {
        out << '|';
        for (std::size_t k = 0; k < 7; ++k) {
          out << ' ' << l[k] << std::string(widths[k] - width(l[k]), ' ') << " |";
        }
        out << '\n';
      };
      write_line(lines[0]);
      out << '|';
      for (std::size_t k = 0; k < 7; ++k) out << std::string(widths[k] + 2, '-') << '|';
      out << '\n';
      for (std::size_t i = 1; i < lines.size(); ++i) write_line(lines[i]);
      break;
    }
    case TableFormat::kBars: {
      out << "regime,metric,mean\n";
      for (const auto& row : table.rows) {
        for (std::size_t k = 0; k < 6; ++k) {
          out << row.label << ',' << kMetricNames[k] << ',' << format_double(row.cells[k].mean)
              << '\n';
        }
      }
      break;
    }
  }
  return out.str();
}

ResultTable parse_csv(std::string_view text) {
  ResultTable table;
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::kMalformedLine, "empty CSV");
  const auto header = split_list(line, ',');
  if (header.size() != 13 || header[0] != "penalty") {
    throw Error(ErrorCode::kMalformedLine, "unexpected CSV header");
  }
  table.spread = header[2].ends_with("_sd") ? Spread::kStandardDeviation : Spread::kStandardError;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = split_list(line, ',');
    if (fields.size() != 13) {
      throw Error(ErrorCode::kMalformedLine, "CSV line " + std::to_string(line_no));
    }
    ResultRow row;
    row.label = fields[0];
    for (std::size_t k = 0; k < 6; ++k) {
      row.cells[k].mean = parse_double(fields[1 + 2 * k]);
      row.cells[k].spread = parse_double(fields[2 + 2 * k]);
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

}  // namespace fairrec
