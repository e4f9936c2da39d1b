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


#include "fairrec/cli.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <map>
#include <ostream>
#include <string_view>

#include "fairrec/core.hpp"
#include "fairrec/harness.hpp"
#include "fairrec/metrics.hpp"
#include "fairrec/movielens.hpp"
#include "fairrec/synthgen.hpp"
#include "fairrec/trainer.hpp"

namespace fairrec {
namespace {

struct KeyHelp {
  std::string_view key;
  std::string_view help;
};

// Every experiment key that can also be given as a flag. The flag name is the
// key with '_' replaced by '-'.
constexpr KeyHelp kKeyHelp[] = {
    {"source", "synthetic or movielens"},
    {"regime", "synthetic regime: U, O, P or P+O"},
    {"users", "synthetic user count"},
    {"items", "synthetic item count"},
    {"ml_path", "directory holding users.dat, movies.dat and ratings.dat"},
    {"genres", "comma-separated MovieLens genres"},
    {"genre_mode", "any (movie lists a selected genre) or only (all its genres are selected)"},
    {"min_ratings", "minimum ratings per user and per movie"},
    {"split", "training fraction of the MovieLens ratings"},
    {"d", "latent dimension"},
    {"lambda", "L2 weight on the factor matrices"},
    {"alpha", "weight of the fairness penalty"},
    {"lr", "Adam learning rate"},
    {"iterations", "full-batch Adam iterations"},
    {"init_scale", "std of the Gaussian factor initialization"},
    {"trials", "number of seeded trials"},
    {"seed", "base seed; trial t uses seed + t"},
    {"penalty", "penalty spec such as value or under:1,over:1; several joined with '|'"},
    {"spread", "se (standard error) or sd (standard deviation)"},
    {"error", "rmse or mse"},
    {"threads", "worker threads (FAIRREC_THREADS caps this)"},
};

std::string flag_name(std::string_view key) {
  std::string name = "--";
  for (char c : key) name.push_back(c == '_' ? '-' : c);
  return name;
}

std::string_view help_for(std::string_view key) {
  for (const auto& k : kKeyHelp) {
    if (k.key == key) return k.help;
  }
  return "";
}

// Flags mirroring config keys. Values stay as text and go through
// apply_config_value so the file and the command line share one parser.
class ConfigFlags {
 public:
  ConfigFlags(CLI::App* cmd, const std::vector<std::string_view>& keys, bool with_config_file) {
    if (with_config_file) {
      cmd->add_option("--config", config_path_, "key = value file; flags override it");
    }
    for (auto key : keys) {
      auto& slot = values_[std::string(key)];
      options_.emplace_back(std::string(key),
                            cmd->add_option(flag_name(key), slot, std::string(help_for(key))));
    }
  }

  ExperimentConfig resolve(ExperimentConfig base) const {
    if (!config_path_.empty()) base = load_config(config_path_, std::move(base));
    for (const auto& [key, opt] : options_) {
      if (opt->count() > 0) apply_config_value(base, key, values_.at(key));
    }
    return base;
  }

 private:
  std::string config_path_;
  std::map<std::string, std::string> values_;
  std::vector<std::pair<std::string, CLI::Option*>> options_;
};

void write_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f || !(f << text) || !f.flush()) throw Error(ErrorCode::kIo, "cannot write " + path);
}

template <typename Fn>
void write_with(const std::string& path, Fn&& fn) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::kIo, "cannot write " + path);
  fn(f);
  if (!f.flush()) throw Error(ErrorCode::kIo, "cannot write " + path);
}

void print_report(std::ostream& out, const MetricReport& r) {
  const auto values = metric_values(r);
  for (std::size_t k = 0; k < values.size(); ++k) {
    out << kMetricNames[k] << '=' << format_double(values[k]) << '\n';
  }
  out << "items_counted=" << r.items_counted << '\n';
}

void emit_table(std::ostream& out, const std::string& path, const std::string& format,
                const ResultTable& table) {
  const std::string text = emit(table, parse_table_format(format));
  if (path.empty()) {
    out << text;
  } else {
    write_file(path, text);
  }
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Fairness-penalized matrix factorization for recommender data", "fairrec"};
  app.require_subcommand(1, 1);

  // synth-gen
  auto* gen = app.add_subcommand("synth-gen", "Sample a block-model dataset");
  ConfigFlags gen_flags(gen, {"regime", "users", "items", "seed"}, true);
  std::string gen_out;
  std::string gen_sidecar;
  gen->add_option("--out", gen_out, "dataset file to write")->required();
  gen->add_option("--sidecar", gen_sidecar, "also write block models and group labels here");

  // ml-prepare
  auto* prep = app.add_subcommand("ml-prepare", "Parse and filter MovieLens-1M, print counts");
  ConfigFlags prep_flags(prep, {"ml_path", "genres", "genre_mode", "min_ratings"}, true);
  std::string prep_out;
  prep->add_option("--out", prep_out, "write the filtered dataset here");

  // train
  auto* trn = app.add_subcommand("train", "Train one model on a dataset file");
  ConfigFlags trn_flags(trn, {"d", "lambda", "alpha", "lr", "iterations", "init_scale", "seed",
                              "penalty"},
                        true);
  std::string trn_data;
  std::string trn_out;
  std::string trn_trace;
  trn->add_option("--data", trn_data, "dataset file")->required();
  trn->add_option("--out", trn_out, "checkpoint file to write")->required();
  trn->add_option("--trace", trn_trace, "per-iteration objective trace (CSV)");

  // eval
  auto* evl = app.add_subcommand("eval", "Score a checkpoint on a dataset file");
  std::string evl_model;
  std::string evl_data;
  std::string evl_error = "rmse";
  evl->add_option("--model", evl_model, "checkpoint file")->required();
  evl->add_option("--data", evl_data, "dataset file with the evaluation ratings")->required();
  evl->add_option("--error", evl_error, "rmse or mse")->capture_default_str();

  // reproduce-*
  std::string rep_out;
  std::string rep_format = "csv";
  auto add_output = [&](CLI::App* cmd) {
    cmd->add_option("--out", rep_out, "write the table here instead of stdout");
    cmd->add_option("--format", rep_format, "csv, markdown or bars")->capture_default_str();
  };
  auto with_training = [](std::vector<std::string_view> keys) {
    for (std::string_view k : {"d", "lambda", "alpha", "lr", "iterations", "init_scale", "trials",
                               "seed", "spread", "error", "threads"}) {
      keys.push_back(k);
    }
    return keys;
  };

  auto* fig1 = app.add_subcommand("reproduce-fig1",
                                  "Unpenalized MF on each of the U, O, P and P+O regimes");
  ConfigFlags fig1_flags(fig1, with_training({"users", "items"}), true);
  add_output(fig1);

  auto* tab1 = app.add_subcommand("reproduce-table1",
                                  "Every penalty on synthetic data (P+O by default)");
  ConfigFlags tab1_flags(tab1, with_training({"regime", "users", "items", "penalty"}), true);
  add_output(tab1);

  auto* tab2 = app.add_subcommand("reproduce-table2", "Every penalty on filtered MovieLens-1M");
  ConfigFlags tab2_flags(
      tab2, with_training({"ml_path", "genres", "genre_mode", "min_ratings", "split", "penalty"}),
      true);
  add_output(tab2);

  std::vector<std::string> argv_store;
  argv_store.reserve(args.size() + 1);
  argv_store.emplace_back("fairrec");
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& a : argv_store) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    if (code == 0) return kExitOk;
    CLI::App* failed = &app;
    for (auto* sub : app.get_subcommands()) failed = sub;
    err << failed->help();
    return kExitUsage;
  }

  try {
    // Reject a bad --format before spending minutes on the experiment.
    if (fig1->parsed() || tab1->parsed() || tab2->parsed()) parse_table_format(rep_format);
    if (gen->parsed()) {
      ExperimentConfig base;
      base.regime = Regime::kU;
      const auto c = gen_flags.resolve(base);
      const RegimeConfig rc{c.regime, c.num_users, c.num_items, c.seed};
      const auto data = generate(rc, default_block_models());
      save_dataset(gen_out, data.dataset);
      if (!gen_sidecar.empty()) {
        write_with(gen_sidecar, [&](std::ostream& f) { write_sidecar(f, data, rc); });
      }
      out << "users=" << data.dataset.num_users << " items=" << data.dataset.num_items
          << " ratings=" << data.dataset.ratings.size() << '\n';
    } else if (prep->parsed()) {
      const auto c = prep_flags.resolve(movielens_defaults());
      if (c.ml_path.empty()) throw Error(ErrorCode::kInvalidArgument, "--ml-path is required");
      const auto filtered = filter_dataset(load_ml1m(c.ml_path), c.genres, c.min_ratings,
                                           c.genre_mode);
      if (!prep_out.empty()) save_dataset(prep_out, filtered.dataset);
      out << "users=" << filtered.dataset.num_users << " movies=" << filtered.dataset.num_items
          << '\n';
    } else if (trn->parsed()) {
      ExperimentConfig base;
      base.penalties = {PenaltySpec::none()};
      const auto c = trn_flags.resolve(base);
      if (c.penalties.size() != 1) {
        throw Error(ErrorCode::kInvalidArgument, "train takes exactly one penalty spec");
      }
      const auto result = train(load_dataset(trn_data), c.hyper, c.penalties.front());
      save_checkpoint(trn_out, result.model);
      if (!trn_trace.empty()) {
        write_with(trn_trace, [&](std::ostream& f) { write_trace(f, result.trace); });
      }
      if (!result.trace.empty()) {
        const auto& last = result.trace.back();
        out << "objective=" << format_double(last.objective)
            << " penalty=" << format_double(last.penalty) << '\n';
      }
    } else if (evl->parsed()) {
      ErrorMeasure measure;
      if (evl_error == "rmse") {
        measure = ErrorMeasure::kRmse;
      } else if (evl_error == "mse") {
        measure = ErrorMeasure::kMse;
      } else {
        throw Error(ErrorCode::kInvalidArgument, "--error must be rmse or mse");
      }
      const auto model = load_checkpoint(evl_model);
      const auto data = load_dataset(evl_data);
      if (model.num_users() != data.num_users || model.num_items() != data.num_items) {
        throw Error(ErrorCode::kShapeMismatch, "checkpoint and dataset sizes differ");
      }
      print_report(out, full_report(model, as_eval_set(data), data.is_protected, measure));
    } else if (fig1->parsed()) {
      const auto c = fig1_flags.resolve(synthetic_defaults());
      emit_table(out, rep_out, rep_format, regime_comparison(c));
    } else if (tab1->parsed()) {
      const auto c = tab1_flags.resolve(synthetic_defaults());
      emit_table(out, rep_out, rep_format, run_experiment(c));
    } else if (tab2->parsed()) {
      const auto c = tab2_flags.resolve(movielens_defaults());
      if (c.ml_path.empty()) throw Error(ErrorCode::kInvalidArgument, "--ml-path is required");
      emit_table(out, rep_out, rep_format, run_experiment(c));
    }
  } catch (const Error& e) {
    err << "fairrec: " << e.what() << '\n';
    const bool usage =
        e.code() == ErrorCode::kInvalidArgument || e.code() == ErrorCode::kUnsupportedFormat;
    return usage ? kExitUsage : kExitData;
  } catch (const std::exception& e) {
    err << "fairrec: " << e.what() << '\n';
    return kExitData;
  }
  return kExitOk;
}

}  // namespace fairrec
