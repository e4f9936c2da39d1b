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

#include "fairrec/penalties.hpp"

#include <cctype>
#include <cmath>

#include "fairrec/factorization.hpp"
#include "fairrec/metrics.hpp"
#include "ordering.hpp"

namespace fairrec {

std::string_view to_string(PenaltyKind kind) {
  switch (kind) {
    case PenaltyKind::kNone: return "none";
    case PenaltyKind::kValue: return "value";
    case PenaltyKind::kAbsolute: return "absolute";
    case PenaltyKind::kUnder: return "under";
    case PenaltyKind::kOver: return "over";
    case PenaltyKind::kParity: return "parity";
  }
  return "?";
}

PenaltyKind parse_penalty_kind(std::string_view s) {
  std::string lower;
  for (char c : s) lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  if (lower == "none") return PenaltyKind::kNone;
  if (lower == "value" || lower == "val") return PenaltyKind::kValue;
  if (lower == "absolute" || lower == "abs") return PenaltyKind::kAbsolute;
  if (lower == "under" || lower == "underestimation") return PenaltyKind::kUnder;
  if (lower == "over" || lower == "overestimation") return PenaltyKind::kOver;
  if (lower == "parity" || lower == "non-parity" || lower == "nonparity") {
    return PenaltyKind::kParity;
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown penalty kind '" + std::string(s) + "'");
}

bool PenaltySpec::is_none() const {
  for (const auto& t : terms) {
    if (t.kind != PenaltyKind::kNone) return false;
  }
  return true;
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

}  // namespace

PenaltySpec PenaltySpec::parse(std::string_view text) {
  PenaltySpec spec;
  text = trim(text);
  if (text.empty()) throw Error(ErrorCode::kInvalidArgument, "empty penalty spec");
  while (true) {
    const auto comma = text.find_first_of(",+");
    std::string_view item = trim(text.substr(0, comma));
    const auto colon = item.find(':');
    PenaltyTerm term;
    term.kind = parse_penalty_kind(trim(item.substr(0, colon)));
    if (colon != std::string_view::npos) {
      try {
        term.weight = parse_double(trim(item.substr(colon + 1)));
      } catch (const Error&) {
        throw Error(ErrorCode::kInvalidArgument, "bad penalty weight in '" + std::string(item) + "'");
      }
    }
    spec.terms.push_back(term);
    if (comma == std::string_view::npos) break;
    text.remove_prefix(comma + 1);
  }
  check_penalty_spec(spec);
  return spec;
}

std::string PenaltySpec::to_string() const {
  std::string out;
  for (const auto& t : terms) {
    if (!out.empty()) out += ',';
    out += fairrec::to_string(t.kind);
    if (t.kind != PenaltyKind::kNone) {
      out += ':';
      out += format_double(t.weight);
    }
  }
  return out;
}

std::string PenaltySpec::label() const {
  std::string out;
  for (const auto& t : terms) {
    if (!out.empty()) out += '+';
    out += fairrec::to_string(t.kind);
    if (t.kind != PenaltyKind::kNone && t.weight != 1.0) {
      out += ':';
      out += format_double(t.weight);
    }
  }
  return out;
}

void check_penalty_spec(const PenaltySpec& spec) {
  bool has_none = false;
  for (const auto& t : spec.terms) {
    if (!std::isfinite(t.weight) || t.weight < 0.0) {
      throw Error(ErrorCode::kInvalidArgument, "penalty weights must be finite and >= 0");
    }
    has_none = has_none || t.kind == PenaltyKind::kNone;
  }
  if (has_none && spec.terms.size() != 1) {
    throw Error(ErrorCode::kInvalidArgument, "'none' cannot be combined with other terms");
  }
  if (!std::isfinite(spec.smoothing) || spec.smoothing < 0.0) {
    throw Error(ErrorCode::kInvalidArgument, "smoothing must be finite and >= 0");
  }
}

namespace {

// |x| and hinge(x) with their (sub)derivatives, optionally smoothed.
struct Kinks {
  double eps = 0.0;

  double abs(double x) const { return eps > 0.0 ? std::sqrt(x * x + eps * eps) : std::abs(x); }
  double sign(double x) const {
    if (eps > 0.0) return x / std::sqrt(x * x + eps * eps);
    return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0);
  }
  double hinge(double x) const { return eps > 0.0 ? 0.5 * (x + abs(x)) : fairrec::hinge(x); }
  double hinge_slope(double x) const {
    if (eps > 0.0) return 0.5 * (1.0 + sign(x));
    return x > 0.0 ? 1.0 : 0.0;
  }
};

struct TermPartials {
  double value;
  double d_disadvantaged;
  double d_advantaged;
};

TermPartials item_term_partials(ItemMetric kind, double a, double b, const Kinks& k) {
  switch (kind) {
    case ItemMetric::kValue: {
      const double s = k.sign(a - b);
      return {k.abs(a - b), s, -s};
    }
    case ItemMetric::kAbsolute: {
      const double t = k.abs(a) - k.abs(b);
      const double s = k.sign(t);
      return {k.abs(t), s * k.sign(a), -s * k.sign(b)};
    }
    case ItemMetric::kUnder: {
      const double t = k.hinge(-a) - k.hinge(-b);
      const double s = k.sign(t);
      return {k.abs(t), -s * k.hinge_slope(-a), s * k.hinge_slope(-b)};
    }
    case ItemMetric::kOver: {
      const double t = k.hinge(a) - k.hinge(b);
      const double s = k.sign(t);
      return {k.abs(t), s * k.hinge_slope(a), -s * k.hinge_slope(b)};
    }
  }
  return {0.0, 0.0, 0.0};
}

ItemMetric item_metric_for(PenaltyKind kind) {
  switch (kind) {
    case PenaltyKind::kValue: return ItemMetric::kValue;
    case PenaltyKind::kAbsolute: return ItemMetric::kAbsolute;
    case PenaltyKind::kUnder: return ItemMetric::kUnder;
    case PenaltyKind::kOver: return ItemMetric::kOver;
    default: break;
  }
  throw Error(ErrorCode::kInvalidArgument, "not a per-item penalty");
}

// Adds weight * U_kind to `out.value` and weight * dU/dpred to `out.dpred`.
void add_item_penalty(ItemMetric kind, double weight, std::span<const Rating> entries,
                      const std::vector<bool>& is_protected, const GroupItemAverages& avgs,
                      const Kinks& kinks, PenaltyEvaluation& out) {
  const std::size_t m = avgs.num_items();
  const std::size_t comparable = avgs.num_comparable();
  if (comparable == 0) {
    throw Error(ErrorCode::kNoComparableItems, "no training item is rated by both groups");
  }
  const double inv_m = 1.0 / static_cast<double>(comparable);

  // Per-item slope of U with respect to each group's mean prediction.
  std::vector<double> slope_dis(m, 0.0);
  std::vector<double> slope_adv(m, 0.0);
  if (kinks.eps == 0.0) {
    // Reuse the evaluation path so the value is bit-identical to the metric.
    out.value += weight * item_unfairness(kind, avgs);
  }
  double smoothed_total = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    if (!avgs.comparable(j)) continue;
    const auto p = item_term_partials(kind, avgs.disadvantaged.error(j),
                                      avgs.advantaged.error(j), kinks);
    smoothed_total += p.value;
    slope_dis[j] = p.d_disadvantaged * inv_m / static_cast<double>(avgs.disadvantaged.count[j]);
    slope_adv[j] = p.d_advantaged * inv_m / static_cast<double>(avgs.advantaged.count[j]);
  }
  if (kinks.eps > 0.0) out.value += weight * smoothed_total * inv_m;

  for (std::size_t k = 0; k < entries.size(); ++k) {
    const Rating& r = entries[k];
    out.dpred[k] += weight * (is_protected[r.user] ? slope_dis[r.item] : slope_adv[r.item]);
  }
}

void add_parity_penalty(double weight, std::span<const Rating> entries,
                        std::span<const double> pred, const std::vector<bool>& is_protected,
                        const Kinks& kinks, PenaltyEvaluation& out) {
  double sum[2] = {0.0, 0.0};
  std::size_t count[2] = {0, 0};
  for (std::size_t k : detail::canonical_order(entries)) {
    if (entries[k].user >= is_protected.size()) {
      throw Error(ErrorCode::kIndexOutOfRange, "user " + std::to_string(entries[k].user));
    }
    const int side = is_protected[entries[k].user] ? 0 : 1;
    sum[side] += pred[k];
    count[side] += 1;
  }
  if (count[0] == 0 || count[1] == 0) {
    throw Error(ErrorCode::kEmptyGroup, "parity penalty needs ratings from both groups");
  }
  const double delta = sum[0] / static_cast<double>(count[0]) -
                       sum[1] / static_cast<double>(count[1]);
  out.value += weight * kinks.abs(delta);
  const double s = kinks.sign(delta);
  const double slope_dis = weight * s / static_cast<double>(count[0]);
  const double slope_adv = -weight * s / static_cast<double>(count[1]);
  for (std::size_t k = 0; k < entries.size(); ++k) {
    out.dpred[k] += is_protected[entries[k].user] ? slope_dis : slope_adv;
  }
}

}  // namespace

PenaltyEvaluation evaluate_penalty(std::span<const Rating> entries,
                                   std::span<const double> predictions,
                                   const std::vector<bool>& is_protected, std::size_t num_items,
                                   const PenaltySpec& spec) {
  check_penalty_spec(spec);
  if (predictions.size() != entries.size()) {
    throw Error(ErrorCode::kShapeMismatch, "predictions do not match entries");
  }
  PenaltyEvaluation out;
  out.dpred.assign(entries.size(), 0.0);
  if (spec.is_none()) return out;

  const Kinks kinks{spec.smoothing};
  std::optional<GroupItemAverages> avgs;
  for (const auto& term : spec.terms) {
    if (term.kind == PenaltyKind::kParity) {
      add_parity_penalty(term.weight, entries, predictions, is_protected, kinks, out);
      continue;
    }
    if (!avgs) avgs = group_item_averages(entries, predictions, is_protected, num_items);
    add_item_penalty(item_metric_for(term.kind), term.weight, entries, is_protected, *avgs, kinks,
                     out);
  }
  return out;
}

double penalty_value(const FactorModel& model, const Dataset& train, const PenaltySpec& spec) {
  check_penalty_spec(spec);
  if (spec.is_none()) return 0.0;
  const auto pred = predict_all(model, train.ratings);
  return evaluate_penalty(train.ratings, pred, train.is_protected, model.num_items(), spec).value;
}

Gradient penalty_gradient(const FactorModel& model, const Dataset& train,
                          const PenaltySpec& spec) {
  check_penalty_spec(spec);
  Gradient grad(model);
  if (spec.is_none()) return grad;
  const auto pred = predict_all(model, train.ratings);
  const auto eval =
      evaluate_penalty(train.ratings, pred, train.is_protected, model.num_items(), spec);
  backprop_predictions(model, train.ratings, eval.dpred, grad);
  return grad;
}

}  // namespace fairrec
