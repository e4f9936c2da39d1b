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

#include "fairrec/core.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace fairrec {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kIndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::kDuplicateRating: return "DuplicateRating";
    case ErrorCode::kEmptyGroup: return "EmptyGroup";
    case ErrorCode::kRatingOutOfScale: return "RatingOutOfScale";
    case ErrorCode::kEmptyTrainingSet: return "EmptyTrainingSet";
    case ErrorCode::kNoComparableItems: return "NoComparableItems";
    case ErrorCode::kEmptyEvalSet: return "EmptyEvalSet";
    case ErrorCode::kShapeMismatch: return "ShapeMismatch";
    case ErrorCode::kDivergenceDetected: return "DivergenceDetected";
    case ErrorCode::kIndivisibleCount: return "IndivisibleCount";
    case ErrorCode::kMalformedLine: return "MalformedLine";
    case ErrorCode::kUnknownReference: return "UnknownReference";
    case ErrorCode::kEmptyResult: return "EmptyResult";
    case ErrorCode::kDegenerateSplit: return "DegenerateSplit";
    case ErrorCode::kInsufficientSamples: return "InsufficientSamples";
    case ErrorCode::kUnsupportedFormat: return "UnsupportedFormat";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kIo: return "Io";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

std::string_view to_string(UserGroup g) {
  switch (g) {
    case UserGroup::kW: return "W";
    case UserGroup::kWS: return "WS";
    case UserGroup::kMS: return "MS";
    case UserGroup::kM: return "M";
  }
  return "?";
}

std::string_view to_string(ItemGroup g) {
  switch (g) {
    case ItemGroup::kFem: return "Fem";
    case ItemGroup::kSTEM: return "STEM";
    case ItemGroup::kMasc: return "Masc";
  }
  return "?";
}

UserGroup parse_user_group(std::string_view s) {
  if (s == "W") return UserGroup::kW;
  if (s == "WS") return UserGroup::kWS;
  if (s == "MS") return UserGroup::kMS;
  if (s == "M") return UserGroup::kM;
  throw Error(ErrorCode::kInvalidArgument, "unknown user group '" + std::string(s) + "'");
}

ItemGroup parse_item_group(std::string_view s) {
  if (s == "Fem") return ItemGroup::kFem;
  if (s == "STEM") return ItemGroup::kSTEM;
  if (s == "Masc") return ItemGroup::kMasc;
  throw Error(ErrorCode::kInvalidArgument, "unknown item group '" + std::string(s) + "'");
}

void check_dataset(const Dataset& d) {
  if (d.is_protected.size() != d.num_users) {
    throw Error(ErrorCode::kIndexOutOfRange, "protected flags do not cover every user");
  }
  if (d.user_groups && d.user_groups->size() != d.num_users) {
    throw Error(ErrorCode::kIndexOutOfRange, "fine user labels do not cover every user");
  }
  if (d.item_groups && d.item_groups->size() != d.num_items) {
    throw Error(ErrorCode::kIndexOutOfRange, "item labels do not cover every item");
  }
  const auto num_protected =
      static_cast<std::size_t>(std::count(d.is_protected.begin(), d.is_protected.end(), true));
  if (num_protected == 0 || num_protected == d.num_users) {
    throw Error(ErrorCode::kEmptyGroup, "both protected and advantaged groups need members");
  }

  std::vector<std::uint64_t> keys;
  keys.reserve(d.ratings.size());
  for (const Rating& r : d.ratings) {
    if (r.user >= d.num_users || r.item >= d.num_items) {
      throw Error(ErrorCode::kIndexOutOfRange,
                  "rating (" + std::to_string(r.user) + "," + std::to_string(r.item) + ")");
    }
    if (!(r.value >= d.scale.min && r.value <= d.scale.max)) {
      throw Error(ErrorCode::kRatingOutOfScale, "rating value " + format_double(r.value));
    }
    keys.push_back(static_cast<std::uint64_t>(r.user) * d.num_items + r.item);
  }
  std::sort(keys.begin(), keys.end());
  auto dup = std::adjacent_find(keys.begin(), keys.end());
  if (dup != keys.end()) {
    throw Error(ErrorCode::kDuplicateRating, "(" + std::to_string(*dup / d.num_items) + "," +
                                                 std::to_string(*dup % d.num_items) + ")");
  }
}

Dataset validate_dataset(const Dataset& d) {
  check_dataset(d);
  return d;
}

std::string format_double(double x) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, ptr);
}

double parse_double(std::string_view s) {
  double x = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw Error(ErrorCode::kMalformedLine, "not a number: '" + std::string(s) + "'");
  }
  return x;
}

namespace {

std::size_t parse_index(std::string_view s, std::size_t line_no) {
  std::size_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw Error(ErrorCode::kMalformedLine, "line " + std::to_string(line_no) + ": bad index '" +
                                               std::string(s) + "'");
  }
  return v;
}

std::string_view after_prefix(std::string_view token, std::string_view prefix,
                              std::size_t line_no) {
  if (token.substr(0, prefix.size()) != prefix) {
    throw Error(ErrorCode::kMalformedLine,
                "line " + std::to_string(line_no) + ": expected '" + std::string(prefix) + "'");
  }
  return token.substr(prefix.size());
}

}  // namespace

void write_dataset(std::ostream& out, const Dataset& d) {
  out << "users=" << d.num_users << " items=" << d.num_items
      << " scale=" << format_double(d.scale.min) << ',' << format_double(d.scale.max) << '\n';
  for (std::size_t u = 0; u < d.num_users; ++u) {
    out << "u " << u << ' ' << (d.is_protected[u] ? 1 : 0);
    if (d.user_groups) out << ' ' << to_string((*d.user_groups)[u]);
    out << '\n';
  }
  if (d.item_groups) {
    for (std::size_t j = 0; j < d.num_items; ++j) {
      out << "g " << j << ' ' << to_string((*d.item_groups)[j]) << '\n';
    }
  }
  std::vector<Rating> sorted = d.ratings;
  std::sort(sorted.begin(), sorted.end(), [](const Rating& a, const Rating& b) {
    return a.user != b.user ? a.user < b.user : a.item < b.item;
  });
  for (const Rating& r : sorted) {
    out << "r " << r.user << ' ' << r.item << ' ' << format_double(r.value) << '\n';
  }
}

Dataset read_dataset(std::istream& in) {
  Dataset d;
  std::string line;
  std::size_t line_no = 1;
  if (!std::getline(in, line)) {
    throw Error(ErrorCode::kMalformedLine, "missing header");
  }
  {
    std::istringstream hs(line);
    std::string users, items, scale;
    if (!(hs >> users >> items >> scale)) {
      throw Error(ErrorCode::kMalformedLine, "line 1: bad header");
    }
    d.num_users = parse_index(after_prefix(users, "users=", 1), 1);
    d.num_items = parse_index(after_prefix(items, "items=", 1), 1);
    std::string_view sc = after_prefix(scale, "scale=", 1);
    auto comma = sc.find(',');
    if (comma == std::string_view::npos) {
      throw Error(ErrorCode::kMalformedLine, "line 1: bad scale");
    }
    d.scale.min = parse_double(sc.substr(0, comma));
    d.scale.max = parse_double(sc.substr(comma + 1));
  }
  d.is_protected.assign(d.num_users, false);
  std::vector<bool> user_seen(d.num_users, false);
  std::vector<std::optional<UserGroup>> fine(d.num_users);
  std::vector<std::optional<ItemGroup>> item_labels(d.num_items);
  bool any_fine = false;
  bool any_item_label = false;

  std::vector<std::string> tok;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream ls(line);
    tok.clear();
    for (std::string t; ls >> t;) tok.push_back(t);
    if (tok.empty()) continue;
    auto bad = [&](const std::string& why) {
      return Error(ErrorCode::kMalformedLine, "line " + std::to_string(line_no) + ": " + why);
    };
    if (tok[0] == "u") {
      if (tok.size() != 3 && tok.size() != 4) throw bad("user line needs 2 or 3 fields");
      std::size_t u = parse_index(tok[1], line_no);
      if (u >= d.num_users) {
        throw Error(ErrorCode::kIndexOutOfRange, "line " + std::to_string(line_no));
      }
      if (tok[2] != "0" && tok[2] != "1") throw bad("protected flag must be 0 or 1");
      d.is_protected[u] = tok[2] == "1";
      user_seen[u] = true;
      if (tok.size() == 4) {
        fine[u] = parse_user_group(tok[3]);
        any_fine = true;
      }
    } else if (tok[0] == "g") {
      if (tok.size() != 3) throw bad("item label line needs 2 fields");
      std::size_t j = parse_index(tok[1], line_no);
      if (j >= d.num_items) {
        throw Error(ErrorCode::kIndexOutOfRange, "line " + std::to_string(line_no));
      }
      item_labels[j] = parse_item_group(tok[2]);
      any_item_label = true;
    } else if (tok[0] == "r") {
      if (tok.size() != 4) throw bad("rating line needs 3 fields");
      d.ratings.push_back(
          {parse_index(tok[1], line_no), parse_index(tok[2], line_no), parse_double(tok[3])});
    } else {
      throw bad("unknown record '" + tok[0] + "'");
    }
  }
  if (std::find(user_seen.begin(), user_seen.end(), false) != user_seen.end()) {
    throw Error(ErrorCode::kMalformedLine, "not every user has a 'u' line");
  }
  if (any_fine) {
    std::vector<UserGroup> groups;
    for (const auto& g : fine) {
      if (!g) throw Error(ErrorCode::kMalformedLine, "fine labels must cover every user");
      groups.push_back(*g);
    }
    d.user_groups = std::move(groups);
  }
  if (any_item_label) {
    std::vector<ItemGroup> groups;
    for (const auto& g : item_labels) {
      if (!g) throw Error(ErrorCode::kMalformedLine, "item labels must cover every item");
      groups.push_back(*g);
    }
    d.item_groups = std::move(groups);
  }
  check_dataset(d);
  return d;
}

void save_dataset(const std::string& path, const Dataset& d) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path);
  write_dataset(out, d);
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + path);
}

Dataset load_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot read " + path);
  return read_dataset(in);
}

bool ParameterBlocks::same_shape(const ParameterBlocks& other) const noexcept {
  return user_factors.rows() == other.user_factors.rows() &&
         user_factors.cols() == other.user_factors.cols() &&
         item_factors.rows() == other.item_factors.rows() &&
         item_factors.cols() == other.item_factors.cols() &&
         user_bias.size() == other.user_bias.size() &&
         item_bias.size() == other.item_bias.size();
}

bool ParameterBlocks::all_finite() const noexcept {
  for (auto block : blocks()) {
    for (double x : block) {
      if (!std::isfinite(x)) return false;
    }
  }
  return true;
}

void Gradient::add_scaled(const Gradient& other, double scale) {
  if (!same_shape(other)) throw Error(ErrorCode::kShapeMismatch, "gradient shapes differ");
  auto dst = blocks();
  auto src = other.blocks();
  for (std::size_t b = 0; b < dst.size(); ++b) {
    for (std::size_t k = 0; k < dst[b].size(); ++k) dst[b][k] += scale * src[b][k];
  }
}

void check_hyperparams(const Hyperparams& h) {
  if (h.d < 1) throw Error(ErrorCode::kInvalidArgument, "d must be >= 1");
  if (!(h.lambda >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "lambda must be >= 0");
  if (!(h.alpha >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "alpha must be >= 0");
  if (h.iterations < 1) throw Error(ErrorCode::kInvalidArgument, "iterations must be >= 1");
  if (!(h.init_scale > 0.0)) throw Error(ErrorCode::kInvalidArgument, "init_scale must be > 0");
  if (!(h.learning_rate > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "learning_rate must be > 0");
  }
}

std::array<double, 6> metric_values(const MetricReport& r) {
  return {r.error, r.value, r.absolute, r.under, r.over, r.parity};
}

}  // namespace fairrec
