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

#ifndef FAIRREC_CORE_HPP_
#define FAIRREC_CORE_HPP_

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace fairrec {

enum class ErrorCode {
  kIndexOutOfRange,
  kDuplicateRating,
  kEmptyGroup,
  kRatingOutOfScale,
  kEmptyTrainingSet,
  kNoComparableItems,
  kEmptyEvalSet,
  kShapeMismatch,
  kDivergenceDetected,
  kIndivisibleCount,
  kMalformedLine,
  kUnknownReference,
  kEmptyResult,
  kDegenerateSplit,
  kInsufficientSamples,
  kUnsupportedFormat,
  kInvalidArgument,
  kIo,
};

std::string_view to_string(ErrorCode code);

/// Every failure in the library surfaces as this exception; `code()` tells
/// callers which contract was violated.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what);
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Fine-grained user groups, in block-model row order.
enum class UserGroup : std::uint8_t { kW = 0, kWS = 1, kMS = 2, kM = 3 };
// Item groups, in block-model column order.
enum class ItemGroup : std::uint8_t { kFem = 0, kSTEM = 1, kMasc = 2 };

inline constexpr std::size_t kNumUserGroups = 4;
inline constexpr std::size_t kNumItemGroups = 3;

std::string_view to_string(UserGroup g);
std::string_view to_string(ItemGroup g);
UserGroup parse_user_group(std::string_view s);
ItemGroup parse_item_group(std::string_view s);

struct Rating {
  std::size_t user = 0;
  std::size_t item = 0;
  double value = 0.0;

  friend bool operator==(const Rating&, const Rating&) = default;
};

struct RatingScale {
  double min = 0.0;
  double max = 1.0;

  friend bool operator==(const RatingScale&, const RatingScale&) = default;
};

/// Sparse observed ratings plus the per-user protected flag. `is_protected[u]`
/// is true for the disadvantaged group; metrics read nothing else about
/// group membership.
struct Dataset {
  std::size_t num_users = 0;
  std::size_t num_items = 0;
  std::vector<Rating> ratings;
  std::vector<bool> is_protected;
  std::optional<std::vector<UserGroup>> user_groups;
  std::optional<std::vector<ItemGroup>> item_groups;
  RatingScale scale;

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

/// Throws `Error` on the first violated invariant, otherwise returns a copy.
Dataset validate_dataset(const Dataset& d);

/// Same checks as `validate_dataset` without the copy.
void check_dataset(const Dataset& d);

/// Writes the line-oriented text format. Ratings are emitted sorted by
/// (user, item) with shortest round-trip decimal representation.
void write_dataset(std::ostream& out, const Dataset& d);
Dataset read_dataset(std::istream& in);
void save_dataset(const std::string& path, const Dataset& d);
Dataset load_dataset(const std::string& path);

/// Row-major dense matrix.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }

  std::span<double> values() noexcept { return data_; }
  std::span<const double> values() const noexcept { return data_; }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// The four parameter blocks of a biased factorization. `FactorModel` and
/// `Gradient` share this layout but are distinct types.
struct ParameterBlocks {
  Matrix user_factors;
  Matrix item_factors;
  std::vector<double> user_bias;
  std::vector<double> item_bias;

  ParameterBlocks() = default;
  ParameterBlocks(std::size_t num_users, std::size_t num_items, std::size_t dim)
      : user_factors(num_users, dim),
        item_factors(num_items, dim),
        user_bias(num_users, 0.0),
        item_bias(num_items, 0.0) {}

  std::size_t num_users() const noexcept { return user_bias.size(); }
  std::size_t num_items() const noexcept { return item_bias.size(); }
  std::size_t dim() const noexcept { return user_factors.cols(); }
  std::size_t size() const noexcept {
    return user_factors.values().size() + item_factors.values().size() +
           user_bias.size() + item_bias.size();
  }

  std::array<std::span<double>, 4> blocks() {
    return {user_factors.values(), item_factors.values(), user_bias, item_bias};
  }
  std::array<std::span<const double>, 4> blocks() const {
    return {user_factors.values(), item_factors.values(), user_bias, item_bias};
  }

  bool same_shape(const ParameterBlocks& other) const noexcept;
  bool all_finite() const noexcept;

  friend bool operator==(const ParameterBlocks&, const ParameterBlocks&) = default;
};

struct FactorModel : ParameterBlocks {
  using ParameterBlocks::ParameterBlocks;
  friend bool operator==(const FactorModel&, const FactorModel&) = default;
};

struct Gradient : ParameterBlocks {
  using ParameterBlocks::ParameterBlocks;
  explicit Gradient(const ParameterBlocks& shape)
      : ParameterBlocks(shape.num_users(), shape.num_items(), shape.dim()) {}

  /// this += scale * other
  void add_scaled(const Gradient& other, double scale);
  friend bool operator==(const Gradient&, const Gradient&) = default;
};

struct Hyperparams {
  std::size_t d = 10;
  double lambda = 1e-3;
  double alpha = 0.0;
  double learning_rate = 0.01;
  std::size_t iterations = 500;
  std::uint64_t seed = 0;
  double init_scale = 0.1;
};

void check_hyperparams(const Hyperparams& h);

struct MetricReport {
  double error = 0.0;
  double value = 0.0;
  double absolute = 0.0;
  double under = 0.0;
  double over = 0.0;
  double parity = 0.0;
  std::size_t items_counted = 0;

  friend bool operator==(const MetricReport&, const MetricReport&) = default;
};

inline constexpr std::array<std::string_view, 6> kMetricNames = {
    "error", "value", "absolute", "under", "over", "parity"};

/// Fields in `kMetricNames` order.
std::array<double, 6> metric_values(const MetricReport& r);

/// Shortest decimal string that parses back to exactly `x`.
std::string format_double(double x);
double parse_double(std::string_view s);

}  // namespace fairrec

#endif  // FAIRREC_CORE_HPP_
