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

#ifndef FAIRREC_MOVIELENS_HPP_
#define FAIRREC_MOVIELENS_HPP_

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "fairrec/core.hpp"
#include "fairrec/metrics.hpp"

namespace fairrec {

enum class Gender : std::uint8_t { kMale, kFemale };

/// MovieLens-1M as read from disk: users.dat, movies.dat, ratings.dat.
struct MovieLensRaw {
  struct Entry {
    std::uint32_t user = 0;
    std::uint32_t movie = 0;
    int rating = 0;
    std::int64_t timestamp = 0;

    friend bool operator==(const Entry&, const Entry&) = default;
  };

  std::map<std::uint32_t, Gender> users;
  std::map<std::uint32_t, std::vector<std::string>> movie_genres;
  std::map<std::uint32_t, std::string> movie_titles;
  std::vector<Entry> ratings;

  friend bool operator==(const MovieLensRaw&, const MovieLensRaw&) = default;
};

/// The eighteen ML-1M genres, spelled as in movies.dat.
const std::vector<std::string>& ml1m_genre_vocabulary();

/// Action, Crime, Musical, Romance, Sci-Fi.
const std::vector<std::string>& default_genres();

/// Maps case-insensitive names ("sci-fi") onto vocabulary spellings
/// ("Sci-Fi"). Throws kInvalidArgument for anything outside the vocabulary.
std::vector<std::string> canonical_genres(const std::vector<std::string>& names);

/// Parses the "::"-separated files. Throws kMalformedLine (with the 1-based
/// line number and file) and kUnknownReference.
MovieLensRaw parse_ml1m(std::istream& users, std::istream& movies, std::istream& ratings);

/// Reads users.dat, movies.dat and ratings.dat from `dir`.
MovieLensRaw load_ml1m(const std::string& dir);

/// Writes the three files in the original format.
void write_ml1m(std::ostream& users, std::ostream& movies, std::ostream& ratings,
                const MovieLensRaw& raw);

enum class GenreMode {
  kAnyGenre,   // movie lists at least one selected genre
  kOnlyGenres  // every genre the movie lists is selected
};

std::string_view to_string(GenreMode m);
GenreMode parse_genre_mode(std::string_view s);

inline constexpr GenreMode kDefaultGenreMode = GenreMode::kAnyGenre;

struct FilteredMovieLens {
  Dataset dataset;
  std::vector<std::uint32_t> user_ids;   // dense index -> MovieLens user id
  std::vector<std::uint32_t> movie_ids;  // dense index -> MovieLens movie id
};

/// Keeps movies matching `genres` under `mode`, then users with at least
/// `min_ratings` ratings on those movies, then the ratings between kept users
/// and movies, then drops movies left unrated. Dense indices follow ascending
/// ids; female users are the protected group. Throws kEmptyResult.
FilteredMovieLens filter_dataset(const MovieLensRaw& raw, const std::vector<std::string>& genres,
                                 std::size_t min_ratings, GenreMode mode);

/// The part of `raw` that survived filtering, in raw form.
MovieLensRaw restrict_to(const MovieLensRaw& raw, const FilteredMovieLens& filtered);

struct TrainTestSplit {
  Dataset train;
  EvalSet test;
};

/// Uniform random partition of the ratings; round(train_fraction * N) go to
/// training. Both sides keep the full user and item index spaces. Throws
/// kDegenerateSplit if either side would be empty.
TrainTestSplit split(const Dataset& d, double train_fraction, std::uint64_t seed);

}  // namespace fairrec

#endif  // FAIRREC_MOVIELENS_HPP_
