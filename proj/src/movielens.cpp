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

#include "fairrec/movielens.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>
#include <set>
#include <unordered_map>

namespace fairrec {

const std::vector<std::string>& ml1m_genre_vocabulary() {
  static const std::vector<std::string> kVocabulary = {
      "Action",  "Adventure", "Animation", "Children's", "Comedy", "Crime",
      "Documentary", "Drama", "Fantasy",  "Film-Noir",  "Horror", "Musical",
      "Mystery", "Romance",   "Sci-Fi",   "Thriller",   "War",    "Western"};
  return kVocabulary;
}

const std::vector<std::string>& default_genres() {
  static const std::vector<std::string> kGenres = {"Action", "Crime", "Musical", "Romance",
                                                   "Sci-Fi"};
  return kGenres;
}

namespace {

std::string lower(std::string_view s) {
  std::string out;
  for (char c : s) out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  return out;
}

// Splits on "::". Movie titles never contain the separator in ML-1M, but
// the genre list is always the last field, so only the outer split matters.
std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find("::", start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 2;
  }
}

template <typename Int>
bool parse_int(std::string_view s, Int& out) {
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

Error malformed(std::string_view file, std::size_t line_no, std::string_view why) {
  return Error(ErrorCode::kMalformedLine, std::string(file) + " line " +
                                              std::to_string(line_no) + ": " + std::string(why));
}

template <typename Fn>
void for_each_line(std::istream& in, Fn&& fn) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    fn(std::string_view(line), line_no);
  }
}

}  // namespace

std::vector<std::string> canonical_genres(const std::vector<std::string>& names) {
  std::vector<std::string> out;
  for (const auto& name : names) {
    const std::string key = lower(name);
    bool found = false;
    for (const auto& g : ml1m_genre_vocabulary()) {
      if (lower(g) == key) {
        out.push_back(g);
        found = true;
        break;
      }
    }
    if (!found) throw Error(ErrorCode::kInvalidArgument, "unknown genre '" + name + "'");
  }
  return out;
}

MovieLensRaw parse_ml1m(std::istream& users, std::istream& movies, std::istream& ratings) {
  MovieLensRaw raw;
  for_each_line(users, [&](std::string_view line, std::size_t no) {
    const auto f = split_fields(line);
    if (f.size() != 5) throw malformed("users.dat", no, "expected 5 fields");
    std::uint32_t id = 0;
    if (!parse_int(f[0], id)) throw malformed("users.dat", no, "bad user id");
    Gender g;
    if (f[1] == "M") {
      g = Gender::kMale;
    } else if (f[1] == "F") {
      g = Gender::kFemale;
    } else {
      throw malformed("users.dat", no, "gender must be M or F");
    }
    raw.users[id] = g;
  });
  for_each_line(movies, [&](std::string_view line, std::size_t no) {
    const auto first = line.find("::");
    const auto last = line.rfind("::");
    if (first == std::string_view::npos || first == last) {
      throw malformed("movies.dat", no, "expected 3 fields");
    }
    std::uint32_t id = 0;
    if (!parse_int(line.substr(0, first), id)) throw malformed("movies.dat", no, "bad movie id");
    std::vector<std::string> genres;
    std::string_view rest = line.substr(last + 2);
    while (!rest.empty()) {
      const auto bar = rest.find('|');
      genres.emplace_back(rest.substr(0, bar));
      if (bar == std::string_view::npos) break;
      rest.remove_prefix(bar + 1);
    }
    raw.movie_titles[id] = std::string(line.substr(first + 2, last - first - 2));
    raw.movie_genres[id] = std::move(genres);
  });
  for_each_line(ratings, [&](std::string_view line, std::size_t no) {
    const auto f = split_fields(line);
    if (f.size() != 4) throw malformed("ratings.dat", no, "expected 4 fields");
    MovieLensRaw::Entry e;
    if (!parse_int(f[0], e.user) || !parse_int(f[1], e.movie) || !parse_int(f[2], e.rating) ||
        !parse_int(f[3], e.timestamp)) {
      throw malformed("ratings.dat", no, "non-integer field");
    }
    if (e.rating < 1 || e.rating > 5) throw malformed("ratings.dat", no, "rating outside 1..5");
    if (!raw.users.contains(e.user) || !raw.movie_genres.contains(e.movie)) {
      throw Error(ErrorCode::kUnknownReference,
                  "ratings.dat line " + std::to_string(no) + ": unknown user or movie");
    }
    raw.ratings.push_back(e);
  });
  return raw;
}

MovieLensRaw load_ml1m(const std::string& dir) {
  auto open = [&](const char* name) {
    std::ifstream in(dir + "/" + name, std::ios::binary);
    if (!in) throw Error(ErrorCode::kIo, "cannot read " + dir + "/" + name);
    return in;
  };
  auto users = open("users.dat");
  auto movies = open("movies.dat");
  auto ratings = open("ratings.dat");
  return parse_ml1m(users, movies, ratings);
}

void write_ml1m(std::ostream& users, std::ostream& movies, std::ostream& ratings,
                const MovieLensRaw& raw) {
  // Age, occupation and zip code are not retained; placeholders keep the
  // five-field layout.
  for (const auto& [id, gender] : raw.users) {
    users << id << "::" << (gender == Gender::kFemale ? 'F' : 'M') << "::1::0::00000\n";
  }
  for (const auto& [id, genres] : raw.movie_genres) {
    auto title = raw.movie_titles.find(id);
    movies << id << "::" << (title != raw.movie_titles.end() ? title->second : std::string())
           << "::";
    for (std::size_t k = 0; k < genres.size(); ++k) movies << (k ? "|" : "") << genres[k];
    movies << '\n';
  }
  for (const auto& e : raw.ratings) {
    ratings << e.user << "::" << e.movie << "::" << e.rating << "::" << e.timestamp << '\n';
  }
}

std::string_view to_string(GenreMode m) {
  return m == GenreMode::kAnyGenre ? "any" : "only";
}

GenreMode parse_genre_mode(std::string_view s) {
  if (s == "any") return GenreMode::kAnyGenre;
  if (s == "only") return GenreMode::kOnlyGenres;
  throw Error(ErrorCode::kInvalidArgument, "genre mode must be 'any' or 'only'");
}

FilteredMovieLens filter_dataset(const MovieLensRaw& raw, const std::vector<std::string>& genres,
                                 std::size_t min_ratings, GenreMode mode) {
  const auto wanted_list = canonical_genres(genres);
  const std::set<std::string> wanted(wanted_list.begin(), wanted_list.end());

  std::set<std::uint32_t> kept_movies;
  for (const auto& [id, movie_genres] : raw.movie_genres) {
    const auto selected = [&](const std::string& g) { return wanted.contains(g); };
    const bool keep = mode == GenreMode::kAnyGenre
                          ? std::any_of(movie_genres.begin(), movie_genres.end(), selected)
                          : !movie_genres.empty() &&
                                std::all_of(movie_genres.begin(), movie_genres.end(), selected);
    if (keep) kept_movies.insert(id);
  }

  std::unordered_map<std::uint32_t, std::size_t> per_user;
  for (const auto& e : raw.ratings) {
    if (kept_movies.contains(e.movie)) per_user[e.user] += 1;
  }
  std::set<std::uint32_t> kept_users;
  for (const auto& [id, gender] : raw.users) {
    auto it = per_user.find(id);
    const std::size_t n = it == per_user.end() ? 0 : it->second;
    if (n >= min_ratings) kept_users.insert(id);
  }

  std::set<std::uint32_t> rated_movies;
  for (const auto& e : raw.ratings) {
    if (kept_users.contains(e.user) && kept_movies.contains(e.movie)) rated_movies.insert(e.movie);
  }
  if (kept_users.empty() || rated_movies.empty()) {
    throw Error(ErrorCode::kEmptyResult, "filter left no users or movies");
  }

  FilteredMovieLens out;
  out.user_ids.assign(kept_users.begin(), kept_users.end());
  out.movie_ids.assign(rated_movies.begin(), rated_movies.end());
  std::unordered_map<std::uint32_t, std::size_t> user_index, movie_index;
  for (std::size_t k = 0; k < out.user_ids.size(); ++k) user_index[out.user_ids[k]] = k;
  for (std::size_t k = 0; k < out.movie_ids.size(); ++k) movie_index[out.movie_ids[k]] = k;

  Dataset& d = out.dataset;
  d.num_users = out.user_ids.size();
  d.num_items = out.movie_ids.size();
  d.scale = {1.0, 5.0};
  d.is_protected.reserve(d.num_users);
  for (std::uint32_t id : out.user_ids) {
    d.is_protected.push_back(raw.users.at(id) == Gender::kFemale);
  }
  for (const auto& e : raw.ratings) {
    auto u = user_index.find(e.user);
    auto m = movie_index.find(e.movie);
    if (u == user_index.end() || m == movie_index.end()) continue;
    d.ratings.push_back({u->second, m->second, static_cast<double>(e.rating)});
  }
  std::sort(d.ratings.begin(), d.ratings.end(), [](const Rating& a, const Rating& b) {
    return a.user != b.user ? a.user < b.user : a.item < b.item;
  });
  try {
    check_dataset(d);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kEmptyGroup) {
      throw Error(ErrorCode::kEmptyResult, "filter left only one gender");
    }
    throw;
  }
  return out;
}

MovieLensRaw restrict_to(const MovieLensRaw& raw, const FilteredMovieLens& filtered) {
  const std::set<std::uint32_t> users(filtered.user_ids.begin(), filtered.user_ids.end());
  const std::set<std::uint32_t> movies(filtered.movie_ids.begin(), filtered.movie_ids.end());
  MovieLensRaw out;
  for (std::uint32_t id : users) out.users[id] = raw.users.at(id);
  for (std::uint32_t id : movies) {
    out.movie_genres[id] = raw.movie_genres.at(id);
    if (auto t = raw.movie_titles.find(id); t != raw.movie_titles.end()) {
      out.movie_titles[id] = t->second;
    }
  }
  for (const auto& e : raw.ratings) {
    if (users.contains(e.user) && movies.contains(e.movie)) out.ratings.push_back(e);
  }
  return out;
}

TrainTestSplit split(const Dataset& d, double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "train fraction must lie in (0, 1)");
  }
  const std::size_t n = d.ratings.size();
  const auto n_train = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(n)));
  if (n_train == 0 || n_train == n) {
    throw Error(ErrorCode::kDegenerateSplit, "split leaves one side empty");
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  std::sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  std::sort(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());

  TrainTestSplit out;
  out.train = d;
  out.train.ratings.clear();
  out.train.ratings.reserve(n_train);
  for (std::size_t k = 0; k < n_train; ++k) out.train.ratings.push_back(d.ratings[order[k]]);
  out.test.source = EvalSource::kHeldOut;
  out.test.entries.reserve(n - n_train);
  for (std::size_t k = n_train; k < n; ++k) out.test.entries.push_back(d.ratings[order[k]]);
  return out;
}

}  // namespace fairrec
