#pragma once

#include <filesystem>
#include <istream>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "contentcf/types.hpp"

namespace contentcf::ingest {

/// Title and genre list for one movie, as read from movies.dat.
struct MovieEntry {
    std::string title;
    std::vector<std::string> genres;
};

using MovieCatalog = std::map<ItemId, MovieEntry>;

/// The 18 genre labels shipped with MovieLens-1M.
const std::vector<std::string>& movielens_genres();

/// Parses `UserID::MovieID::Rating::Timestamp` lines. Blank lines are ignored.
/// Throws ParseError naming the line for malformed records or ratings outside 1-5.
std::vector<Rating> parse_ratings(std::istream& in);
std::vector<Rating> parse_ratings(const std::filesystem::path& path);

/// Parses `MovieID::Title::Genre1|Genre2` lines. Text that is not valid UTF-8 is
/// decoded as Latin-1. Unknown genre labels are kept and logged as warnings.
MovieCatalog parse_movies(std::istream& in);
MovieCatalog parse_movies(const std::filesystem::path& path);

/// Returns the input unchanged when it is valid UTF-8, otherwise reinterprets
/// every byte as Latin-1 and re-encodes.
std::string decode_lenient(std::string_view bytes);

/// "Toy Story (1995)" -> "Toy Story". Titles without a trailing year are returned trimmed.
std::string strip_year(std::string_view title);

}  // namespace contentcf::ingest
