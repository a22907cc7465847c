#include "contentcf/ingest/movielens.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>

#include "contentcf/log.hpp"

namespace contentcf::ingest {

namespace {

constexpr std::string_view kSeparator = "::";

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        std::size_t pos = line.find(kSeparator, start);
        if (pos == std::string_view::npos) {
            fields.push_back(line.substr(start));
            return fields;
        }
        fields.push_back(line.substr(start, pos - start));
        start = pos + kSeparator.size();
    }
}

std::string_view trim(std::string_view s) {
    const auto ws = " \t\r\n";
    auto b = s.find_first_not_of(ws);
    if (b == std::string_view::npos) return {};
    auto e = s.find_last_not_of(ws);
    return s.substr(b, e - b + 1);
}

template <typename Int>
bool parse_int(std::string_view text, Int& out) {
    text = trim(text);
    if (text.empty()) return false;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
    return ec == std::errc() && ptr == text.data() + text.size();
}

std::ifstream open_or_throw(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    return in;
}

bool valid_utf8(std::string_view s) {
    std::size_t i = 0;
    while (i < s.size()) {
        auto c = static_cast<unsigned char>(s[i]);
        std::size_t extra = 0;
        if (c < 0x80) extra = 0;
        else if ((c & 0xE0) == 0xC0 && c >= 0xC2) extra = 1;
        else if ((c & 0xF0) == 0xE0) extra = 2;
        else if ((c & 0xF8) == 0xF0 && c <= 0xF4) extra = 3;
        else return false;
        if (i + extra >= s.size()) return false;
        for (std::size_t k = 1; k <= extra; ++k) {
            if ((static_cast<unsigned char>(s[i + k]) & 0xC0) != 0x80) return false;
        }
        i += extra + 1;
    }
    return true;
}

}  // namespace

const std::vector<std::string>& movielens_genres() {
    static const std::vector<std::string> genres = {
        "Action",  "Adventure", "Animation", "Children's", "Comedy",  "Crime",
        "Documentary", "Drama", "Fantasy",   "Film-Noir",  "Horror",  "Musical",
        "Mystery", "Romance",   "Sci-Fi",    "Thriller",   "War",     "Western"};
    return genres;
}

std::string decode_lenient(std::string_view bytes) {
    if (valid_utf8(bytes)) return std::string(bytes);
    std::string out;
    out.reserve(bytes.size() + bytes.size() / 8);
    for (char ch : bytes) {
        auto c = static_cast<unsigned char>(ch);
        if (c < 0x80) {
            out.push_back(ch);
        } else {
            out.push_back(static_cast<char>(0xC0 | (c >> 6)));
            out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
        }
    }
    return out;
}

std::string strip_year(std::string_view title) {
    title = trim(title);
    if (title.size() >= 6 && title.back() == ')') {
        auto open = title.rfind('(');
        if (open != std::string_view::npos) {
            auto inner = title.substr(open + 1, title.size() - open - 2);
            bool year = inner.size() == 4 && std::all_of(inner.begin(), inner.end(), [](char c) { return c >= '0' && c <= '9'; });
            if (year) return std::string(trim(title.substr(0, open)));
        }
    }
    return std::string(title);
}

std::vector<Rating> parse_ratings(std::istream& in) {
    std::vector<Rating> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string_view view = trim(line);
        if (view.empty()) continue;
        auto fields = split_fields(view);
        if (fields.size() != 4) throw ParseError("malformed rating record: expected 4 fields", lineno);
        Rating r;
        long long value = 0;
        if (!parse_int(fields[0], r.user.value)) throw ParseError("malformed user id", lineno);
        if (!parse_int(fields[1], r.item.value)) throw ParseError("malformed movie id", lineno);
        if (!parse_int(fields[2], value)) throw ParseError("malformed rating value", lineno);
        if (!parse_int(fields[3], r.timestamp)) throw ParseError("malformed timestamp", lineno);
        if (!valid_rating_value(value)) throw ParseError("rating out of range: " + std::to_string(value), lineno);
        r.value = static_cast<std::uint8_t>(value);
        out.push_back(r);
    }
    return out;
}

std::vector<Rating> parse_ratings(const std::filesystem::path& path) {
    auto in = open_or_throw(path);
    return parse_ratings(in);
}

MovieCatalog parse_movies(std::istream& in) {
    const auto& known = movielens_genres();
    std::set<std::string> warned;
    MovieCatalog out;
    std::string raw;
    std::size_t lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        std::string line = decode_lenient(trim(raw));
        if (line.empty()) continue;
        // Titles may themselves contain "::" only in theory; id is first, genres last.
        std::string_view view = line;
        auto first = view.find(kSeparator);
        auto last = view.rfind(kSeparator);
        if (first == std::string_view::npos || first == last) throw ParseError("malformed movie record: expected 3 fields", lineno);

        ItemId id;
        if (!parse_int(view.substr(0, first), id.value)) throw ParseError("malformed movie id", lineno);
        MovieEntry entry;
        entry.title = std::string(trim(view.substr(first + 2, last - first - 2)));
        std::string_view genre_field = trim(view.substr(last + 2));
        if (genre_field.empty()) throw ParseError("movie " + std::to_string(id.value) + " has no genres", lineno);

        std::size_t start = 0;
        while (start <= genre_field.size()) {
            auto bar = genre_field.find('|', start);
            auto label = trim(genre_field.substr(start, bar == std::string_view::npos ? std::string_view::npos : bar - start));
            if (!label.empty()) {
                std::string g(label);
                if (std::find(known.begin(), known.end(), g) == known.end() && warned.insert(g).second)
                    log::warning("unknown genre label '" + g + "' (line " + std::to_string(lineno) + "), kept verbatim");
                if (std::find(entry.genres.begin(), entry.genres.end(), g) == entry.genres.end())
                    entry.genres.push_back(std::move(g));
            }
            if (bar == std::string_view::npos) break;
            start = bar + 1;
        }
        if (entry.genres.empty()) throw ParseError("movie " + std::to_string(id.value) + " has no genres", lineno);
        if (!out.emplace(id, std::move(entry)).second)
            throw ParseError("duplicate movie id " + std::to_string(id.value), lineno);
    }
    return out;
}

MovieCatalog parse_movies(const std::filesystem::path& path) {
    auto in = open_or_throw(path);
    return parse_movies(in);
}

}  // namespace contentcf::ingest
