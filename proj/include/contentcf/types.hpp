#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace contentcf {

struct UserId {
    std::uint32_t value = 0;
    auto operator<=>(const UserId&) const = default;
};

struct ItemId {
    std::uint32_t value = 0;
    auto operator<=>(const ItemId&) const = default;
};

inline std::ostream& operator<<(std::ostream& os, UserId id) { return os << "user " << id.value; }
inline std::ostream& operator<<(std::ostream& os, ItemId id) { return os << "item " << id.value; }

struct Rating {
    UserId user;
    ItemId item;
    std::uint8_t value = 0;  // 1..5
    std::int64_t timestamp = 0;
};

constexpr int kMinRating = 1;
constexpr int kMaxRating = 5;

inline bool valid_rating_value(long long v) { return v >= kMinRating && v <= kMaxRating; }

enum class ProfileSource { dataset, linked_data, override_file };

std::string to_string(ProfileSource source);
ProfileSource profile_source_from_string(const std::string& text);

/// Content description of one movie. Genres come from the ratings dataset;
/// people come from linked data or a curated override file and may be empty.
struct MovieProfile {
    ItemId item;
    std::string title;
    std::vector<std::string> genres;
    std::vector<std::string> directors;
    std::vector<std::string> actors;
    ProfileSource source = ProfileSource::dataset;

    std::size_t feature_count() const { return genres.size() + directors.size() + actors.size(); }
    bool operator==(const MovieProfile&) const = default;
};

/// Base for all recoverable errors raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Input file problem tied to a 1-based line number.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line)
        : Error(what + " (line " + std::to_string(line) + ")"), line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

}  // namespace contentcf

template <>
struct std::hash<contentcf::UserId> {
    std::size_t operator()(contentcf::UserId id) const noexcept { return std::hash<std::uint32_t>{}(id.value); }
};

template <>
struct std::hash<contentcf::ItemId> {
    std::size_t operator()(contentcf::ItemId id) const noexcept { return std::hash<std::uint32_t>{}(id.value); }
};
