#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "contentcf/ingest/movielens.hpp"
#include "contentcf/ingest/sparql.hpp"
#include "contentcf/types.hpp"

namespace contentcf::ingest {

/// Seven top-billed actors, as used when curating metadata by hand.
constexpr std::size_t kDefaultOverrideActorCap = 7;
/// 0 means keep every starring actor the endpoint returns.
constexpr std::size_t kUnlimitedActors = 0;

enum class MetadataStatus { none, fetched_ok, not_found, fetch_failed, overridden };

std::string to_string(MetadataStatus status);
MetadataStatus metadata_status_from_string(const std::string& text);

struct FetchLogEntry {
    MetadataStatus status = MetadataStatus::none;
    bool ambiguous = false;
    bool operator==(const FetchLogEntry&) const = default;
};

/// Linked-data result for one catalog movie, as persisted by the fetch step.
struct FetchedRecord {
    ItemId item;
    std::string title;
    MetadataStatus status = MetadataStatus::none;
    bool ambiguous = false;
    std::vector<std::string> directors;
    std::vector<std::string> actors;
    std::string message;
};

class ProfileStore {
public:
    using Profiles = std::map<ItemId, MovieProfile>;

    ProfileStore() = default;
    ProfileStore(Profiles profiles, std::map<ItemId, FetchLogEntry> fetch_log)
        : profiles_(std::move(profiles)), fetch_log_(std::move(fetch_log)) {}

    const MovieProfile* find(ItemId item) const;
    /// Throws Error for a movie without a profile.
    const MovieProfile& at(ItemId item) const;
    bool contains(ItemId item) const { return profiles_.contains(item); }
    std::size_t size() const { return profiles_.size(); }
    const Profiles& profiles() const { return profiles_; }
    const std::map<ItemId, FetchLogEntry>& fetch_log() const { return fetch_log_; }

    bool operator==(const ProfileStore&) const = default;

private:
    Profiles profiles_;
    std::map<ItemId, FetchLogEntry> fetch_log_;
};

/// Profiles carrying genres only, one per catalog movie.
ProfileStore dataset_profiles(const MovieCatalog& movies);

struct AssembleOptions {
    std::size_t linked_data_actor_cap = kUnlimitedActors;
};

/// Genres always come from the catalog. People come from the override when
/// present, else from a successful fetch, else stay empty.
ProfileStore assemble_profiles(const MovieCatalog& movies, const std::vector<FetchedRecord>& fetched,
                               const std::vector<MovieProfile>& overrides, const AssembleOptions& options = {});

/// Reads override records (same line format as the profile file; genres are
/// optional and ignored). Actor lists are truncated to `actor_cap` in file
/// order (0 = no cap). Records for movies outside `known` are skipped with a
/// warning when `known` is given.
std::vector<MovieProfile> load_overrides(std::istream& in, const MovieCatalog* known = nullptr,
                                         std::size_t actor_cap = kDefaultOverrideActorCap);
std::vector<MovieProfile> load_overrides(const std::filesystem::path& path, const MovieCatalog* known = nullptr,
                                         std::size_t actor_cap = kDefaultOverrideActorCap);

/// One JSON object per line, ascending item id:
/// {"item_id","title","genres","directors","actors","source","status"[,"ambiguous"]}
void write_profiles(const ProfileStore& store, std::ostream& out);
void write_profiles(const ProfileStore& store, const std::filesystem::path& path);
ProfileStore read_profiles(std::istream& in);
ProfileStore read_profiles(const std::filesystem::path& path);

void write_fetched(const std::vector<FetchedRecord>& records, const MovieCatalog& movies, std::ostream& out);
void write_fetched(const std::vector<FetchedRecord>& records, const MovieCatalog& movies,
                   const std::filesystem::path& path);
std::vector<FetchedRecord> read_fetched(std::istream& in);
std::vector<FetchedRecord> read_fetched(const std::filesystem::path& path);

struct FetchOptions {
    std::size_t concurrency = 4;
    int max_retries = 2;
    std::chrono::milliseconds politeness_delay{250};
    std::optional<std::size_t> limit;
};

/// Fetches people for every catalog movie (ascending id, up to `limit`).
/// The year-stripped title is tried first and the raw title on zero rows.
/// Output order follows the catalog regardless of concurrency.
std::vector<FetchedRecord> fetch_all(const MovieCatalog& movies, const std::string& endpoint,
                                     HttpPostTransport& transport, const FetchOptions& options = {});

}  // namespace contentcf::ingest
