#include "contentcf/ingest/profiles.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "contentcf/log.hpp"

namespace contentcf::ingest {

using ordered_json = nlohmann::ordered_json;

std::string to_string(MetadataStatus status) {
    switch (status) {
        case MetadataStatus::none: return "none";
        case MetadataStatus::fetched_ok: return "fetched-ok";
        case MetadataStatus::not_found: return "not-found";
        case MetadataStatus::fetch_failed: return "fetch-failed";
        case MetadataStatus::overridden: return "overridden";
    }
    return "none";
}

MetadataStatus metadata_status_from_string(const std::string& text) {
    for (auto s : {MetadataStatus::none, MetadataStatus::fetched_ok, MetadataStatus::not_found,
                   MetadataStatus::fetch_failed, MetadataStatus::overridden}) {
        if (to_string(s) == text) return s;
    }
    throw Error("unknown metadata status '" + text + "'");
}

const MovieProfile* ProfileStore::find(ItemId item) const {
    auto it = profiles_.find(item);
    return it == profiles_.end() ? nullptr : &it->second;
}

const MovieProfile& ProfileStore::at(ItemId item) const {
    if (auto p = find(item)) return *p;
    throw Error("no profile for movie " + std::to_string(item.value));
}

ProfileStore dataset_profiles(const MovieCatalog& movies) { return assemble_profiles(movies, {}, {}); }

namespace {

std::vector<std::string> capped(std::vector<std::string> names, std::size_t cap) {
    if (cap != kUnlimitedActors && names.size() > cap) names.resize(cap);
    return names;
}

std::ifstream open_or_throw(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    return in;
}

std::ofstream create_or_throw(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + path.string());
    return out;
}

std::vector<std::string> string_list(const ordered_json& record, const char* key, std::size_t lineno) {
    std::vector<std::string> out;
    if (!record.contains(key)) return out;
    const auto& arr = record.at(key);
    if (!arr.is_array()) throw ParseError(std::string("field '") + key + "' must be an array", lineno);
    for (const auto& v : arr) {
        if (!v.is_string()) throw ParseError(std::string("field '") + key + "' must hold strings", lineno);
        out.push_back(v.get<std::string>());
    }
    return out;
}

/// Calls `fn(record, lineno)` for each non-blank line parsed as a JSON object.
template <typename Fn>
void for_each_record(std::istream& in, Fn&& fn) {
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        ordered_json record;
        try {
            record = ordered_json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw ParseError(std::string("malformed record: ") + e.what(), lineno);
        }
        if (!record.is_object()) throw ParseError("record is not an object", lineno);
        if (!record.contains("item_id") || !record["item_id"].is_number_unsigned())
            throw ParseError("record lacks a non-negative integer item_id", lineno);
        try {
            fn(record, lineno);
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(std::string("malformed record: ") + e.what(), lineno);
        }
    }
}

ordered_json profile_record(const MovieProfile& p, const FetchLogEntry& log) {
    ordered_json j;
    j["item_id"] = p.item.value;
    j["title"] = p.title;
    j["genres"] = p.genres;
    j["directors"] = p.directors;
    j["actors"] = p.actors;
    j["source"] = to_string(p.source);
    j["status"] = to_string(log.status);
    if (log.ambiguous) j["ambiguous"] = true;
    return j;
}

}  // namespace

ProfileStore assemble_profiles(const MovieCatalog& movies, const std::vector<FetchedRecord>& fetched,
                               const std::vector<MovieProfile>& overrides, const AssembleOptions& options) {
    std::map<ItemId, const FetchedRecord*> fetched_by_item;
    for (const auto& r : fetched) fetched_by_item[r.item] = &r;
    std::map<ItemId, const MovieProfile*> override_by_item;
    for (const auto& o : overrides) override_by_item[o.item] = &o;

    ProfileStore::Profiles profiles;
    std::map<ItemId, FetchLogEntry> log;
    for (const auto& [id, movie] : movies) {
        MovieProfile p;
        p.item = id;
        p.title = movie.title;
        p.genres = movie.genres;
        FetchLogEntry entry;

        auto f = fetched_by_item.find(id);
        if (f != fetched_by_item.end()) {
            entry.status = f->second->status;
            entry.ambiguous = f->second->ambiguous;
        }
        if (auto o = override_by_item.find(id); o != override_by_item.end()) {
            p.directors = o->second->directors;
            p.actors = o->second->actors;
            p.source = ProfileSource::override_file;
            entry.status = MetadataStatus::overridden;
        } else if (f != fetched_by_item.end() && f->second->status == MetadataStatus::fetched_ok) {
            p.directors = f->second->directors;
            p.actors = capped(f->second->actors, options.linked_data_actor_cap);
            p.source = ProfileSource::linked_data;
        }
        profiles.emplace(id, std::move(p));
        log.emplace(id, entry);
    }
    return ProfileStore(std::move(profiles), std::move(log));
}

std::vector<MovieProfile> load_overrides(std::istream& in, const MovieCatalog* known, std::size_t actor_cap) {
    std::vector<MovieProfile> out;
    for_each_record(in, [&](const ordered_json& record, std::size_t lineno) {
        MovieProfile p;
        p.item = ItemId{record.at("item_id").get<std::uint32_t>()};
        if (known && !known->contains(p.item)) {
            log::warning("override for unknown movie " + std::to_string(p.item.value) + " (line " +
                         std::to_string(lineno) + ") skipped");
            return;
        }
        if (record.contains("title")) p.title = record.at("title").get<std::string>();
        p.genres = string_list(record, "genres", lineno);
        p.directors = string_list(record, "directors", lineno);
        p.actors = capped(string_list(record, "actors", lineno), actor_cap);
        p.source = ProfileSource::override_file;
        out.push_back(std::move(p));
    });
    return out;
}

std::vector<MovieProfile> load_overrides(const std::filesystem::path& path, const MovieCatalog* known,
                                         std::size_t actor_cap) {
    auto in = open_or_throw(path);
    return load_overrides(in, known, actor_cap);
}

void write_profiles(const ProfileStore& store, std::ostream& out) {
    for (const auto& [id, p] : store.profiles()) {
        auto log_it = store.fetch_log().find(id);
        FetchLogEntry entry = log_it == store.fetch_log().end() ? FetchLogEntry{} : log_it->second;
        out << profile_record(p, entry).dump() << '\n';
    }
}

void write_profiles(const ProfileStore& store, const std::filesystem::path& path) {
    auto out = create_or_throw(path);
    write_profiles(store, out);
    if (!out) throw Error("failed writing " + path.string());
}

ProfileStore read_profiles(std::istream& in) {
    ProfileStore::Profiles profiles;
    std::map<ItemId, FetchLogEntry> log;
    for_each_record(in, [&](const ordered_json& record, std::size_t lineno) {
        MovieProfile p;
        p.item = ItemId{record.at("item_id").get<std::uint32_t>()};
        p.title = record.value("title", std::string{});
        p.genres = string_list(record, "genres", lineno);
        p.directors = string_list(record, "directors", lineno);
        p.actors = string_list(record, "actors", lineno);
        if (p.genres.empty()) throw ParseError("profile has no genres", lineno);
        try {
            p.source = profile_source_from_string(record.value("source", std::string("dataset")));
            FetchLogEntry entry;
            entry.status = metadata_status_from_string(record.value("status", std::string("none")));
            entry.ambiguous = record.value("ambiguous", false);
            log[p.item] = entry;
        } catch (const Error& e) {
            throw ParseError(e.what(), lineno);
        }
        if (!profiles.emplace(p.item, std::move(p)).second) throw ParseError("duplicate profile record", lineno);
    });
    return ProfileStore(std::move(profiles), std::move(log));
}

ProfileStore read_profiles(const std::filesystem::path& path) {
    auto in = open_or_throw(path);
    return read_profiles(in);
}

void write_fetched(const std::vector<FetchedRecord>& records, const MovieCatalog& movies, std::ostream& out) {
    for (const auto& r : records) {
        MovieProfile p;
        p.item = r.item;
        p.title = r.title;
        if (auto m = movies.find(r.item); m != movies.end()) p.genres = m->second.genres;
        p.directors = r.directors;
        p.actors = r.actors;
        p.source = ProfileSource::linked_data;
        auto j = profile_record(p, FetchLogEntry{r.status, r.ambiguous});
        if (!r.message.empty()) j["message"] = r.message;
        out << j.dump() << '\n';
    }
}

void write_fetched(const std::vector<FetchedRecord>& records, const MovieCatalog& movies,
                   const std::filesystem::path& path) {
    auto out = create_or_throw(path);
    write_fetched(records, movies, out);
    if (!out) throw Error("failed writing " + path.string());
}

std::vector<FetchedRecord> read_fetched(std::istream& in) {
    std::vector<FetchedRecord> out;
    for_each_record(in, [&](const ordered_json& record, std::size_t lineno) {
        FetchedRecord r;
        r.item = ItemId{record.at("item_id").get<std::uint32_t>()};
        r.title = record.value("title", std::string{});
        try {
            r.status = metadata_status_from_string(record.value("status", std::string("none")));
        } catch (const Error& e) {
            throw ParseError(e.what(), lineno);
        }
        r.ambiguous = record.value("ambiguous", false);
        r.directors = string_list(record, "directors", lineno);
        r.actors = string_list(record, "actors", lineno);
        r.message = record.value("message", std::string{});
        out.push_back(std::move(r));
    });
    return out;
}

std::vector<FetchedRecord> read_fetched(const std::filesystem::path& path) {
    auto in = open_or_throw(path);
    return read_fetched(in);
}

namespace {

FetchedRecord fetch_one(ItemId id, const MovieEntry& movie, const std::string& endpoint, HttpPostTransport& transport,
                        const FetchOptions& options) {
    FetchedRecord rec;
    rec.item = id;
    rec.title = movie.title;

    std::vector<std::string> attempts{strip_year(movie.title)};
    if (attempts.front() != movie.title) attempts.push_back(movie.title);

    for (const auto& title : attempts) {
        FetchOutcome outcome;
        for (int attempt = 0; attempt <= options.max_retries; ++attempt) {
            if (attempt > 0 || options.politeness_delay.count() > 0) std::this_thread::sleep_for(options.politeness_delay);
            try {
                outcome = fetch_profile(title, endpoint, transport);
            } catch (const Error& e) {
                outcome = FetchOutcome{FetchStatus::failed, {}, e.what()};
                break;  // malformed payloads are not transient
            }
            if (outcome.status != FetchStatus::failed) break;
        }
        if (outcome.status == FetchStatus::failed) {
            rec.status = MetadataStatus::fetch_failed;
            rec.message = outcome.message;
            return rec;
        }
        if (outcome.status == FetchStatus::ok) {
            rec.status = MetadataStatus::fetched_ok;
            rec.ambiguous = outcome.result.ambiguous();
            rec.directors.assign(outcome.result.director_names.begin(), outcome.result.director_names.end());
            rec.actors.assign(outcome.result.star_names.begin(), outcome.result.star_names.end());
            return rec;
        }
    }
    rec.status = MetadataStatus::not_found;
    return rec;
}

}  // namespace

std::vector<FetchedRecord> fetch_all(const MovieCatalog& movies, const std::string& endpoint,
                                     HttpPostTransport& transport, const FetchOptions& options) {
    std::vector<std::pair<ItemId, const MovieEntry*>> work;
    for (const auto& [id, movie] : movies) {
        if (options.limit && work.size() >= *options.limit) break;
        work.emplace_back(id, &movie);
    }

    std::vector<FetchedRecord> out(work.size());
    std::atomic<std::size_t> next{0};
    std::atomic<std::size_t> done{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < work.size(); i = next++) {
            out[i] = fetch_one(work[i].first, *work[i].second, endpoint, transport, options);
            std::size_t n = ++done;
            if (n % 100 == 0 || n == work.size())
                log::info("fetched " + std::to_string(n) + "/" + std::to_string(work.size()));
        }
    };
    std::size_t threads = std::clamp<std::size_t>(options.concurrency, 1, std::max<std::size_t>(work.size(), 1));
    std::vector<std::jthread> pool;
    for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
    pool.clear();
    return out;
}

}  // namespace contentcf::ingest
