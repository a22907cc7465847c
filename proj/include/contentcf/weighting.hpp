#pragma once

#include <cstddef>
#include <cstdint>
#include <list>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "contentcf/ingest/profiles.hpp"
#include "contentcf/types.hpp"

namespace contentcf::weighting {

// Declaration order is the vector layout order: genres, then directors, then actors.
enum class FeatureKind : std::uint8_t { genre, director, actor };

struct Feature {
    FeatureKind kind;
    std::string label;  // normalized
    auto operator<=>(const Feature&) const = default;
};

/// 0/1 presence indicators over an explicit feature universe.
struct FeatureVector {
    std::vector<Feature> universe;
    std::vector<std::uint8_t> components;

    std::size_t ones() const;
};

/// How an item with no shared feature is weighted.
enum class ZeroOverlapWeight {
    mv,       // 1 / (feature count of the richest catalog profile)
    literal,  // 1 / (|M| * |T|), the pair's own norms
};

std::string to_string(ZeroOverlapWeight branch);
ZeroOverlapWeight zero_overlap_weight_from_string(const std::string& text);

/// Trims surrounding whitespace and lower-cases ASCII letters.
std::string normalize_label(std::string_view label);

/// Universe = union of genres, union of directors, and only the actors both
/// profiles share. Sorted by (kind, normalized label).
std::pair<FeatureVector, FeatureVector> build_vectors(const MovieProfile& m, const MovieProfile& t);

/// Plain cosine of two 0/1 vectors over the same universe. Throws Error when
/// the universes differ or either vector is all zero.
double cosine(const FeatureVector& m, const FeatureVector& t);

/// Number of distinct normalized features in a profile.
std::size_t feature_count(const MovieProfile& profile);

/// Largest feature_count over the store (at least 1).
std::size_t max_feature_count(const ingest::ProfileStore& store);

/// Smoothed content weight of `m` relative to target `t`:
/// (1 + k) / (|M| |T|) when they share k >= 1 features, otherwise the floor
/// chosen by `branch`.
double item_weight(const MovieProfile& m, const MovieProfile& t, std::size_t max_feature_count,
                   ZeroOverlapWeight branch = ZeroOverlapWeight::mv);

/// Content weights of some catalog items relative to one target.
struct WeightVector {
    ItemId target;
    std::map<ItemId, double> weights;
    std::size_t max_feature_count = 1;

    /// Throws Error when the item was not requested.
    double at(ItemId item) const;
};

struct WeightOptions {
    ZeroOverlapWeight zero_overlap = ZeroOverlapWeight::mv;
    std::size_t cache_capacity = 1024;  // targets
};

/// Interned profiles plus a bounded, thread-safe memo of per-target weight
/// rows. A row covers every profiled item and is computed on the first
/// request for that target; concurrent misses may compute the same row twice.
class ContentWeighter {
public:
    using Row = std::vector<double>;

    /// The catalog is every profiled item, or just `universe` when given (each
    /// must be profiled). The zero-overlap floor always uses the whole store.
    explicit ContentWeighter(const ingest::ProfileStore& store, WeightOptions options = {},
                             std::span<const ItemId> universe = {});

    std::size_t max_feature_count() const { return max_feature_count_; }
    const WeightOptions& options() const { return options_; }

    /// Catalog of profiled items, ascending; rows are indexed by position in it.
    std::span<const ItemId> catalog() const { return catalog_; }
    /// Position of `item` in catalog(), or -1 when unprofiled.
    std::ptrdiff_t position(ItemId item) const;

    /// Uncached pairwise weight over interned features. Throws Error for unprofiled items.
    double weight(ItemId item, ItemId target) const;

    /// Cached weights of every catalog item relative to `target`.
    std::shared_ptr<const Row> row(ItemId target) const;

    /// Weights for just the requested candidates. Throws Error naming any unprofiled candidate.
    WeightVector weights_for_target(ItemId target, std::span<const ItemId> candidates) const;

    std::size_t cached_targets() const;

private:
    struct Interned {
        std::vector<std::uint32_t> genres;
        std::vector<std::uint32_t> directors;
        std::vector<std::uint32_t> actors;
    };

    double weight_at(std::size_t m, std::size_t t) const;
    std::size_t require(ItemId item) const;

    WeightOptions options_;
    std::vector<ItemId> catalog_;
    std::vector<Interned> interned_;
    std::size_t max_feature_count_ = 1;

    mutable std::mutex mutex_;
    mutable std::list<ItemId> lru_;
    mutable std::unordered_map<ItemId, std::pair<std::shared_ptr<const Row>, std::list<ItemId>::iterator>> cache_;
};

}  // namespace contentcf::weighting
