#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "contentcf/types.hpp"

namespace contentcf {

/// Dense position of a user inside one RatingMatrix. Indices follow ascending UserId.
using UserIndex = std::uint32_t;
/// Dense position of an item inside one RatingMatrix. Indices follow ascending ItemId.
using ItemIndex = std::uint32_t;

struct ItemRating {
    ItemIndex item;
    std::uint8_t value;
};

struct UserRating {
    UserIndex user;
    std::uint8_t value;
};

/// Immutable sparse user x item store of 1-5 ratings.
///
/// Ratings are held twice, row-wise (per user, sorted by item) and
/// column-wise (per item, sorted by user), so both "what did u rate" and
/// "who rated i" are contiguous spans. Safe for concurrent reads.
class RatingMatrix {
public:
    /// Throws Error on empty input, duplicate (user, item) pairs or out-of-range values.
    static RatingMatrix build(std::span<const Rating> ratings);

    std::size_t rating_count() const { return row_entries_.size(); }
    std::size_t user_count() const { return user_ids_.size(); }
    std::size_t item_count() const { return item_ids_.size(); }

    std::optional<UserIndex> find_user(UserId id) const;
    std::optional<ItemIndex> find_item(ItemId id) const;
    UserId user_id(UserIndex u) const { return user_ids_[u]; }
    ItemId item_id(ItemIndex i) const { return item_ids_[i]; }
    std::span<const UserId> user_ids() const { return user_ids_; }
    std::span<const ItemId> item_ids() const { return item_ids_; }

    /// Mean over every rating the user has in this matrix.
    double user_mean(UserIndex u) const { return user_means_[u]; }
    /// Throws Error for an unknown user.
    double user_mean(UserId id) const;

    std::span<const ItemRating> user_ratings(UserIndex u) const;
    std::span<const UserRating> item_ratings(ItemIndex i) const;

    std::optional<int> rating(UserIndex u, ItemIndex i) const;
    std::optional<int> rating(UserId user, ItemId item) const;

    /// Users with a rating for the item, ascending. Empty for an unknown item.
    std::vector<UserId> item_raters(ItemId item) const;

private:
    std::vector<UserId> user_ids_;
    std::vector<ItemId> item_ids_;
    std::vector<double> user_means_;
    std::vector<std::size_t> row_offsets_;
    std::vector<ItemRating> row_entries_;
    std::vector<std::size_t> col_offsets_;
    std::vector<UserRating> col_entries_;
};

}  // namespace contentcf
