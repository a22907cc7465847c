#include "contentcf/rating_matrix.hpp"

#include <algorithm>
#include <sstream>

namespace contentcf {

namespace {

template <typename Id>
std::vector<Id> sorted_unique(std::vector<Id> ids) {
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    return ids;
}

template <typename Id>
std::uint32_t index_of(const std::vector<Id>& ids, Id id) {
    return static_cast<std::uint32_t>(std::lower_bound(ids.begin(), ids.end(), id) - ids.begin());
}

}  // namespace

RatingMatrix RatingMatrix::build(std::span<const Rating> ratings) {
    if (ratings.empty()) throw Error("cannot build a rating matrix from no ratings");

    RatingMatrix m;
    std::vector<UserId> users;
    std::vector<ItemId> items;
    users.reserve(ratings.size());
    items.reserve(ratings.size());
    for (const Rating& r : ratings) {
        if (!valid_rating_value(r.value)) {
            std::ostringstream msg;
            msg << "rating out of range for (" << r.user << ", " << r.item << "): " << int(r.value);
            throw Error(msg.str());
        }
        users.push_back(r.user);
        items.push_back(r.item);
    }
    m.user_ids_ = sorted_unique(std::move(users));
    m.item_ids_ = sorted_unique(std::move(items));

    struct Triple {
        UserIndex u;
        ItemIndex i;
        std::uint8_t v;
    };
    std::vector<Triple> triples;
    triples.reserve(ratings.size());
    for (const Rating& r : ratings)
        triples.push_back({index_of(m.user_ids_, r.user), index_of(m.item_ids_, r.item), r.value});

    std::sort(triples.begin(), triples.end(),
              [](const Triple& a, const Triple& b) { return a.u != b.u ? a.u < b.u : a.i < b.i; });
    for (std::size_t k = 1; k < triples.size(); ++k) {
        if (triples[k].u == triples[k - 1].u && triples[k].i == triples[k - 1].i) {
            std::ostringstream msg;
            msg << "duplicate rating for (" << m.user_ids_[triples[k].u] << ", " << m.item_ids_[triples[k].i] << ")";
            throw Error(msg.str());
        }
    }

    const std::size_t nu = m.user_ids_.size();
    const std::size_t ni = m.item_ids_.size();
    m.row_offsets_.assign(nu + 1, 0);
    m.col_offsets_.assign(ni + 1, 0);
    for (const Triple& t : triples) {
        ++m.row_offsets_[t.u + 1];
        ++m.col_offsets_[t.i + 1];
    }
    for (std::size_t u = 0; u < nu; ++u) m.row_offsets_[u + 1] += m.row_offsets_[u];
    for (std::size_t i = 0; i < ni; ++i) m.col_offsets_[i + 1] += m.col_offsets_[i];

    m.row_entries_.reserve(triples.size());
    for (const Triple& t : triples) m.row_entries_.push_back({t.i, t.v});

    // Triples are sorted by user, so each column fills in ascending user order.
    m.col_entries_.resize(triples.size());
    std::vector<std::size_t> cursor(m.col_offsets_.begin(), m.col_offsets_.end() - 1);
    for (const Triple& t : triples) m.col_entries_[cursor[t.i]++] = {t.u, t.v};

    m.user_means_.resize(nu);
    for (std::size_t u = 0; u < nu; ++u) {
        long long sum = 0;
        for (std::size_t k = m.row_offsets_[u]; k < m.row_offsets_[u + 1]; ++k) sum += m.row_entries_[k].value;
        m.user_means_[u] = static_cast<double>(sum) / static_cast<double>(m.row_offsets_[u + 1] - m.row_offsets_[u]);
    }
    return m;
}

std::optional<UserIndex> RatingMatrix::find_user(UserId id) const {
    auto it = std::lower_bound(user_ids_.begin(), user_ids_.end(), id);
    if (it == user_ids_.end() || *it != id) return std::nullopt;
    return static_cast<UserIndex>(it - user_ids_.begin());
}

std::optional<ItemIndex> RatingMatrix::find_item(ItemId id) const {
    auto it = std::lower_bound(item_ids_.begin(), item_ids_.end(), id);
    if (it == item_ids_.end() || *it != id) return std::nullopt;
    return static_cast<ItemIndex>(it - item_ids_.begin());
}

double RatingMatrix::user_mean(UserId id) const {
    auto u = find_user(id);
    if (!u) {
        std::ostringstream msg;
        msg << "unknown " << id;
        throw Error(msg.str());
    }
    return user_means_[*u];
}

std::span<const ItemRating> RatingMatrix::user_ratings(UserIndex u) const {
    return std::span<const ItemRating>(row_entries_).subspan(row_offsets_[u], row_offsets_[u + 1] - row_offsets_[u]);
}

std::span<const UserRating> RatingMatrix::item_ratings(ItemIndex i) const {
    return std::span<const UserRating>(col_entries_).subspan(col_offsets_[i], col_offsets_[i + 1] - col_offsets_[i]);
}

std::optional<int> RatingMatrix::rating(UserIndex u, ItemIndex i) const {
    auto row = user_ratings(u);
    auto it = std::lower_bound(row.begin(), row.end(), i, [](const ItemRating& e, ItemIndex x) { return e.item < x; });
    if (it == row.end() || it->item != i) return std::nullopt;
    return it->value;
}

std::optional<int> RatingMatrix::rating(UserId user, ItemId item) const {
    auto u = find_user(user);
    auto i = find_item(item);
    if (!u || !i) return std::nullopt;
    return rating(*u, *i);
}

std::vector<UserId> RatingMatrix::item_raters(ItemId item) const {
    std::vector<UserId> out;
    if (auto i = find_item(item)) {
        for (const UserRating& e : item_ratings(*i)) out.push_back(user_ids_[e.user]);
    }
    return out;
}

}  // namespace contentcf
