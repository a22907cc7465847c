#include "contentcf/weighting.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace contentcf::weighting {

std::string to_string(ZeroOverlapWeight branch) {
    return branch == ZeroOverlapWeight::mv ? "mv" : "literal";
}

ZeroOverlapWeight zero_overlap_weight_from_string(const std::string& text) {
    if (text == "mv") return ZeroOverlapWeight::mv;
    if (text == "literal") return ZeroOverlapWeight::literal;
    throw Error("unknown zero-overlap branch '" + text + "' (expected mv or literal)");
}

std::string normalize_label(std::string_view label) {
    const auto ws = " \t\r\n\f\v";
    auto b = label.find_first_not_of(ws);
    if (b == std::string_view::npos) return {};
    auto e = label.find_last_not_of(ws);
    std::string out(label.substr(b, e - b + 1));
    for (char& c : out) {
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    }
    return out;
}

namespace {

std::set<std::string> normalized_set(const std::vector<std::string>& labels) {
    std::set<std::string> out;
    for (const auto& l : labels) {
        auto n = normalize_label(l);
        if (!n.empty()) out.insert(std::move(n));
    }
    return out;
}

std::size_t intersection_size(const std::vector<std::uint32_t>& a, const std::vector<std::uint32_t>& b) {
    std::size_t n = 0;
    auto i = a.begin();
    auto j = b.begin();
    while (i != a.end() && j != b.end()) {
        if (*i < *j) ++i;
        else if (*j < *i) ++j;
        else {
            ++n;
            ++i;
            ++j;
        }
    }
    return n;
}

double smoothed_weight(std::size_t shared, std::size_t ones_m, std::size_t ones_t, std::size_t max_features,
                       ZeroOverlapWeight branch) {
    const double norms = std::sqrt(static_cast<double>(ones_m)) * std::sqrt(static_cast<double>(ones_t));
    if (shared >= 1) return (1.0 + static_cast<double>(shared)) / norms;
    if (branch == ZeroOverlapWeight::literal) return 1.0 / norms;
    return 1.0 / static_cast<double>(max_features);
}

}  // namespace

std::size_t FeatureVector::ones() const {
    return static_cast<std::size_t>(std::count(components.begin(), components.end(), std::uint8_t{1}));
}

std::pair<FeatureVector, FeatureVector> build_vectors(const MovieProfile& m, const MovieProfile& t) {
    const auto mg = normalized_set(m.genres), tg = normalized_set(t.genres);
    const auto md = normalized_set(m.directors), td = normalized_set(t.directors);
    const auto ma = normalized_set(m.actors), ta = normalized_set(t.actors);

    std::set<Feature> universe;
    for (const auto& g : mg) universe.insert({FeatureKind::genre, g});
    for (const auto& g : tg) universe.insert({FeatureKind::genre, g});
    for (const auto& d : md) universe.insert({FeatureKind::director, d});
    for (const auto& d : td) universe.insert({FeatureKind::director, d});
    for (const auto& a : ma) {
        if (ta.contains(a)) universe.insert({FeatureKind::actor, a});
    }

    auto has = [](const Feature& f, const auto& genres, const auto& directors, const auto& actors) {
        switch (f.kind) {
            case FeatureKind::genre: return genres.contains(f.label);
            case FeatureKind::director: return directors.contains(f.label);
            case FeatureKind::actor: return actors.contains(f.label);
        }
        return false;
    };

    FeatureVector vm, vt;
    vm.universe.assign(universe.begin(), universe.end());
    vt.universe = vm.universe;
    for (const auto& f : vm.universe) {
        vm.components.push_back(has(f, mg, md, ma) ? 1 : 0);
        vt.components.push_back(has(f, tg, td, ta) ? 1 : 0);
    }
    return {std::move(vm), std::move(vt)};
}

double cosine(const FeatureVector& m, const FeatureVector& t) {
    if (m.components.size() != t.components.size() || m.universe != t.universe)
        throw Error("cosine of vectors over different feature universes");
    double dot = 0, nm = 0, nt = 0;
    for (std::size_t i = 0; i < m.components.size(); ++i) {
        dot += double(m.components[i]) * double(t.components[i]);
        nm += double(m.components[i]) * double(m.components[i]);
        nt += double(t.components[i]) * double(t.components[i]);
    }
    if (nm == 0 || nt == 0) throw Error("cosine of an all-zero feature vector");
    return dot / (std::sqrt(nm) * std::sqrt(nt));
}

std::size_t feature_count(const MovieProfile& profile) {
    return normalized_set(profile.genres).size() + normalized_set(profile.directors).size() +
           normalized_set(profile.actors).size();
}

std::size_t max_feature_count(const ingest::ProfileStore& store) {
    std::size_t best = 1;
    for (const auto& [id, p] : store.profiles()) best = std::max(best, feature_count(p));
    return best;
}

double item_weight(const MovieProfile& m, const MovieProfile& t, std::size_t max_features, ZeroOverlapWeight branch) {
    if (max_features < 1) throw Error("max feature count must be at least 1");
    auto [vm, vt] = build_vectors(m, t);
    std::size_t shared = 0;
    for (std::size_t i = 0; i < vm.components.size(); ++i) shared += vm.components[i] & vt.components[i];
    const std::size_t om = vm.ones(), ot = vt.ones();
    if (om == 0 || ot == 0) throw Error("profile without features");
    return smoothed_weight(shared, om, ot, max_features, branch);
}

double WeightVector::at(ItemId item) const {
    auto it = weights.find(item);
    if (it == weights.end()) throw Error("no content weight for movie " + std::to_string(item.value));
    return it->second;
}

ContentWeighter::ContentWeighter(const ingest::ProfileStore& store, WeightOptions options,
                                 std::span<const ItemId> universe)
    : options_(options) {
    std::map<std::pair<FeatureKind, std::string>, std::uint32_t> ids;
    auto intern = [&](FeatureKind kind, const std::vector<std::string>& labels) {
        std::vector<std::uint32_t> out;
        for (const auto& l : normalized_set(labels)) {
            auto [it, inserted] = ids.try_emplace({kind, l}, static_cast<std::uint32_t>(ids.size()));
            out.push_back(it->second);
        }
        std::sort(out.begin(), out.end());
        return out;
    };
    auto add = [&](ItemId id, const MovieProfile& p) {
        Interned in{intern(FeatureKind::genre, p.genres), intern(FeatureKind::director, p.directors),
                    intern(FeatureKind::actor, p.actors)};
        if (in.genres.empty()) throw Error("profile for movie " + std::to_string(id.value) + " has no genres");
        catalog_.push_back(id);
        interned_.push_back(std::move(in));
    };

    max_feature_count_ = weighting::max_feature_count(store);
    if (universe.empty()) {
        for (const auto& [id, p] : store.profiles()) add(id, p);
    } else {
        std::vector<ItemId> sorted(universe.begin(), universe.end());
        std::sort(sorted.begin(), sorted.end());
        sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
        for (ItemId id : sorted) add(id, store.at(id));
    }
}

std::ptrdiff_t ContentWeighter::position(ItemId item) const {
    auto it = std::lower_bound(catalog_.begin(), catalog_.end(), item);
    if (it == catalog_.end() || *it != item) return -1;
    return it - catalog_.begin();
}

std::size_t ContentWeighter::require(ItemId item) const {
    auto pos = position(item);
    if (pos < 0) throw Error("movie " + std::to_string(item.value) + " has no profile");
    return static_cast<std::size_t>(pos);
}

double ContentWeighter::weight_at(std::size_t m, std::size_t t) const {
    const Interned& a = interned_[m];
    const Interned& b = interned_[t];
    const std::size_t common_actors = intersection_size(a.actors, b.actors);
    const std::size_t shared =
        intersection_size(a.genres, b.genres) + intersection_size(a.directors, b.directors) + common_actors;
    const std::size_t ones_m = a.genres.size() + a.directors.size() + common_actors;
    const std::size_t ones_t = b.genres.size() + b.directors.size() + common_actors;
    return smoothed_weight(shared, ones_m, ones_t, max_feature_count_, options_.zero_overlap);
}

double ContentWeighter::weight(ItemId item, ItemId target) const { return weight_at(require(item), require(target)); }

std::shared_ptr<const ContentWeighter::Row> ContentWeighter::row(ItemId target) const {
    const std::size_t t = require(target);
    {
        std::lock_guard lock(mutex_);
        if (auto it = cache_.find(target); it != cache_.end()) {
            lru_.splice(lru_.begin(), lru_, it->second.second);
            return it->second.first;
        }
    }

    auto fresh = std::make_shared<Row>(catalog_.size());
    for (std::size_t m = 0; m < catalog_.size(); ++m) (*fresh)[m] = weight_at(m, t);

    std::lock_guard lock(mutex_);
    if (auto it = cache_.find(target); it != cache_.end()) return it->second.first;
    if (options_.cache_capacity == 0) return fresh;
    while (cache_.size() >= options_.cache_capacity) {
        cache_.erase(lru_.back());
        lru_.pop_back();
    }
    lru_.push_front(target);
    cache_.emplace(target, std::make_pair(fresh, lru_.begin()));
    return fresh;
}

WeightVector ContentWeighter::weights_for_target(ItemId target, std::span<const ItemId> candidates) const {
    std::vector<std::size_t> positions;
    positions.reserve(candidates.size());
    for (ItemId c : candidates) positions.push_back(require(c));
    auto r = row(target);
    WeightVector out{target, {}, max_feature_count_};
    for (std::size_t k = 0; k < candidates.size(); ++k) out.weights[candidates[k]] = (*r)[positions[k]];
    return out;
}

std::size_t ContentWeighter::cached_targets() const {
    std::lock_guard lock(mutex_);
    return cache_.size();
}

}  // namespace contentcf::weighting
