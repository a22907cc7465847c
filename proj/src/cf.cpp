#include "contentcf/cf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace contentcf::cf {

std::string to_string(Denominator d) { return d == Denominator::abs ? "abs" : "signed"; }

Denominator denominator_from_string(const std::string& text) {
    if (text == "abs") return Denominator::abs;
    if (text == "signed") return Denominator::signed_;
    throw Error("unknown denominator '" + text + "' (expected abs or signed)");
}

double significance_factor(std::size_t overlap) {
    if (overlap > kSignificanceThreshold) return 1.0;
    return static_cast<double>(overlap) / static_cast<double>(kSignificanceThreshold);
}

bool ranks_before(const SimilarityScore& x, const SimilarityScore& y) {
    if (x.value != y.value) return x.value > y.value;
    return x.user < y.user;
}

SimilarityEngine::SimilarityEngine(const RatingMatrix& matrix)
    : matrix_(&matrix), deviation_(matrix.item_count(), 0.0), rated_(matrix.item_count(), 0) {}

void SimilarityEngine::set_active(UserIndex a) {
    if (has_active_ && a == active_) return;
    if (has_active_) {
        for (const ItemRating& e : matrix_->user_ratings(active_)) rated_[e.item] = 0;
    }
    const double mean = matrix_->user_mean(a);
    for (const ItemRating& e : matrix_->user_ratings(a)) {
        rated_[e.item] = 1;
        deviation_[e.item] = static_cast<double>(e.value) - mean;
    }
    active_ = a;
    has_active_ = true;
}

Correlation SimilarityEngine::correlate(UserIndex u, std::span<const double> item_weights) const {
    const double mean_u = matrix_->user_mean(u);
    const bool weighted = !item_weights.empty();
    double num = 0, sum_a = 0, sum_u = 0;
    std::size_t overlap = 0;
    for (const ItemRating& e : matrix_->user_ratings(u)) {
        if (!rated_[e.item]) continue;
        const double w = weighted ? item_weights[e.item] : 1.0;
        if (std::isnan(w)) [[unlikely]] {
            throw Error("no content weight for co-rated movie " + std::to_string(matrix_->item_id(e.item).value));
        }
        const double da = w * deviation_[e.item];
        const double du = w * (static_cast<double>(e.value) - mean_u);
        num += da * du;
        sum_a += da * da;
        sum_u += du * du;
        ++overlap;
    }
    Correlation c;
    c.overlap = overlap;
    if (overlap == 0 || sum_a == 0 || sum_u == 0) return c;
    c.raw = num / (std::sqrt(sum_a) * std::sqrt(sum_u));
    return c;
}

std::vector<SimilarityScore> SimilarityEngine::rank(ItemIndex target, std::span<const double> item_weights,
                                                    std::size_t limit, const NeighborOptions& options) const {
    std::vector<SimilarityScore> scores;
    const auto raters = matrix_->item_ratings(target);
    scores.reserve(raters.size());
    for (const UserRating& r : raters) {
        if (r.user == active_) continue;
        Correlation c = correlate(r.user, item_weights);
        if (c.overlap == 0) continue;
        SimilarityScore s;
        s.user = matrix_->user_id(r.user);
        s.raw = c.raw;
        s.cf = significance_factor(c.overlap);
        s.value = s.raw * s.cf;
        s.overlap = c.overlap;
        s.target_rating = r.value;
        s.user_mean = matrix_->user_mean(r.user);
        if (options.min_sim && s.value < *options.min_sim) continue;
        scores.push_back(s);
    }
    if (limit < scores.size()) {
        std::partial_sort(scores.begin(), scores.begin() + static_cast<std::ptrdiff_t>(limit), scores.end(),
                          ranks_before);
        scores.resize(limit);
    } else {
        std::sort(scores.begin(), scores.end(), ranks_before);
    }
    return scores;
}

namespace {

UserIndex require_user(const RatingMatrix& matrix, UserId id) {
    auto u = matrix.find_user(id);
    if (!u) {
        std::ostringstream msg;
        msg << "unknown " << id;
        throw Error(msg.str());
    }
    return *u;
}

Correlation correlate_pair(UserId a, UserId u, const RatingMatrix& matrix, std::span<const double> weights) {
    const UserIndex ai = require_user(matrix, a);
    const UserIndex ui = require_user(matrix, u);
    SimilarityEngine engine(matrix);
    engine.set_active(ai);
    return engine.correlate(ui, weights);
}

/// Dense per-ItemIndex weights, NaN where the vector has no entry.
std::vector<double> dense_weights(const RatingMatrix& matrix, const weighting::WeightVector& weights) {
    std::vector<double> dense(matrix.item_count(), std::numeric_limits<double>::quiet_NaN());
    for (const auto& [item, w] : weights.weights) {
        if (auto i = matrix.find_item(item)) dense[*i] = w;
    }
    return dense;
}

}  // namespace

Correlation pearson(UserId a, UserId u, const RatingMatrix& matrix) { return correlate_pair(a, u, matrix, {}); }

Correlation weighted_pearson(UserId a, UserId u, ItemId /*target*/, const RatingMatrix& matrix,
                             const weighting::WeightVector& weights) {
    auto dense = dense_weights(matrix, weights);
    return correlate_pair(a, u, matrix, dense);
}

NeighborSet select_neighbors(UserId a, ItemId target, const RatingMatrix& matrix, std::size_t k,
                             const weighting::WeightVector* weights, const NeighborOptions& options) {
    if (k < 1) throw Error("neighbor count must be at least 1");
    NeighborSet out{target, a, {}};
    auto t = matrix.find_item(target);
    if (!t) return out;
    SimilarityEngine engine(matrix);
    engine.set_active(require_user(matrix, a));
    std::vector<double> dense;
    if (weights) dense = dense_weights(matrix, *weights);
    out.neighbors = engine.rank(*t, dense, k, options);
    return out;
}

Prediction predict_from(double active_mean, std::span<const SimilarityScore> neighbors, Denominator denominator) {
    double num = 0, den = 0;
    for (const SimilarityScore& s : neighbors) {
        num += (static_cast<double>(s.target_rating) - s.user_mean) * s.value;
        den += denominator == Denominator::abs ? std::abs(s.value) : s.value;
    }
    Prediction p;
    p.neighbors = neighbors.size();
    if (neighbors.empty() || std::abs(den) < kDenominatorEpsilon) {
        p.fallback = true;
        p.value = std::clamp(active_mean, double(kMinRating), double(kMaxRating));
        return p;
    }
    p.value = std::clamp(active_mean + num / den, double(kMinRating), double(kMaxRating));
    return p;
}

Prediction predict(UserId a, ItemId target, const NeighborSet& neighbors, const RatingMatrix& matrix,
                   Denominator denominator) {
    const double mean = matrix.user_mean(require_user(matrix, a));
    if (neighbors.active != a || neighbors.target != target)
        throw Error("neighbor set was built for a different (user, item) pair");
    return predict_from(mean, neighbors.neighbors, denominator);
}

}  // namespace contentcf::cf
