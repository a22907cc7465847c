#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "contentcf/rating_matrix.hpp"
#include "contentcf/weighting.hpp"

namespace contentcf::cf {

/// Similarities over more co-rated items than this are not damped.
constexpr std::size_t kSignificanceThreshold = 50;

/// Predictions fall back to the active user's mean when |sum of sims| is below this.
constexpr double kDenominatorEpsilon = 1e-9;

struct Correlation {
    double raw = 0;           // in [-1, 1]; 0 when undefined
    std::size_t overlap = 0;  // co-rated items
};

struct SimilarityScore {
    UserId user;
    double raw = 0;
    double cf = 0;     // significance factor
    double value = 0;  // raw * cf
    std::size_t overlap = 0;
    // Carried for prediction: the neighbor's rating of the target and overall mean.
    int target_rating = 0;
    double user_mean = 0;
};

/// Top-k raters of a target item ranked by similarity to the active user.
struct NeighborSet {
    ItemId target;
    UserId active;
    std::vector<SimilarityScore> neighbors;  // descending value, ascending user on ties
};

enum class Denominator {
    abs,     // sum of |sim|
    signed_, // sum of sim, as printed in the original prediction formula
};

std::string to_string(Denominator d);
Denominator denominator_from_string(const std::string& text);

struct NeighborOptions {
    std::optional<double> min_sim;  // drop candidates whose damped similarity is below this
};

struct Prediction {
    double value = 0;
    bool fallback = false;
    std::size_t neighbors = 0;
};

/// 1 above the threshold, otherwise overlap / threshold.
double significance_factor(std::size_t overlap);

/// Pearson correlation over co-rated items with deviations from each user's
/// overall mean. Throws Error when either user is absent from the matrix.
Correlation pearson(UserId a, UserId u, const RatingMatrix& matrix);

/// Pearson over weight-scaled deviations w_i (r_i - mean). Throws Error when a
/// co-rated item has no weight.
Correlation weighted_pearson(UserId a, UserId u, ItemId target, const RatingMatrix& matrix,
                             const weighting::WeightVector& weights);

/// Candidates are the other raters of `target`. Plain Pearson when `weights`
/// is null, weighted otherwise; both damped by the significance factor.
/// Users with no co-rated item are never candidates.
NeighborSet select_neighbors(UserId a, ItemId target, const RatingMatrix& matrix, std::size_t k,
                             const weighting::WeightVector* weights, const NeighborOptions& options = {});

/// Mean-centred weighted average over the neighbor set, clamped to [1, 5].
/// Throws Error when the active user has no ratings in the matrix.
Prediction predict(UserId a, ItemId target, const NeighborSet& neighbors, const RatingMatrix& matrix,
                   Denominator denominator = Denominator::abs);

/// Same rule as predict() on a precomputed neighbor list.
Prediction predict_from(double active_mean, std::span<const SimilarityScore> neighbors, Denominator denominator);

/// Reusable per-thread scratch for scoring many candidates against one
/// active user. Item weights, when given, are indexed by ItemIndex of the
/// same matrix; an empty span means unit weights.
class SimilarityEngine {
public:
    explicit SimilarityEngine(const RatingMatrix& matrix);

    void set_active(UserIndex a);
    UserIndex active() const { return active_; }

    Correlation correlate(UserIndex u, std::span<const double> item_weights) const;

    /// All scorable candidates for `target`, sorted, truncated to `limit`.
    std::vector<SimilarityScore> rank(ItemIndex target, std::span<const double> item_weights, std::size_t limit,
                                      const NeighborOptions& options = {}) const;

private:
    const RatingMatrix* matrix_;
    UserIndex active_ = 0;
    bool has_active_ = false;
    std::vector<double> deviation_;
    std::vector<std::uint8_t> rated_;
};

/// Ordering used for neighbor lists: value descending, then user ascending.
bool ranks_before(const SimilarityScore& x, const SimilarityScore& y);

}  // namespace contentcf::cf
