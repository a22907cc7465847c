#pragma once

// Randomized invariant checks shared by the property suite and the acceptance
// runner. Each check runs `cases` independent instances from a fixed seed and
// reports the first counterexample it finds.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "contentcf/cf.hpp"
#include "contentcf/evaluation.hpp"
#include "contentcf/ingest/profiles.hpp"
#include "contentcf/rating_matrix.hpp"
#include "contentcf/weighting.hpp"
#include "oracle.hpp"

namespace contentcf::reference {

struct CheckResult {
    std::size_t cases = 0;
    std::size_t failures = 0;
    std::string first_failure;

    bool ok() const { return cases > 0 && failures == 0; }
    void fail(const std::string& what) {
        if (failures++ == 0) first_failure = what;
    }
};

inline std::string describe(std::size_t c, const std::string& what, double got, double want) {
    std::ostringstream os;
    os.precision(17);
    os << "case " << c << ": " << what << " got " << got << " want " << want;
    return os.str();
}

/// A small random instance: ratings, their matrix and one profile per item.
struct Instance {
    std::vector<Rating> ratings;
    RatingMatrix matrix;
    ingest::ProfileStore profiles;
};

inline Instance random_instance(std::mt19937_64& rng, std::size_t max_users, std::size_t max_items) {
    std::uniform_int_distribution<std::size_t> nu(2, max_users), ni(2, max_items);
    std::uniform_real_distribution<double> density(0.3, 0.95);
    Instance inst;
    inst.ratings = random_ratings(rng, nu(rng), ni(rng), density(rng));
    inst.matrix = RatingMatrix::build(inst.ratings);
    ingest::ProfileStore::Profiles ps;
    for (auto id : inst.matrix.item_ids()) ps.emplace(id, random_profile(rng, id.value));
    inst.profiles = ingest::ProfileStore(std::move(ps), {});
    return inst;
}

inline weighting::WeightVector constant_weights(const RatingMatrix& m, ItemId target, double c) {
    weighting::WeightVector w;
    w.target = target;
    for (auto id : m.item_ids()) w.weights[id] = c;
    return w;
}

inline weighting::WeightVector content_weights(const Instance& inst, ItemId target) {
    weighting::ContentWeighter weighter(inst.profiles);
    std::vector<ItemId> items(inst.matrix.item_ids().begin(), inst.matrix.item_ids().end());
    return weighter.weights_for_target(target, items);
}

/// WPC with every weight equal to the same constant reproduces PC.
inline CheckResult check_uniform_weights(std::uint64_t seed, std::size_t cases) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> constant(0.01, 10.0);
    CheckResult res;
    for (std::size_t c = 0; c < cases; ++c) {
        auto inst = random_instance(rng, 12, 15);
        const auto& m = inst.matrix;
        std::uniform_int_distribution<UserIndex> pick(0, static_cast<UserIndex>(m.user_count() - 1));
        UserId a = m.user_id(pick(rng)), u = m.user_id(pick(rng));
        ItemId t = m.item_id(0);
        auto w = constant_weights(m, t, constant(rng));
        double pc = cf::pearson(a, u, m).raw;
        double wpc = cf::weighted_pearson(a, u, t, m, w).raw;
        ++res.cases;
        if (std::abs(pc - wpc) > 1e-12) res.fail(describe(c, "uniform-weight WPC", wpc, pc));
    }
    return res;
}

/// f(a,u) = f(u,a) and |raw| <= 1 + 1e-9 for both PC and content-weighted WPC.
inline CheckResult check_symmetry_and_bound(std::uint64_t seed, std::size_t cases) {
    std::mt19937_64 rng(seed);
    CheckResult res;
    for (std::size_t c = 0; c < cases; ++c) {
        auto inst = random_instance(rng, 12, 15);
        const auto& m = inst.matrix;
        std::uniform_int_distribution<UserIndex> pick(0, static_cast<UserIndex>(m.user_count() - 1));
        std::uniform_int_distribution<ItemIndex> pick_item(0, static_cast<ItemIndex>(m.item_count() - 1));
        UserId a = m.user_id(pick(rng)), u = m.user_id(pick(rng));
        ItemId t = m.item_id(pick_item(rng));
        auto w = content_weights(inst, t);
        auto pau = cf::pearson(a, u, m), pua = cf::pearson(u, a, m);
        auto wau = cf::weighted_pearson(a, u, t, m, w), wua = cf::weighted_pearson(u, a, t, m, w);
        ++res.cases;
        if (pau.raw != pua.raw || pau.overlap != pua.overlap) res.fail(describe(c, "PC symmetry", pau.raw, pua.raw));
        if (wau.raw != wua.raw) res.fail(describe(c, "WPC symmetry", wau.raw, wua.raw));
        for (double x : {pau.raw, wau.raw})
            if (!(std::abs(x) <= 1 + 1e-9)) res.fail(describe(c, "|raw| bound", x, 1.0));
    }
    return res;
}

/// Nondecreasing, x/50 below the threshold, exactly 1 from 50 on.
inline CheckResult check_significance_shape(std::uint64_t seed, std::size_t cases) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> overlap(0, 5000);
    CheckResult res;
    for (std::size_t c = 0; c < cases; ++c) {
        std::size_t x = c < 200 ? c : overlap(rng);
        double f = cf::significance_factor(x), g = cf::significance_factor(x + 1);
        ++res.cases;
        if (g < f) res.fail(describe(c, "nondecreasing at " + std::to_string(x), g, f));
        double want = x >= 50 ? 1.0 : static_cast<double>(x) / 50.0;
        if (f != want) res.fail(describe(c, "factor at " + std::to_string(x), f, want));
    }
    return res;
}

/// Weights are positive and symmetric; cosine lies in [0, 1].
inline CheckResult check_weights_and_cosine(std::uint64_t seed, std::size_t cases) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> max_fc(1, 40);
    CheckResult res;
    for (std::size_t c = 0; c < cases; ++c) {
        auto m = random_profile(rng, 1), t = random_profile(rng, 2);
        std::size_t mv = std::max({max_fc(rng), weighting::feature_count(m), weighting::feature_count(t)});
        for (auto branch : {weighting::ZeroOverlapWeight::mv, weighting::ZeroOverlapWeight::literal}) {
            double wmt = weighting::item_weight(m, t, mv, branch), wtm = weighting::item_weight(t, m, mv, branch);
            if (!(wmt > 0)) res.fail(describe(c, "weight positivity", wmt, 0));
            if (wmt != wtm) res.fail(describe(c, "weight symmetry", wmt, wtm));
        }
        auto [vm, vt] = weighting::build_vectors(m, t);
        double cos = weighting::cosine(vm, vt);
        ++res.cases;
        if (!(cos >= 0 && cos <= 1 + 1e-12)) res.fail(describe(c, "cosine range", cos, 0.5));
    }
    return res;
}

/// Scaling every item weight by a positive constant leaves the ranking unchanged.
/// Powers of two keep the arithmetic exact, so even ties must be preserved.
inline CheckResult check_scaling_invariance(std::uint64_t seed, std::size_t cases) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> exponent(-8, 8);
    CheckResult res;
    for (std::size_t c = 0; c < cases; ++c) {
        auto inst = random_instance(rng, 14, 12);
        const auto& m = inst.matrix;
        std::uniform_int_distribution<UserIndex> pick(0, static_cast<UserIndex>(m.user_count() - 1));
        std::uniform_int_distribution<ItemIndex> pick_item(0, static_cast<ItemIndex>(m.item_count() - 1));
        UserId a = m.user_id(pick(rng));
        ItemId t = m.item_id(pick_item(rng));
        auto w = content_weights(inst, t);
        auto scaled = w;
        int e = exponent(rng);
        const double s = std::ldexp(1.0, e == 0 ? 3 : e);
        for (auto& [id, x] : scaled.weights) x *= s;
        auto base = cf::select_neighbors(a, t, m, m.user_count(), &w);
        auto other = cf::select_neighbors(a, t, m, m.user_count(), &scaled);
        ++res.cases;
        bool same = base.neighbors.size() == other.neighbors.size();
        for (std::size_t i = 0; same && i < base.neighbors.size(); ++i)
            same = base.neighbors[i].user == other.neighbors[i].user;
        if (!same) res.fail("case " + std::to_string(c) + ": ranking changed under scale " + std::to_string(s));
    }
    return res;
}

/// Folds partition the ratings, train and test never share a pair, and each
/// item's ratings are spread with fold counts differing by at most one.
inline CheckResult check_fold_partition(std::uint64_t seed, std::size_t cases) {
    std::mt19937_64 rng(seed);
    CheckResult res;
    for (std::size_t c = 0; c < cases; ++c) {
        auto inst = random_instance(rng, 25, 20);
        auto folds = eval::split_folds(inst.ratings, rng());
        ++res.cases;
        if (folds.size() != inst.ratings.size()) {
            res.fail("case " + std::to_string(c) + ": fold count mismatch");
            continue;
        }
        std::map<std::uint32_t, std::array<int, eval::kFolds>> per_item;
        std::array<std::size_t, eval::kFolds> per_fold{};
        for (std::size_t i = 0; i < inst.ratings.size(); ++i) {
            int f = folds.folds()[i];
            if (f < 0 || f >= static_cast<int>(eval::kFolds) ||
                f != folds.fold_of(inst.ratings[i].user, inst.ratings[i].item)) {
                res.fail("case " + std::to_string(c) + ": inconsistent fold");
                break;
            }
            ++per_item[inst.ratings[i].item.value][static_cast<std::size_t>(f)];
            ++per_fold[static_cast<std::size_t>(f)];
        }
        std::size_t total = 0;
        for (auto n : per_fold) total += n;
        if (total != inst.ratings.size()) res.fail("case " + std::to_string(c) + ": not a partition");
        for (auto& [item, counts] : per_item) {
            auto [lo, hi] = std::minmax_element(counts.begin(), counts.end());
            if (*hi - *lo > 1) res.fail("case " + std::to_string(c) + ": item " + std::to_string(item) + " unbalanced");
        }
        // Train/test disjointness for every fold.
        for (int f = 0; f < static_cast<int>(eval::kFolds); ++f) {
            std::set<std::pair<std::uint32_t, std::uint32_t>> train, test;
            for (std::size_t i = 0; i < inst.ratings.size(); ++i) {
                auto key = std::make_pair(inst.ratings[i].user.value, inst.ratings[i].item.value);
                (folds.folds()[i] == f ? test : train).insert(key);
            }
            for (const auto& key : test)
                if (train.contains(key)) res.fail("case " + std::to_string(c) + ": pair in train and test");
        }
    }
    return res;
}

/// predict is within [1, 5]; one neighbor reduces to r_a + (r_ut - r_u);
/// perfect predictions have MAE 0.
inline CheckResult check_prediction_properties(std::uint64_t seed, std::size_t cases) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> mean(1.0, 5.0), sim(-1.0, 1.0), pos_sim(0.01, 1.0);
    std::uniform_int_distribution<int> rating(1, 5), count(0, 60);
    CheckResult res;
    for (std::size_t c = 0; c < cases; ++c) {
        ++res.cases;
        std::vector<cf::SimilarityScore> ns(static_cast<std::size_t>(count(rng)));
        for (auto& s : ns) {
            s.value = sim(rng);
            s.target_rating = rating(rng);
            s.user_mean = mean(rng);
        }
        double ma = mean(rng);
        for (auto d : {cf::Denominator::abs, cf::Denominator::signed_}) {
            double p = cf::predict_from(ma, ns, d).value;
            if (!(p >= 1.0 && p <= 5.0)) res.fail(describe(c, "prediction range", p, 3.0));
        }

        cf::SimilarityScore one;
        one.value = pos_sim(rng);
        one.target_rating = rating(rng);
        one.user_mean = mean(rng);
        std::vector<cf::SimilarityScore> single{one};
        double got = cf::predict_from(ma, single, cf::Denominator::abs).value;
        double want = std::clamp(ma + (one.target_rating - one.user_mean), 1.0, 5.0);
        if (std::abs(got - want) > 1e-12) res.fail(describe(c, "single-neighbor reduction", got, want));

        std::vector<std::pair<double, double>> perfect;
        for (int i = 0, n = 1 + count(rng); i < n; ++i) {
            double v = rating(rng);
            perfect.emplace_back(v, v);
        }
        if (eval::mae(perfect) != 0.0) res.fail(describe(c, "MAE of perfect predictions", eval::mae(perfect), 0));
    }
    return res;
}

/// select_neighbors and predict against the exhaustive oracle, PC and WPC,
/// on matrices with at most 15 users and 12 items. Equality is exact.
inline CheckResult check_oracle_equivalence(std::uint64_t seed, std::size_t cases) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> kdist(1, 16);
    CheckResult res;
    for (std::size_t c = 0; c < cases; ++c) {
        auto inst = random_instance(rng, 15, 12);
        const auto& m = inst.matrix;
        auto dense = to_dense(inst.ratings);
        std::uniform_int_distribution<UserIndex> pick(0, static_cast<UserIndex>(m.user_count() - 1));
        std::uniform_int_distribution<ItemIndex> pick_item(0, static_cast<ItemIndex>(m.item_count() - 1));
        UserId a = m.user_id(pick(rng));
        ItemId t = m.item_id(pick_item(rng));
        std::size_t k = kdist(rng);
        auto w = content_weights(inst, t);
        ++res.cases;
        for (bool weighted : {false, true}) {
            auto got = cf::select_neighbors(a, t, m, k, weighted ? &w : nullptr);
            auto want = oracle_neighbors(dense, a.value, t.value, k, [&](std::uint32_t item) -> std::optional<double> {
                if (!weighted) return std::nullopt;
                return w.at(ItemId{item});
            });
            const std::string label = weighted ? "WPC" : "PC";
            bool same = got.neighbors.size() == want.size();
            for (std::size_t i = 0; same && i < want.size(); ++i)
                same = got.neighbors[i].user.value == want[i].user && got.neighbors[i].value == want[i].value;
            if (!same) {
                res.fail("case " + std::to_string(c) + ": " + label + " neighbor list differs from oracle");
                continue;
            }
            auto p = cf::predict(a, t, got, m);
            auto [want_value, want_fallback] = oracle_predict(dense, a.value, t.value, want);
            if (p.value != want_value || p.fallback != want_fallback)
                res.fail(describe(c, label + " prediction", p.value, want_value));
        }
    }
    return res;
}

}  // namespace contentcf::reference
