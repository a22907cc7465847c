#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "contentcf/cf.hpp"
#include "contentcf/ingest/profiles.hpp"
#include "contentcf/types.hpp"
#include "contentcf/weighting.hpp"

namespace contentcf::eval {

constexpr std::size_t kFolds = 5;

enum class SplitPolicy {
    per_item,  // each movie's ratings spread evenly over the folds
    global,    // one shuffle of all ratings
};

std::string to_string(SplitPolicy policy);
SplitPolicy split_policy_from_string(const std::string& text);

/// Fold index of every rating, aligned with the rating sequence it was built from.
class FoldAssignment {
public:
    FoldAssignment() = default;
    FoldAssignment(std::uint64_t seed, std::span<const Rating> ratings, std::vector<std::uint8_t> folds);

    std::uint64_t seed() const { return seed_; }
    std::span<const std::uint8_t> folds() const { return folds_; }
    std::size_t size() const { return folds_.size(); }

    /// Throws Error for a pair that was not part of the split.
    int fold_of(UserId user, ItemId item) const;

private:
    std::uint64_t seed_ = 0;
    std::vector<std::uint8_t> folds_;
    std::vector<std::pair<std::uint64_t, std::uint8_t>> index_;  // (user << 32 | item) -> fold, sorted
};

/// Deterministic in (ratings as a set, seed, policy); the input order does not matter.
FoldAssignment split_folds(std::span<const Rating> ratings, std::uint64_t seed,
                           SplitPolicy policy = SplitPolicy::per_item);

/// Mean absolute error over (actual, predicted) pairs. Throws Error on empty input.
double mae(std::span<const std::pair<double, double>> pairs);

enum class Method { pc, wpc };

std::string to_string(Method method);
Method method_from_string(const std::string& text);

struct ExperimentConfig {
    std::vector<Method> methods{Method::pc};
    std::vector<std::size_t> k_values{5, 10, 20, 30, 50};
    std::uint64_t seed = 42;
    SplitPolicy split = SplitPolicy::per_item;
    weighting::ZeroOverlapWeight zero_overlap = weighting::ZeroOverlapWeight::mv;
    std::size_t weight_cache_capacity = 1024;
    cf::Denominator denominator = cf::Denominator::abs;
    std::optional<double> min_sim;
    std::optional<std::size_t> sample_test;  // per fold
    std::size_t workers = 1;
};

struct ExperimentReport {
    Method method = Method::pc;
    std::size_t k = 0;
    std::array<double, kFolds> fold_mae{};
    double mae = 0;               // total absolute error / total predictions
    double mean_of_fold_mae = 0;  // unweighted mean of fold_mae
    std::size_t predictions = 0;
    std::size_t fallbacks = 0;
    std::size_t skipped = 0;  // test ratings whose user has no training ratings

    bool operator==(const ExperimentReport&) const = default;
};

/// Called after each (method, fold) with a one-line summary.
using ProgressFn = std::function<void(const std::string&)>;

/// Cross-validates every configured method over the folds. One report per
/// (method, k), methods outer, k ascending in config order. Throws Error
/// when WPC is requested without profiles.
std::vector<ExperimentReport> run_experiment(const ExperimentConfig& config, std::span<const Rating> ratings,
                                             const ingest::ProfileStore* profiles, const ProgressFn& progress = {});

/// Same, with a caller-supplied fold assignment aligned with `ratings`.
std::vector<ExperimentReport> run_experiment(const ExperimentConfig& config, std::span<const Rating> ratings,
                                             const FoldAssignment& folds, const ingest::ProfileStore* profiles,
                                             const ProgressFn& progress = {});

/// CSV header: method,k,fold0..fold4,mae,predictions,fallbacks,skipped. MAE to 4 decimals.
void write_csv(std::span<const ExperimentReport> reports, std::ostream& out);

/// k rows by method columns, 4 decimals.
void write_table(std::span<const ExperimentReport> reports, std::ostream& out);

/// Writes the CSV and, when `table_path` is set, the text grid. Throws Error
/// for empty reports or unwritable paths.
void emit_report(std::span<const ExperimentReport> reports, const std::filesystem::path& csv_path,
                 const std::optional<std::filesystem::path>& table_path = std::nullopt);

}  // namespace contentcf::eval
