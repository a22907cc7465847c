#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "contentcf/cf.hpp"
#include "contentcf/evaluation.hpp"
#include "contentcf/weighting.hpp"

namespace contentcf::cli {

/// Settings for `evaluate` and `predict`.
struct RunConfig {
    std::filesystem::path data_dir = ".";
    std::optional<std::filesystem::path> ratings_path;  // default: data_dir/ratings.dat
    std::optional<std::filesystem::path> movies_path;   // default: data_dir/movies.dat
    std::optional<std::filesystem::path> profiles_path;
    std::vector<eval::Method> methods{eval::Method::pc};
    std::vector<std::size_t> k_values{5, 10, 20, 30, 50};
    std::uint64_t seed = 42;
    weighting::ZeroOverlapWeight k0_branch = weighting::ZeroOverlapWeight::mv;
    cf::Denominator denominator = cf::Denominator::abs;
    std::optional<double> min_sim;
    std::optional<std::size_t> sample_test;
    std::size_t workers = 1;
    eval::SplitPolicy split = eval::SplitPolicy::per_item;

    std::filesystem::path ratings() const { return ratings_path.value_or(data_dir / "ratings.dat"); }
    std::filesystem::path movies() const { return movies_path.value_or(data_dir / "movies.dat"); }

    /// Throws Error when k_values is empty or holds a zero.
    void validate() const;
    eval::ExperimentConfig experiment() const;
};

/// Parses a comma-separated list of positive integers ("5,10,20").
std::vector<std::size_t> parse_k_list(const std::string& text);

/// Entry point shared by the executable and the tests. `args` excludes the
/// program name. Results go to `out`, diagnostics to `err`. Returns the exit status.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace contentcf::cli
