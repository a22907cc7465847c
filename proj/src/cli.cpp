#include "contentcf/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <thread>

#include <CLI11.hpp>

#include "contentcf/cf.hpp"
#include "contentcf/ingest/movielens.hpp"
#include "contentcf/ingest/profiles.hpp"
#include "contentcf/ingest/sparql.hpp"
#include "contentcf/log.hpp"
#include "contentcf/rating_matrix.hpp"

namespace contentcf::cli {

void RunConfig::validate() const {
    if (k_values.empty()) throw Error("at least one neighbor count is required");
    for (std::size_t k : k_values) {
        if (k < 1) throw Error("neighbor counts must be at least 1");
    }
    if (methods.empty()) throw Error("at least one method is required");
}

eval::ExperimentConfig RunConfig::experiment() const {
    eval::ExperimentConfig c;
    c.methods = methods;
    c.k_values = k_values;
    c.seed = seed;
    c.split = split;
    c.zero_overlap = k0_branch;
    c.denominator = denominator;
    c.min_sim = min_sim;
    c.sample_test = sample_test;
    c.workers = workers;
    return c;
}

std::vector<std::size_t> parse_k_list(const std::string& text) {
    std::vector<std::size_t> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        auto comma = text.find(',', start);
        std::string token = text.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
        token.erase(0, token.find_first_not_of(" \t"));
        token.erase(token.find_last_not_of(" \t") + 1);
        if (token.empty() || token.find_first_not_of("0123456789") != std::string::npos)
            throw Error("invalid neighbor count '" + token + "'");
        std::size_t k = std::stoul(token);
        if (k < 1) throw Error("neighbor counts must be at least 1");
        out.push_back(k);
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    if (out.empty()) throw Error("at least one neighbor count is required");
    return out;
}

namespace {

class UsageError : public Error {
public:
    using Error::Error;
};

/// Raw option text, converted after parsing so errors name the flag.
struct EvalFlags {
    std::string method = "pc";
    std::string k = "5,10,20,30,50";
    std::string k0 = "mv";
    std::string denominator = "abs";
    std::string split = "per-item";
    std::string data_dir = ".";
    std::string config;
    std::string ratings, movies, profiles;
    std::optional<double> min_sim;
    std::optional<std::size_t> sample_test;
    std::uint64_t seed = 42;
    std::size_t workers = std::max(1u, std::thread::hardware_concurrency());
};

/// Expands `--config FILE` into `--key value` pairs placed ahead of the
/// command-line flags, skipping keys that are also given as flags.
std::vector<std::string> expand_config(const std::vector<std::string>& args) {
    std::string path;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
        else if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
    }
    if (path.empty()) return args;
    std::ifstream in(path);
    if (!in) throw UsageError("cannot read config file " + path);

    auto given = [&](const std::string& key) {
        const std::string flag = "--" + key;
        return std::any_of(args.begin(), args.end(),
                           [&](const std::string& a) { return a == flag || a.rfind(flag + "=", 0) == 0; });
    };
    auto trim = [](std::string t) {
        t.erase(0, t.find_first_not_of(" \t\r"));
        t.erase(t.find_last_not_of(" \t\r") + 1);
        return t;
    };
    std::vector<std::string> injected;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        line = trim(line);
        if (line.empty() || line[0] == '#') continue;
        auto eq = line.find('=');
        if (eq == std::string::npos) throw UsageError(path + ":" + std::to_string(lineno) + ": expected key=value");
        std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
        if (key.rfind("--", 0) == 0) key.erase(0, 2);
        if (key.empty() || key == "config") throw UsageError(path + ":" + std::to_string(lineno) + ": invalid key");
        if (!given(key)) {
            injected.push_back("--" + key);
            injected.push_back(value);
        }
    }
    // Settings go right after the subcommand name so they share its scope.
    std::vector<std::string> out = args;
    auto sub = std::find_if(out.begin(), out.end(), [](const std::string& a) { return !a.empty() && a[0] != '-'; });
    out.insert(sub == out.end() ? sub : sub + 1, injected.begin(), injected.end());
    return out;
}

void add_shared_flags(CLI::App* cmd, EvalFlags& f) {
    cmd->add_option("--config", f.config, "Read key=value settings from a file; flags override it");
    cmd->add_option("--data-dir", f.data_dir, "Directory holding ratings.dat and movies.dat")->capture_default_str();
    cmd->add_option("--ratings", f.ratings, "ratings.dat path (overrides --data-dir)");
    cmd->add_option("--movies", f.movies, "movies.dat path (overrides --data-dir)");
    cmd->add_option("--profiles", f.profiles, "Profile file from build-profiles (required for wpc)");
    cmd->add_option("--k0-branch", f.k0, "Zero-overlap item weight: mv or literal")
        ->check(CLI::IsMember({"mv", "literal"}))
        ->capture_default_str();
    cmd->add_option("--denominator", f.denominator, "Prediction denominator: abs or signed")
        ->check(CLI::IsMember({"abs", "signed"}))
        ->capture_default_str();
    cmd->add_option("--min-sim", f.min_sim, "Drop neighbors whose similarity is below this value");
}

RunConfig to_run_config(const EvalFlags& f) try {
    RunConfig c;
    c.data_dir = f.data_dir;
    if (!f.ratings.empty()) c.ratings_path = f.ratings;
    if (!f.movies.empty()) c.movies_path = f.movies;
    if (!f.profiles.empty()) c.profiles_path = f.profiles;
    c.methods.clear();
    std::size_t start = 0;
    while (start <= f.method.size()) {
        auto comma = f.method.find(',', start);
        auto m = eval::method_from_string(f.method.substr(start, comma == std::string::npos ? std::string::npos : comma - start));
        if (std::find(c.methods.begin(), c.methods.end(), m) == c.methods.end()) c.methods.push_back(m);
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    c.k_values = parse_k_list(f.k);
    c.seed = f.seed;
    c.k0_branch = weighting::zero_overlap_weight_from_string(f.k0);
    c.denominator = cf::denominator_from_string(f.denominator);
    c.min_sim = f.min_sim;
    c.sample_test = f.sample_test;
    c.workers = std::max<std::size_t>(1, f.workers);
    c.split = eval::split_policy_from_string(f.split);
    c.validate();
    return c;
} catch (const Error& e) {
    throw UsageError(e.what());
}

void require_file(const std::filesystem::path& p) {
    if (!std::filesystem::is_regular_file(p)) throw Error("missing file: " + p.string());
}

int cmd_evaluate(const EvalFlags& flags, const std::string& out_csv, const std::string& out_table, std::ostream& out) {
    RunConfig config = to_run_config(flags);
    const bool wpc = std::find(config.methods.begin(), config.methods.end(), eval::Method::wpc) != config.methods.end();
    if (wpc && !config.profiles_path) throw UsageError("--method wpc requires --profiles");

    require_file(config.ratings());
    if (config.profiles_path) require_file(*config.profiles_path);

    log::info("reading " + config.ratings().string());
    auto ratings = ingest::parse_ratings(config.ratings());
    std::optional<ingest::ProfileStore> profiles;
    if (wpc) profiles = ingest::read_profiles(*config.profiles_path);

    auto reports = eval::run_experiment(config.experiment(), ratings, profiles ? &*profiles : nullptr,
                                        [](const std::string& line) { log::info(line); });
    std::optional<std::filesystem::path> table;
    if (!out_table.empty()) table = out_table;
    eval::emit_report(reports, out_csv, table);
    eval::write_table(reports, out);
    log::info("wrote " + out_csv);
    return 0;
}

int cmd_predict(const EvalFlags& flags, std::uint32_t user, std::uint32_t item, std::ostream& out, std::ostream& err) {
    RunConfig config = to_run_config(flags);
    if (config.methods.size() != 1) throw UsageError("predict takes a single --method");
    if (config.k_values.size() != 1) throw UsageError("predict takes a single --k");
    const bool wpc = config.methods.front() == eval::Method::wpc;
    if (wpc && !config.profiles_path) throw UsageError("--method wpc requires --profiles");

    require_file(config.ratings());
    auto ratings = ingest::parse_ratings(config.ratings());
    const RatingMatrix matrix = RatingMatrix::build(ratings);

    const UserId u{user};
    const ItemId t{item};
    if (!matrix.find_user(u)) throw Error("unknown user " + std::to_string(user));

    std::optional<ingest::ProfileStore> profiles;
    if (wpc) profiles = ingest::read_profiles(*config.profiles_path);
    bool known_item = matrix.find_item(t).has_value() || (profiles && profiles->contains(t));
    if (!known_item && std::filesystem::is_regular_file(config.movies())) {
        known_item = ingest::parse_movies(config.movies()).contains(t);
    }
    if (!known_item) throw Error("unknown item " + std::to_string(item));

    std::optional<weighting::WeightVector> weights;
    if (wpc && matrix.find_item(t)) {
        weighting::ContentWeighter weighter(*profiles, {config.k0_branch, 1}, matrix.item_ids());
        std::vector<ItemId> items(matrix.item_ids().begin(), matrix.item_ids().end());
        weights = weighter.weights_for_target(t, items);
    }
    auto neighbors = cf::select_neighbors(u, t, matrix, config.k_values.front(), weights ? &*weights : nullptr,
                                          cf::NeighborOptions{config.min_sim});
    auto p = cf::predict(u, t, neighbors, matrix, config.denominator);

    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", p.value);
    out << buf << '\n';
    err << "neighbors=" << p.neighbors << " fallback=" << (p.fallback ? "yes" : "no") << '\n';
    return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Content-weighted user-based collaborative filtering"};
    app.require_subcommand(1);
    app.fallthrough();
    bool quiet = false, verbose = false;
    app.add_flag("-q,--quiet", quiet, "Only log warnings and errors");
    app.add_flag("-v,--verbose", verbose, "Log debug messages");

    // evaluate
    EvalFlags eval_flags;
    std::string out_csv = "evaluation.csv", out_table;
    auto* evaluate = app.add_subcommand("evaluate", "Cross-validate PC and/or WPC over neighbor counts");
    add_shared_flags(evaluate, eval_flags);
    evaluate->add_option("--method", eval_flags.method, "pc, wpc, or pc,wpc")->capture_default_str();
    evaluate->add_option("--k", eval_flags.k, "Comma-separated neighbor counts")->capture_default_str();
    evaluate->add_option("--seed", eval_flags.seed, "Fold split seed")->capture_default_str();
    evaluate->add_option("--split", eval_flags.split, "Fold policy: per-item or global")
        ->check(CLI::IsMember({"per-item", "global"}))
        ->capture_default_str();
    evaluate->add_option("--sample-test", eval_flags.sample_test, "Evaluate a seeded sample of N ratings per fold");
    evaluate->add_option("--workers", eval_flags.workers, "Worker threads")->capture_default_str();
    evaluate->add_option("--out", out_csv, "CSV report path")->capture_default_str();
    evaluate->add_option("--table", out_table, "Also write the text grid to this path");

    // predict
    EvalFlags predict_flags;
    predict_flags.k = "50";
    std::uint32_t user = 0, item = 0;
    auto* predict = app.add_subcommand("predict", "Predict one rating from the full ratings file");
    add_shared_flags(predict, predict_flags);
    predict->add_option("--user", user, "User id")->required();
    predict->add_option("--item", item, "Movie id")->required();
    predict->add_option("--method", predict_flags.method, "pc or wpc")->capture_default_str();
    predict->add_option("--k", predict_flags.k, "Neighbor count")->capture_default_str();

    // fetch-metadata
    std::string fetch_movies, fetch_out, endpoint = ingest::default_endpoint();
    std::optional<std::size_t> limit;
    ingest::FetchOptions fetch_options;
    int delay_ms = static_cast<int>(fetch_options.politeness_delay.count());
    int timeout_s = 30;
    auto* fetch = app.add_subcommand("fetch-metadata", "Query the SPARQL endpoint for directors and starring actors");
    fetch->add_option("--movies", fetch_movies, "movies.dat path")->required();
    fetch->add_option("--endpoint", endpoint, "SPARQL endpoint URL (env CONTENTCF_SPARQL_ENDPOINT)")->capture_default_str();
    fetch->add_option("--out", fetch_out, "Output record file")->required();
    fetch->add_option("--limit", limit, "Only fetch the first N movies");
    fetch->add_option("--concurrency", fetch_options.concurrency, "Concurrent requests")->capture_default_str();
    fetch->add_option("--retries", fetch_options.max_retries, "Retries per request")->capture_default_str();
    fetch->add_option("--delay-ms", delay_ms, "Pause before each request")->capture_default_str();
    fetch->add_option("--timeout", timeout_s, "Per-request timeout in seconds")->capture_default_str();

    // build-profiles
    std::string build_movies, build_fetched, build_overrides, build_out;
    std::size_t override_cap = ingest::kDefaultOverrideActorCap, linked_cap = ingest::kUnlimitedActors;
    auto* build = app.add_subcommand("build-profiles", "Merge dataset genres, fetched people and overrides");
    build->add_option("--movies", build_movies, "movies.dat path")->required();
    build->add_option("--fetched", build_fetched, "Output of fetch-metadata");
    build->add_option("--overrides", build_overrides, "Hand-curated override records");
    build->add_option("--out", build_out, "Profile file to write")->required();
    build->add_option("--override-actor-cap", override_cap, "Actors kept per override record (0 = all)")
        ->capture_default_str();
    build->add_option("--linked-actor-cap", linked_cap, "Actors kept per fetched movie (0 = all)")->capture_default_str();

    std::vector<std::string> expanded;
    try {
        expanded = expand_config(args);
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << '\n';
        return 2;
    }
    std::vector<std::string> reversed(expanded.rbegin(), expanded.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err);
    }

    if (quiet) log::set_level(log::Level::warning);
    if (verbose) log::set_level(log::Level::debug);

    try {
        if (*evaluate) return cmd_evaluate(eval_flags, out_csv, out_table, out);
        if (*predict) return cmd_predict(predict_flags, user, item, out, err);
        if (*fetch) {
            require_file(fetch_movies);
            auto movies = ingest::parse_movies(fetch_movies);
            fetch_options.limit = limit;
            fetch_options.politeness_delay = std::chrono::milliseconds(std::max(0, delay_ms));
            ingest::HttplibTransport transport(timeout_s);
            auto records = ingest::fetch_all(movies, endpoint, transport, fetch_options);
            ingest::write_fetched(records, movies, std::filesystem::path(fetch_out));
            std::size_t ok = std::count_if(records.begin(), records.end(), [](const auto& r) {
                return r.status == ingest::MetadataStatus::fetched_ok;
            });
            log::info("fetched " + std::to_string(ok) + " of " + std::to_string(records.size()) + " movies");
            return 0;
        }
        if (*build) {
            require_file(build_movies);
            auto movies = ingest::parse_movies(build_movies);
            std::vector<ingest::FetchedRecord> fetched;
            if (!build_fetched.empty()) fetched = ingest::read_fetched(std::filesystem::path(build_fetched));
            std::vector<MovieProfile> overrides;
            if (!build_overrides.empty())
                overrides = ingest::load_overrides(std::filesystem::path(build_overrides), &movies, override_cap);
            auto store = ingest::assemble_profiles(movies, fetched, overrides, {linked_cap});
            ingest::write_profiles(store, std::filesystem::path(build_out));
            log::info("wrote " + std::to_string(store.size()) + " profiles to " + build_out);
            return 0;
        }
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}

}  // namespace contentcf::cli
