#include "contentcf/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <sstream>
#include <thread>

#include "contentcf/rating_matrix.hpp"

namespace contentcf::eval {

std::string to_string(SplitPolicy policy) { return policy == SplitPolicy::per_item ? "per-item" : "global"; }

SplitPolicy split_policy_from_string(const std::string& text) {
    if (text == "per-item") return SplitPolicy::per_item;
    if (text == "global") return SplitPolicy::global;
    throw Error("unknown split policy '" + text + "' (expected per-item or global)");
}

std::string to_string(Method method) { return method == Method::pc ? "PC" : "WPC"; }

Method method_from_string(const std::string& text) {
    std::string t;
    for (char c : text) t.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    if (t == "pc") return Method::pc;
    if (t == "wpc") return Method::wpc;
    throw Error("unknown method '" + text + "' (expected pc or wpc)");
}

namespace {

std::uint64_t pair_key(UserId u, ItemId i) { return (std::uint64_t{u.value} << 32) | i.value; }

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::mt19937_64 seeded_rng(std::uint64_t seed, std::uint64_t stream) {
    return std::mt19937_64(splitmix64(splitmix64(seed) ^ stream));
}

/// Unbiased draw in [0, n). Written out so results do not depend on the
/// standard library's distribution implementation.
std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t n) {
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t x;
    do {
        x = rng();
    } while (x >= limit);
    return x % n;
}

template <typename T>
void shuffle(std::vector<T>& v, std::mt19937_64& rng) {
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[bounded(rng, i)]);
}

bool by_user_item(const Rating& a, const Rating& b) {
    return a.user != b.user ? a.user < b.user : a.item < b.item;
}

}  // namespace

FoldAssignment::FoldAssignment(std::uint64_t seed, std::span<const Rating> ratings, std::vector<std::uint8_t> folds)
    : seed_(seed), folds_(std::move(folds)) {
    if (folds_.size() != ratings.size()) throw Error("fold vector does not match the rating count");
    index_.reserve(ratings.size());
    for (std::size_t k = 0; k < ratings.size(); ++k) {
        if (folds_[k] >= kFolds) throw Error("fold index out of range");
        index_.emplace_back(pair_key(ratings[k].user, ratings[k].item), folds_[k]);
    }
    std::sort(index_.begin(), index_.end());
}

int FoldAssignment::fold_of(UserId user, ItemId item) const {
    const std::uint64_t key = pair_key(user, item);
    auto it = std::lower_bound(index_.begin(), index_.end(), std::make_pair(key, std::uint8_t{0}));
    if (it == index_.end() || it->first != key) {
        std::ostringstream msg;
        msg << "no fold for (" << user << ", " << item << ")";
        throw Error(msg.str());
    }
    return it->second;
}

FoldAssignment split_folds(std::span<const Rating> ratings, std::uint64_t seed, SplitPolicy policy) {
    std::vector<std::size_t> order(ratings.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const Rating& x = ratings[a];
        const Rating& y = ratings[b];
        if (policy == SplitPolicy::per_item && x.item != y.item) return x.item < y.item;
        return by_user_item(x, y);
    });

    std::vector<std::uint8_t> folds(ratings.size(), 0);
    if (policy == SplitPolicy::global) {
        auto rng = seeded_rng(seed, 0);
        shuffle(order, rng);
        for (std::size_t p = 0; p < order.size(); ++p) folds[order[p]] = static_cast<std::uint8_t>(p % kFolds);
        return FoldAssignment(seed, ratings, std::move(folds));
    }

    // Per item: shuffle its raters, then deal round-robin from a random start
    // fold so remainders do not pile up in the low folds.
    std::size_t begin = 0;
    while (begin < order.size()) {
        const ItemId item = ratings[order[begin]].item;
        std::size_t end = begin;
        while (end < order.size() && ratings[order[end]].item == item) ++end;
        std::vector<std::size_t> group(order.begin() + static_cast<std::ptrdiff_t>(begin),
                                       order.begin() + static_cast<std::ptrdiff_t>(end));
        auto rng = seeded_rng(seed, std::uint64_t{item.value} + 1);
        shuffle(group, rng);
        const std::uint64_t start = bounded(rng, kFolds);
        for (std::size_t p = 0; p < group.size(); ++p)
            folds[group[p]] = static_cast<std::uint8_t>((start + p) % kFolds);
        begin = end;
    }
    return FoldAssignment(seed, ratings, std::move(folds));
}

double mae(std::span<const std::pair<double, double>> pairs) {
    if (pairs.empty()) throw Error("mean absolute error of no predictions");
    double total = 0;
    for (const auto& [actual, predicted] : pairs) total += std::abs(actual - predicted);
    return total / static_cast<double>(pairs.size());
}

namespace {

struct Outcome {
    bool skipped = false;
    std::vector<double> abs_error;  // per k
    std::vector<std::uint8_t> fallback;
};

std::vector<Rating> sample_fold(std::vector<Rating> test, const ExperimentConfig& config, std::size_t fold) {
    if (config.sample_test && *config.sample_test < test.size()) {
        auto rng = seeded_rng(config.seed, 0xF01D0000ULL + fold);
        for (std::size_t i = 0; i < *config.sample_test; ++i)
            std::swap(test[i], test[i + bounded(rng, test.size() - i)]);
        test.resize(*config.sample_test);
    }
    std::sort(test.begin(), test.end(), by_user_item);
    return test;
}

void evaluate_fold(const RatingMatrix& train, const std::vector<Rating>& test, const ExperimentConfig& config,
                   const weighting::ContentWeighter* weighter, std::size_t max_k, std::vector<Outcome>& outcomes) {
    const std::size_t nk = config.k_values.size();
    outcomes.assign(test.size(), Outcome{});
    cf::NeighborOptions options{config.min_sim};

    constexpr std::size_t kBlock = 256;
    std::atomic<std::size_t> next_block{0};
    auto worker = [&] {
        cf::SimilarityEngine engine(train);
        for (std::size_t b = next_block++; b * kBlock < test.size(); b = next_block++) {
            const std::size_t lo = b * kBlock, hi = std::min(test.size(), lo + kBlock);
            for (std::size_t n = lo; n < hi; ++n) {
                const Rating& r = test[n];
                Outcome& out = outcomes[n];
                auto a = train.find_user(r.user);
                if (!a) {
                    out.skipped = true;
                    continue;
                }
                engine.set_active(*a);
                std::vector<cf::SimilarityScore> ranked;
                if (auto t = train.find_item(r.item)) {
                    std::shared_ptr<const weighting::ContentWeighter::Row> row;
                    std::span<const double> weights;
                    if (weighter) {
                        row = weighter->row(r.item);
                        weights = *row;
                    }
                    ranked = engine.rank(*t, weights, max_k, options);
                }
                const double mean = train.user_mean(*a);
                out.abs_error.resize(nk);
                out.fallback.resize(nk);
                for (std::size_t k = 0; k < nk; ++k) {
                    const std::size_t take = std::min(config.k_values[k], ranked.size());
                    auto p = cf::predict_from(mean, std::span(ranked).first(take), config.denominator);
                    out.abs_error[k] = std::abs(static_cast<double>(r.value) - p.value);
                    out.fallback[k] = p.fallback;
                }
            }
        }
    };

    const std::size_t threads = std::max<std::size_t>(1, config.workers);
    std::vector<std::jthread> pool;
    for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
    pool.clear();
}

std::string format_mae(double v) {
    if (std::isnan(v)) return "nan";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", v);
    return buf;
}

}  // namespace

std::vector<ExperimentReport> run_experiment(const ExperimentConfig& config, std::span<const Rating> ratings,
                                             const ingest::ProfileStore* profiles, const ProgressFn& progress) {
    return run_experiment(config, ratings, split_folds(ratings, config.seed, config.split), profiles, progress);
}

std::vector<ExperimentReport> run_experiment(const ExperimentConfig& config, std::span<const Rating> ratings,
                                             const FoldAssignment& folds, const ingest::ProfileStore* profiles,
                                             const ProgressFn& progress) {
    if (ratings.empty()) throw Error("no ratings to evaluate");
    if (config.methods.empty()) throw Error("no methods to evaluate");
    if (config.k_values.empty()) throw Error("no neighbor counts to evaluate");
    for (std::size_t k : config.k_values) {
        if (k < 1) throw Error("neighbor counts must be at least 1");
    }
    const bool wants_wpc = std::find(config.methods.begin(), config.methods.end(), Method::wpc) != config.methods.end();
    if (wants_wpc && !profiles) throw Error("WPC requires movie profiles");
    if (folds.size() != ratings.size()) throw Error("fold assignment does not match the ratings");

    const std::size_t max_k = *std::max_element(config.k_values.begin(), config.k_values.end());
    const std::size_t nk = config.k_values.size();

    struct Accum {
        std::array<double, kFolds> error{};
        std::array<std::size_t, kFolds> count{};
        std::size_t fallbacks = 0;
        std::size_t skipped = 0;
    };
    std::vector<std::vector<Accum>> acc(config.methods.size(), std::vector<Accum>(nk));

    for (std::size_t f = 0; f < kFolds; ++f) {
        std::vector<Rating> train_ratings, test;
        for (std::size_t n = 0; n < ratings.size(); ++n) {
            (folds.folds()[n] == f ? test : train_ratings).push_back(ratings[n]);
        }
        if (train_ratings.empty()) throw Error("fold " + std::to_string(f) + " leaves no training ratings");
        test = sample_fold(std::move(test), config, f);
        const RatingMatrix train = RatingMatrix::build(train_ratings);

        for (std::size_t m = 0; m < config.methods.size(); ++m) {
            std::optional<weighting::ContentWeighter> weighter;
            if (config.methods[m] == Method::wpc) {
                weighter.emplace(*profiles, weighting::WeightOptions{config.zero_overlap, config.weight_cache_capacity},
                                 train.item_ids());
            }
            std::vector<Outcome> outcomes;
            evaluate_fold(train, test, config, weighter ? &*weighter : nullptr, max_k, outcomes);

            // Reduce in (user, item) order so sums do not depend on scheduling.
            for (const Outcome& o : outcomes) {
                for (std::size_t k = 0; k < nk; ++k) {
                    Accum& a = acc[m][k];
                    if (o.skipped) {
                        ++a.skipped;
                        continue;
                    }
                    a.error[f] += o.abs_error[k];
                    ++a.count[f];
                    a.fallbacks += o.fallback[k];
                }
            }
            if (progress) {
                std::ostringstream line;
                line << to_string(config.methods[m]) << " fold " << f << ": " << test.size() << " test ratings, train "
                     << train.rating_count();
                for (std::size_t k = 0; k < nk; ++k) {
                    const Accum& a = acc[m][k];
                    line << ", k=" << config.k_values[k] << " mae "
                         << format_mae(a.count[f] ? a.error[f] / double(a.count[f]) : std::nan(""));
                }
                progress(line.str());
            }
        }
    }

    std::vector<ExperimentReport> reports;
    for (std::size_t m = 0; m < config.methods.size(); ++m) {
        for (std::size_t k = 0; k < nk; ++k) {
            const Accum& a = acc[m][k];
            ExperimentReport r;
            r.method = config.methods[m];
            r.k = config.k_values[k];
            double total = 0, fold_sum = 0;
            std::size_t count = 0;
            for (std::size_t f = 0; f < kFolds; ++f) {
                r.fold_mae[f] = a.count[f] ? a.error[f] / double(a.count[f]) : std::nan("");
                total += a.error[f];
                count += a.count[f];
                fold_sum += r.fold_mae[f];
            }
            r.mae = count ? total / double(count) : std::nan("");
            r.mean_of_fold_mae = fold_sum / double(kFolds);
            r.predictions = count;
            r.fallbacks = a.fallbacks;
            r.skipped = a.skipped;
            reports.push_back(r);
        }
    }
    return reports;
}

void write_csv(std::span<const ExperimentReport> reports, std::ostream& out) {
    out << "method,k";
    for (std::size_t f = 0; f < kFolds; ++f) out << ",fold" << f;
    out << ",mae,predictions,fallbacks,skipped\n";
    for (const auto& r : reports) {
        out << to_string(r.method) << ',' << r.k;
        for (double v : r.fold_mae) out << ',' << format_mae(v);
        out << ',' << format_mae(r.mae) << ',' << r.predictions << ',' << r.fallbacks << ',' << r.skipped << '\n';
    }
}

void write_table(std::span<const ExperimentReport> reports, std::ostream& out) {
    std::vector<Method> methods;
    std::vector<std::size_t> ks;
    std::map<std::pair<std::size_t, Method>, const ExperimentReport*> cell;
    for (const auto& r : reports) {
        if (std::find(methods.begin(), methods.end(), r.method) == methods.end()) methods.push_back(r.method);
        if (std::find(ks.begin(), ks.end(), r.k) == ks.end()) ks.push_back(r.k);
        cell[{r.k, r.method}] = &r;
    }
    std::sort(ks.begin(), ks.end());

    out << std::left << std::setw(22) << "Number of Neighbours";
    for (Method m : methods) out << std::right << std::setw(10) << to_string(m);
    out << '\n';
    for (std::size_t k : ks) {
        out << std::left << std::setw(22) << k;
        for (Method m : methods) {
            auto it = cell.find({k, m});
            out << std::right << std::setw(10) << (it == cell.end() ? std::string("-") : format_mae(it->second->mae));
        }
        out << '\n';
    }
}

void emit_report(std::span<const ExperimentReport> reports, const std::filesystem::path& csv_path,
                 const std::optional<std::filesystem::path>& table_path) {
    if (reports.empty()) throw Error("no reports to write");
    {
        std::ofstream csv(csv_path, std::ios::binary | std::ios::trunc);
        if (!csv) throw Error("cannot write " + csv_path.string());
        write_csv(reports, csv);
        if (!csv) throw Error("failed writing " + csv_path.string());
    }
    if (table_path) {
        std::ofstream table(*table_path, std::ios::binary | std::ios::trunc);
        if (!table) throw Error("cannot write " + table_path->string());
        write_table(reports, table);
        if (!table) throw Error("failed writing " + table_path->string());
    }
}

}  // namespace contentcf::eval
