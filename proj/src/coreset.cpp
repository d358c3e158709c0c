#include "corekit/coreset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <queue>
#include <sstream>

namespace corekit {

DistanceOracle::DistanceOracle(const SelectionFeatures& feats, std::size_t matrix_threshold)
    : feats_(feats), n_(feats.vectors.rows()), use_matrix_(n_ <= matrix_threshold), phantom_(0.0) {
    if (use_matrix_) {
        matrix_.assign(n_ * n_, 0.0);
        for (std::size_t i = 0; i < n_; ++i) {
            for (std::size_t j = i + 1; j < n_; ++j) {
                const double d = dist2(feats_.vectors.row(i), feats_.vectors.row(j));
                matrix_[i * n_ + j] = d;
                matrix_[j * n_ + i] = d;
                phantom_ = std::max(phantom_, d);
            }
        }
    } else {
        // Upper bound max pairwise distance by twice the largest row norm.
        double max_norm = 0.0;
        for (std::size_t i = 0; i < n_; ++i) {
            double s = 0.0;
            for (double v : feats_.vectors.row(i)) s += v * v;
            max_norm = std::max(max_norm, std::sqrt(s));
        }
        phantom_ = 2.0 * max_norm;
    }
}

double DistanceOracle::operator()(std::size_t i, std::size_t j) const {
    if (use_matrix_) return matrix_[i * n_ + j];
    return dist2(feats_.vectors.row(i), feats_.vectors.row(j));
}

double pairwise_dist(const SelectionFeatures& feats, std::size_t i, std::size_t j) {
    return dist2(feats.vectors.row(i), feats.vectors.row(j));
}

FacilityValue facility_objective(const DistanceOracle& dist,
                                 std::span<const std::size_t> selected) {
    const std::size_t n = dist.size();
    const double phantom = dist.phantom();
    // The phantom bounds every pairwise distance, so starting the min at it
    // yields both L(S) (with L(empty) = n * phantom) and L(S u {e}).
    double coverage_sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double best = phantom;
        for (std::size_t j : selected) best = std::min(best, dist(i, j));
        coverage_sum += best;
    }
    const double c1 = static_cast<double>(n) * phantom;  // L({e})
    return {coverage_sum, c1 - coverage_sum};
}

double Coreset::total_weight() const {
    return std::accumulate(weights.begin(), weights.end(), 0.0);
}

namespace {

// Shared greedy machinery over the coverage array. cov[i] is the distance
// from i to the chosen set (phantom while the set is empty); the marginal
// gain of candidate c is sum_i max(0, cov[i] - d(i, c)), summed
// left-to-right so naive and lazy recomputations agree bitwise.
struct GreedyEngine {
    const DistanceOracle& dist;
    std::vector<double> cov;
    std::vector<char> chosen;
    std::vector<std::size_t> order;

    explicit GreedyEngine(const DistanceOracle& d)
        : dist(d), cov(d.size(), d.phantom()), chosen(d.size(), 0) {}

    std::size_t n() const { return cov.size(); }

    double gain(std::size_t c) const {
        double g = 0.0;
        for (std::size_t i = 0; i < cov.size(); ++i) {
            const double delta = cov[i] - dist(i, c);
            if (delta > 0.0) g += delta;
        }
        return g;
    }

    void add(std::size_t c) {
        for (std::size_t i = 0; i < cov.size(); ++i) cov[i] = std::min(cov[i], dist(i, c));
        chosen[c] = 1;
        order.push_back(c);
    }

    double coverage_sum() const {
        double s = 0.0;
        for (double v : cov) s += v;
        return s;
    }
};

std::size_t naive_pick(const GreedyEngine& eng) {
    std::size_t best = SIZE_MAX;
    double best_gain = -1.0;
    for (std::size_t c = 0; c < eng.n(); ++c) {
        if (eng.chosen[c]) continue;
        const double g = eng.gain(c);
        if (g > best_gain) {
            best_gain = g;
            best = c;
        }
    }
    return best;
}

// CELF-style lazy evaluation; stale entries are upper bounds because gains
// only shrink as the set grows.
struct LazyQueue {
    struct Entry {
        double bound;
        std::size_t idx;
        std::size_t iter;     // iteration the bound was computed at
        std::size_t version;  // dedups superseded entries
    };
    struct Less {
        bool operator()(const Entry& a, const Entry& b) const {
            if (a.bound != b.bound) return a.bound < b.bound;
            return a.idx > b.idx;
        }
    };
    std::priority_queue<Entry, std::vector<Entry>, Less> pq;
    std::vector<std::size_t> current_version;

    explicit LazyQueue(const GreedyEngine& eng) : current_version(eng.n(), 0) {
        for (std::size_t c = 0; c < eng.n(); ++c) pq.push({eng.gain(c), c, 0, 0});
    }

    std::size_t pick(const GreedyEngine& eng, std::size_t iter) {
        while (true) {
            Entry top = pq.top();
            pq.pop();
            if (eng.chosen[top.idx] || top.version != current_version[top.idx]) continue;
            if (top.iter == iter) return top.idx;
            const std::size_t v = ++current_version[top.idx];
            pq.push({eng.gain(top.idx), top.idx, iter, v});
        }
    }
};

std::size_t stochastic_pick(const GreedyEngine& eng, std::size_t sample_size, SeededRng& rng) {
    std::vector<std::size_t> candidates;
    candidates.reserve(eng.n());
    for (std::size_t c = 0; c < eng.n(); ++c)
        if (!eng.chosen[c]) candidates.push_back(c);
    const std::size_t s = std::min(sample_size, candidates.size());
    // Partial Fisher-Yates, then ascending scan for deterministic ties.
    for (std::size_t k = 0; k < s; ++k) {
        const std::size_t j = k + static_cast<std::size_t>(rng.next_below(candidates.size() - k));
        std::swap(candidates[k], candidates[j]);
    }
    candidates.resize(s);
    std::sort(candidates.begin(), candidates.end());
    std::size_t best = SIZE_MAX;
    double best_gain = -1.0;
    for (std::size_t c : candidates) {
        const double g = eng.gain(c);
        if (g > best_gain) {
            best_gain = g;
            best = c;
        }
    }
    return best;
}

// Nearest-medoid counts; each selected point counts itself, other points go
// to the nearest selected index (lowest index on distance ties).
std::vector<double> assign_weights(const GreedyEngine& eng) {
    std::vector<std::size_t> sorted = eng.order;
    std::sort(sorted.begin(), sorted.end());
    std::vector<double> count_by_local(eng.n(), 0.0);
    for (std::size_t i = 0; i < eng.n(); ++i) {
        if (eng.chosen[i]) {
            count_by_local[i] += 1.0;
            continue;
        }
        std::size_t best = sorted.front();
        double best_d = eng.dist(i, best);
        for (std::size_t k = 1; k < sorted.size(); ++k) {
            const double d = eng.dist(i, sorted[k]);
            if (d < best_d) {
                best_d = d;
                best = sorted[k];
            }
        }
        count_by_local[best] += 1.0;
    }
    std::vector<double> weights(eng.order.size());
    for (std::size_t k = 0; k < eng.order.size(); ++k) weights[k] = count_by_local[eng.order[k]];
    return weights;
}

}  // namespace

GreedyResult greedy_select(const DistanceOracle& dist, const Stopping& stopping,
                           const GreedyOptions& opts, SeededRng& rng) {
    const std::size_t n = dist.size();
    GreedyResult result;
    if (n == 0) return result;

    std::size_t budget = n;
    double epsilon = -1.0;
    if (const auto* b = std::get_if<BudgetStop>(&stopping)) {
        if (b->budget > n) throw InvalidInputError("greedy: budget exceeds instance size");
        budget = b->budget;
        if (budget == 0) {
            result.residual = static_cast<double>(n) * dist.phantom();
            return result;
        }
    } else {
        epsilon = std::get<EpsilonStop>(stopping).epsilon;
        if (epsilon < 0.0) throw InvalidInputError("greedy: epsilon must be >= 0");
    }

    GreedyEngine eng(dist);
    std::optional<LazyQueue> lazy;
    if (opts.mode == GreedyMode::lazy) lazy.emplace(eng);

    std::size_t stochastic_sample = opts.sample_size;
    if (opts.mode == GreedyMode::stochastic && stochastic_sample == 0) {
        const double ratio = static_cast<double>(n) / static_cast<double>(budget);
        stochastic_sample = static_cast<std::size_t>(std::ceil(ratio * std::log(10.0)));
        stochastic_sample = std::clamp<std::size_t>(stochastic_sample, 1, n);
    }

    for (std::size_t iter = 0; eng.order.size() < budget; ++iter) {
        std::size_t picked = SIZE_MAX;
        switch (opts.mode) {
            case GreedyMode::naive: picked = naive_pick(eng); break;
            case GreedyMode::lazy: picked = lazy->pick(eng, iter); break;
            case GreedyMode::stochastic: picked = stochastic_pick(eng, stochastic_sample, rng); break;
        }
        eng.add(picked);
        if (epsilon >= 0.0 && eng.coverage_sum() <= epsilon) break;
    }

    result.order = eng.order;
    result.weights = assign_weights(eng);
    result.residual = eng.coverage_sum();
    return result;
}

std::vector<std::size_t> class_budgets(const std::vector<std::size_t>& sizes, double fraction) {
    if (!(fraction > 0.0) || fraction > 1.0)
        throw InvalidInputError("selection: fraction must be in (0, 1]");
    const std::size_t n = std::accumulate(sizes.begin(), sizes.end(), std::size_t{0});
    const auto target = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
    std::vector<std::size_t> budgets(sizes.size());
    std::vector<double> remainders(sizes.size());
    std::size_t assigned = 0;
    for (std::size_t c = 0; c < sizes.size(); ++c) {
        const double raw = fraction * static_cast<double>(sizes[c]);
        budgets[c] = static_cast<std::size_t>(std::floor(raw));
        remainders[c] = raw - std::floor(raw);
        assigned += budgets[c];
    }
    std::vector<std::size_t> by_remainder(sizes.size());
    std::iota(by_remainder.begin(), by_remainder.end(), 0);
    std::stable_sort(by_remainder.begin(), by_remainder.end(), [&](std::size_t a, std::size_t b) {
        return remainders[a] > remainders[b];
    });
    for (std::size_t r = 0; assigned < target && r < by_remainder.size(); ++r) {
        budgets[by_remainder[r]] += 1;
        ++assigned;
    }
    for (std::size_t c = 0; c < sizes.size(); ++c)
        budgets[c] = sizes[c] == 0 ? 0 : std::clamp<std::size_t>(budgets[c], 1, sizes[c]);
    return budgets;
}

namespace {

Coreset merge_per_class(std::map<int, std::pair<std::vector<std::size_t>, std::vector<double>>>
                            per_class,
                        double residual) {
    Coreset cs;
    cs.per_class = std::move(per_class);
    cs.residual = residual;
    std::vector<std::pair<std::size_t, double>> rows;
    for (const auto& [cls, pair] : cs.per_class)
        for (std::size_t k = 0; k < pair.first.size(); ++k)
            rows.emplace_back(pair.first[k], pair.second[k]);
    std::sort(rows.begin(), rows.end());
    cs.indices.reserve(rows.size());
    cs.weights.reserve(rows.size());
    for (const auto& [idx, w] : rows) {
        cs.indices.push_back(idx);
        cs.weights.push_back(w);
    }
    return cs;
}

}  // namespace

namespace {

Vector weighted_diff(const SelectionFeatures& feats, std::span<const std::size_t> selected_rows,
                     std::span<const double> weights) {
    if (selected_rows.size() != weights.size())
        throw DimensionError("weighted_sum_error: weights mismatch");
    const std::size_t p = feats.vectors.cols();
    Vector diff(p, 0.0);
    for (std::size_t i = 0; i < feats.vectors.rows(); ++i) {
        const auto row = feats.vectors.row(i);
        for (std::size_t j = 0; j < p; ++j) diff[j] += row[j];
    }
    for (std::size_t k = 0; k < selected_rows.size(); ++k) {
        const auto row = feats.vectors.row(selected_rows[k]);
        for (std::size_t j = 0; j < p; ++j) diff[j] -= weights[k] * row[j];
    }
    return diff;
}

}  // namespace

Coreset per_class_select(const Dataset& ds, const FeatureBuilder& build_features,
                         double fraction, const GreedyOptions& opts, SeededRng& rng,
                         SelectionReport* report) {
    std::vector<std::size_t> sizes;
    sizes.reserve(ds.num_classes());
    for (const auto& members : ds.class_index) sizes.push_back(members.size());
    const auto budgets = class_budgets(sizes, fraction);

    std::map<int, std::pair<std::vector<std::size_t>, std::vector<double>>> per_class;
    double residual = 0.0;
    Vector global_diff;
    for (std::size_t c = 0; c < ds.num_classes(); ++c) {
        const auto& members = ds.class_index[c];
        if (members.empty()) continue;
        const SelectionFeatures feats = build_features(members);
        DistanceOracle dist(feats, opts.matrix_threshold);
        const GreedyResult res =
            greedy_select(dist, BudgetStop{budgets[c]}, opts, rng);
        residual += res.residual;
        if (report) {
            const Vector diff = weighted_diff(feats, res.order, res.weights);
            if (global_diff.empty()) global_diff.assign(diff.size(), 0.0);
            axpy(1.0, diff, global_diff);
        }

        std::vector<std::pair<std::size_t, double>> rows(res.order.size());
        for (std::size_t k = 0; k < res.order.size(); ++k)
            rows[k] = {members[res.order[k]], res.weights[k]};
        std::sort(rows.begin(), rows.end());
        auto& slot = per_class[static_cast<int>(c)];
        for (const auto& [idx, w] : rows) {
            slot.first.push_back(idx);
            slot.second.push_back(w);
        }
    }
    if (report) report->feature_error = global_diff.empty() ? 0.0 : norm2(global_diff);
    return merge_per_class(std::move(per_class), residual);
}

Coreset random_select(const Dataset& ds, double fraction, SeededRng& rng) {
    std::vector<std::size_t> sizes;
    sizes.reserve(ds.num_classes());
    for (const auto& members : ds.class_index) sizes.push_back(members.size());
    const auto budgets = class_budgets(sizes, fraction);

    std::map<int, std::pair<std::vector<std::size_t>, std::vector<double>>> per_class;
    for (std::size_t c = 0; c < ds.num_classes(); ++c) {
        auto pool = ds.class_index[c];
        const std::size_t budget = budgets[c];
        if (budget == 0) continue;  // empty class, skipped
        for (std::size_t k = 0; k < budget; ++k) {
            const std::size_t j = k + static_cast<std::size_t>(rng.next_below(pool.size() - k));
            std::swap(pool[k], pool[j]);
        }
        pool.resize(budget);
        std::sort(pool.begin(), pool.end());
        const double weight = static_cast<double>(sizes[c]) / static_cast<double>(budget);
        auto& slot = per_class[static_cast<int>(c)];
        slot.first = std::move(pool);
        slot.second.assign(budget, weight);
    }
    return merge_per_class(std::move(per_class), 0.0);
}

Coreset convex_one_shot(const Dataset& ds, double fraction, const GreedyOptions& opts,
                        SeededRng& rng, SelectionReport* report) {
    return per_class_select(
        ds,
        [&](std::span<const std::size_t> indices) {
            // Raw feature rows; model-independent, so no model is consulted.
            SelectionFeatures feats;
            feats.mode = FeatureMode::raw_feature;
            feats.indices.assign(indices.begin(), indices.end());
            feats.vectors = Matrix(indices.size(), ds.dim());
            for (std::size_t r = 0; r < indices.size(); ++r) {
                const auto src = ds.features.row(indices[r]);
                std::copy(src.begin(), src.end(), feats.vectors.row(r).begin());
            }
            return feats;
        },
        fraction, opts, rng, report);
}

Coreset full_coreset(const Dataset& ds) {
    std::map<int, std::pair<std::vector<std::size_t>, std::vector<double>>> per_class;
    for (std::size_t c = 0; c < ds.num_classes(); ++c) {
        auto& slot = per_class[static_cast<int>(c)];
        slot.first = ds.class_index[c];
        std::sort(slot.first.begin(), slot.first.end());
        slot.second.assign(slot.first.size(), 1.0);
    }
    return merge_per_class(std::move(per_class), 0.0);
}

double weighted_sum_error(const SelectionFeatures& feats,
                          std::span<const std::size_t> selected_rows,
                          std::span<const double> weights) {
    return norm2(weighted_diff(feats, selected_rows, weights));
}

void save_coreset_csv(const Coreset& cs, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw InvalidInputError("cannot open file for writing: " + path);
    out << "class,index,weight\n";
    char buf[64];
    for (const auto& [cls, pair] : cs.per_class) {
        for (std::size_t k = 0; k < pair.first.size(); ++k) {
            std::snprintf(buf, sizeof buf, "%.17g", pair.second[k]);
            out << cls << ',' << pair.first[k] << ',' << buf << '\n';
        }
    }
}

Coreset load_coreset_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidInputError("cannot open file: " + path);
    std::string line;
    if (!std::getline(in, line) || line != "class,index,weight")
        throw ParseError("coreset csv: missing header", 1);
    std::map<int, std::pair<std::vector<std::size_t>, std::vector<double>>> per_class;
    long line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::istringstream ss(line);
        int cls;
        std::size_t idx;
        double w;
        char c1, c2;
        if (!(ss >> cls >> c1 >> idx >> c2 >> w) || c1 != ',' || c2 != ',')
            throw ParseError("coreset csv: malformed row", line_no);
        per_class[cls].first.push_back(idx);
        per_class[cls].second.push_back(w);
    }
    return merge_per_class(std::move(per_class), 0.0);
}

}  // namespace corekit
