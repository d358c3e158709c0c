#include "corekit/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

namespace corekit {

Dataset make_dataset(Matrix features, std::vector<int> labels, std::string name) {
    const std::size_t n = features.rows();
    if (n == 0 || features.cols() == 0) throw InvalidInputError("dataset: n and d must be >= 1");
    if (labels.size() != n) throw DimensionError("dataset: labels size != feature rows");
    require_finite(features.values(), "dataset features");

    int max_label = 0;
    for (int y : labels) {
        if (y < 0) throw InvalidInputError("dataset: negative class id");
        max_label = std::max(max_label, y);
    }
    // Classes may be empty (e.g. a file holding only +1 labels); C >= 2.
    const std::size_t num_classes = std::max<std::size_t>(static_cast<std::size_t>(max_label) + 1, 2);

    Dataset ds{std::move(features), std::move(labels), {}, std::move(name)};
    ds.class_index.resize(num_classes);
    for (std::size_t i = 0; i < n; ++i) ds.class_index[ds.labels[i]].push_back(i);
    return ds;
}

void SyntheticSpec::validate() const {
    if (class_fractions.size() < 2) throw InvalidInputError("synthetic: needs >= 2 classes");
    if (n < class_fractions.size()) throw InvalidInputError("synthetic: n < number of classes");
    if (d == 0) throw InvalidInputError("synthetic: d must be >= 1");
    double sum = 0.0;
    for (double f : class_fractions) {
        if (f <= 0.0) throw InvalidInputError("synthetic: class fraction must be > 0");
        sum += f;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw InvalidInputError("synthetic: fractions must sum to 1");
    if (clusters.size() != class_fractions.size())
        throw InvalidInputError("synthetic: one cluster list per class required");
    for (const auto& cs : clusters) {
        if (cs.empty()) throw InvalidInputError("synthetic: class with no clusters");
        for (const auto& c : cs) {
            if (c.mean.size() != d) throw DimensionError("synthetic: cluster mean dim != d");
            if (!(c.scale > 0.0)) throw InvalidInputError("synthetic: cluster scale must be > 0");
        }
    }
}

std::vector<std::size_t> largest_remainder_counts(std::size_t total,
                                                  const std::vector<double>& fractions,
                                                  bool min_one) {
    const std::size_t k = fractions.size();
    std::vector<std::size_t> counts(k, 0);
    std::vector<double> remainders(k, 0.0);
    std::size_t assigned = 0;
    for (std::size_t i = 0; i < k; ++i) {
        const double raw = fractions[i] * static_cast<double>(total);
        counts[i] = static_cast<std::size_t>(std::floor(raw));
        remainders[i] = raw - std::floor(raw);
        assigned += counts[i];
    }
    // Hand out the remaining units by largest fractional part, lowest index on ties.
    std::vector<std::size_t> order(k);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return remainders[a] > remainders[b]; });
    for (std::size_t r = 0; assigned < total; ++r) {
        counts[order[r % k]] += 1;
        ++assigned;
    }
    if (min_one) {
        for (std::size_t i = 0; i < k; ++i) {
            while (counts[i] == 0) {
                // Take one from the largest bucket.
                std::size_t donor = std::max_element(counts.begin(), counts.end()) - counts.begin();
                if (counts[donor] <= 1) throw InvalidInputError("counts: cannot give each part one");
                --counts[donor];
                ++counts[i];
            }
        }
    }
    return counts;
}

Dataset generate_synthetic(const SyntheticSpec& spec) {
    spec.validate();
    const auto counts = largest_remainder_counts(spec.n, spec.class_fractions, true);

    SeededRng rng(spec.seed);
    Matrix features(spec.n, spec.d);
    std::vector<int> labels(spec.n);
    std::size_t row = 0;
    for (std::size_t c = 0; c < counts.size(); ++c) {
        const auto& class_clusters = spec.clusters[c];
        for (std::size_t k = 0; k < counts[c]; ++k, ++row) {
            const auto& cl = class_clusters[rng.next_below(class_clusters.size())];
            for (std::size_t j = 0; j < spec.d; ++j)
                features(row, j) = cl.mean[j] + cl.scale * rng.next_gaussian();
            labels[row] = static_cast<int>(c);
        }
    }
    return make_dataset(std::move(features), std::move(labels), "synthetic");
}

namespace {

// Sparse row as parsed from one libsvm line.
struct SparseRow {
    double label;
    std::vector<std::pair<std::size_t, double>> entries;  // 1-based indices
};

SparseRow parse_line(const std::string& line, long line_no) {
    SparseRow row;
    std::istringstream ss(line);
    std::string tok;
    if (!(ss >> tok)) throw ParseError("empty line", line_no);
    try {
        std::size_t pos = 0;
        row.label = std::stod(tok, &pos);
        if (pos != tok.size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
        throw ParseError("invalid label '" + tok + "'", line_no);
    }
    std::size_t prev_index = 0;
    while (ss >> tok) {
        const auto colon = tok.find(':');
        if (colon == std::string::npos || colon == 0 || colon + 1 == tok.size())
            throw ParseError("malformed feature token '" + tok + "'", line_no);
        std::size_t index = 0;
        double value = 0.0;
        try {
            std::size_t pos = 0;
            index = std::stoull(tok.substr(0, colon), &pos);
            if (pos != colon) throw std::invalid_argument("trailing");
            value = std::stod(tok.substr(colon + 1), &pos);
            if (pos != tok.size() - colon - 1) throw std::invalid_argument("trailing");
        } catch (const std::exception&) {
            throw ParseError("malformed feature token '" + tok + "'", line_no);
        }
        if (index == 0) throw ParseError("feature indices are 1-based", line_no);
        if (index <= prev_index) throw ParseError("feature indices must be ascending", line_no);
        prev_index = index;
        row.entries.emplace_back(index, value);
    }
    return row;
}

}  // namespace

Dataset load_libsvm(const std::string& path, std::optional<std::size_t> dim_hint) {
    std::ifstream in(path);
    if (!in) throw InvalidInputError("cannot open file: " + path);

    std::vector<SparseRow> rows;
    std::string line;
    long line_no = 0;
    std::size_t max_index = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        rows.push_back(parse_line(line, line_no));
        if (!rows.back().entries.empty())
            max_index = std::max(max_index, rows.back().entries.back().first);
    }
    if (rows.empty()) throw InvalidInputError("empty dataset file: " + path);

    std::size_t d = dim_hint.value_or(max_index);
    if (d == 0) throw InvalidInputError("dataset has no features and no dim hint");
    if (max_index > d) throw InvalidInputError("feature index exceeds dim hint");

    // Remap labels to {0,1,...} by sorted original value. The binary
    // conventions {-1,+1} and {1,2} map canonically even when only one side
    // is present in the file.
    std::map<double, int> label_map;
    for (const auto& r : rows) label_map[r.label] = 0;
    const auto subset_of = [&](std::initializer_list<double> allowed) {
        for (const auto& [orig, id] : label_map)
            if (std::find(allowed.begin(), allowed.end(), orig) == allowed.end()) return false;
        return true;
    };
    if (subset_of({-1.0, 1.0})) {
        label_map[-1.0] = 0;
        label_map[1.0] = 1;
    } else if (subset_of({1.0, 2.0})) {
        label_map[1.0] = 0;
        label_map[2.0] = 1;
    } else {
        int next_id = 0;
        for (auto& [orig, id] : label_map) id = next_id++;
    }

    Matrix features(rows.size(), d);
    std::vector<int> labels(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        labels[i] = label_map.at(rows[i].label);
        for (const auto& [index, value] : rows[i].entries) features(i, index - 1) = value;
    }
    std::string name = path;
    if (const auto slash = name.find_last_of('/'); slash != std::string::npos)
        name = name.substr(slash + 1);
    return make_dataset(std::move(features), std::move(labels), std::move(name));
}

void save_libsvm(const Dataset& ds, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw InvalidInputError("cannot open file for writing: " + path);
    char buf[64];
    for (std::size_t i = 0; i < ds.n(); ++i) {
        out << ds.labels[i];
        const auto row = ds.features.row(i);
        for (std::size_t j = 0; j < row.size(); ++j) {
            if (row[j] == 0.0) continue;
            std::snprintf(buf, sizeof buf, "%.17g", row[j]);
            out << ' ' << (j + 1) << ':' << buf;
        }
        out << '\n';
    }
}

Dataset normalize_01(const Dataset& ds, double divisor) {
    if (!(divisor > 0.0)) throw InvalidInputError("normalize: divisor must be > 0");
    Matrix scaled_features(ds.n(), ds.dim());
    for (std::size_t i = 0; i < ds.n(); ++i)
        for (std::size_t j = 0; j < ds.dim(); ++j)
            scaled_features(i, j) = ds.features(i, j) / divisor;
    return make_dataset(std::move(scaled_features), ds.labels, ds.name);
}

Dataset standardize(const Dataset& ds) {
    const std::size_t n = ds.n(), d = ds.dim();
    Vector mean(d, 0.0), var(d, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) mean[j] += ds.features(i, j);
    for (double& m : mean) m /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) {
            const double c = ds.features(i, j) - mean[j];
            var[j] += c * c;
        }
    Matrix out(n, d);
    for (std::size_t j = 0; j < d; ++j) {
        const double sd = std::sqrt(var[j] / static_cast<double>(n));
        const double inv = sd > 0.0 ? 1.0 / sd : 1.0;  // constant feature: leave centered
        for (std::size_t i = 0; i < n; ++i) out(i, j) = (ds.features(i, j) - mean[j]) * inv;
    }
    return make_dataset(std::move(out), ds.labels, ds.name);
}

}  // namespace corekit
