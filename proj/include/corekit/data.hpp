#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "corekit/numerics.hpp"

namespace corekit {

/// Immutable training set: dense features, integer class ids in [0, C),
/// and the per-class index partition.
struct Dataset {
    Matrix features;                               // n x d
    std::vector<int> labels;                       // n, in [0, C)
    std::vector<std::vector<std::size_t>> class_index;  // one list per class
    std::string name;

    std::size_t n() const { return features.rows(); }
    std::size_t dim() const { return features.cols(); }
    std::size_t num_classes() const { return class_index.size(); }
};

// Builds the class partition from labels and validates the invariants
// (n >= 1, d >= 1, C >= 2, finite features, labels cover [0, C)).
Dataset make_dataset(Matrix features, std::vector<int> labels, std::string name);

/// One Gaussian cluster: a mean point and an isotropic scale.
struct Cluster {
    Vector mean;
    double scale = 1.0;
};

/// Synthetic class-imbalanced mixture. Each class draws from its own set of
/// clusters, chosen uniformly; class sizes follow class_fractions by
/// largest-remainder rounding.
struct SyntheticSpec {
    std::size_t n = 0;
    std::size_t d = 0;
    std::vector<double> class_fractions;         // sum to 1 within 1e-9, each > 0
    std::vector<std::vector<Cluster>> clusters;  // one list per class
    std::uint64_t seed = 0;

    void validate() const;
};

/// Largest-remainder apportionment of `total` over `fractions`; entries sum
/// exactly to `total`. With min_one, every positive-fraction part gets >= 1.
std::vector<std::size_t> largest_remainder_counts(std::size_t total,
                                                  const std::vector<double>& fractions,
                                                  bool min_one);

Dataset generate_synthetic(const SyntheticSpec& spec);

/// Parses `label idx:val ...` lines with 1-based ascending indices. Labels are
/// remapped to {0,1,...} by sorted original value; features are densified.
/// d = max index seen unless dim_hint is given.
Dataset load_libsvm(const std::string& path, std::optional<std::size_t> dim_hint = {});

/// Writes the dataset back in the same format (non-zero entries only, full
/// float precision). load(save(ds)) reproduces ds exactly.
void save_libsvm(const Dataset& ds, const std::string& path);

/// Divides every feature by `divisor`; divisor must be > 0.
Dataset normalize_01(const Dataset& ds, double divisor);

/// Optional z-scoring (per-feature mean 0, stddev 1); off by default,
/// exposed behind a config flag.
Dataset standardize(const Dataset& ds);

}  // namespace corekit
