#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "corekit/curvature.hpp"
#include "corekit/data.hpp"
#include "corekit/numerics.hpp"

namespace corekit {

/// Euclidean distances over selection-feature rows. Precomputes the full
/// matrix when the instance is small enough, otherwise computes rows on the
/// fly. The phantom distance upper-bounds every pairwise distance.
class DistanceOracle {
  public:
    explicit DistanceOracle(const SelectionFeatures& feats,
                            std::size_t matrix_threshold = kDefaultMatrixThreshold);

    std::size_t size() const { return n_; }
    double operator()(std::size_t i, std::size_t j) const;
    double phantom() const { return phantom_; }

    // Lowered from the 20k a full Ijcnn1-class matrix would suggest: a 20k^2
    // double matrix is 3.2 GB, past desk-scale memory.
    static constexpr std::size_t kDefaultMatrixThreshold = 4096;

  private:
    const SelectionFeatures& feats_;
    std::size_t n_;
    bool use_matrix_;
    std::vector<double> matrix_;  // n x n when use_matrix_
    double phantom_;
};

double pairwise_dist(const SelectionFeatures& feats, std::size_t i, std::size_t j);

/// L(S) = sum_i min_{j in S} d(i, j), with L(empty) = n * d_phantom;
/// F(S) = C1 - L(S u {e}) with C1 = L({e}) = n * d_phantom.
struct FacilityValue {
    double coverage_sum;  // L
    double objective;     // F
};
FacilityValue facility_objective(const DistanceOracle& dist,
                                 std::span<const std::size_t> selected);

struct Coreset {
    std::vector<std::size_t> indices;  // global dataset ids, ascending
    std::vector<double> weights;       // gamma, parallel to indices
    double residual = 0.0;             // achieved L(S), summed over classes
    std::map<int, std::pair<std::vector<std::size_t>, std::vector<double>>> per_class;

    double total_weight() const;
};

struct EpsilonStop {
    double epsilon;  // >= 0
};
struct BudgetStop {
    std::size_t budget;  // <= n
};
using Stopping = std::variant<EpsilonStop, BudgetStop>;

enum class GreedyMode { naive, lazy, stochastic };

struct GreedyOptions {
    GreedyMode mode = GreedyMode::lazy;
    // stochastic mode: candidate sample size per iteration; 0 means the
    // (n/budget) ln(1/0.1) default, capped at n.
    std::size_t sample_size = 0;
    std::size_t matrix_threshold = DistanceOracle::kDefaultMatrixThreshold;
};

/// Greedy facility-location maximization over one feature set (local index
/// space). Ties always break to the lowest index; naive and lazy modes
/// produce identical selections. Weights count nearest-medoid assignments,
/// with selected points assigned to themselves.
struct GreedyResult {
    std::vector<std::size_t> order;    // selection order, local indices
    std::vector<double> weights;       // parallel to order
    double residual = 0.0;             // L(S) at stop
};
GreedyResult greedy_select(const DistanceOracle& dist, const Stopping& stopping,
                           const GreedyOptions& opts, SeededRng& rng);

/// Builds selection features for a slice of dataset indices.
using FeatureBuilder =
    std::function<SelectionFeatures(std::span<const std::size_t> indices)>;

/// Selection-time diagnostics: ||sum_i v_i - sum_j gamma_j v_j|| over the
/// feature rows of all classes combined. Bounded above by the residual.
struct SelectionReport {
    double feature_error = 0.0;
};

/// Proportional per-class budgets: floor(fraction * size) with the units up
/// to round(fraction * n) handed out by largest remainder, then a minimum of
/// one per non-empty class. Empty classes get budget 0.
std::vector<std::size_t> class_budgets(const std::vector<std::size_t>& sizes, double fraction);

/// Runs greedy_select per class with largest-remainder budgets (minimum 1 per
/// class) and merges the results; sum of weights equals n.
Coreset per_class_select(const Dataset& ds, const FeatureBuilder& build_features,
                         double fraction, const GreedyOptions& opts, SeededRng& rng,
                         SelectionReport* report = nullptr);

/// Uniform selection without replacement per class at the same budgets;
/// every selected element carries weight class_size / budget.
Coreset random_select(const Dataset& ds, double fraction, SeededRng& rng);

/// One-shot selection over raw feature-space distances, for convex models
/// whose preconditioned-gradient differences are bounded by feature
/// distances. Computed once, before training.
Coreset convex_one_shot(const Dataset& ds, double fraction, const GreedyOptions& opts,
                        SeededRng& rng, SelectionReport* report = nullptr);

/// Every example with weight 1.
Coreset full_coreset(const Dataset& ds);

/// ||sum_i v_i - sum_j gamma_j v_j|| over feature rows; bounded by L(S).
double weighted_sum_error(const SelectionFeatures& feats,
                          std::span<const std::size_t> selected_rows,
                          std::span<const double> weights);

/// CSV with header `class,index,weight`, rows ordered by (class, index).
void save_coreset_csv(const Coreset& cs, const std::string& path);
Coreset load_coreset_csv(const std::string& path);

}  // namespace corekit
