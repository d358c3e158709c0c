#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "corekit/coreset.hpp"
#include "corekit/curvature.hpp"
#include "corekit/data.hpp"
#include "corekit/models.hpp"
#include "corekit/optim.hpp"

namespace corekit {

enum class SelectionMethod { adacore, craig_mode, random, full, convex_one_shot };
enum class ModelKind { logistic, ridge, toy_mlp };

const char* to_string(SelectionMethod m);
const char* to_string(ModelKind m);
const char* to_string(OptimizerKind k);

struct ExperimentConfig {
    Dataset train;
    std::optional<Dataset> test;

    ModelKind model_kind = ModelKind::logistic;
    double mu = 1e-2;            // logistic L2
    double lambda = 0.0;         // ridge L2
    double weight_decay = 1e-4;  // mlp
    std::size_t hidden = 100;

    OptimizerKind optimizer = OptimizerKind::sgd;
    Schedule schedule;
    double momentum = 0.9;
    double hessian_power = 1.0;
    double damping = 1e-8;

    SelectionMethod method = SelectionMethod::full;
    double fraction = 1.0;          // S
    std::size_t refresh_period = 1;  // R, epochs
    GreedyOptions greedy;
    PreconditionerConfig precond;

    std::size_t epochs = 1;
    std::size_t batch_size = 32;
    std::uint64_t seed = 0;
    std::string output_dir;  // empty: keep results in memory only

    void validate() const;
};

struct MetricsRecord {
    std::size_t epoch;
    double seconds;        // cumulative wall clock including selection
    double train_loss;     // full-data mean loss
    double loss_residual;  // train_loss minus the run's best train_loss
    double test_acc;       // NaN when no test split
    double grad_diff;      // normalized full-vs-coreset gradient difference
    double distinct_frac;  // cumulative fraction of distinct points selected
};

struct PerExampleStats {
    std::vector<std::size_t> selection_count;
    std::vector<std::size_t> forgetting;
    std::vector<char> last_correct;
    std::vector<char> evaluated;  // first evaluation only initializes flags
    Vector entropy;               // latest per-example prediction entropy

    explicit PerExampleStats(std::size_t n = 0)
        : selection_count(n, 0), forgetting(n, 0), last_correct(n, 0), evaluated(n, 0),
          entropy(n, 0.0) {}
};

/// Coreset snapshot taken at a refresh epoch, with the achieved facility
/// residual and the weighted-sum error of the selection features (the
/// quantity the residual upper-bounds).
struct RefreshRecord {
    std::size_t epoch;
    double residual;
    double feature_error;
    Coreset coreset;
};

struct RunResult {
    std::vector<MetricsRecord> metrics;
    PerExampleStats stats;
    std::vector<RefreshRecord> refreshes;
    Vector final_w;
};

/// ||g_full - sum_j gamma_j g_j / n|| / ||g_full||; exactly 0 for the full
/// coreset with unit weights, and 0 by convention when ||g_full|| = 0.
double normalized_grad_diff(const ModelSpec& model, const Vector& w, const Coreset& coreset);

/// Counts correct -> incorrect transitions; the first call only initializes.
void forgetting_update(PerExampleStats& stats, std::span<const int> predictions,
                       std::span<const int> labels);

/// Shannon entropy (natural log) per probability row; rows must sum to 1
/// within 1e-6.
Vector uncertainty(const Matrix& predictions);

std::unique_ptr<ModelSpec> make_model(const ExperimentConfig& cfg, const Dataset& ds);

/// Full training run: refresh the coreset every R epochs (including epoch 0),
/// train on weighted mini-batches, and record metrics. Deterministic given
/// the seed, up to wall-clock times. Writes the CSV outputs when
/// cfg.output_dir is set.
RunResult run_experiment(const ExperimentConfig& cfg);

/// One selection pass at the model's initial parameters, no training.
Coreset select_once(const ExperimentConfig& cfg);

void write_metrics_csv(const std::vector<MetricsRecord>& metrics, const std::string& path);
void write_selection_counts_csv(const PerExampleStats& stats, const std::string& path);
void write_per_example_csv(const PerExampleStats& stats, const std::string& path);

}  // namespace corekit
