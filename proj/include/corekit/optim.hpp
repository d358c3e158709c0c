#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "corekit/curvature.hpp"
#include "corekit/models.hpp"
#include "corekit/numerics.hpp"

namespace corekit {

enum class OptimizerKind { sgd, newton, diag_newton };

/// Learning-rate schedule: a base kind plus an optional linear warm-up that
/// multiplies the base rate by min(1, epoch / warmup_epochs).
struct Schedule {
    enum class Kind { constant, exp_decay, step_decay };
    Kind kind = Kind::constant;
    double alpha0 = 0.1;
    double decay = 1.0;                     // exp_decay: alpha0 * decay^epoch
    std::vector<std::size_t> milestones;    // step_decay epochs
    double factor = 0.1;                    // step_decay multiplier per milestone
    std::size_t warmup_epochs = 0;

    void validate() const;
};

double schedule_lr(const Schedule& schedule, std::size_t epoch);

struct OptimizerState {
    Vector w;
    Vector momentum;  // same dim as w
    std::size_t t = 0;
    OptimizerKind kind = OptimizerKind::sgd;
    double beta = 0.9;          // momentum
    double hessian_power = 1.0;  // diag_newton k
    double damping = 1e-8;       // diag_newton floor / newton damping scale
    Schedule schedule;

    static OptimizerState make(OptimizerKind kind, Vector w0, Schedule schedule);
};

/// One example of a weighted batch.
struct WeightedIndex {
    std::size_t index;
    double weight;
};

/// v <- beta v + (1-beta) g, w <- w - lr v, with g the gamma-weighted mean
/// gradient of the batch.
void sgd_momentum_step(OptimizerState& state, std::span<const WeightedIndex> batch,
                       const ModelSpec& model, double lr);

/// w <- w - lr (H + damping I)^{-1} g with H, g weighted batch averages and
/// damping = 1e-8 tr(H)/d. Throws SingularHessianError if the damped solve
/// fails.
void newton_step(OptimizerState& state, std::span<const WeightedIndex> batch,
                 const ModelSpec& model, double lr);

/// w <- w - lr g_bar / (h_bar + damping)^k elementwise; requires both EMAs
/// populated.
void diag_newton_step(OptimizerState& state, const EmaState& ema, double lr);

/// Weighted batch-mean gradient: sum gamma_i g_i / sum gamma_i.
Vector batch_grad(const ModelSpec& model, const Vector& w,
                  std::span<const WeightedIndex> batch);

}  // namespace corekit
