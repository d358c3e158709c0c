#include "corekit/optim.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

namespace corekit {

void Schedule::validate() const {
    if (!(alpha0 > 0.0)) throw InvalidInputError("schedule: alpha0 must be > 0");
    if (kind == Kind::exp_decay && (decay <= 0.0 || decay > 1.0))
        throw InvalidInputError("schedule: exp decay base must be in (0, 1]");
    if (kind == Kind::step_decay && !(factor > 0.0))
        throw InvalidInputError("schedule: step factor must be > 0");
    if (!std::is_sorted(milestones.begin(), milestones.end()))
        throw InvalidInputError("schedule: milestones must be ascending");
}

double schedule_lr(const Schedule& schedule, std::size_t epoch) {
    double lr = schedule.alpha0;
    switch (schedule.kind) {
        case Schedule::Kind::constant: break;
        case Schedule::Kind::exp_decay:
            lr = schedule.alpha0 * std::pow(schedule.decay, static_cast<double>(epoch));
            break;
        case Schedule::Kind::step_decay:
            for (std::size_t m : schedule.milestones)
                if (epoch >= m) lr *= schedule.factor;
            break;
    }
    if (schedule.warmup_epochs > 0 && epoch < schedule.warmup_epochs)
        lr *= static_cast<double>(epoch) / static_cast<double>(schedule.warmup_epochs);
    // Warm-up at epoch 0 would zero the rate; keep it strictly positive.
    if (lr <= 0.0)
        lr = schedule.alpha0 / static_cast<double>(std::max<std::size_t>(schedule.warmup_epochs, 1));
    return lr;
}

OptimizerState OptimizerState::make(OptimizerKind kind, Vector w0, Schedule schedule) {
    schedule.validate();
    OptimizerState s;
    s.kind = kind;
    s.momentum.assign(w0.size(), 0.0);
    s.w = std::move(w0);
    s.schedule = std::move(schedule);
    return s;
}

Vector batch_grad(const ModelSpec& model, const Vector& w,
                  std::span<const WeightedIndex> batch) {
    if (batch.empty()) throw InvalidInputError("optimizer: empty batch");
    Vector acc(model.dim(), 0.0);
    double total = 0.0;
    for (const auto& [index, weight] : batch) {
        axpy(weight, model.grad_i(w, index), acc);
        total += weight;
    }
    return scaled(acc, 1.0 / total);
}

void sgd_momentum_step(OptimizerState& state, std::span<const WeightedIndex> batch,
                       const ModelSpec& model, double lr) {
    const Vector g = batch_grad(model, state.w, batch);
    for (std::size_t j = 0; j < state.w.size(); ++j) {
        state.momentum[j] = state.beta * state.momentum[j] + (1.0 - state.beta) * g[j];
        state.w[j] -= lr * state.momentum[j];
    }
    state.t += 1;
}

void newton_step(OptimizerState& state, std::span<const WeightedIndex> batch,
                 const ModelSpec& model, double lr) {
    if (batch.empty()) throw InvalidInputError("optimizer: empty batch");
    if (!model.has_hess()) throw StateError("newton: model lacks per-example Hessians");
    const std::size_t d = model.dim();
    const Vector g = batch_grad(model, state.w, batch);

    Eigen::MatrixXd he = Eigen::MatrixXd::Zero(d, d);
    double total = 0.0;
    for (const auto& [index, weight] : batch) {
        const Matrix hi = model.hess_i(state.w, index);
        for (std::size_t a = 0; a < d; ++a)
            for (std::size_t b = 0; b < d; ++b) he(a, b) += weight * hi(a, b);
        total += weight;
    }
    he /= total;
    double trace = 0.0;
    for (std::size_t a = 0; a < d; ++a) trace += he(a, a);
    const double damping = 1e-8 * trace / static_cast<double>(d);
    for (std::size_t a = 0; a < d; ++a) he(a, a) += damping;

    Eigen::Map<const Eigen::VectorXd> ge(g.data(), d);
    Eigen::LDLT<Eigen::MatrixXd> ldlt(he);
    if (ldlt.info() != Eigen::Success)
        throw SingularHessianError("newton: damped Hessian factorization failed");
    Eigen::VectorXd step = ldlt.solve(ge);
    // LDLT zero-fills directions it cannot resolve, so singularity shows up
    // in the residual rather than in info().
    if (!step.allFinite() || (he * step - ge).norm() > 1e-8 * (1.0 + ge.norm()))
        throw SingularHessianError("newton: singular damped Hessian");

    for (std::size_t j = 0; j < d; ++j) state.w[j] -= lr * step(j);
    state.t += 1;
}

void diag_newton_step(OptimizerState& state, const EmaState& ema, double lr) {
    if (!ema.grad_ready() || !ema.hess_ready())
        throw StateError("diag_newton: EMA state not populated");
    check_same_dim(state.w, ema.g_bar, "diag_newton");
    check_same_dim(state.w, ema.h_bar, "diag_newton");
    const double k = state.hessian_power;
    for (std::size_t j = 0; j < state.w.size(); ++j)
        state.w[j] -= lr * ema.g_bar[j] / std::pow(ema.h_bar[j] + state.damping, k);
    state.t += 1;
}

}  // namespace corekit
