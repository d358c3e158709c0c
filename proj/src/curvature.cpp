#include "corekit/curvature.hpp"

#include <cmath>

namespace corekit {

EmaState ema_update_grad(EmaState state, const Vector& g_hat) {
    if (state.t_grad > 0) check_same_dim(state.m_grad_, g_hat, "ema_update_grad");
    if (state.m_grad_.empty()) state.m_grad_.assign(g_hat.size(), 0.0);
    state.t_grad += 1;
    for (std::size_t j = 0; j < g_hat.size(); ++j)
        state.m_grad_[j] = state.beta1 * state.m_grad_[j] + (1.0 - state.beta1) * g_hat[j];
    const double correction = 1.0 - std::pow(state.beta1, static_cast<double>(state.t_grad));
    state.g_bar = scaled(state.m_grad_, 1.0 / correction);
    return state;
}

EmaState ema_update_hess(EmaState state, const Vector& diag_h) {
    if (state.t_hess > 0) check_same_dim(state.m_hess_sq_, diag_h, "ema_update_hess");
    if (state.m_hess_sq_.empty()) state.m_hess_sq_.assign(diag_h.size(), 0.0);
    state.t_hess += 1;
    for (std::size_t j = 0; j < diag_h.size(); ++j)
        state.m_hess_sq_[j] =
            state.beta2 * state.m_hess_sq_[j] + (1.0 - state.beta2) * diag_h[j] * diag_h[j];
    const double correction = 1.0 - std::pow(state.beta2, static_cast<double>(state.t_hess));
    state.h_bar.resize(diag_h.size());
    for (std::size_t j = 0; j < diag_h.size(); ++j)
        state.h_bar[j] = std::sqrt(state.m_hess_sq_[j] / correction);
    return state;
}

void PreconditionerConfig::validate() const {
    if (!(delta_floor > 0.0)) throw InvalidInputError("preconditioner: delta_floor must be > 0");
    if (hutchinson_samples == 0)
        throw InvalidInputError("preconditioner: hutchinson_samples must be >= 1");
    if (hessian_power < 0.0 || hessian_power > 1.0)
        throw InvalidInputError("preconditioner: hessian_power must be in [0, 1]");
    if (hessian_batch == 0) throw InvalidInputError("preconditioner: hessian_batch must be >= 1");
    if (ema_beta1 <= 0.0 || ema_beta1 >= 1.0 || ema_beta2 <= 0.0 || ema_beta2 >= 1.0)
        throw InvalidInputError("preconditioner: EMA betas must be in (0, 1)");
}

namespace {

template <typename HvpFn>
Vector hutchinson_impl(std::size_t dim, std::size_t samples, SeededRng& rng, HvpFn&& hvp_fn) {
    if (samples == 0) throw InvalidInputError("hutchinson: samples must be >= 1");
    Vector acc(dim, 0.0);
    for (std::size_t s = 0; s < samples; ++s) {
        const Vector z = rademacher(rng, dim);
        const Vector hz = hvp_fn(z);
        for (std::size_t j = 0; j < dim; ++j) acc[j] += z[j] * hz[j];
    }
    return scaled(acc, 1.0 / static_cast<double>(samples));
}

}  // namespace

Vector hutchinson_diag(const ModelSpec& model, const Vector& w,
                       std::span<const std::size_t> batch, std::size_t samples, SeededRng& rng) {
    if (batch.empty()) throw InvalidInputError("hutchinson: empty batch");
    return hutchinson_impl(model.dim(), samples, rng,
                           [&](const Vector& z) { return model.hvp(w, z, batch); });
}

Vector hutchinson_proxy_diag(const ModelSpec& model, const Vector& w,
                             std::span<const std::size_t> batch, std::size_t samples,
                             SeededRng& rng) {
    if (batch.empty()) throw InvalidInputError("hutchinson: empty batch");
    return hutchinson_impl(model.proxy_dim(), samples, rng,
                           [&](const Vector& z) { return model.proxy_hvp(w, z, batch); });
}

Vector precondition(const Vector& g, const Vector& h_bar, double k, double delta_floor) {
    check_same_dim(g, h_bar, "precondition");
    if (delta_floor < 0.0) throw InvalidInputError("precondition: delta_floor must be >= 0");
    Vector out(g.size());
    for (std::size_t j = 0; j < g.size(); ++j) out[j] = g[j] / std::pow(h_bar[j] + delta_floor, k);
    return out;
}

SelectionFeatures selection_features(const ModelSpec& model, const Vector& w,
                                     const EmaState& ema, const PreconditionerConfig& cfg,
                                     FeatureMode mode, std::span<const std::size_t> indices) {
    SelectionFeatures out;
    out.mode = mode;
    out.indices.assign(indices.begin(), indices.end());

    if (mode == FeatureMode::raw_feature) {
        const auto& ds = model.dataset();
        out.vectors = Matrix(indices.size(), ds.dim());
        for (std::size_t r = 0; r < indices.size(); ++r) {
            const auto src = ds.features.row(indices[r]);
            std::copy(src.begin(), src.end(), out.vectors.row(r).begin());
        }
        return out;
    }

    const std::size_t p = model.proxy_dim();
    out.vectors = Matrix(indices.size(), p);

    const bool per_example = mode == FeatureMode::preconditioned && cfg.per_example_hessian &&
                             model.has_hess_diag();
    if (mode == FeatureMode::preconditioned && !per_example && !ema.hess_ready())
        throw StateError("selection_features: preconditioned mode needs a populated Hessian EMA");
    if (mode == FeatureMode::preconditioned && !per_example && ema.h_bar.size() != p)
        throw DimensionError("selection_features: h_bar dim != proxy dim");

    for (std::size_t r = 0; r < indices.size(); ++r) {
        Vector g = model.proxy_grad_i(w, indices[r]);
        if (mode == FeatureMode::preconditioned) {
            const Vector& h = per_example ? model.hess_diag_i(w, indices[r]) : ema.h_bar;
            g = precondition(g, h, cfg.hessian_power, cfg.delta_floor);
        }
        std::copy(g.begin(), g.end(), out.vectors.row(r).begin());
    }
    return out;
}

}  // namespace corekit
