#pragma once

#include <cstddef>
#include <span>

#include "corekit/models.hpp"
#include "corekit/numerics.hpp"

namespace corekit {

/// Bias-corrected exponential moving averages of the gradient and of the
/// Hessian-diagonal estimate. The two streams keep separate step counters
/// because they may be fed at different cadences (the gradient every step,
/// the curvature every refresh).
struct EmaState {
    Vector g_bar;  // bias-corrected gradient EMA
    Vector h_bar;  // sqrt of bias-corrected EMA of squared diagonal, entries >= 0
    double beta1 = 0.9;
    double beta2 = 0.999;
    std::size_t t_grad = 0;
    std::size_t t_hess = 0;

    bool grad_ready() const { return t_grad > 0; }
    bool hess_ready() const { return t_hess > 0; }

  private:
    // Raw (uncorrected) accumulators; g_bar/h_bar above hold the corrected values.
    Vector m_grad_;
    Vector m_hess_sq_;
    friend EmaState ema_update_grad(EmaState state, const Vector& g_hat);
    friend EmaState ema_update_hess(EmaState state, const Vector& diag_h);
};

/// g_bar_t = (1-b1) sum_{i<=t} b1^{t-i} g_i / (1 - b1^t); first update
/// returns the observation unchanged.
EmaState ema_update_grad(EmaState state, const Vector& g_hat);

/// h_bar_t = sqrt( (1-b2) sum_{i<=t} b2^{t-i} d_i^2 / (1 - b2^t) ) elementwise.
EmaState ema_update_hess(EmaState state, const Vector& diag_h);

struct PreconditionerConfig {
    double delta_floor = 1e-12;       // added to h_bar before the division
    std::size_t hessian_batch = 64;   // b_H
    std::size_t hutchinson_samples = 1;
    double hessian_power = 1.0;       // k in [0, 1]
    bool per_example_hessian = false;  // use analytic per-example diagonals when available
    double ema_beta1 = 0.9;            // seeds EmaState::beta1
    double ema_beta2 = 0.999;          // seeds EmaState::beta2

    void validate() const;
};

/// Hutchinson estimate (1/samples) sum_s z_s (.) H z_s of the parameter-space
/// Hessian diagonal, H averaged over `batch`.
Vector hutchinson_diag(const ModelSpec& model, const Vector& w,
                       std::span<const std::size_t> batch, std::size_t samples, SeededRng& rng);

/// Same estimator over the proxy-space Hessian (loss w.r.t. the proxy
/// coordinates). Equals hutchinson_diag for models whose proxy is the full
/// gradient.
Vector hutchinson_proxy_diag(const ModelSpec& model, const Vector& w,
                             std::span<const std::size_t> batch, std::size_t samples,
                             SeededRng& rng);

/// Elementwise g / (h_bar + delta_floor)^k. k = 0 is the exact identity.
Vector precondition(const Vector& g, const Vector& h_bar, double k, double delta_floor);

enum class FeatureMode { preconditioned, gradient_only, raw_feature };

/// Per-example selection feature rows for the given dataset indices, plus the
/// global ids they correspond to.
struct SelectionFeatures {
    Matrix vectors;  // |indices| x p
    FeatureMode mode = FeatureMode::raw_feature;
    std::vector<std::size_t> indices;  // global dataset ids, one per row
};

/// preconditioned: proxy gradients divided by the shared h_bar (or by the
/// per-example analytic Hessian diagonal when cfg.per_example_hessian and the
/// model provides it); gradient_only: raw proxy gradients; raw_feature: the
/// dataset rows. Preconditioned mode on the shared path requires a populated
/// Hessian EMA.
SelectionFeatures selection_features(const ModelSpec& model, const Vector& w,
                                     const EmaState& ema, const PreconditionerConfig& cfg,
                                     FeatureMode mode, std::span<const std::size_t> indices);

}  // namespace corekit
