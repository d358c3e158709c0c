#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "corekit/data.hpp"
#include "corekit/numerics.hpp"

namespace corekit {

/// Per-example differentiable loss over a fixed dataset. Implementations are
/// stateless given (dataset, w); every operation may be called concurrently
/// with read-only access.
///
/// The proxy space is the low-dimensional gradient surrogate used for subset
/// selection: the softmax-input gradient p - y for the MLP, the full
/// per-example gradient for the convex models.
class ModelSpec {
  public:
    virtual ~ModelSpec() = default;

    virtual std::size_t dim() const = 0;        // parameter count
    virtual std::size_t n() const = 0;          // examples
    virtual std::size_t proxy_dim() const = 0;  // selection-feature dimension

    virtual double loss_i(const Vector& w, std::size_t i) const = 0;
    virtual Vector grad_i(const Vector& w, std::size_t i) const = 0;
    virtual Vector proxy_grad_i(const Vector& w, std::size_t i) const = 0;

    virtual bool has_hess() const { return false; }
    virtual Matrix hess_i(const Vector&, std::size_t) const {
        throw StateError("model: per-example Hessian not available");
    }
    virtual bool has_hess_diag() const { return false; }
    virtual Vector hess_diag_i(const Vector&, std::size_t) const {
        throw StateError("model: per-example Hessian diagonal not available");
    }

    /// (1/|batch|) sum_i H_i z in parameter space.
    virtual Vector hvp(const Vector& w, const Vector& z, std::span<const std::size_t> batch) const = 0;

    /// (1/|batch|) sum_i H^proxy_i z, the Hessian of the loss w.r.t. the proxy
    /// coordinates. Coincides with hvp for models whose proxy is the full
    /// gradient.
    virtual Vector proxy_hvp(const Vector& w, const Vector& z,
                             std::span<const std::size_t> batch) const = 0;

    virtual bool has_predict_proba() const { return false; }
    virtual Vector predict_proba(const Vector&, std::size_t) const {
        throw StateError("model: class probabilities not available");
    }
    virtual int predict_class(const Vector& w, std::size_t i) const;

    virtual const Dataset& dataset() const = 0;
};

// Mean loss / gradient over all examples, fixed iteration order.
double full_loss(const ModelSpec& model, const Vector& w);
Vector full_grad(const ModelSpec& model, const Vector& w);
// Weighted mean over (index, weight) pairs: sum_i w_i g_i / sum_i w_i.
Vector weighted_grad(const ModelSpec& model, const Vector& w,
                     std::span<const std::size_t> indices, std::span<const double> weights);
double accuracy(const ModelSpec& model, const Vector& w);

/// L2-regularized binary logistic regression with bias as the appended
/// parameter coordinate (dim = d + 1); the bias is not regularized.
class LogisticModel : public ModelSpec {
  public:
    LogisticModel(const Dataset& ds, double mu);

    std::size_t dim() const override { return ds_.dim() + 1; }
    std::size_t n() const override { return ds_.n(); }
    std::size_t proxy_dim() const override { return dim(); }

    double loss_i(const Vector& w, std::size_t i) const override;
    Vector grad_i(const Vector& w, std::size_t i) const override;
    Vector proxy_grad_i(const Vector& w, std::size_t i) const override { return grad_i(w, i); }

    bool has_hess() const override { return true; }
    // sigma(1-sigma) [x x^T, x; x^T, 1] + mu on the weight diagonal block.
    Matrix hess_i(const Vector& w, std::size_t i) const override;
    bool has_hess_diag() const override { return true; }
    Vector hess_diag_i(const Vector& w, std::size_t i) const override;

    Vector hvp(const Vector& w, const Vector& z, std::span<const std::size_t> batch) const override;
    Vector proxy_hvp(const Vector& w, const Vector& z,
                     std::span<const std::size_t> batch) const override {
        return hvp(w, z, batch);
    }

    bool has_predict_proba() const override { return true; }
    Vector predict_proba(const Vector& w, std::size_t i) const override;

    const Dataset& dataset() const override { return ds_; }
    double mu() const { return mu_; }

    double sigma_i(const Vector& w, std::size_t i) const;

  private:
    const Dataset& ds_;
    double mu_;
};

/// Ridge regression 1/2 (<x,w> - t)^2 + lambda/2 ||w||^2, no bias. Targets
/// default to class labels mapped to -1/+1; arbitrary real targets are
/// supported for least-squares experiments.
class RidgeModel : public ModelSpec {
  public:
    RidgeModel(const Dataset& ds, double lambda);
    RidgeModel(const Dataset& ds, double lambda, Vector targets);

    std::size_t dim() const override { return ds_.dim(); }
    std::size_t n() const override { return ds_.n(); }
    std::size_t proxy_dim() const override { return dim(); }

    double loss_i(const Vector& w, std::size_t i) const override;
    Vector grad_i(const Vector& w, std::size_t i) const override;
    Vector proxy_grad_i(const Vector& w, std::size_t i) const override { return grad_i(w, i); }

    bool has_hess() const override { return true; }
    Matrix hess_i(const Vector& w, std::size_t i) const override;
    bool has_hess_diag() const override { return true; }
    Vector hess_diag_i(const Vector& w, std::size_t i) const override;

    Vector hvp(const Vector& w, const Vector& z, std::span<const std::size_t> batch) const override;
    Vector proxy_hvp(const Vector& w, const Vector& z,
                     std::span<const std::size_t> batch) const override {
        return hvp(w, z, batch);
    }

    int predict_class(const Vector& w, std::size_t i) const override;

    const Dataset& dataset() const override { return ds_; }

  private:
    const Dataset& ds_;
    double lambda_;
    Vector targets_;
};

/// One sigmoid hidden layer + softmax cross-entropy head with weight decay on
/// the weight matrices. Parameter layout: [W1 | b1 | W2 | b2], row-major.
/// The proxy gradient is p - y over the C softmax inputs.
class ToyMlp : public ModelSpec {
  public:
    ToyMlp(const Dataset& ds, std::size_t hidden, double weight_decay);

    std::size_t dim() const override { return n_params_; }
    std::size_t n() const override { return ds_.n(); }
    std::size_t proxy_dim() const override { return classes_; }
    std::size_t hidden() const { return hidden_; }

    double loss_i(const Vector& w, std::size_t i) const override;
    Vector grad_i(const Vector& w, std::size_t i) const override;
    Vector proxy_grad_i(const Vector& w, std::size_t i) const override;

    // Central finite differences of the batch gradient; step scaled by
    // sqrt(machine ulp) relative to ||w|| and ||z||.
    Vector hvp(const Vector& w, const Vector& z, std::span<const std::size_t> batch) const override;
    // Analytic softmax curvature diag(p) - p p^T averaged over the batch.
    Vector proxy_hvp(const Vector& w, const Vector& z,
                     std::span<const std::size_t> batch) const override;

    bool has_predict_proba() const override { return true; }
    Vector predict_proba(const Vector& w, std::size_t i) const override;

    const Dataset& dataset() const override { return ds_; }

    /// Seeded Gaussian init, scaled by 1/sqrt(fan_in); biases zero.
    Vector init_params(SeededRng& rng) const;

  private:
    struct Forward {
        Vector hidden;  // sigmoid activations
        Vector probs;   // softmax output
    };
    Forward forward(const Vector& w, std::size_t i) const;

    const Dataset& ds_;
    std::size_t input_, hidden_, classes_, n_params_;
    double weight_decay_;
};

}  // namespace corekit
