#include "corekit/models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace corekit {

namespace {

double softplus(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))); }

double sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

}  // namespace

int ModelSpec::predict_class(const Vector& w, std::size_t i) const {
    const Vector p = predict_proba(w, i);
    return static_cast<int>(std::max_element(p.begin(), p.end()) - p.begin());
}

double full_loss(const ModelSpec& model, const Vector& w) {
    double acc = 0.0;
    for (std::size_t i = 0; i < model.n(); ++i) acc += model.loss_i(w, i);
    return acc / static_cast<double>(model.n());
}

Vector full_grad(const ModelSpec& model, const Vector& w) {
    Vector acc(model.dim(), 0.0);
    for (std::size_t i = 0; i < model.n(); ++i) axpy(1.0, model.grad_i(w, i), acc);
    return scaled(acc, 1.0 / static_cast<double>(model.n()));
}

Vector weighted_grad(const ModelSpec& model, const Vector& w,
                     std::span<const std::size_t> indices, std::span<const double> weights) {
    if (indices.empty()) throw InvalidInputError("weighted_grad: empty batch");
    if (indices.size() != weights.size()) throw DimensionError("weighted_grad: weights mismatch");
    Vector acc(model.dim(), 0.0);
    double total = 0.0;
    for (std::size_t k = 0; k < indices.size(); ++k) {
        axpy(weights[k], model.grad_i(w, indices[k]), acc);
        total += weights[k];
    }
    return scaled(acc, 1.0 / total);
}

double accuracy(const ModelSpec& model, const Vector& w) {
    std::size_t correct = 0;
    for (std::size_t i = 0; i < model.n(); ++i)
        if (model.predict_class(w, i) == model.dataset().labels[i]) ++correct;
    return static_cast<double>(correct) / static_cast<double>(model.n());
}

// ---------------------------------------------------------------- logistic

LogisticModel::LogisticModel(const Dataset& ds, double mu) : ds_(ds), mu_(mu) {
    if (ds.num_classes() != 2) throw InvalidInputError("logistic: needs exactly 2 classes");
    if (mu < 0.0) throw InvalidInputError("logistic: mu must be >= 0");
}

double LogisticModel::sigma_i(const Vector& w, std::size_t i) const {
    if (w.size() != dim()) throw DimensionError("logistic: parameter dim mismatch");
    const auto x = ds_.features.row(i);
    double z = w[ds_.dim()];
    for (std::size_t j = 0; j < x.size(); ++j) z += w[j] * x[j];
    return sigmoid(z);
}

double LogisticModel::loss_i(const Vector& w, std::size_t i) const {
    if (w.size() != dim()) throw DimensionError("logistic: parameter dim mismatch");
    if (i >= n()) throw InvalidInputError("logistic: example index out of range");
    const auto x = ds_.features.row(i);
    double z = w[ds_.dim()];
    for (std::size_t j = 0; j < x.size(); ++j) z += w[j] * x[j];
    const double y = static_cast<double>(ds_.labels[i]);
    double reg = 0.0;
    for (std::size_t j = 0; j < ds_.dim(); ++j) reg += w[j] * w[j];
    return softplus(z) - y * z + 0.5 * mu_ * reg;
}

Vector LogisticModel::grad_i(const Vector& w, std::size_t i) const {
    const double r = sigma_i(w, i) - static_cast<double>(ds_.labels[i]);
    const auto x = ds_.features.row(i);
    Vector g(dim());
    for (std::size_t j = 0; j < x.size(); ++j) g[j] = r * x[j] + mu_ * w[j];
    g[ds_.dim()] = r;
    return g;
}

Matrix LogisticModel::hess_i(const Vector& w, std::size_t i) const {
    if (i >= n()) throw InvalidInputError("logistic: example index out of range");
    const double sig = sigma_i(w, i);
    const double s = sig * (1.0 - sig);
    const auto x = ds_.features.row(i);
    const std::size_t d = ds_.dim();
    Matrix h(d + 1, d + 1);
    for (std::size_t a = 0; a < d; ++a) {
        for (std::size_t b = 0; b < d; ++b) h(a, b) = s * x[a] * x[b];
        h(a, a) += mu_;
        h(a, d) = s * x[a];
        h(d, a) = s * x[a];
    }
    h(d, d) = s;
    return h;
}

Vector LogisticModel::hess_diag_i(const Vector& w, std::size_t i) const {
    const double sig = sigma_i(w, i);
    const double s = sig * (1.0 - sig);
    const auto x = ds_.features.row(i);
    Vector diag(dim());
    for (std::size_t j = 0; j < x.size(); ++j) diag[j] = s * x[j] * x[j] + mu_;
    diag[ds_.dim()] = s;
    return diag;
}

Vector LogisticModel::hvp(const Vector& w, const Vector& z,
                          std::span<const std::size_t> batch) const {
    if (batch.empty()) throw InvalidInputError("hvp: empty batch");
    check_same_dim(w, z, "hvp");
    const std::size_t d = ds_.dim();
    Vector acc(dim(), 0.0);
    for (std::size_t i : batch) {
        const double sig = sigma_i(w, i);
        const double s = sig * (1.0 - sig);
        const auto x = ds_.features.row(i);
        // H_i z = s * xt (xt . z) + mu P z, with xt = (x, 1).
        double xz = z[d];
        for (std::size_t j = 0; j < d; ++j) xz += x[j] * z[j];
        for (std::size_t j = 0; j < d; ++j) acc[j] += s * x[j] * xz + mu_ * z[j];
        acc[d] += s * xz;
    }
    return scaled(acc, 1.0 / static_cast<double>(batch.size()));
}

Vector LogisticModel::predict_proba(const Vector& w, std::size_t i) const {
    // Saturated logits round sigma to exactly 0 or 1; keep the reported
    // probability inside the open interval.
    const double hi = std::nextafter(1.0, 0.0);
    const double sig = std::clamp(sigma_i(w, i), 1.0 - hi, hi);
    return {1.0 - sig, sig};
}

// ------------------------------------------------------------------- ridge

RidgeModel::RidgeModel(const Dataset& ds, double lambda) : ds_(ds), lambda_(lambda) {
    if (ds.num_classes() != 2) throw InvalidInputError("ridge: label targets need 2 classes");
    targets_.resize(ds.n());
    for (std::size_t i = 0; i < ds.n(); ++i) targets_[i] = ds.labels[i] == 0 ? -1.0 : 1.0;
}

RidgeModel::RidgeModel(const Dataset& ds, double lambda, Vector targets)
    : ds_(ds), lambda_(lambda), targets_(std::move(targets)) {
    if (targets_.size() != ds.n()) throw DimensionError("ridge: targets size mismatch");
}

double RidgeModel::loss_i(const Vector& w, std::size_t i) const {
    if (w.size() != dim()) throw DimensionError("ridge: parameter dim mismatch");
    if (i >= n()) throw InvalidInputError("ridge: example index out of range");
    const auto x = ds_.features.row(i);
    double r = -targets_[i];
    for (std::size_t j = 0; j < x.size(); ++j) r += w[j] * x[j];
    double reg = 0.0;
    for (double wj : w) reg += wj * wj;
    return 0.5 * r * r + 0.5 * lambda_ * reg;
}

Vector RidgeModel::grad_i(const Vector& w, std::size_t i) const {
    if (w.size() != dim()) throw DimensionError("ridge: parameter dim mismatch");
    const auto x = ds_.features.row(i);
    double r = -targets_[i];
    for (std::size_t j = 0; j < x.size(); ++j) r += w[j] * x[j];
    Vector g(dim());
    for (std::size_t j = 0; j < x.size(); ++j) g[j] = r * x[j] + lambda_ * w[j];
    return g;
}

Matrix RidgeModel::hess_i(const Vector&, std::size_t i) const {
    const auto x = ds_.features.row(i);
    Matrix h(dim(), dim());
    for (std::size_t a = 0; a < dim(); ++a) {
        for (std::size_t b = 0; b < dim(); ++b) h(a, b) = x[a] * x[b];
        h(a, a) += lambda_;
    }
    return h;
}

Vector RidgeModel::hess_diag_i(const Vector&, std::size_t i) const {
    const auto x = ds_.features.row(i);
    Vector diag(dim());
    for (std::size_t j = 0; j < dim(); ++j) diag[j] = x[j] * x[j] + lambda_;
    return diag;
}

Vector RidgeModel::hvp(const Vector& w, const Vector& z,
                       std::span<const std::size_t> batch) const {
    if (batch.empty()) throw InvalidInputError("hvp: empty batch");
    check_same_dim(w, z, "hvp");
    Vector acc(dim(), 0.0);
    for (std::size_t i : batch) {
        const auto x = ds_.features.row(i);
        double xz = 0.0;
        for (std::size_t j = 0; j < dim(); ++j) xz += x[j] * z[j];
        for (std::size_t j = 0; j < dim(); ++j) acc[j] += x[j] * xz + lambda_ * z[j];
    }
    return scaled(acc, 1.0 / static_cast<double>(batch.size()));
}

int RidgeModel::predict_class(const Vector& w, std::size_t i) const {
    const auto x = ds_.features.row(i);
    double v = 0.0;
    for (std::size_t j = 0; j < dim(); ++j) v += w[j] * x[j];
    return v >= 0.0 ? 1 : 0;
}

// ----------------------------------------------------------------- toy MLP

ToyMlp::ToyMlp(const Dataset& ds, std::size_t hidden, double weight_decay)
    : ds_(ds),
      input_(ds.dim()),
      hidden_(hidden),
      classes_(ds.num_classes()),
      n_params_(hidden * ds.dim() + hidden + ds.num_classes() * hidden + ds.num_classes()),
      weight_decay_(weight_decay) {
    if (hidden == 0) throw InvalidInputError("mlp: hidden width must be >= 1");
}

ToyMlp::Forward ToyMlp::forward(const Vector& w, std::size_t i) const {
    if (w.size() != n_params_) throw DimensionError("mlp: parameter dim mismatch");
    if (i >= n()) throw InvalidInputError("mlp: example index out of range");
    const auto x = ds_.features.row(i);
    const double* w1 = w.data();
    const double* b1 = w1 + hidden_ * input_;
    const double* w2 = b1 + hidden_;
    const double* b2 = w2 + classes_ * hidden_;

    Forward f;
    f.hidden.resize(hidden_);
    for (std::size_t h = 0; h < hidden_; ++h) {
        double z = b1[h];
        const double* row = w1 + h * input_;
        for (std::size_t j = 0; j < input_; ++j) z += row[j] * x[j];
        f.hidden[h] = sigmoid(z);
    }
    Vector logits(classes_);
    double max_logit = -std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < classes_; ++c) {
        double z = b2[c];
        const double* row = w2 + c * hidden_;
        for (std::size_t h = 0; h < hidden_; ++h) z += row[h] * f.hidden[h];
        logits[c] = z;
        max_logit = std::max(max_logit, z);
    }
    f.probs.resize(classes_);
    double denom = 0.0;
    for (std::size_t c = 0; c < classes_; ++c) {
        f.probs[c] = std::exp(logits[c] - max_logit);
        denom += f.probs[c];
    }
    for (double& p : f.probs) p /= denom;
    return f;
}

double ToyMlp::loss_i(const Vector& w, std::size_t i) const {
    const Forward f = forward(w, i);
    const double p_true = f.probs[ds_.labels[i]];
    double reg = 0.0;
    const double* w1 = w.data();
    for (std::size_t k = 0; k < hidden_ * input_; ++k) reg += w1[k] * w1[k];
    const double* w2 = w.data() + hidden_ * input_ + hidden_;
    for (std::size_t k = 0; k < classes_ * hidden_; ++k) reg += w2[k] * w2[k];
    return -std::log(std::max(p_true, 1e-300)) + 0.5 * weight_decay_ * reg;
}

Vector ToyMlp::grad_i(const Vector& w, std::size_t i) const {
    const Forward f = forward(w, i);
    const auto x = ds_.features.row(i);
    const double* w1 = w.data();
    const double* w2 = w.data() + hidden_ * input_ + hidden_;

    Vector g(n_params_, 0.0);
    double* g_w1 = g.data();
    double* g_b1 = g_w1 + hidden_ * input_;
    double* g_w2 = g_b1 + hidden_;
    double* g_b2 = g_w2 + classes_ * hidden_;

    // du = p - onehot(y)
    Vector du = f.probs;
    du[ds_.labels[i]] -= 1.0;

    Vector dh(hidden_, 0.0);
    for (std::size_t c = 0; c < classes_; ++c) {
        g_b2[c] = du[c];
        const double* row = w2 + c * hidden_;
        double* g_row = g_w2 + c * hidden_;
        for (std::size_t h = 0; h < hidden_; ++h) {
            g_row[h] = du[c] * f.hidden[h] + weight_decay_ * row[h];
            dh[h] += row[h] * du[c];
        }
    }
    for (std::size_t h = 0; h < hidden_; ++h) {
        const double dz = dh[h] * f.hidden[h] * (1.0 - f.hidden[h]);
        g_b1[h] = dz;
        double* g_row = g_w1 + h * input_;
        const double* row = w1 + h * input_;
        for (std::size_t j = 0; j < input_; ++j) g_row[j] = dz * x[j] + weight_decay_ * row[j];
    }
    return g;
}

Vector ToyMlp::proxy_grad_i(const Vector& w, std::size_t i) const {
    Vector du = forward(w, i).probs;
    du[ds_.labels[i]] -= 1.0;
    return du;
}

Vector ToyMlp::hvp(const Vector& w, const Vector& z, std::span<const std::size_t> batch) const {
    if (batch.empty()) throw InvalidInputError("hvp: empty batch");
    check_same_dim(w, z, "hvp");
    const double nz = norm2(z);
    if (nz == 0.0) return Vector(n_params_, 0.0);
    const double delta = std::sqrt(std::numeric_limits<double>::epsilon()) * (1.0 + norm2(w)) /
                         (1.0 + nz);
    Vector w_plus = w, w_minus = w;
    axpy(delta, z, w_plus);
    axpy(-delta, z, w_minus);
    Vector acc(n_params_, 0.0);
    for (std::size_t i : batch) {
        axpy(1.0, grad_i(w_plus, i), acc);
        axpy(-1.0, grad_i(w_minus, i), acc);
    }
    return scaled(acc, 1.0 / (2.0 * delta * static_cast<double>(batch.size())));
}

Vector ToyMlp::proxy_hvp(const Vector& w, const Vector& z,
                         std::span<const std::size_t> batch) const {
    if (batch.empty()) throw InvalidInputError("proxy_hvp: empty batch");
    if (z.size() != classes_) throw DimensionError("proxy_hvp: z dim != classes");
    Vector acc(classes_, 0.0);
    for (std::size_t i : batch) {
        const Vector p = forward(w, i).probs;
        const double pz = dot(p, z);
        for (std::size_t c = 0; c < classes_; ++c) acc[c] += p[c] * (z[c] - pz);
    }
    return scaled(acc, 1.0 / static_cast<double>(batch.size()));
}

Vector ToyMlp::predict_proba(const Vector& w, std::size_t i) const {
    return forward(w, i).probs;
}

Vector ToyMlp::init_params(SeededRng& rng) const {
    Vector w(n_params_, 0.0);
    const double s1 = 1.0 / std::sqrt(static_cast<double>(input_));
    const double s2 = 1.0 / std::sqrt(static_cast<double>(hidden_));
    for (std::size_t k = 0; k < hidden_ * input_; ++k) w[k] = s1 * rng.next_gaussian();
    double* w2 = w.data() + hidden_ * input_ + hidden_;
    for (std::size_t k = 0; k < classes_ * hidden_; ++k) w2[k] = s2 * rng.next_gaussian();
    return w;
}

}  // namespace corekit
