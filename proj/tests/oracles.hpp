// Test-only oracles, independent of the library code paths they check:
// brute-force facility objectives, finite-difference derivatives, and small
// random instance generators.
#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "corekit/coreset.hpp"
#include "corekit/curvature.hpp"
#include "corekit/models.hpp"
#include "corekit/numerics.hpp"

namespace oracles {

using corekit::Dataset;
using corekit::Matrix;
using corekit::ModelSpec;
using corekit::SeededRng;
using corekit::SelectionFeatures;
using corekit::Vector;

inline double row_dist(const Matrix& rows, std::size_t i, std::size_t j) {
    double acc = 0.0;
    for (std::size_t k = 0; k < rows.cols(); ++k) {
        const double d = rows(i, k) - rows(j, k);
        acc += d * d;
    }
    return std::sqrt(acc);
}

// L(S) = sum_i min_{j in S} d(i, j), straight from the rows.
inline double brute_coverage(const Matrix& rows, const std::vector<std::size_t>& selected) {
    double total = 0.0;
    for (std::size_t i = 0; i < rows.rows(); ++i) {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t j : selected) best = std::min(best, row_dist(rows, i, j));
        total += best;
    }
    return total;
}

// Smallest subset size achieving L(S) <= epsilon, by exhaustive enumeration
// in increasing size order.
inline std::size_t brute_min_cover(const Matrix& rows, double epsilon) {
    const std::size_t n = rows.rows();
    for (std::size_t k = 1; k <= n; ++k) {
        std::vector<std::size_t> pick(k);
        std::function<bool(std::size_t, std::size_t)> rec = [&](std::size_t start,
                                                                std::size_t depth) {
            if (depth == k) return brute_coverage(rows, pick) <= epsilon;
            for (std::size_t c = start; c < n; ++c) {
                pick[depth] = c;
                if (rec(c + 1, depth + 1)) return true;
            }
            return false;
        };
        if (rec(0, 0)) return k;
    }
    return n;
}

inline Vector fd_loss_grad(const ModelSpec& model, const Vector& w, std::size_t i,
                           double h = 1e-6) {
    Vector g(w.size());
    Vector probe = w;
    for (std::size_t j = 0; j < w.size(); ++j) {
        probe[j] = w[j] + h;
        const double up = model.loss_i(probe, i);
        probe[j] = w[j] - h;
        const double down = model.loss_i(probe, i);
        probe[j] = w[j];
        g[j] = (up - down) / (2.0 * h);
    }
    return g;
}

inline Matrix fd_grad_hess(const ModelSpec& model, const Vector& w, std::size_t i,
                           double h = 1e-6) {
    Matrix out(w.size(), w.size());
    Vector probe = w;
    for (std::size_t j = 0; j < w.size(); ++j) {
        probe[j] = w[j] + h;
        const Vector up = model.grad_i(probe, i);
        probe[j] = w[j] - h;
        const Vector down = model.grad_i(probe, i);
        probe[j] = w[j];
        for (std::size_t k = 0; k < w.size(); ++k) out(k, j) = (up[k] - down[k]) / (2.0 * h);
    }
    return out;
}

inline SelectionFeatures features_from_rows(Matrix rows) {
    SelectionFeatures feats;
    feats.mode = corekit::FeatureMode::raw_feature;
    feats.indices.resize(rows.rows());
    for (std::size_t i = 0; i < rows.rows(); ++i) feats.indices[i] = i;
    feats.vectors = std::move(rows);
    return feats;
}

inline SelectionFeatures random_features(std::size_t n, std::size_t p, SeededRng& rng,
                                         double span = 2.0) {
    Matrix rows(n, p);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < p; ++j) rows(i, j) = span * (2.0 * rng.next_double() - 1.0);
    return features_from_rows(std::move(rows));
}

inline Dataset random_binary_dataset(std::size_t n, std::size_t d, SeededRng& rng,
                                     double separation = 1.0) {
    Matrix x(n, d);
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) {
        y[i] = i < n / 2 ? 0 : 1;
        for (std::size_t j = 0; j < d; ++j)
            x(i, j) = rng.next_gaussian() + (y[i] ? separation : -separation);
    }
    return corekit::make_dataset(std::move(x), std::move(y), "test");
}

// Quadratic 1/2 w^T H w as a ModelSpec, for Hessian-estimator oracles.
class QuadraticModel : public ModelSpec {
  public:
    explicit QuadraticModel(Matrix h)
        : h_(std::move(h)), ds_(corekit::make_dataset(Matrix(2, 1, {0.0, 1.0}), {0, 1}, "quad")) {}

    std::size_t dim() const override { return h_.rows(); }
    std::size_t n() const override { return 2; }
    std::size_t proxy_dim() const override { return dim(); }
    double loss_i(const Vector& w, std::size_t) const override {
        return 0.5 * corekit::dot(w, h_.apply(w));
    }
    Vector grad_i(const Vector& w, std::size_t) const override { return h_.apply(w); }
    Vector proxy_grad_i(const Vector& w, std::size_t i) const override { return grad_i(w, i); }
    Vector hvp(const Vector&, const Vector& z, std::span<const std::size_t>) const override {
        return h_.apply(z);
    }
    Vector proxy_hvp(const Vector& w, const Vector& z,
                     std::span<const std::size_t> b) const override {
        return hvp(w, z, b);
    }
    const Dataset& dataset() const override { return ds_; }
    const Matrix& hessian() const { return h_; }

  private:
    Matrix h_;
    Dataset ds_;
};

inline Matrix random_symmetric(std::size_t d, SeededRng& rng) {
    Matrix h(d, d);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = i; j < d; ++j) {
            const double v = 2.0 * rng.next_double() - 1.0;
            h(i, j) = v;
            h(j, i) = v;
        }
    return h;
}

}  // namespace oracles
