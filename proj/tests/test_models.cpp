#include <doctest.h>

#include <Eigen/Dense>

#include <cmath>

#include "corekit/models.hpp"
#include "oracles.hpp"

using namespace corekit;

TEST_CASE("logistic per-example Hessian closed forms") {
    // Single feature x = 1, w = b = 0: sigma = 1/2, H = 1/4 [[1,1],[1,1]].
    const Dataset ds = make_dataset(Matrix(2, 1, {1.0, 0.0}), {1, 0}, "tiny");
    LogisticModel model(ds, 0.0);
    const Vector w{0.0, 0.0};
    const Matrix h = model.hess_i(w, 0);
    CHECK(h(0, 0) == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(h(0, 1) == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(h(1, 0) == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(h(1, 1) == doctest::Approx(0.25).epsilon(1e-15));

    // x = 0 zeroes every block except the bias curvature.
    const Vector w2{0.7, -0.3};
    const double sig = model.sigma_i(w2, 1);
    const Matrix h0 = model.hess_i(w2, 1);
    CHECK(h0(0, 0) == 0.0);
    CHECK(h0(0, 1) == 0.0);
    CHECK(h0(1, 1) == doctest::Approx(sig * (1.0 - sig)).epsilon(1e-15));

    CHECK_THROWS(model.hess_i(w, 99));
}

TEST_CASE("logistic derivatives match finite differences") {
    SeededRng rng(31);
    const Dataset ds = oracles::random_binary_dataset(16, 4, rng);
    for (const double mu : {0.0, 0.1}) {
        LogisticModel model(ds, mu);
        for (int probe = 0; probe < 60; ++probe) {
            Vector w(model.dim());
            for (auto& v : w) v = 0.6 * rng.next_gaussian();
            const std::size_t i = rng.next_below(ds.n());

            const Vector g = model.grad_i(w, i);
            const Vector g_fd = oracles::fd_loss_grad(model, w, i);
            CHECK(norm2(sub(g, g_fd)) <= 1e-6 * (1.0 + norm2(g)));

            const Matrix h = model.hess_i(w, i);
            const Matrix h_fd = oracles::fd_grad_hess(model, w, i);
            CHECK(h.max_abs_diff(h_fd) <= 1e-5);
        }
    }
}

TEST_CASE("logistic regularized coordinates keep the mu floor") {
    SeededRng rng(37);
    const Dataset ds = oracles::random_binary_dataset(10, 3, rng);
    const double mu = 0.1;
    LogisticModel model(ds, mu);
    for (int probe = 0; probe < 30; ++probe) {
        Vector w(model.dim());
        for (auto& v : w) v = rng.next_gaussian();
        const std::size_t i = rng.next_below(ds.n());
        const Vector diag = model.hess_diag_i(w, i);
        // The floor applies to the weight block; the bias is unregularized.
        for (std::size_t j = 0; j + 1 < diag.size(); ++j) CHECK(diag[j] >= mu);
    }
}

TEST_CASE("logistic full Hessian eigenvalues stay above mu on moderate probes") {
    SeededRng rng(41);
    const Dataset ds = oracles::random_binary_dataset(24, 4, rng);
    const double mu = 0.1;
    LogisticModel model(ds, mu);
    const std::size_t d = model.dim();
    for (int probe = 0; probe < 10; ++probe) {
        Vector w(d);
        for (auto& v : w) v = 0.3 * rng.next_gaussian();
        Eigen::MatrixXd h = Eigen::MatrixXd::Zero(d, d);
        for (std::size_t i = 0; i < ds.n(); ++i) {
            const Matrix hi = model.hess_i(w, i);
            for (std::size_t a = 0; a < d; ++a)
                for (std::size_t b = 0; b < d; ++b) h(a, b) += hi(a, b);
        }
        h /= static_cast<double>(ds.n());
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(h);
        CHECK(eig.eigenvalues().minCoeff() >= mu - 1e-12);
    }
}

TEST_CASE("predicted probabilities stay inside (0,1)") {
    const Dataset ds = make_dataset(Matrix(2, 1, {50.0, -50.0}), {1, 0}, "extreme");
    LogisticModel model(ds, 0.0);
    const Vector w{10.0, 0.0};  // drives z to +-500
    for (std::size_t i = 0; i < 2; ++i) {
        const Vector p = model.predict_proba(w, i);
        CHECK(p[1] > 0.0);
        CHECK(p[1] < 1.0);
        CHECK(p[0] + p[1] == doctest::Approx(1.0).epsilon(1e-15));
    }
}

TEST_CASE("ridge losses are non-negative and derivatives check out") {
    SeededRng rng(43);
    const Dataset ds = oracles::random_binary_dataset(12, 3, rng);
    RidgeModel model(ds, 0.05);
    for (int probe = 0; probe < 40; ++probe) {
        Vector w(model.dim());
        for (auto& v : w) v = rng.next_gaussian();
        const std::size_t i = rng.next_below(ds.n());
        CHECK(model.loss_i(w, i) >= 0.0);
        const Vector g = model.grad_i(w, i);
        const Vector g_fd = oracles::fd_loss_grad(model, w, i);
        CHECK(norm2(sub(g, g_fd)) <= 1e-6 * (1.0 + norm2(g)));
    }
}

TEST_CASE("mlp proxy gradient is p minus the one-hot label") {
    SeededRng rng(47);
    Matrix x(6, 3);
    std::vector<int> y{0, 1, 0, 1, 0, 1};
    for (std::size_t i = 0; i < 6; ++i)
        for (std::size_t j = 0; j < 3; ++j) x(i, j) = rng.next_gaussian();
    const Dataset ds = make_dataset(std::move(x), std::move(y), "mlp");
    ToyMlp model(ds, 5, 0.0);

    // Zero weights: uniform softmax; label 0 gives (-1/2, 1/2).
    const Vector w0(model.dim(), 0.0);
    const Vector proxy = model.proxy_grad_i(w0, 0);
    CHECK(proxy[0] == doctest::Approx(-0.5).epsilon(1e-15));
    CHECK(proxy[1] == doctest::Approx(0.5).epsilon(1e-15));

    // Saturated output bias: p equals the one-hot label, proxy is exactly 0.
    Vector w_conf(model.dim(), 0.0);
    const std::size_t b2 = model.dim() - 2;
    w_conf[b2 + 0] = 800.0;
    w_conf[b2 + 1] = -800.0;
    const Vector zero_proxy = model.proxy_grad_i(w_conf, 0);
    CHECK(zero_proxy[0] == 0.0);
    CHECK(zero_proxy[1] == 0.0);
}

TEST_CASE("mlp proxy equals the finite-difference logit derivative") {
    // The softmax-input gradient coincides with the output-bias gradient, so
    // central differences on the bias coordinates of the loss are an
    // independent oracle for it.
    SeededRng rng(53);
    Matrix x(9, 4);
    std::vector<int> y(9);
    for (std::size_t i = 0; i < 9; ++i) {
        y[i] = static_cast<int>(i % 3);
        for (std::size_t j = 0; j < 4; ++j) x(i, j) = rng.next_gaussian();
    }
    const Dataset ds = make_dataset(std::move(x), std::move(y), "mlp3");
    ToyMlp model(ds, 6, 0.0);
    SeededRng init(3);
    for (int probe = 0; probe < 20; ++probe) {
        Vector w = model.init_params(init);
        const std::size_t i = rng.next_below(ds.n());
        const Vector proxy = model.proxy_grad_i(w, i);
        const std::size_t b2_offset = model.dim() - proxy.size();
        Vector probe_w = w;
        for (std::size_t c = 0; c < proxy.size(); ++c) {
            const double h = 1e-6;
            probe_w[b2_offset + c] = w[b2_offset + c] + h;
            const double up = model.loss_i(probe_w, i);
            probe_w[b2_offset + c] = w[b2_offset + c] - h;
            const double down = model.loss_i(probe_w, i);
            probe_w[b2_offset + c] = w[b2_offset + c];
            CHECK(proxy[c] == doctest::Approx((up - down) / (2.0 * h)).epsilon(1e-6));
        }
    }
}

TEST_CASE("mlp gradient matches finite differences and softmax sums to one") {
    SeededRng rng(59);
    Matrix x(8, 3);
    std::vector<int> y(8);
    for (std::size_t i = 0; i < 8; ++i) {
        y[i] = static_cast<int>(i % 2);
        for (std::size_t j = 0; j < 3; ++j) x(i, j) = rng.next_gaussian();
    }
    const Dataset ds = make_dataset(std::move(x), std::move(y), "mlp2");
    ToyMlp model(ds, 7, 1e-4);
    SeededRng init(7);
    for (int probe = 0; probe < 25; ++probe) {
        Vector w = model.init_params(init);
        const std::size_t i = rng.next_below(ds.n());
        const Vector g = model.grad_i(w, i);
        const Vector g_fd = oracles::fd_loss_grad(model, w, i);
        CHECK(norm2(sub(g, g_fd)) <= 1e-6 * (1.0 + norm2(g)));

        const Vector p = model.predict_proba(w, i);
        double sum = 0.0;
        for (double v : p) sum += v;
        CHECK(std::abs(sum - 1.0) <= 1e-9);
    }
}

TEST_CASE("hvp on a constant-Hessian quadratic and zero probes") {
    const Matrix h(1, 1, {3.0});
    oracles::QuadraticModel model(h);
    const std::vector<std::size_t> batch{0};
    CHECK(model.hvp({0.0}, {1.0}, batch) == Vector{3.0});

    // z = 0 gives the zero vector for every model, including the FD path.
    SeededRng rng(61);
    const Dataset ds = oracles::random_binary_dataset(6, 2, rng);
    ToyMlp mlp(ds, 3, 0.0);
    SeededRng init(11);
    const Vector w = mlp.init_params(init);
    CHECK(mlp.hvp(w, Vector(mlp.dim(), 0.0), batch) == Vector(mlp.dim(), 0.0));
}

TEST_CASE("analytic logistic hvp matches the finite-difference route") {
    SeededRng rng(67);
    const Dataset ds = oracles::random_binary_dataset(10, 3, rng);
    LogisticModel model(ds, 0.1);
    std::vector<std::size_t> batch{0, 3, 5, 8};
    for (int probe = 0; probe < 20; ++probe) {
        Vector w(model.dim()), z(model.dim());
        for (auto& v : w) v = 0.5 * rng.next_gaussian();
        for (auto& v : z) v = rng.next_gaussian();
        const Vector analytic = model.hvp(w, z, batch);

        const double delta = 1e-6;
        Vector wp = w, wm = w;
        axpy(delta, z, wp);
        axpy(-delta, z, wm);
        Vector fd(model.dim(), 0.0);
        for (std::size_t i : batch) {
            axpy(1.0, model.grad_i(wp, i), fd);
            axpy(-1.0, model.grad_i(wm, i), fd);
        }
        for (auto& v : fd) v /= 2.0 * delta * static_cast<double>(batch.size());
        CHECK(norm2(sub(analytic, fd)) <= 1e-4 * (1.0 + norm2(analytic)));
    }
}

TEST_CASE("weighted gradient equals the closed-form weighted mean") {
    SeededRng rng(71);
    const Dataset ds = oracles::random_binary_dataset(6, 2, rng);
    LogisticModel model(ds, 0.0);
    Vector w(model.dim());
    for (auto& v : w) v = rng.next_gaussian();
    const std::vector<std::size_t> idx{1, 4};
    const std::vector<double> gamma{2.0, 3.0};
    const Vector got = weighted_grad(model, w, idx, gamma);
    Vector acc(model.dim(), 0.0);
    axpy(2.0, model.grad_i(w, 1), acc);
    axpy(3.0, model.grad_i(w, 4), acc);
    const Vector want = scaled(acc, 1.0 / 5.0);
    CHECK(got == want);
}
