#include "corekit/verify.hpp"

#include <chrono>
#include <cmath>
#include <functional>
#include <sstream>

#include "corekit/coreset.hpp"
#include "corekit/curvature.hpp"
#include "corekit/harness.hpp"
#include "corekit/models.hpp"
#include "corekit/optim.hpp"

namespace corekit {

namespace {

using Clock = std::chrono::steady_clock;

// ------------------------------------------------------------ test helpers

// Quadratic loss 1/2 z^T H z as a one-example model; its Hessian is exactly H.
class QuadraticProbe : public ModelSpec {
  public:
    explicit QuadraticProbe(Matrix h)
        : h_(std::move(h)),
          ds_(make_dataset(Matrix(2, 1, {0.0, 1.0}), {0, 1}, "probe")) {}

    std::size_t dim() const override { return h_.rows(); }
    std::size_t n() const override { return 2; }
    std::size_t proxy_dim() const override { return dim(); }
    double loss_i(const Vector& w, std::size_t) const override {
        return 0.5 * dot(w, h_.apply(w));
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

  private:
    Matrix h_;
    Dataset ds_;
};

Matrix random_symmetric(std::size_t d, SeededRng& rng) {
    Matrix h(d, d);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = i; j < d; ++j) {
            const double v = 2.0 * rng.next_double() - 1.0;
            h(i, j) = v;
            h(j, i) = v;
        }
    return h;
}

SelectionFeatures random_features(std::size_t n, std::size_t p, SeededRng& rng) {
    SelectionFeatures feats;
    feats.mode = FeatureMode::raw_feature;
    feats.vectors = Matrix(n, p);
    feats.indices.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        feats.indices[i] = i;
        for (std::size_t j = 0; j < p; ++j) feats.vectors(i, j) = 4.0 * rng.next_double() - 2.0;
    }
    return feats;
}

Dataset random_binary_dataset(std::size_t n, std::size_t d, SeededRng& rng) {
    Matrix x(n, d);
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) {
        y[i] = i < n / 2 ? 0 : 1;
        for (std::size_t j = 0; j < d; ++j)
            x(i, j) = rng.next_gaussian() + (y[i] ? 1.0 : -1.0);
    }
    return make_dataset(std::move(x), std::move(y), "verify");
}

Vector fd_grad(const ModelSpec& model, const Vector& w, std::size_t i, double h) {
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

Matrix fd_hess(const ModelSpec& model, const Vector& w, std::size_t i, double h) {
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

// Coverage-array marginal gain, summed in index order (the exact form the
// submodularity comparisons rely on).
double chain_gain(const DistanceOracle& dist, const std::vector<double>& cov, std::size_t e) {
    double g = 0.0;
    for (std::size_t i = 0; i < cov.size(); ++i) {
        const double delta = cov[i] - dist(i, e);
        if (delta > 0.0) g += delta;
    }
    return g;
}

std::vector<double> chain_cov(const DistanceOracle& dist, std::span<const std::size_t> set) {
    std::vector<double> cov(dist.size(), dist.phantom());
    for (std::size_t j : set)
        for (std::size_t i = 0; i < cov.size(); ++i) cov[i] = std::min(cov[i], dist(i, j));
    return cov;
}

// Smallest subset with L(S) <= epsilon, by exhaustive search in size order.
std::size_t brute_force_cover_size(const DistanceOracle& dist, double epsilon) {
    const std::size_t n = dist.size();
    for (std::size_t k = 1; k <= n; ++k) {
        std::vector<std::size_t> pick(k);
        std::function<bool(std::size_t, std::size_t)> rec = [&](std::size_t start,
                                                                std::size_t depth) {
            if (depth == k) {
                double total = 0.0;
                for (std::size_t i = 0; i < n; ++i) {
                    double best = dist.phantom();
                    for (std::size_t j : pick) best = std::min(best, dist(i, j));
                    total += best;
                }
                return total <= epsilon;
            }
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

struct Runner {
    std::vector<CheckResult> results;
    bool inject_fault;

    void run(const std::string& name, const std::function<std::string()>& body) {
        const auto start = Clock::now();
        CheckResult r{name, true, 0.0, ""};
        try {
            r.detail = body();
            r.pass = r.detail.empty();
        } catch (const std::exception& e) {
            r.pass = false;
            r.detail = e.what();
        }
        r.seconds = std::chrono::duration<double>(Clock::now() - start).count();
        results.push_back(std::move(r));
    }
};

std::string check_rng_reference() {
    // Frozen outputs of the generator for seeds 0 and 42 (seeded via
    // splitmix64), cross-checked against an independent implementation.
    const std::uint64_t seed0[5] = {0x9170fbcd52e121fbULL, 0x2f37c5e420baab96ULL,
                                    0x35003ae0b23c53a9ULL, 0x06885c962950e453ULL,
                                    0x6bd74d485bf118caULL};
    const std::uint64_t seed42[5] = {0x797b0c1885b72c42ULL, 0x72d0fc844950d71dULL,
                                     0x5441fbd73ace3a73ULL, 0x619d00164873ca3fULL,
                                     0x64eabf0eb11c0418ULL};
    SeededRng a(0), b(42);
    for (int i = 0; i < 5; ++i) {
        if (a.next_u64() != seed0[i]) return "seed 0 deviates from the reference sequence";
        if (b.next_u64() != seed42[i]) return "seed 42 deviates from the reference sequence";
    }
    return "";
}

std::string check_rademacher() {
    SeededRng rng(7);
    const Vector z = rademacher(rng, 64);
    for (double v : z)
        if (v != 1.0 && v != -1.0) return "entry outside {-1,+1}";
    SeededRng r1(3), r2(3);
    if (rademacher(r1, 16) != rademacher(r2, 16)) return "same seed produced different vectors";
    return "";
}

std::string check_deterministic_sum() {
    SeededRng rng(11);
    std::vector<Vector> xs(50, Vector(8));
    for (auto& x : xs)
        for (auto& v : x) v = rng.next_gaussian();
    const Vector s1 = deterministic_sum(xs, 8);
    const Vector s2 = deterministic_sum(xs, 8);
    if (s1 != s2) return "two identical invocations differ";
    if (deterministic_sum({}, 3) != Vector(3, 0.0)) return "empty sum is not zero";
    return "";
}

std::string check_hutchinson(bool inject_fault) {
    // Diagonal Hessian: a single sample is already exact.
    QuadraticProbe diag_model(Matrix(2, 2, {2.0, 0.0, 0.0, 3.0}));
    SeededRng rng(5);
    const std::vector<std::size_t> batch{0};
    Vector est = hutchinson_diag(diag_model, Vector(2, 0.0), batch, 1, rng);
    if (inject_fault)
        for (double& v : est) v = -v;
    if (std::abs(est[0] - 2.0) > 0.0 || std::abs(est[1] - 3.0) > 0.0)
        return "diagonal Hessian not recovered exactly";

    // Full enumeration over a dense symmetric matrix reproduces the diagonal.
    SeededRng gen(9);
    const std::size_t d = 6;
    const Matrix h = random_symmetric(d, gen);
    QuadraticProbe model(h);
    Vector mean(d, 0.0);
    const std::size_t count = std::size_t{1} << d;
    for (std::size_t mask = 0; mask < count; ++mask) {
        Vector z(d);
        for (std::size_t j = 0; j < d; ++j) z[j] = (mask >> j) & 1 ? 1.0 : -1.0;
        const Vector hz = model.hvp(Vector(d, 0.0), z, batch);
        for (std::size_t j = 0; j < d; ++j) mean[j] += z[j] * hz[j];
    }
    for (std::size_t j = 0; j < d; ++j) {
        double v = mean[j] / static_cast<double>(count);
        if (inject_fault) v = -v;
        if (std::abs(v - h(j, j)) > 1e-12) return "sign-vector enumeration missed the diagonal";
    }
    return "";
}

std::string check_hutchinson_sampled() {
    SeededRng gen(13);
    const std::size_t d = 10;
    const Matrix h = random_symmetric(d, gen);
    QuadraticProbe model(h);
    const std::vector<std::size_t> batch{0};
    const std::size_t samples = 10000;
    SeededRng rng(17);
    const Vector est = hutchinson_diag(model, Vector(d, 0.0), batch, samples, rng);
    for (std::size_t j = 0; j < d; ++j) {
        // Var[z_j (Hz)_j] = sum_{k != j} H_jk^2 for Rademacher z.
        double var = 0.0;
        for (std::size_t k = 0; k < d; ++k)
            if (k != j) var += h(j, k) * h(j, k);
        const double stderr_j = std::sqrt(var / static_cast<double>(samples));
        if (std::abs(est[j] - h(j, j)) > 5.0 * stderr_j)
            return "sampled estimate outside 5 standard errors at entry " + std::to_string(j);
    }
    return "";
}

std::string check_logistic_fd() {
    SeededRng rng(21);
    const Dataset ds = random_binary_dataset(12, 5, rng);
    for (double mu : {0.0, 0.1}) {
        LogisticModel model(ds, mu);
        for (int probe = 0; probe < 25; ++probe) {
            Vector w(model.dim());
            for (auto& v : w) v = 0.5 * rng.next_gaussian();
            const std::size_t i = rng.next_below(ds.n());
            const Vector g = model.grad_i(w, i);
            const Vector g_fd = fd_grad(model, w, i, 1e-6);
            if (norm2(sub(g, g_fd)) > 1e-6 * (1.0 + norm2(g)))
                return "gradient deviates from finite differences";
            const Matrix h = model.hess_i(w, i);
            const Matrix h_fd = fd_hess(model, w, i, 1e-6);
            if (h.max_abs_diff(h_fd) > 1e-5)
                return "analytic Hessian deviates from finite differences";
        }
    }
    return "";
}

std::string check_mlp_fd() {
    SeededRng rng(23);
    Matrix x(9, 4);
    std::vector<int> y(9);
    for (std::size_t i = 0; i < 9; ++i) {
        y[i] = static_cast<int>(i % 3);
        for (std::size_t j = 0; j < 4; ++j) x(i, j) = rng.next_gaussian();
    }
    const Dataset ds = make_dataset(std::move(x), std::move(y), "verify-mlp");
    ToyMlp model(ds, 6, 1e-4);
    SeededRng init(29);
    for (int probe = 0; probe < 10; ++probe) {
        Vector w = model.init_params(init);
        const std::size_t i = rng.next_below(ds.n());
        const Vector g = model.grad_i(w, i);
        const Vector g_fd = fd_grad(model, w, i, 1e-6);
        if (norm2(sub(g, g_fd)) > 1e-6 * (1.0 + norm2(g)))
            return "MLP gradient deviates from finite differences";

        // The proxy is the loss gradient w.r.t. the softmax inputs, which is
        // exactly the bias block of the last layer.
        const Vector proxy = model.proxy_grad_i(w, i);
        const std::size_t b2_offset = model.dim() - proxy.size();
        for (std::size_t c = 0; c < proxy.size(); ++c)
            if (proxy[c] != g[b2_offset + c]) return "proxy gradient != last-layer bias gradient";

        const Vector p = model.predict_proba(w, i);
        double sum = 0.0;
        for (double v : p) sum += v;
        if (std::abs(sum - 1.0) > 1e-9) return "softmax row does not sum to 1";
    }
    return "";
}

std::string check_submodularity() {
    SeededRng rng(31);
    for (int instance = 0; instance < 40; ++instance) {
        const std::size_t n = 4 + rng.next_below(7);
        const std::size_t p = 1 + rng.next_below(4);
        const SelectionFeatures feats = random_features(n, p, rng);
        const DistanceOracle dist(feats);
        for (int trial = 0; trial < 20; ++trial) {
            // Random chain S subset of T, e outside T.
            std::vector<std::size_t> s_set, t_set;
            const std::size_t e = rng.next_below(n);
            for (std::size_t c = 0; c < n; ++c) {
                if (c == e) continue;
                const double u = rng.next_double();
                if (u < 0.3) {
                    s_set.push_back(c);
                    t_set.push_back(c);
                } else if (u < 0.6) {
                    t_set.push_back(c);
                }
            }
            const auto cov_s = chain_cov(dist, s_set);
            const auto cov_t = chain_cov(dist, t_set);
            if (chain_gain(dist, cov_s, e) < chain_gain(dist, cov_t, e))
                return "diminishing returns violated";
            double f_s = 0.0, f_t = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                f_s += dist.phantom() - cov_s[i];
                f_t += dist.phantom() - cov_t[i];
            }
            if (f_s > f_t) return "monotonicity violated";
        }
    }
    return "";
}

std::string check_lazy_equals_naive() {
    SeededRng rng(37);
    for (int instance = 0; instance < 30; ++instance) {
        const std::size_t n = 5 + rng.next_below(30);
        const SelectionFeatures feats = random_features(n, 2, rng);
        const DistanceOracle dist(feats);
        const std::size_t budget = 1 + rng.next_below(n);
        SeededRng r1(0), r2(0);
        const GreedyResult naive =
            greedy_select(dist, BudgetStop{budget}, {GreedyMode::naive}, r1);
        const GreedyResult lazy = greedy_select(dist, BudgetStop{budget}, {GreedyMode::lazy}, r2);
        if (naive.order != lazy.order) return "selection order differs";
        if (naive.weights != lazy.weights) return "weights differ";
    }
    return "";
}

std::string check_cover_guarantee() {
    SeededRng rng(41);
    for (int instance = 0; instance < 10; ++instance) {
        const std::size_t n = 6 + rng.next_below(5);
        const SelectionFeatures feats = random_features(n, 2, rng);
        const DistanceOracle dist(feats);
        const double l_single =
            facility_objective(dist, std::vector<std::size_t>{0}).coverage_sum;
        const double epsilon = 0.35 * l_single;
        SeededRng r(0);
        const GreedyResult greedy = greedy_select(dist, EpsilonStop{epsilon}, {GreedyMode::lazy}, r);
        if (greedy.residual > epsilon && greedy.order.size() < n)
            return "greedy stopped above epsilon";
        const std::size_t optimal = brute_force_cover_size(dist, epsilon);
        double max_f = 0.0;
        const std::vector<double> empty_cov(n, dist.phantom());
        for (std::size_t e = 0; e < n; ++e) max_f = std::max(max_f, chain_gain(dist, empty_cov, e));
        const double bound = (1.0 + std::log(std::max(max_f, 1.0))) * static_cast<double>(optimal);
        if (static_cast<double>(greedy.order.size()) > bound)
            return "greedy size exceeds the logarithmic bound";
    }
    return "";
}

std::string check_weights_and_bound() {
    SeededRng rng(43);
    for (int instance = 0; instance < 10; ++instance) {
        const Dataset ds = random_binary_dataset(40 + rng.next_below(40), 3, rng);
        LogisticModel model(ds, 0.05);
        Vector w(model.dim());
        for (auto& v : w) v = 0.3 * rng.next_gaussian();
        EmaState unused;
        PreconditionerConfig pc;
        SelectionReport report;
        SeededRng sel(7);
        const Coreset cs = per_class_select(
            ds,
            [&](std::span<const std::size_t> idx) {
                return selection_features(model, w, unused, pc, FeatureMode::gradient_only, idx);
            },
            0.2, {}, sel, &report);
        for (const auto& [cls, pair] : cs.per_class) {
            double sum = 0.0;
            for (double g : pair.second) {
                if (g < 1.0 || g != std::floor(g)) return "weight not a positive integer count";
                sum += g;
            }
            if (sum != static_cast<double>(ds.class_index[cls].size()))
                return "class weights do not sum to the class size";
        }
        if (report.feature_error > cs.residual + 1e-9)
            return "weighted-sum error exceeds the facility residual";
    }
    return "";
}

std::string check_craig_reduction() {
    SeededRng rng(47);
    for (int instance = 0; instance < 10; ++instance) {
        const Dataset ds = random_binary_dataset(30 + rng.next_below(20), 3, rng);
        LogisticModel model(ds, 0.05);
        Vector w(model.dim());
        for (auto& v : w) v = 0.3 * rng.next_gaussian();
        EmaState ema;
        ema = ema_update_hess(std::move(ema), Vector(model.proxy_dim(), 1.0));
        PreconditionerConfig pc;
        pc.hessian_power = 0.0;  // unit preconditioner, exact identity
        SeededRng r1(1), r2(1);
        const Coreset grad_only = per_class_select(
            ds,
            [&](std::span<const std::size_t> idx) {
                return selection_features(model, w, ema, pc, FeatureMode::gradient_only, idx);
            },
            0.15, {}, r1);
        const Coreset preconditioned = per_class_select(
            ds,
            [&](std::span<const std::size_t> idx) {
                return selection_features(model, w, ema, pc, FeatureMode::preconditioned, idx);
            },
            0.15, {}, r2);
        if (grad_only.indices != preconditioned.indices) return "selected indices differ";
        if (grad_only.weights != preconditioned.weights) return "weights differ";
    }
    return "";
}

std::string check_ema() {
    EmaState s;
    s.beta1 = 0.5;
    s.beta2 = 0.9;
    s = ema_update_grad(std::move(s), Vector{3.0});
    if (s.g_bar != Vector{3.0}) return "first gradient update is not the observation";
    s = ema_update_grad(std::move(s), Vector{3.0});
    if (std::abs(s.g_bar[0] - 3.0) > 1e-15) return "constant stream is not a fixed point";

    EmaState h;
    h.beta2 = 0.9;
    h = ema_update_hess(std::move(h), Vector{-3.0});
    if (h.h_bar != Vector{3.0}) return "first curvature update is not |observation|";
    EmaState seq;
    seq.beta2 = 0.9;
    seq = ema_update_hess(std::move(seq), Vector{1.0});
    seq = ema_update_hess(std::move(seq), Vector{2.0});
    const double expected = std::sqrt((0.9 * 0.1 * 1.0 + 0.1 * 4.0) / (1.0 - 0.81));
    if (std::abs(seq.h_bar[0] - expected) > 1e-12) return "two-step EMA value wrong";
    return "";
}

std::string check_newton_quadratic() {
    // Realizable least squares: Newton converges in one step at lr 1.
    Matrix x(4, 2, {1.0, 0.0, 0.0, 1.0, 1.0, 1.0, 1.0, -1.0});
    const Vector w_true{0.7, -0.3};
    Vector targets(4);
    for (std::size_t i = 0; i < 4; ++i) targets[i] = dot(Vector(x.row(i).begin(), x.row(i).end()), w_true);
    const Dataset ds = make_dataset(std::move(x), {0, 0, 1, 1}, "quad");
    RidgeModel model(ds, 0.0, targets);
    OptimizerState state = OptimizerState::make(OptimizerKind::newton, Vector(2, 0.0), {});
    std::vector<WeightedIndex> batch;
    for (std::size_t i = 0; i < 4; ++i) batch.push_back({i, 1.0});
    newton_step(state, batch, model, 1.0);
    // The default damping (1e-8 tr(H)/d) bounds how exactly the step can land.
    if (full_loss(model, state.w) > 1e-14) return "one Newton step missed the optimum";
    return "";
}

std::string check_schedule() {
    Schedule exp_s;
    exp_s.kind = Schedule::Kind::exp_decay;
    exp_s.alpha0 = 0.1;
    exp_s.decay = 0.5;
    if (std::abs(schedule_lr(exp_s, 2) - 0.025) > 1e-15) return "exp decay wrong at epoch 2";
    Schedule warm;
    warm.alpha0 = 0.1;
    warm.warmup_epochs = 20;
    if (std::abs(schedule_lr(warm, 10) - 0.05) > 1e-15) return "warm-up wrong at epoch 10";
    if (schedule_lr(warm, 0) <= 0.0) return "rate not positive at epoch 0";
    return "";
}

}  // namespace

std::vector<CheckResult> run_verify(const VerifyOptions& opts) {
    Runner runner{{}, opts.inject_fault};
    runner.run("rng-reference-sequence", check_rng_reference);
    runner.run("rademacher-membership", check_rademacher);
    runner.run("deterministic-sum", check_deterministic_sum);
    runner.run("hutchinson-diagonal", [&] { return check_hutchinson(opts.inject_fault); });
    runner.run("hutchinson-sampled", check_hutchinson_sampled);
    runner.run("logistic-derivatives-fd", check_logistic_fd);
    runner.run("mlp-derivatives-fd", check_mlp_fd);
    runner.run("submodularity-monotonicity", check_submodularity);
    runner.run("lazy-equals-naive", check_lazy_equals_naive);
    runner.run("cover-guarantee", check_cover_guarantee);
    runner.run("weights-and-estimate-bound", check_weights_and_bound);
    runner.run("craig-reduction", check_craig_reduction);
    runner.run("ema-fixed-points", check_ema);
    runner.run("newton-one-step-quadratic", check_newton_quadratic);
    runner.run("schedule-values", check_schedule);
    return std::move(runner.results);
}

bool all_passed(const std::vector<CheckResult>& results) {
    for (const auto& r : results)
        if (!r.pass) return false;
    return true;
}

}  // namespace corekit
