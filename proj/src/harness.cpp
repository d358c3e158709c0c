#include "corekit/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numeric>
#include <unordered_set>

namespace corekit {

const char* to_string(SelectionMethod m) {
    switch (m) {
        case SelectionMethod::adacore: return "adacore";
        case SelectionMethod::craig_mode: return "craig_mode";
        case SelectionMethod::random: return "random";
        case SelectionMethod::full: return "full";
        case SelectionMethod::convex_one_shot: return "convex_one_shot";
    }
    return "?";
}

const char* to_string(ModelKind m) {
    switch (m) {
        case ModelKind::logistic: return "logistic";
        case ModelKind::ridge: return "ridge";
        case ModelKind::toy_mlp: return "toy_mlp";
    }
    return "?";
}

const char* to_string(OptimizerKind k) {
    switch (k) {
        case OptimizerKind::sgd: return "sgd";
        case OptimizerKind::newton: return "newton";
        case OptimizerKind::diag_newton: return "diag_newton";
    }
    return "?";
}

void ExperimentConfig::validate() const {
    if (!(fraction > 0.0) || fraction > 1.0)
        throw ConfigError("selection.fraction: must be in (0, 1], got " + std::to_string(fraction));
    if (refresh_period < 1) throw ConfigError("selection.refresh_period: must be >= 1");
    if (epochs < 1) throw ConfigError("run.epochs: must be >= 1");
    if (batch_size < 1) throw ConfigError("run.batch_size: must be >= 1");
    if (method == SelectionMethod::convex_one_shot && model_kind == ModelKind::toy_mlp)
        throw ConfigError("selection.method: convex_one_shot requires a convex model");
    if (optimizer == OptimizerKind::newton && model_kind == ModelKind::toy_mlp)
        throw ConfigError("optim.kind: newton requires per-example Hessians");
    schedule.validate();
    precond.validate();
}

std::unique_ptr<ModelSpec> make_model(const ExperimentConfig& cfg, const Dataset& ds) {
    switch (cfg.model_kind) {
        case ModelKind::logistic: return std::make_unique<LogisticModel>(ds, cfg.mu);
        case ModelKind::ridge: return std::make_unique<RidgeModel>(ds, cfg.lambda);
        case ModelKind::toy_mlp: return std::make_unique<ToyMlp>(ds, cfg.hidden, cfg.weight_decay);
    }
    throw ConfigError("model.kind: unknown");
}

double normalized_grad_diff(const ModelSpec& model, const Vector& w, const Coreset& coreset) {
    if (coreset.indices.empty()) throw InvalidInputError("grad_diff: empty coreset");
    // Mirrors full_grad's accumulate-then-scale arithmetic so the full
    // coreset with unit weights cancels exactly.
    const double inv_n = 1.0 / static_cast<double>(model.n());
    const Vector g_full = full_grad(model, w);
    Vector acc(model.dim(), 0.0);
    for (std::size_t k = 0; k < coreset.indices.size(); ++k)
        axpy(coreset.weights[k], model.grad_i(w, coreset.indices[k]), acc);
    const Vector g_coreset = scaled(acc, inv_n);
    const double denom = norm2(g_full);
    if (denom == 0.0) return 0.0;
    return norm2(sub(g_full, g_coreset)) / denom;
}

void forgetting_update(PerExampleStats& stats, std::span<const int> predictions,
                       std::span<const int> labels) {
    if (predictions.size() != labels.size() || predictions.size() != stats.forgetting.size())
        throw DimensionError("forgetting_update: size mismatch");
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        const bool correct = predictions[i] == labels[i];
        if (stats.evaluated[i] && stats.last_correct[i] && !correct) stats.forgetting[i] += 1;
        stats.last_correct[i] = correct ? 1 : 0;
        stats.evaluated[i] = 1;
    }
}

Vector uncertainty(const Matrix& predictions) {
    Vector entropy(predictions.rows());
    for (std::size_t i = 0; i < predictions.rows(); ++i) {
        const auto row = predictions.row(i);
        double sum = 0.0, h = 0.0;
        for (double p : row) {
            if (p < 0.0) throw InvalidInputError("uncertainty: negative probability");
            sum += p;
            if (p > 0.0) h -= p * std::log(p);
        }
        if (std::abs(sum - 1.0) > 1e-6)
            throw InvalidInputError("uncertainty: row " + std::to_string(i) +
                                    " is not a probability vector");
        entropy[i] = h;
    }
    return entropy;
}

namespace {

struct Stopwatch {
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
};

Vector initial_params(const ExperimentConfig& cfg, const ModelSpec& model, SeededRng& rng) {
    if (const auto* mlp = dynamic_cast<const ToyMlp*>(&model)) return mlp->init_params(rng);
    (void)cfg;
    return Vector(model.dim(), 0.0);
}

// Selection refresh: builds the coreset for the configured method at the
// current parameters. The Hessian EMA is advanced only on the shared
// (Hutchinson) path.
Coreset refresh_coreset(const ExperimentConfig& cfg, const ModelSpec& model, const Vector& w,
                        EmaState& sel_ema, SeededRng& sel_rng, SelectionReport* report) {
    switch (cfg.method) {
        case SelectionMethod::full:
            return full_coreset(cfg.train);
        case SelectionMethod::random:
            return random_select(cfg.train, cfg.fraction, sel_rng);
        case SelectionMethod::convex_one_shot:
            return convex_one_shot(cfg.train, cfg.fraction, cfg.greedy, sel_rng, report);
        case SelectionMethod::craig_mode: {
            EmaState unused;
            return per_class_select(
                cfg.train,
                [&](std::span<const std::size_t> idx) {
                    return selection_features(model, w, unused, cfg.precond,
                                              FeatureMode::gradient_only, idx);
                },
                cfg.fraction, cfg.greedy, sel_rng, report);
        }
        case SelectionMethod::adacore: {
            const bool per_example = cfg.precond.per_example_hessian && model.has_hess_diag();
            if (!per_example) {
                // b_H sample of the training data for the curvature estimate.
                std::vector<std::size_t> pool(model.n());
                std::iota(pool.begin(), pool.end(), 0);
                const std::size_t b = std::min(cfg.precond.hessian_batch, pool.size());
                for (std::size_t k = 0; k < b; ++k) {
                    const std::size_t j =
                        k + static_cast<std::size_t>(sel_rng.next_below(pool.size() - k));
                    std::swap(pool[k], pool[j]);
                }
                pool.resize(b);
                const Vector diag = hutchinson_proxy_diag(model, w, pool,
                                                          cfg.precond.hutchinson_samples, sel_rng);
                sel_ema = ema_update_hess(std::move(sel_ema), diag);
                Vector mean_proxy(model.proxy_dim(), 0.0);
                for (std::size_t i : pool) axpy(1.0, model.proxy_grad_i(w, i), mean_proxy);
                sel_ema = ema_update_grad(std::move(sel_ema),
                                          scaled(mean_proxy, 1.0 / static_cast<double>(b)));
            }
            return per_class_select(
                cfg.train,
                [&](std::span<const std::size_t> idx) {
                    return selection_features(model, w, sel_ema, cfg.precond,
                                              FeatureMode::preconditioned, idx);
                },
                cfg.fraction, cfg.greedy, sel_rng, report);
        }
    }
    throw ConfigError("selection.method: unknown");
}

void evaluate_examples(const ModelSpec& model, const Vector& w, PerExampleStats& stats) {
    if (!model.has_predict_proba()) return;
    const std::size_t n = model.n();
    std::vector<int> predictions(n);
    Matrix probs(n, model.predict_proba(w, 0).size());
    for (std::size_t i = 0; i < n; ++i) {
        const Vector p = model.predict_proba(w, i);
        std::copy(p.begin(), p.end(), probs.row(i).begin());
        predictions[i] =
            static_cast<int>(std::max_element(p.begin(), p.end()) - p.begin());
    }
    forgetting_update(stats, predictions, model.dataset().labels);
    stats.entropy = uncertainty(probs);
}

}  // namespace

Coreset select_once(const ExperimentConfig& cfg) {
    cfg.validate();
    const std::unique_ptr<ModelSpec> model = make_model(cfg, cfg.train);
    SeededRng sel_rng(cfg.seed);
    SeededRng init_rng(cfg.seed + 2);
    const Vector w0 = initial_params(cfg, *model, init_rng);
    EmaState sel_ema;
    sel_ema.beta1 = cfg.precond.ema_beta1;
    sel_ema.beta2 = cfg.precond.ema_beta2;
    return refresh_coreset(cfg, *model, w0, sel_ema, sel_rng, nullptr);
}

RunResult run_experiment(const ExperimentConfig& cfg) {
    cfg.validate();

    const std::unique_ptr<ModelSpec> model = make_model(cfg, cfg.train);
    std::unique_ptr<ModelSpec> test_model;
    if (cfg.test) test_model = make_model(cfg, *cfg.test);

    SeededRng sel_rng(cfg.seed);
    SeededRng batch_rng(cfg.seed + 1);
    SeededRng init_rng(cfg.seed + 2);
    SeededRng hutch_rng(cfg.seed + 3);

    OptimizerState opt = OptimizerState::make(
        cfg.optimizer, initial_params(cfg, *model, init_rng), cfg.schedule);
    opt.beta = cfg.momentum;
    opt.hessian_power = cfg.hessian_power;
    opt.damping = cfg.damping;

    EmaState sel_ema;
    sel_ema.beta1 = cfg.precond.ema_beta1;
    sel_ema.beta2 = cfg.precond.ema_beta2;
    EmaState opt_ema = sel_ema;  // parameter-space EMAs for diag_newton

    RunResult result;
    result.stats = PerExampleStats(model->n());
    Coreset coreset;
    std::unordered_set<std::size_t> distinct;
    Stopwatch clock;

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        const bool one_shot =
            cfg.method == SelectionMethod::full || cfg.method == SelectionMethod::convex_one_shot;
        const bool refresh = one_shot ? epoch == 0 : epoch % cfg.refresh_period == 0;
        if (refresh) {
            SelectionReport report;
            coreset = refresh_coreset(cfg, *model, opt.w, sel_ema, sel_rng, &report);
            result.refreshes.push_back({epoch, coreset.residual, report.feature_error, coreset});
            for (std::size_t idx : coreset.indices) {
                result.stats.selection_count[idx] += 1;
                distinct.insert(idx);
            }
            if (!cfg.output_dir.empty())
                save_coreset_csv(coreset, cfg.output_dir + "/coreset_epoch" +
                                              std::to_string(epoch) + ".csv");
        }

        // Weighted mini-batches over a fresh shuffle of the coreset.
        std::vector<std::size_t> order(coreset.indices.size());
        std::iota(order.begin(), order.end(), 0);
        batch_rng.shuffle(order);
        const double lr = schedule_lr(cfg.schedule, epoch);
        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
            const std::size_t stop = std::min(order.size(), start + cfg.batch_size);
            std::vector<WeightedIndex> batch;
            batch.reserve(stop - start);
            for (std::size_t k = start; k < stop; ++k)
                batch.push_back({coreset.indices[order[k]], coreset.weights[order[k]]});
            switch (cfg.optimizer) {
                case OptimizerKind::sgd:
                    sgd_momentum_step(opt, batch, *model, lr);
                    break;
                case OptimizerKind::newton:
                    newton_step(opt, batch, *model, lr);
                    break;
                case OptimizerKind::diag_newton: {
                    opt_ema = ema_update_grad(std::move(opt_ema),
                                              batch_grad(*model, opt.w, batch));
                    std::vector<std::size_t> hbatch;
                    const std::size_t b = std::min(cfg.precond.hessian_batch, batch.size());
                    hbatch.reserve(b);
                    for (std::size_t k = 0; k < b; ++k) hbatch.push_back(batch[k].index);
                    opt_ema = ema_update_hess(
                        std::move(opt_ema),
                        hutchinson_diag(*model, opt.w, hbatch, cfg.precond.hutchinson_samples,
                                        hutch_rng));
                    diag_newton_step(opt, opt_ema, lr);
                    break;
                }
            }
        }

        MetricsRecord rec{};
        rec.epoch = epoch;
        rec.train_loss = full_loss(*model, opt.w);
        rec.grad_diff = normalized_grad_diff(*model, opt.w, coreset);
        rec.test_acc = test_model ? accuracy(*test_model, opt.w)
                                  : std::numeric_limits<double>::quiet_NaN();
        rec.distinct_frac =
            static_cast<double>(distinct.size()) / static_cast<double>(model->n());
        evaluate_examples(*model, opt.w, result.stats);
        rec.seconds = clock.seconds();
        result.metrics.push_back(rec);
    }

    // Residuals against the best full-data loss this run reached.
    double best = std::numeric_limits<double>::infinity();
    for (const auto& rec : result.metrics) best = std::min(best, rec.train_loss);
    for (auto& rec : result.metrics) rec.loss_residual = rec.train_loss - best;

    result.final_w = opt.w;
    if (!cfg.output_dir.empty()) {
        write_metrics_csv(result.metrics, cfg.output_dir + "/metrics.csv");
        write_selection_counts_csv(result.stats, cfg.output_dir + "/selection_counts.csv");
        write_per_example_csv(result.stats, cfg.output_dir + "/per_example.csv");
    }
    return result;
}

namespace {

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

void write_metrics_csv(const std::vector<MetricsRecord>& metrics, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw InvalidInputError("cannot open file for writing: " + path);
    out << "epoch,seconds,train_loss,loss_residual,test_acc,grad_diff,distinct_frac\n";
    for (const auto& r : metrics)
        out << r.epoch << ',' << fmt(r.seconds) << ',' << fmt(r.train_loss) << ','
            << fmt(r.loss_residual) << ',' << fmt(r.test_acc) << ',' << fmt(r.grad_diff) << ','
            << fmt(r.distinct_frac) << '\n';
}

void write_selection_counts_csv(const PerExampleStats& stats, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw InvalidInputError("cannot open file for writing: " + path);
    out << "index,count\n";
    for (std::size_t i = 0; i < stats.selection_count.size(); ++i)
        out << i << ',' << stats.selection_count[i] << '\n';
}

void write_per_example_csv(const PerExampleStats& stats, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw InvalidInputError("cannot open file for writing: " + path);
    out << "index,forgetting,entropy\n";
    for (std::size_t i = 0; i < stats.forgetting.size(); ++i)
        out << i << ',' << stats.forgetting[i] << ',' << fmt(stats.entropy[i]) << '\n';
}

}  // namespace corekit
