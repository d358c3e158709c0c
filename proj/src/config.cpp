#include "corekit/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace corekit {

namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return "";
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            parts.push_back(trim(cur));
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    parts.push_back(trim(cur));
    return parts;
}

}  // namespace

ConfigMap ConfigMap::parse(const std::string& text) {
    ConfigMap cfg;
    std::istringstream in(text);
    std::string line, section;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("config line " + std::to_string(line_no) + ": bad section header");
            section = trim(line.substr(1, line.size() - 2));
            if (section.empty())
                throw ConfigError("config line " + std::to_string(line_no) + ": empty section name");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
        if (section.empty())
            throw ConfigError("config line " + std::to_string(line_no) + ": key outside a section");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw ConfigError("config line " + std::to_string(line_no) + ": empty key");
        if (cfg.values_[section].count(key))
            throw ConfigError("config: duplicate key " + section + "." + key);
        cfg.values_[section][key] = value;
    }
    return cfg;
}

ConfigMap ConfigMap::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

void ConfigMap::set_override(const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos)
        throw ConfigError("override must look like section.key=value: " + assignment);
    const std::string path = trim(assignment.substr(0, eq));
    const auto dotpos = path.find('.');
    if (dotpos == std::string::npos)
        throw ConfigError("override must look like section.key=value: " + assignment);
    values_[path.substr(0, dotpos)][path.substr(dotpos + 1)] = trim(assignment.substr(eq + 1));
}

bool ConfigMap::has(const std::string& section, const std::string& key) const {
    const auto sec = values_.find(section);
    return sec != values_.end() && sec->second.count(key) > 0;
}

std::optional<std::string> ConfigMap::lookup(const std::string& section, const std::string& key) {
    consumed_.insert(section + "." + key);
    const auto sec = values_.find(section);
    if (sec == values_.end()) return {};
    const auto it = sec->second.find(key);
    if (it == sec->second.end()) return {};
    return it->second;
}

std::string ConfigMap::get_string(const std::string& section, const std::string& key,
                                  std::optional<std::string> fallback) {
    const auto v = lookup(section, key);
    if (v) return *v;
    if (fallback) return *fallback;
    throw ConfigError("missing required config key " + section + "." + key);
}

double ConfigMap::get_double(const std::string& section, const std::string& key,
                             std::optional<double> fallback) {
    const auto v = lookup(section, key);
    if (!v) {
        if (fallback) return *fallback;
        throw ConfigError("missing required config key " + section + "." + key);
    }
    try {
        std::size_t pos = 0;
        const double out = std::stod(*v, &pos);
        if (pos != v->size()) throw std::invalid_argument("trailing");
        return out;
    } catch (const std::exception&) {
        throw ConfigError(section + "." + key + ": expected a number, got '" + *v + "'");
    }
}

std::size_t ConfigMap::get_size(const std::string& section, const std::string& key,
                                std::optional<std::size_t> fallback) {
    const auto v = lookup(section, key);
    if (!v) {
        if (fallback) return *fallback;
        throw ConfigError("missing required config key " + section + "." + key);
    }
    try {
        std::size_t pos = 0;
        const long long out = std::stoll(*v, &pos);
        if (pos != v->size() || out < 0) throw std::invalid_argument("bad");
        return static_cast<std::size_t>(out);
    } catch (const std::exception&) {
        throw ConfigError(section + "." + key + ": expected a non-negative integer, got '" + *v +
                          "'");
    }
}

std::uint64_t ConfigMap::get_u64(const std::string& section, const std::string& key,
                                 std::optional<std::uint64_t> fallback) {
    const auto v = lookup(section, key);
    if (!v) {
        if (fallback) return *fallback;
        throw ConfigError("missing required config key " + section + "." + key);
    }
    try {
        std::size_t pos = 0;
        const unsigned long long out = std::stoull(*v, &pos);
        if (pos != v->size()) throw std::invalid_argument("bad");
        return out;
    } catch (const std::exception&) {
        throw ConfigError(section + "." + key + ": expected an unsigned integer, got '" + *v + "'");
    }
}

bool ConfigMap::get_bool(const std::string& section, const std::string& key,
                         std::optional<bool> fallback) {
    const auto v = lookup(section, key);
    if (!v) {
        if (fallback) return *fallback;
        throw ConfigError("missing required config key " + section + "." + key);
    }
    if (*v == "true" || *v == "1") return true;
    if (*v == "false" || *v == "0") return false;
    throw ConfigError(section + "." + key + ": expected true/false, got '" + *v + "'");
}

std::vector<double> ConfigMap::get_doubles(const std::string& section, const std::string& key,
                                           std::optional<std::vector<double>> fallback) {
    const auto v = lookup(section, key);
    if (!v) {
        if (fallback) return *fallback;
        throw ConfigError("missing required config key " + section + "." + key);
    }
    std::vector<double> out;
    for (const auto& part : split(*v, ',')) {
        try {
            std::size_t pos = 0;
            out.push_back(std::stod(part, &pos));
            if (pos != part.size()) throw std::invalid_argument("trailing");
        } catch (const std::exception&) {
            throw ConfigError(section + "." + key + ": expected numbers, got '" + part + "'");
        }
    }
    return out;
}

std::vector<std::size_t> ConfigMap::get_sizes(const std::string& section, const std::string& key,
                                              std::optional<std::vector<std::size_t>> fallback) {
    const auto v = lookup(section, key);
    if (!v) {
        if (fallback) return *fallback;
        throw ConfigError("missing required config key " + section + "." + key);
    }
    if (trim(*v).empty()) return {};
    std::vector<std::size_t> out;
    for (const auto& part : split(*v, ',')) {
        try {
            std::size_t pos = 0;
            const long long x = std::stoll(part, &pos);
            if (pos != part.size() || x < 0) throw std::invalid_argument("bad");
            out.push_back(static_cast<std::size_t>(x));
        } catch (const std::exception&) {
            throw ConfigError(section + "." + key + ": expected integers, got '" + part + "'");
        }
    }
    return out;
}

void ConfigMap::ensure_all_consumed() const {
    std::vector<std::string> unknown;
    for (const auto& [section, keys] : values_)
        for (const auto& [key, value] : keys)
            if (!consumed_.count(section + "." + key)) unknown.push_back(section + "." + key);
    if (!unknown.empty()) {
        std::string msg = "unknown config keys:";
        for (const auto& k : unknown) msg += " " + k;
        throw ConfigError(msg);
    }
}

void ConfigMap::ensure_section_consumed(const std::string& section) const {
    const auto sec = values_.find(section);
    if (sec == values_.end()) return;
    std::vector<std::string> unknown;
    for (const auto& [key, value] : sec->second)
        if (!consumed_.count(section + "." + key)) unknown.push_back(section + "." + key);
    if (!unknown.empty()) {
        std::string msg = "unknown config keys:";
        for (const auto& k : unknown) msg += " " + k;
        throw ConfigError(msg);
    }
}

namespace {

// class_means: classes split by '|', clusters by ';', coordinates by ','.
// class_scales: classes by '|', one scalar per cluster split by ';'.
std::vector<std::vector<Cluster>> parse_clusters(const std::string& means_text,
                                                 const std::string& scales_text, std::size_t d) {
    const auto mean_classes = split(means_text, '|');
    const auto scale_classes = split(scales_text, '|');
    if (mean_classes.size() != scale_classes.size())
        throw ConfigError("data.class_scales: class count differs from data.class_means");
    std::vector<std::vector<Cluster>> out(mean_classes.size());
    for (std::size_t c = 0; c < mean_classes.size(); ++c) {
        const auto mean_clusters = split(mean_classes[c], ';');
        const auto scale_clusters = split(scale_classes[c], ';');
        if (mean_clusters.size() != scale_clusters.size())
            throw ConfigError("data.class_scales: cluster count differs from data.class_means");
        for (std::size_t k = 0; k < mean_clusters.size(); ++k) {
            Cluster cl;
            for (const auto& coord : split(mean_clusters[k], ',')) {
                try {
                    cl.mean.push_back(std::stod(coord));
                } catch (const std::exception&) {
                    throw ConfigError("data.class_means: expected numbers, got '" + coord + "'");
                }
            }
            if (cl.mean.size() != d)
                throw ConfigError("data.class_means: cluster mean has wrong dimension");
            try {
                cl.scale = std::stod(scale_clusters[k]);
            } catch (const std::exception&) {
                throw ConfigError("data.class_scales: expected numbers, got '" +
                                  scale_clusters[k] + "'");
            }
            out[c].push_back(std::move(cl));
        }
    }
    return out;
}

}  // namespace

SyntheticConfig parse_synthetic(ConfigMap& cfg) {
    const std::string kind = cfg.get_string("data", "kind", "synthetic");
    if (kind != "synthetic")
        throw ConfigError("data.kind: synthetic generation needs kind = synthetic, got '" + kind +
                          "'");
    SyntheticConfig out;
    auto& spec = out.train_spec;
    spec.n = cfg.get_size("data", "n");
    spec.d = cfg.get_size("data", "d");
    spec.seed = cfg.get_u64("data", "seed", 0);
    spec.class_fractions = cfg.get_doubles("data", "class_fractions");
    spec.clusters = parse_clusters(cfg.get_string("data", "class_means"),
                                   cfg.get_string("data", "class_scales"), spec.d);
    out.test_n = cfg.get_size("data", "test_n", spec.n / 4);
    try {
        spec.validate();
    } catch (const std::exception& e) {
        throw ConfigError(std::string("data: ") + e.what());
    }
    return out;
}

ExperimentConfig build_experiment(ConfigMap& cfg) {
    ExperimentConfig out;

    const std::string data_kind = cfg.get_string("data", "kind");
    if (data_kind == "libsvm") {
        std::optional<std::size_t> dim_hint;
        if (cfg.has("data", "dim_hint")) dim_hint = cfg.get_size("data", "dim_hint");
        out.train = load_libsvm(cfg.get_string("data", "train_path"), dim_hint);
        const std::string test_path = cfg.get_string("data", "test_path", "");
        if (!test_path.empty()) out.test = load_libsvm(test_path, dim_hint);
    } else if (data_kind == "synthetic") {
        SyntheticConfig synth = parse_synthetic(cfg);
        out.train = generate_synthetic(synth.train_spec);
        if (synth.test_n > 0) {
            SyntheticSpec test_spec = synth.train_spec;
            test_spec.n = synth.test_n;
            test_spec.seed = synth.train_spec.seed + 1;
            out.test = generate_synthetic(test_spec);
        }
    } else {
        throw ConfigError("data.kind: expected libsvm or synthetic, got '" + data_kind + "'");
    }
    const double divisor = cfg.get_double("data", "normalize_divisor", 0.0);
    if (divisor != 0.0) {
        out.train = normalize_01(out.train, divisor);
        if (out.test) out.test = normalize_01(*out.test, divisor);
    }
    if (cfg.get_bool("data", "standardize", false)) {
        out.train = standardize(out.train);
        if (out.test) out.test = standardize(*out.test);
    }

    const std::string model_kind = cfg.get_string("model", "kind", "logistic");
    if (model_kind == "logistic") out.model_kind = ModelKind::logistic;
    else if (model_kind == "ridge") out.model_kind = ModelKind::ridge;
    else if (model_kind == "toy_mlp") out.model_kind = ModelKind::toy_mlp;
    else throw ConfigError("model.kind: expected logistic, ridge or toy_mlp, got '" +
                           model_kind + "'");
    out.mu = cfg.get_double("model", "mu", out.mu);
    out.lambda = cfg.get_double("model", "lambda", out.lambda);
    out.weight_decay = cfg.get_double("model", "weight_decay", out.weight_decay);
    out.hidden = cfg.get_size("model", "hidden", out.hidden);

    const std::string opt_kind = cfg.get_string("optim", "kind", "sgd");
    if (opt_kind == "sgd") out.optimizer = OptimizerKind::sgd;
    else if (opt_kind == "newton") out.optimizer = OptimizerKind::newton;
    else if (opt_kind == "diag_newton") out.optimizer = OptimizerKind::diag_newton;
    else throw ConfigError("optim.kind: expected sgd, newton or diag_newton, got '" + opt_kind +
                           "'");
    const std::string sched = cfg.get_string("optim", "schedule", "constant");
    if (sched == "constant") out.schedule.kind = Schedule::Kind::constant;
    else if (sched == "exp_decay") out.schedule.kind = Schedule::Kind::exp_decay;
    else if (sched == "step_decay") out.schedule.kind = Schedule::Kind::step_decay;
    else throw ConfigError("optim.schedule: expected constant, exp_decay or step_decay, got '" +
                           sched + "'");
    out.schedule.alpha0 = cfg.get_double("optim", "alpha0", 0.1);
    out.schedule.decay = cfg.get_double("optim", "decay", 1.0);
    out.schedule.milestones = cfg.get_sizes("optim", "milestones", std::vector<std::size_t>{});
    out.schedule.factor = cfg.get_double("optim", "factor", 0.1);
    out.schedule.warmup_epochs = cfg.get_size("optim", "warmup_epochs", 0);
    out.momentum = cfg.get_double("optim", "momentum", 0.9);
    out.hessian_power = cfg.get_double("optim", "hessian_power", 1.0);
    out.damping = cfg.get_double("optim", "damping", 1e-8);

    out.precond.ema_beta1 = cfg.get_double("curvature", "beta1", 0.9);
    out.precond.ema_beta2 = cfg.get_double("curvature", "beta2", 0.999);
    out.precond.hessian_batch = cfg.get_size("curvature", "hessian_batch", 64);
    out.precond.hutchinson_samples = cfg.get_size("curvature", "hutchinson_samples", 1);
    out.precond.delta_floor = cfg.get_double("curvature", "delta_floor", 1e-12);
    out.precond.hessian_power = cfg.get_double("curvature", "hessian_power", 1.0);
    out.precond.per_example_hessian = cfg.get_bool("curvature", "per_example_hessian", false);

    const std::string method = cfg.get_string("selection", "method", "full");
    if (method == "adacore") out.method = SelectionMethod::adacore;
    else if (method == "craig_mode") out.method = SelectionMethod::craig_mode;
    else if (method == "random") out.method = SelectionMethod::random;
    else if (method == "full") out.method = SelectionMethod::full;
    else if (method == "convex_one_shot") out.method = SelectionMethod::convex_one_shot;
    else throw ConfigError("selection.method: expected adacore, craig_mode, random, full or "
                           "convex_one_shot, got '" + method + "'");
    out.fraction = cfg.get_double("selection", "fraction", 1.0);
    out.refresh_period = cfg.get_size("selection", "refresh_period", 1);
    const std::string greedy = cfg.get_string("selection", "greedy", "lazy");
    if (greedy == "naive") out.greedy.mode = GreedyMode::naive;
    else if (greedy == "lazy") out.greedy.mode = GreedyMode::lazy;
    else if (greedy == "stochastic") out.greedy.mode = GreedyMode::stochastic;
    else throw ConfigError("selection.greedy: expected naive, lazy or stochastic, got '" + greedy +
                           "'");
    out.greedy.sample_size = cfg.get_size("selection", "sample_size", 0);
    out.greedy.matrix_threshold =
        cfg.get_size("selection", "matrix_threshold", DistanceOracle::kDefaultMatrixThreshold);

    out.epochs = cfg.get_size("run", "epochs", 1);
    out.batch_size = cfg.get_size("run", "batch_size", 32);
    out.seed = cfg.get_u64("run", "seed", 0);
    out.output_dir = cfg.get_string("run", "output_dir", "");

    cfg.ensure_all_consumed();
    try {
        out.validate();
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(e.what());
    }
    return out;
}

}  // namespace corekit
