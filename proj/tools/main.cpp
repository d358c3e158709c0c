#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "corekit/config.hpp"
#include "corekit/harness.hpp"
#include "corekit/verify.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitConfig = 2;

// Output root: --out beats run.output_dir; relative paths land under
// COREKIT_OUT_ROOT when it is set.
std::string resolve_out_dir(const std::string& from_config, const std::string& from_flag) {
    std::string dir = !from_flag.empty() ? from_flag : from_config;
    if (dir.empty()) dir = "out";
    fs::path p(dir);
    if (p.is_relative()) {
        if (const char* root = std::getenv("COREKIT_OUT_ROOT"); root && *root)
            p = fs::path(root) / p;
    }
    fs::create_directories(p);
    return p.string();
}

corekit::ConfigMap load_config(const std::string& path, const std::vector<std::string>& sets) {
    corekit::ConfigMap cfg = corekit::ConfigMap::from_file(path);
    for (const auto& assignment : sets) cfg.set_override(assignment);
    return cfg;
}

int cmd_run(const std::string& config_path, const std::vector<std::string>& sets,
            const std::string& out_flag) {
    corekit::ConfigMap cfg = load_config(config_path, sets);
    corekit::ExperimentConfig exp = corekit::build_experiment(cfg);
    exp.output_dir = resolve_out_dir(exp.output_dir, out_flag);

    const corekit::RunResult result = corekit::run_experiment(exp);
    const auto& last = result.metrics.back();
    std::printf("run: %s/%s/%s epochs=%zu final_loss=%.6g test_acc=%.4g grad_diff=%.4g -> %s\n",
                corekit::to_string(exp.method), corekit::to_string(exp.model_kind),
                corekit::to_string(exp.optimizer), exp.epochs, last.train_loss, last.test_acc,
                last.grad_diff, exp.output_dir.c_str());
    return kExitOk;
}

int cmd_select(const std::string& config_path, const std::vector<std::string>& sets,
               const std::string& out_flag) {
    corekit::ConfigMap cfg = load_config(config_path, sets);
    corekit::ExperimentConfig exp = corekit::build_experiment(cfg);
    exp.output_dir = resolve_out_dir(exp.output_dir, out_flag);

    const corekit::Coreset coreset = corekit::select_once(exp);
    const std::string path = exp.output_dir + "/coreset.csv";
    corekit::save_coreset_csv(coreset, path);
    std::printf("select: %s picked %zu of %zu points (residual %.6g) -> %s\n",
                corekit::to_string(exp.method), coreset.indices.size(), exp.train.n(),
                coreset.residual, path.c_str());
    return kExitOk;
}

int cmd_synth(const std::string& config_path, const std::vector<std::string>& sets,
              const std::string& out_flag) {
    corekit::ConfigMap cfg = load_config(config_path, sets);
    const corekit::SyntheticConfig synth = corekit::parse_synthetic(cfg);
    const std::string out_dir =
        resolve_out_dir(cfg.get_string("run", "output_dir", ""), out_flag);
    cfg.ensure_section_consumed("data");

    const corekit::Dataset train = corekit::generate_synthetic(synth.train_spec);
    corekit::save_libsvm(train, out_dir + "/synthetic_train.libsvm");
    std::printf("synth: wrote %zu train examples to %s/synthetic_train.libsvm\n", train.n(),
                out_dir.c_str());
    if (synth.test_n > 0) {
        corekit::SyntheticSpec test_spec = synth.train_spec;
        test_spec.n = synth.test_n;
        test_spec.seed = synth.train_spec.seed + 1;
        const corekit::Dataset test = corekit::generate_synthetic(test_spec);
        corekit::save_libsvm(test, out_dir + "/synthetic_test.libsvm");
        std::printf("synth: wrote %zu test examples to %s/synthetic_test.libsvm\n", test.n(),
                    out_dir.c_str());
    }
    return kExitOk;
}

int cmd_verify(bool verbose, bool inject_fault) {
    const auto results = corekit::run_verify({verbose, inject_fault});
    for (const auto& r : results) {
        if (verbose)
            std::printf("[%s] %-28s (%.3fs)%s%s\n", r.pass ? "PASS" : "FAIL", r.name.c_str(),
                        r.seconds, r.detail.empty() ? "" : " ", r.detail.c_str());
        else
            std::printf("[%s] %s%s%s\n", r.pass ? "PASS" : "FAIL", r.name.c_str(),
                        r.detail.empty() ? "" : ": ", r.detail.c_str());
    }
    const bool ok = corekit::all_passed(results);
    std::printf("verify: %zu checks, %s\n", results.size(), ok ? "all passed" : "FAILURES");
    return ok ? kExitOk : kExitRuntime;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"coreset selection and data-efficient training toolkit"};
    app.require_subcommand(1);

    std::string config_path, out_dir;
    std::vector<std::string> sets;
    bool verbose = false, inject_fault = false;

    auto* run = app.add_subcommand("run", "run a training experiment from a config file");
    run->add_option("--config", config_path, "config file path")->required();
    run->add_option("--set", sets, "override, section.key=value (repeatable)");
    run->add_option("--out", out_dir, "output directory (beats run.output_dir and env root)");

    auto* select = app.add_subcommand("select", "run one coreset selection and write the CSV");
    select->add_option("--config", config_path, "config file path")->required();
    select->add_option("--set", sets, "override, section.key=value (repeatable)");
    select->add_option("--out", out_dir, "output directory");

    auto* synth = app.add_subcommand("synth", "generate and cache a synthetic dataset");
    synth->add_option("--config", config_path, "config file path")->required();
    synth->add_option("--set", sets, "override, section.key=value (repeatable)");
    synth->add_option("--out", out_dir, "output directory");

    auto* verify = app.add_subcommand("verify", "run the property-check suite");
    verify->add_flag("--verbose", verbose, "print per-property timing");
    verify->add_flag("--inject-fault", inject_fault, "self-test hook: force a failure")
        ->group("");  // hidden

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }

    try {
        if (run->parsed()) return cmd_run(config_path, sets, out_dir);
        if (select->parsed()) return cmd_select(config_path, sets, out_dir);
        if (synth->parsed()) return cmd_synth(config_path, sets, out_dir);
        if (verify->parsed()) return cmd_verify(verbose, inject_fault);
    } catch (const corekit::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return kExitConfig;
}
