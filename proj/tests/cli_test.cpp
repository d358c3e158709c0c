#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "corekit/data.hpp"

namespace fs = std::filesystem;

namespace {

const std::string kCli = CORESET_CLI_PATH;

int run_command(const std::string& args) {
    const int status = std::system((kCli + " " + args + " > /dev/null 2>&1").c_str());
    return WEXITSTATUS(status);
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::size_t count_lines(const std::string& text) {
    std::size_t lines = 0;
    for (char c : text)
        if (c == '\n') ++lines;
    return lines;
}

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::path("/tmp") / name) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
};

std::string write_config(const fs::path& dir, const std::string& extra = "") {
    const std::string config = R"([data]
kind = synthetic
n = 80
test_n = 20
d = 2
seed = 4
class_fractions = 0.75,0.25
class_means = -1,0 ; 1,1 | 2,-1
class_scales = 0.6 ; 0.4 | 0.5

[model]
kind = logistic
mu = 0.05

[optim]
kind = sgd
alpha0 = 0.2

[selection]
method = adacore
fraction = 0.25
refresh_period = 2

[curvature]
per_example_hessian = true

[run]
epochs = 3
batch_size = 16
seed = 1
)" + extra;
    const fs::path path = dir / "exp.ini";
    std::ofstream out(path);
    out << config;
    return path.string();
}

}  // namespace

TEST_CASE("run writes metrics and exits zero") {
    TempDir dir("corekit_cli_run");
    const std::string config = write_config(dir.path);
    const std::string out = (dir.path / "out").string();
    CHECK(run_command("run --config " + config + " --out " + out) == 0);
    CHECK(fs::exists(out + "/metrics.csv"));
    CHECK(fs::exists(out + "/selection_counts.csv"));
    CHECK(fs::exists(out + "/per_example.csv"));
    CHECK(fs::exists(out + "/coreset_epoch0.csv"));
    CHECK(fs::exists(out + "/coreset_epoch2.csv"));
    // header + one row per epoch
    CHECK(count_lines(slurp(out + "/metrics.csv")) == 4);
}

TEST_CASE("overrides shrink the run") {
    TempDir dir("corekit_cli_override");
    const std::string config = write_config(dir.path);
    const std::string out = (dir.path / "out").string();
    CHECK(run_command("run --config " + config + " --set run.epochs=1 --out " + out) == 0);
    CHECK(count_lines(slurp(out + "/metrics.csv")) == 2);
}

TEST_CASE("invalid fraction exits with the config code and names the field") {
    TempDir dir("corekit_cli_badfrac");
    const std::string config = write_config(dir.path);
    const std::string out = (dir.path / "out").string();
    const int status = std::system((kCli + " run --config " + config +
                                    " --set selection.fraction=1.5 --out " + out +
                                    " > /dev/null 2> " + (dir.path / "err.txt").string())
                                       .c_str());
    CHECK(WEXITSTATUS(status) == 2);
    CHECK(slurp((dir.path / "err.txt").string()).find("fraction") != std::string::npos);
}

TEST_CASE("unknown config keys exit with the config code") {
    TempDir dir("corekit_cli_unknown");
    const std::string config = write_config(dir.path, "\n[run]\n");
    // Append a typo key into an existing section via override-free file edit.
    std::ofstream(config, std::ios::app) << "\n[selection]\n";
    const std::string bad = write_config(dir.path, "");
    std::ofstream(bad, std::ios::app) << "typo_key = 3\n";
    CHECK(run_command("run --config " + bad + " --out " + (dir.path / "o").string()) == 2);
}

TEST_CASE("select is deterministic and honors fraction one") {
    TempDir dir("corekit_cli_select");
    const std::string config = write_config(dir.path);
    const std::string out1 = (dir.path / "s1").string();
    const std::string out2 = (dir.path / "s2").string();
    CHECK(run_command("select --config " + config + " --out " + out1) == 0);
    CHECK(run_command("select --config " + config + " --out " + out2) == 0);
    CHECK(slurp(out1 + "/coreset.csv") == slurp(out2 + "/coreset.csv"));

    const std::string full = (dir.path / "full").string();
    CHECK(run_command("select --config " + config + " --set selection.fraction=1.0 --out " +
                      full) == 0);
    const std::string csv = slurp(full + "/coreset.csv");
    CHECK(count_lines(csv) == 81);  // header + one row per example
    CHECK(csv.find(",1") != std::string::npos);

    // 25% of a 60/20 split: 15 and 5 rows.
    const std::string frac = slurp(out1 + "/coreset.csv");
    std::size_t class0 = 0, class1 = 0;
    std::istringstream ss(frac);
    std::string line;
    std::getline(ss, line);  // header
    while (std::getline(ss, line)) {
        if (line.rfind("0,", 0) == 0) ++class0;
        if (line.rfind("1,", 0) == 0) ++class1;
    }
    CHECK(class0 == 15);
    CHECK(class1 == 5);
}

TEST_CASE("verify passes clean and fails under fault injection") {
    CHECK(run_command("verify") == 0);
    CHECK(run_command("verify --verbose") == 0);
    CHECK(run_command("verify --inject-fault") == 1);
}

TEST_CASE("synth caches datasets that reload identically") {
    TempDir dir("corekit_cli_synth");
    const std::string config = write_config(dir.path);
    const std::string out = (dir.path / "cache").string();
    CHECK(run_command("synth --config " + config + " --out " + out) == 0);
    const corekit::Dataset train = corekit::load_libsvm(out + "/synthetic_train.libsvm");
    CHECK(train.n() == 80);
    CHECK(train.dim() == 2);
    const corekit::Dataset test = corekit::load_libsvm(out + "/synthetic_test.libsvm");
    CHECK(test.n() == 20);
}

TEST_CASE("output root env var is honored and the flag wins") {
    TempDir dir("corekit_cli_envroot");
    const std::string config = write_config(dir.path);
    const std::string root = (dir.path / "root").string();
    // Relative --out lands under the env root.
    const int status = std::system(("COREKIT_OUT_ROOT=" + root + " " + kCli +
                                    " select --config " + config +
                                    " --out rel_dir > /dev/null 2>&1")
                                       .c_str());
    CHECK(WEXITSTATUS(status) == 0);
    CHECK(fs::exists(root + "/rel_dir/coreset.csv"));

    // Absolute --out ignores the env root.
    const std::string abs_out = (dir.path / "abs").string();
    const int status2 = std::system(("COREKIT_OUT_ROOT=" + root + " " + kCli +
                                     " select --config " + config + " --out " + abs_out +
                                     " > /dev/null 2>&1")
                                        .c_str());
    CHECK(WEXITSTATUS(status2) == 0);
    CHECK(fs::exists(abs_out + "/coreset.csv"));
    CHECK(!fs::exists(root + abs_out));
}

TEST_CASE("missing subcommand or config file is a usage error") {
    CHECK(run_command("") == 2);
    CHECK(run_command("run --config /nonexistent/file.ini") == 2);
}
