#include <doctest.h>

#include "corekit/config.hpp"

using namespace corekit;

namespace {

const char* kMinimalSynthetic = R"(
# minimal synthetic experiment
[data]
kind = synthetic
n = 60
test_n = 20
d = 2
seed = 4
class_fractions = 0.5,0.5
class_means = -1,0 | 1,0
class_scales = 0.8 | 0.8

[model]
kind = logistic
mu = 0.05

[selection]
method = random
fraction = 0.5

[run]
epochs = 2
batch_size = 8
seed = 1
)";

}  // namespace

TEST_CASE("config parsing and typed getters") {
    ConfigMap cfg = ConfigMap::parse("[a]\nx = 3\ny = 2.5\nflag = true\nname = hello\n");
    CHECK(cfg.get_size("a", "x") == 3);
    CHECK(cfg.get_double("a", "y") == 2.5);
    CHECK(cfg.get_bool("a", "flag") == true);
    CHECK(cfg.get_string("a", "name") == "hello");
    CHECK(cfg.get_double("a", "missing", 7.0) == 7.0);
    CHECK_NOTHROW(cfg.ensure_all_consumed());
}

TEST_CASE("config rejects malformed input") {
    CHECK_THROWS_AS(ConfigMap::parse("x = 1\n"), ConfigError);          // key outside section
    CHECK_THROWS_AS(ConfigMap::parse("[a\nx = 1\n"), ConfigError);      // bad header
    CHECK_THROWS_AS(ConfigMap::parse("[a]\nnot a pair\n"), ConfigError);
    CHECK_THROWS_AS(ConfigMap::parse("[a]\nx = 1\nx = 2\n"), ConfigError);  // duplicate

    ConfigMap cfg = ConfigMap::parse("[a]\nx = oops\n");
    CHECK_THROWS_WITH_AS(cfg.get_size("a", "x"), doctest::Contains("a.x"), ConfigError);
}

TEST_CASE("unknown keys are a hard error") {
    ConfigMap cfg = ConfigMap::parse("[a]\nx = 1\ntypo_key = 2\n");
    cfg.get_size("a", "x");
    CHECK_THROWS_WITH_AS(cfg.ensure_all_consumed(), doctest::Contains("a.typo_key"), ConfigError);
}

TEST_CASE("overrides replace values before consumption") {
    ConfigMap cfg = ConfigMap::parse("[run]\nepochs = 3\n");
    cfg.set_override("run.epochs=9");
    CHECK(cfg.get_size("run", "epochs") == 9);
    CHECK_THROWS_AS(cfg.set_override("no_equals_sign"), ConfigError);
    CHECK_THROWS_AS(cfg.set_override("nodot=1"), ConfigError);
}

TEST_CASE("minimal experiment config builds and validates") {
    ConfigMap cfg = ConfigMap::parse(kMinimalSynthetic);
    const ExperimentConfig exp = build_experiment(cfg);
    CHECK(exp.train.n() == 60);
    CHECK(exp.test.has_value());
    CHECK(exp.test->n() == 20);
    CHECK(exp.model_kind == ModelKind::logistic);
    CHECK(exp.method == SelectionMethod::random);
    CHECK(exp.fraction == 0.5);
    CHECK(exp.epochs == 2);
}

TEST_CASE("field validation names the offending key") {
    ConfigMap cfg = ConfigMap::parse(kMinimalSynthetic);
    cfg.set_override("selection.fraction=1.5");
    CHECK_THROWS_WITH_AS(build_experiment(cfg), doctest::Contains("fraction"), ConfigError);

    ConfigMap cfg2 = ConfigMap::parse(kMinimalSynthetic);
    cfg2.set_override("model.kind=perceptron");
    CHECK_THROWS_WITH_AS(build_experiment(cfg2), doctest::Contains("model.kind"), ConfigError);

    ConfigMap cfg3 = ConfigMap::parse(kMinimalSynthetic);
    cfg3.set_override("data.class_fractions=0.5,0.4");
    CHECK_THROWS_AS(build_experiment(cfg3), ConfigError);
}

TEST_CASE("synthetic section parses clusters per class") {
    ConfigMap cfg = ConfigMap::parse(R"(
[data]
kind = synthetic
n = 50
d = 2
seed = 2
class_fractions = 0.6,0.4
class_means = 0,0 ; 2,2 | -1,-1
class_scales = 1.0 ; 0.5 | 0.7
)");
    const SyntheticConfig synth = parse_synthetic(cfg);
    CHECK(synth.train_spec.clusters[0].size() == 2);
    CHECK(synth.train_spec.clusters[1].size() == 1);
    CHECK(synth.train_spec.clusters[0][1].mean == Vector{2.0, 2.0});
    CHECK(synth.train_spec.clusters[0][1].scale == 0.5);
    CHECK(synth.test_n == 12);  // n/4 default
    CHECK_NOTHROW(cfg.ensure_section_consumed("data"));
}

TEST_CASE("mismatched cluster lists are rejected") {
    ConfigMap cfg = ConfigMap::parse(R"(
[data]
kind = synthetic
n = 50
d = 2
seed = 2
class_fractions = 0.6,0.4
class_means = 0,0 ; 2,2 | -1,-1
class_scales = 1.0 | 0.7
)");
    CHECK_THROWS_AS(parse_synthetic(cfg), ConfigError);
}
