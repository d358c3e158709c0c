#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "corekit/data.hpp"
#include "corekit/harness.hpp"

namespace corekit {

/// Flat `[section]` / `key = value` config text. Every key must be consumed
/// by a typed getter; leftovers are reported as unknown keys (hard error, no
/// silent defaults for typos).
class ConfigMap {
  public:
    static ConfigMap parse(const std::string& text);
    static ConfigMap from_file(const std::string& path);

    /// Applies a `section.key=value` override string.
    void set_override(const std::string& assignment);

    bool has(const std::string& section, const std::string& key) const;

    std::string get_string(const std::string& section, const std::string& key,
                           std::optional<std::string> fallback = {});
    double get_double(const std::string& section, const std::string& key,
                      std::optional<double> fallback = {});
    std::size_t get_size(const std::string& section, const std::string& key,
                         std::optional<std::size_t> fallback = {});
    std::uint64_t get_u64(const std::string& section, const std::string& key,
                          std::optional<std::uint64_t> fallback = {});
    bool get_bool(const std::string& section, const std::string& key,
                  std::optional<bool> fallback = {});
    std::vector<double> get_doubles(const std::string& section, const std::string& key,
                                    std::optional<std::vector<double>> fallback = {});
    std::vector<std::size_t> get_sizes(const std::string& section, const std::string& key,
                                       std::optional<std::vector<std::size_t>> fallback = {});

    /// Throws ConfigError naming every key never consumed by a getter.
    void ensure_all_consumed() const;

    /// Same check restricted to one section (for tools that only read part
    /// of a shared config file).
    void ensure_section_consumed(const std::string& section) const;

  private:
    std::optional<std::string> lookup(const std::string& section, const std::string& key);
    std::map<std::string, std::map<std::string, std::string>> values_;
    std::set<std::string> consumed_;  // "section.key"
};

/// [data] section with kind=synthetic; test split drawn with seed+1.
struct SyntheticConfig {
    SyntheticSpec train_spec;
    std::size_t test_n = 0;
};
SyntheticConfig parse_synthetic(ConfigMap& cfg);

/// Builds the full experiment from a parsed config, loading or generating
/// the datasets. Throws ConfigError on any invalid or unknown entry.
ExperimentConfig build_experiment(ConfigMap& cfg);

}  // namespace corekit
