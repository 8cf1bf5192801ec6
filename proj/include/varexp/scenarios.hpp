#pragma once

#include <json.hpp>
#include <string>
#include <vector>

#include "varexp/exponent.hpp"
#include "varexp/grid.hpp"

namespace varexp {

struct ScenarioResult {
  std::string csv;          // data.csv payload, header + sorted rows
  nlohmann::json meta;      // config echo, version, fitted constants
  bool numeric_failure = false;
};

// Builders shared by the runner and the test suites.
DomainPtr domain_from_config(const nlohmann::json& cfg);
ExponentField exponent_from_config(const nlohmann::json& cfg, const DomainPtr& dom);

// Seeded low-frequency perturbation used by the rigidity/korn families.
TensorField perturbation_field(const DomainPtr& dom, uint64_t seed);

// Executes one scenario configuration (validates first; throws
// std::invalid_argument on malformed configs).
ScenarioResult run_scenario(const nlohmann::json& config);

// Applies --set key=value dot-path overrides onto a config.
nlohmann::json apply_overrides(nlohmann::json config, const std::vector<std::string>& sets);

// Runs and writes data.csv / meta.json under out_dir. Returns the CLI exit
// code: 0 success, 2 validation error, 3 flagged numerical failure.
int run_scenario_to_dir(const nlohmann::json& config, const std::string& out_dir);

extern const char* kToolVersion;

}  // namespace varexp
