#pragma once

#include <string>
#include <vector>

namespace agnostic::cli {

struct Check {
  std::string suite;
  std::string name;
  bool pass = false;
  std::string detail;
};

// Suites: hermite, regression, influence, cover, localization, relu,
// datasets, all. Throws ConfigError for an unknown suite.
std::vector<Check> run_suite(const std::string& suite, unsigned long long seed = 1);

std::vector<std::string> suite_names();

}  // namespace agnostic::cli
