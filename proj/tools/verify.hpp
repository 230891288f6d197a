#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace polyrad::tools {

struct Finding {
  std::string suite;
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Runs one suite: closed-forms, first-integral, kernels, invariants, or all.
/// Throws std::invalid_argument for an unknown suite name.
std::vector<Finding> run_suite(const std::string& suite, const std::optional<std::filesystem::path>& kernel_cache);

const std::vector<std::string>& suite_names();

}  // namespace polyrad::tools
