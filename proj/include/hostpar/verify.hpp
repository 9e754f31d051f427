#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace hostpar {

enum class Budget { small, full };

enum class CheckStatus { pass, fail, skipped, error };

const char* to_string(CheckStatus s);

struct CheckResult {
  int id = 0;
  std::string name;
  CheckStatus status = CheckStatus::skipped;
  std::string observed;
  std::string expected;
  double seconds = 0.0;
  double time_limit = 0.0;
  bool retried = false;
};

struct VerifyOptions {
  Budget budget = Budget::full;
  std::filesystem::path model_dir;
  // Replaces M1 in the model-generic checks (identities, means, determinism).
  std::optional<std::filesystem::path> model_file;
  std::uint64_t seed = 20240601;
  std::size_t workers = 1;
  // Called after each check finishes.
  std::function<void(const CheckResult&)> on_result;
};

std::vector<CheckResult> run_verify(const VerifyOptions& options);

/// One human-readable line: "[PASS] 3 name: observed ... expected ... (t s)".
std::string format_result(const CheckResult& r);

bool all_passed(const std::vector<CheckResult>& results);

}  // namespace hostpar
