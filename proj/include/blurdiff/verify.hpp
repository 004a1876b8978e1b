#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace blurdiff {

struct VerifyOptions {
  bool corrupt_dct = false;  // negative control: perturbs the basis before the orthogonality check
  std::uint64_t seed = 20221006;
};

struct CheckResult {
  std::string id;
  bool passed = false;
  std::string detail;
};

struct VerifyReport {
  std::vector<CheckResult> checks;
  std::size_t declared = 0;
  std::size_t covered = 0;

  bool manifest_complete() const { return covered == declared; }
  bool all_passed() const;
};

/// Identifiers of every invariant the verification suite covers.
const std::vector<std::string_view>& declared_invariants();

VerifyReport run_verification(const VerifyOptions& options);

/// One "PASS|FAIL <id> <detail>" line per check, the manifest and a final
/// RESULT line.
std::string format_report(const VerifyReport& report);

}  // namespace blurdiff
