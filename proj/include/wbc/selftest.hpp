#pragma once

#include <string>
#include <vector>

namespace wbc {

struct SelfTestCheck {
  std::string module;
  std::string name;
  bool pass = false;
  std::string detail;
};

struct SelfTestReport {
  std::vector<SelfTestCheck> checks;
  int failed = 0;
  bool pass() const { return failed == 0; }
};

/// Closed-form examples of every module plus the flat-space identities.
/// `inject_fault` = "geometry" scales every distance by 1.5 while the checks
/// run, which must surface as named failures. Runs on the calling thread.
SelfTestReport run_selftest(const std::string& inject_fault = "");

} // namespace wbc
