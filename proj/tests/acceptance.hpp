#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace mogi::acceptance {

enum class Tier { Quick, Full };

struct CriterionResult {
  int id = 0;
  std::string title;
  bool pass = false;
  double seconds = 0.0;
  double budget = 0.0;  // seconds; 0 = none stated
  std::string detail;
};

/// Criteria 1..10. The quick tier uses fewer random bodies and no 3D solver runs; the
/// full tier is the stated acceptance run.
CriterionResult run_criterion(int id, Tier tier);
std::vector<CriterionResult> run_all(Tier tier, std::ostream* progress = nullptr);

/// "criterion  6 PASS   1.23 s / 60 s  <detail>"
std::string format(const CriterionResult& r);

}  // namespace mogi::acceptance
