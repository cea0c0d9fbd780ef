#pragma once

#include <functional>
#include <string>
#include <vector>

namespace nlslab {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;  // measured values against their thresholds
  double seconds = 0.0;
  double budget = 0.0;  // wall-clock limit, part of the pass condition; 0 for none
};

// "PASS  6 conservation: ... [12.3 s / 60 s]"
std::string format_result(const CriterionResult& r);

// Runs the fourteen criteria at the reference resolution (d=5, rmax=40,
// n=1024, dt=1e-3). Scenario runs are written under work_dir and shared
// between the criteria that read them. on_result is called as each
// criterion finishes.
std::vector<CriterionResult> run_acceptance(const std::string& work_dir,
                                            const std::function<void(const CriterionResult&)>& on_result = {});

}  // namespace nlslab
