// Acceptance suite: one PASS/FAIL line per criterion, exit 3 on any failure.
#include <filesystem>
#include <iostream>

#include "nlslab/acceptance.hpp"

int main(int argc, char** argv) {
  const std::string work = argc > 1 ? argv[1]
                                    : (std::filesystem::temp_directory_path() / "nlslab_acceptance").string();
  std::size_t passed = 0, total = 0;
  for (const auto& r : nlslab::run_acceptance(work, [](const nlslab::CriterionResult& r) {
         std::cout << nlslab::format_result(r) << std::endl;
       })) {
    ++total;
    passed += r.pass;
  }
  std::cout << "acceptance: " << passed << "/" << total << " passed (runs in " << work << ")\n";
  return passed == total ? 0 : 3;
}
