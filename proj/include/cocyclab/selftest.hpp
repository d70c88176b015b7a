#pragma once

#include <string>
#include <vector>

namespace cocyclab {

struct SelfCheck {
  std::string name;
  bool pass = false;
  std::string detail;
};

// Fast property checks across every module, each against an independent
// recomputation.
std::vector<SelfCheck> run_selftest(unsigned threads = 1);

}  // namespace cocyclab
