// One PASS/FAIL line per acceptance criterion, measured values indented below it.
#include "capflow/verify.hpp"

#include <chrono>
#include <cstdio>

int main() {
  using clock = std::chrono::steady_clock;
  const auto t0 = clock::now();
  capflow::Verifier v;
  int failed = 0;
  for (const auto& c : v.all()) {
    std::printf("%s\n", capflow::criterion_line(c).c_str());
    for (const auto& l : c.lines) std::printf("    %s\n", l.c_str());
    std::fflush(stdout);
    failed += !c.pass;
  }
  std::printf("%d of 11 criteria failed (%.0f s)\n", failed, std::chrono::duration<double>(clock::now() - t0).count());
  return failed == 0 ? 0 : 1;
}
