// Runs the acceptance criteria and prints one line per criterion.
// Usage: acceptance [id ...]

#include <cstdlib>
#include <iostream>
#include <set>

#include "covertime/acceptance.hpp"

int main(int argc, char** argv) {
  using namespace covertime::acceptance;
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));
  Profile p;
  if (const char* s = std::getenv("COVERTIME_SEED")) p.seed = std::strtoull(s, nullptr, 10);
  const auto rs = all_runners();
  int failed = 0;
  for (std::size_t i = 0; i < rs.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!only.empty() && !only.count(id)) continue;
    const auto c = run_one(rs[i], p, id);
    std::cout << line(c) << std::endl;
    if (!c.pass) ++failed;
  }
  std::cout << (failed ? std::to_string(failed) + " criteria failed" : "all criteria passed") << std::endl;
  return failed ? 1 : 0;
}
