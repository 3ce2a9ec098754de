#include <cstdio>
#include <cstdlib>
#include <string>

#include "nonstatcov/harness/acceptance.hpp"
#include "nonstatcov/harness/config.hpp"

namespace h = nonstatcov::harness;

int main(int argc, char** argv) {
  std::uint64_t seed = 20240601;
  if (argc > 1) seed = std::strtoull(argv[1], nullptr, 10);

  const h::Outcome out = h::verify_all(h::reference_vma(), seed);
  int failures = 0;
  for (const auto& v : out.verdicts) {
    double seconds = 0.0;
    for (const auto& [key, value] : v.values)
      if (key == "seconds") seconds = value;
    std::printf("[%s] %s (%.1f s): %s\n", v.pass ? "PASS" : "FAIL", v.name.c_str(), seconds,
                v.detail.c_str());
    if (!v.pass) ++failures;
  }
  std::printf("%d of %zu acceptance criteria passed\n",
              static_cast<int>(out.verdicts.size()) - failures, out.verdicts.size());
  return failures == 0 ? EXIT_SUCCESS : EXIT_FAILURE;
}
