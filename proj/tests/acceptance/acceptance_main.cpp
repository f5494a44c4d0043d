// Acceptance gate: runs the numbered criteria and prints one PASS/FAIL line
// per criterion.  With no arguments every criterion runs; `--criterion K`
// restricts to one group (5-6 share their fits and run together).

#include <cstdio>
#include <cstring>
#include <string>
#include <vector>

#include "criteria.hpp"

int main(int argc, char** argv) {
  std::string which = "all";
  for (int i = 1; i + 1 < argc; ++i)
    if (std::strcmp(argv[i], "--criterion") == 0) which = argv[i + 1];

  auto wants = [&](const char* id) { return which == "all" || which == id; };

  std::vector<acceptance::Result> results;
  if (wants("1")) results.push_back(acceptance::criterion_geweke());
  if (wants("2")) results.push_back(acceptance::criterion_conditional_oracles());
  if (wants("3")) results.push_back(acceptance::criterion_proposal_symmetry());
  if (wants("4")) results.push_back(acceptance::criterion_density_oracles());
  if (wants("5-6")) {
    for (auto& r : acceptance::criterion_replication())
      results.push_back(std::move(r));
  }
  if (wants("7")) results.push_back(acceptance::criterion_model_selection());
  if (wants("8")) results.push_back(acceptance::criterion_moment_identity());
  if (wants("9")) results.push_back(acceptance::criterion_structured_prior());
  if (wants("10")) results.push_back(acceptance::criterion_bic_bookkeeping());
  if (wants("11")) results.push_back(acceptance::criterion_reproducibility());

  if (results.empty()) {
    std::fprintf(stderr, "unknown criterion '%s'\n", which.c_str());
    return 2;
  }

  int failures = 0;
  for (const auto& r : results) {
    std::printf("%s criterion %s: %s\n", r.pass ? "PASS" : "FAIL",
                r.id.c_str(), r.detail.c_str());
    std::fflush(stdout);
    if (!r.pass) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
