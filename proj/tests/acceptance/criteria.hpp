#ifndef ROLEM_ACCEPTANCE_CRITERIA_HPP
#define ROLEM_ACCEPTANCE_CRITERIA_HPP

#include <string>
#include <vector>

namespace acceptance {

struct Result {
  std::string id;
  bool pass = false;
  std::string detail;
};

Result criterion_geweke();                    // 1
Result criterion_conditional_oracles();       // 2
Result criterion_proposal_symmetry();         // 3
Result criterion_density_oracles();           // 4
std::vector<Result> criterion_replication();  // 5 and 6 (shared runs)
Result criterion_model_selection();           // 7
Result criterion_moment_identity();           // 8
Result criterion_structured_prior();          // 9
Result criterion_bic_bookkeeping();           // 10
Result criterion_reproducibility();           // 11

}  // namespace acceptance

#endif  // ROLEM_ACCEPTANCE_CRITERIA_HPP
