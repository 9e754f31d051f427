#pragma once

#include <string>
#include <vector>

#include "hostpar/io.hpp"

namespace hostpar::reference {

// Bundled models. The JSON files under models/ are generated from these
// builders and checked against them in the tests.

ModelFile m1();  // supercritical A-line, nontrivial L(A)
ModelFile m2();  // strongly subcritical A-line
ModelFile m3();  // SupC, mu_B > gamma, B-line strongly subcritical (Yaglom regime)
ModelFile gw_test();     // law_B with sum law {0: 1/4, 2: 3/4}
ModelFile edge_pAA0();   // p_AA = 0, nu < 1
ModelFile edge_delta1(); // p_AA = 0, p_AB = 1, A-line offspring delta_1

struct Named {
  std::string file;
  ModelFile (*build)();
};

const std::vector<Named>& all();

}  // namespace hostpar::reference
